"""Sweep the constant type-I budget and print the exponent trade-off table.

As the budget lambda0 grows from near zero to GJS(P0||P1, alpha), every
type-II exponent falls to zero; the fixed-length column always trails the
sequential one.  Equivalent to `seqclass curve --preset fig2` but printed
as a table instead of CSV/SVG.
"""

import numpy as np

from seqclass import ConstantLambda, ProblemInstance, gjs_value, report

P0, P1 = (0.6, 0.4), (0.1, 0.9)
alpha, beta = 2.0, 1.0
top = gjs_value(np.asarray(P0), np.asarray(P1), alpha)
print(f"budget sweep: lambda0 from 0.001 to GJS(P0||P1,{alpha}) = {top:.4f} bits\n")

header = f"{'lambda0':>8s} {'e_seq':>8s} {'e_semi1':>8s} {'e_semi2':>8s} {'e_fix':>8s}"
print(header)
print("-" * len(header))
for lam0 in np.linspace(0.001, top * 0.98, 12):
    inst = ProblemInstance(P0, P1, alpha, beta, ConstantLambda(float(lam0)))
    rep = report(inst)
    print(
        f"{lam0:8.4f} {rep.e_seq:8.4f} {rep.e_semi1:8.4f} "
        f"{rep.e_semi2:8.4f} {rep.e_fix:8.4f}"
    )
