"""Pure grid-enumeration oracles for the exponent terms.

These deliberately avoid the solver's refinement and duality machinery:
every quantity is a minimum over explicit dense simplex grids, so the two
routes share nothing but the divergence primitives.  Used by the
verification command and the acceptance tests.
"""

import numpy as np

from . import divergence as dv
from .exponents import ConstantLambda, lambda_matrix
from .simplex import clamp_rows, grid_array


def oracle_min_single(objective_rows, constraint_rows, d, m, eps=None):
    """min of a row-vectorized objective over one dense grid."""
    pts = grid_array(d, m, eps=eps)
    obj = np.where(constraint_rows(pts), objective_rows(pts), np.inf)
    i = int(np.argmin(obj))
    return float(obj[i]), pts[i]


def oracle_kappa(inst, m=2000, inner_m=None):
    """Dense-grid kappa: pairs (Q0, Q1) on the eps-floored grid."""
    pg = grid_array(inst.d, m, eps=inst.eps)
    a, b = inst.alpha, inst.beta
    obj0 = a * dv.kl_rows(pg, inst.p0)  # (N,)
    obj1 = (1 + b) * dv.kl_rows(pg, inst.p1)  # (N,)
    if isinstance(inst.lam, ConstantLambda):
        best = np.inf
        lam0 = inst.lam.lambda0
        for i in range(pg.shape[0]):
            g = dv.gjs_cross(pg[i][None, :], pg, a)[0]
            ok = g <= lam0
            if ok.any():
                cand = obj0[i] + obj1[ok].min()
                best = min(best, float(cand))
        return best
    inner_m = inner_m or m
    ig = grid_array(inst.d, inner_m, eps=inst.eps)
    lam = lambda_matrix(inst.lam, ig, ig, b)  # (k, k)
    bm = b * dv.kl_matrix(pg, ig)  # (N, k)  beta*KL(Q1||P1')
    c1 = dv.kl_matrix(pg, ig)  # (N, k)  KL(Q1||P0')
    t = np.empty_like(bm)
    for j in range(ig.shape[0]):
        t[:, j] = (bm - lam[j][None, :]).min(axis=1)
    u = c1 + t  # (N, k) indexed by Q1
    ka = inst.alpha * dv.kl_matrix(pg, ig)  # (N, k) indexed by Q0
    best = np.inf
    for i in range(pg.shape[0]):  # Q0 index
        g1diag = (ka[i][None, :] + u).min(axis=1)  # (N,) over Q1
        ok = g1diag < 0
        if ok.any():
            best = min(best, float(obj0[i] + obj1[ok].min()))
    return best


def oracle_mu(inst, m=2000, inner_m=None):
    """Dense-grid mu: pairs (Q0, Q1) on the full simplex grid."""
    pg = grid_array(inst.d, m)
    a, b = inst.alpha, inst.beta
    obj0 = a * dv.kl_rows(pg, inst.p0)
    obj1 = b * dv.kl_rows(pg, inst.p1)
    lead = a * dv.kl_rows(pg, inst.p1)  # (N,) indexed by Q0
    if isinstance(inst.lam, ConstantLambda):
        floor_cost = np.array([b * dv.kl_floor_projection(q, inst.eps)[0] for q in pg])
        h = floor_cost - inst.lam.lambda0
    else:
        inner_m = inner_m or m
        ig = grid_array(inst.d, inner_m, eps=inst.eps)
        lamv = lambda_matrix(inst.lam, inst.p1[None, :], ig, b)[0]
        h = (b * dv.kl_matrix(pg, ig) - lamv[None, :]).min(axis=1)
    best = np.inf
    for i in range(pg.shape[0]):
        ok = lead[i] + h < 0
        if ok.any():
            best = min(best, float(obj0[i] + obj1[ok].min()))
    return best


def oracle_efix(inst, m=2000, coarse_m=100, inner_m=400, top_k=5):
    """Dense-grid fixed-length exponent.

    Constant lambda: exact pair grid over (Q, Q0) at density m (the Q1 block
    contributes zero at Q1 = P1 and never enters the constraint).

    Scaled-Renyi: the feasible set couples a full triple (Q, Q0, Q1), so a
    single dense triple grid at density m is out of reach.  Two stages
    instead: a global triple grid at coarse_m locates candidate basins, then
    the top_k best basins are re-gridded locally at spacing 1/m.
    """
    a, b = inst.alpha, inst.beta
    P0, P1 = inst.p0, inst.p1
    if isinstance(inst.lam, ConstantLambda):
        pg = grid_array(inst.d, m, eps=None)
        lam0 = inst.lam.lambda0
        objq = dv.kl_rows(pg, P1)
        objq0 = a * dv.kl_rows(pg, P0)
        best = np.inf
        for i in range(pg.shape[0]):  # Q0 index
            g = dv.gjs_cross(pg[i][None, :], pg, a)[0]  # over Q
            ok = g <= lam0
            if ok.any():
                best = min(best, float(objq0[i] + objq[ok].min()))
        return best

    ig = grid_array(inst.d, inner_m, eps=inst.eps)
    lam = lambda_matrix(inst.lam, ig, ig, b)

    def stage(qgrid):
        """(value, argmin index triple) over one triple grid."""
        c1 = dv.kl_matrix(qgrid, ig)  # KL(Q||P0') (N,k)
        c2 = a * dv.kl_matrix(qgrid, ig)  # (N,k) for Q0
        bm = b * dv.kl_matrix(qgrid, ig)  # (N,k) for Q1
        t = np.empty_like(bm)
        for j in range(ig.shape[0]):
            t[:, j] = (bm - lam[j][None, :]).min(axis=1)
        objq = dv.kl_rows(qgrid, P1)
        objq0 = a * dv.kl_rows(qgrid, P0)
        objq1 = b * dv.kl_rows(qgrid, P1)
        N = qgrid.shape[0]
        vals = []  # (value, (iq, i0, i1))
        for i0 in range(N):
            # g1 over (Q, Q1) for this Q0: min_j c1[q,j] + c2[i0,j] + t[q1,j]
            best_here = np.inf
            arg_here = None
            for i1 in range(N):
                g = (c1 + (c2[i0] + t[i1])[None, :]).min(axis=1)  # (N,) over Q
                ok = g < 0
                if ok.any():
                    iq = int(np.argmin(np.where(ok, objq, np.inf)))
                    v = objq[iq] + objq0[i0] + objq1[i1]
                    if v < best_here:
                        best_here, arg_here = float(v), (iq, i0, i1)
            if arg_here is not None:
                vals.append((best_here, arg_here))
        return vals

    coarse = grid_array(inst.d, coarse_m, eps=None)
    cand = sorted(stage(coarse))[:top_k]
    if not cand:
        return np.inf
    best = cand[0][0]
    spacing = 2.0 / coarse_m
    for _, (iq, i0, i1) in cand:
        centers = [coarse[iq], coarse[i0], coarse[i1]]
        locals_ = [_local_rows(c, spacing, m) for c in centers]
        v = _efix_local(inst, ig, lam, *locals_)
        best = min(best, v)
    return best


def _local_rows(center, halfwidth, density):
    d = center.size
    steps = int(np.ceil(halfwidth * density))
    offs = np.arange(-steps, steps + 1) / density
    axes = [center[i] + offs for i in range(d - 1)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    pts = np.column_stack([pts, 1.0 - pts.sum(axis=1)])
    return pts[(pts >= 0).all(axis=1)]


def _efix_local(inst, ig, lam, Qg, Q0g, Q1g):
    a, b = inst.alpha, inst.beta
    c1 = dv.kl_matrix(Qg, ig)
    c2 = a * dv.kl_matrix(Q0g, ig)
    bm = b * dv.kl_matrix(Q1g, ig)
    t = np.empty_like(bm)
    for j in range(ig.shape[0]):
        t[:, j] = (bm - lam[j][None, :]).min(axis=1)
    objq = dv.kl_rows(Qg, inst.p1)
    objq0 = a * dv.kl_rows(Q0g, inst.p0)
    objq1 = b * dv.kl_rows(Q1g, inst.p1)
    best = np.inf
    for i0 in range(Q0g.shape[0]):
        for i1 in range(Q1g.shape[0]):
            g = (c1 + (c2[i0] + t[i1])[None, :]).min(axis=1)
            ok = g < 0
            if ok.any():
                v = float(np.where(ok, objq, np.inf).min() + objq0[i0] + objq1[i1])
                if v < best:
                    best = v
    return best
