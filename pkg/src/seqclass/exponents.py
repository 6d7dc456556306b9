"""Exponent terms for universal classification under a type-I constraint
family lambda(P0', P1'): the Renyi term, kappa, mu, nu and the fixed-length
exponent, assembled into per-setup optimal type-II exponents.

Two constraint families are supported:

* ``ConstantLambda(lambda0)`` — closed-form rewrites exist for g1, kappa and
  the fixed-length exponent (everything reduces to GJS threshold problems).
* ``ScaledRenyiLambda(xi, offset)`` — lambda = xi * (Renyi(P1'||P0') + offset);
  the searches run over explicit simplex grids.  With offset = 0 and
  xi <= 1 the lambda-balls can never produce a false sequential decision,
  which yields an analytic kappa = +inf certificate.
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import divergence as dv
from .optimizer import ALWAYS_TRUE, SearchConfig, SearchResult, min_simplex_pair, vectorize
from .simplex import as_dist, check_eps, clamp_rows, grid_array, satisfies_floor


@dataclass(frozen=True)
class ConstantLambda:
    lambda0: float

    def __post_init__(self):
        if self.lambda0 <= 0:
            raise ValueError("lambda0 must be positive")


@dataclass(frozen=True)
class ScaledRenyiLambda:
    xi: float
    offset: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.xi <= 1.0:
            raise ValueError("xi must lie in (0, 1]")
        if self.offset < 0:
            raise ValueError("offset must be >= 0")


LambdaSpec = Union[ConstantLambda, ScaledRenyiLambda]


def lambda_eval(spec, P0p, P1p, beta):
    """Threshold value lambda(P0', P1') for a constraint family.

    On the diagonal P0' = P1' the scaled-Renyi family returns its continuous
    extension xi * offset (the Renyi part vanishes there by continuity).
    """
    if isinstance(spec, ConstantLambda):
        return spec.lambda0
    value, _ = dv.renyi_frac(P1p, P0p, beta)
    return spec.xi * (value + spec.offset)


def lambda_matrix(spec, P0rows, P1rows, beta):
    """(N,M) matrix of lambda over two row stacks of candidate pairs."""
    P0rows = np.atleast_2d(P0rows)
    P1rows = np.atleast_2d(P1rows)
    if isinstance(spec, ConstantLambda):
        return np.full((P0rows.shape[0], P1rows.shape[0]), spec.lambda0)
    w = beta / (1.0 + beta)
    z = (P1rows**w) @ (P0rows ** (1.0 - w)).T  # (M,N)
    ren = -(1.0 + beta) * np.log(z.T) / dv.LN2
    return spec.xi * (ren + spec.offset)


@dataclass(frozen=True)
class ProblemInstance:
    P0: tuple
    P1: tuple
    alpha: float
    beta: float
    lam: LambdaSpec
    eps: float = 0.01

    def __post_init__(self):
        P0 = as_dist(self.P0, "P0")
        P1 = as_dist(self.P1, "P1")
        if P0.size != P1.size:
            raise ValueError("P0 and P1 must share an alphabet")
        if np.array_equal(P0, P1):
            raise ValueError("distinct distributions required")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        check_eps(self.eps, P0.size)
        if not (satisfies_floor(P0, self.eps) and satisfies_floor(P1, self.eps)):
            raise ValueError("P0 and P1 must satisfy the epsilon floor")
        object.__setattr__(self, "P0", tuple(float(x) for x in P0))
        object.__setattr__(self, "P1", tuple(float(x) for x in P1))

    @property
    def p0(self):
        return np.asarray(self.P0)

    @property
    def p1(self):
        return np.asarray(self.P1)

    @property
    def d(self):
        return len(self.P0)


def _inner_density(inst, cfg):
    # density of the fixed (P0', P1') grids used when evaluating g1 and
    # friends for the scaled-Renyi family; the inner minima are smooth, so
    # grid error is quadratic in the spacing
    m = cfg.resolve_m(inst.d)
    return 2 * m if inst.d == 2 else m


def g1(Q, Q0, Q1, inst, cfg=SearchConfig()):
    """Sequential-decision score: how lambda-close (Q, Q0, Q1) is to a null pair.

    inf over candidate pairs (P0', P1') in the eps floor of
        KL(Q||P0') + alpha*KL(Q0||P0') + beta*KL(Q1||P1') - lambda(P0', P1').
    Negative means some admissible null pair explains the tuple within its
    type-I budget.  Constant lambda collapses to GJS(Q0||Q, alpha) - lambda0.
    """
    Q = as_dist(Q, "Q")
    Q0 = as_dist(Q0, "Q0")
    Q1 = as_dist(Q1, "Q1")
    if isinstance(inst.lam, ConstantLambda):
        return dv.gjs_value(Q0, Q, inst.alpha) - inst.lam.lambda0
    return float(g1_batch(Q[None, :], Q0[None, :], Q1[None, :], inst, cfg)[0])


def g1_batch(Qrows, Q0rows, Q1rows, inst, cfg=SearchConfig(), refine=True):
    """Vectorized g1 over row stacks (same leading length), scaled-Renyi path."""
    k = _inner_density(inst, cfg)
    p0g = grid_array(inst.d, k, eps=inst.eps)
    p1g = p0g
    lam = lambda_matrix(inst.lam, p0g, p1g, inst.beta)  # (k0, k1)
    a = dv.kl_matrix(Qrows, p0g) + inst.alpha * dv.kl_matrix(Q0rows, p0g)  # (N, k0)
    b = inst.beta * dv.kl_matrix(Q1rows, p1g)  # (N, k1)
    t = np.empty_like(a)
    for j in range(p0g.shape[0]):
        t[:, j] = (b - lam[j][None, :]).min(axis=1)
    vals = (a + t).min(axis=1)
    if not refine:
        return vals
    # local polish around the per-row argmin pair; the objective is smooth in
    # (P0', P1') so a couple of shrinking box passes suffice
    jstar = (a + t).argmin(axis=1)
    lstar = np.empty_like(jstar)
    for i in range(Qrows.shape[0]):
        lstar[i] = (b[i] - lam[jstar[i]]).argmin()
    out = vals.copy()
    for i in range(Qrows.shape[0]):
        out[i] = min(
            out[i],
            _g1_polish(
                Qrows[i], Q0rows[i], Q1rows[i], inst, p0g[jstar[i]], p1g[lstar[i]], k
            ),
        )
    return out


def _g1_polish(Q, Q0, Q1, inst, u0, v0, k):
    from .optimizer import _box_grid  # local import to avoid cycle noise

    best = np.inf
    u, v = u0, v0
    density = k
    for _ in range(2):
        halfwidth = 2.0 / density
        density *= 10
        U = _box_grid(u, halfwidth, density, inst.eps)
        V = _box_grid(v, halfwidth, density, inst.eps)
        lam = lambda_matrix(inst.lam, U, V, inst.beta)
        a = (dv.kl_matrix(Q[None, :], U) + inst.alpha * dv.kl_matrix(Q0[None, :], U))[0]
        b = inst.beta * dv.kl_matrix(Q1[None, :], V)[0]
        g = a[:, None] + b[None, :] - lam
        ij = np.unravel_index(int(np.argmin(g)), g.shape)
        if g[ij] < best:
            best = float(g[ij])
        u, v = U[ij[0]], V[ij[1]]
    return best


def renyi_term(inst):
    """The fully-sequential Renyi term: min_V alpha*KL(V||P0) + KL(V||P1)."""
    value, _ = dv.renyi_frac(inst.p0, inst.p1, inst.alpha)
    return value


def kappa_certified_infinite(inst):
    """True when lambda <= Renyi pointwise, so no tuple can ever score g1 < 0.

    Holds for the scaled-Renyi family with offset 0 and xi <= 1: for any
    (Q0, Q1) and candidate pair, the weighted KL sum in g1 is at least the
    Renyi divergence of the pair, hence at least lambda.
    """
    return isinstance(inst.lam, ScaledRenyiLambda) and inst.lam.offset == 0.0


def kappa(inst, cfg=SearchConfig()):
    return kappa_search(inst, cfg).value


def kappa_search(inst, cfg=SearchConfig()):
    """inf over (Q0, Q1) in the eps floor with g1(Q1, Q0, Q1) < 0 of
    (1+beta)*KL(Q1||P1) + alpha*KL(Q0||P0)."""
    a, b = inst.alpha, inst.beta
    P0, P1 = inst.p0, inst.p1
    if isinstance(inst.lam, ConstantLambda):
        lam0 = inst.lam.lambda0
        if dv.gjs_value(P0, P1, a) <= lam0:
            return SearchResult(0.0, (P0, P1), True)

        objective = vectorize(
            lambda A, B: a * dv.kl_rows(A, P0)[:, None] + (1 + b) * dv.kl_rows(B, P1)[None, :]
        )
        constraint = vectorize(lambda A, B: dv.gjs_cross(A, B, a) <= lam0)
        return min_simplex_pair(objective, constraint, inst.d, _with_eps(cfg, inst.eps))
    if kappa_certified_infinite(inst):
        return SearchResult(math.inf, None, False)

    objective = vectorize(
        lambda A, B: a * dv.kl_rows(A, P0)[:, None] + (1 + b) * dv.kl_rows(B, P1)[None, :]
    )

    def constraint(A, B):
        return _g1_diag_matrix(A, B, inst, cfg) < 0.0

    return min_simplex_pair(objective, vectorize(constraint), inst.d, _with_eps(cfg, inst.eps))


def _g1_diag_matrix(Q0rows, Q1rows, inst, cfg):
    """(N,M) matrix of g1(Q1_j, Q0_i, Q1_j) for the scaled-Renyi family."""
    k = _inner_density(inst, cfg)
    pg = grid_array(inst.d, k, eps=inst.eps)
    lam = lambda_matrix(inst.lam, pg, pg, inst.beta)
    ka = inst.alpha * dv.kl_matrix(Q0rows, pg)  # (N, k)
    c1 = dv.kl_matrix(Q1rows, pg)  # (M, k)
    bm = inst.beta * dv.kl_matrix(Q1rows, pg)  # (M, k)
    t = np.empty_like(c1)
    for j in range(pg.shape[0]):
        t[:, j] = (bm - lam[j][None, :]).min(axis=1)
    u = c1 + t  # (M, k)
    out = np.empty((Q0rows.shape[0], Q1rows.shape[0]))
    for i in range(Q0rows.shape[0]):
        out[i] = (ka[i][None, :] + u).min(axis=1)
    return out


def _with_eps(cfg, eps):
    if cfg.eps is not None:
        return cfg
    return SearchConfig(cfg.coarse_m, cfg.refine_rounds, cfg.refine_factor, eps)


def mu(inst, cfg=SearchConfig()):
    return mu_search(inst, cfg).value


def mu_search(inst, cfg=SearchConfig()):
    """Semi-sequential-1 training-limitation term.

    inf over (Q0, Q1) with g(Q0, Q1) < 0 of alpha*KL(Q0||P0) + beta*KL(Q1||P1),
    where g relaxes only the P1' slot:
        g(Q0, Q1) = inf over P1' in the eps floor of
            alpha*KL(Q0||P1) + beta*KL(Q1||P1') - lambda(P1, P1').
    The puncture P1' != P1 is closed via the continuous lambda extension.
    """
    a, b = inst.alpha, inst.beta
    P0, P1 = inst.p0, inst.p1

    objective = vectorize(
        lambda A, B: a * dv.kl_rows(A, P0)[:, None] + b * dv.kl_rows(B, P1)[None, :]
    )

    if isinstance(inst.lam, ConstantLambda):
        lam0 = inst.lam.lambda0

        def constraint(A, B):
            lead = a * dv.kl_rows(A, P1) - lam0  # (N,)
            floor_cost = np.array([b * dv.kl_floor_projection(q, inst.eps)[0] for q in B])
            return lead[:, None] + floor_cost[None, :] < 0.0

    else:

        def constraint(A, B):
            lead = a * dv.kl_rows(A, P1)  # (N,)
            h = _mu_inner(B, inst, cfg)  # (M,)
            return lead[:, None] + h[None, :] < 0.0

    return min_simplex_pair(objective, vectorize(constraint), inst.d, cfg)


def _mu_inner(Q1rows, inst, cfg):
    """h(Q1) = inf over P1' of beta*KL(Q1||P1') - lambda(P1, P1'), vectorized."""
    from .optimizer import _box_grid

    b = inst.beta
    k = _inner_density(inst, cfg)
    pg = grid_array(inst.d, k, eps=inst.eps)
    lamv = lambda_matrix(inst.lam, inst.p1[None, :], pg, b)[0]  # (k,)
    scores = b * dv.kl_matrix(Q1rows, pg) - lamv[None, :]
    h = scores.min(axis=1)
    arg = scores.argmin(axis=1)
    # polish each row's inner minimum (smooth in P1')
    for i in range(Q1rows.shape[0]):
        v = pg[arg[i]]
        density = k
        for _ in range(2):
            halfwidth = 2.0 / density
            density *= 10
            V = _box_grid(v, halfwidth, density, inst.eps)
            lamloc = lambda_matrix(inst.lam, inst.p1[None, :], V, b)[0]
            sc = b * dv.kl_matrix(Q1rows[i][None, :], V)[0] - lamloc
            jj = int(np.argmin(sc))
            if sc[jj] < h[i]:
                h[i] = sc[jj]
            v = V[jj]
    return h


def nu(inst):
    """Semi-sequential-2 term: binary trade-off at budget lambda(P0, P1)."""
    lamP = lambda_eval(inst.lam, inst.p0, inst.p1, inst.beta)
    if lamP >= dv.kl(inst.p1, inst.p0):
        return 0.0
    return dv.bht_tradeoff(inst.p0, inst.p1, lamP)


def e_fix(inst, cfg=SearchConfig()):
    return e_fix_search(inst, cfg).value


def e_fix_search(inst, cfg=SearchConfig()):
    """Fixed-length exponent.

    inf over tuples (Q, Q0, Q1) with g1(Q, Q0, Q1) < 0 of
        KL(Q||P1) + alpha*KL(Q0||P0) + beta*KL(Q1||P1).

    Constant lambda: the Q1 block is unconstrained and collapses to P1,
    leaving a pair problem over (Q, Q0) with a GJS feasibility threshold.
    Scaled-Renyi: swap the infima — search candidate pairs (P0', P1') and,
    for each, solve the convex inner problem (minimize the objective subject
    to the tuple lying in that pair's lambda-ball) exactly by Lagrangian
    bisection on the multiplier; all block minimizers are tilted families.
    """
    a, b = inst.alpha, inst.beta
    P0, P1 = inst.p0, inst.p1
    if isinstance(inst.lam, ConstantLambda):
        lam0 = inst.lam.lambda0
        if dv.gjs_value(P0, P1, a) <= lam0:
            return SearchResult(0.0, (P1, P0, P1), True)
        objective = vectorize(
            lambda A, B: dv.kl_rows(A, P1)[:, None] + a * dv.kl_rows(B, P0)[None, :]
        )
        constraint = vectorize(lambda A, B: dv.gjs_cross(B, A, a).T <= lam0)
        res = min_simplex_pair(objective, constraint, inst.d, cfg)
        if res.argmin is None:
            return res
        q, q0 = res.argmin
        return SearchResult(res.value, (q, q0, P1), res.feasible_found)

    objective = vectorize(lambda A, B: _efix_dual_matrix(A, B, inst))
    res = min_simplex_pair(objective, ALWAYS_TRUE, inst.d, _with_eps(cfg, inst.eps))
    return res


def _efix_dual_matrix(Urows, Vrows, inst):
    """For each candidate pair (P0', P1'), the exact inner fixed-length value.

    Inner problem at pair (u, v) with budget L = lambda(u, v):
        minimize  KL(Q||P1) + alpha*KL(Q0||P0) + beta*KL(Q1||P1)
        s.t.      KL(Q||u) + alpha*KL(Q0||u) + beta*KL(Q1||v) <= L.
    Convex and separable per block once a multiplier s is fixed: each block
    minimizer is the tilt of its target toward u (or v) with weight s/(1+s).
    The constraint value decreases monotonically in s, so bisection on s
    finds the active-budget solution; strong duality makes it exact.
    """
    a, b = inst.alpha, inst.beta
    U = np.atleast_2d(Urows)
    V = np.atleast_2d(Vrows)
    L = lambda_matrix(inst.lam, U, V, b)  # (N, M)
    logu = np.log(U)[:, None, :]  # (N,1,d)
    logv = np.log(V)[None, :, :]  # (1,M,d)
    logP0 = np.log(inst.p0)[None, None, :]
    logP1 = np.log(inst.p1)[None, None, :]

    def blocks(s):
        # s: (N,M); returns constraint value c and objective value f
        w = (s / (1.0 + s))[..., None]
        c = np.zeros_like(s)
        f = np.zeros_like(s)
        for target, ref, wt in ((logP1, logu, 1.0), (logP0, logu, a), (logP1, logv, b)):
            lz = (1.0 - w) * target + w * ref
            mx = lz.max(axis=-1, keepdims=True)
            z = np.exp(lz - mx)
            z /= z.sum(axis=-1, keepdims=True)
            lq = np.log(np.where(z > 0, z, 1.0))
            c += wt * (z * (lq - ref)).sum(axis=-1) / dv.LN2
            f += wt * (z * (lq - target)).sum(axis=-1) / dv.LN2
        return c, f

    zero = np.zeros(L.shape)
    c0, _ = blocks(zero)
    infeasible = L <= 0.0
    done_zero = c0 <= L  # unconstrained optimum already inside the ball
    lo = np.zeros(L.shape)
    hi = np.ones(L.shape)
    for _ in range(70):
        c, _ = blocks(hi)
        need = (c > L) & ~infeasible & ~done_zero
        if not need.any():
            break
        hi = np.where(need, hi * 2.0, hi)
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        c, _ = blocks(mid)
        lo = np.where(c > L, mid, lo)
        hi = np.where(c > L, hi, mid)
    _, fstar = blocks(hi)
    out = np.where(done_zero, 0.0, fstar)
    return np.where(infeasible, np.inf, out)


@dataclass(frozen=True)
class ExponentReport:
    renyi_term: float
    kappa: float
    mu: float
    nu: float
    e_fix: float
    e_seq: float
    e_semi1: float
    e_semi2: float
    kappa_note: str = ""

    def as_dict(self):
        return {
            "renyi_term": self.renyi_term,
            "kappa": self.kappa,
            "mu": self.mu,
            "nu": self.nu,
            "e_fix": self.e_fix,
            "e_seq": self.e_seq,
            "e_semi1": self.e_semi1,
            "e_semi2": self.e_semi2,
        }


def report(inst, cfg=SearchConfig()):
    """All exponent terms plus the four per-setup optima."""
    r = renyi_term(inst)
    ks = kappa_search(inst, cfg)
    k = ks.value
    if math.isinf(k):
        note = "analytic" if kappa_certified_infinite(inst) else "resolution-limited"
    else:
        note = ""
    m = mu(inst, cfg)
    n = nu(inst)
    f = e_fix(inst, cfg)
    e_seq = min(r, k)
    return ExponentReport(
        renyi_term=r,
        kappa=k,
        mu=m,
        nu=n,
        e_fix=f,
        e_seq=e_seq,
        e_semi1=min(e_seq, m),
        e_semi2=min(e_seq, n),
        kappa_note=note,
    )


def find_mu_violation(alpha, beta, eps=0.01, seed=0, tries=200, margin=5e-3):
    """Search for a pair (P0, P1) where mu drops below the Renyi term.

    Only possible when alpha*beta < 1 under the pure scaled-Renyi constraint
    (xi = 1, offset = 0).  Construction: take Q0 = V_alpha (the Renyi
    minimizer of (P0, P1)), slide P1' along the segment from P1 toward P0
    and take Q1 = V_beta, the Renyi minimizer of (P1', P1).  Feasibility and
    improvement reduce to the two-sided condition
        alpha*KL(V_a||P1)  <  KL(V_b||P1)  <  KL(V_a||P1)/beta,
    whose interior is nonempty exactly when alpha*beta < 1; KL(V_b||P1)
    sweeps continuously from 0, so a fine scan of the segment lands inside.

    Returns (P0, P1, bound) with bound an attained mu value strictly below
    renyi_term - margin, or None if no pair was found.
    """
    if alpha * beta >= 1:
        return None
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    lam = ScaledRenyiLambda(xi=1.0, offset=0.0)
    for _ in range(tries):
        p = eps + (1 - 2 * eps) * rng.random()
        q = eps + (1 - 2 * eps) * rng.random()
        if abs(p - q) < 0.2:
            continue
        P0 = np.array([p, 1 - p])
        P1 = np.array([q, 1 - q])
        ren, Va = dv.renyi_frac(P0, P1, alpha)
        target = dv.kl(Va, P1)
        for t in np.linspace(0.005, 1.0, 400):
            P1p = (1 - t) * P1 + t * P0
            lamv, Vb = dv.renyi_frac(P1p, P1, beta)
            mid = dv.kl(Vb, P1)
            if not (alpha * target < mid < target / beta):
                continue
            # attained value of the mu objective at (Q0, Q1) = (V_a, V_b)
            bound = alpha * dv.kl(Va, P0) + beta * mid
            feas = alpha * target + beta * dv.kl(Vb, P1p) - lamv
            if feas < -1e-9 and bound < ren - margin:
                inst = ProblemInstance(
                    tuple(P0), tuple(P1), alpha, beta, lam, eps=eps
                )
                return inst, float(bound)
    return None
