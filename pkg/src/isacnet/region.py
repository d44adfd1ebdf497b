"""Network-level optimisation over the allocation ``(K, L, J, Q)``.

Communication ASE is scored with the MISR approximation by default (it is the
objective whose continuous-K optimum has a unique root), sensing ASE with the
hole-corrected ``Q = 1`` form or the cluster form for ``Q >= 2``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .comm import f_kernel, misr_gain, rc_approx, rc_exact
from .errors import ConvergenceError, DomainError
from .network import Allocation, NetworkConfig
from .numerics import NESTED_TOL, SINGLE_TOL, QuadSpec, integrate_semi_infinite
from .sensing import rs_cluster, rs_q1

__all__ = [
    "RegionPoint",
    "RegionBoundary",
    "SumAseResult",
    "SWEEP_TOL",
    "load_objective",
    "load_objective_slope",
    "optimal_user_load",
    "comm_ase_of",
    "sense_ase_of",
    "comm_corner",
    "sense_corner",
    "boundary_sweep",
    "time_share_bound",
    "solve_p1",
]

SWEEP_TOL = QuadSpec(rel_tol=1e-3, abs_tol=1e-8)
PROVENANCES = ("corner-comm", "corner-sense", "boundary", "time-share")


@dataclass(frozen=True)
class RegionPoint:
    comm_ase: float
    sense_ase: float
    alloc: Optional[Allocation]
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if self.comm_ase < 0 or self.sense_ase < 0:
            raise DomainError("ASEs must be nonnegative")

    def dominates(self, other: "RegionPoint") -> bool:
        return (self.comm_ase >= other.comm_ase and self.sense_ase >= other.sense_ase
                and (self.comm_ase > other.comm_ase or self.sense_ase > other.sense_ase))


@dataclass(frozen=True)
class RegionBoundary:
    """Points of a sensing-communication tradeoff curve, sorted by comm ASE.

    ``diagnostics`` carries per-``m`` records for swept boundaries, where
    ``m = J (Q - 1)`` is the number of DoF spent on sensing nulls.
    """

    points: tuple
    diagnostics: tuple = ()

    @property
    def comm(self) -> np.ndarray:
        return np.array([p.comm_ase for p in self.points])

    @property
    def sense(self) -> np.ndarray:
        return np.array([p.sense_ase for p in self.points])

    def sense_at(self, comm_ase: float) -> float:
        """Largest sensing ASE reachable by one allocation with comm ASE >= ``comm_ase``."""
        ok = [p.sense_ase for p in self.points if p.comm_ase >= comm_ase * (1 - 1e-12)]
        return max(ok) if ok else 0.0


@dataclass(frozen=True)
class SumAseResult:
    rho: float
    best_point: RegionPoint
    t_ase: float


def load_objective(v: float, l: int, alpha: float, spec: QuadSpec = SINGLE_TOL) -> float:
    """Normalised communication ASE ``v * R~_c`` as a function of the load ``v``.

    ``v = K / (M_t - J(Q-1) + 1)`` and the MISR exponent is ``G_L (1/v - L)``.
    """
    if not 0 < v <= 1.0 / l:
        raise DomainError(f"v must lie in (0, 1/L], got {v}")
    g = misr_gain(l, alpha)
    y = g * (1.0 / v - l)
    if y == 0:
        return 0.0

    def f(z):
        return y if z == 0 else -math.expm1(-z * y) / (z * f_kernel(z, alpha))

    return v * integrate_semi_infinite(f, spec, at_zero=y)


def load_objective_slope(v: float, l: int, alpha: float, spec: QuadSpec = SINGLE_TOL) -> float:
    """Derivative of :func:`load_objective` in ``v``::

        int_0^inf [1 - e^(-zY) - (z G_L / v) e^(-zY)] / (z F(z, a)) dz
    """
    g = misr_gain(l, alpha)
    y = g * (1.0 / v - l)

    def f(z):
        if z == 0.0:
            return y - g / v
        e = math.exp(-z * y)
        return (-math.expm1(-z * y) - (z * g / v) * e) / (z * f_kernel(z, alpha))

    return integrate_semi_infinite(f, spec, at_zero=y - g / v)


@lru_cache(maxsize=256)
def optimal_user_load(l: int, alpha: float, spec: QuadSpec = SINGLE_TOL, eps: float = 1e-3) -> float:
    """Load ``v* = K* / (M_t - J(Q-1) + 1)`` maximising the communication ASE.

    Found as the root of :func:`load_objective_slope` on ``(eps, 1/L - eps)``.

    Raises
    ------
    ConvergenceError
        If the slope has no sign change over the bracket (values attached).
    """
    if not alpha > 2:
        raise DomainError("alpha must be > 2")
    if int(l) != l or l < 1:
        raise DomainError("l must be an integer >= 1")
    lo, hi = eps, 1.0 / l - eps
    g_lo = load_objective_slope(lo, l, alpha, spec)
    g_hi = load_objective_slope(hi, l, alpha, spec)
    if not (g_lo > 0 > g_hi):
        raise ConvergenceError(f"no sign change of the load slope on [{lo:.4g}, {hi:.4g}]: "
                               f"G'(lo)={g_lo:.4g}, G'(hi)={g_hi:.4g}", float("nan"), float("inf"))
    return float(brentq(load_objective_slope, lo, hi, args=(l, alpha, spec), xtol=1e-10))


def comm_ase_of(cfg: NetworkConfig, alloc: Allocation, method: str = "approx",
                spec: QuadSpec = SINGLE_TOL) -> float:
    if method == "approx":
        return rc_approx(cfg, alloc.k, alloc.l, alloc.j, alloc.q, spec).ase
    if method == "exact":
        return rc_exact(cfg, alloc, spec).ase
    raise DomainError(f"unknown method {method!r}")


def _rs(cfg, k, q, spec):
    if q == 1:
        return rs_q1(cfg, k, spec).rate_nats
    return rs_cluster(cfg, k, 1, q, spec).rate_nats


def sense_ase_of(cfg: NetworkConfig, alloc: Allocation, spec: QuadSpec = NESTED_TOL) -> float:
    return cfg.lambda_b * alloc.j * _rs(cfg, alloc.k, alloc.q, spec)


def _best_k(cfg, l, j, q, method, spec):
    """Integer K around ``v* (M_t - J(Q-1) + 1)`` with the larger comm ASE."""
    budget = cfg.m_t - j * (q - 1)
    k_max = budget // l
    if k_max < 1:
        return None
    v = optimal_user_load(l, cfg.alpha)
    target = v * (budget + 1)
    cands = {min(max(int(math.floor(target)), 1), k_max), min(max(int(math.ceil(target)), 1), k_max)}
    scored = [(comm_ase_of(cfg, Allocation(k, l, j, q), method, spec), k) for k in sorted(cands)]
    return max(scored)


def comm_corner(cfg: NetworkConfig, spec: QuadSpec = SWEEP_TOL, l_cap: Optional[int] = None,
                method: str = "approx") -> RegionPoint:
    """Best communication point: ``J = J_max``, ``Q = 1``, search over ``L``.

    ``l_cap`` defaults to ``floor((M_t + 1) / 2)``, enough for every ``L`` that
    still admits ``K >= 1`` near the optimal load.
    """
    j = cfg.j_max
    if l_cap is None:
        l_cap = max(1, (cfg.m_t + 1) // 2)
    best = None
    for l in range(1, l_cap + 1):
        r = _best_k(cfg, l, j, 1, method, SINGLE_TOL)
        if r is not None and (best is None or r[0] > best[0]):
            best = (r[0], Allocation(r[1], l, j, 1))
    ase, alloc = best
    return RegionPoint(ase, sense_ase_of(cfg, alloc, spec), alloc, "corner-comm")


def _feasible_jq(cfg, m, q_min=1):
    """Factorisations ``m = J (Q - 1)`` with ``J <= J_max`` and ``Q >= q_min``."""
    if m == 0:
        return [(j, 1) for j in range(1, cfg.j_max + 1)] if q_min <= 1 else []
    return [(j, m // j + 1) for j in range(1, min(cfg.j_max, m) + 1)
            if m % j == 0 and m // j + 1 >= q_min]


def _prefetch(cfg, pairs, spec, jobs):
    pairs = sorted(set(pairs))
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            vals = list(ex.map(_rs, [cfg] * len(pairs), [p[0] for p in pairs],
                               [p[1] for p in pairs], [spec] * len(pairs)))
    else:
        vals = [_rs(cfg, k, q, spec) for k, q in pairs]
    return dict(zip(pairs, vals))


def sense_corner(cfg: NetworkConfig, spec: QuadSpec = SWEEP_TOL, jobs: int = 1,
                 method: str = "approx") -> RegionPoint:
    """Best sensing point: ``K = L = 1`` and exhaustive search over ``(J, Q)``."""
    pairs = [(j, q) for m in range(cfg.m_t) for j, q in _feasible_jq(cfg, m)]
    rs = _prefetch(cfg, [(1, q) for _, q in pairs], spec, jobs)
    best = max(pairs, key=lambda jq: (cfg.lambda_b * jq[0] * rs[(1, jq[1])], -jq[1]))
    alloc = Allocation(1, 1, *best)
    return RegionPoint(comm_ase_of(cfg, alloc, method, SINGLE_TOL), cfg.lambda_b * best[0] * rs[(1, best[1])],
                       alloc, "corner-sense")


def _nondominated(points):
    pts = sorted(points, key=lambda p: (-p.comm_ase, -p.sense_ase))
    out, best_sense = [], -math.inf
    for p in pts:
        if p.sense_ase > best_sense:
            out.append(p)
            best_sense = p.sense_ase
    return sorted(out, key=lambda p: p.comm_ase)


def _comm_table(cfg, l_min, q_min, method):
    """Best comm ASE (over ``L >= l_min``) for every ``(K, m)``; comm ASE sees J, Q only via m."""
    table = {}
    for m in range(cfg.m_t):
        if not _feasible_jq(cfg, m, q_min):
            continue
        jq = _feasible_jq(cfg, m, q_min)[0]
        for k in range(1, (cfg.m_t - m) // l_min + 1):
            best = None
            for l in range(l_min, (cfg.m_t - m) // k + 1):
                a = comm_ase_of(cfg, Allocation(k, l, *jq), method, SINGLE_TOL)
                if best is None or a > best[0]:
                    best = (a, l)
            table[(k, m)] = best
    return table


def boundary_sweep(cfg: NetworkConfig, spec: QuadSpec = SWEEP_TOL, l_min: int = 1, q_min: int = 1,
                   method: str = "approx", jobs: int = 1, mc_rescore: int = 0,
                   seed: int = 0) -> RegionBoundary:
    """Tradeoff boundary by a full sweep of ``m = J (Q - 1)``.

    Every feasible ``(K, J, Q)`` is scored; ``L`` is chosen per ``(K, m)`` to
    maximise comm ASE since sensing does not depend on it. The frontier is
    the nondominated subset, together with both corners when no service
    floors are imposed. ``diagnostics`` holds, per ``m``, the best comm and
    the best sensing candidate.

    Parameters
    ----------
    l_min, q_min : int
        Service-quality floors on the cluster sizes.
    mc_rescore : int
        If positive, re-score each frontier point by Monte Carlo with this
        many realizations; results go into ``diagnostics``.
    """
    table = _comm_table(cfg, l_min, q_min, method)
    triples = [(k, j, q) for (k, m) in table for j, q in _feasible_jq(cfg, m, q_min)]
    rs = _prefetch(cfg, [(k, q) for k, _, q in triples], spec, jobs)

    points, diag = [], []
    by_m: dict = {}
    for k, j, q in triples:
        m = j * (q - 1)
        ase, l = table[(k, m)]
        p = RegionPoint(ase, cfg.lambda_b * j * rs[(k, q)], Allocation(k, l, j, q), "boundary")
        points.append(p)
        by_m.setdefault(m, []).append(p)
    for m in sorted(by_m):
        cand = by_m[m]
        diag.append({"m": m,
                     "best_comm": max(cand, key=lambda p: (p.comm_ase, p.sense_ase)),
                     "best_sense": max(cand, key=lambda p: (p.sense_ase, p.comm_ase))})

    if l_min == 1 and q_min == 1:
        points.append(comm_corner(cfg, spec, method=method))
        points.append(sense_corner(cfg, spec, jobs, method))
    frontier = _nondominated(points)

    if mc_rescore > 0:
        from .montecarlo import mc_comm_rate, mc_sense_rate
        for i, p in enumerate(frontier):
            a = p.alloc
            c = mc_comm_rate(cfg, a, mc_rescore, seed + i)
            s = mc_sense_rate(cfg, a, mc_rescore, seed + i)
            diag.append({"mc_rescore": a, "comm_ase_mc": cfg.lambda_b * a.k * c.mean,
                         "sense_ase_mc": cfg.lambda_b * a.j * s.mean})
    return RegionBoundary(tuple(frontier), tuple(diag))


def time_share_bound(corner_c: RegionPoint, corner_s: RegionPoint, steps: int = 11) -> RegionBoundary:
    """Points ``t corner_c + (1 - t) corner_s`` for ``t`` on a uniform grid of ``steps``."""
    if steps < 2:
        raise DomainError("steps must be >= 2")
    pts = []
    for t in np.linspace(0.0, 1.0, steps):
        pts.append(RegionPoint(t * corner_c.comm_ase + (1 - t) * corner_s.comm_ase,
                               t * corner_c.sense_ase + (1 - t) * corner_s.sense_ase, None, "time-share"))
    return RegionBoundary(tuple(pts))


def solve_p1(cfg: NetworkConfig, rho: float, spec: QuadSpec = SWEEP_TOL,
             boundary: Optional[RegionBoundary] = None) -> SumAseResult:
    """Maximise ``rho T_c + (1 - rho) T_s`` over the swept boundary."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError("rho must lie in [0, 1]")
    if boundary is None:
        boundary = boundary_sweep(cfg, spec)
    best = max(boundary.points, key=lambda p: (rho * p.comm_ase + (1 - rho) * p.sense_ase,
                                               p.comm_ase if rho >= 0.5 else p.sense_ase))
    return SumAseResult(rho, best, rho * best.comm_ase + (1 - rho) * best.sense_ase)
