"""Average radar information rate and sensing ASE.

The echo SIR at the serving BS is::

    SIR_s = c h^t R^(-2 beta) / sum_q h_q |d_q - d_1|^(-alpha)

with ``c = delta_t kappa m_r xi_sq``, ``R`` the target-to-serving-BS distance,
``h^t ~ Gamma(K, 1)`` and interferer gains ``h_q ~ Gamma(K, 1)``. Interference
travels BS-to-BS, so its exponent is ``alpha``; the echo decays with ``2 beta``.

Nearest-BS association leaves the disk of radius ``R`` around the target empty
of interferers. Seen from the serving BS, which sits on the rim of that disk,
the empty region is the "hole" subtracted from the full-plane interference
exponent. Rates are in nats/s/Hz; ASEs in nats/s/Hz/km^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import DomainError
from .network import NetworkConfig
from .numerics import (NESTED_TOL, SINGLE_TOL, QuadSpec, _inc_beta, gauss_legendre,
                       graded_unit_rule, integrate_finite, integrate_semi_infinite)

__all__ = [
    "SenseRateResult",
    "hole_integral",
    "sense_laplace_conditional",
    "sense_laplace_substituted",
    "cluster_laplace_conditional",
    "rs_q1",
    "rs_cluster",
    "ts_alpha_eq_2beta",
    "sense_ase",
]


@dataclass(frozen=True)
class SenseRateResult:
    """Average radar information rate ``R_s`` and ASE ``lambda_b J R_s``."""

    rate_nats: float
    ase: float
    method: str
    quad_error: float = 0.0
    cross_check: Optional[float] = None


def _check(cfg: NetworkConfig, k):
    if not cfg.alpha > 2:
        raise DomainError(f"interference exponent alpha must be > 2, got {cfg.alpha}")
    if int(k) != k or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k}")


def _one_minus_pow(x, k):
    # 1 - (1 + x)^-k without cancellation for small x
    return -np.expm1(-k * np.log1p(x))


def _full_plane_const(alpha, k):
    """``2 int_0^inf (1 - (1 + x^-a)^-K) x dx = Gamma(1-2/a) Gamma(K+2/a) / Gamma(K)``."""
    d = 2.0 / alpha
    return math.exp(math.lgamma(1.0 - d) + math.lgamma(k + d) - math.lgamma(k))


def _tail_exponent(c, alpha, k, t):
    """``2 int_t^inf (1 - (1 + c x^-a)^-K) x dx`` for arrays ``c``."""
    d = 2.0 / alpha
    z = c * t ** (-alpha)
    h = k * z ** d * _inc_beta(z / (1.0 + z), 1.0 - d, k + d) - _one_minus_pow(z, k)
    return t * t * h


def hole_integral(c, alpha, k):
    """``int_0^2 2 arccos(t/2) (1 - (1 + c t^-a)^-K) t dt`` for ``c >= 0``.

    Splitting ``2 arccos(t/2) = pi - 2 arcsin(t/2)`` leaves a closed-form
    part and a remainder that is smooth after ``t = 2 sin(psi)``; the
    remainder vanishes like ``t^3`` at the origin, where the integrand is
    hardest to resolve. Vectorised over ``c``.
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise DomainError("hole_integral needs c >= 0")
    main = 0.5 * (c ** (2.0 / alpha) * _full_plane_const(alpha, k) - _tail_exponent(c, alpha, k, 2.0))
    psi, w = _psi_rule()
    t = 2.0 * np.sin(psi)
    g = _one_minus_pow(c[..., None] * t ** (-alpha), k)
    rem = (w * 8.0 * psi * np.sin(psi) * np.cos(psi) * g).sum(axis=-1)
    out = np.maximum(math.pi * main - rem, 0.0)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=1)
def _psi_rule():
    # graded towards psi = 0, where small c puts the whole transition of g
    edges = [0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 0.5 * math.pi]
    parts = [gauss_legendre(16, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _hole_direct(c, alpha, k):
    spec = QuadSpec(1e-10, 1e-14, 400)
    knee = c ** (1.0 / alpha)
    pts = [p for p in (0.1 * knee, knee, 10.0 * knee) if 0.0 < p < 2.0]
    return integrate_finite(lambda t: 2.0 * math.acos(t / 2.0) * float(_one_minus_pow(c * t ** -alpha, k)) * t
                            if t > 0 else 0.0, 0.0, 2.0, spec, points=pts or None)


def _log_laplace(z, r, cfg, k, hole_corrected):
    """Log of the conditional interference Laplace transform (vectorised)."""
    a, lam = cfg.alpha, cfg.lambda_b
    s = z * r ** (2.0 * cfg.beta)
    out = -math.pi * lam * _full_plane_const(a, k) * s ** (2.0 / a)
    if hole_corrected:
        out = out + lam * r * r * hole_integral(s * r ** (-a), a, k)
    return np.minimum(out, 0.0)


def sense_laplace_conditional(z, r_serve, cfg: NetworkConfig, k: int,
                              hole_corrected: bool = True, form: str = "beta"):
    """Laplace transform of the echo interference given the serving distance.

    With ``s = z R^(2 beta)`` the transform is::

        exp(-pi lam K s^(2/a) B(1, 1-2/a, K+2/a)
            + [hole] lam R^2 int_0^2 2 arccos(t/2) (1 - (1 + s R^-a t^-a)^-K) t dt)

    Parameters
    ----------
    z : float or array
        Laplace argument, > 0.
    r_serve : float or array
        Target-to-serving-BS distance ``R`` in km, > 0.
    hole_corrected : bool
        Subtract the interferer-free disk around the target. ``False`` gives the
        full-plane baseline.
    form : {"beta", "direct"}
        ``"beta"`` uses the closed Beta-function form (vectorised); ``"direct"``
        integrates the defining radial and hole integrals adaptively (scalars
        only) and is meant for cross-checks.
    """
    _check(cfg, k)
    z_arr = np.asarray(z, dtype=float)
    r_arr = np.asarray(r_serve, dtype=float)
    if np.any(z_arr < 0):
        raise DomainError("z must be >= 0")
    if np.any(r_arr <= 0):
        raise DomainError("r_serve must be > 0")
    if form == "beta":
        out = np.exp(_log_laplace(z_arr, r_arr, cfg, k, hole_corrected))
        return float(out) if out.ndim == 0 else out
    if form != "direct":
        raise DomainError(f"unknown form {form!r}")
    z, r = float(z), float(r_serve)
    a, lam = cfg.alpha, cfg.lambda_b
    s = z * r ** (2.0 * cfg.beta)
    spec = QuadSpec(1e-10, 1e-14, 400)
    full = 2.0 * math.pi * lam * integrate_semi_infinite(
        lambda x: float(_one_minus_pow(s * x ** -a, k)) * x if x > 0 else 0.0, spec, at_zero=0.0)
    ex = -full
    if hole_corrected:
        ex += lam * r * r * _hole_direct(s * r ** -a, a, k)
    return math.exp(min(ex, 0.0))


def sense_laplace_substituted(z, u, cfg: NetworkConfig, k: int, hole_corrected: bool = True):
    """Same transform written in ``u = pi lam R^2`` (the normalised serving area).

    ``u`` is Exp(1) distributed, which is the form the rate integrals average
    over. Agrees with :func:`sense_laplace_conditional` at ``R = sqrt(u / (pi lam))``.
    """
    _check(cfg, k)
    u = np.asarray(u, dtype=float)
    a, b, lam = cfg.alpha, cfg.beta, cfg.lambda_b
    scale = (u / (math.pi * lam))
    s = z * scale ** b
    ex = -math.pi * lam * _full_plane_const(a, k) * s ** (2.0 / a)
    if hole_corrected:
        ex = ex + (u / math.pi) * hole_integral(z * scale ** (b - 0.5 * a), a, k)
    out = np.exp(np.minimum(ex, 0.0))
    return float(out) if out.ndim == 0 else out


def cluster_laplace_conditional(z, r_serve, r_q, cfg: NetworkConfig, k: int):
    """Laplace transform of the interference beyond the sensing-cluster edge.

    Interferers are the BSs farther than ``r_q`` from the serving BS; the hole
    is neglected. With ``s = z R^(2 beta)`` and ``y = s r_q^-a``::

        exp(-pi lam (r_q^2 ((1 + y)^-K - 1) + K s^(2/a) B(y/(1+y), 1-2/a, K+2/a)))

    Vectorised over all three distance/argument inputs (broadcasting).
    """
    _check(cfg, k)
    a, lam = cfg.alpha, cfg.lambda_b
    s = np.asarray(z, dtype=float) * np.asarray(r_serve, dtype=float) ** (2.0 * cfg.beta)
    rq = np.asarray(r_q, dtype=float)
    y = s * rq ** (-a)
    d = 2.0 / a
    ex = -rq * rq * _one_minus_pow(y, k) + k * s ** d * _inc_beta(y / (1.0 + y), 1.0 - d, k + d)
    out = np.exp(-math.pi * lam * np.maximum(ex, 0.0))
    return float(out) if out.ndim == 0 else out


def _rule_for(spec: QuadSpec):
    # inner-rule accuracy tracks the requested outer tolerance
    if spec.rel_tol >= 1e-3:
        return graded_unit_rule(4, 1.0)
    return graded_unit_rule(5, 1.0) if spec.rel_tol >= 1e-5 else graded_unit_rule(5, 0.5)


def _rate_from_laplace(c, k, lap, spec):
    """``int_0^inf (1 - (1 + c z)^-K) / z * lap(z) dz``."""

    def integrand(z):
        if z == 0.0:
            return c * k
        return float(_one_minus_pow(c * z, k)) / z * lap(z)

    return integrate_semi_infinite(integrand, spec, at_zero=c * k)


def rs_q1(cfg: NetworkConfig, k: int = 1, spec: QuadSpec = NESTED_TOL, *, j: int = 1,
          hole_corrected: bool = True) -> SenseRateResult:
    """Sensing rate without sensing cooperation (``Q = 1``).

    ``R_s = int_0^inf (1 - (1 + c z)^-K) / z * E_R[L(z | R)] dz`` where the
    inner expectation over the serving distance uses a quantile-mapped graded
    rule in ``u = pi lam R^2``.

    Parameters
    ----------
    j : int
        Targets per cell; only scales the ASE.
    hole_corrected : bool
        ``False`` evaluates the full-plane baseline that ignores the empty disk
        around the target.
    """
    _check(cfg, k)
    method = "hole-corrected" if hole_corrected else "no-hole-baseline"
    c = cfg.sensing_gain
    if c == 0.0:
        return SenseRateResult(0.0, 0.0, method, 0.0)
    w, wt = _rule_for(spec)
    r = np.sqrt(-np.log1p(-w) / (math.pi * cfg.lambda_b))

    def lap(z):
        return float(wt @ np.exp(_log_laplace(z, r, cfg, k, hole_corrected)))

    rate = _rate_from_laplace(c, k, lap, spec)
    return SenseRateResult(rate, cfg.lambda_b * j * rate, method, spec.rel_tol * rate)


def rs_cluster(cfg: NetworkConfig, k: int, j: int, q: int, spec: QuadSpec = NESTED_TOL,
               rq_law: str = "printed") -> SenseRateResult:
    """Sensing rate with a sensing cluster of ``q >= 2`` BSs.

    The ``q - 1`` nearest neighbours of the serving BS null their beams
    towards its receiver, so only BSs beyond the cluster edge ``r_Q``
    interfere. The rate is a triple integral over ``z``, the serving distance
    and ``r_Q``; the inner pair is averaged with a tensor graded rule.

    Parameters
    ----------
    rq_law : {"printed", "slivnyak"}
        Law of ``v = pi lam r_Q^2``. ``"printed"`` uses Gamma(Q), the
        order-Q distance density; ``"slivnyak"`` uses Gamma(Q-1), the law of
        the (Q-1)-th nearest other BS seen from a BS of the process.
    """
    _check(cfg, k)
    if int(q) != q or q < 2:
        raise DomainError(f"q must be an integer >= 2, got {q}")
    if int(j) != j or j < 1:
        raise DomainError(f"j must be an integer >= 1, got {j}")
    shape = {"printed": q, "slivnyak": q - 1}.get(rq_law)
    if shape is None:
        raise DomainError(f"unknown rq_law {rq_law!r}")
    c = cfg.sensing_gain
    if c == 0.0:
        return SenseRateResult(0.0, 0.0, "cluster-nulling", 0.0)
    rate = _rs_cluster_cached(cfg.lambda_b, cfg.alpha, cfg.beta, int(k), int(shape), spec, c)
    return SenseRateResult(rate, cfg.lambda_b * j * rate, "cluster-nulling", spec.rel_tol * rate)


@lru_cache(maxsize=2048)
def _rs_cluster_cached(lambda_b, alpha, beta, k, shape, spec, c):
    # keyed on the fields the rate depends on, so sweeps over m_t or j_max share entries
    cfg = NetworkConfig(lambda_b=lambda_b, alpha=alpha, beta=beta)
    w, wt = _rule_for(spec)
    lam = cfg.lambda_b
    r = np.sqrt(-np.log1p(-w) / (math.pi * lam))[:, None]
    rq = np.sqrt(special.gammaincinv(shape, w) / (math.pi * lam))[None, :]
    ww = wt[:, None] * wt[None, :]

    def lap(z):
        return float((ww * cluster_laplace_conditional(z, r, rq, cfg, k)).sum())

    return _rate_from_laplace(c, k, lap, spec)


def ts_alpha_eq_2beta(cfg: NetworkConfig, k: int = 1, j: int = 1, spec: QuadSpec = SINGLE_TOL,
                      form: str = "printed") -> SenseRateResult:
    """Closed single-integral sensing rate when ``alpha = 2 beta``.

    The serving distance then drops out of the hole term and the ``R``
    average is an exponential moment, giving::

        R_s = int_0^inf (1 - (1 + c z)^-K) / (z I(z)) dz

    Parameters
    ----------
    form : {"printed", "derived"}
        ``"printed"`` uses ``I = K z^(1/a) B(1, 1-1/a, K+1/a)
        - (2/pi) int_0^2 arccos(t/2) (1 - (1 + z t^-2a)^-K) t dt + 1``.
        ``"derived"`` uses the exponents that follow from the conditional
        transform (``z^(2/a)``, ``t^-a``); only this form matches
        :func:`rs_q1` at ``alpha = 2 beta``.

    The printed form is always cross-checked against :func:`rs_q1`; that rate
    is stored in ``cross_check`` and a ``RuntimeWarning`` is issued when the
    two differ by more than 5%.
    """
    _check(cfg, k)
    if not math.isclose(cfg.alpha, 2.0 * cfg.beta, rel_tol=1e-12):
        raise DomainError(f"requires alpha == 2 beta, got alpha={cfg.alpha}, beta={cfg.beta}")
    c = cfg.sensing_gain
    if c == 0.0:
        return SenseRateResult(0.0, 0.0, f"alpha-2beta-{form}", 0.0)
    a = cfg.alpha
    if form == "printed":
        ea, et = 1.0 / a, 2.0 * a
    elif form == "derived":
        ea, et = 2.0 / a, a
    else:
        raise DomainError(f"unknown form {form!r}")
    full = k * special.beta(1.0 - ea, k + ea)

    def i_kernel(z):
        hole = hole_integral(z, et, k) if form == "derived" else _hole_direct(z, et, k)
        return 1.0 + full * z ** ea - hole / math.pi

    rate = _rate_from_laplace(c, k, lambda z: 1.0 / i_kernel(z), spec)
    ref = None
    if form == "printed":
        ref = rs_q1(cfg, k, NESTED_TOL).rate_nats
        if abs(rate / ref - 1.0) > 0.05:
            warnings.warn(f"printed alpha = 2 beta form gives {rate:.6g} nats but the general "
                          f"hole-corrected pipeline gives {ref:.6g}", RuntimeWarning, stacklevel=2)
    return SenseRateResult(rate, cfg.lambda_b * j * rate, f"alpha-2beta-{form}", spec.rel_tol * rate, ref)


def sense_ase(cfg: NetworkConfig, k: int, j: int, q: int, spec: QuadSpec = NESTED_TOL) -> float:
    """Sensing ASE of ``(K, J, Q)``: hole-corrected for ``Q = 1``, cluster form otherwise."""
    if q == 1:
        return rs_q1(cfg, k, spec, j=j).ase
    return rs_cluster(cfg, k, j, q, spec).ase
