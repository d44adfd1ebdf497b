"""Channel-level Monte Carlo for the typical user and the typical target.

One serving BS is modelled in full: it stacks the channels of its own users,
the nulling requests it accepted and the sensing nulls it owes its
neighbours, and builds a zero-forcing precoder from them. Out-of-cluster BSs
transmit through isotropic unit-norm precoders, so each of them reaches the
receiver with an aggregate gain drawn from Gamma(K, 1).

Every realization ``i`` owns a counter-based Philox stream keyed by
``(seed, stream_tag, i)``. Results therefore do not depend on how the
realizations are split across worker processes, and the sample mean is
accumulated with ``math.fsum`` so the reduction order does not matter either.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DegenerateRealization, DomainError, InfeasibleAllocation, RankDeficiency
from .network import Allocation, NetworkConfig, validate_allocation

__all__ = [
    "NetworkRealization",
    "PrecoderSet",
    "McEstimate",
    "default_r_window",
    "sample_network",
    "build_zf_precoder",
    "steering_vector",
    "mc_comm_rate",
    "mc_sense_rate",
    "sample_zf_gain",
    "sample_interferer_gain",
    "sample_beam_gain",
    "measure_request_load",
    "interference_tail_mean",
]

COMM_TAG = 1
SENSE_TAG = 2
MIN_DISTANCE = 1e-6  # km; closer draws are resampled
COND_LIMIT = 1e12


def _rng(seed: int, tag: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), tag, int(index)])))


def default_r_window(lambda_b: float, min_count: float = 300.0) -> float:
    """Radius (km) of a disk holding ``min_count`` BSs on average."""
    if not lambda_b > 0:
        raise DomainError("lambda_b must be > 0")
    return math.sqrt(min_count / (math.pi * lambda_b))


def interference_tail_mean(cfg: NetworkConfig, k: int, r_window: float) -> float:
    """Mean interference power from BSs beyond ``r_window`` of the receiver.

    Campbell's formula gives ``2 pi lam K r_w^(2-a) / (a-2)``; it bounds the
    truncation bias of a simulation window.
    """
    a = cfg.alpha
    return 2.0 * math.pi * cfg.lambda_b * k * r_window ** (2.0 - a) / (a - 2.0)


@dataclass(frozen=True)
class NetworkRealization:
    """BS positions (km) in a disk around the origin, with the nearest BS marked."""

    bs_positions: np.ndarray
    serving_index: int
    rng_stream: tuple
    resamples: int = 0

    @property
    def distances(self) -> np.ndarray:
        return np.hypot(self.bs_positions[:, 0], self.bs_positions[:, 1])


@dataclass(frozen=True)
class PrecoderSet:
    """Unit-norm transmit precoder of one BS and the nulling rows it honoured.

    ``w`` has shape ``(m_t, K)``. ``comm_rows`` / ``sense_rows`` hold the
    accepted nulling channels as columns; ``abandoned`` counts rejected ones.
    """

    w: np.ndarray
    comm_rows: np.ndarray
    sense_rows: np.ndarray
    abandoned: int = 0

    @property
    def n_comm(self) -> int:
        return self.comm_rows.shape[1]

    @property
    def n_sense(self) -> int:
        return self.sense_rows.shape[1]


@dataclass(frozen=True)
class McEstimate:
    """Sample mean of a per-realization rate with a normal 95% half-width."""

    mean: float
    half_width_95: float
    n_realizations: int
    seed: int
    std: float = 0.0
    resamples: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def ci(self):
        return (self.mean - self.half_width_95, self.mean + self.half_width_95)


def _draw_positions(lam, r_window, rng):
    n = rng.poisson(lam * math.pi * r_window * r_window)
    rad = r_window * np.sqrt(rng.random(n))
    ang = 2.0 * math.pi * rng.random(n)
    return np.column_stack((rad * np.cos(ang), rad * np.sin(ang)))


def _streams(seed, tag, index, attempt=0):
    """Radial, angular and fading generators of one realization."""
    ss = np.random.SeedSequence([int(seed), tag, int(index), int(attempt)])
    return tuple(np.random.Generator(np.random.Philox(c)) for c in ss.spawn(3))


def _outward_ppp(lam, r_window, g_rad, g_ang, chunk=256):
    """PPP points in order of distance from the origin, out to ``r_window``.

    Squared distances times ``pi lam`` are the arrival times of a unit-rate
    Poisson process. Draws come in fixed-size chunks, so a larger window
    extends the same realization instead of replacing it.
    """
    limit = lam * math.pi * r_window * r_window
    t, rad, ang = 0.0, [], []
    while True:
        arr = t + np.cumsum(g_rad.exponential(size=chunk))
        phi = 2.0 * math.pi * g_ang.random(chunk)
        inside = arr <= limit
        rad.append(arr[inside])
        ang.append(phi[inside])
        if not inside.all():
            break
        t = arr[-1]
    r = np.sqrt(np.concatenate(rad) / (lam * math.pi))
    return r, np.concatenate(ang)


def _realization(lam, r_window, seed, tag, index, min_count):
    """Outward PPP with at least ``min_count`` points, nearest beyond 1 mm; fading stream attached."""
    for attempt in range(101):
        g_rad, g_ang, g_fade = _streams(seed, tag, index, attempt)
        r, phi = _outward_ppp(lam, r_window, g_rad, g_ang)
        if len(r) >= min_count and r[0] >= MIN_DISTANCE:
            return r, phi, g_fade, attempt
    raise DegenerateRealization("no usable BS layout after 100 redraws")


def sample_network(cfg: Union[NetworkConfig, float], r_window: Optional[float] = None, seed: int = 0,
                   tag: int = 0, rng: Optional[np.random.Generator] = None,
                   max_resamples: int = 100) -> NetworkRealization:
    """Draw a PPP of BSs in a disk of radius ``r_window`` centred on the receiver.

    ``cfg`` may be a :class:`NetworkConfig` or a bare density. Empty draws and
    draws with a BS closer than 1 mm are redrawn from the next substream
    (counted in ``resamples``).

    Raises
    ------
    DegenerateRealization
        For a zero density, or if ``max_resamples`` redraws all fail.
    """
    lam = cfg.lambda_b if isinstance(cfg, NetworkConfig) else float(cfg)
    if not lam > 0:
        raise DegenerateRealization("BS density is zero: the network has no base station")
    if r_window is None:
        r_window = default_r_window(lam)
    for attempt in range(max_resamples + 1):
        if rng is not None:
            g_rad = g_ang = rng
        else:
            g_rad, g_ang, _ = _streams(seed, tag, 0, attempt)
        r, phi = _outward_ppp(lam, r_window, g_rad, g_ang)
        if len(r) == 0 or r[0] < MIN_DISTANCE:
            continue
        pos = np.column_stack((r * np.cos(phi), r * np.sin(phi)))
        return NetworkRealization(pos, 0, (int(seed), tag, attempt), attempt)
    raise DegenerateRealization(f"no usable BS layout after {max_resamples} redraws")


def _as_columns(rows, m_t):
    if rows is None:
        return np.zeros((m_t, 0), dtype=complex)
    arr = np.asarray(rows, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.shape[0] != m_t:
        raise DomainError(f"channel vectors must have length m_t={m_t}")
    return arr


def build_zf_precoder(m_t: int, own_user_channels, comm_null_rows=None, sense_null_rows=None,
                      rng: Optional[np.random.Generator] = None) -> PrecoderSet:
    """Zero-forcing precoder ``W = H (H^H H)^-1`` with column normalisation.

    Channel vectors are passed as columns (shape ``(m_t, n)``). ``H`` stacks
    the own users first, then the communication and sensing nulling rows.
    When more rows are offered than ``m_t - K`` spare DoF allow, a uniformly
    random subset of nulling rows is abandoned using ``rng``.

    Raises
    ------
    RankDeficiency
        If ``H^H H`` has condition number above 1e12.
    """
    own = _as_columns(own_user_channels, m_t)
    comm = _as_columns(comm_null_rows, m_t)
    sense = _as_columns(sense_null_rows, m_t)
    k = own.shape[1]
    if k < 1 or k > m_t:
        raise DomainError(f"need 1 <= K <= m_t, got K={k}")
    spare = m_t - k
    offered = comm.shape[1] + sense.shape[1]
    abandoned = 0
    if offered > spare:
        if rng is None:
            raise DomainError("nulling rows exceed spare DoF and no rng was given for abandonment")
        keep = np.sort(rng.choice(offered, size=spare, replace=False))
        is_comm = keep < comm.shape[1]
        comm, sense = comm[:, keep[is_comm]], sense[:, keep[~is_comm] - comm.shape[1]]
        abandoned = offered - spare
    h = np.hstack((own, comm, sense))
    gram = h.conj().T @ h
    if np.linalg.cond(gram) > COND_LIMIT:
        raise RankDeficiency("stacked channel matrix is numerically singular")
    w = h @ np.linalg.inv(gram)[:, :k]
    w /= np.linalg.norm(w, axis=0)
    return PrecoderSet(w, comm, sense, abandoned)


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def steering_vector(m_t: int, theta: float) -> np.ndarray:
    """Half-wavelength ULA response ``a_m = exp(j pi m cos(theta))``."""
    return np.exp(1j * math.pi * np.arange(m_t) * math.cos(theta))


def _precoder(cfg, alloc, rng, n_comm):
    m_t, k = cfg.m_t, alloc.k
    for _ in range(10):
        own = _cn(rng, m_t, k)
        try:
            pre = build_zf_precoder(m_t, own, _cn(rng, m_t, n_comm),
                                    _cn(rng, m_t, alloc.sensing_nulls), rng)
            return pre, own
        except RankDeficiency:
            continue
    raise RankDeficiency("could not draw a well-conditioned channel in 10 attempts")


def _comm_sample(cfg, alloc, r_window, seed, i, request_model):
    d, _, rng, resamples = _realization(cfg.lambda_b, r_window, seed, COMM_TAG, i, alloc.l + 1)
    k, l, a = alloc.k, alloc.l, cfg.alpha
    spare = cfg.m_t - k - alloc.sensing_nulls
    n_comm = k * (l - 1) if request_model == "average" else int(rng.poisson(k * (l - 1)))
    pre, own = _precoder(cfg, alloc, rng, n_comm)
    extra = np.zeros(0)
    if request_model == "poisson":
        # each other cluster member serves the typical request plus Poisson others
        keep = []
        for dist in d[1:l]:
            offered = 1 + int(rng.poisson(k * (l - 1)))
            if offered > spare and rng.random() >= spare / offered:
                keep.append(dist)
        extra = np.array(keep)
    # the typical user owns the first column
    g0 = abs(np.vdot(own[:, 0], pre.w[:, 0])) ** 2
    others = np.concatenate((extra, d[l:]))
    gains = rng.gamma(k, size=others.size)
    interference = float(np.sum(gains * others ** (-a)))
    return math.log1p(g0 * d[0] ** (-a) / interference), resamples


def _sense_sample(cfg, alloc, r_window, seed, i):
    d, phi, rng, resamples = _realization(cfg.lambda_b, r_window, seed, SENSE_TAG, i, alloc.q + 1)
    k, q = alloc.k, alloc.q
    pos = np.column_stack((d * np.cos(phi), d * np.sin(phi)))
    r = d[0]
    pre, _ = _precoder(cfg, alloc, rng, k * (alloc.l - 1))
    theta = 2.0 * math.pi * rng.random()
    ht = float(np.sum(np.abs(steering_vector(cfg.m_t, theta).conj() @ pre.w) ** 2))
    # gains follow generation order so a wider window only appends terms
    gains = rng.gamma(k, size=len(d) - 1)
    dq = np.hypot(pos[1:, 0] - pos[0, 0], pos[1:, 1] - pos[0, 1])
    if q > 1:
        nulled = np.argpartition(dq, q - 2)[:q - 1]
        gains[nulled] = 0.0
    interference = float(np.sum(gains * dq ** (-cfg.alpha)))
    sir = cfg.sensing_gain * ht * r ** (-2.0 * cfg.beta) / interference
    return math.log1p(sir), resamples


def _run_chunk(kind, cfg, alloc, r_window, seed, lo, hi, request_model):
    vals = np.empty(hi - lo)
    res = 0
    for n, i in enumerate(range(lo, hi)):
        if kind == "comm":
            vals[n], r = _comm_sample(cfg, alloc, r_window, seed, i, request_model)
        else:
            vals[n], r = _sense_sample(cfg, alloc, r_window, seed, i)
        res += r
    return vals, res


def _estimate(kind, cfg, alloc, n, seed, jobs, r_window, request_model="average"):
    if n < 2:
        raise DomainError("need at least 2 realizations")
    rep = validate_allocation(cfg, alloc)
    if not rep:
        raise InfeasibleAllocation("; ".join(rep.violations))
    if r_window is None:
        r_window = default_r_window(cfg.lambda_b)
    jobs = max(1, int(jobs))
    if jobs == 1:
        vals, res = _run_chunk(kind, cfg, alloc, r_window, seed, 0, n, request_model)
    else:
        edges = np.linspace(0, n, min(jobs * 4, n) + 1).astype(int)
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_run_chunk, kind, cfg, alloc, r_window, seed, int(a), int(b), request_model)
                    for a, b in zip(edges[:-1], edges[1:])]
            parts = [f.result() for f in futs]
        vals = np.concatenate([p[0] for p in parts])
        res = sum(p[1] for p in parts)
    mean = math.fsum(vals) / n
    var = math.fsum((vals - mean) ** 2) / (n - 1)
    std = math.sqrt(var)
    tail = interference_tail_mean(cfg, alloc.k, r_window)
    return McEstimate(mean, 1.96 * std / math.sqrt(n), n, int(seed), std, res,
                      {"r_window_km": r_window, "tail_interference_mean": tail})


def mc_comm_rate(cfg: NetworkConfig, alloc: Allocation, n: int = 20000, seed: int = 0, jobs: int = 1,
                 request_model: str = "average", r_window: Optional[float] = None) -> McEstimate:
    """Monte Carlo estimate of the typical user's rate ``E[ln(1 + SIR_c)]``.

    Parameters
    ----------
    request_model : {"average", "poisson"}
        ``"average"`` offers the serving BS exactly ``K(L-1)`` communication
        nulling rows. ``"poisson"`` draws the offered count, and lets other
        cluster members abandon the typical user's request when overloaded,
        in which case they interfere.
    """
    if request_model not in ("average", "poisson"):
        raise DomainError(f"unknown request_model {request_model!r}")
    return _estimate("comm", cfg, alloc, n, seed, jobs, r_window, request_model)


def mc_sense_rate(cfg: NetworkConfig, alloc: Allocation, n: int = 20000, seed: int = 0, jobs: int = 1,
                  r_window: Optional[float] = None) -> McEstimate:
    """Monte Carlo estimate of the typical target's rate ``E[ln(1 + SIR_s)]``.

    The target sits at the origin and is sensed by its nearest BS. The
    ``Q - 1`` BSs nearest to that BS null towards its receiver; every other
    BS interferes over the BS-to-BS distance.
    """
    return _estimate("sense", cfg, alloc, n, seed, jobs, r_window)


def sample_zf_gain(m_t: int, n_cols: int, n: int, seed: int = 0) -> np.ndarray:
    """Draws of ``|h^H w|^2`` for a normalised ZF column among ``n_cols`` stacked channels."""
    rng = _rng(seed, 10, 0)
    out = np.empty(n)
    block = 4096
    for lo in range(0, n, block):
        b = min(block, n - lo)
        h = _cn(rng, b, m_t, n_cols)
        gram = np.conj(np.swapaxes(h, 1, 2)) @ h
        inv = np.linalg.inv(gram)
        out[lo:lo + b] = 1.0 / inv[:, 0, 0].real
    return out


def _haar(rng, b, m_t, k):
    z = _cn(rng, b, m_t, k)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def sample_interferer_gain(m_t: int, k: int, n: int, seed: int = 0) -> np.ndarray:
    """Draws of ``sum_k |h^H w_k|^2`` for a Haar-random orthonormal ``m_t x K`` precoder."""
    rng = _rng(seed, 11, 0)
    out = np.empty(n)
    block = 8192
    for lo in range(0, n, block):
        b = min(block, n - lo)
        w = _haar(rng, b, m_t, k)
        h = _cn(rng, b, m_t)
        out[lo:lo + b] = np.sum(np.abs(np.einsum("bm,bmk->bk", h.conj(), w)) ** 2, axis=1)
    return out


def sample_beam_gain(m_t: int, k: int, n: int, seed: int = 0, n_null: int = 0) -> np.ndarray:
    """Draws of the beam gain ``sum_k |a(theta)^H w_k|^2`` towards a random-angle target.

    ``w`` is a normalised ZF precoder for ``K`` random users plus ``n_null``
    extra nulling rows.
    """
    rng = _rng(seed, 12, 0)
    out = np.empty(n)
    block = 4096
    m = np.arange(m_t)
    for lo in range(0, n, block):
        b = min(block, n - lo)
        h = _cn(rng, b, m_t, k + n_null)
        gram = np.conj(np.swapaxes(h, 1, 2)) @ h
        w = (h @ np.linalg.inv(gram))[:, :, :k]
        w /= np.linalg.norm(w, axis=1, keepdims=True)
        theta = 2.0 * math.pi * rng.random(b)
        a = np.exp(1j * math.pi * m[None, :] * np.cos(theta)[:, None])
        out[lo:lo + b] = np.sum(np.abs(np.einsum("bm,bmk->bk", a.conj(), w)) ** 2, axis=1)
    return out


def measure_request_load(cfg: NetworkConfig, alloc: Allocation, n: int = 200, seed: int = 0,
                         r_window: Optional[float] = None) -> float:
    """Average number of nulling requests a BS receives in a simulated network.

    Users form a PPP of density ``K lambda`` and attach to their nearest BS;
    each asks its ``L - 1`` next-nearest BSs to null. Each BS asks its
    ``Q - 1`` nearest BSs to null towards its ``J`` sensing beams. Only BSs in
    the inner half-radius disk are counted to avoid edge effects.
    """
    if r_window is None:
        r_window = default_r_window(cfg.lambda_b, 600.0)
    k, l, j, q = alloc.k, alloc.l, alloc.j, alloc.q
    totals = []
    for i in range(n):
        rng = _rng(seed, 13, i)
        bs = _draw_positions(cfg.lambda_b, r_window, rng)
        if len(bs) < max(l, q) + 1:
            continue
        users = _draw_positions(k * cfg.lambda_b, r_window, rng)
        received = np.zeros(len(bs))
        if l > 1 and len(users):
            du = np.hypot(users[:, None, 0] - bs[None, :, 0], users[:, None, 1] - bs[None, :, 1])
            near = np.argsort(du, axis=1)[:, 1:l]
            np.add.at(received, near.ravel(), 1)
        if q > 1:
            db = np.hypot(bs[:, None, 0] - bs[None, :, 0], bs[:, None, 1] - bs[None, :, 1])
            near = np.argsort(db, axis=1)[:, 1:q]
            np.add.at(received, near.ravel(), j)
        inner = np.hypot(bs[:, 0], bs[:, 1]) < 0.5 * r_window
        if inner.any():
            totals.append(received[inner])
    return float(np.mean(np.concatenate(totals)))
