"""Configuration, allocation bookkeeping and PPP distance laws.

Lengths are in km and densities in BS per km^2 throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import DegenerateLaw, DomainError, ValidationError

__all__ = [
    "NetworkConfig",
    "Allocation",
    "FeasibilityReport",
    "DistanceLaw",
    "validate_allocation",
    "pdf_eval",
    "ccdf_rq_over_2r",
    "DEFAULTS",
]


@dataclass(frozen=True)
class NetworkConfig:
    """Physical and network parameters of the ISAC cellular layout.

    Defaults reproduce the evaluation setup: 20 transmit and 10 receive
    antennas, 1 W, ``|xi|^2 = 0.1``, ``kappa = 1``, ``delta_t = 1``,
    1 BS/km^2, up to 10 targets, ``alpha = 4`` and ``beta = 2``.

    Attributes
    ----------
    lambda_b : float
        BS density (per km^2).
    m_t, m_r : int
        Transmit / receive antennas per BS.
    p_t : float
        Transmit power in W. Carried for completeness only; every rate in the
        package is an SIR quantity and does not depend on it.
    alpha : float
        Pathloss exponent of BS-to-user and BS-to-BS links.
    beta : float
        One-way pathloss exponent of the BS-to-target link (the echo decays
        as ``d^(-2 beta)``).
    xi_sq : float
        Mean RCS power ``|xi|^2``.
    kappa : float
        Receive-filter mismatch factor in [0, 1].
    delta_t : float
        Matched-filter (symbol-domain) gain.
    j_max : int
        Largest number of targets a BS can resolve at once.
    """

    lambda_b: float = 1.0
    m_t: int = 20
    m_r: int = 10
    p_t: float = 1.0
    alpha: float = 4.0
    beta: float = 2.0
    xi_sq: float = 0.1
    kappa: float = 1.0
    delta_t: float = 1.0
    j_max: int = 10

    def __post_init__(self):
        checks = [
            (self.lambda_b > 0, "lambda_b > 0"),
            (self.m_t >= 1 and int(self.m_t) == self.m_t, "m_t >= 1 (integer)"),
            (self.m_r >= 1 and int(self.m_r) == self.m_r, "m_r >= 1 (integer)"),
            (self.p_t >= 0, "p_t >= 0"),
            (self.alpha >= 2, "alpha >= 2"),
            (self.beta >= 2, "beta >= 2"),
            (self.xi_sq >= 0, "xi_sq >= 0"),
            (0 <= self.kappa <= 1, "0 <= kappa <= 1"),
            (self.delta_t >= 0, "delta_t >= 0"),
            (self.j_max >= 1 and int(self.j_max) == self.j_max, "j_max >= 1 (integer)"),
        ]
        for ok, rule in checks:
            if not ok:
                raise ValidationError(f"NetworkConfig invariant violated: {rule}")

    @property
    def sensing_gain(self) -> float:
        """SIR prefactor ``delta_t * kappa * m_r * xi_sq`` of the echo link."""
        return self.delta_t * self.kappa * self.m_r * self.xi_sq

    def replace(self, **changes) -> "NetworkConfig":
        return NetworkConfig(**{**asdict(self), **changes})

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULTS = NetworkConfig()


@dataclass(frozen=True)
class Allocation:
    """Decision tuple: K users per cell, comm cluster L, J targets, sensing cluster Q."""

    k: int = 1
    l: int = 1
    j: int = 1
    q: int = 1

    def __post_init__(self):
        for name in ("k", "l", "j", "q"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise DomainError(f"Allocation.{name} must be an integer >= 1, got {v}")

    @property
    def sensing_nulls(self) -> int:
        """``J (Q - 1)``: transmit DoF spent nulling neighbours' sensing receivers."""
        return self.j * (self.q - 1)

    @property
    def dof_used(self) -> int:
        return self.k * self.l + self.sensing_nulls

    @property
    def request_load(self) -> int:
        """Nulling requests a BS receives on average, ``K(L-1) + J(Q-1)``."""
        return self.k * (self.l - 1) + self.sensing_nulls

    def diversity_order(self, m_t: int) -> int:
        return m_t - self.dof_used + 1


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    violations: tuple = ()
    spare_dof: int = 0
    diversity_order: int = 0

    def __bool__(self):
        return self.feasible


def validate_allocation(cfg: NetworkConfig, alloc: Allocation) -> FeasibilityReport:
    """Check ``K L + J (Q-1) <= M_t`` and ``J <= J_max``."""
    violations = []
    if alloc.dof_used > cfg.m_t:
        violations.append(f"dof: K*L + J*(Q-1) = {alloc.dof_used} > m_t = {cfg.m_t}")
    if alloc.j > cfg.j_max:
        violations.append(f"targets: J = {alloc.j} > j_max = {cfg.j_max}")
    return FeasibilityReport(
        feasible=not violations,
        violations=tuple(violations),
        spare_dof=cfg.m_t - alloc.dof_used,
        diversity_order=alloc.diversity_order(cfg.m_t),
    )


@dataclass(frozen=True)
class DistanceLaw:
    """One of the three distance laws used by the analysis.

    ``kind`` selects the law:

    * ``"serving-distance"``: nearest BS distance, ``2 pi lam R exp(-pi lam R^2)``.
    * ``"ratio-eta-L"``: ratio of nearest to L-th nearest distance,
      ``2 (L-1) x (1-x^2)^(L-2)`` on (0, 1).
    * ``"order-Q-distance"``: ``exp(-lam pi r^2) 2 (lam pi r^2)^Q / (r Gamma(Q))``,
      i.e. the Q-th nearest point of a PPP.
    """

    kind: str
    lambda_b: float = 1.0
    order: int = 1

    KINDS = ("serving-distance", "ratio-eta-L", "order-Q-distance")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise DomainError(f"unknown distance law {self.kind!r}")
        if not self.lambda_b > 0:
            raise DomainError("lambda_b must be > 0")
        if int(self.order) != self.order or self.order < 1:
            raise DomainError("order must be an integer >= 1")

    @property
    def support(self):
        return (0.0, 1.0) if self.kind == "ratio-eta-L" else (0.0, math.inf)


def pdf_eval(law: DistanceLaw, x) -> float:
    """Density of ``law`` at ``x``.

    Raises
    ------
    DegenerateLaw
        For the distance ratio with ``L = 1``: the furthest cluster member is
        the serving BS itself, so the ratio is the point mass at 1.
    DomainError
        If ``x`` lies outside the open support.
    """
    x = float(x)
    lam = law.lambda_b
    if law.kind == "ratio-eta-L":
        if law.order == 1:
            raise DegenerateLaw("ratio law with L=1 is a point mass at eta=1")
        if not 0.0 < x < 1.0:
            raise DomainError(f"eta must lie in (0, 1), got {x}")
        L = law.order
        return 2.0 * (L - 1) * x * (1.0 - x * x) ** (L - 2)
    if not x > 0:
        raise DomainError(f"distance must be > 0, got {x}")
    if law.kind == "serving-distance":
        return 2.0 * math.pi * lam * x * math.exp(-math.pi * lam * x * x)
    Q = law.order
    u = lam * math.pi * x * x
    # log form keeps large Q finite
    return math.exp(-u + Q * math.log(u) + math.log(2.0 / x) - math.lgamma(Q))


def ccdf_rq_over_2r(x: float, q: int) -> float:
    """``P[r_Q / (2R) >= x] = 1 - (1 - 1/(4 x^2))^(Q-2)`` for ``x >= 1``, ``Q >= 2``.

    This is the ratio law of two order statistics of one PPP seen from a
    single point: ``R`` the nearest and ``r_Q`` the (Q-1)-th nearest distance.
    """
    x = float(x)
    if not x >= 1.0:
        raise DomainError(f"x must be >= 1, got {x}")
    if int(q) != q or q < 2:
        raise DomainError(f"q must be an integer >= 2, got {q}")
    y = 1.0 / (4.0 * x * x)
    # 1 - (1-y)^n via expm1/log1p for accuracy at large x
    return float(-math.expm1((q - 2) * math.log1p(-y)))
