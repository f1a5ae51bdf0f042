"""Closed-form rate expressions and random-matrix deterministic equivalents.

Everything here is exact arithmetic on scalars: the large-system limits of
the per-user SINR under MF/ZF/RZF precoding, the resulting average sum
rates in nats, the CSI acquisition overhead factor, and the effective
(overhead-discounted) rates and gains built from them.  The ZF rate is
exact at finite dimensions; the MF and RZF rates are asymptotic in the
antenna count at a fixed stream ratio ``c = Q / L``.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass

_SQRT_CLAMP = -1e-12

PRECODER_NAMES = ("MF", "ZF", "RZF")


class COutOfRange(ValueError):
    pass


class NonPositiveB(ArithmeticError):
    """Numerical breakdown of the RZF power deterministic equivalent."""


class CsiOverheadExceedsBlock(ValueError):
    """Pilot overhead c * zeta exceeds the whole coherence block."""


class ZeroDenominator(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class RateInputs:
    """Operating point of one rate evaluation.

    ``c`` is the stream ratio Q/L and may be any positive real; the
    optimizers treat it as continuous.  ``omega`` and ``q`` are derived,
    keeping (G, L, c, p_t) the single source of truth.
    """

    G: int
    L: int
    c: float
    p_t: float

    def __post_init__(self):
        if self.G < 1:
            raise ValueError(f"G={self.G} must be >= 1")
        if self.c <= 0:
            raise COutOfRange(f"stream ratio c={self.c} must be positive")
        if self.p_t < 0:
            raise ValueError(f"p_t={self.p_t} must be nonnegative")

    @classmethod
    def from_streams(cls, G: int, Q: int, L: int, p_t: float) -> "RateInputs":
        return cls(G=G, L=L, c=Q / L, p_t=p_t)

    @property
    def q(self) -> float:
        return self.c * self.L

    @property
    def omega(self) -> float:
        return self.p_t / (self.p_t + self.G)


@dataclass(frozen=True)
class RzfDeterministics:
    """Asymptotic constants of the RZF analysis at regularizer L / p_t.

    ``a`` is the deterministic equivalent of the per-user quadratic form
    (equal to the transform value ``s`` at z = 1/p_t), ``ds`` the transform
    derivative there, ``b = a + ds / p_t`` the power-normalization trace
    limit, and ``p_sq = p_t / b`` the squared power factor.
    """

    a: float
    s: float
    ds: float
    b: float
    p_sq: float


@dataclass(frozen=True)
class CsiCostModel:
    """Pilot resource accounting for one coherence block.

    beta_tot: pilot resources per served user per block.
    t_c:      coherence time in seconds.
    w_c:      coherence bandwidth in Hz.
    """

    beta_tot: float
    t_c: float
    w_c: float

    def __post_init__(self):
        if self.beta_tot < 0:
            raise ValueError("beta_tot must be nonnegative")
        if self.t_c * self.w_c <= 0:
            raise ValueError("coherence block t_c * w_c must be positive")


@dataclass(frozen=True)
class RateReport:
    precoder: str
    G: int
    Q: float
    L: int
    snr_db: float
    avg_sum_rate_nats: float
    zeta: float
    effective_rate_nats: float
    source: str


def _guarded_sqrt(x: float) -> float:
    # Degenerate (c, z) corners can push an exact-zero discriminant a few
    # ulps negative.
    if _SQRT_CLAMP <= x < 0:
        return 0.0
    return math.sqrt(x)


def stieltjes(c: float, z: float) -> float:
    """Limit of the normalized resolvent trace at aspect ratio c.

    S_c(z) = 1/2 * (sqrt((1-c)^2/z^2 + 2(1+c)/z + 1) + (1-c)/z - 1)
    for z > 0, c >= 0.  S_0(z) = 1/z (resolvent of the zero matrix).
    """
    if z <= 0:
        raise ValueError(f"z={z} must be positive")
    if c < 0:
        raise ValueError(f"c={c} must be nonnegative")
    disc = (1 - c) ** 2 / z**2 + 2 * (1 + c) / z + 1
    return 0.5 * (_guarded_sqrt(disc) + (1 - c) / z - 1)


def stieltjes_deriv(c: float, z: float) -> float:
    """Derivative of :func:`stieltjes` with respect to z (closed form)."""
    if z <= 0:
        raise ValueError(f"z={z} must be positive")
    if c < 0:
        raise ValueError(f"c={c} must be nonnegative")
    disc = c * c + 2 * c * (z - 1) + (z + 1) ** 2
    root = _guarded_sqrt(disc)
    return 0.5 * ((-c * c - c * (z - 2) - z - 1) / (z * z * root) - (1 - c) / (z * z))


def rzf_deterministics(c: float, p_t: float) -> RzfDeterministics:
    """Asymptotic SINR/power constants for RZF at stream ratio c.

    Evaluates the power factor two independent ways (via the transform
    derivative and via the direct algebraic form) and insists they agree;
    a disagreement or a nonpositive trace limit signals numerical
    breakdown rather than a valid operating point.
    """
    if p_t <= 0:
        raise ValueError(f"p_t={p_t} must be positive")
    if c > 1:
        warnings.warn(f"RZF asymptotics requested at c={c} > 1; the theory targets c in (0, 1]", stacklevel=2)
    z = 1.0 / p_t
    a = stieltjes(c, z)
    ds = stieltjes_deriv(c, z)
    b = a + ds / p_t
    if b <= 0:
        raise NonPositiveB(f"power trace limit b={b} <= 0 at c={c}, p_t={p_t}")
    p_sq = p_t / b

    disc = p_t * p_t * (c - 1) ** 2 + 2 * (c + 1) * p_t + 1
    denom_direct = a - (p_t / 2) * ((p_t * (c - 1) ** 2 + c + 1) / math.sqrt(disc) + (1 - c))
    p_sq_direct = p_t / denom_direct
    # b = a + ds/p_t cancels two a-sized terms, so float error in either
    # path grows like eps * a / b; widen the agreement gate accordingly.
    tol = max(1e-9, 16 * sys.float_info.epsilon * (a / b)) * max(1.0, abs(p_sq))
    if abs(p_sq - p_sq_direct) > tol:
        raise NonPositiveB(
            f"power factor evaluation paths disagree: {p_sq} vs {p_sq_direct} at c={c}, p_t={p_t}"
        )
    return RzfDeterministics(a=a, s=a, ds=ds, b=b, p_sq=p_sq)


def mf_rate(inputs: RateInputs) -> float:
    """Asymptotic MF average sum rate in nats per channel use.

    c * G * L * ln(1 + (1/c) * p_t / (p_t + G)); any c > 0 is allowed,
    including more streams than antennas.
    """
    return inputs.c * inputs.G * inputs.L * math.log1p(inputs.omega / inputs.c)


def mf_cacheless(c_prime: float, L: int, p_t: float) -> float:
    """Cacheless MF baseline: the single-group case of :func:`mf_rate`."""
    return mf_rate(RateInputs(G=1, L=L, c=c_prime, p_t=p_t))


def zf_rate(inputs: RateInputs) -> float:
    """Exact ZF average sum rate Q * G * ln(1 + (p_t/G)(1/c - 1)).

    Valid for stream ratios 0 < c < 1; the per-user SINR is deterministic,
    so the expression holds at finite dimensions, not just asymptotically.
    """
    if inputs.c >= 1:
        raise COutOfRange(f"ZF needs c in (0, 1), got c={inputs.c}")
    snr = (inputs.p_t / inputs.G) * (1.0 / inputs.c - 1.0)
    return inputs.c * inputs.L * inputs.G * math.log1p(snr)


def rzf_rate(inputs: RateInputs) -> float:
    """Asymptotic RZF average sum rate in nats per channel use."""
    if inputs.p_t == 0:
        return 0.0
    det = rzf_deterministics(inputs.c, inputs.p_t)
    sinr = (det.a**2 * det.p_sq / inputs.G) / ((1.0 + det.a) ** 2 + inputs.p_t / inputs.G)
    return inputs.c * inputs.G * inputs.L * math.log1p(sinr)


_RATE_FNS = {"MF": mf_rate, "ZF": zf_rate, "RZF": rzf_rate}


def raw_rate(precoder: str, inputs: RateInputs) -> float:
    """Dispatch to the per-precoder average sum rate."""
    name = str(precoder).upper()
    if name not in _RATE_FNS:
        raise ValueError(f"unknown precoder {precoder!r}; expected one of {PRECODER_NAMES}")
    return _RATE_FNS[name](inputs)


def csi_zeta(model: CsiCostModel, G: int, L: int) -> float:
    """Overhead coefficient zeta = beta_tot * G * L / (t_c * w_c).

    Note zeta does not depend on Q; the Q-dependence of the pilot cost
    enters the effective rate only through the factor c = Q/L.
    """
    return model.beta_tot * G * L / (model.t_c * model.w_c)


def effective_rate(
    precoder: str,
    inputs: RateInputs,
    model: CsiCostModel | None = None,
    *,
    zeta: float | None = None,
    source: str = "closed_form",
) -> RateReport:
    """Average sum rate discounted by the CSI acquisition overhead.

    Exactly one of ``model`` or ``zeta`` fixes the overhead coefficient;
    the effective rate is (1 - c * zeta) times the raw closed-form rate.
    """
    if (model is None) == (zeta is None):
        raise ValueError("provide exactly one of model or zeta")
    if zeta is None:
        zeta = csi_zeta(model, inputs.G, inputs.L)
    overhead = inputs.c * zeta
    if overhead > 1:
        raise CsiOverheadExceedsBlock(f"c * zeta = {overhead} > 1 leaves no resources for data")
    rate = raw_rate(precoder, inputs)
    return RateReport(
        precoder=str(precoder).upper(),
        G=inputs.G,
        Q=inputs.q,
        L=inputs.L,
        snr_db=10.0 * math.log10(inputs.p_t) if inputs.p_t > 0 else -math.inf,
        avg_sum_rate_nats=rate,
        zeta=zeta,
        effective_rate_nats=(1.0 - overhead) * rate,
        source=source,
    )


def effective_gain(
    precoder: str,
    G: int,
    Q: int,
    Q_prime: int,
    L: int,
    p_t: float,
    model: CsiCostModel,
) -> float:
    """Effective-rate ratio of the cache-aided system over the cacheless one.

    Compares the (G, Q) scheme against the (1, Q') baseline under the same
    antenna and power budget, overhead included on both sides.
    """
    num = effective_rate(precoder, RateInputs.from_streams(G, Q, L, p_t), model).effective_rate_nats
    den = effective_rate(precoder, RateInputs.from_streams(1, Q_prime, L, p_t), model).effective_rate_nats
    if den == 0:
        raise ZeroDenominator("cacheless effective rate is zero")
    return num / den
