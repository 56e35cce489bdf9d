"""Closed-form component-count probabilities for the line model.

Q_m, the probability that the network forms exactly m components, is an
alternating binomial sum truncated at min(n-1 or n, floor(L/r)).  The
terms can dwarf the result by many orders of magnitude, so evaluation
comes in two flavours: compensated binary64 summation with a cancellation
diagnostic, and exact big-integer rational arithmetic.  Auto mode runs
the float path and escalates to rationals when the diagnostic says too
many digits were lost.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

from .model import ComponentDistribution

__all__ = [
    "ModelKind",
    "Ratio",
    "ExactValue",
    "binomial",
    "ln_binomial",
    "truncation_index",
    "q_m",
    "q_1",
    "distribution",
    "AUTO_ESCALATION_THRESHOLD",
]

# Float-mode cancellation ratio beyond which Auto mode switches to exact
# rationals; leaves roughly eight trustworthy decimal digits below it.
AUTO_ESCALATION_THRESHOLD = 1e8

# Test-only hook: flips the sign of every odd term so validation suites can
# prove they detect a broken evaluator.  Never set outside tests.
_SIGN_FLIP = False


class ModelKind(Enum):
    """FREE is the plain n-node model; ANCHORED adds a fixed node at 0."""

    FREE = "free"
    ANCHORED = "anchored"


@dataclass(frozen=True)
class Ratio:
    """The ratio rho = L/r in dual representation.

    ``value`` is the binary64 number; ``exact`` is the identical value as
    a rational (every finite float is one), so the float and rational
    evaluation paths answer the same mathematical question.
    """

    value: float
    exact: Fraction

    def __post_init__(self):
        if not (self.value > 0) or not math.isfinite(self.value):
            raise ValueError("rho must be positive and finite")
        if Fraction(self.value) != self.exact:
            raise ValueError("rational form must equal the float value exactly")

    @classmethod
    def from_float(cls, rho: float) -> "Ratio":
        rho = float(rho)
        if not math.isfinite(rho) or rho <= 0:
            raise ValueError("rho must be positive and finite")
        return cls(rho, Fraction(rho))

    @classmethod
    def from_lengths(cls, length: float, radius: float) -> "Ratio":
        if not (radius > 0):
            raise ValueError("radius must be positive")
        return cls.from_float(length / radius)

    def floor(self) -> int:
        """floor(rho), computed on the exact rational form."""
        return self.exact.numerator // self.exact.denominator


@dataclass(frozen=True)
class ExactValue:
    """A probability with its evaluation diagnostics.

    ``float_value`` is reported raw (it may stray slightly outside [0, 1]
    under cancellation; clamping is left to presentation layers).
    ``cancellation_ratio`` is the largest summand magnitude over the
    result magnitude: the factor by which intermediate terms exceeded the
    answer.
    """

    float_value: float
    rational_value: Fraction | None
    max_term_magnitude: float
    cancellation_ratio: float
    mode: str  # "float" or "rational"


def binomial(a: int, b: int) -> int:
    """Exact binomial coefficient C(a, b); zero when b > a."""
    if a < 0 or b < 0:
        raise ValueError("binomial arguments must be non-negative")
    return math.comb(a, b)


def ln_binomial(a: int, b: int) -> float:
    """ln C(a, b) as binary64; -inf when b > a (the coefficient is zero)."""
    if a < 0 or b < 0:
        raise ValueError("binomial arguments must be non-negative")
    if b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def _top(model: ModelKind, n: int) -> int:
    return n - 1 if model is ModelKind.FREE else n


def truncation_index(model: ModelKind, n: int, ratio: Ratio) -> int:
    """Upper summation limit: min(n-1, floor(rho)) free, min(n, floor(rho)) anchored."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return min(_top(model, n), ratio.floor())


def _term_magnitude(coeff: int, base: float, n: int) -> float:
    """|coeff * base**n| in binary64, via logs when the direct product over-
    or underflows.  base <= 0 only happens at the exactly-zero boundary term."""
    if base <= 0.0:
        return 0.0
    if coeff.bit_length() <= 1000:
        direct = float(coeff) * base**n
        if direct != 0.0 and math.isfinite(direct):
            return direct
    try:
        return math.exp(math.log(coeff) + n * math.log(base))
    except OverflowError:
        return math.inf


def _sum_terms_float(top: int, n: int, m: int, k: int, rho: float) -> tuple[float, float]:
    """Compensated (Neumaier) sum of the alternating terms for i = m-1 .. k.

    Returns (sum, largest term magnitude)."""
    total = 0.0
    comp = 0.0
    max_mag = 0.0
    for i in range(m - 1, k + 1):
        coeff = math.comb(i, m - 1) * math.comb(top, i)
        if coeff == 0:
            continue
        mag = _term_magnitude(coeff, 1.0 - i / rho, n)
        if mag > max_mag:
            max_mag = mag
        negative = (i - m + 1) % 2 == 1
        if _SIGN_FLIP:
            negative = not negative
        t = -mag if negative else mag
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
    return total + comp, max_mag


def _cancellation_ratio(value: float, max_mag: float) -> float:
    if max_mag == 0.0:
        return 0.0
    return max_mag / max(abs(value), sys.float_info.min)


def _q_m_float(top: int, n: int, m: int, k: int, rho: float) -> ExactValue:
    value, max_mag = _sum_terms_float(top, n, m, k, rho)
    return ExactValue(value, None, max_mag, _cancellation_ratio(value, max_mag), "float")


def _q_m_rational(
    top: int,
    n: int,
    m: int,
    k: int,
    rho: Fraction,
    pow_cache: dict[int, int] | None = None,
) -> ExactValue:
    # Common denominator P**n with P/Q = rho: each term is an integer
    # coeff * (P - i*Q)**n over it, so the whole sum is big-int arithmetic.
    P, Q = rho.numerator, rho.denominator
    num = 0
    max_num = 0
    for i in range(m - 1, k + 1):
        coeff = math.comb(i, m - 1) * math.comb(top, i)
        if coeff == 0:
            continue
        if pow_cache is not None:
            powed = pow_cache.get(i)
            if powed is None:
                powed = pow_cache[i] = (P - i * Q) ** n
        else:
            powed = (P - i * Q) ** n
        term = coeff * powed
        if term > max_num:
            max_num = term
        negative = (i - m + 1) % 2 == 1
        if _SIGN_FLIP:
            negative = not negative
        num = num - term if negative else num + term
    den = P**n
    value = Fraction(num, den)
    max_mag = _frac_to_float(Fraction(max_num, den)) if max_num else 0.0
    fv = _frac_to_float(value)
    return ExactValue(fv, value, max_mag, _cancellation_ratio(fv, max_mag), "rational")


def _frac_to_float(f: Fraction) -> float:
    try:
        return float(f)
    except OverflowError:
        return math.inf if f > 0 else -math.inf


def q_m(
    model: ModelKind,
    n: int,
    m: int,
    ratio: Ratio,
    mode: str = "auto",
) -> ExactValue:
    """Probability of exactly m components, evaluated per *mode*.

    mode "float": compensated binary64 summation, raw result plus
    cancellation diagnostic.  "rational": exact big-integer rationals.
    "auto": float first, escalating to rational past the cancellation
    threshold.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if m < 1:
        raise ValueError("m must be at least 1")
    if mode not in ("float", "rational", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    k = truncation_index(model, n, ratio)
    top = _top(model, n)
    if m - 1 > k:
        rational = Fraction(0) if mode != "float" else None
        return ExactValue(0.0, rational, 0.0, 0.0, "rational" if mode == "rational" else "float")
    if mode == "rational":
        return _q_m_rational(top, n, m, k, ratio.exact)
    result = _q_m_float(top, n, m, k, ratio.value)
    if mode == "auto" and result.cancellation_ratio > AUTO_ESCALATION_THRESHOLD:
        return _q_m_rational(top, n, m, k, ratio.exact)
    return result


def q_1(model: ModelKind, n: int, ratio: Ratio, mode: str = "auto") -> ExactValue:
    """Connectivity probability: dedicated single-component path.

    Codes the classic sum over i of (-1)^i C(n-1 or n, i) (1 - i/rho)^n
    directly, without the inner binomial factor of the general evaluator
    (which is C(i, 0) = 1 at m = 1).  Tests pin this path bit-for-bit
    against q_m(..., m=1, ...).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if mode not in ("float", "rational", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    k = truncation_index(model, n, ratio)
    top = _top(model, n)
    if mode == "rational":
        return _q_1_rational(top, n, k, ratio.exact)
    result = _q_1_float(top, n, k, ratio.value)
    if mode == "auto" and result.cancellation_ratio > AUTO_ESCALATION_THRESHOLD:
        return _q_1_rational(top, n, k, ratio.exact)
    return result


def _q_1_float(top: int, n: int, k: int, rho: float) -> ExactValue:
    total = 0.0
    comp = 0.0
    max_mag = 0.0
    for i in range(k + 1):
        coeff = math.comb(top, i)
        if coeff == 0:
            continue
        mag = _term_magnitude(coeff, 1.0 - i / rho, n)
        if mag > max_mag:
            max_mag = mag
        negative = i % 2 == 1
        if _SIGN_FLIP:
            negative = not negative
        t = -mag if negative else mag
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
    value = total + comp
    return ExactValue(value, None, max_mag, _cancellation_ratio(value, max_mag), "float")


def _q_1_rational(top: int, n: int, k: int, rho: Fraction) -> ExactValue:
    P, Q = rho.numerator, rho.denominator
    num = 0
    max_num = 0
    for i in range(k + 1):
        coeff = math.comb(top, i)
        term = coeff * (P - i * Q) ** n
        if term > max_num:
            max_num = term
        negative = i % 2 == 1
        if _SIGN_FLIP:
            negative = not negative
        num = num - term if negative else num + term
    den = P**n
    value = Fraction(num, den)
    max_mag = _frac_to_float(Fraction(max_num, den)) if max_num else 0.0
    fv = _frac_to_float(value)
    return ExactValue(fv, value, max_mag, _cancellation_ratio(fv, max_mag), "rational")


def max_components(model: ModelKind, n: int) -> int:
    """Largest m with nonzero probability: the vertex count."""
    return n if model is ModelKind.FREE else n + 1


def distribution(
    model: ModelKind,
    n: int,
    ratio: Ratio,
    mode: str = "auto",
) -> ComponentDistribution:
    """Full component-count distribution Q_1 .. Q_max for one model point."""
    if n < 1:
        raise ValueError("n must be at least 1")
    k = truncation_index(model, n, ratio)
    top = _top(model, n)
    details: dict[int, ExactValue] = {}
    pow_cache: dict[int, int] = {}
    for m in range(1, max_components(model, n) + 1):
        if m - 1 > k:
            ev = ExactValue(
                0.0,
                Fraction(0) if mode != "float" else None,
                0.0,
                0.0,
                "rational" if mode == "rational" else "float",
            )
        elif mode == "rational":
            ev = _q_m_rational(top, n, m, k, ratio.exact, pow_cache)
        else:
            ev = _q_m_float(top, n, m, k, ratio.value)
            if mode == "auto" and ev.cancellation_ratio > AUTO_ESCALATION_THRESHOLD:
                ev = _q_m_rational(top, n, m, k, ratio.exact, pow_cache)
        details[m] = ev
    provenance = "exact-rational" if mode == "rational" else "exact-float"
    probs = {m: ev.float_value for m, ev in details.items()}
    return ComponentDistribution(probs, provenance, (model, n, ratio), details)
