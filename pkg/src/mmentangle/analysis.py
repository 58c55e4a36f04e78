"""Estimates, intervals and tests on coincidence tallies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

from scipy import stats

from .errors import DomainError, EmptyTallyError
from .montecarlo import Tally

Z95 = NormalDist().inv_cdf(0.975)
DEFAULT_SIGMA = 5.0


@dataclass(frozen=True)
class ProportionEstimate:
    p_hat: float
    n: int
    ci_low: float
    ci_high: float

    @property
    def stderr(self) -> float:
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.n)


@dataclass(frozen=True)
class ShiftTest:
    p_before: ProportionEstimate
    p_after: ProportionEstimate
    z: float
    threshold: float
    significant: bool


@dataclass(frozen=True)
class ChshResult:
    e11: float
    e12: float
    e21: float
    e22: float
    s_value: float
    s_stderr: float
    subtract: str = "e22"


def wilson_interval(k: int, n: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for ``k`` successes in ``n`` trials."""
    if n <= 0:
        raise EmptyTallyError("Wilson interval needs n > 0")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom
    # rounding can push the bounds a hair past p at k = 0 or k = n
    return max(0.0, min(center - half, p)), min(1.0, max(center + half, p))


def estimate_proportion(k: int, n: int, z: float = Z95) -> ProportionEstimate:
    lo, hi = wilson_interval(k, n, z)
    return ProportionEstimate(k / n, n, lo, hi)


def estimate_p_same(t: Tally, z: float = Z95) -> ProportionEstimate:
    if t.n_postselected == 0:
        raise EmptyTallyError("tally has no post-selected events")
    return estimate_proportion(t.n_same, t.n_postselected, z)


def two_proportion_z(before: Tally, after: Tally, threshold: float = DEFAULT_SIGMA) -> ShiftTest:
    """Pooled two-proportion z test; positive z means ``P(a=b)`` dropped."""
    pb, pa = estimate_p_same(before), estimate_p_same(after)
    n1, n2 = pb.n, pa.n
    pooled = (before.n_same + after.n_same) / (n1 + n2)
    se = math.sqrt(pooled * (1 - pooled) * (1 / n1 + 1 / n2))
    diff = pb.p_hat - pa.p_hat
    z = diff / se if se > 0 else 0.0
    return ShiftTest(pb, pa, z, threshold, abs(z) >= threshold)


def required_n_per_arm(p1: float, p2: float, sigma: float = DEFAULT_SIGMA) -> int:
    """Smallest n with ``|p1 - p2| / sqrt((p1 q1 + p2 q2) / n) >= sigma``.

    The comparison is done in exact rational arithmetic on the squared
    criterion, so boundary cases like (0.5, 0.25, 5) -> 175 are not at the
    mercy of rounding in the square root.
    """
    for name, p in (("p1", p1), ("p2", p2)):
        if not 0.0 < p < 1.0:
            raise DomainError(f"{name} must lie strictly between 0 and 1, got {p}")
    if p1 == p2:
        raise DomainError("p1 and p2 must differ")
    if not sigma >= 0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")
    P1, P2, S = Fraction(p1), Fraction(p2), Fraction(sigma)
    var = P1 * (1 - P1) + P2 * (1 - P2)
    d2 = (P1 - P2) ** 2
    n = max(1, math.ceil(S * S * var / d2))
    while n * d2 < S * S * var:
        n += 1
    while n > 1 and (n - 1) * d2 >= S * S * var:
        n -= 1
    return n


def correlator(t: Tally) -> tuple[float, float]:
    """(E, standard error) with ``E = (n_same - n_diff) / n_postselected``."""
    if t.n_postselected == 0:
        raise EmptyTallyError("tally has no post-selected events")
    n = t.n_postselected
    e = (t.n_same - t.n_diff) / n
    return e, math.sqrt(max(0.0, 1.0 - e * e) / n)


_CHSH_TERMS = ("e11", "e12", "e21", "e22")


def chsh(tallies, subtract: str = "e22") -> ChshResult:
    """CHSH value from tallies ordered (a1,b1), (a1,b2), (a2,b1), (a2,b2).

    ``subtract`` names the correlator entering with a minus sign.
    """
    if subtract not in _CHSH_TERMS:
        raise ValueError(f"subtract must be one of {_CHSH_TERMS}, got {subtract!r}")
    tallies = list(tallies)
    if len(tallies) != 4:
        raise ValueError("CHSH needs exactly four tallies")
    pairs = [correlator(t) for t in tallies]
    values = dict(zip(_CHSH_TERMS, (e for e, _ in pairs)))
    s = sum(-v if k == subtract else v for k, v in values.items())
    se = math.sqrt(sum(err * err for _, err in pairs))
    return ChshResult(s_value=abs(s), s_stderr=se, subtract=subtract, **values)


@dataclass(frozen=True)
class FlatnessTest:
    chi2: float
    dof: int
    p_value: float
    sigma_equivalent: float
    flat: bool


def flatness_test(tallies, threshold: float = DEFAULT_SIGMA) -> FlatnessTest:
    """Chi-square test that all tallies share one ``P(a=b)``.

    ``flat`` is False only when the deviation is at least ``threshold``
    one-sided Gaussian sigmas.
    """
    tallies = [t for t in tallies]
    if any(t.n_postselected == 0 for t in tallies):
        raise EmptyTallyError("flatness test needs non-empty tallies")
    n_tot = sum(t.n_postselected for t in tallies)
    p = sum(t.n_same for t in tallies) / n_tot
    if p in (0.0, 1.0):
        return FlatnessTest(0.0, len(tallies) - 1, 1.0, 0.0, True)
    chi2 = sum((t.n_same - t.n_postselected * p) ** 2 / (t.n_postselected * p * (1 - p)) for t in tallies)
    dof = len(tallies) - 1
    p_value = float(stats.chi2.sf(chi2, dof))
    sigma_eq = float(stats.norm.isf(p_value)) if p_value > 0 else math.inf
    return FlatnessTest(chi2, dof, p_value, sigma_eq, sigma_eq < threshold)
