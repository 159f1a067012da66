"""Coherence-based recovery thresholds as predicates and contour generators.

Every threshold is a strict inequality ``lhs < rhs``.  Points within a
relative ``1e-12`` of the boundary are treated as lying on it (and so are
not satisfied); this keeps boundary points with non-representable coherence
values, e.g. ``mu = 0.1``, classified the same way exact arithmetic would.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Iterable

from .dictionaries import CoherenceProfile
from .errors import PreconditionError, UnsupportedParameterError
from .uncertainty import f_bound

BOUNDARY_RTOL = 1e-12
DEFAULT_NX_MAX = 4096

CASE_IDS = ("classical", "naive_concat", "caseI", "caseII_E", "caseII_X",
            "caseIII", "caseIV_P0", "caseIV_BP")


@dataclass(frozen=True)
class ThresholdVerdict:
    case_id: str
    satisfied: bool
    margin: float
    lhs: float = 0.0
    rhs: float = math.inf
    swapped: bool = False


def _verdict(case_id: str, lhs: float, rhs: float, swapped: bool = False) -> ThresholdVerdict:
    if math.isinf(rhs):
        return ThresholdVerdict(case_id, True, -math.inf, lhs, rhs, swapped)
    margin = lhs - rhs
    if abs(margin) <= BOUNDARY_RTOL * max(1.0, abs(rhs)):
        margin = 0.0
    return ThresholdVerdict(case_id, margin < 0, margin, lhs, rhs, swapped)


def _check_counts(*counts: int) -> None:
    for c in counts:
        if c < 0:
            raise PreconditionError(f"sparsity levels must be nonnegative, got {c}")


def classical(nx: int, mu_a: float) -> ThresholdVerdict:
    """``nx < (1 + 1/mu_a) / 2``."""
    _check_counts(nx)
    rhs = math.inf if mu_a == 0 else 0.5 * (1.0 + 1.0 / mu_a)
    return _verdict("classical", float(nx), rhs)


def naive_concat(nx: int, ne: int, mu_d: float) -> ThresholdVerdict:
    """Classical threshold applied to ``[A B]`` with ``nw = nx + ne``."""
    _check_counts(nx, ne)
    rhs = math.inf if mu_d == 0 else 0.5 * (1.0 + 1.0 / mu_d)
    return _verdict("naive_concat", float(nx + ne), rhs)


def case_I(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Both supports known: ``nx ne < f(nx, ne)``."""
    _check_counts(nx, ne)
    return _verdict("caseI", float(nx * ne), f_bound(nx, ne, prof))


def case_II_E_known(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Error support known: ``2 nx ne < f(2 nx, ne)``."""
    _check_counts(nx, ne)
    return _verdict("caseII_E", float(2 * nx * ne), f_bound(2 * nx, ne, prof))


def case_II_X_known(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Signal support known: ``2 nx ne < f(nx, 2 ne)``."""
    _check_counts(nx, ne)
    return _verdict("caseII_X", float(2 * nx * ne), f_bound(nx, 2 * ne, prof))


def case_III(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Only ``ne`` known: ``4 nx ne < f(2 nx, 2 ne)``."""
    _check_counts(nx, ne)
    return _verdict("caseIII", float(4 * nx * ne), f_bound(2 * nx, 2 * ne, prof))


def _ordered(prof: CoherenceProfile) -> tuple[float, float, float, bool]:
    if prof.mu_a > prof.mu_b:
        return prof.mu_b, prof.mu_a, prof.mu_d, True
    return prof.mu_a, prof.mu_b, prof.mu_d, False


def caseIV_f(x: float, mu_a: float, mu_b: float, mu_d: float) -> float:
    """Auxiliary function of the (P0) threshold on ``[A B]`` (``mu_a <= mu_b``)."""
    num = (1 + mu_a) * (1 + mu_b) - x * mu_b * (1 + mu_a)
    den = x * (mu_d ** 2 - mu_a * mu_b) + mu_a * (1 + mu_b)
    return num / den


def case_IV_P0_threshold(prof: CoherenceProfile) -> tuple[float, bool]:
    """Right-hand side ``(f(x*) + x*) / 2`` and whether (mu_a, mu_b) were swapped."""
    mu_a, mu_b, mu_d, swapped = _ordered(prof)
    if mu_d <= 0:
        raise UnsupportedParameterError("dictionary coherence must be positive")
    x_bord = (1 + mu_b) / (mu_b + mu_d ** 2)
    if math.isclose(mu_a, mu_d, rel_tol=1e-12, abs_tol=0) and math.isclose(mu_b, mu_d, rel_tol=1e-12, abs_tol=0):
        x_stat = 1.0 / mu_d
    else:
        den = mu_d ** 2 - mu_a * mu_b
        if abs(den) <= 1e-15:
            raise UnsupportedParameterError(
                f"mu_d^2 == mu_a mu_b with mu_a != mu_b (mu_a={mu_a}, mu_b={mu_b}, mu_d={mu_d})")
        x_stat = (mu_d * math.sqrt((1 + mu_a) * (1 + mu_b)) - mu_a - mu_a * mu_b) / den
    x_star = min(x_bord, x_stat)
    return 0.5 * (caseIV_f(x_star, mu_a, mu_b, mu_d) + x_star), swapped


def case_IV_P0(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Nothing known, uniqueness of (P0) on ``[A B]``."""
    _check_counts(nx, ne)
    rhs, swapped = case_IV_P0_threshold(prof)
    return _verdict("caseIV_P0", float(nx + ne), rhs, swapped)


def case_IV_BP_threshold(prof: CoherenceProfile) -> tuple[float, bool, int]:
    """Right-hand side of the BP/OMP threshold on ``[A B]``.

    Returns ``(rhs, swapped, branch)`` with ``branch`` 1 or 2.
    """
    _, mu_b, mu_d, swapped = _ordered(prof)
    if mu_d <= 0:
        raise UnsupportedParameterError("dictionary coherence must be positive")
    alpha = 1 + mu_b
    beta = 2 * math.sqrt(2) * math.sqrt(mu_d * (mu_b + mu_d))
    if mu_b < mu_d:
        den = 2 * (mu_d ** 2 - mu_b ** 2)
        tau = (alpha * math.sqrt(2 * mu_d * (mu_b + 3 * mu_d + beta))
               - 2 * mu_d - 2 * mu_b * (alpha + mu_d)) / den
        if tau > 1:
            return alpha * (beta - (mu_d + 3 * mu_b)) / den, swapped, 1
    rhs = (1 + 2 * mu_d ** 2 + 3 * mu_b - mu_d * alpha) / (2 * (mu_d ** 2 + mu_b))
    return rhs, swapped, 2


def case_IV_BP(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    """Nothing known, BP and OMP on ``[A B]``."""
    _check_counts(nx, ne)
    rhs, swapped, _ = case_IV_BP_threshold(prof)
    return _verdict("caseIV_BP", float(nx + ne), rhs, swapped)


def _classical_pair(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    return classical(nx, prof.mu_a)


def _naive_pair(nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    return naive_concat(nx, ne, prof.mu_d)


PREDICATES: dict[str, Callable[[int, int, CoherenceProfile], ThresholdVerdict]] = {
    "classical": _classical_pair,
    "naive_concat": _naive_pair,
    "caseI": case_I,
    "caseII_E": case_II_E_known,
    "caseII_X": case_II_X_known,
    "caseIII": case_III,
    "caseIV_P0": case_IV_P0,
    "caseIV_BP": case_IV_BP,
}


def verdict(case_id: str, nx: int, ne: int, prof: CoherenceProfile) -> ThresholdVerdict:
    try:
        pred = PREDICATES[case_id]
    except KeyError:
        raise PreconditionError(f"unknown case {case_id!r}; expected one of {CASE_IDS}") from None
    return pred(nx, ne, prof)


def contour(case_id: str, prof: CoherenceProfile, ne_range: Iterable[int],
            nx_max: int = DEFAULT_NX_MAX) -> list[tuple[int, int]]:
    """Largest ``nx`` with a satisfied verdict for each ``ne`` (0 if none).

    Every threshold is monotone in ``nx``, so the scan stops at the first
    violation.  ``nx_max`` caps vacuous (unbounded) thresholds.
    """
    out = []
    for ne in ne_range:
        best = 0
        for nx in range(0, nx_max + 1):
            if not verdict(case_id, nx, ne, prof).satisfied:
                break
            best = nx
        out.append((int(ne), best))
    return out


def write_contour_csv(path_or_file, case_id: str, prof: CoherenceProfile,
                      rows: list[tuple[int, int]]) -> None:
    header = ["case_id", "mu_a", "mu_b", "mu_m", "mu_d", "ne", "max_nx"]

    def _emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for ne, nx in rows:
            w.writerow([case_id, repr(prof.mu_a), repr(prof.mu_b), repr(prof.mu_m),
                        repr(prof.mu_d), ne, nx])

    if hasattr(path_or_file, "write"):
        _emit(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="ascii") as fh:
            _emit(fh)
