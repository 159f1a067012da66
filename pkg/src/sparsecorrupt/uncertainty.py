"""Uncertainty relation for pairs of general dictionaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dictionaries import CoherenceProfile
from .errors import PreconditionError, UnsupportedParameterError
from .signals import SparseVector, concentration

EQUALITY_RTOL = 1e-9


def _pos(v: float) -> float:
    return v if v > 0.0 else 0.0


def f_bound(u: float, v: float, prof: CoherenceProfile) -> float:
    """``[1 - mu_a (u-1)]^+ [1 - mu_b (v-1)]^+ / mu_m^2``."""
    if prof.mu_m <= 0.0:
        raise UnsupportedParameterError("f_bound requires mu_m > 0")
    return _pos(1.0 - prof.mu_a * (u - 1)) * _pos(1.0 - prof.mu_b * (v - 1)) / prof.mu_m ** 2


@dataclass(frozen=True)
class UncertaintyCheck:
    lhs: float
    rhs: float
    holds: bool
    eps_P: float
    eps_Q: float

    @property
    def tight(self) -> bool:
        """Whether the relation holds with equality (relative 1e-9)."""
        return abs(self.lhs - self.rhs) <= EQUALITY_RTOL * max(abs(self.rhs), 1e-300)


def _eps(vec, S) -> float:
    vals = np.asarray(vec.values if isinstance(vec, SparseVector) else vec)
    if not np.any(vals):
        # the zero vector is trivially concentrated anywhere
        return 0.0
    return concentration(vals, S)


def check_uncertainty(p, q, P, Q, prof: CoherenceProfile) -> UncertaintyCheck:
    """Evaluate ``|P||Q| >= rhs`` for epsilon-concentrated ``p`` and ``q``.

    Does not verify ``A p == B q``; see :func:`verify_common_signal`.
    One of ``p``, ``q`` may be zero, not both.
    """
    pv = np.asarray(p.values if isinstance(p, SparseVector) else p)
    qv = np.asarray(q.values if isinstance(q, SparseVector) else q)
    if not np.any(pv) and not np.any(qv):
        raise PreconditionError("p and q are both zero")
    if prof.mu_m <= 0.0:
        raise UnsupportedParameterError("the uncertainty relation requires mu_m > 0")
    P, Q = set(P), set(Q)
    eps_p, eps_q = _eps(pv, P), _eps(qv, Q)
    lhs = float(len(P) * len(Q))
    rhs = (_pos((1 + prof.mu_a) * (1 - eps_p) - len(P) * prof.mu_a)
           * _pos((1 + prof.mu_b) * (1 - eps_q) - len(Q) * prof.mu_b)) / prof.mu_m ** 2
    holds = lhs >= rhs - EQUALITY_RTOL * max(1.0, abs(rhs))
    return UncertaintyCheck(lhs, rhs, holds, eps_p, eps_q)


def verify_common_signal(A, p, B, q, tol: float = 1e-10) -> bool:
    """``||A p - B q||_2 <= tol * max(||A p||_2, 1)``."""
    a = A.entries if hasattr(A, "entries") else np.asarray(A)
    b = B.entries if hasattr(B, "entries") else np.asarray(B)
    ap = a @ np.asarray(p.values if isinstance(p, SparseVector) else p)
    bq = b @ np.asarray(q.values if isinstance(q, SparseVector) else q)
    return bool(np.linalg.norm(ap - bq) <= tol * max(np.linalg.norm(ap), 1.0))
