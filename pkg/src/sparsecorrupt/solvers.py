"""Least squares, OMP, basis pursuit and exhaustive (P0) search.

All routines accept a :class:`~sparsecorrupt.dictionaries.Dictionary` or a
plain matrix, and work in real arithmetic when both the matrix and the
measurement are real.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (GuardExceededError, InfeasibleError, NotFoundError,
                     PreconditionError, SingularSystemError)

log = logging.getLogger(__name__)

RANK_RTOL = 1e-10
OMP_TIE_TOL = 1e-12
P0_RESIDUAL_RTOL = 1e-9
P0_GUARD = 10 ** 6


@dataclass
class SolveReport:
    solution: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    support: tuple[int, ...] = ()
    gap: float = 0.0
    history: list[float] = field(default_factory=list, repr=False)


def _mat(D) -> np.ndarray:
    return D.entries if hasattr(D, "entries") else np.asarray(D)


def _common_dtype(D: np.ndarray, z: np.ndarray):
    if np.iscomplexobj(D) and np.any(D.imag) or np.iscomplexobj(z) and np.any(z.imag):
        return complex
    return float


def _prepare(D, z):
    D = _mat(D)
    z = np.asarray(z).ravel()
    if D.shape[0] != z.size:
        raise PreconditionError(f"measurement length {z.size} != dictionary rows {D.shape[0]}")
    dt = _common_dtype(D, z)
    if dt is float:
        return np.ascontiguousarray(D.real, dtype=float), z.real.astype(float), dt
    return D.astype(complex), z.astype(complex), dt


def _as_out(x: np.ndarray) -> np.ndarray:
    return x.astype(complex)


# --------------------------------------------------------------------------
# least squares


def numerical_rank(M: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def pinv_solve(Dsub, z, rtol: float = RANK_RTOL) -> SolveReport:
    """Least-squares solution ``Dsub^+ z`` for full-column-rank ``Dsub``.

    Raises :class:`SingularSystemError` if the smallest singular value is at
    most ``rtol`` times the largest.
    """
    D, zz, _ = _prepare(Dsub, z)
    n = D.shape[1]
    if n == 0:
        return SolveReport(np.zeros(0, dtype=complex), float(np.linalg.norm(zz)), 0, True)
    U, s, Vh = np.linalg.svd(D, full_matrices=False)
    if n > D.shape[0] or s[-1] <= rtol * s[0]:
        smin = 0.0 if n > D.shape[0] else s[-1]
        raise SingularSystemError(
            f"matrix of shape {D.shape} is rank deficient (sigma_min/sigma_max = {smin / s[0]:.3g})")
    sol = Vh.conj().T @ ((U.conj().T @ zz) / s)
    res = float(np.linalg.norm(D @ sol - zz))
    return SolveReport(_as_out(sol), res, 1, True, tuple(range(n)))


# --------------------------------------------------------------------------
# orthogonal matching pursuit


def omp(D, z, k: int, tol: float = 1e-12) -> SolveReport:
    """Orthogonal matching pursuit with ``k`` iterations.

    Stops early once ``||r|| <= tol ||z||``.  Ties in correlation magnitude
    (within 1e-12) go to the lowest column index.
    """
    A, zz, dt = _prepare(D, z)
    M, N = A.shape
    if k < 0 or k > min(M, N):
        raise PreconditionError(f"iteration count {k} outside [0, min(M, N)={min(M, N)}]")
    znorm = float(np.linalg.norm(zz))
    r = zz.copy()
    support: list[int] = []
    coef = np.zeros(0, dtype=dt)
    history = [znorm]
    stop = tol * znorm
    for _ in range(k):
        if np.linalg.norm(r) <= stop or znorm == 0.0:
            break
        corr = np.abs(A.conj().T @ r)
        corr[support] = -np.inf
        best = corr.max()
        j = int(np.flatnonzero(corr >= best - OMP_TIE_TOL)[0])
        support.append(j)
        sub = A[:, support]
        coef, *_ = np.linalg.lstsq(sub, zz, rcond=None)
        r = zz - sub @ coef
        history.append(float(np.linalg.norm(r)))
    x = np.zeros(N, dtype=dt)
    if support:
        x[support] = coef
    res = float(np.linalg.norm(r))
    return SolveReport(_as_out(x), res, len(support), res <= max(stop, 1e-9 * max(1.0, znorm)),
                       tuple(sorted(support)), 0.0, history)


# --------------------------------------------------------------------------
# basis pursuit


class _AffineProjector:
    """Orthogonal projection onto ``{x : D x = z}``."""

    def __init__(self, D: np.ndarray, z: np.ndarray, feas_tol: float):
        self.D = D
        self.z = z
        M, N = D.shape
        self.chol = None
        if M <= N and min(M, N) > 256:
            G = D @ D.conj().T
            try:
                c = scipy.linalg.cho_factor(G, lower=True, check_finite=False)
                d = np.abs(np.diag(c[0])) ** 2
                if d.min() > 1e-12 * d.max():
                    self.chol = c
            except np.linalg.LinAlgError:
                pass
        if self.chol is None:
            U, s, Vh = np.linalg.svd(D, full_matrices=False)
            r = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
            self.U, self.s, self.V = U[:, :r], s[:r], Vh[:r].conj().T
        x0 = self.least_norm()
        resid = float(np.linalg.norm(D @ x0 - z))
        if resid > feas_tol * max(1.0, float(np.linalg.norm(z))):
            raise InfeasibleError(f"measurement not in the range of the dictionary (residual {resid:.3g})")
        self.x0 = x0

    def _solve_gram(self, v: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(self.chol, v, check_finite=False)

    def least_norm(self) -> np.ndarray:
        if self.chol is not None:
            return self.D.conj().T @ self._solve_gram(self.z)
        return self.V @ ((self.U.conj().T @ self.z) / self.s)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.chol is not None:
            return x - self.D.conj().T @ self._solve_gram(self.D @ x - self.z)
        return x - self.V @ (self.V.conj().T @ x - (self.U.conj().T @ self.z) / self.s)

    def range_coeffs(self, v: np.ndarray) -> np.ndarray:
        """Least-squares ``w`` with ``D^H w ~= v``."""
        if self.chol is not None:
            return self._solve_gram(self.D @ v)
        return self.U @ ((self.V.conj().T @ v) / self.s)


def _soft(v: np.ndarray, t: float) -> np.ndarray:
    mag = np.abs(v)
    scale = np.maximum(0.0, 1.0 - t / np.maximum(mag, 1e-300))
    return v * scale


def _sign(v: np.ndarray) -> np.ndarray:
    mag = np.abs(v)
    return np.where(mag > 0, v / np.maximum(mag, 1e-300), 0)


def _dual_value(D, z, w) -> float:
    """Dual objective of BP for a (rescaled-to-feasible) multiplier ``w``."""
    scale = float(np.abs(D.conj().T @ w).max(initial=0.0))
    if not np.isfinite(scale):
        return -np.inf
    val = float(np.real(np.vdot(w, z)))
    return val / max(scale, 1.0)


def basis_pursuit(D, z, feas_tol: float = 1e-9, gap_tol: float = 1e-7,
                  max_iter: int = 20000, check_every: int | None = None, rho: float | None = None) -> SolveReport:
    """Minimize ``||x||_1`` subject to ``D x = z`` (complex moduli for complex data).

    ADMM on the splitting ``x = y`` (affine projection / soft threshold), with
    periodic support polishing.  Convergence is declared only once a
    feasible primal point and a dual-feasible multiplier certify a relative
    duality gap of at most ``gap_tol``.
    """
    A, zz, dt = _prepare(D, z)
    M, N = A.shape
    znorm = float(np.linalg.norm(zz))
    if znorm == 0.0:
        return SolveReport(np.zeros(N, dtype=complex), 0.0, 0, True, (), 0.0)
    proj = _AffineProjector(A, zz, feas_tol)
    if check_every is None:
        check_every = 25 if N <= 1024 else 100
    max_polish = M if N <= 1024 else M // 2
    feas_lim = feas_tol * max(1.0, znorm)

    x = proj.x0.copy()
    scale = float(np.abs(x).max()) or 1.0
    t = 0.1 * scale if rho is None else 1.0 / rho
    y = _soft(x, t)
    u = x - y

    best_x, best_l1, best_dual, best_w = proj.x0, float(np.abs(proj.x0).sum()), -np.inf, None
    history: list[float] = []
    it = 0
    converged = False

    def consider_primal(cand):
        nonlocal best_x, best_l1
        if float(np.linalg.norm(A @ cand - zz)) > feas_lim:
            return
        l1 = float(np.abs(cand).sum())
        if l1 < best_l1:
            best_x, best_l1 = cand, l1

    def consider_dual(w):
        nonlocal best_dual, best_w
        if w is None:
            return
        val = _dual_value(A, zz, w)
        if val > best_dual:
            best_dual, best_w = val, w

    def polish(v):
        mag = np.abs(v)
        if mag.max() == 0:
            return
        for thr in (1e-6, 1e-9, 1e-3):
            supp = np.flatnonzero(mag > thr * mag.max())
            if supp.size == 0 or supp.size > max_polish:
                continue
            sub = A[:, supp]
            coef, *_ = np.linalg.lstsq(sub, zz, rcond=None)
            cand = np.zeros(N, dtype=dt)
            cand[supp] = coef
            consider_primal(cand)
            sgn = _sign(coef)
            # minimal-norm multiplier matching the signs on the support
            w, *_ = np.linalg.lstsq(sub.conj().T, sgn, rcond=None)
            consider_dual(w)

    def gap() -> float:
        return (best_l1 - best_dual) / max(best_l1, 1e-300)

    for it in range(1, max_iter + 1):
        x = proj(y - u)
        y_old = y
        y = _soft(x + u, t)
        u = u + x - y
        if it % check_every == 0 or it == max_iter:
            r_prim = float(np.linalg.norm(x - y))
            r_dual = float(np.linalg.norm(y - y_old)) / t
            polish(y)
            consider_primal(proj(y))
            # the scaled dual variable u / t estimates the l1 subgradient
            consider_dual(proj.range_coeffs(u / t))
            history.append(gap())
            if gap() <= gap_tol:
                converged = True
                break
            # residual balancing on the threshold t = 1/rho; the scaled dual
            # u = lambda * t is rescaled along with t
            if r_prim > 10 * r_dual:
                t /= 2.0
                u /= 2.0
            elif r_dual > 10 * r_prim:
                t *= 2.0
                u *= 2.0
    res = float(np.linalg.norm(A @ best_x - zz))
    g = max(gap(), 0.0)
    supp = tuple(np.flatnonzero(np.abs(best_x) > 0).tolist())
    if not converged:
        log.debug("basis_pursuit: gap %.3g after %d iterations", g, it)
    return SolveReport(_as_out(best_x), res, it, converged and res <= feas_lim, supp, g, history)


def l1_norm(x) -> float:
    return float(np.abs(np.asarray(x)).sum())


# --------------------------------------------------------------------------
# exhaustive search


@dataclass
class P0Result:
    solution: np.ndarray
    sparsity: int
    unique: bool
    alternatives: list[np.ndarray] = field(default_factory=list, repr=False)


def _n_supports(n: int, max_k: int) -> int:
    return sum(math.comb(n, k) for k in range(0, min(n, max_k) + 1))


def _same(u: np.ndarray, v: np.ndarray, scale: float) -> bool:
    return bool(np.linalg.norm(u - v) <= 1e-8 * max(1.0, scale))


def _exact_on(sub: np.ndarray, zz: np.ndarray, tol: float):
    if sub.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(zz))
    coef, *_ = np.linalg.lstsq(sub, zz, rcond=None)
    return coef, float(np.linalg.norm(sub @ coef - zz))


def brute_force_p0(D, z, max_k: int, guard: int = P0_GUARD) -> P0Result:
    """Sparsest exact representation by exhaustive search over supports.

    Supports of size 0..max_k are tried in lexicographic order; all
    representations at the first feasible size are collected to decide
    uniqueness.
    """
    A, zz, dt = _prepare(D, z)
    N = A.shape[1]
    if _n_supports(N, max_k) > guard:
        raise GuardExceededError(f"{_n_supports(N, max_k)} supports exceed guard {guard}")
    znorm = float(np.linalg.norm(zz))
    tol = P0_RESIDUAL_RTOL * znorm
    if znorm == 0.0:
        return P0Result(np.zeros(N, dtype=complex), 0, True)
    for k in range(1, min(N, max_k) + 1):
        found: list[np.ndarray] = []
        for S in itertools.combinations(range(N), k):
            coef, res = _exact_on(A[:, S], zz, tol)
            if res <= tol:
                x = np.zeros(N, dtype=dt)
                x[list(S)] = coef
                if not any(_same(x, f, znorm) for f in found):
                    found.append(x)
        if found:
            return P0Result(_as_out(found[0]), k, len(found) == 1, [_as_out(f) for f in found])
    raise NotFoundError(f"no exact representation with at most {max_k} columns")


def _complement_projector(Bsub: np.ndarray) -> np.ndarray:
    """Projector onto the orthogonal complement of ``range(Bsub)``."""
    M = Bsub.shape[0]
    if Bsub.shape[1] == 0:
        return np.eye(M, dtype=Bsub.dtype)
    U, s, _ = np.linalg.svd(Bsub, full_matrices=False)
    r = int(np.sum(s > RANK_RTOL * s[0])) if s[0] > 0 else 0
    Q = U[:, :r]
    return np.eye(M, dtype=Bsub.dtype) - Q @ Q.conj().T


@dataclass
class P0NeResult:
    solution_x: np.ndarray
    sparsity: int
    unique: bool
    error_support: tuple[int, ...]
    alternatives: list[np.ndarray] = field(default_factory=list, repr=False)


def brute_force_p0_ne(A, B, z, ne: int, max_nx: int, guard: int = P0_GUARD) -> P0NeResult:
    """Sparsest ``x`` with ``A x`` in ``z + range(B_E')`` for some ``|E'| <= ne``.

    Ranges are nested, so only error supports of size ``min(ne, Nb)`` are
    enumerated.
    """
    Am = _mat(A)
    Bm = _mat(B)
    if Am.shape[0] != Bm.shape[0]:
        raise PreconditionError("A and B must have the same number of rows")
    Na, Nb = Am.shape[1], Bm.shape[1]
    ne_eff = min(ne, Nb)
    work = math.comb(Nb, ne_eff) * _n_supports(Na, max_nx)
    if work > guard:
        raise GuardExceededError(f"{work} subproblems exceed guard {guard}")
    zz = np.asarray(z).ravel()
    dt = _common_dtype(np.hstack([Am, Bm]), zz)
    Am = Am.real if dt is float else Am.astype(complex)
    Bm = Bm.real if dt is float else Bm.astype(complex)
    zz = zz.real if dt is float else zz.astype(complex)
    znorm = float(np.linalg.norm(zz))

    projected = []
    for E in itertools.combinations(range(Nb), ne_eff):
        R = _complement_projector(Bm[:, list(E)])
        projected.append((E, R @ Am, R @ zz))

    for k in range(0, min(Na, max_nx) + 1):
        found: list[tuple[np.ndarray, tuple[int, ...]]] = []
        for E, RA, Rz in projected:
            tol = P0_RESIDUAL_RTOL * max(znorm, 1e-300)
            if k == 0:
                if np.linalg.norm(Rz) <= tol:
                    x = np.zeros(Na, dtype=dt)
                    if not any(_same(x, f, znorm) for f, _ in found):
                        found.append((x, E))
                continue
            for S in itertools.combinations(range(Na), k):
                coef, res = _exact_on(RA[:, S], Rz, tol)
                if res <= tol:
                    x = np.zeros(Na, dtype=dt)
                    x[list(S)] = coef
                    if not any(_same(x, f, znorm) for f, _ in found):
                        found.append((x, E))
        if found:
            x, E = found[0]
            return P0NeResult(_as_out(x), k, len(found) == 1, tuple(E),
                              [_as_out(f) for f, _ in found])
    raise NotFoundError(f"no admissible x with at most {max_nx} nonzeros")
