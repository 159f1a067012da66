"""Recovery pipelines for z = A x + B e under different support knowledge.

* Case I   -- both supports known: least squares on ``[A_X B_E]``.
* Case II  -- one support known: project out the known component, renormalize
  the columns, and run BP or OMP on the modified dictionary.
* Case III -- only ``ne`` known: exhaustive (toy-scale) search.
* Case IV  -- nothing known: BP or OMP on the concatenation ``[A B]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .dictionaries import Dictionary, coherence, concat, mutual_coherence
from .errors import DegenerateColumnError, PreconditionError, SingularSystemError
from .signals import SparseVector
from .solvers import (RANK_RTOL, SolveReport, basis_pursuit, brute_force_p0,
                      brute_force_p0_ne, omp, pinv_solve)

DEGENERATE_COLNORM = 1e-10


def _mat(D) -> np.ndarray:
    return D.entries if isinstance(D, Dictionary) else np.asarray(D, dtype=complex)


def _idx(S) -> np.ndarray:
    return np.asarray(sorted(int(i) for i in S), dtype=int)


def _canonical_rows(BE: np.ndarray):
    """Row indices if every column of ``BE`` is a distinct unit coordinate vector."""
    if BE.shape[1] == 0:
        return None
    nz = BE != 0
    if not np.all(nz.sum(axis=0) == 1):
        return None
    rows = np.argmax(nz, axis=0)
    if np.any(BE[rows, np.arange(BE.shape[1])] != 1) or np.unique(rows).size != rows.size:
        return None
    return rows


@dataclass
class Recovery:
    """Recovered pair; unpacks as ``x, e = recovery``."""

    x: SparseVector
    e: SparseVector
    info: dict = field(default_factory=dict)

    def __iter__(self):
        yield self.x
        yield self.e


def _sparse(vals: np.ndarray, n: int, idx=None) -> SparseVector:
    out = np.zeros(n, dtype=complex)
    if idx is None:
        out[:] = vals
    else:
        out[idx] = vals
    return SparseVector.from_dense(out)


# --------------------------------------------------------------------------
# Case I


def recover_case_I(A, B, z, X, E, rank_deficient: str = "raise") -> Recovery:
    """Least squares on the stacked dictionary ``[A_X B_E]``.

    ``rank_deficient="lstsq"`` returns the minimum-norm least-squares solution
    instead of raising :class:`SingularSystemError`.
    """
    Am, Bm = _mat(A), _mat(B)
    z = np.asarray(z, dtype=complex).ravel()
    xi, ei = _idx(X), _idx(E)
    Dxe = np.hstack([Am[:, xi], Bm[:, ei]])
    info = {"case": "caseI"}
    try:
        rep = pinv_solve(Dxe, z)
        s = rep.solution
    except SingularSystemError:
        if rank_deficient != "lstsq":
            raise
        s, *_ = np.linalg.lstsq(Dxe, z, rcond=None)
        info["rank_deficient"] = True
    x = _sparse(s[:xi.size], Am.shape[1], xi)
    e = _sparse(s[xi.size:], Bm.shape[1], ei)
    return Recovery(x, e, info)


# --------------------------------------------------------------------------
# Case II projection machinery


class ProjectedSystem:
    """Projection onto the complement of ``range(B_E)`` and column renormalization.

    The modified dictionary is ``R_E A Delta`` with ``R_E = I - B_E B_E^+``
    and ``Delta = diag(1 / ||R_E a_l||)``.  Internally the equivalent reduced
    system ``Q^H A Delta`` is kept, with ``Q`` an orthonormal basis of the
    complement; solvers run on it.

    With ``on_degenerate="drop"`` annihilated columns are excluded (their
    coefficients are forced to zero) and listed in :attr:`dropped`.
    """

    def __init__(self, A, B, E, on_degenerate: str = "raise"):
        Am, Bm = _mat(A), _mat(B)
        if Am.shape[0] != Bm.shape[0]:
            raise PreconditionError("A and B must have the same number of rows")
        self.known_support = tuple(int(i) for i in _idx(E))
        M = Am.shape[0]
        BE = Bm[:, list(self.known_support)]
        canon = _canonical_rows(BE)
        if canon is not None:
            # B_E is a set of distinct coordinate axes: the complement basis is
            # the remaining axes, no factorization needed
            keep_rows = np.setdiff1d(np.arange(M), canon)
            self.basis = np.eye(M)[:, keep_rows]
        elif BE.shape[1]:
            U, s, _ = np.linalg.svd(BE, full_matrices=True)
            if BE.shape[1] > M or s[-1] <= RANK_RTOL * s[0]:
                raise SingularSystemError("columns of B_E are linearly dependent")
            self.basis = U[:, BE.shape[1]:]
        else:
            self.basis = np.eye(M, dtype=complex)
        if not np.any(Am.imag) and not np.any(Bm.imag):
            self.basis = self.basis.real
        QA = self.basis.conj().T @ Am
        norms = np.linalg.norm(QA, axis=0)
        bad = np.flatnonzero(norms <= DEGENERATE_COLNORM)
        if bad.size and on_degenerate != "drop":
            raise DegenerateColumnError(bad.tolist(), "projection annihilates columns of A")
        self.dropped = tuple(bad.tolist())
        keep = np.ones(Am.shape[1], dtype=bool)
        keep[bad] = False
        self.kept = np.flatnonzero(keep)
        self.colnorms = norms
        self.normalizer_diag = np.where(keep, 1.0 / np.where(keep, norms, 1.0), 0.0)
        self.reduced = QA[:, self.kept] * self.normalizer_diag[self.kept]
        self._A = Am

    @cached_property
    def projector(self) -> np.ndarray:
        Q = self.basis
        return Q @ Q.conj().T

    @cached_property
    def modified_dict(self) -> Dictionary:
        return Dictionary(self.basis @ self.reduced, label="projected")

    def project(self, z) -> np.ndarray:
        """Coordinates of ``R_E z`` in the reduced basis."""
        return self.basis.conj().T @ np.asarray(z).ravel()

    def lift(self, xhat: np.ndarray) -> np.ndarray:
        """``x = Delta xhat`` as a full-length vector."""
        x = np.zeros(self._A.shape[1], dtype=complex)
        x[self.kept] = self.normalizer_diag[self.kept] * xhat
        return x


def build_projected_system(A, B, E, on_degenerate: str = "raise") -> ProjectedSystem:
    return ProjectedSystem(A, B, E, on_degenerate)


def _sub_solve(P: ProjectedSystem, zhat: np.ndarray, method: str, k: int | None,
               bp_options: dict | None) -> SolveReport:
    if method == "bp":
        return basis_pursuit(P.reduced, zhat, **(bp_options or {}))
    if method == "omp":
        if k is None:
            raise PreconditionError("OMP needs a predetermined iteration count")
        return omp(P.reduced, zhat, min(k, min(P.reduced.shape)))
    raise PreconditionError(f"unknown method {method!r}")


def _recover_projected(A, B, z, known, method, k, on_degenerate, bp_options,
                       check_uniqueness, case):
    """Shared body of the two Case II pipelines (roles already assigned)."""
    Am, Bm = _mat(A), _mat(B)
    z = np.asarray(z, dtype=complex).ravel()
    P = build_projected_system(A, B, known, on_degenerate)
    rep = _sub_solve(P, P.project(z), method, k, bp_options)
    xhat = rep.solution
    if xhat.size != P.kept.size:
        raise AssertionError("solver returned a solution of the wrong length")
    x = P.lift(xhat)
    ki = np.asarray(P.known_support, dtype=int)
    if ki.size:
        e_known, *_ = np.linalg.lstsq(Bm[:, ki], z - Am @ x, rcond=None)
    else:
        e_known = np.zeros(0, dtype=complex)
    info = {"case": case, "method": method, "converged": rep.converged,
            "iterations": rep.iterations, "dropped": P.dropped, "gap": rep.gap}
    if check_uniqueness:
        res = brute_force_p0(P.reduced, P.project(z), max_k=max(len(rep.support), 1))
        info["unique"] = res.unique
    return x, _sparse(e_known, Bm.shape[1], ki), info


def recover_case_II_E(A, B, z, E, method: str = "bp", nx_for_omp: int | None = None,
                      on_degenerate: str = "raise", bp_options: dict | None = None,
                      check_uniqueness: bool = False) -> Recovery:
    """Error support known: recover x from the projected measurement, then e on E."""
    x, e, info = _recover_projected(A, B, z, E, method, nx_for_omp, on_degenerate,
                                    bp_options, check_uniqueness, "caseII_E")
    return Recovery(SparseVector.from_dense(x), e, info)


def recover_case_II_X(A, B, z, X, method: str = "bp", ne_for_omp: int | None = None,
                      on_degenerate: str = "raise", bp_options: dict | None = None,
                      check_uniqueness: bool = False) -> Recovery:
    """Signal support known: recover e from the projected measurement, then x on X."""
    e, x, info = _recover_projected(B, A, z, X, method, ne_for_omp, on_degenerate,
                                    bp_options, check_uniqueness, "caseII_X")
    return Recovery(x, SparseVector.from_dense(e), info)


# --------------------------------------------------------------------------
# Cases III and IV


def recover_case_III(A, B, z, ne: int, max_nx: int, guard: int | None = None) -> Recovery:
    """Exhaustive (P0, ne) search; only feasible at toy scale."""
    Am, Bm = _mat(A), _mat(B)
    z = np.asarray(z, dtype=complex).ravel()
    kwargs = {} if guard is None else {"guard": guard}
    res = brute_force_p0_ne(Am, Bm, z, ne, max_nx, **kwargs)
    Ei = np.asarray(res.error_support, dtype=int)
    r = z - Am @ res.solution_x
    eE, *_ = np.linalg.lstsq(Bm[:, Ei], r, rcond=None) if Ei.size else (np.zeros(0),)
    e = np.zeros(Bm.shape[1], dtype=complex)
    e[Ei] = eE
    e[np.abs(e) <= 1e-12 * max(1.0, float(np.abs(e).max(initial=0)))] = 0
    info = {"case": "caseIII", "unique": res.unique, "sparsity": res.sparsity}
    return Recovery(SparseVector.from_dense(res.solution_x), SparseVector.from_dense(e), info)


def recover_case_IV(A, B, z, method: str = "bp", k_for_omp: int | None = None,
                    bp_options: dict | None = None) -> Recovery:
    """BP or OMP on ``[A B]``; the stacked solution is split at ``Na``."""
    Ad = A if isinstance(A, Dictionary) else Dictionary(A)
    Bd = B if isinstance(B, Dictionary) else Dictionary(B)
    D = concat(Ad, Bd)
    if method == "bp":
        rep = basis_pursuit(D, z, **(bp_options or {}))
    elif method == "omp":
        if k_for_omp is None:
            raise PreconditionError("OMP needs k = nx + ne iterations")
        rep = omp(D, z, min(k_for_omp, min(D.shape)))
    else:
        raise PreconditionError(f"unknown method {method!r}")
    w = rep.solution
    info = {"case": "caseIV", "method": method, "converged": rep.converged,
            "iterations": rep.iterations, "gap": rep.gap}
    return Recovery(SparseVector.from_dense(w[:Ad.cols]), SparseVector.from_dense(w[Ad.cols:]), info)


# --------------------------------------------------------------------------
# bounds from the Case II analysis


@dataclass(frozen=True)
class AppendixBounds:
    lambda_min: float
    gersgorin_lb: float
    min_colnorm_sq: float
    colnorm_lb: float
    eff_coherence: float
    eff_coherence_ub: float

    @property
    def gersgorin_holds(self) -> bool:
        return self.lambda_min >= self.gersgorin_lb - 1e-10

    @property
    def colnorm_holds(self) -> bool:
        return self.min_colnorm_sq >= self.colnorm_lb - 1e-10

    @property
    def coherence_holds(self) -> bool:
        return self.eff_coherence <= self.eff_coherence_ub + 1e-10

    @property
    def all_hold(self) -> bool:
        return self.gersgorin_holds and self.colnorm_holds and self.coherence_holds


def check_appendix_bounds(A, B, E) -> AppendixBounds:
    """Computed quantities of the projected system next to their analytical bounds.

    * smallest eigenvalue of ``B_E^H B_E`` vs ``[1 - mu_b (ne-1)]^+``
    * ``min ||R_E a_l||^2`` vs ``1 - ne mu_m^2 / [1 - mu_b (ne-1)]^+``
    * coherence of ``R_E A Delta`` vs ``(mu_a C_b + ne mu_m^2) / (C_b - ne mu_m^2)``

    A bound whose denominator is nonpositive is reported as vacuous
    (``-inf`` for lower bounds, ``+inf`` for upper bounds).
    """
    Am, Bm = _mat(A), _mat(B)
    Ei = _idx(E)
    ne = Ei.size
    mu_a, mu_b, mu_m = coherence(Am), coherence(Bm), mutual_coherence(Am, Bm)
    P = build_projected_system(Am, Bm, Ei)
    BE = Bm[:, Ei]
    lam = float(np.linalg.eigvalsh(BE.conj().T @ BE)[0]) if ne else 1.0
    cb = max(1.0 - mu_b * (ne - 1), 0.0)
    colnorm_lb = 1.0 - ne * mu_m ** 2 / cb if cb > 0 else -np.inf
    denom = cb - ne * mu_m ** 2
    eff_ub = (mu_a * cb + ne * mu_m ** 2) / denom if denom > 0 else np.inf
    return AppendixBounds(
        lambda_min=lam,
        gersgorin_lb=cb,
        min_colnorm_sq=float(np.min(P.colnorms) ** 2),
        colnorm_lb=colnorm_lb,
        eff_coherence=coherence(P.reduced),
        eff_coherence_ub=eff_ub,
    )
