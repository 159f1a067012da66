"""Dictionaries (unit-norm column frames) and their coherence parameters.

All dictionaries are stored as dense complex matrices.  Real transforms simply
carry a zero imaginary part.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft
import scipy.linalg

from .errors import DegenerateColumnError, DimensionError, PreconditionError

ZERO_COLUMN_TOL = 1e-14
# inner products below this are rounding noise of an orthogonal pair
COHERENCE_FLOOR = 1e-12


def _is_pow2(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class Dictionary:
    """An ``M x N`` dictionary with unit-norm columns.

    Columns are renormalized on construction; a numerically zero column is
    rejected.  The matrix is made read-only so instances can be shared.
    """

    entries: np.ndarray
    label: str = ""
    _coherence: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self) -> None:
        mat = np.array(self.entries, dtype=complex, copy=True)
        if mat.ndim == 1:
            mat = mat[:, None]
        if mat.ndim != 2 or mat.shape[0] < 1 or mat.shape[1] < 1:
            raise DimensionError(f"dictionary must be a non-empty matrix, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("dictionary entries must be finite")
        norms = np.linalg.norm(mat, axis=0)
        bad = np.flatnonzero(norms < ZERO_COLUMN_TOL)
        if bad.size:
            raise DegenerateColumnError(bad.tolist(), "dictionary has numerically zero columns")
        mat /= norms
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    @property
    def is_real(self) -> bool:
        return not np.any(self.entries.imag)

    def column(self, k: int) -> np.ndarray:
        return self.entries[:, k]

    def sub(self, idx) -> np.ndarray:
        """Columns with indices in ``idx`` as a plain matrix."""
        return self.entries[:, np.asarray(sorted(idx), dtype=int)]

    def gram(self) -> np.ndarray:
        return self.entries.conj().T @ self.entries

    @property
    def coherence(self) -> float:
        if not self._coherence:
            self._coherence.append(coherence(self))
        return self._coherence[0]

    def __matmul__(self, other):
        return self.entries @ other

    def __repr__(self) -> str:
        return f"Dictionary({self.label or 'unnamed'}, {self.rows}x{self.cols})"


@dataclass(frozen=True)
class CoherenceProfile:
    """Coherence parameters of a dictionary pair (A, B)."""

    mu_a: float
    mu_b: float
    mu_m: float
    mu_d: float | None = None

    def __post_init__(self) -> None:
        if self.mu_d is None:
            object.__setattr__(self, "mu_d", max(self.mu_a, self.mu_b, self.mu_m))
        for name in ("mu_a", "mu_b", "mu_m", "mu_d"):
            val = getattr(self, name)
            if not (0.0 <= val <= 1.0 + 1e-12) or not np.isfinite(val):
                raise PreconditionError(f"{name}={val} outside [0, 1]")

    def swapped(self) -> "CoherenceProfile":
        """Profile of the pair (B, A)."""
        return CoherenceProfile(self.mu_b, self.mu_a, self.mu_m, self.mu_d)

    def as_dict(self) -> dict[str, float]:
        return {"mu_a": self.mu_a, "mu_b": self.mu_b, "mu_m": self.mu_m, "mu_d": self.mu_d}


# --------------------------------------------------------------------------
# builders


def build_dft(M: int) -> Dictionary:
    """Unitary DFT matrix, ``[F]_{k,l} = exp(-2 pi i k l / M) / sqrt(M)``."""
    if M < 1:
        raise DimensionError("M must be positive")
    k = np.arange(M)
    F = np.exp(-2j * np.pi * np.outer(k, k) / M) / np.sqrt(M)
    return Dictionary(F, label=f"dft:{M}")


def build_identity(M: int) -> Dictionary:
    if M < 1:
        raise DimensionError("M must be positive")
    return Dictionary(np.eye(M), label=f"identity:{M}")


def build_hadamard(M: int) -> Dictionary:
    """Orthonormal Sylvester-Hadamard basis."""
    if not _is_pow2(M):
        raise DimensionError(f"Hadamard size must be a power of 2, got {M}")
    return Dictionary(scipy.linalg.hadamard(M) / np.sqrt(M), label=f"hadamard:{M}")


def _dct_1d(n: int) -> np.ndarray:
    # columns are the orthonormal DCT-II basis vectors (synthesis operator)
    return scipy.fft.idct(np.eye(n), type=2, norm="ortho", axis=0)


def _haar_1d(n: int, octaves: int) -> np.ndarray:
    """Synthesis matrix (columns = basis vectors) of an orthonormal Haar basis."""
    if not _is_pow2(n):
        raise DimensionError(f"Haar size must be a power of 2, got {n}")
    if octaves < 0 or (1 << octaves) > n:
        raise DimensionError(f"cannot decompose length {n} on {octaves} octaves")
    # scaling functions after `octaves` levels have support 2**octaves
    approx_len = 1 << octaves
    scaling = []
    for start in range(0, n, approx_len):
        v = np.zeros(n)
        v[start:start + approx_len] = 1.0
        scaling.append(v / np.sqrt(approx_len))
    cols = []
    width = approx_len
    while width >= 2:
        half = width // 2
        for start in range(0, n, width):
            v = np.zeros(n)
            v[start:start + half] = 1.0
            v[start + half:start + width] = -1.0
            cols.append(v / np.sqrt(width))
        width = half
    # coarse-to-fine ordering: scaling functions, then wavelets from coarse to fine
    return np.column_stack(scaling + cols)


def build_dct2d(side: int) -> Dictionary:
    """2-D orthonormal DCT acting on row-major vectorized ``side x side`` images."""
    if not _is_pow2(side):
        raise DimensionError(f"DCT side must be a power of 2, got {side}")
    C = _dct_1d(side)
    return Dictionary(np.kron(C, C), label=f"dct2d:{side}")


def build_haar2d(side: int, octaves: int = 3) -> Dictionary:
    """Separable 2-D Haar basis over ``octaves`` levels (row-major vectorization)."""
    H = _haar_1d(side, octaves)
    return Dictionary(np.kron(H, H), label=f"haar2d:{side}:{octaves}")


def build_etf_approx(M: int, N: int, iterations: int = 5000, seed: int = 0) -> Dictionary:
    """Approximate equiangular tight frame by alternating projection.

    Starts from seeded i.i.d. Gaussian columns, then alternates between
    clipping off-diagonal Gram magnitudes at the Welch bound and projecting the
    Gram matrix onto rank-``M`` matrices with eigenvalues ``N/M`` (tight frame).
    The result is real.
    """
    if M < 1 or N < M:
        raise DimensionError(f"need 1 <= M <= N, got M={M}, N={N}")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((M, N))
    X /= np.linalg.norm(X, axis=0)
    if N == M:
        # square case: nearest orthonormal basis
        U, _, Vt = np.linalg.svd(X)
        return Dictionary(U @ Vt, label=f"etf:{M}x{N}:seed={seed}")
    welch = np.sqrt((N - M) / (M * (N - 1)))
    eye = np.eye(N)
    for _ in range(iterations):
        G = X.T @ X
        G = np.clip(G, -welch, welch)
        G[eye == 1] = 1.0
        _, V = np.linalg.eigh(G)
        X = np.sqrt(N / M) * V[:, -M:].T
        X /= np.linalg.norm(X, axis=0)
    return Dictionary(X, label=f"etf:{M}x{N}:seed={seed}")


def etf_pair(M: int, N_each: int, iterations: int = 5000, seed: int = 0) -> tuple[Dictionary, Dictionary]:
    """Split an ``M x 2*N_each`` approximate ETF into two halves (A, B)."""
    frame = build_etf_approx(M, 2 * N_each, iterations, seed)
    A = Dictionary(frame.entries[:, :N_each], label=f"etf:{M}x{N_each}:seed={seed}")
    B = Dictionary(frame.entries[:, N_each:], label=f"etf-partner:{M}x{N_each}:seed={seed}")
    return A, B


# --------------------------------------------------------------------------
# coherence


def _as_matrix(D) -> np.ndarray:
    return D.entries if isinstance(D, Dictionary) else np.asarray(D, dtype=complex)


def coherence(A) -> float:
    """Largest ``|a_k^H a_l|`` over distinct columns (0 for a single column)."""
    mat = _as_matrix(A)
    if mat.shape[1] < 2:
        return 0.0
    G = np.abs(mat.conj().T @ mat)
    np.fill_diagonal(G, 0.0)
    mu = float(G.max())
    return 0.0 if mu < COHERENCE_FLOOR else mu


def mutual_coherence(A, B) -> float:
    """Largest ``|a_k^H b_l|`` over all cross pairs."""
    a, b = _as_matrix(A), _as_matrix(B)
    if a.shape[0] != b.shape[0]:
        raise DimensionError(f"row mismatch: {a.shape[0]} vs {b.shape[0]}")
    mu = float(np.abs(a.conj().T @ b).max())
    return 0.0 if mu < COHERENCE_FLOOR else mu


def profile(A, B) -> CoherenceProfile:
    mu_a, mu_b = coherence(A), coherence(B)
    mu_m = mutual_coherence(A, B)
    return CoherenceProfile(mu_a, mu_b, mu_m, max(mu_a, mu_b, mu_m))


def concat(A: Dictionary, B: Dictionary) -> Dictionary:
    """The concatenated dictionary ``[A B]``."""
    if A.rows != B.rows:
        raise DimensionError(f"row mismatch: {A.rows} vs {B.rows}")
    label = f"[{A.label} {B.label}]" if A.label or B.label else ""
    return Dictionary(np.hstack([A.entries, B.entries]), label=label)


# --------------------------------------------------------------------------
# matrix file I/O
#
# Text format: a header line "rows cols real|complex", then one line per row.
# Complex entries are written as consecutive "re im" pairs.


def save_matrix(path, mat) -> None:
    mat = _as_matrix(mat)
    is_real = not np.any(mat.imag)
    rows, cols = mat.shape
    lines = [f"{rows} {cols} {'real' if is_real else 'complex'}"]
    for r in range(rows):
        if is_real:
            vals = (repr(float(v)) for v in mat[r].real)
        else:
            vals = (f"{float(v.real)!r} {float(v.imag)!r}" for v in mat[r])
        lines.append(" ".join(vals))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_matrix(path) -> np.ndarray:
    text = Path(path).read_text(encoding="ascii").split("\n")
    header = text[0].split()
    if len(header) != 3 or header[2] not in ("real", "complex"):
        raise ValueError(f"{path}: bad matrix header {text[0]!r}")
    rows, cols = int(header[0]), int(header[1])
    body = [ln for ln in text[1:] if ln.strip()]
    if len(body) != rows:
        raise ValueError(f"{path}: expected {rows} rows, found {len(body)}")
    data = np.array([[float(t) for t in ln.split()] for ln in body])
    if header[2] == "real":
        if data.shape != (rows, cols):
            raise ValueError(f"{path}: expected {cols} columns per row")
        return data.astype(complex)
    if data.shape != (rows, 2 * cols):
        raise ValueError(f"{path}: expected {2 * cols} numbers per row")
    return data[:, 0::2] + 1j * data[:, 1::2]


def save_dictionary(path, D: Dictionary) -> None:
    save_matrix(path, D)


def load_dictionary(path, label: str | None = None) -> Dictionary:
    return Dictionary(load_matrix(path), label=label or f"file:{path}")
