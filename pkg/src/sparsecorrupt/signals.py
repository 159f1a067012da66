"""Sparse vectors, support knowledge, comb signals and seeded random instances.

Indices are 0-based throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import DimensionError, PreconditionError


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Dense coefficient vector with its explicit support set."""

    values: np.ndarray
    support: tuple[int, ...]

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=complex, copy=True).ravel()
        supp = tuple(sorted(int(i) for i in set(self.support)))
        if supp and (supp[0] < 0 or supp[-1] >= vals.size):
            raise DimensionError(f"support {supp} out of range for length {vals.size}")
        mask = np.ones(vals.size, dtype=bool)
        mask[list(supp)] = False
        if np.any(vals[mask] != 0):
            raise ValueError("nonzero value outside the declared support")
        if np.any(vals[list(supp)] == 0):
            raise ValueError("declared support contains zero entries")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support", supp)

    @classmethod
    def from_dense(cls, values, tol: float = 0.0) -> "SparseVector":
        vals = np.array(values, dtype=complex).ravel()
        if tol > 0:
            vals = np.where(np.abs(vals) > tol, vals, 0)
        return cls(vals, tuple(np.flatnonzero(vals)))

    @classmethod
    def zeros(cls, n: int) -> "SparseVector":
        return cls(np.zeros(n, dtype=complex), ())

    @property
    def size(self) -> int:
        return self.values.size

    @property
    def nnz(self) -> int:
        return len(self.support)

    def dense(self) -> np.ndarray:
        return self.values.copy()

    def __len__(self) -> int:
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values.astype(dtype) if dtype is not None else self.values.copy()


@dataclass(frozen=True)
class KnowledgeDescriptor:
    """What is known about the supports prior to recovery."""

    x_support: frozenset[int] | None = None
    e_support: frozenset[int] | None = None
    nx_known: int | None = None
    ne_known: int | None = None

    def __post_init__(self) -> None:
        for supp, count, name in ((self.x_support, self.nx_known, "x"),
                                  (self.e_support, self.ne_known, "e")):
            if supp is not None and count is not None and len(supp) != count:
                raise PreconditionError(f"{name}: |support|={len(supp)} != count {count}")

    @property
    def case(self) -> str:
        """The recovery case this knowledge corresponds to."""
        if self.x_support is not None and self.e_support is not None:
            return "caseI"
        if self.e_support is not None:
            return "caseII_E"
        if self.x_support is not None:
            return "caseII_X"
        if self.ne_known is not None or self.nx_known is not None:
            return "caseIII"
        return "caseIV"


def comb(M: int, t: int) -> SparseVector:
    """Unit spikes at indices 0, t, 2t, ...; requires ``t | M``."""
    if t < 1 or M % t:
        raise PreconditionError(f"comb spacing {t} does not divide {M}")
    vals = np.zeros(M, dtype=complex)
    vals[::t] = 1.0
    return SparseVector(vals, tuple(range(0, M, t)))


def concentration(r, S: Iterable[int]) -> float:
    """Fraction epsilon of the l1 mass of ``r`` lying outside ``S``."""
    vals = np.asarray(r.values if isinstance(r, SparseVector) else r).ravel()
    total = np.abs(vals).sum()
    if total == 0:
        raise PreconditionError("concentration of the zero vector is undefined")
    idx = np.fromiter(set(S), dtype=int)
    inside = np.abs(vals[idx]).sum() if idx.size else 0.0
    return float(min(1.0, max(0.0, 1.0 - inside / total)))


def trial_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the substream identified by ``key``.

    Streams depend only on (master_seed, key), never on call order.
    """
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def _random_sparse(rng: np.random.Generator, n: int, k: int, complex_values: bool) -> SparseVector:
    if not 0 <= k <= n:
        raise DimensionError(f"sparsity {k} exceeds dimension {n}")
    supp = np.sort(rng.choice(n, size=k, replace=False)) if k else np.empty(0, dtype=int)
    vals = np.zeros(n, dtype=complex)
    if complex_values:
        vals[supp] = (rng.standard_normal(k) + 1j * rng.standard_normal(k)) / np.sqrt(2)
    else:
        vals[supp] = rng.standard_normal(k)
    # a Gaussian draw of exactly zero has probability zero, but keep the invariant
    vals[supp] = np.where(vals[supp] == 0, 1.0, vals[supp])
    return SparseVector(vals, tuple(supp.tolist()))


def random_instance(Na: int, Nb: int, nx: int, ne: int, seed=0,
                    complex_values: bool = False) -> tuple[SparseVector, SparseVector]:
    """Uniformly random supports with i.i.d. unit-variance Gaussian nonzeros.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if nx > Na or ne > Nb or nx < 0 or ne < 0:
        raise DimensionError(f"sparsities (nx={nx}, ne={ne}) exceed dimensions ({Na}, {Nb})")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    x = _random_sparse(rng, Na, nx, complex_values)
    e = _random_sparse(rng, Nb, ne, complex_values)
    return x, e


# (index, re, im) CSV, one line per nonzero; the header records the length


def save_sparse_csv(path, v: SparseVector, all_entries: bool = False,
                    header_comment: str | None = None) -> None:
    """``header_comment`` lines are written first, prefixed with ``#``."""
    idx = range(v.size) if all_entries else v.support
    with open(path, "w", newline="", encoding="ascii") as fh:
        for line in (header_comment or "").splitlines():
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "re", "im", f"length={v.size}"])
        for i in idx:
            w.writerow([i, repr(float(v.values[i].real)), repr(float(v.values[i].imag))])


def load_sparse_csv(path, length: int | None = None) -> SparseVector:
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    if not rows or rows[0][:3] != ["index", "re", "im"]:
        raise ValueError(f"{path}: missing 'index,re,im' header")
    n = length
    for cell in rows[0][3:]:
        if cell.startswith("length="):
            n = int(cell.split("=", 1)[1])
    entries = [(int(r[0]), float(r[1]), float(r[2])) for r in rows[1:] if r]
    if n is None:
        n = max((i for i, _, _ in entries), default=-1) + 1
    vals = np.zeros(n, dtype=complex)
    for i, re, im in entries:
        vals[i] = complex(re, im)
    return SparseVector.from_dense(vals)


def save_vector_csv(path, v, header_comment: str | None = None) -> None:
    """Dense vector in the same triplet format (every index written)."""
    vals = np.asarray(v, dtype=complex).ravel()
    save_sparse_csv(path, SparseVector.from_dense(vals), all_entries=True,
                    header_comment=header_comment)


def load_vector_csv(path) -> np.ndarray:
    return load_sparse_csv(path).dense()
