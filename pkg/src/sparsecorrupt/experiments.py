"""Monte-Carlo phase-transition sweeps and the inpainting experiment."""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import recovery
from .dictionaries import Dictionary, build_dct2d, build_haar2d, build_identity
from .errors import PreconditionError, SparseCorruptError
from .signals import random_instance, trial_rng
from .specs import dictionary_pair

log = logging.getLogger(__name__)

SUCCESS_TOL = 1e-3
ZERO_SUCCESS_TOL = 1e-12
PIPELINE_CASES = ("caseI", "caseII_E", "caseII_X", "caseIII", "caseIV")


@dataclass(frozen=True)
class ExperimentGrid:
    a_spec: str
    b_spec: str
    case_id: str
    method: str = "omp"
    nx_range: tuple[int, ...] = tuple(range(1, 9))
    ne_range: tuple[int, ...] = tuple(range(1, 9))
    trials_per_cell: int = 200
    master_seed: int = 0
    success_tol: float = SUCCESS_TOL
    complex_values: bool = False

    def __post_init__(self) -> None:
        if self.trials_per_cell < 1:
            raise PreconditionError("trials_per_cell must be >= 1")
        if not self.success_tol > 0:
            raise PreconditionError("success_tol must be positive")
        if self.case_id not in PIPELINE_CASES:
            raise PreconditionError(f"unknown case {self.case_id!r}; expected one of {PIPELINE_CASES}")
        if self.method not in ("bp", "omp", "ls", "p0"):
            raise PreconditionError(f"unknown method {self.method!r}")
        object.__setattr__(self, "nx_range", tuple(int(n) for n in self.nx_range))
        object.__setattr__(self, "ne_range", tuple(int(n) for n in self.ne_range))

    def cells(self) -> list[tuple[int, int]]:
        return [(nx, ne) for ne in self.ne_range for nx in self.nx_range]

    def dictionaries(self) -> tuple[Dictionary, Dictionary]:
        return dictionary_pair(self.a_spec, self.b_spec)


@dataclass(frozen=True)
class CellResult:
    nx: int
    ne: int
    successes: int
    trials: int
    structural_failures: int = 0

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def is_success(x_hat: np.ndarray, x_true: np.ndarray, tol: float = SUCCESS_TOL) -> bool:
    """Relative l2 criterion; a zero truth needs ``||x_hat|| <= 1e-12``."""
    nx = float(np.linalg.norm(x_true))
    err = float(np.linalg.norm(np.asarray(x_hat) - np.asarray(x_true)))
    if nx == 0.0:
        return float(np.linalg.norm(x_hat)) <= ZERO_SUCCESS_TOL
    return err < tol * nx


def run_pipeline(case_id: str, method: str, A: Dictionary, B: Dictionary, z, x, e) -> np.ndarray:
    """Recover x with the pipeline for ``case_id`` given the true (x, e) for side information."""
    if case_id == "caseI":
        rec = recovery.recover_case_I(A, B, z, x.support, e.support)
    elif case_id == "caseII_E":
        rec = recovery.recover_case_II_E(A, B, z, e.support, method, nx_for_omp=x.nnz)
    elif case_id == "caseII_X":
        rec = recovery.recover_case_II_X(A, B, z, x.support, method, ne_for_omp=e.nnz)
    elif case_id == "caseIII":
        rec = recovery.recover_case_III(A, B, z, e.nnz, max_nx=max(x.nnz, 1))
    elif case_id == "caseIV":
        rec = recovery.recover_case_IV(A, B, z, method, k_for_omp=x.nnz + e.nnz)
    else:
        raise PreconditionError(f"unknown case {case_id!r}")
    return rec.x.values


def run_cell(grid: ExperimentGrid, nx: int, ne: int) -> CellResult:
    """All trials of one (nx, ne) cell.

    Trial ``t`` draws from the substream (master_seed, nx, ne, t), so results
    do not depend on evaluation order.  Structural errors (rank deficiency,
    annihilated columns, ...) count as failed trials.
    """
    A, B = grid.dictionaries()
    succ = struct = 0
    for t in range(grid.trials_per_cell):
        rng = trial_rng(grid.master_seed, nx, ne, t)
        x, e = random_instance(A.cols, B.cols, nx, ne, rng, grid.complex_values)
        z = A.entries @ x.values + B.entries @ e.values
        try:
            x_hat = run_pipeline(grid.case_id, grid.method, A, B, z, x, e)
        except SparseCorruptError:
            struct += 1
            continue
        succ += is_success(x_hat, x.values, grid.success_tol)
    return CellResult(nx, ne, succ, grid.trials_per_cell, struct)


def _run_cell_args(args):
    grid, nx, ne = args
    return run_cell(grid, nx, ne)


def run_grid(grid: ExperimentGrid, threads: int | None = None, cells=None) -> list[CellResult]:
    """Run every cell (or the given subset); output is sorted by (ne, nx)."""
    todo = list(cells) if cells is not None else grid.cells()
    threads = threads or os.cpu_count() or 1
    if threads > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell_args, [(grid, nx, ne) for nx, ne in todo]))
    else:
        results = [run_cell(grid, nx, ne) for nx, ne in todo]
    return sorted(results, key=lambda r: (r.ne, r.nx))


class Contour(list):
    """List of ``(ne, nx_at_level)`` pairs; ``non_monotone`` lists affected ``ne``."""

    def __init__(self, items=(), non_monotone=()):
        super().__init__(items)
        self.non_monotone = tuple(non_monotone)


def success_contour(results: list[CellResult], level: float = 0.5) -> Contour:
    """Largest ``nx`` per ``ne`` column whose success rate is at least ``level``.

    Columns in which some smaller ``nx`` falls below ``level`` (sampling noise)
    are still resolved to the largest qualifying ``nx`` and flagged.
    """
    by_ne: dict[int, list[CellResult]] = {}
    for r in results:
        by_ne.setdefault(r.ne, []).append(r)
    out, flagged = [], []
    for ne in sorted(by_ne):
        col = sorted(by_ne[ne], key=lambda r: r.nx)
        ok = [r.nx for r in col if r.rate >= level]
        best = max(ok) if ok else 0
        if any(r.rate < level for r in col if r.nx < best):
            flagged.append(ne)
        out.append((ne, best))
    return Contour(out, flagged)


def diagonal_crossing(results: list[CellResult], level: float = 0.5) -> int:
    """Largest ``n`` on the diagonal ``nx = ne = n`` with success rate >= ``level``."""
    diag = sorted((r for r in results if r.nx == r.ne), key=lambda r: r.nx)
    ok = [r.nx for r in diag if r.rate >= level]
    return max(ok) if ok else 0


def write_results_csv(path, results: list[CellResult], header_comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nx", "ne", "trials", "successes", "rate"])
        for r in results:
            w.writerow([r.nx, r.ne, r.trials, r.successes, repr(r.rate)])


def write_success_contour_csv(path, contour: Contour, header_comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        if header_comment:
            for line in header_comment.splitlines():
                fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["ne", "nx_at_level", "non_monotone"])
        for ne, nx in contour:
            w.writerow([ne, nx, int(ne in contour.non_monotone)])


# --------------------------------------------------------------------------
# inpainting


def synthetic_image(side: int = 64, seed: int = 0) -> np.ndarray:
    """Piecewise-smooth test image in [0, 0.9]: shaded background plus a few shapes."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:side, 0:side] / side
    img = 0.35 + 0.25 * xx - 0.15 * yy + 0.05 * np.sin(2 * np.pi * (xx + 0.5 * yy))
    cx, cy, r = 0.35 + 0.1 * rng.random(), 0.4 + 0.1 * rng.random(), 0.22
    disk = (xx - cx) ** 2 + (yy - cy) ** 2 < r ** 2
    img = np.where(disk, 0.7 - 0.2 * ((xx - cx) ** 2 + (yy - cy) ** 2) / r ** 2, img)
    x0, y0 = int(side * 0.55), int(side * 0.6)
    img[y0:y0 + side // 4, x0:x0 + side // 3] = 0.15 + 0.1 * yy[y0:y0 + side // 4, x0:x0 + side // 3]
    return np.clip(img, 0.0, 0.9)


def text_mask(side: int, fraction: float, seed: int = 0) -> np.ndarray:
    """Seeded pseudo-text overlay: glyph-like strokes along text lines.

    Returns a boolean ``side x side`` mask with exactly ``round(fraction * side^2)``
    pixels set.
    """
    rng = np.random.default_rng(seed)
    target = int(round(fraction * side * side))
    mask = np.zeros((side, side), dtype=bool)
    glyph_h = max(3, side // 10)
    glyph_w = max(2, glyph_h * 2 // 3)
    line_gap = glyph_h + max(1, glyph_h // 2)
    top = rng.integers(0, line_gap)
    while mask.sum() < target:
        for row in range(top, side - glyph_h + 1, line_gap):
            col = int(rng.integers(0, glyph_w))
            while col + glyph_w <= side and mask.sum() < target:
                g = np.zeros((glyph_h, glyph_w), dtype=bool)
                # each glyph: a few horizontal/vertical strokes of width 1
                for _ in range(rng.integers(2, 4)):
                    if rng.random() < 0.5:
                        g[rng.integers(0, glyph_h), :] = True
                    else:
                        g[:, rng.integers(0, glyph_w)] = True
                mask[row:row + glyph_h, col:col + glyph_w] |= g
                col += glyph_w + 1 + int(rng.integers(0, 2))
            if mask.sum() >= target:
                break
        top = int(rng.integers(0, line_gap))
    flat = np.flatnonzero(mask)
    if flat.size > target:
        drop = rng.choice(flat, size=flat.size - target, replace=False)
        mask.ravel()[drop] = False
    return mask


def sparsify(image: np.ndarray, A: Dictionary, keep_fraction: float):
    """Keep the largest ``keep_fraction`` of transform coefficients.

    Returns ``(coefficients, sparsified image)``.
    """
    vec = image.astype(float).ravel()
    coef = (A.entries.conj().T @ vec).real
    k = int(round(keep_fraction * coef.size))
    keep = np.argsort(-np.abs(coef), kind="stable")[:k]
    x = np.zeros_like(coef)
    x[keep] = coef[keep]
    return x, (A.entries.real @ x).reshape(image.shape)


def mse_db(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error in dB on the [0, 1] intensity scale (floored at -300 dB)."""
    mse = float(np.mean((np.asarray(estimate) - np.asarray(truth)) ** 2))
    return 10.0 * math.log10(max(mse, 1e-30))


def relative_error_db(estimate: np.ndarray, truth: np.ndarray) -> float:
    num = float(np.sum((np.asarray(estimate) - np.asarray(truth)) ** 2))
    den = float(np.sum(np.asarray(truth) ** 2))
    return 10.0 * math.log10(max(num / den, 1e-30))


@dataclass
class InpaintResult:
    restored: np.ndarray
    sparsified: np.ndarray
    corrupted: np.ndarray
    mse_db: float
    relative_db: float
    corrupted_mse_db: float
    knowledge: str
    transform: str
    dropped_columns: tuple[int, ...] = ()
    info: dict = field(default_factory=dict)

    def summary(self) -> dict:
        d = {k: v for k, v in asdict(self).items()
             if k not in ("restored", "sparsified", "corrupted", "info")}
        d["dropped_columns"] = len(self.dropped_columns)
        d.update({k: v for k, v in self.info.items() if isinstance(v, (int, float, str, bool))})
        return d


def transform_dictionary(transform: str, side: int) -> Dictionary:
    if transform == "dct":
        return build_dct2d(side)
    if transform == "haar":
        return build_haar2d(side, 3)
    raise PreconditionError(f"unknown transform {transform!r}")


def inpaint_experiment(image: np.ndarray, transform: str = "dct", keep_fraction: float = 0.15,
                       mask=None, knowledge: str = "caseII_E", mask_fraction: float = 0.188,
                       mask_seed: int = 0, bp_options: dict | None = None,
                       A: Dictionary | None = None) -> InpaintResult:
    """Sparsify, overwrite masked pixels with max gray, recover, and score.

    ``mask`` may be a boolean image, an index collection, or None (seeded
    pseudo-text covering ``mask_fraction`` of the pixels).  The MSE is
    measured against the sparsified image.  Annihilated columns in Case II
    (the Haar failure mode) are dropped and reported instead of aborting.
    """
    img = np.asarray(image, dtype=float)
    side = img.shape[0]
    if img.ndim != 2 or img.shape[1] != side or side & (side - 1):
        raise PreconditionError(f"image must be square with power-of-2 side, got {img.shape}")
    A = A if A is not None else transform_dictionary(transform, side)
    B = build_identity(side * side)
    if mask is None:
        mask = text_mask(side, mask_fraction, mask_seed)
    mask = np.asarray(mask)
    if mask.dtype == bool:
        E = np.flatnonzero(mask.ravel())
    else:
        E = np.unique(mask.ravel().astype(int))
        if E.size and (E[0] < 0 or E[-1] >= side * side):
            raise PreconditionError("mask indices outside the image")

    x_true, truth = sparsify(img, A, keep_fraction)
    corrupted = truth.copy().ravel()
    corrupted[E] = 1.0
    corrupted = corrupted.reshape(img.shape)
    z = corrupted.ravel()
    X = np.flatnonzero(x_true)

    opts = {"max_iter": 3000, "gap_tol": 1e-7}
    opts.update(bp_options or {})
    info: dict = {}
    dropped: tuple[int, ...] = ()
    if knowledge == "caseI":
        rec = recovery.recover_case_I(A, B, z, X, E, rank_deficient="lstsq")
    elif knowledge == "caseII_E":
        rec = recovery.recover_case_II_E(A, B, z, E, "bp", on_degenerate="drop", bp_options=opts)
        dropped = tuple(rec.info.get("dropped", ()))
    elif knowledge == "caseIV":
        rec = recovery.recover_case_IV(A, B, z, "bp", bp_options=opts)
    else:
        raise PreconditionError(f"unsupported knowledge case {knowledge!r}")
    info.update(rec.info)
    if dropped:
        log.info("inpainting: %d columns annihilated by the mask projection", len(dropped))
    restored = (A.entries @ rec.x.values).real.reshape(img.shape)
    return InpaintResult(restored, truth, corrupted, mse_db(restored, truth),
                         relative_error_db(restored, truth), mse_db(corrupted, truth),
                         knowledge, transform, dropped, info)
