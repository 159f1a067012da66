"""``sparsecorrupt`` command-line interface.

Every command accepts ``--config FILE`` (INI; the ``[DEFAULT]`` section and
the section named after the command supply defaults, flags override them).
The effective configuration and its hash are written into every output file.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import guarantees, recovery
from .dictionaries import CoherenceProfile, profile
from .errors import NumericalError, PreconditionError, SparseCorruptError
from .pgm import read_pgm, write_pgm
from .signals import load_sparse_csv, load_vector_csv, random_instance, save_sparse_csv, save_vector_csv
from .specs import dictionary_pair

log = logging.getLogger("sparsecorrupt")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PRECONDITION = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

RECOVER_CASES = ("caseI", "caseII_E", "caseII_X", "caseIII", "caseIV")


# --------------------------------------------------------------------------
# helpers


def parse_range(text: str) -> list[int]:
    """``"a:b"`` (inclusive), ``"a:b:step"``, ``"a,b,c"`` or a single integer."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            lo, hi, step = parts
            if step <= 0:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer range {text!r}") from None


def _effective_config(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def config_hash(cfg: dict) -> str:
    """Hash of the result-determining settings (output location and threads excluded)."""
    cfg = {k: v for k, v in cfg.items() if k not in ("out_dir", "threads")}
    blob = json.dumps(cfg, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def provenance(args: argparse.Namespace) -> str:
    cfg = _effective_config(args)
    return "\n".join([f"sparsecorrupt {args.command}",
                      f"config: {json.dumps(cfg, sort_keys=True, default=str)}",
                      f"config_hash: {config_hash(cfg)}"])


def _out_dir(args) -> Path:
    d = Path(args.out_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _write_text(path: Path, header: str, body: str) -> None:
    lines = [f"# {line}" for line in header.splitlines()]
    path.write_text("\n".join(lines) + "\n" + body, encoding="ascii")


def _profile_from_args(args) -> CoherenceProfile:
    if args.a is not None:
        if args.b is None:
            raise PreconditionError("--b is required together with --a")
        return profile(*dictionary_pair(args.a, args.b))
    if args.mu_m is None:
        raise PreconditionError("give dictionary specs (--a/--b) or --mu-a/--mu-b/--mu-m")
    return CoherenceProfile(args.mu_a, args.mu_b, args.mu_m, args.mu_d)


# --------------------------------------------------------------------------
# commands


def cmd_coherence(args) -> int:
    A, B = dictionary_pair(args.a, args.b)
    prof = profile(A, B)
    print(f"mu_a={prof.mu_a:.6g} mu_b={prof.mu_b:.6g} mu_m={prof.mu_m:.6g} mu_d={prof.mu_d:.6g}")
    if args.out_dir:
        _write_text(_out_dir(args) / "coherence.txt", provenance(args),
                    json.dumps(prof.as_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def cmd_threshold(args) -> int:
    prof = _profile_from_args(args)
    rows = guarantees.contour(args.case, prof, args.ne_range, args.nx_max)
    guarantees.write_contour_csv(sys.stdout, args.case, prof, rows)
    if args.out_dir:
        path = _out_dir(args) / f"threshold_{args.case}.csv"
        with open(path, "w", newline="", encoding="ascii") as fh:
            for line in provenance(args).splitlines():
                fh.write(f"# {line}\n")
            guarantees.write_contour_csv(fh, args.case, prof, rows)
    return EXIT_OK


def cmd_generate(args) -> int:
    A, B = dictionary_pair(args.a, args.b)
    x, e = random_instance(A.cols, B.cols, args.nx, args.ne, args.seed, args.complex)
    z = A.entries @ x.values + B.entries @ e.values
    out = _out_dir(args)
    head = provenance(args)
    save_sparse_csv(out / "x.csv", x, header_comment=head)
    save_sparse_csv(out / "e.csv", e, header_comment=head)
    save_vector_csv(out / "z.csv", z, header_comment=head)
    print(f"wrote {out / 'z.csv'} (M={A.rows}, nx={args.nx}, ne={args.ne})")
    return EXIT_OK


def _support_file(path) -> np.ndarray | None:
    if path is None:
        return None
    return np.asarray(load_sparse_csv(path).support, dtype=int)


def cmd_recover(args) -> int:
    A, B = dictionary_pair(args.a, args.b)
    z = load_vector_csv(args.z)
    if z.size != A.rows:
        raise PreconditionError(f"measurement has length {z.size}, dictionaries have {A.rows} rows")
    X = _support_file(args.x_support)
    E = _support_file(args.e_support)
    case, method = args.case, args.method
    if case in ("caseI", "caseII_X") and X is None:
        raise PreconditionError(f"{case} needs --x-support")
    if case in ("caseI", "caseII_E") and E is None:
        raise PreconditionError(f"{case} needs --e-support")
    bp_opts = {"max_iter": args.max_iter}
    if case == "caseI":
        rec = recovery.recover_case_I(A, B, z, X, E)
    elif case == "caseII_E":
        rec = recovery.recover_case_II_E(A, B, z, E, method, nx_for_omp=args.nx, bp_options=bp_opts)
    elif case == "caseII_X":
        rec = recovery.recover_case_II_X(A, B, z, X, method, ne_for_omp=args.ne, bp_options=bp_opts)
    elif case == "caseIII":
        if args.ne is None or args.nx is None:
            raise PreconditionError("caseIII needs --ne and --nx (search bound)")
        rec = recovery.recover_case_III(A, B, z, args.ne, args.nx)
    else:
        k = None if args.nx is None or args.ne is None else args.nx + args.ne
        rec = recovery.recover_case_IV(A, B, z, method, k_for_omp=k, bp_options=bp_opts)
    out = _out_dir(args)
    head = provenance(args)
    save_sparse_csv(out / "x_hat.csv", rec.x, header_comment=head)
    save_sparse_csv(out / "e_hat.csv", rec.e, header_comment=head)
    resid = float(np.linalg.norm(z - A.entries @ rec.x.values - B.entries @ rec.e.values))
    report = {"case": case, "method": method, "nnz_x": rec.x.nnz, "nnz_e": rec.e.nnz,
              "residual": resid}
    report.update({k: v for k, v in rec.info.items() if isinstance(v, (bool, int, float, str))})
    if args.truth is not None:
        truth = load_sparse_csv(args.truth, A.cols).dense()
        report["relative_error"] = float(np.linalg.norm(rec.x.values - truth) /
                                         max(np.linalg.norm(truth), 1e-300))
    _write_text(out / "report.txt", head, json.dumps(report, sort_keys=True, indent=1) + "\n")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def cmd_phase(args) -> int:
    grid = ex.ExperimentGrid(args.a, args.b, args.case, args.method,
                             tuple(args.nx_range), tuple(args.ne_range), args.trials,
                             args.seed, args.success_tol, args.complex)
    cells = [(n, n) for n in args.nx_range if n in args.ne_range] if args.diagonal else None
    results = ex.run_grid(grid, threads=args.threads, cells=cells)
    contour = ex.success_contour(results, args.level)
    out = _out_dir(args)
    head = provenance(args)
    ex.write_results_csv(out / "grid.csv", results, head)
    ex.write_success_contour_csv(out / "contour.csv", contour, head)
    if args.diagonal:
        print(f"diagonal crossing at nx=ne={ex.diagonal_crossing(results, args.level)}")
    for ne, nx in contour:
        print(f"ne={ne} nx_at_level={nx}")
    return EXIT_OK


def cmd_inpaint(args) -> int:
    if args.image is not None:
        image = read_pgm(args.image)
    else:
        image = ex.synthetic_image(args.synthetic, args.seed)
    mask = None
    if args.mask is not None:
        mask = read_pgm(args.mask) > 0.5
        if mask.shape != image.shape:
            raise PreconditionError(f"mask shape {mask.shape} differs from image {image.shape}")
    res = ex.inpaint_experiment(image, args.transform, args.keep, mask, args.case,
                                args.mask_fraction, args.seed,
                                bp_options={"max_iter": args.max_iter})
    out = _out_dir(args)
    head = provenance(args)
    write_pgm(out / "restored.pgm", res.restored, head)
    write_pgm(out / "sparsified.pgm", res.sparsified, head)
    write_pgm(out / "corrupted.pgm", res.corrupted, head)
    summary = res.summary()
    if res.dropped_columns:
        summary["dropped_column_indices"] = list(res.dropped_columns)
    _write_text(out / "report.txt", head, json.dumps(summary, sort_keys=True, indent=1) + "\n")
    print(f"mse_db={res.mse_db:.2f} corrupted_mse_db={res.corrupted_mse_db:.2f} "
          f"relative_db={res.relative_db:.2f} dropped_columns={len(res.dropped_columns)}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="INI file with defaults ([DEFAULT] and [<command>])")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    # no explicit default so the per-command set_defaults value applies
    p.add_argument("--out-dir", help="directory for output files")
    p.add_argument("-v", "--verbose", action="store_true")


def _pair(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--a", required=required, default=None, help="signal dictionary spec, e.g. dft:64")
    p.add_argument("--b", required=required, default=None, help="corruption dictionary spec, e.g. identity:64")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sparsecorrupt",
                                     description="Recovery of sparsely corrupted signals.")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = subs["coherence"] = sub.add_parser("coherence", help="coherence profile of a dictionary pair")
    _pair(p)
    p.set_defaults(func=cmd_coherence)

    p = subs["threshold"] = sub.add_parser("threshold", help="analytical recovery thresholds as CSV")
    _pair(p, required=False)
    p.add_argument("--case", required=True, choices=guarantees.CASE_IDS)
    for name in ("mu-a", "mu-b", "mu-m", "mu-d"):
        p.add_argument(f"--{name}", type=float, default=0.0 if name in ("mu-a", "mu-b") else None)
    p.add_argument("--ne-range", type=parse_range, default="1:64")
    p.add_argument("--nx-max", type=int, default=guarantees.DEFAULT_NX_MAX)
    p.set_defaults(func=cmd_threshold)

    p = subs["generate"] = sub.add_parser("generate", help="draw a random (x, e) instance and z")
    _pair(p)
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ne", type=int, required=True)
    p.add_argument("--complex", action="store_true", help="complex Gaussian nonzeros")
    p.set_defaults(func=cmd_generate, out_dir=".")

    p = subs["recover"] = sub.add_parser("recover", help="recover x and e from z")
    _pair(p)
    p.add_argument("--z", required=True, help="measurement CSV")
    p.add_argument("--case", required=True, choices=RECOVER_CASES)
    p.add_argument("--method", default="bp", choices=("bp", "omp"))
    p.add_argument("--x-support", help="CSV whose nonzeros define the known signal support")
    p.add_argument("--e-support", help="CSV whose nonzeros define the known error support")
    p.add_argument("--nx", type=int, default=None, help="signal sparsity (OMP iterations / search bound)")
    p.add_argument("--ne", type=int, default=None, help="error sparsity")
    p.add_argument("--truth", default=None, help="true x CSV, to report the relative error")
    p.add_argument("--max-iter", type=int, default=20000)
    p.set_defaults(func=cmd_recover, out_dir=".")

    p = subs["phase"] = sub.add_parser("phase", help="Monte-Carlo phase-transition grid")
    _pair(p)
    p.add_argument("--case", required=True, choices=ex.PIPELINE_CASES)
    p.add_argument("--method", default="omp", choices=("bp", "omp"))
    p.add_argument("--nx-range", type=parse_range, default="1:8")
    p.add_argument("--ne-range", type=parse_range, default="1:8")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--success-tol", type=float, default=ex.SUCCESS_TOL)
    p.add_argument("--level", type=float, default=0.5)
    p.add_argument("--diagonal", action="store_true", help="only run cells with nx = ne")
    p.add_argument("--complex", action="store_true")
    p.set_defaults(func=cmd_phase, out_dir=".")

    p = subs["inpaint"] = sub.add_parser("inpaint", help="inpainting experiment on a PGM image")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--image", help="square P5 PGM with power-of-2 side")
    src.add_argument("--synthetic", type=int, default=64, help="side of the synthetic test image")
    p.add_argument("--transform", default="dct", choices=("dct", "haar"))
    p.add_argument("--keep", type=float, default=0.15, help="fraction of coefficients kept")
    p.add_argument("--mask", default=None, help="PGM whose bright pixels mark corrupted positions")
    p.add_argument("--mask-fraction", type=float, default=0.188)
    p.add_argument("--case", default="caseII_E", choices=("caseI", "caseII_E", "caseIV"))
    p.add_argument("--max-iter", type=int, default=3000)
    p.set_defaults(func=cmd_inpaint, out_dir=".")

    for p in subs.values():
        _common(p)
    parser._subs = subs  # type: ignore[attr-defined]
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    cp = configparser.ConfigParser()
    try:
        with open(known.config, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {known.config}: {exc}") from exc
    command = next((a for a in rest if a in parser._subs), None)  # type: ignore[attr-defined]
    if command is None:
        return
    sub = parser._subs[command]  # type: ignore[attr-defined]
    section = cp[command] if cp.has_section(command) else cp.defaults()
    values = {k.replace("-", "_"): v for k, v in section.items()}
    for action in sub._actions:
        if action.dest in values:
            action.required = False
            if action.const is True and action.nargs == 0:  # store_true
                values[action.dest] = values[action.dest].strip().lower() in ("1", "true", "yes", "on")
    sub.set_defaults(**values)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        cols = getattr(exc, "columns", None)
        extra = f" (columns: {list(cols)})" if cols else ""
        print(f"numerical failure: {exc}{extra}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SparseCorruptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError) as exc:
        # ValueError here comes from malformed input files (PGM / CSV / matrix)
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
