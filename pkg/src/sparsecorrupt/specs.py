"""Dictionary spec mini-language: ``name:size[:key=value...]``.

Examples::

    dft:64   identity:64   hadamard:64   dct2d:8   haar2d:8:octaves=3
    etf:64x80:seed=7            first half of a 64 x 160 approximate ETF
    etf-partner:64x80:seed=7    second half of the same frame
    etf-partner                 partner of the ``etf`` spec it is paired with
    file:path/to/matrix.txt     matrix file (see dictionaries.save_matrix)
"""

from __future__ import annotations

from functools import lru_cache

from . import dictionaries as dl
from .errors import PreconditionError

ETF_DEFAULT_ITER = 5000


def _params(parts: list[str]) -> dict[str, str]:
    out = {}
    for p in parts:
        if "=" not in p:
            raise PreconditionError(f"expected key=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _etf_dims(size: str) -> tuple[int, int]:
    try:
        m, n = size.lower().split("x")
        return int(m), int(n)
    except ValueError:
        raise PreconditionError(f"etf size must look like MxN, got {size!r}") from None


@lru_cache(maxsize=32)
def _etf_halves(M: int, N: int, seed: int, iterations: int):
    return dl.etf_pair(M, N, iterations, seed)


def parse_dict_spec(spec: str, partner_of: str | None = None) -> dl.Dictionary:
    spec = spec.strip()
    if spec.startswith("file:"):
        return dl.load_dictionary(spec[5:])
    parts = spec.split(":")
    name = parts[0].lower()
    if name == "etf-partner" and len(parts) == 1:
        if partner_of is None or not partner_of.lower().startswith("etf:"):
            raise PreconditionError("bare 'etf-partner' must be paired with an 'etf:MxN...' spec")
        parts = ["etf-partner"] + partner_of.split(":")[1:]
    if len(parts) < 2:
        raise PreconditionError(f"dictionary spec {spec!r} needs a size")
    size, params = parts[1], _params(parts[2:])
    if name in ("etf", "etf-partner"):
        M, N = _etf_dims(size)
        seed = int(params.get("seed", 0))
        iters = int(params.get("iter", ETF_DEFAULT_ITER))
        halves = _etf_halves(M, N, seed, iters)
        return halves[0] if name == "etf" else halves[1]
    try:
        n = int(size)
    except ValueError:
        raise PreconditionError(f"size must be an integer in {spec!r}") from None
    if name == "dft":
        return dl.build_dft(n)
    if name in ("identity", "eye"):
        return dl.build_identity(n)
    if name == "hadamard":
        return dl.build_hadamard(n)
    if name == "dct2d":
        return dl.build_dct2d(n)
    if name == "haar2d":
        return dl.build_haar2d(n, int(params.get("octaves", 3)))
    raise PreconditionError(f"unknown dictionary {name!r}")


@lru_cache(maxsize=16)
def dictionary_pair(a_spec: str, b_spec: str) -> tuple[dl.Dictionary, dl.Dictionary]:
    A = parse_dict_spec(a_spec)
    B = parse_dict_spec(b_spec, partner_of=a_spec)
    if A.rows != B.rows:
        raise PreconditionError(f"{a_spec} and {b_spec} have different row counts")
    return A, B
