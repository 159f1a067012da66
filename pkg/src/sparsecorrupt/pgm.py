"""Binary PGM (P5, 8-bit) reading and writing."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np

_TOKEN = re.compile(rb"\S+")


def _next_token(data: bytes, pos: int):
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        m = _TOKEN.match(data, pos)
        return (m.group(0), m.end()) if m else (None, pos)


def read_pgm(path) -> np.ndarray:
    """Return the image as floats in [0, 1] (row-major, shape ``(height, width)``)."""
    data = Path(path).read_bytes()
    pos = 0
    fields = []
    for _ in range(4):
        tok, pos = _next_token(data, pos)
        if tok is None:
            raise ValueError(f"{path}: truncated PGM header")
        fields.append(tok)
    magic, width, height, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM (magic {magic!r})")
    if not 0 < maxval < 256:
        raise ValueError(f"{path}: only 8-bit PGM is supported (maxval {maxval})")
    pos += 1  # single whitespace byte after maxval
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    return raw.reshape(height, width).astype(float) / maxval


def write_pgm(path, image: np.ndarray, comment: str | None = None) -> None:
    """Write an image with values in [0, 1] (clipped) as 8-bit P5."""
    img = np.clip(np.asarray(image, dtype=float), 0.0, 1.0)
    height, width = img.shape
    px = np.round(img * 255).astype(np.uint8)
    header = b"P5\n"
    if comment:
        for line in comment.splitlines():
            header += b"# " + line.encode("ascii", "replace") + b"\n"
    header += f"{width} {height}\n255\n".encode("ascii")
    Path(path).write_bytes(header + px.tobytes())
