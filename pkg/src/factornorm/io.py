"""Text formats for matrices and graphs, atomic writes, corpus lookup.

Matrix files start with ``rows cols`` and an optional ``kind=bool|int|real``
token. Boolean bodies are rows of ``0``/``1`` characters; integer and real
bodies are space-separated numbers. Graph files start with ``n m`` followed
by ``m`` lines ``a b`` (0-based).
"""

from __future__ import annotations

import logging
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .core import BooleanMatrix, Graph
from .errors import FormatError

log = logging.getLogger(__name__)

CORPUS_ENV = "FACTORNORM_CORPUS"
KINDS = ("bool", "int", "real")


def atomic_write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def corpus_dir() -> Path | None:
    d = os.environ.get(CORPUS_ENV)
    return Path(d) if d else None


def resolve_input(path) -> Path:
    """The path itself if it exists, else the same name under the corpus directory."""
    p = Path(path)
    if p.exists():
        return p
    d = corpus_dir()
    if d is not None and not p.is_absolute() and (d / p).exists():
        return d / p
    raise FormatError(f"input file not found: {path}")


def _lines(text: str):
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line and not line.startswith("#"):
            yield i, raw, line


def _int_token(tok: str, line: int, col: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise FormatError(f"expected an integer, got {tok!r}", line, col) from None
    return v


def _col_of(raw: str, k: int) -> int:
    """1-based column of the ``k``-th whitespace token in ``raw``."""
    pos, idx = 0, -1
    for _ in range(k + 1):
        while pos < len(raw) and raw[pos].isspace():
            pos += 1
        idx = pos
        while pos < len(raw) and not raw[pos].isspace():
            pos += 1
    return idx + 1


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


def format_matrix(M, kind: str | None = None) -> str:
    if isinstance(M, BooleanMatrix):
        arr, kind = M.bits, kind or "bool"
    else:
        arr = np.asarray(M)
        if kind is None:
            kind = "bool" if arr.dtype == bool else "int" if np.issubdtype(arr.dtype, np.integer) else "real"
    if arr.ndim != 2:
        raise FormatError("matrix must be two-dimensional")
    m, n = arr.shape
    if n == 0:
        arr = arr.reshape(0, 0)  # zero-width rows are implied by the header
    if kind == "bool":
        body = ["".join("1" if v else "0" for v in row) for row in np.asarray(arr, dtype=bool)]
        return "\n".join([f"{m} {n}", *body]) + "\n"
    if kind == "int":
        body = [" ".join(str(int(v)) for v in row) for row in arr]
        return "\n".join([f"{m} {n} kind=int", *body]) + "\n"
    if kind == "real":
        if not np.all(np.isfinite(arr)):
            raise FormatError("real matrix has nonfinite entries")
        body = [" ".join(repr(float(v)) for v in row) for row in arr]
        return "\n".join([f"{m} {n} kind=real", *body]) + "\n"
    raise FormatError(f"unknown matrix kind {kind!r}")


def parse_matrix(text: str):
    """``BooleanMatrix`` for Boolean files, ``int64``/``float64`` arrays otherwise."""
    it = _lines(text)
    try:
        ln, raw, head = next(it)
    except StopIteration:
        raise FormatError("empty matrix file", 1, 1) from None
    toks = head.split()
    if len(toks) not in (2, 3):
        raise FormatError("header must be 'rows cols [kind=...]'", ln, 1)
    m = _int_token(toks[0], ln, _col_of(raw, 0))
    n = _int_token(toks[1], ln, _col_of(raw, 1))
    if m < 0 or n < 0:
        raise FormatError("dimensions must be nonnegative", ln, 1)
    kind = "bool"
    if len(toks) == 3:
        if not toks[2].startswith("kind=") or toks[2][5:] not in KINDS:
            raise FormatError(f"bad kind token {toks[2]!r}", ln, _col_of(raw, 2))
        kind = toks[2][5:]
    rows = []
    expected = m if n else 0
    for ln, raw, line in it:
        if len(rows) == expected:
            raise FormatError(f"more than {expected} matrix rows", ln, 1)
        if kind == "bool":
            bad = next((c for c, ch in enumerate(line) if ch not in "01"), None)
            if bad is not None:
                raise FormatError(f"unexpected character {line[bad]!r}", ln, raw.index(line) + bad + 1)
            if len(line) != n:
                raise FormatError(f"row has {len(line)} entries, expected {n}", ln, 1)
            rows.append([ch == "1" for ch in line])
        else:
            parts = line.split()
            if len(parts) != n:
                raise FormatError(f"row has {len(parts)} entries, expected {n}", ln, 1)
            vals = []
            for c, tok in enumerate(parts):
                if kind == "int":
                    vals.append(_int_token(tok, ln, _col_of(raw, c)))
                else:
                    try:
                        v = float(tok)
                    except ValueError:
                        raise FormatError(f"expected a number, got {tok!r}", ln, _col_of(raw, c)) from None
                    if not math.isfinite(v):
                        raise FormatError(f"nonfinite entry {tok!r}", ln, _col_of(raw, c))
                    vals.append(v)
            rows.append(vals)
    if len(rows) != expected:
        raise FormatError(f"expected {m} matrix rows, found {len(rows)}", None, None)
    if kind == "bool":
        return BooleanMatrix(np.array(rows, dtype=bool).reshape(m, n))
    dtype = np.int64 if kind == "int" else float
    return np.array(rows, dtype=dtype).reshape(m, n)


def read_matrix(path):
    return parse_matrix(resolve_input(path).read_text(encoding="utf-8"))


def write_matrix(path, M, kind: str | None = None) -> Path:
    return atomic_write_text(path, format_matrix(M, kind))


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


def format_graph(G: Graph) -> str:
    return "\n".join([f"{G.n} {G.m}", *(f"{a} {b}" for a, b in G.edges)]) + "\n"


def parse_graph(text: str) -> Graph:
    it = _lines(text)
    try:
        ln, raw, head = next(it)
    except StopIteration:
        raise FormatError("empty graph file", 1, 1) from None
    toks = head.split()
    if len(toks) != 2:
        raise FormatError("header must be 'n m'", ln, 1)
    n = _int_token(toks[0], ln, _col_of(raw, 0))
    m = _int_token(toks[1], ln, _col_of(raw, 1))
    if n < 0 or m < 0:
        raise FormatError("header counts must be nonnegative", ln, 1)
    edges, seen, lines = [], set(), 0
    for ln, raw, line in it:
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("edge line must be 'a b'", ln, 1)
        a = _int_token(parts[0], ln, _col_of(raw, 0))
        b = _int_token(parts[1], ln, _col_of(raw, 1))
        for v, c in ((a, 0), (b, 1)):
            if not 0 <= v < n:
                raise FormatError(f"vertex {v} out of range for n={n}", ln, _col_of(raw, c))
        if a == b:
            raise FormatError(f"self-loop at vertex {a}", ln, _col_of(raw, 0))
        lines += 1
        key = (min(a, b), max(a, b))
        if key in seen:
            log.warning("duplicate edge %s at line %d dropped", key, ln)
            continue
        seen.add(key)
        edges.append(key)
    if lines != m:
        raise FormatError(f"header declares {m} edges, file has {lines}", None, None)
    return Graph(n, edges)


def read_graph(path) -> Graph:
    return parse_graph(resolve_input(path).read_text(encoding="utf-8"))


def write_graph(path, G: Graph) -> Path:
    return atomic_write_text(path, format_graph(G))
