"""INI-style specification files for embeddings and coordinate changes.

Sections and keys (``#`` starts a comment)::

    [algebra]
    coords = r, theta, phi          # coordinate names, in order
    params = m                      # optional parameter names
    theta  = 0 0 0; 0 0 1; 0 -1 0   # rows separated by ';' or new lines
    order  = 3                      # truncation order N (optional, default 3)
    seed   = 0                      # sampling seed (optional, default 0)

    [box]
    r = 3, 10                       # one 'lower, upper' interval per coordinate
    theta = 0.3, pi - 0.3           # bounds may be constant expressions
    m = 1                           # one value per parameter
    samples = 20                    # optional
    tol = 1e-8                      # optional

    [embedding]
    eta = 1 1 1 1                   # optional signature, default all +1
    X = ...                         # m comma-separated components, or
    frame =                         # n lines of m comma-separated entries
        ...

    [diffeo]                        # optional
    coords  = u1, u2, u3
    forward = r, theta + phi, theta - phi     # u^i in terms of the old coords
    inverse = u1, (u2 + u3)/2, (u2 - u3)/2    # old coords in terms of u

    [diffeo-box]                    # intervals for the new coordinates
    u1 = 3, 10
"""
from __future__ import annotations

import configparser
import hashlib
import re
from dataclasses import dataclass

from . import expr as ex
from .expr import SampleBox
from .geometry.embedded import EmbeddingSpec
from .geometry.transform import DiffeoSpec

RESERVED_BOX_KEYS = ("samples", "tol")


class SpecError(ValueError):
    """A malformed specification file; carries the offending line if known."""

    def __init__(self, message: str, line: int | None = None, source: str = "<spec>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class SpecFile:
    spec: EmbeddingSpec
    diffeo: DiffeoSpec | None
    seed: int
    text: str
    source: str

    @property
    def digest(self) -> str:
        return spec_hash(self.text)


def spec_hash(text: str) -> str:
    """SHA-256 of the text with comments, blank lines and edge whitespace removed."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            lines.append(line.strip())
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


_KEY_RE = re.compile(r"^([^\s=:#;\[][^=:]*?)\s*[=:]")
_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")


def _line_index(text: str) -> dict:
    """Map (section, key) and (section, None) to 1-based line numbers."""
    index = {}
    section = None
    for no, raw in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(raw)
        if m:
            section = m.group(1).strip()
            index.setdefault((section, None), no)
            continue
        m = _KEY_RE.match(raw)
        if m and section is not None:
            index.setdefault((section, m.group(1).strip()), no)
    return index


class _Reader:
    def __init__(self, text: str, source: str):
        self.text = text
        self.source = source
        self.lines = _line_index(text)
        cp = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",),
                                       interpolation=None, strict=True)
        cp.optionxform = str
        try:
            cp.read_string(text, source=source)
        except configparser.Error as err:
            line = getattr(err, "lineno", None)
            msg = getattr(err, "message", str(err)).splitlines()[0]
            raise SpecError(msg, line, source) from None
        self.cp = cp

    def error(self, msg, section, key=None):
        line = self.lines.get((section, key)) or self.lines.get((section, None))
        return SpecError(msg, line, self.source)

    def has(self, section, key=None):
        if key is None:
            return self.cp.has_section(section)
        return self.cp.has_option(section, key)

    def get(self, section, key, default=None):
        if not self.cp.has_section(section):
            if default is not None:
                return default
            raise self.error(f"missing section [{section}]", section)
        if not self.cp.has_option(section, key):
            if default is not None:
                return default
            raise self.error(f"missing key '{key}' in [{section}]", section)
        return self.cp.get(section, key).strip()

    def number(self, section, key, text=None):
        text = self.get(section, key) if text is None else text
        try:
            e = ex.parse(text, ())
        except ex.ExprError as err:
            raise self.error(f"bad number {text!r} for '{key}': {err}", section, key) from None
        if not isinstance(e, ex.Const):
            raise self.error(f"'{key}' must be a constant, got {text!r}", section, key)
        return e.value

    def names(self, section, key, default=None):
        raw = self.get(section, key, default)
        if raw == "":
            return ()
        names = tuple(x.strip() for x in raw.split(","))
        for n in names:
            if not re.fullmatch(r"[A-Za-z][A-Za-z0-9_]*", n):
                raise self.error(f"bad name {n!r} in '{key}'", section, key)
            if n in ex.FUNCTIONS or n in ex.NAMED_CONSTANTS:
                raise self.error(f"name {n!r} is reserved", section, key)
        if len(set(names)) != len(names):
            raise self.error(f"duplicate names in '{key}'", section, key)
        return names

    def interval(self, section, key):
        parts = [p.strip() for p in self.get(section, key).split(",")]
        if len(parts) != 2:
            raise self.error(f"'{key}' needs 'lower, upper'", section, key)
        lo, hi = (float(self.number(section, key, p)) for p in parts)
        if not lo < hi:
            raise self.error(f"empty interval for '{key}': [{lo}, {hi}]", section, key)
        return lo, hi


def _rows(raw: str):
    out = []
    for chunk in re.split(r"[;\n]", raw):
        chunk = chunk.strip()
        if chunk:
            out.append(chunk)
    return out


def parse_spec(text: str, source: str = "<spec>", order: int | None = None,
               seed: int | None = None) -> SpecFile:
    """Parse a specification; ``order``/``seed`` override the file values."""
    r = _Reader(text, source)
    A = "algebra"
    coords = r.names(A, "coords")
    if not coords:
        raise r.error("no coordinates declared", A, "coords")
    params = r.names(A, "params", default="") if r.has(A, "params") else ()
    clash = set(coords) & set(params)
    if clash:
        raise r.error(f"{sorted(clash)[0]!r} is both a coordinate and a parameter", A, "params")
    n = len(coords)
    rows = _rows(r.get(A, "theta"))
    if len(rows) != n:
        raise r.error(f"theta needs {n} rows, got {len(rows)}", A, "theta")
    theta = []
    for row in rows:
        vals = row.replace(",", " ").split()
        if len(vals) != n:
            raise r.error(f"theta row {row!r} needs {n} entries", A, "theta")
        theta.append([r.number(A, "theta", v) for v in vals])
    for i in range(n):
        for j in range(n):
            if theta[i][j] != -theta[j][i]:
                raise r.error(f"theta is not skew-symmetric at ({i + 1}, {j + 1})", A, "theta")
    if order is None:
        order = r.number(A, "order") if r.has(A, "order") else 3
    if int(order) != order or not 0 <= order <= 5:
        raise r.error(f"order must be an integer in 0..5, got {order}", A, "order")
    if seed is None:
        seed = r.number(A, "seed") if r.has(A, "seed") else 0
    if int(seed) != seed:
        raise r.error("seed must be an integer", A, "seed")
    order, seed = int(order), int(seed)

    box = _box(r, "box", coords, params, seed)

    E = "embedding"
    if not r.has(E):
        raise r.error("missing section [embedding]", E)
    has_x, has_frame = r.has(E, "X"), r.has(E, "frame")
    if has_x == has_frame:
        raise r.error("[embedding] needs exactly one of 'X' or 'frame'", E)
    names = coords + params

    def expr_list(key, raw):
        out = []
        for piece in raw.split(","):
            piece = piece.strip()
            try:
                out.append(ex.parse(piece, names))
            except ex.ParseError as err:
                raise r.error(f"in '{key}': {err} of {piece!r}", E, key) from None
            except ex.UndeclaredSymbolError as err:
                raise r.error(f"in '{key}': {err}", E, key) from None
        return out

    embedding = frame = None
    if has_x:
        embedding = expr_list("X", r.get(E, "X"))
        m = len(embedding)
    else:
        frame = [expr_list("frame", row) for row in _rows(r.get(E, "frame"))]
        if len(frame) != n:
            raise r.error(f"frame needs {n} rows, got {len(frame)}", E, "frame")
        if len({len(row) for row in frame}) != 1:
            raise r.error("frame rows differ in length", E, "frame")
        m = len(frame[0])
    if m <= n:
        raise r.error(f"ambient dimension {m} must exceed the number of coordinates {n}", E)
    eta = None
    if r.has(E, "eta"):
        try:
            eta = [int(v) for v in r.get(E, "eta").replace(",", " ").split()]
        except ValueError:
            raise r.error("eta entries must be +1 or -1", E, "eta") from None
        if len(eta) != m or any(v not in (1, -1) for v in eta):
            raise r.error(f"eta needs {m} entries of +1/-1", E, "eta")
    try:
        spec = EmbeddingSpec(coords, theta, box, params, order, embedding=embedding, frame=frame,
                             eta=eta, name=source)
    except ValueError as err:
        raise r.error(str(err), E) from None

    diffeo = None
    if r.has("diffeo"):
        D = "diffeo"
        ucoords = r.names(D, "coords")
        if len(ucoords) != n:
            raise r.error(f"[diffeo] needs {n} coordinates", D, "coords")
        if set(ucoords) & set(params):
            raise r.error("new coordinates clash with parameters", D, "coords")
        fwd = _expr_row(r, D, "forward", names, n)
        inv = _expr_row(r, D, "inverse", ucoords + params, n)
        if not r.has("diffeo-box"):
            raise r.error("[diffeo] needs a [diffeo-box] section", D)
        ubox = _box(r, "diffeo-box", ucoords, (), seed, inherit=box.params)
        diffeo = DiffeoSpec(ucoords, fwd, inv, ubox)
    return SpecFile(spec, diffeo, seed, text, source)


def _expr_row(r: _Reader, section, key, names, n):
    raw = [p.strip() for p in r.get(section, key).split(",")]
    if len(raw) != n:
        raise r.error(f"'{key}' needs {n} expressions", section, key)
    try:
        return [ex.parse(p, names) for p in raw]
    except ex.ExprError as err:
        raise r.error(f"in '{key}': {err}", section, key) from None


def _box(r: _Reader, section, coords, params, seed, inherit=None) -> SampleBox:
    if not r.has(section):
        raise r.error(f"missing section [{section}]", section)
    for c in coords:
        if c in RESERVED_BOX_KEYS:
            raise r.error(f"coordinate name {c!r} is reserved in [{section}]", section)
    intervals = {c: r.interval(section, c) for c in coords}
    values = dict(inherit or {})
    for p in params:
        values[p] = float(r.number(section, p))
    known = set(coords) | set(params) | set(RESERVED_BOX_KEYS)
    for key in r.cp.options(section):
        if key not in known:
            raise r.error(f"unknown key '{key}' in [{section}]", section, key)
    samples = int(r.number(section, "samples")) if r.has(section, "samples") else 20
    tol = float(r.number(section, "tol")) if r.has(section, "tol") else 1e-8
    if samples < 1 or not tol > 0:
        raise r.error("samples must be positive and tol > 0", section)
    return SampleBox(intervals, values, samples, tol, seed)


def load_spec(path: str, order: int | None = None, seed: int | None = None) -> SpecFile:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_spec(text, path, order, seed)
