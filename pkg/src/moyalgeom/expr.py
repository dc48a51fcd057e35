"""Expression trees over coordinates and parameters.

Nodes are immutable and hash-consed: structurally identical expressions are
the same Python object, so derivative and evaluation caches are shared
across everything that mentions a sub-expression.  Construction goes
through ``add``/``mul``/``power``/``func`` which keep a light normal form:

* sums are flat, constants folded, like terms collected;
* products are flat, numeric coefficients folded, ``x^a * x^b -> x^(a+b)``;
* negation is a coefficient of -1 and quotients are exponents of -1.

That normal form is *not* canonical (``sin(x)^2 + cos(x)^2`` stays as it
is); semantic equality is decided numerically by :func:`numeric_equal`.
"""
from __future__ import annotations

import functools
import gc
import math
import weakref
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

Number = Union[int, Fraction, float]

FUNCTIONS = ("sin", "cos", "tan", "sinh", "cosh", "exp", "ln", "sqrt")
NAMED_CONSTANTS = {"pi": math.pi}


class ExprError(Exception):
    pass


class ParseError(ExprError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UndeclaredSymbolError(ExprError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"undeclared symbol {name!r}")


class DomainError(ExprError, ArithmeticError):
    def __init__(self, message: str, subexpr: "Expr | None" = None, point=None):
        self.subexpr = subexpr
        self.point = point
        text = message
        if subexpr is not None:
            s = to_string(subexpr)
            if len(s) > 120:
                s = s[:117] + "..."
            text += f" in {s}"
        if point is not None:
            text += f" at {point}"
        super().__init__(text)


def _norm(x):
    # integral rationals are kept as int: cheaper to hash and multiply
    if type(x) is Fraction and x.denominator == 1:
        return x.numerator
    return x


def as_number(x) -> Number:
    if isinstance(x, Fraction):
        return _norm(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a number")
    if isinstance(x, int):
        return int(x)
    if isinstance(x, float):
        if x.is_integer() and abs(x) < 2**53:
            return int(x)
        return x
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return as_number(float(x))
    raise TypeError(f"not a number: {x!r}")


def _num_hash(x: Number) -> int:
    # numeric hashes are not salted, so node hashes stay reproducible
    if type(x) is Fraction:
        return hash((x.numerator, x.denominator))
    return hash(x)


def acyclic(fn):
    """Run ``fn`` with the cyclic garbage collector paused.

    Expression DAGs hold no reference cycles, so during long symbolic runs
    the collector only rescans live nodes; reference counting still frees
    everything.  Only the outermost decorated call toggles the collector.
    """
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if not gc.isenabled():
            return fn(*args, **kwargs)
        gc.disable()
        try:
            return fn(*args, **kwargs)
        finally:
            gc.enable()
    return wrapper


# Interning table.  Keys hold strong refs to children; values are weak so
# unreferenced expressions are collected.
_TABLE: "weakref.WeakValueDictionary[tuple, Expr]" = weakref.WeakValueDictionary()


class Expr:
    """Base node.  Use the module-level constructors, never ``__init__``."""

    __slots__ = ("_hash", "free", "_dcache", "__weakref__")

    # Nodes are interned, so the inherited identity ``==``/``hash`` are exact
    # and run at C speed; ``_hash`` is the reproducible key used for ordering.

    def __lt__(self, other):
        return self._hash < other._hash

    # arithmetic sugar
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return add(self, neg(_wrap(other)))

    def __rsub__(self, other):
        return add(_wrap(other), neg(self))

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __truediv__(self, other):
        return mul(self, power(_wrap(other), -1))

    def __rtruediv__(self, other):
        return mul(_wrap(other), power(self, -1))

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __repr__(self):
        return f"Expr({to_string(self)!r})"

    def __str__(self):
        return to_string(self)

    @property
    def is_zero(self) -> bool:
        return isinstance(self, Const) and self.value == 0


class Const(Expr):
    __slots__ = ("value",)


class Symbol(Expr):
    __slots__ = ("name",)


class Add(Expr):
    """``const + sum(coef * term)``; terms are non-constant, never Add, and
    never a Mul carrying its own coefficient."""

    __slots__ = ("const", "terms")


class Mul(Expr):
    """``coef * prod(base ** exponent)``."""

    __slots__ = ("coef", "factors")


class Func(Expr):
    __slots__ = ("name", "arg")


def _intern(key: tuple, cls, hash_, free, **attrs):
    node = _TABLE.get(key)
    if node is not None:
        return node
    node = object.__new__(cls)
    node._hash = hash_
    node.free = free
    node._dcache = None
    for k, v in attrs.items():
        object.__setattr__(node, k, v)
    _TABLE[key] = node
    return node


_EMPTY = frozenset()


def const(value) -> Const:
    v = as_number(value)
    h = hash((1, _num_hash(v)))
    return _intern(("c", type(v), v), Const, h, _EMPTY, value=v)


def symbol(name: str) -> Symbol:
    h = hash((2, zlib.crc32(name.encode())))
    return _intern(("s", name), Symbol, h, frozenset((name,)), name=name)


ZERO = const(0)
ONE = const(1)


def _wrap(x) -> Expr:
    if isinstance(x, Expr):
        return x
    return const(x)


def _free_union(nodes) -> frozenset:
    out = _EMPTY
    for n in nodes:
        if n.free:
            out = out | n.free if out else n.free
    return out


def _split_coef(e: Expr):
    """Return (coef, rest) with e == coef * rest."""
    if isinstance(e, Mul) and e.coef != 1:
        return e.coef, _make_mul(1, tuple(e.factors))
    return 1, e


def _make_add(c: Number, collected: dict) -> Expr:
    c = _norm(c)
    items = [(t, _norm(k)) for t, k in collected.items() if k != 0]
    if not items:
        return const(c)
    if c == 0 and len(items) == 1:
        t, k = items[0]
        if k == 1:
            return t
        return _scale(t, k)
    items.sort(key=lambda tk: tk[0]._hash)
    terms = tuple(items)
    h = hash((3, _num_hash(c), tuple((t._hash, _num_hash(k)) for t, k in terms)))
    return _intern(("a", type(c), c, terms), Add, h, _free_union(t for t, _ in terms),
                   const=c, terms=terms)


def _scale(t: Expr, k: Number) -> Expr:
    if isinstance(t, Mul):
        return _make_mul(t.coef * k, t.factors)
    return _make_mul(k, ((t, 1),))


def add(*args) -> Expr:
    c: Number = 0
    collected: dict = {}

    def put(term, k):
        collected[term] = collected.get(term, 0) + k

    for a in args:
        a = _wrap(a)
        if isinstance(a, Const):
            c += a.value
        elif isinstance(a, Add):
            c += a.const
            for t, k in a.terms:
                put(t, k)
        else:
            k, rest = _split_coef(a)
            if isinstance(rest, Add):
                c += k * rest.const
                for t, kk in rest.terms:
                    put(t, k * kk)
            else:
                put(rest, k)
    return _make_add(c, collected)


def neg(e: Expr) -> Expr:
    return mul(const(-1), e)


def _make_mul(coef: Number, factors) -> Expr:
    coef = _norm(coef)
    if coef == 0:
        return ZERO
    if not factors:
        return const(coef)
    if coef == 1 and len(factors) == 1 and factors[0][1] == 1:
        return factors[0][0]
    factors = tuple(sorted(((b, _norm(x)) for b, x in factors), key=lambda be: be[0]._hash))
    h = hash((4, _num_hash(coef), tuple((b._hash, _num_hash(x)) for b, x in factors)))
    return _intern(("m", type(coef), coef, factors), Mul, h,
                   _free_union(b for b, _ in factors), coef=coef, factors=factors)


def _is_int(x: Number) -> bool:
    return type(x) is int or (isinstance(x, Fraction) and x.denominator == 1)


def mul(*args) -> Expr:
    coef: Number = 1
    pairs = []
    for a in args:
        a = _wrap(a)
        if isinstance(a, Const):
            coef *= a.value
            if coef == 0:
                return ZERO
        elif isinstance(a, Mul):
            coef *= a.coef
            pairs.extend(a.factors)
        else:
            pairs.append((a, 1))
    return _mul_pairs(coef, pairs)


def _mul_pairs(coef: Number, pairs) -> Expr:
    """Product of ``coef`` and ``base^exponent`` pairs, merging equal bases."""
    acc: dict = {}
    for b, x in pairs:
        acc[b] = acc.get(b, 0) + x
    factors = []
    for b, x in acc.items():
        if x == 0:
            continue
        if isinstance(b, Const) and _is_int(x):
            coef *= _const_pow(b.value, x)
            continue
        factors.append((b, x))
    return _make_mul(coef, factors)


def _const_pow(v: Number, x: Fraction) -> Number:
    if v == 0 and x < 0:
        raise DomainError("division by zero", const(v))
    if isinstance(v, float):
        return v ** int(x)
    return _norm(Fraction(v) ** int(x))


def power(base, exponent) -> Expr:
    base = _wrap(base)
    x = as_number(exponent)
    if isinstance(x, float):
        x = _norm(Fraction(x).limit_denominator(10**6))
    if x == 0:
        return ONE
    if x == 1:
        return base
    if isinstance(base, Const):
        if _is_int(x):
            return const(_const_pow(base.value, x))
        if base.value == 1:
            return ONE
        return _make_mul(1, ((base, x),))
    if isinstance(base, Mul) and _is_int(x):
        coef = _const_pow(base.coef, x) if base.coef != 0 else 0
        return mul(const(coef), *(_make_mul(1, ((b, e * x),)) for b, e in base.factors))
    if isinstance(base, Mul) and base.coef == 1 and len(base.factors) == 1:
        b, e = base.factors[0]
        # (b^e)^x == b^(e x) whenever b^e is defined, except for even e with
        # fractional x (that would drop an absolute value).
        if not (_is_int(e) and e.numerator % 2 == 0):
            return power(b, e * x)
    return _make_mul(1, ((base, x),))


def func(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise ExprError(f"unknown function {name!r}")
    arg = _wrap(arg)
    if name == "sqrt":
        return power(arg, Fraction(1, 2))
    if isinstance(arg, Const) and arg.value == 0:
        if name in ("sin", "tan", "sinh"):
            return ZERO
        if name in ("cos", "cosh", "exp"):
            return ONE
    if name == "ln" and isinstance(arg, Const) and arg.value == 1:
        return ZERO
    h = hash((5, zlib.crc32(name.encode()), arg._hash))
    return _intern(("f", name, arg), Func, h, arg.free, name=name, arg=arg)


def sin(x): return func("sin", x)
def cos(x): return func("cos", x)
def tan(x): return func("tan", x)
def sinh(x): return func("sinh", x)
def cosh(x): return func("cosh", x)
def exp(x): return func("exp", x)
def ln(x): return func("ln", x)
def sqrt(x): return func("sqrt", x)


def symbols(names: str | Iterable[str]):
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    return tuple(symbol(n) for n in names)


# ---------------------------------------------------------------------------
# differentiation

def differentiate(f: Expr, coord: str) -> Expr:
    """Exact partial derivative; anything not named ``coord`` is constant."""
    f = _wrap(f)
    if coord not in f.free:
        return ZERO
    cache = f._dcache
    if cache is None:
        cache = f._dcache = {}
    else:
        hit = cache.get(coord)
        if hit is not None:
            return hit
    result = _diff(f, coord)
    cache[coord] = result
    return result


def _diff(f: Expr, v: str) -> Expr:
    if isinstance(f, Symbol):
        return ONE
    if isinstance(f, Add):
        return add(*(mul(const(k), differentiate(t, v)) for t, k in f.terms))
    if isinstance(f, Mul):
        parts = []
        fs = f.factors
        for i, (b, x) in enumerate(fs):
            db = differentiate(b, v)
            if db.is_zero:
                continue
            pairs = [(bb, xx) for j, (bb, xx) in enumerate(fs) if j != i]
            if x != 1:
                pairs.append((b, x - 1))
            coef = f.coef * x
            if isinstance(db, Const):
                coef *= db.value
            elif isinstance(db, Mul):
                coef *= db.coef
                pairs.extend(db.factors)
            else:
                pairs.append((db, 1))
            parts.append(_mul_pairs(coef, pairs))
        return add(*parts)
    if isinstance(f, Func):
        u = f.arg
        du = differentiate(u, v)
        name = f.name
        if name == "sin":
            outer = cos(u)
        elif name == "cos":
            outer = neg(sin(u))
        elif name == "tan":
            outer = power(cos(u), -2)
        elif name == "sinh":
            outer = cosh(u)
        elif name == "cosh":
            outer = sinh(u)
        elif name == "exp":
            outer = f
        elif name == "ln":
            outer = power(u, -1)
        else:  # pragma: no cover
            raise ExprError(f"no derivative rule for {name}")
        return mul(outer, du)
    raise ExprError(f"cannot differentiate {type(f).__name__}")


def derivative(f: Expr, coords: Sequence[str]) -> Expr:
    for c in coords:
        f = differentiate(f, c)
    return f


# ---------------------------------------------------------------------------
# substitution and simplification

def substitute(f: Expr, mapping: Mapping[str, Expr], allowed: Iterable[str] | None = None,
               memo: dict | None = None) -> Expr:
    """Simultaneous substitution of symbols by expressions.

    ``memo`` may be passed to reuse results across calls with the same
    mapping.
    """
    mapping = {k: _wrap(v) for k, v in mapping.items()}
    if allowed is not None:
        allowed = set(allowed)
        for v in mapping.values():
            bad = sorted(v.free - allowed)
            if bad:
                raise UndeclaredSymbolError(bad[0])
    keys = frozenset(mapping)
    if memo is None:
        memo = {}

    def go(e: Expr) -> Expr:
        if not (e.free & keys):
            return e
        hit = memo.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Symbol):
            out = mapping[e.name]
        elif isinstance(e, Add):
            out = add(const(e.const), *(mul(const(k), go(t)) for t, k in e.terms))
        elif isinstance(e, Mul):
            out = mul(const(e.coef), *(power(go(b), x) for b, x in e.factors))
        elif isinstance(e, Func):
            out = func(e.name, go(e.arg))
        else:  # pragma: no cover
            out = e
        memo[e] = out
        return out

    return go(_wrap(f))


def simplify(f: Expr) -> Expr:
    """Rebuild bottom-up through the normalizing constructors.

    Flattening, constant folding, like-term collection and exponent merging
    already happen at construction; this additionally folds functions of
    constant arguments and ``exp(ln(x))``-style inverse pairs.
    """
    memo: dict = {}

    def go(e: Expr) -> Expr:
        if isinstance(e, (Const, Symbol)):
            return e
        hit = memo.get(e)
        if hit is not None:
            return hit
        if isinstance(e, Add):
            out = add(const(e.const), *(mul(const(k), go(t)) for t, k in e.terms))
        elif isinstance(e, Mul):
            out = mul(const(e.coef), *(power(go(b), x) for b, x in e.factors))
        else:
            a = go(e.arg)
            if e.name == "exp" and isinstance(a, Func) and a.name == "ln":
                out = a.arg
            else:
                out = func(e.name, a)
        memo[e] = out
        return out

    return go(_wrap(f))


# ---------------------------------------------------------------------------
# inspection

def walk(f: Expr):
    """Yield every distinct node of the DAG once (children before parents)."""
    seen = set()
    stack = [(f, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            yield node
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        for ch in children(node):
            if ch not in seen:
                stack.append((ch, False))


def children(e: Expr):
    if isinstance(e, Add):
        return [t for t, _ in e.terms]
    if isinstance(e, Mul):
        return [b for b, _ in e.factors]
    if isinstance(e, Func):
        return [e.arg]
    return []


def dag_size(f: Expr) -> int:
    return sum(1 for _ in walk(f))


# ---------------------------------------------------------------------------
# evaluation

_NP_FUNCS = {
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "sinh": np.sinh,
    "cosh": np.cosh, "exp": np.exp, "ln": np.log,
}


def _fmt_point(env, idx):
    return {k: float(np.asarray(v).reshape(-1)[idx] if np.ndim(v) else v) for k, v in env.items()}


class Evaluator:
    """Vectorized evaluation of expressions at a fixed batch of points.

    ``env`` maps every symbol name to an array of shape ``(S,)`` (or a
    scalar).  Values of evaluated nodes are cached, so evaluating many
    expressions that share sub-expressions costs each shared node once.
    """

    def __init__(self, env: Mapping[str, object]):
        arrays = {k: np.atleast_1d(np.asarray(v, dtype=float)) for k, v in env.items()}
        self.size = max((a.shape[0] for a in arrays.values()), default=1)
        self.env = {k: np.broadcast_to(a, (self.size,)) for k, a in arrays.items()}
        self._cache: dict = {}

    def clear(self):
        self._cache.clear()

    def __call__(self, f: Expr) -> np.ndarray:
        f = _wrap(f)
        cache = self._cache
        hit = cache.get(f)
        if hit is not None:
            return hit
        # post-order walk that stops at already evaluated nodes
        stack = [(f, False)]
        while stack:
            node, expanded = stack.pop()
            if node in cache:
                continue
            if expanded:
                cache[node] = self._eval_node(node)
                continue
            stack.append((node, True))
            for ch in children(node):
                if ch not in cache:
                    stack.append((ch, False))
        return cache[f]

    def _fail(self, msg, node, mask):
        idx = int(np.flatnonzero(mask)[0]) if np.any(mask) else 0
        raise DomainError(msg, node, _fmt_point(self.env, idx))

    def _eval_node(self, node: Expr) -> np.ndarray:
        cache = self._cache
        n = self.size
        if isinstance(node, Const):
            return np.full(n, float(node.value))
        if isinstance(node, Symbol):
            try:
                return self.env[node.name]
            except KeyError:
                raise UndeclaredSymbolError(node.name) from None
        if isinstance(node, Add):
            out = np.full(n, float(node.const))
            for t, k in node.terms:
                out = out + float(k) * cache[t]
            return out
        if isinstance(node, Mul):
            out = np.full(n, float(node.coef))
            for b, x in node.factors:
                v = cache[b]
                if x < 0:
                    zero = v == 0
                    if np.any(zero):
                        self._fail("division by zero", b, zero)
                if _is_int(x):
                    xi = int(x)
                    out = out * (v ** xi if xi > 0 else 1.0 / v ** (-xi))
                else:
                    if x.denominator % 2 == 1:
                        # real odd root: sign(v)^p * |v|^(p/q)
                        p = np.sign(v) ** (x.numerator % 2) * np.abs(v) ** float(x)
                    else:
                        bad = v < 0
                        if np.any(bad):
                            self._fail("negative base under even root", b, bad)
                        p = v ** float(x)
                    out = out * p
            return out
        if isinstance(node, Func):
            v = cache[node.arg]
            if node.name == "ln":
                bad = v <= 0
                if np.any(bad):
                    self._fail("logarithm of non-positive value", node.arg, bad)
            with np.errstate(all="ignore"):
                out = _NP_FUNCS[node.name](v)
            bad = ~np.isfinite(out)
            if np.any(bad):
                self._fail("non-finite value", node, bad)
            return out
        raise ExprError(f"cannot evaluate {type(node).__name__}")  # pragma: no cover


def evaluate(f: Expr, point: Mapping[str, float]) -> float:
    """Evaluate at a single point; every symbol in ``f`` must be assigned."""
    f = _wrap(f)
    missing = sorted(f.free - set(point))
    if missing:
        raise UndeclaredSymbolError(missing[0])
    value = Evaluator(point)(f)[0]
    if not math.isfinite(value):
        raise DomainError("non-finite value", f, dict(point))
    return float(value)


# ---------------------------------------------------------------------------
# sampling-based equality

@dataclass(frozen=True)
class SampleBox:
    """Sampling domain for numerical identity checks.

    ``intervals`` maps each coordinate to ``(lower, upper)``; ``params``
    fixes every named parameter.  A point passes when either the absolute
    or the relative deviation is within ``tol``.
    """

    intervals: Mapping[str, tuple]
    params: Mapping[str, float] = field(default_factory=dict)
    samples: int = 20
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        for name, (lo, hi) in self.intervals.items():
            if not (math.isfinite(lo) and math.isfinite(hi)) or not lo < hi:
                raise ValueError(f"degenerate interval for {name}: [{lo}, {hi}]")
        for name, v in self.params.items():
            if not math.isfinite(v):
                raise ValueError(f"parameter {name} is not finite")
        if self.samples < 1:
            raise ValueError("samples must be positive")

    def points(self) -> dict:
        rng = np.random.default_rng(self.seed)
        env = {}
        for name in sorted(self.intervals):
            lo, hi = self.intervals[name]
            env[name] = rng.uniform(lo, hi, self.samples)
        for name, v in self.params.items():
            env[name] = np.full(self.samples, float(v))
        return env

    def evaluator(self) -> Evaluator:
        return Evaluator(self.points())

    def replace(self, **changes) -> "SampleBox":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class Comparison:
    passed: bool
    max_abs: float
    max_rel: float

    def __bool__(self):
        return self.passed


def compare_values(a: np.ndarray, b: np.ndarray, tol: float) -> Comparison:
    diff = np.abs(a - b)
    scale = np.maximum(np.abs(a), np.abs(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(scale > 0, diff / scale, 0.0)
    ok = (diff <= tol) | (rel <= tol)
    return Comparison(bool(np.all(ok)), float(diff.max(initial=0.0)), float(rel.max(initial=0.0)))


def compare(f: Expr, g: Expr, box: SampleBox, evaluator: Evaluator | None = None) -> Comparison:
    ev = evaluator if evaluator is not None else box.evaluator()
    return compare_values(ev(_wrap(f)), ev(_wrap(g)), box.tol)


def numeric_equal(f: Expr, g: Expr, box: SampleBox, evaluator: Evaluator | None = None) -> bool:
    return compare(f, g, box, evaluator).passed


# ---------------------------------------------------------------------------
# printing

def _fmt_number(x: Number) -> str:
    if isinstance(x, (int, Fraction)):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _fmt_exponent(x: Fraction) -> str:
    if x.denominator == 1 and x > 0:
        return str(x.numerator)
    return f"({_fmt_number(x)})"


# binding strength: sum 1, product 2, power/atom 3
def _fmt(e: Expr, memo: dict) -> tuple:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Const):
        s = _fmt_number(e.value)
        v = e.value
        out = (s, 1 if (v < 0 or "/" in s or "e" in s) else 3)
    elif isinstance(e, Symbol):
        out = (e.name, 3)
    elif isinstance(e, Func):
        out = (f"{e.name}({_fmt(e.arg, memo)[0]})", 3)
    elif isinstance(e, Add):
        parts = []
        for t, k in e.terms:
            parts.append(_fmt_term(k, t, memo))
        if e.const != 0:
            parts.insert(0, _fmt_number(e.const))
        s = parts[0]
        for p in parts[1:]:
            s += " - " + p[1:] if p.startswith("-") else " + " + p
        out = (s, 1)
    else:
        out = _fmt_mul(e, memo)
    memo[e] = out
    return out


def _fmt_term(k: Number, t: Expr, memo) -> str:
    body, prec = _fmt(t, memo)
    if prec < 2:
        body = f"({body})"
    if k == 1:
        return body
    if k == -1:
        return "-" + body
    return f"{_fmt_number(k)}*{body}"


def _fmt_factor(b: Expr, x: Fraction, memo) -> str:
    body, prec = _fmt(b, memo)
    if x == Fraction(1, 2):
        return f"sqrt({body})"
    if prec < 3:
        body = f"({body})"
    if x == 1:
        return body
    return f"{body}^{_fmt_exponent(x)}"


def _fmt_mul(e: Mul, memo) -> tuple:
    num = [(b, x) for b, x in e.factors if x > 0]
    den = [(b, -x) for b, x in e.factors if x < 0]
    pieces = [_fmt_factor(b, x, memo) for b, x in num]
    coef = e.coef
    sign = ""
    if coef < 0:
        sign = "-"
        coef = -coef
    if coef != 1 or not pieces:
        pieces.insert(0, _fmt_number(coef) if not (isinstance(coef, Fraction) and coef.denominator != 1)
                      else f"({_fmt_number(coef)})")
    s = "*".join(pieces)
    if den:
        dens = [_fmt_factor(b, x, memo) for b, x in den]
        d = dens[0] if len(dens) == 1 else "(" + "*".join(dens) + ")"
        s = f"{s}/{d}"
    return (sign + s, 1 if sign else 2)


def to_string(e: Expr) -> str:
    """Render in the input grammar; ``parse(to_string(e))`` reproduces e."""
    return _fmt(_wrap(e), {})[0]


# ---------------------------------------------------------------------------
# parsing

class _Parser:
    def __init__(self, text: str, names: set | None):
        self.text = text
        self.names = names
        self.pos = 0

    def error(self, msg, pos=None):
        raise ParseError(msg, self.pos if pos is None else pos, self.text)

    def skip(self):
        t = self.text
        while self.pos < len(t) and t[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch):
        if self.peek() != ch:
            found = self.peek() or "end of input"
            self.error(f"expected {ch!r}, found {found!r}")
        self.pos += 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.peek():
            self.error(f"unexpected {self.peek()!r}")
        return e

    def expr(self) -> Expr:
        terms = [self.term()]
        while self.peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            t = self.term()
            terms.append(t if op == "+" else neg(t))
        return add(*terms) if len(terms) > 1 else terms[0]

    def term(self) -> Expr:
        e = self.factor()
        while self.peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            f = self.factor()
            e = mul(e, f) if op == "*" else mul(e, power(f, -1))
        return e

    def factor(self) -> Expr:
        if self.peek() == "-":
            self.pos += 1
            return neg(self.factor())
        if self.peek() == "+":
            self.pos += 1
            return self.factor()
        base = self.atom()
        if self.peek() == "^":
            self.pos += 1
            return power(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        if self.peek() == "(":
            self.pos += 1
            x = self.signed_rational(allow_slash=True)
            self.expect(")")
            return x
        return self.signed_rational(allow_slash=False)

    def signed_rational(self, allow_slash: bool) -> Fraction:
        sign = 1
        if self.peek() in ("-", "+"):
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        start = self.pos
        if not self.peek().isdigit():
            self.error("exponent must be a rational constant", start)
        num = self.number_literal()
        if allow_slash and self.peek() == "/":
            self.pos += 1
            if not self.peek().isdigit():
                self.error("exponent must be a rational constant")
            den = self.number_literal()
            if den == 0:
                self.error("zero denominator in exponent")
            num = num / den
        return sign * num

    def number_literal(self) -> Fraction:
        self.skip()
        t = self.text
        start = self.pos
        i = start
        while i < len(t) and t[i].isdigit():
            i += 1
        if i < len(t) and t[i] == ".":
            i += 1
            while i < len(t) and t[i].isdigit():
                i += 1
        if i < len(t) and t[i] in "eE":
            j = i + 1
            if j < len(t) and t[j] in "+-":
                j += 1
            if j < len(t) and t[j].isdigit():
                while j < len(t) and t[j].isdigit():
                    j += 1
                i = j
        self.pos = i
        return Fraction(t[start:i])

    def atom(self) -> Expr:
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        if ch.isdigit() or ch == ".":
            return const(self.number_literal())
        if ch.isalpha():
            t = self.text
            i = self.pos
            while i < len(t) and (t[i].isalnum() or t[i] == "_"):
                i += 1
            name = t[start:i]
            self.pos = i
            if self.peek() == "(":
                if name not in FUNCTIONS:
                    self.error(f"unknown function {name!r}", start)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                return func(name, arg)
            if name in NAMED_CONSTANTS and (self.names is None or name not in self.names):
                return const(NAMED_CONSTANTS[name])
            if name in FUNCTIONS:
                self.error(f"function {name!r} needs an argument", start)
            if self.names is not None and name not in self.names:
                raise UndeclaredSymbolError(name)
            return symbol(name)
        if not ch:
            self.error("unexpected end of input")
        self.error(f"unexpected {ch!r}")


def parse(text: str, names: Iterable[str] | None = None) -> Expr:
    """Parse ``text``; when ``names`` is given every identifier must be in it.

    Exponents are rational constants: ``x^2``, ``x^-1``, ``x^(1/2)``.
    """
    return _Parser(text, set(names) if names is not None else None).parse()
