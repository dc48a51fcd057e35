"""The Moyal algebra truncated at a fixed order in hbar.

Elements are lists of coefficient expressions ``c_0 .. c_N`` standing for
``sum c_k hbar^k``.  The star product is

    f * g = sum_k hbar^k / k!  theta_{i1 j1} ... theta_{ik jk}
            (d_{i1..ik} f) (d_{j1..jk} g)

with no factor of ``i`` or ``1/2`` in the exponent, i.e. a real deformation.
Users wanting the physics normalisation rescale ``theta``.
"""
from __future__ import annotations

from fractions import Fraction
from math import factorial
from typing import Iterable, Sequence

from . import expr as ex
from .expr import Expr, SampleBox


class ContextMismatch(ValueError):
    pass


def _exact(x):
    if isinstance(x, float) and not x.is_integer():
        # keep decimal inputs such as 0.5 exact
        return Fraction(repr(x))
    return ex.as_number(x)


class AlgebraContext:
    """Coordinates, parameters, the constant skew matrix and truncation order."""

    def __init__(self, coords: Sequence[str], theta, order: int = 3,
                 params: Sequence[str] = (), box: SampleBox | None = None):
        self.coords = tuple(coords)
        self.params = tuple(params)
        n = len(self.coords)
        if n == 0:
            raise ValueError("at least one coordinate is required")
        if len(set(self.coords + self.params)) != n + len(self.params):
            raise ValueError("coordinate and parameter names must be distinct")
        theta = [[_exact(v) for v in row] for row in theta]
        if len(theta) != n or any(len(row) != n for row in theta):
            raise ValueError(f"theta must be {n}x{n}")
        for i in range(n):
            for j in range(n):
                if theta[i][j] != -theta[j][i]:
                    raise ValueError(f"theta is not skew-symmetric at ({i + 1}, {j + 1})")
        if int(order) != order or order < 0:
            raise ValueError("order must be a non-negative integer")
        self.theta = tuple(tuple(row) for row in theta)
        self.order = int(order)
        self.box = box
        self.names = self.coords + self.params
        self._pairs = [(self.coords[i], self.coords[j], theta[i][j])
                       for i in range(n) for j in range(n) if theta[i][j] != 0]
        self._bidiff = [self._bidiff_terms(k) for k in range(self.order + 1)]
        self._evaluator = None

    def _bidiff_terms(self, k: int):
        """Terms of P^k / k!, with P(f, g) = theta_ij d_i f d_j g.

        Built by applying P k times; derivative multi-indices are kept sorted
        because partial derivatives commute, which merges equal terms.
        """
        terms = {((), ()): Fraction(1)}
        for _ in range(k):
            nxt: dict = {}
            for (I, J), c in terms.items():
                for a, b, t in self._pairs:
                    key = (tuple(sorted(I + (a,))), tuple(sorted(J + (b,))))
                    nxt[key] = nxt.get(key, 0) + c * t
            terms = {key: c for key, c in nxt.items() if c != 0}
        scale = Fraction(1, factorial(k))
        return [(I, J, c * scale) for (I, J), c in sorted(terms.items())]

    # --- construction helpers -------------------------------------------
    @property
    def n(self) -> int:
        return len(self.coords)

    def coord_index(self, i) -> int:
        if isinstance(i, str):
            return self.coords.index(i)
        if not 0 <= i < self.n:
            raise IndexError(f"coordinate index {i} out of range")
        return i

    def parse(self, text: str) -> Expr:
        return ex.parse(text, self.names)

    def check_expr(self, f: Expr) -> Expr:
        bad = sorted(f.free - set(self.names))
        if bad:
            raise ex.UndeclaredSymbolError(bad[0])
        return f

    def lift(self, f) -> "MoyalElement":
        if isinstance(f, str):
            f = self.parse(f)
        f = self.check_expr(ex._wrap(f))
        return MoyalElement(self, (f,) + (ex.ZERO,) * self.order)

    def series(self, coeffs: Iterable) -> "MoyalElement":
        coeffs = [self.parse(c) if isinstance(c, str) else self.check_expr(ex._wrap(c)) for c in coeffs]
        if len(coeffs) > self.order + 1:
            coeffs = coeffs[: self.order + 1]
        coeffs += [ex.ZERO] * (self.order + 1 - len(coeffs))
        return MoyalElement(self, tuple(coeffs))

    def zero(self) -> "MoyalElement":
        return MoyalElement(self, (ex.ZERO,) * (self.order + 1))

    def one(self) -> "MoyalElement":
        return self.lift(ex.ONE)

    def hbar(self) -> "MoyalElement":
        return self.series([ex.ZERO, ex.ONE])

    @property
    def evaluator(self) -> ex.Evaluator:
        """Shared cached evaluator on the context's sample box."""
        if self.box is None:
            raise ValueError("context has no sample box")
        if self._evaluator is None:
            self._evaluator = self.box.evaluator()
        return self._evaluator

    def with_box(self, box: SampleBox) -> "AlgebraContext":
        return AlgebraContext(self.coords, self.theta, self.order, self.params, box)

    def is_central_coord(self, name: str) -> bool:
        i = self.coords.index(name)
        return all(v == 0 for v in self.theta[i])


_SCALARS = (int, float, Fraction, Expr, str)


class MoyalElement:
    """``sum_k coeffs[k] hbar^k`` modulo ``hbar^(N+1)``."""

    __slots__ = ("ctx", "coeffs")

    def __init__(self, ctx: AlgebraContext, coeffs: tuple):
        if len(coeffs) != ctx.order + 1:
            raise ValueError(f"expected {ctx.order + 1} coefficients, got {len(coeffs)}")
        self.ctx = ctx
        self.coeffs = tuple(coeffs)

    def _same(self, other: "MoyalElement"):
        if not isinstance(other, MoyalElement):
            raise TypeError(f"expected MoyalElement, got {type(other).__name__}")
        if other.ctx is not self.ctx:
            raise ContextMismatch("elements belong to different algebra contexts")

    def _coerce(self, other) -> "MoyalElement":
        if isinstance(other, MoyalElement):
            self._same(other)
            return other
        return self.ctx.lift(other)

    def __getitem__(self, k: int) -> Expr:
        return self.coeffs[k]

    def __add__(self, other):
        other = self._coerce(other)
        return MoyalElement(self.ctx, tuple(ex.add(a, b) for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return MoyalElement(self.ctx, tuple(ex.add(a, ex.neg(b)) for a, b in zip(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return MoyalElement(self.ctx, tuple(ex.neg(c) for c in self.coeffs))

    def __mul__(self, other):
        if isinstance(other, MoyalElement):
            return star(self, other)
        if isinstance(other, _SCALARS):
            return scale(other, self)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, _SCALARS):
            return scale(other, self)
        return NotImplemented

    def shift(self, k: int = 1) -> "MoyalElement":
        """Multiply by ``hbar^k``."""
        N = self.ctx.order
        return MoyalElement(self.ctx, (ex.ZERO,) * min(k, N + 1) + self.coeffs[: max(N + 1 - k, 0)])

    def partial(self, i) -> "MoyalElement":
        return partial(self, i)

    def bar(self) -> "MoyalElement":
        return bar(self)

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def to_strings(self) -> list:
        return [ex.to_string(c) for c in self.coeffs]

    def __repr__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if c.is_zero:
                continue
            s = ex.to_string(c)
            parts.append(s if k == 0 else f"({s})*hbar^{k}")
        return "MoyalElement(" + (" + ".join(parts) or "0") + ")"


def lift(f, ctx: AlgebraContext) -> MoyalElement:
    return ctx.lift(f)


def add(f: MoyalElement, g: MoyalElement) -> MoyalElement:
    return f + g


def scale(a, f: MoyalElement) -> MoyalElement:
    """Coefficientwise scaling by a real number or an hbar-free expression."""
    if isinstance(a, MoyalElement):
        raise TypeError("use star() for products of algebra elements")
    if isinstance(a, str):
        a = f.ctx.parse(a)
    a = ex._wrap(a)
    f.ctx.check_expr(a)
    return MoyalElement(f.ctx, tuple(ex.mul(a, c) for c in f.coeffs))


def star(f: MoyalElement, g: MoyalElement) -> MoyalElement:
    f._same(g)
    ctx = f.ctx
    N = ctx.order
    out = [[] for _ in range(N + 1)]
    for a, fa in enumerate(f.coeffs):
        if fa.is_zero:
            continue
        for b in range(N + 1 - a):
            gb = g.coeffs[b]
            if gb.is_zero:
                continue
            for k in range(N + 1 - a - b):
                for I, J, c in ctx._bidiff[k]:
                    df = ex.derivative(fa, I)
                    if df.is_zero:
                        continue
                    dg = ex.derivative(gb, J)
                    if dg.is_zero:
                        continue
                    out[a + b + k].append(ex.mul(ex.const(c), df, dg))
    return MoyalElement(ctx, tuple(ex.add(*terms) for terms in out))


def commutator(f: MoyalElement, g: MoyalElement) -> MoyalElement:
    return star(f, g) - star(g, f)


def partial(f: MoyalElement, i) -> MoyalElement:
    name = f.ctx.coords[f.ctx.coord_index(i)]
    return MoyalElement(f.ctx, tuple(ex.differentiate(c, name) for c in f.coeffs))


def bar(f: MoyalElement) -> MoyalElement:
    """``sum f_k hbar^k -> sum (-1)^k f_k hbar^k``."""
    return MoyalElement(f.ctx, tuple(ex.neg(c) if k % 2 else c for k, c in enumerate(f.coeffs)))


def compare(f: MoyalElement, g: MoyalElement, box: SampleBox | None = None) -> ex.Comparison:
    """Worst coefficientwise comparison of two series."""
    f._same(g)
    ctx = f.ctx
    if box is None or box is ctx.box:
        box, ev = ctx.box, ctx.evaluator
    else:
        ev = box.evaluator()
    passed, max_abs, max_rel = True, 0.0, 0.0
    for a, b in zip(f.coeffs, g.coeffs):
        if a is b:
            continue
        c = ex.compare(a, b, box, ev)
        passed &= c.passed
        max_abs = max(max_abs, c.max_abs)
        max_rel = max(max_rel, c.max_rel)
    return ex.Comparison(passed, max_abs, max_rel)


def series_equal(f: MoyalElement, g: MoyalElement, box: SampleBox | None = None) -> bool:
    return compare(f, g, box).passed
