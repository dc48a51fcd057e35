"""Matrices over the truncated Moyal algebra."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import expr as ex
from . import moyal
from .expr import Expr
from .moyal import AlgebraContext, ContextMismatch, MoyalElement


class NotEmbeddedError(ArithmeticError):
    """The order-zero part of a matrix is singular somewhere on the box."""


class MoyalMatrix:
    __slots__ = ("ctx", "rows", "cols", "entries")

    def __init__(self, ctx: AlgebraContext, entries: Sequence[Sequence[MoyalElement]]):
        entries = tuple(tuple(row) for row in entries)
        if not entries or not entries[0]:
            raise ValueError("matrix dimensions must be positive")
        cols = len(entries[0])
        for row in entries:
            if len(row) != cols:
                raise ValueError("ragged matrix")
            for x in row:
                if x.ctx is not ctx:
                    raise ContextMismatch("matrix entries belong to a different context")
        self.ctx = ctx
        self.rows = len(entries)
        self.cols = cols
        self.entries = entries

    # --- constructors ---------------------------------------------------
    @classmethod
    def build(cls, ctx, rows: int, cols: int, fn: Callable[[int, int], MoyalElement]):
        return cls(ctx, [[fn(i, j) for j in range(cols)] for i in range(rows)])

    @classmethod
    def identity(cls, ctx, n: int):
        one, zero = ctx.one(), ctx.zero()
        return cls.build(ctx, n, n, lambda i, j: one if i == j else zero)

    @classmethod
    def zeros(cls, ctx, rows: int, cols: int):
        z = ctx.zero()
        return cls.build(ctx, rows, cols, lambda i, j: z)

    @classmethod
    def lift(cls, ctx, rows):
        """Matrix of order-zero entries from expressions or strings."""
        return cls(ctx, [[ctx.lift(x) for x in row] for row in rows])

    @classmethod
    def from_coefficients(cls, ctx, coeff_mats: Sequence[Sequence[Sequence[Expr]]]):
        """Assemble from per-order expression grids ``coeff_mats[k][i][j]``."""
        rows, cols = len(coeff_mats[0]), len(coeff_mats[0][0])
        N = ctx.order

        def entry(i, j):
            cs = [coeff_mats[k][i][j] if k < len(coeff_mats) else ex.ZERO for k in range(N + 1)]
            return MoyalElement(ctx, tuple(cs))

        return cls.build(ctx, rows, cols, entry)

    # --- access ---------------------------------------------------------
    @property
    def shape(self):
        return (self.rows, self.cols)

    def __getitem__(self, idx) -> MoyalElement:
        i, j = idx
        return self.entries[i][j]

    def row(self, i) -> "MoyalMatrix":
        return MoyalMatrix(self.ctx, [self.entries[i]])

    def col(self, j) -> "MoyalMatrix":
        return MoyalMatrix(self.ctx, [[row[j]] for row in self.entries])

    def coefficient(self, k: int):
        """Order-``k`` expression grid."""
        return [[x.coeffs[k] for x in row] for row in self.entries]

    def map(self, fn) -> "MoyalMatrix":
        return MoyalMatrix(self.ctx, [[fn(x) for x in row] for row in self.entries])

    def _check(self, other: "MoyalMatrix"):
        if not isinstance(other, MoyalMatrix):
            raise TypeError(f"expected MoyalMatrix, got {type(other).__name__}")
        if other.ctx is not self.ctx:
            raise ContextMismatch("matrices belong to different algebra contexts")

    # --- arithmetic -----------------------------------------------------
    def __add__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return MoyalMatrix(self.ctx, [[a + b for a, b in zip(r, s)]
                                      for r, s in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")
        return MoyalMatrix(self.ctx, [[a - b for a, b in zip(r, s)]
                                      for r, s in zip(self.entries, other.entries)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def __matmul__(self, other):
        return mat_star(self, other)

    def __mul__(self, other):
        if isinstance(other, MoyalMatrix):
            return mat_star(self, other)
        if isinstance(other, MoyalElement):
            return self.map(lambda x: moyal.star(x, other))
        return self.map(lambda x: moyal.scale(other, x))

    def __rmul__(self, other):
        if isinstance(other, MoyalElement):
            return self.map(lambda x: moyal.star(other, x))
        return self.map(lambda x: moyal.scale(other, x))

    @property
    def T(self) -> "MoyalMatrix":
        return transpose(self)

    def partial(self, i) -> "MoyalMatrix":
        return mat_partial(self, i)

    def dagger(self) -> "MoyalMatrix":
        return dagger(self)

    def shift(self, k: int = 1) -> "MoyalMatrix":
        return self.map(lambda x: x.shift(k))

    def scalar(self) -> MoyalElement:
        if self.shape != (1, 1):
            raise ValueError(f"not a 1x1 matrix: {self.shape}")
        return self.entries[0][0]

    @property
    def is_zero(self) -> bool:
        return all(x.is_zero for row in self.entries for x in row)

    def to_strings(self):
        return [[x.to_strings() for x in row] for row in self.entries]

    def __repr__(self):
        return f"MoyalMatrix({self.rows}x{self.cols}, order={self.ctx.order})"


@ex.acyclic
def mat_star(A: MoyalMatrix, B: MoyalMatrix, product=None) -> MoyalMatrix:
    """``(A*B)_ij = sum_k A_ik * B_kj``; ``product`` overrides the entry product."""
    A._check(B)
    if A.cols != B.rows:
        raise ValueError(f"cannot multiply {A.shape} by {B.shape}")
    ctx = A.ctx
    mult = product or moyal.star

    def entry(i, j):
        acc = None
        for k in range(A.cols):
            a, b = A.entries[i][k], B.entries[k][j]
            if a.is_zero or b.is_zero:
                continue
            p = mult(a, b)
            acc = p if acc is None else acc + p
        return acc if acc is not None else ctx.zero()

    return MoyalMatrix.build(ctx, A.rows, B.cols, entry)


def mat_add(A: MoyalMatrix, B: MoyalMatrix) -> MoyalMatrix:
    return A + B


def mat_partial(A: MoyalMatrix, i) -> MoyalMatrix:
    return A.map(lambda x: moyal.partial(x, i))


def transpose(A: MoyalMatrix) -> MoyalMatrix:
    return MoyalMatrix(A.ctx, [list(col) for col in zip(*A.entries)])


def dagger(A: MoyalMatrix) -> MoyalMatrix:
    """Transpose, then bar every entry."""
    return MoyalMatrix(A.ctx, [[moyal.bar(x) for x in col] for col in zip(*A.entries)])


def commutator(A: MoyalMatrix, B: MoyalMatrix, product=None) -> MoyalMatrix:
    return mat_star(A, B, product) - mat_star(B, A, product)


def compare(A: MoyalMatrix, B: MoyalMatrix, box=None) -> ex.Comparison:
    A._check(B)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch {A.shape} vs {B.shape}")
    passed, max_abs, max_rel = True, 0.0, 0.0
    for r, s in zip(A.entries, B.entries):
        for a, b in zip(r, s):
            c = moyal.compare(a, b, box)
            passed &= c.passed
            max_abs = max(max_abs, c.max_abs)
            max_rel = max(max_rel, c.max_rel)
    return ex.Comparison(passed, max_abs, max_rel)


def series_equal(A: MoyalMatrix, B: MoyalMatrix, box=None) -> bool:
    return compare(A, B, box).passed


def is_idempotent(A: MoyalMatrix, box=None) -> bool:
    if A.rows != A.cols:
        raise ValueError("idempotent test needs a square matrix")
    return series_equal(mat_star(A, A), A, box)


# --- inversion ------------------------------------------------------------

def _det(M):
    n = len(M)
    if n == 1:
        return M[0][0]
    if n == 2:
        return ex.add(ex.mul(M[0][0], M[1][1]), ex.neg(ex.mul(M[0][1], M[1][0])))
    terms = []
    for j in range(n):
        if M[0][j].is_zero:
            continue
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        t = ex.mul(M[0][j], _det(minor))
        terms.append(t if j % 2 == 0 else ex.neg(t))
    return ex.add(*terms)


def classical_inverse(M, box=None, evaluator=None):
    """Symbolic inverse of a square expression grid via adjugate/determinant.

    Limited to n <= 4.  When a box is supplied the determinant is certified
    to stay away from zero (|det| > 1e-10) at every sample point.
    """
    n = len(M)
    if n > 4:
        raise NotImplementedError("symbolic inversion is limited to 4x4")
    det = _det(M)
    if det.is_zero:
        raise NotEmbeddedError("order-zero matrix is singular")
    if box is not None:
        ev = evaluator if evaluator is not None else box.evaluator()
        try:
            vals = ev(det)
        except ex.DomainError as err:
            raise NotEmbeddedError(f"determinant not evaluable: {err}") from err
        if np.any(np.abs(vals) <= 1e-10):
            raise NotEmbeddedError("order-zero matrix is singular on the sample box")
    inv_det = ex.power(det, -1)
    if n == 1:
        return [[inv_det]]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(M) if k != j]
            cof = _det(minor)
            if (i + j) % 2:
                cof = ex.neg(cof)
            out[i][j] = ex.mul(cof, inv_det)
    return out


def _expr_matmul(A, B):
    n, m, p = len(A), len(B), len(B[0])
    return [[ex.add(*(ex.mul(A[i][k], B[k][j]) for k in range(m))) for j in range(p)] for i in range(n)]


@ex.acyclic
def series_inverse(G: MoyalMatrix, box=None) -> MoyalMatrix:
    """Two-sided inverse modulo hbar^(N+1), solved order by order.

    Writing G = sum G_a hbar^a and H = sum H_b hbar^b, the order-p part of
    G * H is sum over a + b + k = p of P_k(G_a, H_b), where P_k is the
    order-k bidifferential part of the star product.  Only (a, b, k) =
    (0, p, 0) involves H_p, so H_p = -H_0 (sum of the remaining terms).
    """
    if G.rows != G.cols:
        raise ValueError("series_inverse needs a square matrix")
    ctx = G.ctx
    n = G.rows
    N = ctx.order
    if box is None:
        box = ctx.box
    ev = ctx.evaluator if (box is ctx.box and box is not None) else (box.evaluator() if box else None)
    G0 = G.coefficient(0)
    H = [classical_inverse(G0, box, ev)]
    Gs = [G.coefficient(a) for a in range(N + 1)]
    for p in range(1, N + 1):
        rest = [[[] for _ in range(n)] for _ in range(n)]
        for a in range(p + 1):
            for b in range(p - a + 1):
                k = p - a - b
                if b == p:
                    continue
                Ga, Hb = Gs[a], H[b]
                for I, J, c in ctx._bidiff[k]:
                    for i in range(n):
                        for j in range(n):
                            for q in range(n):
                                x = Ga[i][q]
                                if x.is_zero:
                                    continue
                                dx = ex.derivative(x, I)
                                if dx.is_zero:
                                    continue
                                dy = ex.derivative(Hb[q][j], J)
                                if dy.is_zero:
                                    continue
                                rest[i][j].append(ex.mul(ex.const(c), dx, dy))
        S = [[ex.add(*rest[i][j]) for j in range(n)] for i in range(n)]
        Hp = _expr_matmul(H[0], S)
        H.append([[ex.neg(x) for x in row] for row in Hp])
    return MoyalMatrix.from_coefficients(ctx, H)
