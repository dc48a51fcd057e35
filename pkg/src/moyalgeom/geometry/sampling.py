"""Seeded random algebra elements and module sections for identity tests."""
from __future__ import annotations

import random

from .. import expr as ex
from ..matalg import MoyalMatrix
from ..moyal import AlgebraContext, MoyalElement


def random_polynomial(ctx: AlgebraContext, rng: random.Random, degree: int = 1) -> ex.Expr:
    """Small-integer polynomial of total degree <= ``degree`` in the coordinates."""
    syms = [ex.symbol(c) for c in ctx.coords]
    terms = [ex.const(rng.randint(-2, 2))]
    for d in range(1, degree + 1):
        for _ in range(len(syms)):
            k = rng.randint(-2, 2)
            if k == 0:
                continue
            monomial = ex.mul(*(rng.choice(syms) for _ in range(d)))
            terms.append(ex.mul(ex.const(k), monomial))
    return ex.add(*terms)


def random_element(ctx: AlgebraContext, rng: random.Random, degree: int = 1,
                   orders: int | None = None) -> MoyalElement:
    """Random series whose first ``orders`` coefficients are random polynomials."""
    orders = ctx.order + 1 if orders is None else min(orders, ctx.order + 1)
    return ctx.series([random_polynomial(ctx, rng, degree) for _ in range(orders)])


def random_matrix(ctx, rng, rows: int, cols: int, degree: int = 1, orders=None) -> MoyalMatrix:
    return MoyalMatrix.build(ctx, rows, cols, lambda i, j: random_element(ctx, rng, degree, orders))


def random_left_section(geom, rng, degree: int = 1) -> MoyalMatrix:
    """``a^i * E_i`` with random coefficients ``a^i``; lies in the left module."""
    acc = None
    for Ei in geom.frame:
        term = random_element(geom.ctx, rng, degree) * Ei
        acc = term if acc is None else acc + term
    return acc


def random_right_section(geom, rng, degree: int = 1) -> MoyalMatrix:
    """``eta (E_j)^t * b^j``; lies in the right module."""
    acc = None
    for col in geom.right_frame:
        term = col * random_element(geom.ctx, rng, degree)
        acc = term if acc is None else acc + term
    return acc
