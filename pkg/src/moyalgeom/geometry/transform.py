"""Change of coordinates u = Phi(t) and the pulled-back algebra structure.

Elements in the u-chart are plain series over an ``AlgebraContext`` on the
u-coordinates whose theta is zero; that context only carries names, the
u-box and the evaluator.  The product and derivations of the u-chart are
the transported ones:

    f *_u g   = phi^-1( phi(f) * phi(g) )
    d^phi_i f = phi^-1( d_i phi(f) )

with ``phi(f) = f o Phi`` (substitute u -> Phi(t)) and ``phi^-1`` its inverse
(substitute t -> Phi^-1(u)).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .. import expr as ex
from ..expr import SampleBox
from ..matalg import MoyalMatrix, commutator, mat_star
from ..moyal import AlgebraContext, MoyalElement, star
from .verdicts import Check


class DiffeoError(ValueError):
    pass


@dataclass
class DiffeoSpec:
    """``forward[i]`` gives u^i in terms of t; ``inverse[i]`` gives t^i in terms of u."""

    coords: Sequence[str]
    forward: Sequence
    inverse: Sequence
    box: SampleBox

    def __post_init__(self):
        self.coords = tuple(self.coords)
        if len(self.forward) != len(self.coords) or len(self.inverse) != len(self.coords):
            raise DiffeoError("forward and inverse maps need one expression per new coordinate")


class Chart:
    """The u-chart algebra obtained by transport along a diffeomorphism."""

    def __init__(self, ctx: AlgebraContext, diffeo: DiffeoSpec):
        if len(diffeo.coords) != ctx.n:
            raise DiffeoError(f"expected {ctx.n} new coordinates, got {len(diffeo.coords)}")
        clash = set(diffeo.coords) & set(ctx.params)
        if clash:
            raise DiffeoError(f"new coordinate {sorted(clash)[0]!r} clashes with a parameter")
        self.t_ctx = ctx
        box = diffeo.box
        missing = [p for p in ctx.params if p not in box.params]
        if missing:
            box = box.replace(params={**ctx.box.params, **box.params})
        zero_theta = [[0] * ctx.n for _ in range(ctx.n)]
        self.ctx = AlgebraContext(diffeo.coords, zero_theta, ctx.order, ctx.params, box)
        self.diffeo = diffeo

        def conv(x, c):
            return c.parse(x) if isinstance(x, str) else c.check_expr(ex._wrap(x))

        # forward: u^i as functions of t; inverse: t^i as functions of u
        self.forward = {u: conv(f, ctx) for u, f in zip(diffeo.coords, diffeo.forward)}
        self.inverse = {t: conv(f, self.ctx) for t, f in zip(ctx.coords, diffeo.inverse)}
        self._push_memo: dict = {}
        self._pull_memo: dict = {}

    # --- transport --------------------------------------------------------
    def push(self, f: MoyalElement) -> MoyalElement:
        """``phi``: u-chart element to a t-chart element."""
        return MoyalElement(self.t_ctx, tuple(ex.substitute(c, self.forward, memo=self._push_memo)
                                              for c in f.coeffs))

    def pull(self, f: MoyalElement) -> MoyalElement:
        """``phi^-1``: t-chart element to a u-chart element."""
        return MoyalElement(self.ctx, tuple(ex.substitute(c, self.inverse, memo=self._pull_memo)
                                            for c in f.coeffs))

    def push_matrix(self, A: MoyalMatrix) -> MoyalMatrix:
        return MoyalMatrix(self.t_ctx, [[self.push(x) for x in row] for row in A.entries])

    def pull_matrix(self, A: MoyalMatrix) -> MoyalMatrix:
        return MoyalMatrix(self.ctx, [[self.pull(x) for x in row] for row in A.entries])

    # --- chart operations -------------------------------------------------
    def star(self, f: MoyalElement, g: MoyalElement) -> MoyalElement:
        return self.pull(star(self.push(f), self.push(g)))

    def partial(self, f: MoyalElement, i: int) -> MoyalElement:
        return self.pull(self.push(f).partial(i))

    def mat_star(self, A: MoyalMatrix, B: MoyalMatrix) -> MoyalMatrix:
        return mat_star(A, B, product=self.star)

    def mat_partial(self, A: MoyalMatrix, i: int) -> MoyalMatrix:
        return A.map(lambda x: self.partial(x, i))

    def commutator(self, A: MoyalMatrix, B: MoyalMatrix) -> MoyalMatrix:
        return commutator(A, B, product=self.star)

    def check_round_trip(self) -> Check:
        """``Phi o Phi^-1 = id`` on the u-box and ``Phi^-1 o Phi = id`` on the t-box."""
        chk = Check("diffeo-round-trip", "Phi(Phi^-1(u)) = u, Phi^-1(Phi(t)) = t")
        ub, tb = self.ctx.box, self.t_ctx.box
        uev, tev = self.ctx.evaluator, self.t_ctx.evaluator
        for u, f in self.forward.items():
            chk._record(ex.compare(ex.substitute(f, self.inverse), ex.symbol(u), ub, uev), f"u={u}")
        for t, f in self.inverse.items():
            chk._record(ex.compare(ex.substitute(f, self.forward), ex.symbol(t), tb, tev), f"t={t}")
        return chk


@dataclass
class TransformedGeometry:
    chart: Chart
    idempotent: MoyalMatrix
    omegas: list
    two_forms: dict      # pulled back R_ij
    chart_two_forms: dict  # computed intrinsically in the u-chart from omega^u


@ex.acyclic
def coordinate_transform(geom, diffeo: DiffeoSpec, verify: bool = True) -> TransformedGeometry:
    chart = Chart(geom.ctx, diffeo)
    if verify:
        rt = chart.check_round_trip()
        if not rt.passed:
            raise DiffeoError(f"forward and inverse maps are not mutually inverse ({rt.detail})")
    n = geom.n
    e_u = chart.pull_matrix(geom.idempotent)
    conn = geom.connection("left")
    omegas = [chart.pull_matrix(w) for w in conn.omegas]
    curv = geom.curvature("left").two_forms
    pulled, intrinsic = {}, {}
    for i in range(n):
        for j in range(i + 1, n):
            pulled[i, j] = chart.pull_matrix(curv[i, j])
            intrinsic[i, j] = (chart.mat_partial(omegas[j], i) - chart.mat_partial(omegas[i], j)
                               - chart.commutator(omegas[i], omegas[j]))
    return TransformedGeometry(chart, e_u, omegas, pulled, intrinsic)


@ex.acyclic
def check_transform(tg: TransformedGeometry, rng=None, triples: int = 3) -> list:
    chart = tg.chart
    ctx = chart.ctx
    e = tg.idempotent
    one_minus = MoyalMatrix.identity(ctx, e.rows) - e
    idem = Check("chart-idempotent", "e_u *_u e_u = e_u")
    idem.matrix(chart.mat_star(e, e), e)
    conn = Check("chart-connection", "e_u *_u w^u_i *_u (1-e_u) = -e_u *_u d^phi_i e_u")
    for i, w in enumerate(tg.omegas):
        lhs = chart.mat_star(chart.mat_star(e, w), one_minus)
        rhs = -chart.mat_star(e, chart.mat_partial(e, i))
        conn.matrix(lhs, rhs, f"i={i}")
    cov = Check("chart-curvature", "R^u_ij = phi^-1(R_ij)")
    for key, R in tg.two_forms.items():
        cov.matrix(tg.chart_two_forms[key], R, f"(i,j)={key}")
    out = [chart.check_round_trip(), idem, conn, cov]
    if rng is not None and triples:
        from .sampling import random_element
        assoc = Check("chart-associativity", "(f *_u g) *_u h = f *_u (g *_u h)")
        for s in range(triples):
            f, g, h = (random_element(ctx, rng, 2, 2) for _ in range(3))
            assoc.series(chart.star(chart.star(f, g), h), chart.star(f, chart.star(g, h)), f"triple {s}")
        out.append(assoc)
    return out
