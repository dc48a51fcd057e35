"""Embedded noncommutative spaces: frame, metric, idempotent, Christoffel
symbols and Riemann tensors."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

from .. import expr as ex
from ..expr import Expr, SampleBox
from ..matalg import MoyalMatrix, NotEmbeddedError, mat_star, series_inverse
from ..moyal import AlgebraContext, MoyalElement, star
from . import bundles
from .verdicts import Check


class DualityError(ArithmeticError):
    """The computed dual frame or idempotent fails its defining identity."""


class IntegrabilityWarning(UserWarning):
    pass


@dataclass
class EmbeddingSpec:
    """Input for :func:`build_geometry`.

    Give either ``embedding`` (the m components X^alpha) or ``frame`` (n rows
    of length m, the derivatives d_i X).  ``eta`` is the diagonal signature;
    all +1 by default.
    """

    coords: Sequence[str]
    theta: Sequence[Sequence]
    box: SampleBox
    params: Sequence[str] = ()
    order: int = 3
    embedding: Sequence | None = None
    frame: Sequence[Sequence] | None = None
    eta: Sequence[int] | None = None
    name: str = ""

    def __post_init__(self):
        self.coords = tuple(self.coords)
        self.params = tuple(self.params)
        if (self.embedding is None) == (self.frame is None):
            raise ValueError("give exactly one of embedding or frame")
        n = len(self.coords)
        if self.frame is not None:
            if len(self.frame) != n:
                raise ValueError(f"frame needs {n} rows, got {len(self.frame)}")
            lengths = {len(row) for row in self.frame}
            if len(lengths) != 1:
                raise ValueError("frame rows differ in length")
            m = lengths.pop()
        else:
            m = len(self.embedding)
        if m <= n:
            raise ValueError(f"ambient dimension m={m} must exceed n={n}")
        if self.eta is None:
            self.eta = (1,) * m
        self.eta = tuple(int(x) for x in self.eta)
        if len(self.eta) != m or any(x not in (1, -1) for x in self.eta):
            raise ValueError(f"eta must be {m} entries of +1/-1")
        missing = [c for c in self.coords if c not in self.box.intervals]
        if missing:
            raise ValueError(f"sample box has no interval for {missing[0]!r}")
        unset = [p for p in self.params if p not in self.box.params]
        if unset:
            raise ValueError(f"sample box has no value for parameter {unset[0]!r}")

    @property
    def m(self) -> int:
        return len(self.eta)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def euclidean(self) -> bool:
        return all(x == 1 for x in self.eta)

    def context(self) -> AlgebraContext:
        return AlgebraContext(self.coords, self.theta, self.order, self.params, self.box)

    def frame_exprs(self, ctx: AlgebraContext) -> list:
        def conv(x):
            return ctx.parse(x) if isinstance(x, str) else ctx.check_expr(ex._wrap(x))

        if self.frame is not None:
            return [[conv(x) for x in row] for row in self.frame]
        X = [conv(x) for x in self.embedding]
        return [[ex.differentiate(Xa, c) for Xa in X] for c in self.coords]


@dataclass
class Geometry:
    spec: EmbeddingSpec
    ctx: AlgebraContext
    frame: list          # E_i, 1 x m
    metric: MoyalMatrix  # g_ij
    metric_inv: MoyalMatrix
    dual: list           # E~^i, m x 1
    coframe: list        # E^i = g^ij * E_j, 1 x m
    idempotent: MoyalMatrix
    frame_exprs: list
    right_frame: list    # eta E_k^t = E~^p * g_pk, m x 1
    warnings: list = field(default_factory=list)
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.ctx.n

    @property
    def m(self) -> int:
        return self.spec.m

    def idempotent_entry(self, alpha: int, beta: int) -> MoyalElement:
        if not (0 <= alpha < self.m and 0 <= beta < self.m):
            raise IndexError(f"idempotent index ({alpha}, {beta}) out of range for m={self.m}")
        return self.idempotent[alpha, beta]

    def connection(self, side: str = bundles.LEFT) -> bundles.ConnectionData:
        key = ("conn", side)
        if key not in self._cache:
            self._cache[key] = bundles.canonical_connection(self.idempotent, self.n, side)
        return self._cache[key]

    def curvature(self, side: str = bundles.LEFT) -> bundles.CurvatureData:
        key = ("curv", side)
        if key not in self._cache:
            self._cache[key] = bundles.curvature(self.connection(side))
        return self._cache[key]

    def christoffel(self) -> "ChristoffelData":
        if "christoffel" not in self._cache:
            self._cache["christoffel"] = christoffel(self)
        return self._cache["christoffel"]

    def riemann(self) -> "RiemannData":
        if "riemann" not in self._cache:
            self._cache["riemann"] = riemann(self)
        return self._cache["riemann"]


def _sum(items, zero):
    acc = None
    for x in items:
        acc = x if acc is None else acc + x
    return zero if acc is None else acc


def check_integrability(frame_exprs, coords, box: SampleBox) -> list:
    """Pairs (i, j) where d_i E_j and d_j E_i differ numerically."""
    ev = box.evaluator()
    bad = []
    n = len(coords)
    for i in range(n):
        for j in range(i + 1, n):
            for a, b in zip(frame_exprs[j], frame_exprs[i]):
                if not ex.numeric_equal(ex.differentiate(a, coords[i]), ex.differentiate(b, coords[j]), box, ev):
                    bad.append((i, j))
                    break
    return bad


@ex.acyclic
def build_geometry(spec: EmbeddingSpec, verify: bool = True) -> Geometry:
    """Frame, metric ``g_ij = E_i * eta * E_j^t``, its inverse, dual frame
    ``E~^i = eta E_j^t * g^ji`` and the idempotent ``e = E~^j * E_j``."""
    ctx = spec.context()
    F = spec.frame_exprs(ctx)
    notes = []
    if spec.frame is not None:
        bad = check_integrability(F, spec.coords, spec.box)
        if bad:
            msg = f"frame is not integrable (d_i E_j != d_j E_i) for index pairs {bad}"
            warnings.warn(msg, IntegrabilityWarning, stacklevel=2)
            notes.append(msg)
    n, m = spec.n, spec.m
    eta = spec.eta
    E = [MoyalMatrix.lift(ctx, [row]) for row in F]

    def g_entry(i, j):
        terms = []
        for a in range(m):
            x, y = E[i][0, a], E[j][0, a]
            if x.is_zero or y.is_zero:
                continue
            p = star(x, y)
            terms.append(p if eta[a] == 1 else -p)
        return _sum(terms, ctx.zero())

    g = MoyalMatrix.build(ctx, n, n, g_entry)
    g_inv = series_inverse(g)
    eta_mat = MoyalMatrix.build(ctx, m, m, lambda a, b: ctx.lift(eta[a]) if a == b else ctx.zero())
    dual = []
    for i in range(n):
        col = _sum((E[j].T * g_inv[j, i] for j in range(n)), MoyalMatrix.zeros(ctx, m, 1))
        dual.append(col if spec.euclidean else eta_mat @ col)
    coframe = [_sum((g_inv[i, j] * E[j] for j in range(n)), MoyalMatrix.zeros(ctx, 1, m)) for i in range(n)]
    e = _sum((mat_star(dual[j], E[j]) for j in range(n)), MoyalMatrix.zeros(ctx, m, m))
    right = [E[k].T if spec.euclidean else eta_mat @ E[k].T for k in range(n)]
    geom = Geometry(spec, ctx, E, g, g_inv, dual, coframe, e, F, right, notes)
    if verify:
        for chk in (check_duality(geom), check_frame_fixed(geom), check_idempotent(geom)):
            if not chk.passed:
                raise DualityError(f"{chk.name} failed ({chk.identity}): {chk.detail}")
    return geom


def check_duality(geom: Geometry) -> Check:
    chk = Check("frame-duality", "E_i*E~^j = delta_i^j")
    ctx = geom.ctx
    for i in range(geom.n):
        for j in range(geom.n):
            target = ctx.one() if i == j else ctx.zero()
            chk.series((geom.frame[i] @ geom.dual[j]).scalar(), target, f"(i,j)=({i},{j})")
    return chk


def check_frame_fixed(geom: Geometry) -> Check:
    chk = Check("frame-fixed", "E_i*e = E_i")
    for i, Ei in enumerate(geom.frame):
        chk.matrix(Ei @ geom.idempotent, Ei, f"i={i}")
    return chk


def check_idempotent(geom: Geometry) -> Check:
    chk = Check("idempotent", "e*e = e")
    chk.matrix(geom.idempotent @ geom.idempotent, geom.idempotent)
    return chk


# --- Christoffel symbols -------------------------------------------------------

@dataclass
class ChristoffelData:
    """Index arrays, 0-based.

    ``classical[i][j][l]``  = 1/2 (d_i g_jl + d_j g_li - d_l g_ji)
    ``torsion[i][j][l]``    = 1/2 (d_i(E_j)*E_l^t - E_l*d_i(E_j)^t)
    ``lower[i][j][l]``      = classical + torsion
    ``lower_right[i][j][l]``= classical - torsion
    ``upper[i][j][k]``      = sum_l lower[i][j][l] * g^lk
    ``upper_right[i][j][k]``= sum_l g^kl * lower_right[i][j][l]
    """

    classical: list
    torsion: list
    lower: list
    lower_right: list
    upper: list
    upper_right: list


@ex.acyclic
def christoffel(geom: Geometry) -> ChristoffelData:
    n, ctx = geom.n, geom.ctx
    g, gi = geom.metric, geom.metric_inv
    E = geom.frame
    dg = [g.partial(i) for i in range(n)]
    dE = [[E[j].partial(i) for j in range(n)] for i in range(n)]
    half = ex.const(ex.Fraction(1, 2))
    R = range(n)
    cG = [[[(dg[i][j, l] + dg[j][l, i] - dg[l][j, i]) * half for l in R] for j in R] for i in R]
    Y = [[[((dE[i][j] @ E[l].T).scalar() - (E[l] @ dE[i][j].T).scalar()) * half for l in R]
          for j in R] for i in R]
    lower = [[[cG[i][j][l] + Y[i][j][l] for l in R] for j in R] for i in R]
    lower_r = [[[cG[i][j][l] - Y[i][j][l] for l in R] for j in R] for i in R]
    zero = ctx.zero()
    up = [[[_sum((star(lower[i][j][l], gi[l, k]) for l in R), zero) for k in R] for j in R] for i in R]
    up_r = [[[_sum((star(gi[k, l], lower_r[i][j][l]) for l in R), zero) for k in R] for j in R] for i in R]
    return ChristoffelData(cG, Y, lower, lower_r, up, up_r)


def check_gamma_identity(geom: Geometry) -> Check:
    """``Gamma^k_ij = d_i(E_j) * E~^k``."""
    chr_ = geom.christoffel()
    chk = Check("christoffel-frame", "Gamma^k_ij = d_i(E_j)*E~^k")
    for i in range(geom.n):
        for j in range(geom.n):
            dEj = geom.frame[j].partial(i)
            for k in range(geom.n):
                chk.series(chr_.upper[i][j][k], (dEj @ geom.dual[k]).scalar(), f"(i,j,k)=({i},{j},{k})")
    return chk


def check_gamma_lemma(geom: Geometry) -> list:
    """``nabla_i E_j = Gamma^k_ij * E_k`` and ``nabla~_i E~^j = -E~^k * Gamma^j_ki``."""
    n = geom.n
    chr_ = geom.christoffel()
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    a = Check("gamma-left", "nabla_i E_j = Gamma^k_ij*E_k")
    b = Check("gamma-right", "nabla~_i E~^j = -E~^k*Gamma^j_ki")
    for i in range(n):
        for j in range(n):
            lhs = bundles.nabla_left(left, geom.frame[j], i)
            rhs = _sum((chr_.upper[i][j][k] * geom.frame[k] for k in range(n)), MoyalMatrix.zeros(geom.ctx, 1, geom.m))
            a.matrix(lhs, rhs, f"(i,j)=({i},{j})")
            lhs = bundles.nabla_right(right, geom.dual[j], i)
            rhs = _sum((geom.dual[k] * chr_.upper[k][i][j] for k in range(n)), MoyalMatrix.zeros(geom.ctx, geom.m, 1))
            b.matrix(lhs, -rhs, f"(i,j)=({i},{j})")
    return [a, b]


def check_metric_compatibility(geom: Geometry) -> Check:
    """``d_i g_jk - Gamma_ijk - Gamma~_ikj = 0``."""
    chr_ = geom.christoffel()
    chk = Check("metric-compatibility", "d_i g_jk - Gamma_ijk - Gamma~_ikj = 0")
    n = geom.n
    zero = geom.ctx.zero()
    for i in range(n):
        dg = geom.metric.partial(i)
        for j in range(n):
            for k in range(n):
                val = dg[j, k] - chr_.lower[i][j][k] - chr_.lower_right[i][k][j]
                chk.series(val, zero, f"(i,j,k)=({i},{j},{k})")
    return chk


def check_pairing_compatibility(geom: Geometry, lefts, rights) -> Check:
    """``d_i g(zeta, xi) = g(nabla_i zeta, xi) + g(zeta, nabla~_i xi)``."""
    chk = Check("pairing-compatibility", "d_i g(zeta,xi) = g(nabla_i zeta,xi) + g(zeta,nabla~_i xi)")
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    for s, (z, x) in enumerate(zip(lefts, rights)):
        base = bundles.fibre_metric(z, x)
        for i in range(geom.n):
            lhs = base.partial(i)
            rhs = (bundles.fibre_metric(bundles.nabla_left(left, z, i), x)
                   + bundles.fibre_metric(z, bundles.nabla_right(right, x, i)))
            chk.series(lhs, rhs, f"pair {s}, i={i}")
    return chk


# --- Riemann tensors -------------------------------------------------------------

@dataclass
class RiemannData:
    """Keyed by ``(l, k, i, j)`` for ``R^l_kij``; 0-based."""

    left: dict          # E_k * R_ij * E~^l
    right: dict         # -g^lq * E_q * R_ij * E~^p * g_pk
    left_gamma: dict    # expansion in Christoffel symbols
    right_gamma: dict


@ex.acyclic
def riemann(geom: Geometry) -> RiemannData:
    n, ctx = geom.n, geom.ctx
    R2 = geom.curvature(bundles.LEFT).two_forms
    E, Et, g, gi = geom.frame, geom.dual, geom.metric, geom.metric_inv
    zero = ctx.zero()
    rng = range(n)
    left, right = {}, {}
    for i in rng:
        for j in rng:
            ERs = [E[q] @ R2[i, j] for q in rng]
            # M[q][p] = E_q * R_ij * E~^p
            M = [[(ERs[q] @ Et[p]).scalar() for p in rng] for q in rng]
            for k in rng:
                for l in rng:
                    left[l, k, i, j] = M[k][l]
                    right[l, k, i, j] = -_sum((star(star(gi[l, q], M[q][p]), g[p, k])
                                               for q in rng for p in rng), zero)
    G = geom.christoffel()
    U, Ur = G.upper, G.upper_right
    left_g, right_g = {}, {}
    for l in rng:
        for k in rng:
            for i in rng:
                for j in rng:
                    val = -U[i][k][l].partial(j) + U[j][k][l].partial(i)
                    for p in rng:
                        val = val - star(U[i][k][p], U[j][p][l]) + star(U[j][k][p], U[i][p][l])
                    left_g[l, k, i, j] = val
                    val = -Ur[i][k][l].partial(j) + Ur[j][k][l].partial(i)
                    for p in rng:
                        val = val - star(Ur[j][p][l], Ur[i][k][p]) + star(Ur[i][p][l], Ur[j][k][p])
                    right_g[l, k, i, j] = val
    return RiemannData(left, right, left_g, right_g)


def check_riemann_routes(geom: Geometry) -> list:
    data = geom.riemann()
    a = Check("riemann-dual-route-left", "E_k*R_ij*E~^l = -d_j G^l_ik - G^p_ik*G^l_jp + d_i G^l_jk + G^p_jk*G^l_ip")
    b = Check("riemann-dual-route-right",
              "-g^lq*E_q*R_ij*E~^p*g_pk = -d_j G~^l_ik - G~^l_jp*G~^p_ik + d_i G~^l_jk + G~^l_ip*G~^p_jk")
    for key in sorted(data.left):
        a.series(data.left[key], data.left_gamma[key], f"(l,k,i,j)={key}")
        b.series(data.right[key], data.right_gamma[key], f"(l,k,i,j)={key}")
    return [a, b]


def check_frame_curvature(geom: Geometry) -> list:
    """``[nabla_i, nabla_j] E_k = R^l_kij * E_l`` and the right analogue on
    ``eta E_k^t`` (plain transposes in the Euclidean case)."""
    n = geom.n
    data = geom.riemann()
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    a = Check("frame-curvature-left", "[nabla_i,nabla_j]E_k = R^l_kij*E_l")
    b = Check("frame-curvature-right", "[nabla~_i,nabla~_j]E_k^t = E_l^t*R~^l_kij")
    zrow = MoyalMatrix.zeros(geom.ctx, 1, geom.m)
    zcol = MoyalMatrix.zeros(geom.ctx, geom.m, 1)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(n):
                lhs = bundles.commutator_on_section(left, geom.frame[k], i, j)
                rhs = _sum((data.left[l, k, i, j] * geom.frame[l] for l in range(n)), zrow)
                a.matrix(lhs, rhs, f"(k,i,j)=({k},{i},{j})")
                lhs = bundles.commutator_on_section(right, geom.right_frame[k], i, j)
                rhs = _sum((geom.right_frame[l] * data.right[l, k, i, j] for l in range(n)), zcol)
                b.matrix(lhs, rhs, f"(k,i,j)=({k},{i},{j})")
    return [a, b]
