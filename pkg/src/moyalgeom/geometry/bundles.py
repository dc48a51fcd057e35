"""Connections and curvature on the projective modules cut out by an idempotent.

Left sections are row vectors ``zeta`` with ``zeta * e = zeta``; right
sections are columns ``xi`` with ``e * xi = xi``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .. import expr as ex
from ..matalg import MoyalMatrix, commutator, mat_star, series_inverse
from ..moyal import MoyalElement
from .verdicts import Check

LEFT = "left"
RIGHT = "right"


class ModuleMembershipError(ValueError):
    pass


class GaugeError(ValueError):
    pass


@dataclass
class ConnectionData:
    """Connection matrices ``omega_i`` for one side of the bundle."""

    side: str
    omegas: Sequence[MoyalMatrix]
    idempotent: MoyalMatrix
    canonical: bool = False

    def __post_init__(self):
        if self.side not in (LEFT, RIGHT):
            raise ValueError(f"side must be {LEFT!r} or {RIGHT!r}")
        self.omegas = tuple(self.omegas)

    @property
    def ctx(self):
        return self.idempotent.ctx

    @property
    def n(self) -> int:
        return len(self.omegas)


@dataclass
class CurvatureData:
    """Two-forms ``R_ij`` (antisymmetric in i, j) of a connection."""

    connection: ConnectionData
    two_forms: dict = field(default_factory=dict)

    def __getitem__(self, ij) -> MoyalMatrix:
        return self.two_forms[ij]


def _one_minus(e: MoyalMatrix) -> MoyalMatrix:
    return MoyalMatrix.identity(e.ctx, e.rows) - e


def connection_defect(conn: ConnectionData, i: int) -> tuple:
    """Both sides of the defining condition for ``omega_i``."""
    e = conn.idempotent
    w = conn.omegas[i]
    de = e.partial(i)
    if conn.side == LEFT:
        return e @ w @ _one_minus(e), -(e @ de)
    return _one_minus(e) @ w @ e, de @ e


@ex.acyclic
def check_connection(conn: ConnectionData, name: str | None = None) -> Check:
    if conn.side == LEFT:
        chk = Check(name or "connection-left", "e*w_i*(1-e) = -e*d_i(e)")
    else:
        chk = Check(name or "connection-right", "(1-e)*w~_i*e = d_i(e)*e")
    for i in range(conn.n):
        lhs, rhs = connection_defect(conn, i)
        chk.matrix(lhs, rhs, f"i={i}")
    return chk


def canonical_connection(e: MoyalMatrix, n: int, side: str = LEFT, validate: bool = False) -> ConnectionData:
    """``omega_i = -d_i e`` on the left bundle, ``d_i e`` on the right."""
    sign = -1 if side == LEFT else 1
    omegas = [e.partial(i) if sign > 0 else -e.partial(i) for i in range(n)]
    conn = ConnectionData(side, omegas, e, canonical=True)
    if validate:
        chk = check_connection(conn)
        if not chk.passed:
            raise AssertionError(f"canonical connection fails its defining condition: {chk.detail}")
    return conn


def in_left_module(zeta: MoyalMatrix, e: MoyalMatrix) -> bool:
    from ..matalg import series_equal
    return series_equal(zeta @ e, zeta)


def in_right_module(xi: MoyalMatrix, e: MoyalMatrix) -> bool:
    from ..matalg import series_equal
    return series_equal(e @ xi, xi)


def nabla_left(conn: ConnectionData, zeta: MoyalMatrix, i: int, check: bool = False) -> MoyalMatrix:
    """``d_i zeta + zeta * omega_i`` for a row section."""
    if conn.side != LEFT:
        raise ValueError("nabla_left needs a left connection")
    if check and not in_left_module(zeta, conn.idempotent):
        raise ModuleMembershipError("section is not in the left module")
    return zeta.partial(i) + zeta @ conn.omegas[i]


def nabla_right(conn: ConnectionData, xi: MoyalMatrix, i: int, check: bool = False) -> MoyalMatrix:
    """``d_i xi - omega~_i * xi`` for a column section."""
    if conn.side != RIGHT:
        raise ValueError("nabla_right needs a right connection")
    if check and not in_right_module(xi, conn.idempotent):
        raise ModuleMembershipError("section is not in the right module")
    return xi.partial(i) - conn.omegas[i] @ xi


def nabla(conn: ConnectionData, s: MoyalMatrix, i: int) -> MoyalMatrix:
    return nabla_left(conn, s, i) if conn.side == LEFT else nabla_right(conn, s, i)


@ex.acyclic
def curvature(conn: ConnectionData) -> CurvatureData:
    """``R_ij = d_i w_j - d_j w_i - [w_i, w_j]`` for every ordered pair."""
    n = conn.n
    w = conn.omegas
    forms = {}
    zero = MoyalMatrix.zeros(conn.ctx, conn.idempotent.rows, conn.idempotent.cols)
    for i in range(n):
        forms[i, i] = zero
        for j in range(i + 1, n):
            R = w[j].partial(i) - w[i].partial(j) - commutator(w[i], w[j])
            forms[i, j] = R
            forms[j, i] = -R
    return CurvatureData(conn, forms)


def canonical_two_form(e: MoyalMatrix, n: int) -> dict:
    """``-[d_i e, d_j e]`` for every ordered pair."""
    de = [e.partial(i) for i in range(n)]
    forms = {}
    for i in range(n):
        forms[i, i] = MoyalMatrix.zeros(e.ctx, e.rows, e.cols)
        for j in range(i + 1, n):
            R = -commutator(de[i], de[j])
            forms[i, j] = R
            forms[j, i] = -R
    return forms


def nabla_curvature(curv: CurvatureData, k: int, i: int, j: int) -> MoyalMatrix:
    """Covariant derivative of ``R_ij`` along ``k``.

    Left: ``d_k R + R * w_k - w_k * R``; right: ``d_k R~ - w~_k * R~ + R~ * w~_k``.
    The right sign is the one for which ``[nabla~_k, [nabla~_i, nabla~_j]] xi
    = -(nabla~_k R~_ij) * xi`` holds; the cyclic Bianchi sum vanishes with
    either sign for canonical connections.
    """
    R = curv.two_forms[i, j]
    w = curv.connection.omegas[k]
    if curv.connection.side == LEFT:
        return R.partial(k) + R @ w - w @ R
    return R.partial(k) - w @ R + R @ w


def bianchi_sum(curv: CurvatureData, i: int, j: int, k: int) -> MoyalMatrix:
    if curv.connection.side == LEFT:
        return (nabla_curvature(curv, k, i, j) + nabla_curvature(curv, j, k, i)
                + nabla_curvature(curv, i, j, k))
    return (nabla_curvature(curv, i, j, k) + nabla_curvature(curv, j, k, i)
            + nabla_curvature(curv, k, i, j))


@ex.acyclic
def check_bianchi(curv: CurvatureData) -> Check:
    side = curv.connection.side
    chk = Check(f"bianchi-{side}", "cyclic sum of nabla_k R_ij = 0")
    n = curv.connection.n
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                chk.zero_matrix(bianchi_sum(curv, i, j, k), f"(i,j,k)=({i},{j},{k})")
    return chk


def commutator_on_section(conn: ConnectionData, s: MoyalMatrix, i: int, j: int) -> MoyalMatrix:
    return nabla(conn, nabla(conn, s, j), i) - nabla(conn, nabla(conn, s, i), j)


@ex.acyclic
def check_curvature_action(curv: CurvatureData, sections) -> Check:
    """``[nabla_i, nabla_j] zeta = zeta * R_ij`` (left) or ``-R~_ij * xi`` (right)."""
    conn = curv.connection
    if conn.side == LEFT:
        chk = Check("curvature-action-left", "[nabla_i, nabla_j] zeta = zeta*R_ij")
    else:
        chk = Check("curvature-action-right", "[nabla~_i, nabla~_j] xi = -R~_ij*xi")
    n = conn.n
    for s_idx, s in enumerate(sections):
        for i in range(n):
            for j in range(i + 1, n):
                lhs = commutator_on_section(conn, s, i, j)
                R = curv.two_forms[i, j]
                rhs = s @ R if conn.side == LEFT else -(R @ s)
                chk.matrix(lhs, rhs, f"section {s_idx}, (i,j)=({i},{j})")
    return chk


@ex.acyclic
def check_double_commutator(curv: CurvatureData, sections) -> Check:
    """``[nabla_k, [nabla_i, nabla_j]] zeta = zeta * nabla_k R_ij`` on the left."""
    conn = curv.connection
    chk = Check(f"double-commutator-{conn.side}",
                "[nabla_k,[nabla_i,nabla_j]] zeta = zeta*nabla_k R_ij" if conn.side == LEFT
                else "[nabla~_k,[nabla~_i,nabla~_j]] xi = -nabla~_k R~_ij*xi")
    n = conn.n
    for s_idx, s in enumerate(sections):
        for i in range(n):
            for j in range(i + 1, n):
                inner = commutator_on_section(conn, s, i, j)
                for k in range(n):
                    lhs = nabla(conn, inner, k) - commutator_on_section(conn, nabla(conn, s, k), i, j)
                    DR = nabla_curvature(curv, k, i, j)
                    rhs = s @ DR if conn.side == LEFT else -(DR @ s)
                    chk.matrix(lhs, rhs, f"section {s_idx}, (i,j,k)=({i},{j},{k})")
    return chk


# --- pairings ---------------------------------------------------------------

def bimodule_form(zeta: MoyalMatrix, Lam: MoyalMatrix, xi: MoyalMatrix) -> MoyalElement:
    """``<zeta, xi> = zeta * Lambda * xi``."""
    return (zeta @ Lam @ xi).scalar()


def fibre_metric(zeta: MoyalMatrix, xi: MoyalMatrix) -> MoyalElement:
    """The pairing with ``Lambda`` the identity, i.e. ``zeta * xi``."""
    return (zeta @ xi).scalar()


def form_compatibility_defect(Lam: MoyalMatrix, left: ConnectionData, right: ConnectionData, i: int) -> MoyalMatrix:
    """``e * (d_i Lambda - w_i * Lambda + Lambda * w~_i) * e``; zero when compatible."""
    e = left.idempotent
    inner = Lam.partial(i) - left.omegas[i] @ Lam + Lam @ right.omegas[i]
    return e @ inner @ e


# --- gauge transformations ----------------------------------------------------

def gauge_element(e: MoyalMatrix, phi: MoyalMatrix, psi: MoyalMatrix) -> MoyalMatrix:
    """``1 + hbar (e*phi*e + (1-e)*psi*(1-e))``: commutes with e, invertible."""
    q = _one_minus(e)
    return MoyalMatrix.identity(e.ctx, e.rows) + (e @ phi @ e + q @ psi @ q).shift(1)


@dataclass
class GaugeTransform:
    g: MoyalMatrix
    g_inv: MoyalMatrix
    connection: ConnectionData


@ex.acyclic
def gauge_transform(conn: ConnectionData, g: MoyalMatrix, check: bool = True) -> GaugeTransform:
    """Left: ``w^g = g^-1 w g - g^-1 d g``; right: ``w~^g = g^-1 w~ g + d(g^-1) g``."""
    e = conn.idempotent
    if check:
        from ..matalg import compare
        c = compare(e @ g, g @ e)
        if not c.passed:
            raise GaugeError(f"g does not commute with e (max dev {c.max_abs:.3g})")
    g_inv = series_inverse(g)
    omegas = []
    for i, w in enumerate(conn.omegas):
        if conn.side == LEFT:
            omegas.append(g_inv @ w @ g - g_inv @ g.partial(i))
        else:
            omegas.append(g_inv @ w @ g + g_inv.partial(i) @ g)
    new = ConnectionData(conn.side, omegas, e, canonical=False)
    return GaugeTransform(g, g_inv, new)


@ex.acyclic
def check_gauge(conn: ConnectionData, curv: CurvatureData, gt: GaugeTransform, sections=()) -> list:
    """Defining condition for the transformed connection, curvature covariance
    ``R^g = g^-1 R g`` and section covariance of the covariant derivative."""
    cond = check_connection(gt.connection, f"gauge-connection-{conn.side}")
    curv_g = curvature(gt.connection)
    cov = Check(f"gauge-curvature-{conn.side}", "R^g_ij = g^-1*R_ij*g")
    n = conn.n
    for i in range(n):
        for j in range(i + 1, n):
            cov.matrix(curv_g.two_forms[i, j], gt.g_inv @ curv.two_forms[i, j] @ gt.g, f"(i,j)=({i},{j})")
    sec = Check(f"gauge-nabla-{conn.side}",
                "nabla^g_i(zeta*g) = nabla_i(zeta)*g" if conn.side == LEFT
                else "nabla~^g_i(g^-1*xi) = g^-1*nabla~_i(xi)")
    for s_idx, s in enumerate(sections):
        for i in range(n):
            if conn.side == LEFT:
                sec.matrix(nabla(gt.connection, s @ gt.g, i), nabla(conn, s, i) @ gt.g, f"section {s_idx}, i={i}")
            else:
                sec.matrix(nabla(gt.connection, gt.g_inv @ s, i), gt.g_inv @ nabla(conn, s, i),
                           f"section {s_idx}, i={i}")
    return [cond, cov, sec]
