"""Commutative reference geometry computed pointwise with numpy.

Nothing here touches the star product or series arithmetic: the frame is
differentiated symbolically, every derivative is evaluated on the sample
points, and the metric, its inverse, the Levi-Civita symbols and the
curvature are assembled from arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import expr as ex
from .verdicts import Check


@dataclass
class ClassicalGeometry:
    """Arrays over the sample points (last axis is the point index).

    ``gamma[k, i, j]`` is Gamma^k_ij and ``riemann[l, k, i, j]`` is R^l_kij,
    with R^l_kij = -d_j G^l_ik - G^p_ik G^l_jp + d_i G^l_jk + G^p_jk G^l_ip.
    """

    metric: np.ndarray
    metric_inv: np.ndarray
    gamma: np.ndarray
    riemann: np.ndarray


def classical_geometry(frame_exprs, coords, eta, evaluator) -> ClassicalGeometry:
    n = len(frame_exprs)
    eta = np.asarray(eta, dtype=float)

    def ev(f):
        return np.broadcast_to(evaluator(f), evaluator(ex.ONE).shape).astype(float)

    E = np.array([[ev(f) for f in row] for row in frame_exprs])                       # (i, a, s)
    dE = np.array([[[ev(ex.differentiate(f, c)) for f in row] for row in frame_exprs]
                   for c in coords])                                                  # (k, i, a, s)
    ddE = np.array([[[[ev(ex.derivative(f, (c1, c2))) for f in row] for row in frame_exprs]
                     for c2 in coords] for c1 in coords])                             # (k, q, i, a, s)
    g = np.einsum("ias,a,jas->ijs", E, eta, E)
    dg = np.einsum("kias,a,jas->kijs", dE, eta, E) + np.einsum("ias,a,kjas->kijs", E, eta, dE)
    ddg = (np.einsum("kqias,a,jas->kqijs", ddE, eta, E)
           + np.einsum("kias,a,qjas->kqijs", dE, eta, dE)
           + np.einsum("qias,a,kjas->kqijs", dE, eta, dE)
           + np.einsum("ias,a,kqjas->kqijs", E, eta, ddE))
    S = g.shape[-1]
    gi = np.moveaxis(np.linalg.inv(np.moveaxis(g, -1, 0)), 0, -1)                      # (i, j, s)
    dgi = -np.einsum("ijs,kjls,lms->kims", gi, dg, gi)                                 # (k, i, m, s)

    # Gamma_ijl = 1/2 (d_i g_jl + d_j g_li - d_l g_ji)
    G_low = 0.5 * (dg + np.einsum("jlis->ijls", dg) - np.einsum("ljis->ijls", dg))
    # derivative of the lowered symbols along q
    dG_low = 0.5 * (ddg + np.einsum("qjlis->qijls", ddg)
                    - np.einsum("qljis->qijls", ddg))
    Gam = np.einsum("ijls,lks->kijs", G_low, gi)                                       # Gamma^k_ij
    dGam = (np.einsum("qijls,lks->qkijs", dG_low, gi)
            + np.einsum("ijls,qlks->qkijs", G_low, dgi))                               # d_q Gamma^k_ij
    R = np.zeros((n, n, n, n, S))
    for l in range(n):
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    val = -dGam[j, l, i, k] + dGam[i, l, j, k]
                    for p in range(n):
                        val = val - Gam[p, i, k] * Gam[l, j, p] + Gam[p, j, k] * Gam[l, i, p]
                    R[l, k, i, j] = val
    return ClassicalGeometry(g, gi, Gam, R)


def check_classical_limit(geom) -> list:
    """Order-zero parts of the metric, Christoffel symbols and Riemann tensor
    against the pointwise oracle, plus vanishing torsion at order zero."""
    ctx = geom.ctx
    ev = ctx.evaluator
    tol = ctx.box.tol
    ref = classical_geometry(geom.frame_exprs, ctx.coords, geom.spec.eta, ev)
    n = geom.n
    shape = ev(ex.ONE).shape

    def val(f):
        return np.broadcast_to(ev(f), shape)

    met = Check("classical-metric", "g_ij at hbar^0 = classical metric")
    for i in range(n):
        for j in range(n):
            met.values(val(geom.metric[i, j][0]), ref.metric[i, j], tol, f"(i,j)=({i},{j})")
    inv = Check("classical-inverse-metric", "g^ij at hbar^0 = classical inverse metric")
    for i in range(n):
        for j in range(n):
            inv.values(val(geom.metric_inv[i, j][0]), ref.metric_inv[i, j], tol, f"(i,j)=({i},{j})")
    chr_ = geom.christoffel()
    gam = Check("classical-christoffel", "Gamma^k_ij at hbar^0 = Levi-Civita symbols")
    tor = Check("classical-torsion", "Upsilon_ijl at hbar^0 = 0")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                gam.values(val(chr_.upper[i][j][k][0]), ref.gamma[k, i, j], tol, f"(k,i,j)=({k},{i},{j})")
                tor.values(val(chr_.torsion[i][j][k][0]), np.zeros(shape), tol, f"(i,j,l)=({i},{j},{k})")
    riem = Check("classical-riemann", "R^l_kij at hbar^0 = commutative curvature")
    data = geom.riemann()
    for key in sorted(data.left):
        l, k, i, j = key
        riem.values(val(data.left[key][0]), ref.riemann[l, k, i, j], tol, f"(l,k,i,j)={key}")
    return [met, inv, gam, tor, riem]
