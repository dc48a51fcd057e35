"""Diagnostic suites: each returns a list of verdicts."""
from __future__ import annotations

import random

from .. import expr as ex
from ..matalg import MoyalMatrix, dagger
from ..moyal import bar
from . import bundles
from . import embedded as em
from .classical import check_classical_limit
from .sampling import random_left_section, random_matrix, random_right_section
from .transform import check_transform, coordinate_transform
from .verdicts import Check, not_applicable


def _finish(checks, seed):
    out = []
    for c in checks:
        c.seed = seed
        out.append(c.verdict())
    return out


@ex.acyclic
def structural_suite(geom, seed: int = 0, sections: int = 2) -> list:
    """Duality, idempotency, connection conditions, canonical curvature,
    Christoffel identities, metric compatibility, Bianchi, both Riemann
    routes and the action of the curvature on frames and random sections."""
    rng = random.Random(seed)
    lefts = [random_left_section(geom, rng) for _ in range(sections)]
    rights = [random_right_section(geom, rng) for _ in range(sections)]
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    cl, cr = geom.curvature(bundles.LEFT), geom.curvature(bundles.RIGHT)
    checks = [em.check_duality(geom), em.check_frame_fixed(geom), em.check_idempotent(geom),
              bundles.check_connection(left), bundles.check_connection(right)]
    canon = Check("curvature-canonical", "R_ij = R~_ij = -[d_i e, d_j e]")
    forms = bundles.canonical_two_form(geom.idempotent, geom.n)
    for key, R in forms.items():
        if key[0] < key[1]:
            canon.matrix(cl[key], R, f"left (i,j)={key}")
            canon.matrix(cr[key], R, f"right (i,j)={key}")
    checks.append(canon)
    stable = Check("module-stability", "nabla_i zeta * e = nabla_i zeta, e * nabla~_i xi = nabla~_i xi")
    for s, (z, x) in enumerate(zip(lefts, rights)):
        for i in range(geom.n):
            dz = bundles.nabla_left(left, z, i)
            dx = bundles.nabla_right(right, x, i)
            stable.matrix(dz @ geom.idempotent, dz, f"left section {s}, i={i}")
            stable.matrix(geom.idempotent @ dx, dx, f"right section {s}, i={i}")
    checks.append(stable)
    checks.append(em.check_gamma_identity(geom))
    checks += em.check_gamma_lemma(geom)
    checks.append(em.check_metric_compatibility(geom))
    checks.append(em.check_pairing_compatibility(geom, lefts, rights))
    checks.append(check_fibre_metric(geom))
    checks.append(bundles.check_bianchi(cl))
    checks.append(bundles.check_bianchi(cr))
    checks += em.check_riemann_routes(geom)
    checks += em.check_frame_curvature(geom)
    checks.append(bundles.check_curvature_action(cl, lefts))
    checks.append(bundles.check_curvature_action(cr, rights))
    checks.append(bundles.check_double_commutator(cl, lefts[:1]))
    checks.append(bundles.check_double_commutator(cr, rights[:1]))
    return _finish(checks, seed)


def check_fibre_metric(geom) -> Check:
    """Fibre metric on frames and the compatibility of Lambda = 1."""
    chk = Check("fibre-metric", "g(E_i, E_j^t) = g_ij and e*d_i(e)*e = 0")
    n = geom.n
    for i in range(n):
        for j in range(n):
            chk.series(bundles.fibre_metric(geom.frame[i], geom.right_frame[j]), geom.metric[i, j],
                       f"(i,j)=({i},{j})")
    e = geom.idempotent
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    ident = MoyalMatrix.identity(geom.ctx, geom.m)
    for i in range(n):
        chk.zero_matrix(e @ e.partial(i) @ e, f"e*d_{i}(e)*e")
        chk.zero_matrix(bundles.form_compatibility_defect(ident, left, right, i), f"Lambda=1, i={i}")
    return chk


@ex.acyclic
def gauge_suite(geom, seed: int = 0, count: int = 10, degree: int = 1) -> list:
    """Random elements ``1 + hbar (e*phi*e + (1-e)*psi*(1-e))`` acting on the
    canonical left and right connections."""
    rng = random.Random(seed)
    e = geom.idempotent
    m = geom.m
    out_checks = {}
    for side in (bundles.LEFT, bundles.RIGHT):
        conn, curv = geom.connection(side), geom.curvature(side)
        for t in range(count):
            phi = random_matrix(geom.ctx, rng, m, m, degree, orders=1)
            psi = random_matrix(geom.ctx, rng, m, m, degree, orders=1)
            g = bundles.gauge_element(e, phi, psi)
            gt = bundles.gauge_transform(conn, g)
            sec = [random_left_section(geom, rng) if side == bundles.LEFT else random_right_section(geom, rng)]
            for c in bundles.check_gauge(conn, curv, gt, sec):
                agg = out_checks.setdefault(c.name, Check(c.name, c.identity))
                agg.count += c.count
                agg.max_dev = max(agg.max_dev, c.max_dev)
                if not c.passed and agg.passed:
                    agg.passed = False
                    agg.detail = f"element {t}: {c.detail}"
    return _finish(list(out_checks.values()), seed)


def transform_suite(geom, diffeo, seed: int = 0, triples: int = 3) -> list:
    tg = coordinate_transform(geom, diffeo)
    return _finish(check_transform(tg, random.Random(seed), triples), seed)


@ex.acyclic
def classical_suite(geom, seed: int = 0) -> list:
    return _finish(check_classical_limit(geom), seed)


BAR_CHECKS = [
    ("bar-metric", "bar(g_ij) = g_ji"),
    ("bar-idempotent", "e^dagger = e"),
    ("bar-parity", "e_k^t = (-1)^k e_k"),
    ("bar-connection", "w_i^dagger = w_i, w~_i = -w_i^dagger"),
    ("bar-curvature", "R_ij^dagger = -R_ij, R~_ij = -R_ij^dagger"),
    ("bar-nabla", "(nabla_i zeta)^dagger = nabla~_i(zeta^dagger)"),
]


@ex.acyclic
def bar_diagnostics(geom, seed: int = 0, sections: int = 10) -> list:
    """Self-adjointness package for Euclidean embeddings with real input."""
    if not geom.spec.euclidean:
        return [not_applicable(name, ident, "signature is not Euclidean", seed) for name, ident in BAR_CHECKS]
    real = all(c.is_zero for E in geom.frame for x in E.entries[0] for c in x.coeffs[1::2])
    if not real:
        return [not_applicable(name, ident, "embedding is not bar-invariant", seed) for name, ident in BAR_CHECKS]
    rng = random.Random(seed)
    n = geom.n
    checks = [Check(name, ident) for name, ident in BAR_CHECKS]
    met, idem, par, con, cur, nab = checks
    for i in range(n):
        for j in range(n):
            met.series(bar(geom.metric[i, j]), geom.metric[j, i], f"(i,j)=({i},{j})")
    e = geom.idempotent
    idem.matrix(dagger(e), e)
    ctx = geom.ctx
    for k in range(ctx.order + 1):
        sign = -1 if k % 2 else 1
        grid = e.coefficient(k)
        for a in range(geom.m):
            for b in range(geom.m):
                par._record(_expr_cmp(ctx, grid[b][a], grid[a][b], sign), f"k={k}, ({a},{b})")
    left, right = geom.connection(bundles.LEFT), geom.connection(bundles.RIGHT)
    for i in range(n):
        w = left.omegas[i]
        con.matrix(dagger(w), w, f"i={i}")
        con.matrix(right.omegas[i], -dagger(w), f"i={i} right")
    cl, cr = geom.curvature(bundles.LEFT), geom.curvature(bundles.RIGHT)
    for i in range(n):
        for j in range(i + 1, n):
            R = cl[i, j]
            cur.matrix(dagger(R), -R, f"(i,j)=({i},{j})")
            cur.matrix(cr[i, j], -dagger(R), f"(i,j)=({i},{j}) right")
    for s in range(sections):
        z = random_left_section(geom, rng)
        zd = dagger(z)
        for i in range(n):
            nab.matrix(dagger(bundles.nabla_left(left, z, i)), bundles.nabla_right(right, zd, i),
                       f"section {s}, i={i}")
    return _finish(checks, seed)


def _expr_cmp(ctx, a, b, sign):
    target = b if sign > 0 else ex.neg(b)
    return ex.compare(a, target, ctx.box, ctx.evaluator)


@ex.acyclic
def full_suite(geom, seed: int = 0, diffeo=None, gauge_count: int = 2) -> list:
    verdicts = structural_suite(geom, seed)
    verdicts += gauge_suite(geom, seed, gauge_count)
    verdicts += bar_diagnostics(geom, seed, sections=2)
    verdicts += classical_suite(geom, seed)
    if diffeo is not None:
        verdicts += transform_suite(geom, diffeo, seed)
    return verdicts
