import math
import random
import warnings

import numpy as np
import pytest

from moyalgeom import expr as ex
from moyalgeom import matalg
from moyalgeom.geometry import bundles, build_geometry
from moyalgeom.geometry import diagnostics as diag
from moyalgeom.geometry.classical import classical_geometry
from moyalgeom.geometry.embedded import EmbeddingSpec, IntegrabilityWarning
from moyalgeom.geometry.sampling import random_left_section, random_matrix, random_right_section
from moyalgeom.geometry.transform import (Chart, DiffeoError, DiffeoSpec, check_transform,
                                          coordinate_transform)
from moyalgeom.matalg import MoyalMatrix, NotEmbeddedError
from moyalgeom.moyal import AlgebraContext, star


def failing(verdicts):
    return [v.line() + " " + v.detail for v in verdicts if not v.passed]


def plane_spec(X, eta=None, **kw):
    box = ex.SampleBox({"t1": (-1.0, 1.0), "t2": (-1.0, 1.0)}, seed=2)
    return EmbeddingSpec(("t1", "t2"), [[0, 1], [-1, 0]], box, embedding=X, eta=eta, **kw)


# --- flat plane ------------------------------------------------------------------

def test_flat_plane_is_flat(flat_geom):
    e = flat_geom.idempotent
    for k in range(1, 4):
        assert all(c.is_zero for row in e.coefficient(k) for c in row)
    for R in flat_geom.curvature("left").two_forms.values():
        assert R.is_zero
    assert not failing(diag.structural_suite(flat_geom))


def test_flat_bar_diagnostics_pass(flat_geom):
    vs = diag.bar_diagnostics(flat_geom, sections=2)
    assert all(v.applicable and v.passed for v in vs)


# --- sphere ------------------------------------------------------------------------

def test_sphere_structural_suite(sphere_geom):
    assert not failing(diag.structural_suite(sphere_geom, seed=11))


def test_sphere_classical_christoffel(sphere_geom):
    """Gamma^theta_phiphi = -sin cos, Gamma^phi_thetaphi = cot at hbar^0."""
    up = sphere_geom.christoffel().upper
    box = sphere_geom.ctx.box
    th = ex.symbol("theta")
    assert ex.numeric_equal(up[1][1][0][0], ex.neg(ex.mul(ex.sin(th), ex.cos(th))), box)
    cot = ex.mul(ex.cos(th), ex.power(ex.sin(th), -1))
    assert ex.numeric_equal(up[0][1][1][0], cot, box)
    assert ex.numeric_equal(up[1][0][1][0], cot, box)


def test_sphere_classical_riemann(sphere_geom):
    """R^theta_{phi theta phi} = sin^2 theta for the round sphere."""
    R = sphere_geom.riemann().left
    th = ex.symbol("theta")
    assert ex.numeric_equal(R[0, 1, 0, 1][0], ex.power(ex.sin(th), 2), sphere_geom.ctx.box)


def test_sphere_metric_deformation(sphere_geom):
    """g_11 = 1 + hbar^2 cos(2 theta) on the unit sphere, from a sympy expansion of E_1 * E_1^t."""
    sympy = pytest.importorskip("sympy")
    th, ph = sympy.symbols("theta phi")
    X = [sympy.sin(th) * sympy.cos(ph), sympy.sin(th) * sympy.sin(ph), sympy.cos(th)]
    # f * g = sum_k hbar^k/k! sum_{a+b=k} C(k,a) (-1)^b d_th^a d_ph^b f d_ph^a d_th^b g
    def moyal_k(f, g, k):
        return sum(sympy.binomial(k, a) * (-1) ** (k - a)
                   * sympy.diff(f, th, a, ph, k - a) * sympy.diff(g, ph, a, th, k - a)
                   for a in range(k + 1)) / sympy.factorial(k)
    E1 = [sympy.diff(x, th) for x in X]
    for k in range(4):
        ref = sympy.lambdify((th, ph), sum(moyal_k(c, c, k) for c in E1))
        ours = sphere_geom.metric[0, 0][k]
        for t, p in [(0.5, 1.0), (1.4, 4.0)]:
            assert ex.evaluate(ours, {"theta": t, "phi": p}) == pytest.approx(float(ref(t, p)), abs=1e-12)


def test_sphere_classical_suite(sphere_geom):
    assert not failing(diag.classical_suite(sphere_geom))


def test_sphere_bar_suite(sphere_geom):
    assert not failing(diag.bar_diagnostics(sphere_geom, sections=2))


def test_classical_oracle_on_polar_plane():
    """Flat plane in polar coordinates: Gamma^r_phiphi = -r, R = 0."""
    ctx = AlgebraContext(["r", "p"], [[0, 0], [0, 0]], 0,
                         box=ex.SampleBox({"r": (1.0, 2.0), "p": (0.0, 1.0)}))
    F = [[ctx.parse("cos(p)"), ctx.parse("sin(p)"), ex.ZERO],
         [ctx.parse("-r*sin(p)"), ctx.parse("r*cos(p)"), ex.ZERO]]
    cg = classical_geometry(F, ("r", "p"), (1, 1, 1), ctx.evaluator)
    r = ctx.evaluator(ex.symbol("r"))
    np.testing.assert_allclose(cg.gamma[0, 1, 1], -r, atol=1e-13)
    np.testing.assert_allclose(cg.gamma[1, 0, 1], 1 / r, atol=1e-13)
    np.testing.assert_allclose(cg.riemann, 0, atol=1e-12)


# --- gauge ------------------------------------------------------------------------

def test_identity_gauge_changes_nothing(sphere_geom):
    conn = sphere_geom.connection("left")
    I = MoyalMatrix.identity(sphere_geom.ctx, 3)
    gt = bundles.gauge_transform(conn, I)
    for w, wg in zip(conn.omegas, gt.connection.omegas):
        assert matalg.series_equal(w, wg)
    curv = sphere_geom.curvature("left")
    curv_g = bundles.curvature(gt.connection)
    for key, R in curv.two_forms.items():
        assert matalg.series_equal(curv_g.two_forms[key], R)


def test_gauge_suite_on_sphere(sphere_geom):
    vs = diag.gauge_suite(sphere_geom, seed=4, count=1)
    assert len(vs) == 6 and not failing(vs)


def test_non_commuting_gauge_element_rejected(sphere_geom):
    ctx = sphere_geom.ctx
    rng = random.Random(0)
    g = MoyalMatrix.identity(ctx, 3) + random_matrix(ctx, rng, 3, 3, 1, orders=1).shift(1)
    with pytest.raises(bundles.GaugeError):
        bundles.gauge_transform(sphere_geom.connection("left"), g)


def test_module_membership(sphere_geom):
    rng = random.Random(1)
    z = random_left_section(sphere_geom, rng)
    x = random_right_section(sphere_geom, rng)
    e = sphere_geom.idempotent
    assert bundles.in_left_module(z, e) and bundles.in_right_module(x, e)
    stray = MoyalMatrix.lift(sphere_geom.ctx, [["1", "0", "0"]])
    with pytest.raises(bundles.ModuleMembershipError):
        bundles.nabla_left(sphere_geom.connection("left"), stray, 0, check=True)


# --- coordinate changes -------------------------------------------------------------

def test_identity_diffeo_changes_nothing(sphere_geom):
    box = ex.SampleBox({"a": (0.3, math.pi - 0.3), "b": (0.3, 2 * math.pi - 0.3)}, seed=7)
    d = DiffeoSpec(("a", "b"), ["theta", "phi"], ["a", "b"], box)
    tg = coordinate_transform(sphere_geom, d)
    ren = {"a": ex.symbol("theta"), "b": ex.symbol("phi")}
    e = sphere_geom.idempotent
    for a in range(3):
        for b in range(3):
            for k in range(4):
                back = ex.substitute(tg.idempotent[a, b][k], ren)
                assert ex.numeric_equal(back, e[a, b][k], sphere_geom.ctx.box)
    assert not failing(diag._finish(check_transform(tg), 0))


def test_scaling_diffeo_on_flat_plane(flat_geom):
    from moyalgeom.presets import load_preset
    d = load_preset("flat").diffeo
    tg = coordinate_transform(flat_geom, d)
    assert all(R.is_zero for R in tg.two_forms.values())
    assert all(c.free == frozenset() for row in tg.idempotent.entries for x in row for c in x.coeffs)
    assert not failing(diag.transform_suite(flat_geom, d))


def test_linear_chart_product_is_moyal_with_transformed_theta():
    """For u = J t the transported product is the Moyal product with theta_u = J theta J^t."""
    theta = [[0, 1], [-1, 0]]
    J = [[2, 1], [1, 1]]
    t_box = ex.SampleBox({"t1": (-1.0, 1.0), "t2": (-1.0, 1.0)}, seed=1)
    u_box = ex.SampleBox({"u1": (-1.0, 1.0), "u2": (-1.0, 1.0)}, seed=1)
    ctx = AlgebraContext(["t1", "t2"], theta, 3, box=t_box)
    d = DiffeoSpec(("u1", "u2"), ["2*t1 + t2", "t1 + t2"], ["u1 - u2", "2*u2 - u1"], u_box)
    chart = Chart(ctx, d)
    assert chart.check_round_trip().passed
    Jn = np.array(J)
    theta_u = (Jn @ np.array(theta) @ Jn.T).tolist()
    ref = AlgebraContext(["u1", "u2"], theta_u, 3, box=u_box)
    for f, g in [("u1^2*u2", "sin(u1)"), ("exp(u2)", "u1*u2^3"), ("cos(u1 - u2)", "u1^3")]:
        a = chart.star(chart.ctx.lift(f), chart.ctx.lift(g))
        b = star(ref.lift(f), ref.lift(g))
        for k in range(4):
            assert ex.numeric_equal(a[k], b[k], u_box)


def test_bad_inverse_map_rejected(flat_geom):
    box = ex.SampleBox({"u1": (-4.0, 4.0), "u2": (-4.0, 4.0)})
    d = DiffeoSpec(("u1", "u2"), ["2*t1", "2*t2"], ["u1", "u2/2"], box)
    with pytest.raises(DiffeoError):
        coordinate_transform(flat_geom, d)


# --- build errors and conventions ----------------------------------------------------

def test_degenerate_embedding_is_not_embedded():
    with pytest.raises(NotEmbeddedError):
        build_geometry(plane_spec(["t1", "t1", "0"]))


def test_non_integrable_frame_warns():
    box = ex.SampleBox({"t1": (0.5, 1.0), "t2": (0.5, 1.0)})
    spec = EmbeddingSpec(("t1", "t2"), [[0, 1], [-1, 0]], box,
                         frame=[["1", "0", "t2"], ["0", "1", "0"]])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        geom = build_geometry(spec)
    assert any(issubclass(w.category, IntegrabilityWarning) for w in caught)
    assert geom.warnings


def test_minkowski_signature():
    """A spacelike surface in R^{2,1}: E_i * e = E_i still holds with eta inserted."""
    geom = build_geometry(plane_spec(["t1", "t2", "(t1^2 + t2^2)/4"], eta=(1, 1, -1)))
    vs = diag.structural_suite(geom, sections=1)
    assert not failing(vs)
    bar = diag.bar_diagnostics(geom)
    assert all(not v.applicable for v in bar)


def test_spec_validation():
    box = ex.SampleBox({"t1": (-1.0, 1.0), "t2": (-1.0, 1.0)})
    with pytest.raises(ValueError):
        EmbeddingSpec(("t1", "t2"), [[0, 1], [-1, 0]], box, embedding=["t1", "t2"])
    with pytest.raises(ValueError):
        EmbeddingSpec(("t1", "t2"), [[0, 1], [-1, 0]], box, embedding=["t1", "t2", "0"], eta=(1, 2, 1))
    with pytest.raises(ValueError):
        EmbeddingSpec(("t1", "t3"), [[0, 1], [-1, 0]], box, embedding=["t1", "t3", "0"])


def test_idempotent_entry_bounds(sphere_geom):
    assert sphere_geom.idempotent_entry(0, 0) is sphere_geom.idempotent[0, 0]
    with pytest.raises(IndexError):
        sphere_geom.idempotent_entry(3, 0)


def test_verdicts_are_reproducible(sphere_geom):
    a = [v.to_dict() for v in diag.bar_diagnostics(sphere_geom, seed=9, sections=1)]
    b = [v.to_dict() for v in diag.bar_diagnostics(sphere_geom, seed=9, sections=1)]
    assert a == b and all(d["seed"] == 9 for d in a)
