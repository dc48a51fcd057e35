"""Acceptance criteria 1-8, each timed against its runtime limit at tolerance 1e-8."""
import math
import random
import time

import pytest

from moyalgeom import expr as ex
from moyalgeom import matalg, moyal
from moyalgeom.geometry import bundles, build_geometry
from moyalgeom.geometry import diagnostics as diag
from moyalgeom.geometry.sampling import random_element, random_matrix
from moyalgeom.geometry.transform import check_transform, coordinate_transform
from moyalgeom.matalg import MoyalMatrix, dagger, mat_star, series_inverse
from moyalgeom.moyal import AlgebraContext, bar, star
from moyalgeom.presets import load_preset

TOL = 1e-8
SCH = "schwarzschild-slice"


def schwarzschild():
    sf = load_preset(SCH)
    assert sf.spec.box.tol == TOL
    return build_geometry(sf.spec), sf


def worst(verdicts):
    bad = [v for v in verdicts if not v.passed]
    dev = max((v.max_deviation for v in verdicts), default=0.0)
    return bad, dev


def _series_golden(geom, key, coeffs):
    """Max deviation of the series ``geom.metric``/``idempotent`` entry against golden coefficients."""
    names = geom.ctx.names
    ok, dev = True, 0.0
    for k, text in enumerate(coeffs):
        c = ex.compare(key[k], ex.parse(text, names), geom.ctx.box, geom.ctx.evaluator)
        ok &= c.passed
        dev = max(dev, c.max_abs)
    return ok, dev


def test_criterion_1_schwarzschild_metric(acceptance):
    t0 = time.perf_counter()
    geom, _ = schwarzschild()
    c2 = "cos(2*theta)"
    s2 = "sin(2*theta)"
    golden = {
        (0, 0): ["1/(1 - 2*m/r)", "0", f"-{c2}", "0"],
        (0, 1): ["0", "0", f"r*{s2}", "0"],
        (1, 1): ["r^2", "0", f"r^2*{c2}", "0"],
        (0, 2): ["0", f"-r*{s2}", "0", f"-2/3*r*{s2}"],
        (1, 2): ["0", f"-r^2*{c2}", "0", f"-2/3*r^2*{c2}"],
        (2, 2): ["r^2*sin(theta)^2", "0", f"-r^2*{c2}", "0"],
    }
    ok, dev, failed = True, 0.0, []
    for (i, j), coeffs in golden.items():
        good, d = _series_golden(geom, geom.metric[i, j], coeffs)
        ok &= good
        dev = max(dev, d)
        if not good:
            failed.append(f"g_{i + 1}{j + 1}")
    elapsed = time.perf_counter() - t0
    assert acceptance(1, "deformed Schwarzschild metric goldens", ok, elapsed, 30,
                      f"max dev {dev:.2g}" + (f", failed {failed}" if failed else ""))


def test_criterion_2_schwarzschild_idempotent(acceptance):
    t0 = time.perf_counter()
    geom, _ = schwarzschild()
    sq = "sqrt(m/(-4*m + 2*r))"
    golden = {
        (0, 0): ["2*m/r", "0", "2*m*(2*m - r)*(2 + cos(2*theta))/r^2"],
        (0, 3): [f"m*cos(theta)/(r*{sq})", "0",
                 f"m*cos(theta)*(4*m - r + 2*m*cos(2*theta))/(r^2*{sq})"],
        (1, 1): ["1 - 2*m*sin(theta)^2*cos(phi)^2/r", "0",
                 "m/(2*r^2)*(2*r + 2*m*cos(4*theta)*cos(phi)^2 - 6*m*cos(phi)^2"
                 " + 2*cos(2*theta)*(m + 8*r + (m - r)*cos(2*phi)))"],
        (3, 3): ["1 - 2*m*cos(theta)^2/r", "0", "4*m*cos(theta)^2*(-2*m + r - m*cos(2*theta))/r^2"],
    }
    e = geom.idempotent
    ok, dev = True, 0.0
    for key, coeffs in golden.items():
        good, d = _series_golden(geom, e[key], coeffs)
        ok &= good
        dev = max(dev, d)
    # e_0, e_2 symmetric and e_1, e_3 skew, coefficient by coefficient
    parity = True
    ctx = geom.ctx
    for k in range(ctx.order + 1):
        grid = e.coefficient(k)
        sign = -1 if k % 2 else 1
        for a in range(geom.m):
            for b in range(geom.m):
                target = grid[a][b] if sign > 0 else ex.neg(grid[a][b])
                c = ex.compare(grid[b][a], target, ctx.box, ctx.evaluator)
                parity &= c.passed
                dev = max(dev, c.max_abs)
    elapsed = time.perf_counter() - t0
    assert acceptance(2, "idempotent goldens e11 e14 e22 e44 and parity pattern", ok and parity,
                      elapsed, 60, f"max dev {dev:.2g}, parity {'ok' if parity else 'broken'}")


def test_criterion_3_structural_suite(acceptance):
    t0 = time.perf_counter()
    report = []
    all_bad = []
    for name in ("flat", "sphere", SCH):
        geom = build_geometry(load_preset(name).spec)
        bad, dev = worst(diag.structural_suite(geom, seed=0))
        all_bad += [f"{name}:{v.name}" for v in bad]
        report.append(f"{name} max dev {dev:.2g}")
    elapsed = time.perf_counter() - t0
    assert acceptance(3, "structural identities on flat, sphere, Schwarzschild", not all_bad, elapsed,
                      300, ", ".join(report) + (f", failed {all_bad}" if all_bad else ""))


def test_criterion_4_algebra_properties(acceptance):
    t0 = time.perf_counter()
    box = ex.SampleBox({"x": (-1.5, 1.5), "y": (-1.5, 1.5), "z": (-1.5, 1.5)}, seed=0)
    ctx = AlgebraContext(["x", "y", "z"], [[0, 1, 0], [-1, 0, 2], [0, -2, 0]], 3, (), box)
    rng = random.Random(2024)
    I2 = MoyalMatrix.identity(ctx, 2)
    counts = dict.fromkeys(["assoc", "leibniz", "bar", "dagger", "inverse", "geometric"], 0)
    failures = []

    def record(name, comparison):
        counts[name] += 1
        if not comparison.passed:
            failures.append(name)

    for _ in range(9):
        f, g, h = (random_element(ctx, rng, 2) for _ in range(3))
        record("assoc", moyal.compare(star(star(f, g), h), star(f, star(g, h))))
        i = rng.randrange(3)
        record("leibniz", moyal.compare(star(f, g).partial(i),
                                        star(f.partial(i), g) + star(f, g.partial(i))))
        record("bar", moyal.compare(bar(star(f, g)), star(bar(g), bar(f))))
        A = random_matrix(ctx, rng, 2, 3, 1)
        B = random_matrix(ctx, rng, 3, 2, 1)
        record("dagger", matalg.compare(dagger(A @ B), dagger(B) @ dagger(A)))
        C = random_matrix(ctx, rng, 2, 2, 1)
        # order-zero part dominated by the diagonal shift, so it is invertible on the box
        G = MoyalMatrix.build(ctx, 2, 2, lambda a, b: C[a, b] + (ctx.lift(30) if a == b else 0))
        H = series_inverse(G)
        record("inverse", matalg.compare(G @ H, I2))
        record("inverse", matalg.compare(H @ G, I2))
        hA = random_matrix(ctx, rng, 2, 2, 1).shift(1)
        geo = I2 - hA + mat_star(hA, hA) - mat_star(mat_star(hA, hA), hA)
        record("geometric", matalg.compare(series_inverse(I2 + hA), geo))
    total = sum(counts.values())
    elapsed = time.perf_counter() - t0
    assert total >= 50
    assert acceptance(4, "algebra properties", not failures, elapsed, 120,
                      f"{total} cases" + (f", failed {sorted(set(failures))}" if failures else ""))


def test_criterion_5_gauge_covariance(acceptance):
    t0 = time.perf_counter()
    geom, _ = schwarzschild()
    conn, curv = geom.connection("left"), geom.curvature("left")
    rng = random.Random(0)
    e = geom.idempotent
    bad, dev = [], 0.0
    for t in range(10):
        phi = random_matrix(geom.ctx, rng, geom.m, geom.m, 1, orders=1)
        psi = random_matrix(geom.ctx, rng, geom.m, geom.m, 1, orders=1)
        g = bundles.gauge_element(e, phi, psi)
        gt = bundles.gauge_transform(conn, g)
        cond, cov, _ = bundles.check_gauge(conn, curv, gt, ())
        for c in (cond, cov):
            dev = max(dev, c.max_dev)
            if not c.passed:
                bad.append(f"element {t}: {c.name}")
    elapsed = time.perf_counter() - t0
    assert acceptance(5, "gauge covariance, 10 elements on Schwarzschild", not bad, elapsed, 120,
                      f"max dev {dev:.2g}" + (f", failed {bad}" if bad else ""))


def test_criterion_6_coordinate_covariance(acceptance):
    t0 = time.perf_counter()
    geom, sf = schwarzschild()
    assert [ex.to_string(f) for f in sf.diffeo.forward] == ["r", "theta + phi", "theta - phi"]
    tg = coordinate_transform(geom, sf.diffeo)
    checks = check_transform(tg, random.Random(0), triples=3)
    names = {c.name for c in checks}
    assert {"chart-idempotent", "chart-curvature"} <= names
    bad = [c.name for c in checks if not c.passed]
    dev = max(c.max_dev for c in checks)
    elapsed = time.perf_counter() - t0
    assert acceptance(6, "coordinate covariance under u = (r, theta+phi, theta-phi)", not bad,
                      elapsed, 120, f"max dev {dev:.2g}" + (f", failed {bad}" if bad else ""))


def test_criterion_7_classical_limit(acceptance):
    t0 = time.perf_counter()
    report, all_bad = [], []
    for name in ("sphere", SCH):
        geom = build_geometry(load_preset(name).spec)
        bad, dev = worst(diag.classical_suite(geom))
        all_bad += [f"{name}:{v.name}" for v in bad]
        report.append(f"{name} max dev {dev:.2g}")
    elapsed = time.perf_counter() - t0
    assert acceptance(7, "classical limit on sphere and Schwarzschild", not all_bad, elapsed, 60,
                      ", ".join(report) + (f", failed {all_bad}" if all_bad else ""))


def test_criterion_8_bar_diagnostics(acceptance):
    t0 = time.perf_counter()
    geom, _ = schwarzschild()
    vs = diag.bar_diagnostics(geom, seed=0, sections=10)
    assert all(v.applicable for v in vs)
    bad, dev = worst(vs)
    elapsed = time.perf_counter() - t0
    assert acceptance(8, "bar diagnostics on Schwarzschild, 10 sections", not bad, elapsed, 60,
                      f"max dev {dev:.2g}" + (f", failed {[v.name for v in bad]}" if bad else ""))
