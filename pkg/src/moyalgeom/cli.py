"""Command line front end.

    moyalgeom COMMAND [SPECFILE | --preset NAME] [--format json|text]
                      [--order N] [--seed S] [--output FILE]

Exit status: 0 when every verdict passes, 1 when a check fails, 2 for
unreadable or malformed input, 3 when the geometry cannot be built
(singular metric, failed duality, evaluation outside the domain).
"""
from __future__ import annotations

import argparse
import random
import sys
import warnings

from . import __version__
from . import expr as ex
from .geometry import bundles
from .geometry import diagnostics as diag
from .geometry import embedded as em
from .geometry.transform import DiffeoError, check_transform, coordinate_transform
from .matalg import NotEmbeddedError
from .presets import PRESETS, load_preset
from .report import GeometryReport, index_key, matrix_entries, series_strings
from .specfile import SpecError, load_spec

COMMANDS = ("metric", "idempotent", "connection", "curvature", "riemann", "check", "transform",
            "classical")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_MATH = 0, 1, 2, 3


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="moyalgeom",
                                description="Noncommutative geometry of embedded Moyal spaces.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("specfile", nargs="?", help="specification file (or use --preset)")
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--format", choices=("json", "text"), default="text")
    p.add_argument("--order", type=int, help="truncation order N (overrides the file)")
    p.add_argument("--seed", type=int, help="sampling seed (overrides the file)")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


# --- commands ------------------------------------------------------------------

def _metric(geom, seed, sf, rep):
    rep.objects["metric"] = matrix_entries(geom.metric)
    rep.objects["metric_inverse"] = matrix_entries(geom.metric_inv)
    rep.verdicts += diag._finish([em.check_duality(geom)], seed)


def _idempotent(geom, seed, sf, rep):
    rep.objects["idempotent"] = matrix_entries(geom.idempotent)
    rep.verdicts += diag._finish([em.check_idempotent(geom), em.check_frame_fixed(geom)], seed)


def _connection(geom, seed, sf, rep):
    n = geom.n
    for side, label in ((bundles.LEFT, "omega"), (bundles.RIGHT, "omega_right")):
        conn = geom.connection(side)
        rep.objects[label] = {str(i + 1): matrix_entries(w) for i, w in enumerate(conn.omegas)}
        rep.verdicts += diag._finish([bundles.check_connection(conn)], seed)
    ch = geom.christoffel()
    for label, arr in (("christoffel", ch.upper), ("christoffel_right", ch.upper_right)):
        # key "k,i,j" for Gamma^k_ij
        rep.objects[label] = {index_key((k, i, j)): series_strings(arr[i][j][k])
                              for k in range(n) for i in range(n) for j in range(n)}
    rep.verdicts += diag._finish([em.check_gamma_identity(geom)], seed)


def _curvature(geom, seed, sf, rep):
    n = geom.n
    for side, label in ((bundles.LEFT, "curvature"), (bundles.RIGHT, "curvature_right")):
        curv = geom.curvature(side)
        rep.objects[label] = {index_key((i, j)): matrix_entries(curv.two_forms[i, j])
                              for i in range(n) for j in range(i + 1, n)}
        rep.verdicts += diag._finish([bundles.check_bianchi(curv)], seed)


def _riemann(geom, seed, sf, rep):
    r = geom.riemann()
    for label, table in (("riemann", r.left), ("riemann_right", r.right)):
        # key "l,k,i,j" for R^l_kij
        rep.objects[label] = {index_key(key): series_strings(table[key]) for key in sorted(table)}
    rep.verdicts += diag._finish(em.check_riemann_routes(geom), seed)


def _check(geom, seed, sf, rep):
    rep.verdicts += diag.full_suite(geom, seed, sf.diffeo)


def _transform(geom, seed, sf, rep):
    tg = coordinate_transform(geom, sf.diffeo)
    rep.objects["idempotent_u"] = matrix_entries(tg.idempotent)
    rep.objects["curvature_u"] = {index_key(key): matrix_entries(R)
                                  for key, R in sorted(tg.two_forms.items())}
    rep.verdicts += diag._finish(check_transform(tg, random.Random(seed)), seed)


def _classical(geom, seed, sf, rep):
    n = geom.n
    rep.objects["metric_0"] = {index_key((i, j)): ex.to_string(geom.metric[i, j][0])
                               for i in range(n) for j in range(n)}
    ch = geom.christoffel()
    rep.objects["christoffel_0"] = {index_key((k, i, j)): ex.to_string(ex.simplify(ch.upper[i][j][k][0]))
                                    for k in range(n) for i in range(n) for j in range(n)}
    rep.verdicts += diag.classical_suite(geom, seed)


HANDLERS = {
    "metric": _metric, "idempotent": _idempotent, "connection": _connection,
    "curvature": _curvature, "riemann": _riemann, "check": _check, "transform": _transform,
    "classical": _classical,
}


def run(command: str, specfile=None, preset=None, order=None, seed=None):
    """Build the report for one command; raises on input or build errors."""
    if (specfile is None) == (preset is None):
        raise UsageError("give exactly one of SPECFILE or --preset")
    if preset is not None:
        sf = load_preset(preset, order, seed)
        source = f"preset:{preset}"
    else:
        sf = load_spec(specfile, order, seed)
        source = str(specfile)
    if command == "transform" and sf.diffeo is None:
        raise UsageError("the 'transform' command needs a [diffeo] section")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", em.IntegrabilityWarning)
        geom = em.build_geometry(sf.spec)
    meta = {
        "command": command,
        "source": source,
        "spec_hash": sf.digest,
        "order": sf.spec.order,
        "seed": sf.seed,
        "coords": list(sf.spec.coords),
        "version": __version__,
    }
    notes = sorted({str(w.message) for w in caught})
    if notes:
        meta["warnings"] = notes
    rep = GeometryReport(meta)
    HANDLERS[command](geom, sf.seed, sf, rep)
    return rep


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rep = run(args.command, args.specfile, args.preset, args.order, args.seed)
    except (SpecError, ex.ParseError, ex.UndeclaredSymbolError, UsageError, OSError) as err:
        print(f"moyalgeom: error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (NotEmbeddedError, em.DualityError, ex.DomainError, DiffeoError,
            bundles.GaugeError, bundles.ModuleMembershipError) as err:
        print(f"moyalgeom: cannot build geometry: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_MATH
    text = rep.to_json() if args.format == "json" else rep.to_text()
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
