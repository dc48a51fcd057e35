import pytest

from moyalgeom.presets import PRESETS, load_preset, preset_text
from moyalgeom.specfile import SpecError, load_spec, parse_spec, spec_hash

BASE = """\
[algebra]
coords = x, y
theta = 0 1; -1 0

[box]
x = -1, 1
y = -1, 1

[embedding]
X = x, y, x*y
"""


def parse_err(text):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    return info.value


def test_minimal_spec_defaults():
    sf = parse_spec(BASE)
    assert sf.spec.order == 3 and sf.seed == 0
    assert sf.spec.m == 3 and sf.diffeo is None


def test_overrides():
    sf = parse_spec(BASE, order=2, seed=5)
    assert sf.spec.order == 2 and sf.seed == 5 and sf.spec.box.seed == 5


def test_non_skew_theta_reports_line():
    err = parse_err(BASE.replace("0 1; -1 0", "0 1; 1 0"))
    assert err.line == 3 and "skew" in str(err)


def test_expression_error_reports_line():
    err = parse_err(BASE.replace("x*y", "sin(x"))
    assert err.line == 10 and "expected ')'" in str(err)


def test_undeclared_symbol_reports_line():
    err = parse_err(BASE.replace("x*y", "x*z"))
    assert err.line == 10 and "'z'" in str(err)


@pytest.mark.parametrize("old, new, fragment", [
    ("coords = x, y", "coords = x, x", "duplicate"),
    ("coords = x, y", "coords = x, sin", "reserved"),
    ("theta = 0 1; -1 0", "theta = 0 1", "rows"),
    ("x = -1, 1", "x = 1, -1", "empty interval"),
    ("y = -1, 1\n", "y = -1, 1\nz = 0, 1\n", "unknown key"),
    ("X = x, y, x*y", "X = x, y", "ambient dimension"),
    ("[embedding]", "[embed]", "missing section"),
    ("theta = 0 1; -1 0", "theta = 0 1; -1 0\norder = 9", "order"),
    ("theta = 0 1; -1 0", "theta = 0 q; -1 0", "undeclared"),
])
def test_file_level_errors(old, new, fragment):
    assert fragment in str(parse_err(BASE.replace(old, new)))


def test_duplicate_section_is_a_spec_error():
    err = parse_err(BASE + "\n[box]\nx = 0, 1\n")
    assert err.line is not None


def test_eta_and_frame():
    text = BASE.replace("X = x, y, x*y", "eta = 1 1 -1\nframe =\n    1, 0, y/2\n    0, 1, x/2")
    sf = parse_spec(text)
    assert sf.spec.eta == (1, 1, -1) and sf.spec.frame is not None
    assert "eta" in str(parse_err(text.replace("1 1 -1", "1 1 3")))


def test_diffeo_section_and_param_inheritance():
    sf = load_preset("schwarzschild-slice")
    assert sf.diffeo.coords == ("u1", "u2", "u3")
    assert sf.diffeo.box.params == {"m": 1.0}


def test_diffeo_needs_box():
    text = BASE + "\n[diffeo]\ncoords = u, v\nforward = x, y\ninverse = u, v\n"
    assert "diffeo-box" in str(parse_err(text))


def test_hash_ignores_comments_and_spacing():
    noisy = "# header\n" + BASE.replace("coords = x, y", "coords = x, y   # names") + "\n\n"
    assert spec_hash(noisy) == spec_hash(BASE)
    assert spec_hash(BASE.replace("x*y", "x*y + 1")) != spec_hash(BASE)


def test_presets_parse():
    for name in PRESETS:
        sf = load_preset(name)
        assert sf.spec.order == 3
    with pytest.raises(KeyError):
        preset_text("torus")


def test_load_spec_from_file(tmp_path):
    p = tmp_path / "plane.ini"
    p.write_text(BASE)
    sf = load_spec(str(p))
    assert sf.source == str(p)
    p.write_text(BASE.replace("0 1; -1 0", "0 2; 1 0"))
    with pytest.raises(SpecError) as info:
        load_spec(str(p))
    assert str(p) in str(info.value)
