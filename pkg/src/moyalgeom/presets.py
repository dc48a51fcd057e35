"""Built-in specifications, usable as ``--preset NAME``."""
from __future__ import annotations

FLAT = """\
# Flat plane in R^3 with a constant frame.
[algebra]
coords = t1, t2
theta = 0 1; -1 0
order = 3
seed = 0

[box]
t1 = -2, 2
t2 = -2, 2

[embedding]
X = t1, t2, 0

[diffeo]
coords = u1, u2
forward = 2*t1, 2*t2
inverse = u1/2, u2/2

[diffeo-box]
u1 = -4, 4
u2 = -4, 4
"""

SPHERE = """\
# Unit sphere in R^3, both angles coupled.
[algebra]
coords = theta, phi
theta = 0 1; -1 0
order = 3
seed = 0

[box]
theta = 0.3, pi - 0.3
phi = 0.3, 2*pi - 0.3

[embedding]
X = sin(theta)*cos(phi), sin(theta)*sin(phi), cos(theta)
"""

SCHWARZSCHILD_SLICE = """\
# Spatial slice of Schwarzschild embedded in R^4; only theta and phi are coupled.
# The first frame entry is f'(r) with f'^2 + 1 = (1 - 2m/r)^-1.
[algebra]
coords = r, theta, phi
params = m
theta = 0 0 0; 0 0 1; 0 -1 0
order = 3
seed = 0

[box]
r = 3, 10
theta = 0.3, pi - 0.3
phi = 0.3, 2*pi - 0.3
m = 1

[embedding]
frame =
    sqrt(2*m/(r - 2*m)), sin(theta)*cos(phi), sin(theta)*sin(phi), cos(theta)
    0, r*cos(theta)*cos(phi), r*cos(theta)*sin(phi), -r*sin(theta)
    0, -r*sin(theta)*sin(phi), r*sin(theta)*cos(phi), 0

[diffeo]
coords = u1, u2, u3
forward = r, theta + phi, theta - phi
inverse = u1, (u2 + u3)/2, (u2 - u3)/2

[diffeo-box]
u1 = 3, 10
u2 = 2.2, 3.0
u3 = -1.4, -0.6
"""

PRESETS = {
    "flat": FLAT,
    "sphere": SPHERE,
    "schwarzschild-slice": SCHWARZSCHILD_SLICE,
}


def preset_text(name: str) -> str:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None


def load_preset(name: str, order: int | None = None, seed: int | None = None):
    from .specfile import parse_spec
    return parse_spec(preset_text(name), f"<preset {name}>", order, seed)
