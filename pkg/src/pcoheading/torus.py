"""Angle arithmetic on the one-dimensional torus [0, 2*pi).

Shared value conventions for the whole package:

* ``Angle``       -- float radians, always normalized to [0, 2*pi).
* ``AngularRate`` -- float radians/second, signed, finite.
* ``Duration``    -- float seconds, >= 0, finite.

These are plain floats; :func:`wrap` is the normalizing constructor for
angles and every producer of an Angle is expected to go through it.
"""

from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi

# Tolerance for logical equality of angles (e.g. simultaneous-firing and
# duplicate-heading detection). Chosen once so tests are deterministic.
ANGLE_EPS = 1e-9

Angle = float
AngularRate = float
Duration = float


def wrap(x: float) -> Angle:
    """Normalize ``x`` to [0, 2*pi), congruent to ``x`` mod 2*pi.

    Values within one period of the target interval are fixed up with a
    single addition/subtraction, which is exact for the bounded updates
    the simulator performs; only far-out values fall back to fmod.
    Raises ``ValueError`` for non-finite input.
    """
    if not math.isfinite(x):
        raise ValueError(f"cannot wrap non-finite angle {x!r}")
    if 0.0 <= x < TWO_PI:
        return x
    if -TWO_PI <= x < 0.0:
        x += TWO_PI
    elif TWO_PI <= x < 2.0 * TWO_PI:
        x -= TWO_PI
    else:
        x = math.fmod(x, TWO_PI)
        if x < 0.0:
            x += TWO_PI
    # x + TWO_PI can round to exactly TWO_PI for tiny negative inputs.
    if x >= TWO_PI:
        x -= TWO_PI
    return x


def wrap_signed(x: float) -> float:
    """Normalize ``x`` to (-pi, pi]: the signed smallest rotation."""
    w = wrap(x)
    return w if w <= math.pi else w - TWO_PI


def cw_gap(from_angle: Angle, to_angle: Angle) -> float:
    """Arc length travelled going counter-clockwise (increasing phase)
    from ``from_angle`` to ``to_angle``; in [0, 2*pi), 0 iff equal.
    """
    d = to_angle - from_angle
    if d < 0.0:
        d += TWO_PI
        if d >= TWO_PI:
            # sub-ulp negative difference: equal at float resolution
            d = 0.0
    return d


def circular_distance(a: Angle, b: Angle) -> float:
    """Shortest arc between two angles, in [0, pi]."""
    g = cw_gap(a, b)
    return min(g, TWO_PI - g)


def angles_equal(a: Angle, b: Angle, eps: float = ANGLE_EPS) -> bool:
    """Logical equality on the circle within ``eps``."""
    return circular_distance(a, b) <= eps


def heading_from_phase(phase: Angle, t: Duration, omega0: AngularRate) -> Angle:
    """Heading implied by a phase variable that started equal to the
    heading and has been free-running at ``omega0`` for time ``t``.
    """
    return wrap(phase - omega0 * t)
