"""Phase response rules.

Three families are supported:

* :class:`SyncPrc` -- the delay-advance curve that pulls the network
  toward a common phase. Phases at or below pi are delayed, phases
  above pi are advanced, scaled by a coupling strength ``alpha``. An
  optional refractory band [0, D) ignores incoming pulses entirely.
* :class:`DesyncPrf` -- the piecewise-linear rule that spreads phases
  until neighboring gaps equal 2*pi/N, with independent forward
  (``l1``) and backward (``l2``) coupling strengths.
* :class:`GeneralPrf` -- the same three-branch shape with arbitrary
  phase-dependent coupling functions. The only requirement for the
  desynchronization guarantee is that the induced update map
  ``phi -> phi + F(phi)`` stays strictly increasing on [0, 2*pi),
  which :func:`check_update_map_monotone` verifies by dense sampling.

:func:`rate_limited_prf` builds the effective coupling functions that
describe what a turn-rate-limited robot actually achieves when pulses
arrive every ``t0`` seconds: adjustments larger than ``omega_max * t0``
get truncated, which caps the apparent coupling below ``l1``/``l2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

from .errors import ConfigError
from .torus import ANGLE_EPS, TWO_PI, Angle

CouplingFn = Callable[[Angle], float]


@dataclass(frozen=True)
class SyncPrc:
    """Delay-advance synchronization curve with refractory band [0, refractory)."""

    alpha: float
    refractory: Angle = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.refractory < TWO_PI:
            raise ConfigError(
                f"refractory must be in [0, 2*pi), got {self.refractory}"
            )

    def response(self, phase: Angle) -> float:
        return sync_response(self, phase)


@dataclass(frozen=True)
class DesyncPrf:
    """Piecewise-linear desynchronization rule for a network of ``n`` robots."""

    l1: float
    l2: float
    n: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.l1 < 1.0:
            raise ConfigError(f"l1 must be in [0, 1), got {self.l1}")
        if not 0.0 <= self.l2 < 1.0:
            raise ConfigError(f"l2 must be in [0, 1), got {self.l2}")
        if self.l1 == 0.0 and self.l2 == 0.0:
            raise ConfigError("l1 and l2 must not both be zero")
        if self.n < 2:
            raise ConfigError(f"desynchronization needs n >= 2, got {self.n}")

    @property
    def forward_edge(self) -> Angle:
        """Upper limit of the forward response band, 2*pi/n."""
        return TWO_PI / self.n

    @property
    def backward_edge(self) -> Angle:
        """Lower limit of the backward response band, 2*pi*(n-1)/n."""
        return TWO_PI * (self.n - 1) / self.n

    def response(self, phase: Angle) -> float:
        return desync_response(self, phase)


@dataclass(frozen=True)
class GeneralPrf:
    """Three-branch response with arbitrary coupling functions.

    ``forward_coupling`` is evaluated on (0, 2*pi/n) and
    ``backward_coupling`` on (2*pi*(n-1)/n, 2*pi); both must return
    values in [0, 1). ``breakpoints`` lists phases (beyond the three
    band edges) where either coupling is discontinuous, so the
    monotonicity check can probe both sides of each.
    """

    forward_coupling: CouplingFn
    backward_coupling: CouplingFn
    n: int
    breakpoints: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ConfigError(f"general PRF needs n >= 2, got {self.n}")

    @property
    def forward_edge(self) -> Angle:
        return TWO_PI / self.n

    @property
    def backward_edge(self) -> Angle:
        return TWO_PI * (self.n - 1) / self.n

    def response(self, phase: Angle) -> float:
        return general_response(self, phase)


PrcSpec = Union[SyncPrc, DesyncPrf, GeneralPrf]


def sync_response(prc: SyncPrc, phase: Angle) -> float:
    """Signed phase adjustment of the delay-advance curve.

    Zero inside the refractory band [0, D); the boundary phase D itself
    responds. The delay branch covers phases up to and including pi.
    """
    if phase < prc.refractory:
        return 0.0
    if phase <= math.pi:
        return prc.alpha * (-phase)
    return prc.alpha * (TWO_PI - phase)


def desync_response(prf: DesyncPrf, phase: Angle) -> float:
    """Signed phase adjustment of the desynchronization rule.

    Positive on the open band (0, 2*pi/N), zero on the closed middle
    band (including phase 0, where the open first branch does not
    apply), negative on the open band (2*pi*(N-1)/N, 2*pi).
    """
    fwd = prf.forward_edge
    bwd = prf.backward_edge
    if 0.0 < phase < fwd:
        return prf.l1 * (fwd - phase)
    if bwd < phase < TWO_PI:
        return prf.l2 * (bwd - phase)
    return 0.0


def general_response(prf: GeneralPrf, phase: Angle) -> float:
    """Signed phase adjustment under arbitrary coupling functions."""
    fwd = prf.forward_edge
    bwd = prf.backward_edge
    if 0.0 < phase < fwd:
        return prf.forward_coupling(phase) * (fwd - phase)
    if bwd < phase < TWO_PI:
        return prf.backward_coupling(phase) * (bwd - phase)
    return 0.0


def response(prc: PrcSpec, phase: Angle) -> float:
    """Dispatch to the response rule of whichever family ``prc`` is."""
    return prc.response(phase)


def _check_truncation_bound(coupling: float, name: str, n: int,
                            omega_max: float, t0: float) -> None:
    if coupling == 0.0:
        return
    if omega_max * t0 / coupling >= TWO_PI / n:
        raise ConfigError(
            f"omega_max*t0/{name} = {omega_max * t0 / coupling:.6g} must be "
            f"below 2*pi/N = {TWO_PI / n:.6g} for the truncated-coupling model"
        )


def effective_coupling_forward(prf: DesyncPrf, phase: Angle,
                               omega_max: float, t0: float) -> float:
    """Apparent forward coupling of a rate-limited robot.

    For phases far from the band edge the commanded adjustment exceeds
    what ``omega_max`` can deliver in ``t0`` seconds, so the achieved
    fraction is ``omega_max*t0 / (2*pi/N - phase)``; closer to the edge
    the full ``l1`` applies. Always <= l1.
    """
    fwd = prf.forward_edge
    if not 0.0 < phase < fwd:
        raise ValueError(f"phase {phase} outside forward band (0, {fwd})")
    if prf.l1 == 0.0:
        return 0.0
    _check_truncation_bound(prf.l1, "l1", prf.n, omega_max, t0)
    if phase < fwd - omega_max * t0 / prf.l1:
        return omega_max * t0 / (fwd - phase)
    return prf.l1


def effective_coupling_backward(prf: DesyncPrf, phase: Angle,
                                omega_max: float, t0: float) -> float:
    """Apparent backward coupling of a rate-limited robot; always <= l2."""
    bwd = prf.backward_edge
    if not bwd < phase < TWO_PI:
        raise ValueError(f"phase {phase} outside backward band ({bwd}, 2*pi)")
    if prf.l2 == 0.0:
        return 0.0
    _check_truncation_bound(prf.l2, "l2", prf.n, omega_max, t0)
    if phase <= bwd + omega_max * t0 / prf.l2:
        return prf.l2
    return -omega_max * t0 / (bwd - phase)


def rate_limited_prf(prf: DesyncPrf, omega_max: float, t0: float) -> GeneralPrf:
    """Wrap a desynchronization rule in its rate-limited effective form.

    The returned :class:`GeneralPrf` describes one inter-pulse interval
    of length ``t0`` under the turn-rate cap ``omega_max``; its net
    adjustment is ``min(|psi|, omega_max*t0)`` in magnitude.
    """
    _check_truncation_bound(prf.l1, "l1", prf.n, omega_max, t0)
    _check_truncation_bound(prf.l2, "l2", prf.n, omega_max, t0)
    breaks = []
    if prf.l1 > 0.0:
        breaks.append(prf.forward_edge - omega_max * t0 / prf.l1)
    if prf.l2 > 0.0:
        breaks.append(prf.backward_edge + omega_max * t0 / prf.l2)
    return GeneralPrf(
        forward_coupling=lambda p: effective_coupling_forward(prf, p, omega_max, t0),
        backward_coupling=lambda p: effective_coupling_backward(prf, p, omega_max, t0),
        n=prf.n,
        breakpoints=tuple(b for b in breaks if 0.0 < b < TWO_PI),
    )


@dataclass(frozen=True)
class MonotoneReport:
    """Outcome of a monotonicity scan of the update map phi + F(phi)."""

    monotone: bool
    violation: tuple | None = None  # ((phi_lo, map_lo), (phi_hi, map_hi))

    def __bool__(self) -> bool:
        return self.monotone


def check_update_map_monotone(prf: Union[DesyncPrf, GeneralPrf],
                              samples: int = 100_000) -> MonotoneReport:
    """Scan phi + F(phi) for strict monotonicity over [0, 2*pi).

    Evaluates a dense sorted grid plus probes ANGLE_EPS on either side
    of every branch boundary and declared breakpoint, where violations
    (downward jumps) live. Returns the first offending pair if any.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    if not isinstance(prf, (DesyncPrf, GeneralPrf)):
        raise TypeError("monotonicity check applies to desynchronization rules")
    edges = [0.0, prf.forward_edge, prf.backward_edge]
    if isinstance(prf, GeneralPrf):
        edges += list(prf.breakpoints)
    grid = [TWO_PI * k / samples for k in range(samples)]
    for e in edges:
        for p in (e - ANGLE_EPS, e, e + ANGLE_EPS):
            if 0.0 <= p < TWO_PI:
                grid.append(p)
    grid.sort()
    prev_phi = grid[0]
    prev_map = prev_phi + response(prf, prev_phi)
    for phi in grid[1:]:
        if phi - prev_phi < 1e-12:
            # below float resolution of the map values; a genuine
            # violation shows up at the 1e-9 probe scale anyway
            continue
        mapped = phi + response(prf, phi)
        if mapped <= prev_map:
            return MonotoneReport(False, ((prev_phi, prev_map), (phi, mapped)))
        prev_phi, prev_map = phi, mapped
    return MonotoneReport(True)
