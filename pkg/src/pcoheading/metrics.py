"""Convergence measures and theory-checking instruments.

* :func:`containing_arc` -- the smallest arc containing all phases;
  its length is zero exactly at synchronization.
* :func:`desync_measure` -- sum of deviations of neighboring phase
  gaps from 2*pi/N; zero exactly at desynchronization.
* :func:`classify_pulse` -- active/silent classification of a pulse by
  whether any robot sits in a responsive band at emission.
* :func:`predicted_measure_change` -- closed-form prediction of how
  one pulse changes the desynchronization measure, from the two band
  boundary gaps plus coupling terms only; cross-checked in tests
  against direct recomputation.
* :func:`run_instant_updates` -- the idealized instantaneous-update
  pulse sequence (no rate limiting), used as the reference setting for
  the measure-decrease property suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .prc import DesyncPrf, GeneralPrf
from .torus import TWO_PI, Angle


@dataclass(frozen=True)
class ArcReport:
    """Containing arc length and the pair of ids across the widest gap."""

    length: float
    widest_gap_pair: tuple[int, int]


@dataclass(frozen=True)
class DesyncReport:
    """Desynchronization measure and the cyclic phase differences behind it."""

    p: float
    deltas: tuple[float, ...]


@dataclass(frozen=True)
class PulseClass:
    """Whether a pulse found any robot in a responsive band."""

    active: bool
    contributors: tuple[int, ...]

    @property
    def kind(self) -> str:
        return "active" if self.active else "silent"


def containing_arc(phases: Sequence[Angle],
                   ids: Sequence[int] | None = None) -> ArcReport:
    """Smallest arc containing all phases: 2*pi minus the widest cyclic gap."""
    if len(phases) == 0:
        raise ValueError("containing_arc needs at least one phase")
    if ids is None:
        ids = range(1, len(phases) + 1)
    ranked = sorted(zip(phases, ids))
    # The gap closing the circle from the largest phase back to the
    # smallest; 2*pi when all phases coincide, so the arc comes out 0.
    widest = TWO_PI - (ranked[-1][0] - ranked[0][0])
    pair = (ranked[-1][1], ranked[0][1])
    for (lo, lo_id), (hi, hi_id) in zip(ranked, ranked[1:]):
        gap = hi - lo
        if gap > widest:
            widest = gap
            pair = (lo_id, hi_id)
    return ArcReport(length=TWO_PI - widest, widest_gap_pair=pair)


def descending_phase_order(phases: Mapping[int, Angle]) -> tuple[int, ...]:
    """Ids sorted by phase, largest first (ties broken by id)."""
    return tuple(sorted(phases, key=lambda i: (-phases[i], i)))


def desync_measure(phases: Mapping[int, Angle],
                   order: Sequence[int]) -> DesyncReport:
    """Desynchronization measure over a cyclic id ordering.

    ``order`` must be the phase-descending cyclic ordering (equivalently
    the firing order); each delta is the gap from one robot to the next
    in that cycle and the measure sums |delta - 2*pi/N|.
    """
    n = len(order)
    if n < 2:
        raise ValueError("desync_measure needs at least two robots")
    if sorted(order) != sorted(phases):
        raise ValueError("order must be a permutation of the robot ids")
    target = TWO_PI / n
    deltas = []
    for a, b in zip(order, list(order[1:]) + [order[0]]):
        deltas.append((phases[a] - phases[b]) % TWO_PI)
    p = sum(abs(d - target) for d in deltas)
    return DesyncReport(p=p, deltas=tuple(deltas))


def classify_pulse(phases: Mapping[int, Angle], n: int) -> PulseClass:
    """Classify a pulse from the other robots' phases at emission.

    The firing robot must already be excluded (its phase is 0 after the
    reset). A pulse is active when at least one robot sits in the open
    response bands (0, 2*pi/N) or (2*pi*(N-1)/N, 2*pi).
    """
    fwd = TWO_PI / n
    bwd = TWO_PI * (n - 1) / n
    contributors = tuple(
        i for i in sorted(phases)
        if 0.0 < phases[i] < fwd or bwd < phases[i] < TWO_PI
    )
    return PulseClass(active=bool(contributors), contributors=contributors)


def _apply_update(phase: Angle, n: int,
                  forward_coupling: Callable[[Angle], float],
                  backward_coupling: Callable[[Angle], float]) -> Angle:
    fwd = TWO_PI / n
    bwd = TWO_PI * (n - 1) / n
    if 0.0 < phase < fwd:
        return phase + forward_coupling(phase) * (fwd - phase)
    if bwd < phase < TWO_PI:
        return phase + backward_coupling(phase) * (bwd - phase)
    return phase


def predicted_measure_change(phases: Mapping[int, Angle],
                             order: Sequence[int],
                             firer: int,
                             forward_coupling: Callable[[Angle], float],
                             backward_coupling: Callable[[Angle], float],
                             ) -> float:
    """Closed-form change of the desynchronization measure at one pulse.

    ``phases`` is the pre-update snapshot at emission with the firer
    already reset to 0, ``order`` the firing-order cycle. Only the two
    gaps at the band boundaries can contribute beyond the coupling
    terms; everything strictly inside a band telescopes away. With M
    robots in the forward band and S in the backward band:

    * M >= 1 contributes the forward boundary-gap change plus
      ``L1(phi_deep) * (phi_deep - 2*pi/N)`` for the deepest forward robot;
    * S >= 1 contributes the backward counterpart;
    * M + S = N - 1 leaves a single shared boundary gap, counted once;
    * an empty band contributes nothing.
    """
    n = len(order)
    if n < 2:
        raise ValueError("need at least two robots")
    if firer not in order:
        raise ValueError(f"firer {firer} not in order")
    if abs(phases[firer]) > 1e-12:
        raise ValueError("firer's phase must be reset to 0 in the snapshot")
    fwd = TWO_PI / n
    bwd = TWO_PI * (n - 1) / n
    idx = list(order).index(firer)
    ring = [order[(idx + j) % n] for j in range(n)]  # ring[0] = firer

    # Band runs must be contiguous next to the firer, as they are for
    # any phase-sorted cycle; verify against global membership counts.
    s_count = 0
    for j in range(1, n):
        if bwd < phases[ring[j]] < TWO_PI:
            s_count += 1
        else:
            break
    m_count = 0
    for j in range(n - 1, 0, -1):
        if 0.0 < phases[ring[j]] < fwd:
            m_count += 1
        else:
            break
    in_fwd = sum(1 for i in ring[1:] if 0.0 < phases[i] < fwd)
    in_bwd = sum(1 for i in ring[1:] if bwd < phases[i] < TWO_PI)
    if in_fwd != m_count or in_bwd != s_count:
        raise ValueError("band members are not contiguous in the firing order; "
                         "snapshot is not phase-sorted")

    post = {
        i: (0.0 if i == firer
            else _apply_update(phases[i], n, forward_coupling, backward_coupling))
        for i in ring
    }

    def delta(snapshot: Mapping[int, Angle], pos: int) -> float:
        a, b = ring[pos], ring[(pos + 1) % n]
        return (snapshot[a] - snapshot[b]) % TWO_PI

    target = fwd
    change = 0.0
    pos_fwd = n - m_count - 1          # gap just outside the forward run
    pos_bwd = s_count                  # gap just outside the backward run
    boundary_positions = set()
    if m_count >= 1:
        boundary_positions.add(pos_fwd)
        deep_fwd = ring[n - m_count]
        change += forward_coupling(phases[deep_fwd]) * (phases[deep_fwd] - fwd)
    if s_count >= 1:
        boundary_positions.add(pos_bwd)
        deep_bwd = ring[s_count]
        change += backward_coupling(phases[deep_bwd]) * (bwd - phases[deep_bwd])
    for pos in boundary_positions:
        change += abs(delta(post, pos) - target) - abs(delta(phases, pos) - target)
    return change


def firing_order_history(firers: Sequence[int], n: int):
    """Per-cycle firing sequences and whether they share one cyclic order.

    ``firers`` is the time-ordered sequence of firing robot ids; a cycle
    is ``n`` consecutive firings. The order is invariant iff every
    firing repeats the one ``n`` steps earlier and each full cycle hits
    every robot exactly once.
    """
    firers = list(firers)
    cycles = [tuple(firers[k:k + n]) for k in range(0, len(firers) - n + 1, n)]
    invariant = all(firers[i] == firers[i + n] for i in range(len(firers) - n))
    if cycles and invariant:
        invariant = len(set(cycles[0])) == n
    return cycles, invariant


@dataclass(frozen=True)
class InstantPulse:
    """One pulse of the idealized instantaneous-update sequence."""

    firer: int
    active: bool
    contributors: tuple[int, ...]
    p_before: float
    p_after: float
    predicted: float | None  # None unless both bands were populated
    order: tuple[int, ...]


def _coupling_functions(prf) -> tuple[Callable[[Angle], float], Callable[[Angle], float]]:
    if isinstance(prf, DesyncPrf):
        return (lambda p: prf.l1), (lambda p: prf.l2)
    if isinstance(prf, GeneralPrf):
        return prf.forward_coupling, prf.backward_coupling
    raise TypeError(f"not a desynchronization rule: {prf!r}")


def run_instant_updates(phases: Mapping[int, Angle], prf, pulses: int,
                        ) -> tuple[list[InstantPulse], dict[int, Angle]]:
    """Run the instantaneous-update pulse sequence for ``pulses`` firings.

    Phases jump by the full response at each pulse (no rate limiting):
    the next firer is advanced to threshold together with everyone
    else, resets, and all others apply the response rule at once.
    Returns the per-pulse records and the final phases.
    """
    l1_fn, l2_fn = _coupling_functions(prf)
    n = prf.n
    state = dict(phases)
    if len(state) != n:
        raise ValueError(f"expected {n} phases, got {len(state)}")
    records: list[InstantPulse] = []
    for _ in range(pulses):
        firer = max(state, key=lambda i: (state[i], i))
        shift = TWO_PI - state[firer]
        for i in state:
            state[i] = state[i] + shift if i != firer else 0.0
        order = descending_phase_order(state)
        pre = dict(state)
        others = {i: p for i, p in pre.items() if i != firer}
        cls = classify_pulse(others, n)
        p_before = desync_measure(pre, order).p
        for i in others:
            state[i] = _apply_update(state[i], n, l1_fn, l2_fn)
        p_after = desync_measure(state, order).p
        fwd = TWO_PI / n
        bwd = TWO_PI * (n - 1) / n
        m = sum(1 for p in others.values() if 0.0 < p < fwd)
        s = sum(1 for p in others.values() if bwd < p < TWO_PI)
        predicted = None
        if m >= 1 and s >= 1:
            predicted = predicted_measure_change(pre, order, firer, l1_fn, l2_fn)
        records.append(InstantPulse(
            firer=firer, active=cls.active, contributors=cls.contributors,
            p_before=p_before, p_after=p_after, predicted=predicted,
            order=order,
        ))
    return records, state


def heading_drift_rate(times: Sequence[float],
                       headings: Sequence[Sequence[float]]) -> float:
    """Least-squares slope of the mean unwrapped heading, rad/s.

    Fitted over the last 50% of the samples so the initial transient
    does not bias the estimate. ``headings[k]`` holds all robots'
    headings at ``times[k]``.
    """
    t = np.asarray(times, dtype=float)
    h = np.unwrap(np.asarray(headings, dtype=float), axis=0)
    mean = h.mean(axis=1)
    half = len(t) // 2
    slope, _ = np.polyfit(t[half:], mean[half:], 1)
    return float(slope)
