"""Event-driven hybrid simulation core.

Phases climb linearly between events, so firing and adjustment-end
times have closed forms and the simulator jumps exactly from event to
event: threshold firings, pulse arrivals (optionally delayed or
dropped), adjustment completions, and periodic samples.

The turn-rate constraint is realized by frequency switching: a pulse
response of ``psi`` radians is executed by running the phase at
``omega0 +/- omega_max`` for ``|psi| / omega_max`` seconds while the
heading turns at ``+/- omega_max``; a later pulse re-evaluates from the
current phase and supersedes the remainder. A zero response never
cancels an in-progress adjustment, and a robot that reaches threshold
mid-adjustment resets to its fundamental frequency (configurable via
``reset_on_fire``).

``variant="instantaneous"`` is a deliberately faulty negative control:
the oscillator's bookkeeping phase jumps by the full response at each
pulse, presuming the previous command finished even when the physical
(still rate-limited) heading has not caught up; the unexecuted
remainder is silently discarded and logged as an interruption.

Event ordering at equal times is fire < pulse arrival < adjustment
completion < sample, with ties broken by robot id and scheduling
sequence, so degenerate configurations stay deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

from . import metrics
from .errors import EngineInvariantError, TheoremViolationError
from .prc import DesyncPrf, GeneralPrf, SyncPrc, response
from .scenario import SimConfig, hard_violations, pulse_edge_rng, sample_delay
from .torus import ANGLE_EPS, TWO_PI, wrap

VARIANT_NORMAL = "normal"
VARIANT_INSTANTANEOUS = "instantaneous"

_FIRE, _PULSE, _ADJUST, _SAMPLE = 0, 1, 2, 3


@dataclass(frozen=True)
class OscillatorState:
    """Public snapshot of one robot's hybrid state."""

    id: int
    phase: float
    heading: float
    freq: float
    adjust_remaining: float
    adjust_sign: int


@dataclass(frozen=True)
class EventRecord:
    """One logged discrete occurrence, mirroring the events.csv row."""

    t: float
    kind: str  # fire | pulse | drop | adjust_complete | interrupted
    from_id: Optional[int] = None
    to_id: Optional[int] = None
    psi: Optional[float] = None
    tau: Optional[float] = None
    pulse_class: Optional[str] = None


@dataclass(frozen=True)
class FireMark:
    """Metrics snapshot taken as a firing is processed (post-reset)."""

    t: float
    index: int
    firer: int
    arc_phases: float
    arc_headings: float
    p: Optional[float]
    order: Optional[tuple]
    pulse_class: Optional[str]


@dataclass(frozen=True)
class SampleRow:
    t: float
    phases: tuple
    headings: tuple
    omegas: tuple
    adjust_remaining: tuple


@dataclass
class Trace:
    """Time-ordered simulation record; input to all metrics and reports."""

    config: SimConfig
    variant: str
    samples: list = field(default_factory=list)
    events: list = field(default_factory=list)
    fire_marks: list = field(default_factory=list)
    lambda_rows: list = field(default_factory=list)
    p_rows: list = field(default_factory=list)
    interrupted_count: int = 0
    superseded_count: int = 0
    stopped_at: Optional[float] = None

    @property
    def firing_sequence(self) -> list:
        return [m.firer for m in self.fire_marks]

    def first_crossing(self, metric: str, threshold: float) -> Optional[float]:
        """Time of the first firing at which the metric is below threshold."""
        for m in self.fire_marks:
            value = m.arc_headings if metric == "lambda" else m.p
            if value is not None and value < threshold:
                return m.t
        return None


class _Osc:
    __slots__ = ("id", "phase", "heading", "sign", "remaining", "version", "fires")

    def __init__(self, id_: int, phase: float) -> None:
        self.id = id_
        self.phase = phase
        self.heading = phase
        self.sign = 0
        self.remaining = 0.0
        self.version = 0
        self.fires = 0


class Simulation:
    """One deterministic run; use :func:`run` for the common case."""

    def __init__(self, config: SimConfig, variant: str = VARIANT_NORMAL) -> None:
        if variant not in (VARIANT_NORMAL, VARIANT_INSTANTANEOUS):
            raise ValueError(f"unknown variant {variant!r}")
        hard = hard_violations(config)
        if hard:
            raise TheoremViolationError(hard)
        self.config = config
        self.variant = variant
        self.now = 0.0
        self._heap: list = []
        self._seq = 0
        self._fire_seq = 0
        self._desync_family = isinstance(config.prc, (DesyncPrf, GeneralPrf))
        self.trace = Trace(config=config, variant=variant)
        self._oscs = [_Osc(i + 1, h) for i, h in enumerate(config.initial_headings)]
        for osc in self._oscs:
            self._schedule_fire(osc)
        self._push(0.0, _SAMPLE, 0, 0)

    # -- state access -------------------------------------------------

    def _omega(self, osc: _Osc) -> float:
        return self.config.omega0 + osc.sign * self.config.omega_max

    def _phase_tolerance(self, dt: float = 0.0) -> float:
        top_rate = self.config.omega0 + self.config.omega_max
        return 1e-9 + top_rate * 1e-12 * (1.0 + self.now + dt)

    def state(self, robot_id: int) -> OscillatorState:
        osc = self._oscs[robot_id - 1]
        return OscillatorState(
            id=osc.id, phase=osc.phase, heading=osc.heading,
            freq=self._omega(osc), adjust_remaining=osc.remaining,
            adjust_sign=osc.sign,
        )

    def states(self) -> list:
        return [self.state(i + 1) for i in range(self.config.n)]

    # -- scheduling ---------------------------------------------------

    def _push(self, t: float, prio: int, key, payload) -> None:
        heapq.heappush(self._heap, (t, prio, key, self._seq, payload))
        self._seq += 1

    def _time_to_fire(self, osc: _Osc) -> float:
        gap = TWO_PI - osc.phase
        omega0 = self.config.omega0
        if self.variant == VARIANT_INSTANTANEOUS or osc.remaining == 0.0:
            return gap / omega0
        w = self._omega(osc)
        if w > 0.0 and gap <= w * osc.remaining:
            return gap / w
        phase_after = osc.phase + w * osc.remaining
        if not -ANGLE_EPS < phase_after < TWO_PI + 1e-12:
            raise EngineInvariantError(
                f"adjustment drives phase of robot {osc.id} to {phase_after}"
            )
        return osc.remaining + max(TWO_PI - phase_after, 0.0) / omega0

    def _schedule_fire(self, osc: _Osc) -> None:
        self._push(self.now + self._time_to_fire(osc), _FIRE, osc.id,
                   (osc.id, osc.version))

    def _schedule_adjust_complete(self, osc: _Osc) -> None:
        if osc.remaining > 0.0:
            self._push(self.now + osc.remaining, _ADJUST, osc.id,
                       (osc.id, osc.version))

    # -- continuous evolution ------------------------------------------

    def advance(self, dt: float) -> None:
        """Advance every oscillator by ``dt``; no event may lie strictly
        inside the interval (the scheduler guarantees this)."""
        if dt == 0.0:
            return
        if dt < 0.0:
            raise EngineInvariantError(f"time went backwards by {dt}")
        omega0 = self.config.omega0
        omega_max = self.config.omega_max
        instantaneous = self.variant == VARIANT_INSTANTANEOUS
        # Event times carry ~ulp(t) rounding, which the fastest rate
        # turns into phase slack; a genuinely missed event overshoots
        # by far more than this.
        phase_tol = self._phase_tolerance(dt)
        for osc in self._oscs:
            if instantaneous:
                osc.phase += omega0 * dt
                if osc.sign:
                    osc.heading = wrap(osc.heading + osc.sign * omega_max * dt)
            else:
                w = omega0 + osc.sign * omega_max
                osc.phase += w * dt
                if osc.sign:
                    osc.heading = wrap(osc.heading + osc.sign * omega_max * dt)
            if osc.sign:
                left = osc.remaining - dt
                if left < -1e-9:
                    raise EngineInvariantError(
                        f"advance stepped over adjustment end of robot {osc.id}"
                    )
                osc.remaining = max(left, 0.0)
            if osc.phase > TWO_PI + phase_tol:
                raise EngineInvariantError(
                    f"advance stepped over threshold of robot {osc.id}"
                )

    # -- event handlers -------------------------------------------------

    def on_fire(self, robot_id: int) -> None:
        osc = self._oscs[robot_id - 1]
        if abs(osc.phase - TWO_PI) > self._phase_tolerance():
            raise EngineInvariantError(
                f"robot {robot_id} fired at phase {osc.phase}, not threshold"
            )
        config = self.config
        osc.phase = 0.0
        osc.fires += 1
        if self.variant == VARIANT_NORMAL and config.reset_on_fire and osc.sign:
            # Reaching threshold mid-adjustment resets to the
            # fundamental frequency; the remainder is abandoned.
            osc.sign = 0
            osc.remaining = 0.0
        osc.version += 1
        self._schedule_fire(osc)
        self._schedule_adjust_complete(osc)

        self._fire_seq += 1
        pulse_class = None
        p_value = None
        order = None
        phases = {o.id: o.phase for o in self._oscs}
        if self._desync_family and config.n >= 2:
            others = {i: p for i, p in phases.items() if i != robot_id}
            pulse_class = metrics.classify_pulse(others, config.n).kind
            order = metrics.descending_phase_order(phases)
            p_value = metrics.desync_measure(phases, order).p
        arc_phases = metrics.containing_arc([o.phase for o in self._oscs]).length
        arc_headings = metrics.containing_arc([o.heading for o in self._oscs]).length
        mark = FireMark(
            t=self.now, index=self._fire_seq, firer=robot_id,
            arc_phases=arc_phases, arc_headings=arc_headings,
            p=p_value, order=order, pulse_class=pulse_class,
        )
        self.trace.fire_marks.append(mark)
        self.trace.lambda_rows.append((self.now, arc_headings))
        if p_value is not None:
            self.trace.p_rows.append((self.now, p_value))
        self.trace.events.append(EventRecord(
            t=self.now, kind="fire", from_id=robot_id, pulse_class=pulse_class,
        ))
        for dst in sorted(config.topology.out(robot_id)):
            rng = pulse_edge_rng(config.seed, self._fire_seq, robot_id, dst)
            if rng.random() < config.drop_prob:
                self.trace.events.append(EventRecord(
                    t=self.now, kind="drop", from_id=robot_id, to_id=dst,
                ))
                continue
            delay = sample_delay(config.delay_model, rng)
            self._push(self.now + delay, _PULSE, (dst, robot_id), (robot_id, dst))

    def on_pulse(self, from_id: int, to_id: int) -> None:
        osc = self._oscs[to_id - 1]
        config = self.config
        prc = config.prc
        eval_phase = osc.phase
        if eval_phase >= TWO_PI - self._phase_tolerance():
            # The receiver is at threshold (its own firing shares this
            # instant up to rounding); the reset wins, so the pulse
            # sees the post-reset phase.
            eval_phase = 0.0
        if isinstance(prc, SyncPrc) and eval_phase < prc.refractory:
            # Refractory: the pulse is ignored outright; an in-progress
            # adjustment keeps running.
            self.trace.events.append(EventRecord(
                t=self.now, kind="pulse", from_id=from_id, to_id=to_id,
                psi=0.0, tau=0.0,
            ))
            return
        psi = response(prc, eval_phase)
        if self.variant == VARIANT_INSTANTANEOUS:
            self._pulse_instantaneous(osc, from_id, psi)
            return
        if psi == 0.0:
            # Zero response never cancels a running adjustment.
            self.trace.events.append(EventRecord(
                t=self.now, kind="pulse", from_id=from_id, to_id=to_id,
                psi=0.0, tau=0.0,
            ))
            return
        if osc.sign:
            self.trace.superseded_count += 1
        tau = abs(psi) / config.omega_max
        osc.sign = 1 if psi > 0.0 else -1
        osc.remaining = tau
        osc.version += 1
        self._schedule_fire(osc)
        self._schedule_adjust_complete(osc)
        self.trace.events.append(EventRecord(
            t=self.now, kind="pulse", from_id=from_id, to_id=to_id,
            psi=psi, tau=tau,
        ))

    def _pulse_instantaneous(self, osc: _Osc, from_id: int, psi: float) -> None:
        # Bookkeeping presumes the previous command completed: any
        # unexecuted physical rotation is discarded here.
        config = self.config
        if osc.remaining > 0.0:
            discarded = osc.sign * osc.remaining * config.omega_max
            self.trace.interrupted_count += 1
            self.trace.events.append(EventRecord(
                t=self.now, kind="interrupted", to_id=osc.id, psi=discarded,
            ))
        if psi == 0.0:
            osc.sign = 0
            osc.remaining = 0.0
        else:
            new_phase = osc.phase + psi
            if not -ANGLE_EPS <= new_phase < TWO_PI + self._phase_tolerance():
                raise EngineInvariantError(
                    f"instantaneous update left phase at {new_phase}"
                )
            osc.phase = min(max(new_phase, 0.0), TWO_PI)
            osc.sign = 1 if psi > 0.0 else -1
            osc.remaining = abs(psi) / config.omega_max
        osc.version += 1
        self._schedule_fire(osc)
        self._schedule_adjust_complete(osc)
        self.trace.events.append(EventRecord(
            t=self.now, kind="pulse", from_id=from_id, to_id=osc.id,
            psi=psi, tau=abs(psi) / config.omega_max,
        ))

    def on_adjust_complete(self, robot_id: int) -> None:
        osc = self._oscs[robot_id - 1]
        if osc.remaining > 1e-9:
            raise EngineInvariantError(
                f"adjustment completion fired early for robot {robot_id}: "
                f"{osc.remaining} s left"
            )
        osc.sign = 0
        osc.remaining = 0.0
        self.trace.events.append(EventRecord(
            t=self.now, kind="adjust_complete", to_id=robot_id,
        ))

    def _on_sample(self, index: int) -> None:
        config = self.config
        row = SampleRow(
            t=self.now,
            phases=tuple(o.phase for o in self._oscs),
            headings=tuple(o.heading for o in self._oscs),
            omegas=tuple(self._omega(o) for o in self._oscs),
            adjust_remaining=tuple(o.remaining for o in self._oscs),
        )
        self.trace.samples.append(row)
        arc = metrics.containing_arc(row.headings).length
        self.trace.lambda_rows.append((self.now, arc))
        if self._desync_family and config.n >= 2:
            phases = {o.id: o.phase for o in self._oscs}
            order = metrics.descending_phase_order(phases)
            self.trace.p_rows.append(
                (self.now, metrics.desync_measure(phases, order).p))
        next_t = (index + 1) * config.sample_interval
        if next_t <= config.t_end + 1e-12:
            self._push(next_t, _SAMPLE, 0, index + 1)

    # -- main loop ------------------------------------------------------

    def run(self, stop_metric: Optional[str] = None,
            stop_below: Optional[float] = None) -> Trace:
        """Process events until t_end (or until the stop metric, sampled
        at firings, falls below ``stop_below``)."""
        config = self.config
        while self._heap:
            t, prio, _key, _seq, payload = self._heap[0]
            if t > config.t_end + 1e-9:
                break
            heapq.heappop(self._heap)
            if prio in (_FIRE, _ADJUST):
                robot_id, version = payload
                if self._oscs[robot_id - 1].version != version:
                    continue  # superseded by a later trajectory change
            self.advance(t - self.now)
            self.now = t
            if prio == _FIRE:
                self.on_fire(payload[0])
                if stop_metric is not None and stop_below is not None:
                    mark = self.trace.fire_marks[-1]
                    value = mark.arc_headings if stop_metric == "lambda" else mark.p
                    if value is not None and value < stop_below:
                        self.trace.stopped_at = self.now
                        break
            elif prio == _PULSE:
                self.on_pulse(*payload)
            elif prio == _ADJUST:
                self.on_adjust_complete(payload[0])
            else:
                self._on_sample(payload)
        if not self._heap and self.now < config.t_end:
            raise EngineInvariantError("event queue starved before t_end")
        return self.trace


def init(config: SimConfig, variant: str = VARIANT_NORMAL) -> Simulation:
    """Validated, fully scheduled simulation ready to run."""
    return Simulation(config, variant)


def run(config: SimConfig, *, stop_metric: Optional[str] = None,
        stop_below: Optional[float] = None) -> Trace:
    """Run the rate-constrained simulation; deterministic per (config, seed)."""
    return Simulation(config, VARIANT_NORMAL).run(stop_metric, stop_below)


def run_instantaneous_assumption(config: SimConfig, *,
                                 stop_metric: Optional[str] = None,
                                 stop_below: Optional[float] = None) -> Trace:
    """Negative-control run that books adjustments as if instantaneous."""
    return Simulation(config, VARIANT_INSTANTANEOUS).run(stop_metric, stop_below)
