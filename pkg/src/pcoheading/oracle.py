"""Independent fixed-step reference integrator.

Implements the same rules as the event-driven engine by brute force:
states march on a uniform time grid and threshold crossings are
detected within a step and back-dated by linear interpolation (exact,
since the dynamics are piecewise linear). Pulse responses are applied
at the end of the step in which the pulse fired: the receiver's phase
is reconstructed at the back-dated firing time from its known rate
history, the superseded adjustment's contribution over the gap is
spliced out, and the new adjustment's first slice is applied
retroactively. What remains unquantized only through step boundaries
is the interleaving of same-step events (a response landing between
two crossings inside one step), which is where the engine-vs-oracle
discrepancy comes from and why it shrinks with the step size.

Zero-delay, zero-drop configurations only. Fire-mark metric snapshots
use end-of-step values (one step of slack against the engine's exact
snapshots); trajectory comparisons should use the sample rows, which
land on identical timestamps as the engine's when ``sample_interval``
is a multiple of the step.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import metrics
from .engine import EventRecord, FireMark, SampleRow, Trace
from .errors import ConfigError, TheoremViolationError
from .prc import DesyncPrf, GeneralPrf, SyncPrc, response
from .scenario import SimConfig, hard_violations
from .torus import TWO_PI, wrap


@dataclass(frozen=True)
class OracleConfig:
    """A base configuration plus the integrator step ``step`` (seconds)."""

    base: SimConfig
    step: float = 1e-4

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ConfigError(f"step must be > 0, got {self.step}")
        if self.step > self.base.period / 100:
            raise ConfigError(
                f"step {self.step} too coarse for period {self.base.period}"
            )
        if not self.base.delay_model.is_zero or self.base.drop_prob != 0.0:
            raise ConfigError("the reference integrator only covers zero-delay, "
                              "zero-drop configurations")
        per = self.base.sample_interval / self.step
        if abs(per - round(per)) > 1e-9 or round(per) < 1:
            raise ConfigError("sample_interval must be a positive multiple of step")


def oracle_run(config: OracleConfig | SimConfig, step: float | None = None) -> Trace:
    """Run the fixed-step integrator; trace format matches the engine's."""
    if isinstance(config, SimConfig):
        config = OracleConfig(base=config, step=step if step is not None else 1e-4)
    elif step is not None:
        config = OracleConfig(base=config.base, step=step)
    base = config.base
    hard = hard_violations(base)
    if hard:
        raise TheoremViolationError(hard)

    n = base.n
    w0 = base.omega0
    wmax = base.omega_max
    h = config.step
    prc = base.prc
    refractory = prc.refractory if isinstance(prc, SyncPrc) else 0.0
    desync_family = isinstance(prc, (DesyncPrf, GeneralPrf))
    reset_on_fire = base.reset_on_fire

    phase = [float(p) for p in base.initial_headings]
    heading = list(phase)
    sign = [0] * n
    remaining = [0.0] * n
    # Rate history of the latest adjustment per robot, for back-dating:
    # the direction it ran in and the absolute time it ends/ended.
    adj_sign = [0] * n
    adj_until = [0.0] * n
    trace = Trace(config=base, variant="oracle")
    fire_seq = 0

    per_sample = round(base.sample_interval / h)
    steps = int(base.t_end / h + 1e-9)

    def record_sample(t: float) -> None:
        trace.samples.append(SampleRow(
            t=t,
            phases=tuple(phase),
            headings=tuple(heading),
            omegas=tuple(w0 + s * wmax for s in sign),
            adjust_remaining=tuple(remaining),
        ))
        arc = metrics.containing_arc(heading).length
        trace.lambda_rows.append((t, arc))
        if desync_family and n >= 2:
            snap = {i + 1: phase[i] for i in range(n)}
            order = metrics.descending_phase_order(snap)
            trace.p_rows.append((t, metrics.desync_measure(snap, order).p))

    def record_fire(tf: float, idx: int) -> None:
        nonlocal fire_seq
        fire_seq += 1
        pulse_class = None
        p_value = None
        order = None
        if desync_family and n >= 2:
            snap = {i + 1: phase[i] for i in range(n)}
            others = {i: p for i, p in snap.items() if i != idx + 1}
            pulse_class = metrics.classify_pulse(others, n).kind
            order = metrics.descending_phase_order(snap)
            p_value = metrics.desync_measure(snap, order).p
        trace.fire_marks.append(FireMark(
            t=tf, index=fire_seq, firer=idx + 1,
            arc_phases=metrics.containing_arc(phase).length,
            arc_headings=metrics.containing_arc(heading).length,
            p=p_value, order=order, pulse_class=pulse_class,
        ))
        trace.events.append(EventRecord(
            t=tf, kind="fire", from_id=idx + 1, pulse_class=pulse_class,
        ))

    record_sample(0.0)
    fires: list = []
    for m in range(steps):
        t0 = m * h
        t1 = (m + 1) * h
        fires.clear()
        for i in range(n):
            if sign[i] == 0:
                advanced = phase[i] + w0 * h
                if advanced < TWO_PI:
                    phase[i] = advanced
                else:
                    dt_cross = (TWO_PI - phase[i]) / w0
                    fires.append((t0 + dt_cross, i))
                    phase[i] = w0 * (h - dt_cross)
            else:
                # Segmented path: an adjustment is running, so the rate
                # can change mid-step (completion) and crossings can
                # happen inside either segment.
                left = h
                tcur = t0
                while left > 1e-15:
                    s = sign[i]
                    if s != 0:
                        w = w0 + s * wmax
                        seg = min(left, remaining[i])
                    else:
                        w = w0
                        seg = left
                    crossed = w > 0.0 and phase[i] + w * seg >= TWO_PI
                    if crossed:
                        seg = (TWO_PI - phase[i]) / w
                    phase[i] += w * seg
                    if s != 0:
                        heading[i] = wrap(heading[i] + s * wmax * seg)
                        remaining[i] = max(remaining[i] - seg, 0.0)
                        if remaining[i] == 0.0:
                            sign[i] = 0
                    tcur += seg
                    left -= seg
                    if crossed:
                        fires.append((tcur, i))
                        phase[i] = 0.0
                        if reset_on_fire and sign[i] != 0:
                            sign[i] = 0
                            remaining[i] = 0.0
                            adj_until[i] = tcur
        if fires:
            fires.sort()
            for tf, src in fires:
                record_fire(tf, src)
                delta = t1 - tf
                for dst in sorted(base.topology.out(src + 1)):
                    j = dst - 1
                    # Reconstruct the receiver's phase at the firing
                    # time from its rate history over (tf, t1].
                    active = min(adj_until[j], t1) - tf
                    if active < 0.0:
                        active = 0.0
                    elif active > delta:
                        active = delta
                    back = phase[j] - w0 * delta - adj_sign[j] * wmax * active
                    if back < 0.0:
                        back = 0.0  # receiver reset within the window
                    if isinstance(prc, SyncPrc) and back < refractory:
                        psi = 0.0
                    else:
                        psi = response(prc, back)
                    trace.events.append(EventRecord(
                        t=tf, kind="pulse", from_id=src + 1, to_id=dst,
                        psi=psi, tau=abs(psi) / wmax,
                    ))
                    if psi == 0.0:
                        continue  # zero response never cancels
                    tau = abs(psi) / wmax
                    s_new = 1 if psi > 0.0 else -1
                    executed = min(delta, tau)
                    # Splice: remove the superseded adjustment's motion
                    # over the gap, apply the new adjustment's first
                    # slice retroactively from tf.
                    correction = (s_new * executed - adj_sign[j] * active) * wmax
                    if phase[j] + correction >= TWO_PI:
                        # The catch-up would cross threshold inside this
                        # step; stop just below and let the next step
                        # fire it (one-step slack on a rare chain case).
                        correction = TWO_PI - 1e-12 - phase[j]
                        executed = (correction + adj_sign[j] * active * wmax) \
                            / (s_new * wmax)
                    phase[j] += correction
                    heading[j] = wrap(heading[j] + correction)
                    remaining[j] = max(tau - executed, 0.0)
                    sign[j] = s_new if remaining[j] > 0.0 else 0
                    adj_sign[j] = s_new
                    adj_until[j] = tf + tau
        if (m + 1) % per_sample == 0:
            record_sample(t1)
    return trace
