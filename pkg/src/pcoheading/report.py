"""Delimited outputs, run manifests, and rendered figures.

Every run writes fixed-column CSVs (angles with 12 significant digits,
so identical inputs produce byte-identical files) and, unless figures
are disabled, PNG plots of the same series next to them:

* ``trace.csv``   -- t, robot_id, phase, heading, omega, adjust_remaining
* ``events.csv``  -- t, kind, from_id, to_id, psi, tau, pulse_class
* ``lambda.csv``  -- t, lambda (containing arc over headings)
* ``p.csv``       -- t, p (desynchronization measure; desync runs only)
* ``manifest.json``
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .engine import Trace

_FMT = "{:.12g}"


def _num(x) -> str:
    return "" if x is None else _FMT.format(x)


def _cell(x) -> str:
    return "" if x is None else str(x)


@dataclass
class RunManifest:
    """Ties a run's outputs back to its exact inputs."""

    config_path: str
    config_sha256: str
    seed: int
    variant: str
    outputs: list = field(default_factory=list)
    wall_clock_seconds: float = 0.0
    tool_version: str = ""

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def sha256_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def write_trace_csv(trace: Trace, path: Path) -> None:
    lines = ["t,robot_id,phase,heading,omega,adjust_remaining"]
    for row in trace.samples:
        for i in range(len(row.phases)):
            lines.append(",".join((
                _num(row.t), str(i + 1), _num(row.phases[i]),
                _num(row.headings[i]), _num(row.omegas[i]),
                _num(row.adjust_remaining[i]),
            )))
    path.write_text("\n".join(lines) + "\n")


def write_events_csv(trace: Trace, path: Path) -> None:
    lines = ["t,kind,from_id,to_id,psi,tau,pulse_class"]
    for ev in trace.events:
        lines.append(",".join((
            _num(ev.t), ev.kind, _cell(ev.from_id), _cell(ev.to_id),
            _num(ev.psi), _num(ev.tau), _cell(ev.pulse_class),
        )))
    path.write_text("\n".join(lines) + "\n")


def write_series_csv(rows: Sequence, path: Path, value_name: str) -> None:
    lines = [f"t,{value_name}"]
    for t, value in rows:
        lines.append(f"{_num(t)},{_num(value)}")
    path.write_text("\n".join(lines) + "\n")


def write_run_outputs(trace: Trace, out_dir: Path) -> list:
    """Write all delimited outputs for one run; returns the paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    write_trace_csv(trace, out_dir / "trace.csv")
    written.append(out_dir / "trace.csv")
    write_events_csv(trace, out_dir / "events.csv")
    written.append(out_dir / "events.csv")
    write_series_csv(trace.lambda_rows, out_dir / "lambda.csv", "lambda")
    written.append(out_dir / "lambda.csv")
    if trace.p_rows:
        write_series_csv(trace.p_rows, out_dir / "p.csv", "p")
        written.append(out_dir / "p.csv")
    return written


def render_run_figures(trace: Trace, out_dir: Path) -> list:
    """Render heading-evolution and convergence figures next to the CSVs."""
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    n = trace.config.n
    times = [row.t for row in trace.samples]

    fig, ax = plt.subplots(figsize=(7, 4))
    for i in range(n):
        ax.plot(times, [row.headings[i] for row in trace.samples],
                lw=1.0, label=f"robot {i + 1}")
    ax.set_xlabel("time (s)")
    ax.set_ylabel("heading (rad)")
    ax.set_title(f"Heading evolution ({trace.variant})")
    if n <= 10:
        ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(out_dir / "headings.png", dpi=120)
    plt.close(fig)
    written.append(out_dir / "headings.png")

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot([t for t, _ in trace.lambda_rows],
            [v for _, v in trace.lambda_rows], lw=1.0)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("containing arc (rad)")
    ax.set_title("Containing arc of headings")
    fig.tight_layout()
    fig.savefig(out_dir / "lambda.png", dpi=120)
    plt.close(fig)
    written.append(out_dir / "lambda.png")

    if trace.p_rows:
        fig, ax = plt.subplots(figsize=(7, 4))
        ax.plot([t for t, _ in trace.p_rows],
                [v for _, v in trace.p_rows], lw=1.0)
        ax.set_xlabel("time (s)")
        ax.set_ylabel("desynchronization measure (rad)")
        ax.set_title("Desynchronization measure")
        fig.tight_layout()
        fig.savefig(out_dir / "p.png", dpi=120)
        plt.close(fig)
        written.append(out_dir / "p.png")
    return written


def render_curves_figure(rows: Sequence, path: Path,
                         has_effective: bool) -> None:
    """Two-panel plot of the response curve and the induced update map."""
    phis = [r[0] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(phis, [r[1] for r in rows], lw=1.2, label="response")
    ax2.plot(phis, [r[2] for r in rows], lw=1.2, label="update map")
    if has_effective:
        ax1.plot(phis, [r[3] for r in rows], "r:", lw=1.2, label="rate-limited")
        ax2.plot(phis, [r[4] for r in rows], "r:", lw=1.2, label="rate-limited")
    ax1.set_xlabel("phase (rad)")
    ax1.set_ylabel("adjustment (rad)")
    ax2.set_xlabel("phase (rad)")
    ax2.set_ylabel("updated phase (rad)")
    ax1.legend(fontsize=8)
    ax2.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_sweep_figure(rows: Sequence, path: Path) -> None:
    """Cycles-to-threshold per swept value (bar chart)."""
    if not rows:
        return
    labels = [str(r[0]) for r in rows]
    cycles = [r[3] if r[3] is not None else float("nan") for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(labels)), cycles)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("cycles to threshold")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
