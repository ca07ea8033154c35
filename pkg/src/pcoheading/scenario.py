"""Topologies, initial conditions, fault models, and validated configs.

The on-disk configuration format is JSON. Top-level keys::

    n, omega0, omega_max, prc, topology, init, delay, drop_prob,
    t_end, sample_interval, seed, reset_on_fire

with nested sections ``prc.{type, alpha, refractory, l1, l2}``,
``topology.{type, edges}``, ``init.{type, headings, arc_width,
min_separation}`` and ``delay.{type, value, lo, hi}``. All angles are
radians, all times seconds. Unknown keys anywhere are errors.

Randomness for initial conditions and per-pulse faults is derived from
the config seed through counter-based streams, so results do not
depend on event processing order.
"""

from __future__ import annotations

import hashlib
import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import metrics
from .errors import ConfigError
from .prc import DesyncPrf, GeneralPrf, PrcSpec, SyncPrc
from .torus import ANGLE_EPS, TWO_PI, Angle, circular_distance, wrap


def derived_rng(*key) -> random.Random:
    """Deterministic RNG for a hashable key path, independent of call order."""
    digest = hashlib.sha256("|".join(map(repr, key)).encode()).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))


def pulse_edge_rng(seed: int, fire_seq: int, src: int, dst: int) -> random.Random:
    """Stream for one (pulse, edge) pair: first draw decides the drop,
    further draws feed the delay model."""
    return derived_rng("pulse", seed, fire_seq, src, dst)


@dataclass(frozen=True)
class Topology:
    """Directed adjacency over robot ids 1..n, no self-loops."""

    n: int
    out_neighbors: tuple[frozenset, ...]

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"topology needs n >= 1, got {self.n}")
        if len(self.out_neighbors) != self.n:
            raise ConfigError("out_neighbors must have one entry per robot")
        for i, outs in enumerate(self.out_neighbors, start=1):
            for j in outs:
                if not 1 <= j <= self.n:
                    raise ConfigError(f"robot {i} has out-neighbor {j} outside 1..{self.n}")
                if j == i:
                    raise ConfigError(f"robot {i} has a self-loop")

    def out(self, i: int) -> frozenset:
        return self.out_neighbors[i - 1]

    def is_all_to_all(self) -> bool:
        return all(
            self.out(i) == frozenset(j for j in range(1, self.n + 1) if j != i)
            for i in range(1, self.n + 1)
        )


def all_to_all(n: int) -> Topology:
    """Complete digraph minus self-loops."""
    return Topology(n, tuple(
        frozenset(j for j in range(1, n + 1) if j != i)
        for i in range(1, n + 1)
    ))


def bidirectional_ring(n: int) -> Topology:
    """Each robot hears its two ring neighbors."""
    if n < 2:
        raise ConfigError(f"ring topology needs n >= 2, got {n}")
    return Topology(n, tuple(
        frozenset({(i - 2) % n + 1, i % n + 1})
        for i in range(1, n + 1)
    ))


def explicit_topology(n: int, edges: Sequence[Sequence[int]]) -> Topology:
    """Topology from an explicit directed edge list [[from, to], ...]."""
    outs: list[set] = [set() for _ in range(n)]
    for edge in edges:
        if len(edge) != 2:
            raise ConfigError(f"edge {edge!r} must be a [from, to] pair")
        src, dst = edge
        if not (isinstance(src, int) and isinstance(dst, int)):
            raise ConfigError(f"edge {edge!r} must contain integer ids")
        if not (1 <= src <= n and 1 <= dst <= n):
            raise ConfigError(f"edge {edge!r} outside 1..{n}")
        outs[src - 1].add(dst)
    return Topology(n, tuple(frozenset(o) for o in outs))


def is_strongly_connected(topology: Topology) -> bool:
    """Every robot reaches every other along directed pulses."""
    n = topology.n
    if n == 1:
        return True
    reverse: list[set] = [set() for _ in range(n)]
    for i in range(1, n + 1):
        for j in topology.out(i):
            reverse[j - 1].add(i)

    def reaches_all(neighbors) -> bool:
        seen = {1}
        stack = [1]
        while stack:
            for j in neighbors(stack.pop()):
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return len(seen) == n

    return reaches_all(topology.out) and reaches_all(lambda i: reverse[i - 1])


@dataclass(frozen=True)
class DelayModel:
    """Pulse propagation delay: zero, fixed, or uniform in [lo, hi]."""

    kind: str = "zero"
    value: float = 0.0
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "fixed", "uniform"):
            raise ConfigError(f"unknown delay kind {self.kind!r}")
        if self.kind == "fixed" and self.value < 0:
            raise ConfigError("fixed delay must be >= 0")
        if self.kind == "uniform" and not 0 <= self.lo <= self.hi:
            raise ConfigError("uniform delay needs 0 <= lo <= hi")

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "fixed" and self.value == 0.0) \
            or (self.kind == "uniform" and self.hi == 0.0)


def sample_delay(model: DelayModel, rng: random.Random) -> float:
    """Draw one propagation delay; deterministic for a given rng state."""
    if model.kind == "zero":
        return 0.0
    if model.kind == "fixed":
        return model.value
    return rng.uniform(model.lo, model.hi)


@dataclass(frozen=True)
class InitSpec:
    """How initial headings are produced.

    * ``explicit``: the given list, wrapped to [0, 2*pi).
    * ``random_in_arc``: uniform within a random arc of width ``arc_width``.
    * ``random_distinct``: uniform with pairwise circular separation of
      at least ``min_separation`` (default 2*pi/(100*n)).
    """

    kind: str
    headings: tuple[float, ...] = ()
    arc_width: float = 0.0
    min_separation: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("explicit", "random_in_arc", "random_distinct"):
            raise ConfigError(f"unknown init kind {self.kind!r}")
        if self.kind == "random_in_arc" and not 0.0 < self.arc_width < TWO_PI:
            raise ConfigError("arc_width must be in (0, 2*pi)")

    def realize(self, n: int, rng: random.Random) -> tuple[Angle, ...]:
        if self.kind == "explicit":
            if len(self.headings) != n:
                raise ConfigError(
                    f"expected {n} explicit headings, got {len(self.headings)}"
                )
            return tuple(wrap(h) for h in self.headings)
        if self.kind == "random_in_arc":
            base = rng.uniform(0.0, TWO_PI)
            return tuple(wrap(base + rng.uniform(0.0, self.arc_width))
                         for _ in range(n))
        sep = self.min_separation
        if sep is None:
            sep = TWO_PI / (100 * n)
        if sep * n >= TWO_PI:
            raise ConfigError("min_separation too large for n robots on the circle")
        chosen: list[float] = []
        while len(chosen) < n:
            candidate = rng.uniform(0.0, TWO_PI)
            if all(circular_distance(candidate, c) >= sep for c in chosen):
                chosen.append(candidate)
        return tuple(chosen)


@dataclass(frozen=True)
class SimConfig:
    """Validated simulation inputs; see the module docstring for the
    on-disk form. ``initial_headings`` are already realized angles."""

    n: int
    omega0: float
    omega_max: float
    prc: PrcSpec
    topology: Topology
    initial_headings: tuple[Angle, ...]
    delay_model: DelayModel = field(default_factory=DelayModel)
    drop_prob: float = 0.0
    t_end: float = 100.0
    seed: int = 0
    sample_interval: float = 0.5
    reset_on_fire: bool = True

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if len(self.initial_headings) != self.n:
            raise ConfigError(
                f"n = {self.n} but {len(self.initial_headings)} initial headings"
            )
        object.__setattr__(
            self, "initial_headings",
            tuple(wrap(h) for h in self.initial_headings),
        )
        if not (math.isfinite(self.omega0) and self.omega0 > 0):
            raise ConfigError(f"omega0 must be > 0, got {self.omega0}")
        if not (math.isfinite(self.omega_max) and self.omega_max > 0):
            raise ConfigError(f"omega_max must be > 0, got {self.omega_max}")
        if self.topology.n != self.n:
            raise ConfigError("topology size does not match n")
        if isinstance(self.prc, (DesyncPrf, GeneralPrf)) and self.prc.n != self.n:
            raise ConfigError("response rule network size does not match n")
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ConfigError(f"drop_prob must be in [0, 1], got {self.drop_prob}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be > 0, got {self.t_end}")
        if not self.sample_interval > 0:
            raise ConfigError(f"sample_interval must be > 0, got {self.sample_interval}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed}")

    @property
    def period(self) -> float:
        """Fundamental cycle duration 2*pi/omega0."""
        return TWO_PI / self.omega0


@dataclass(frozen=True)
class Violation:
    """One violated hypothesis found by :func:`validate`."""

    level: str  # "error" (guarantee cannot hold) or "warning"
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.level}[{self.code}]: {self.message}"


def validate(config: SimConfig) -> list[Violation]:
    """Check the hypotheses behind the convergence guarantees.

    Never raises: returns every violation found. Errors mark broken
    hard preconditions of the desynchronization guarantee; warnings
    mark synchronization hypotheses that leave the outcome open but
    still allow simulation.
    """
    out: list[Violation] = []
    headings = config.initial_headings
    if isinstance(config.prc, (DesyncPrf, GeneralPrf)):
        dup = [
            (i + 1, j + 1)
            for i in range(config.n) for j in range(i + 1, config.n)
            if circular_distance(headings[i], headings[j]) <= ANGLE_EPS
        ]
        if dup:
            out.append(Violation(
                "error", "desync-duplicate-initial-headings",
                "phase desynchronization requires pairwise-distinct initial "
                f"headings; coinciding pairs: {dup}",
            ))
        if not config.topology.is_all_to_all():
            out.append(Violation(
                "error", "desync-requires-all-to-all",
                "phase desynchronization is only guaranteed on an all-to-all "
                "topology",
            ))
    if isinstance(config.prc, SyncPrc):
        arc = metrics.containing_arc(headings).length
        if arc >= math.pi:
            out.append(Violation(
                "warning", "sync-initial-arc-too-wide",
                f"initial containing arc {arc:.4f} rad is not below pi; the "
                "synchronization guarantee assumes a tighter initial spread",
            ))
        if config.prc.refractory >= TWO_PI - arc:
            out.append(Violation(
                "warning", "sync-refractory-too-long",
                f"refractory band {config.prc.refractory:.4f} rad reaches the "
                f"initial containing arc (bound {TWO_PI - arc:.4f} rad)",
            ))
        if not is_strongly_connected(config.topology):
            out.append(Violation(
                "warning", "sync-topology-not-strongly-connected",
                "synchronization is only guaranteed on strongly connected "
                "topologies",
            ))
    return out


def hard_violations(config: SimConfig) -> list[Violation]:
    return [v for v in validate(config) if v.level == "error"]


_TOP_KEYS = {
    "n", "omega0", "omega_max", "prc", "topology", "init", "delay",
    "drop_prob", "t_end", "sample_interval", "seed", "reset_on_fire",
}


def _section(data: Mapping, name: str, known: set) -> dict:
    if not isinstance(data, Mapping):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return dict(data)


def _require(data: Mapping, name: str, key: str):
    if key not in data:
        raise ConfigError(f"missing key {key!r} in {name!r}")
    return data[key]


def _parse_prc(data: Mapping, n: int) -> PrcSpec:
    kind = _require(data, "prc", "type")
    if kind == "sync":
        d = _section(data, "prc", {"type", "alpha", "refractory"})
        return SyncPrc(alpha=float(_require(d, "prc", "alpha")),
                       refractory=float(d.get("refractory", 0.0)))
    if kind == "desync":
        d = _section(data, "prc", {"type", "l1", "l2"})
        return DesyncPrf(l1=float(_require(d, "prc", "l1")),
                         l2=float(_require(d, "prc", "l2")), n=n)
    raise ConfigError(f"unknown prc type {kind!r}")


def _parse_topology(data: Mapping, n: int) -> Topology:
    kind = _require(data, "topology", "type")
    if kind == "all_to_all":
        _section(data, "topology", {"type"})
        return all_to_all(n)
    if kind == "ring":
        _section(data, "topology", {"type"})
        return bidirectional_ring(n)
    if kind == "explicit":
        d = _section(data, "topology", {"type", "edges"})
        return explicit_topology(n, _require(d, "topology", "edges"))
    raise ConfigError(f"unknown topology type {kind!r}")


def _parse_init(data: Mapping) -> InitSpec:
    kind = _require(data, "init", "type")
    if kind == "explicit":
        d = _section(data, "init", {"type", "headings"})
        return InitSpec(kind="explicit",
                        headings=tuple(float(h) for h in _require(d, "init", "headings")))
    if kind == "random_in_arc":
        d = _section(data, "init", {"type", "arc_width"})
        return InitSpec(kind="random_in_arc",
                        arc_width=float(_require(d, "init", "arc_width")))
    if kind == "random_distinct":
        d = _section(data, "init", {"type", "min_separation"})
        sep = d.get("min_separation")
        return InitSpec(kind="random_distinct",
                        min_separation=None if sep is None else float(sep))
    raise ConfigError(f"unknown init type {kind!r}")


def _parse_delay(data: Mapping) -> DelayModel:
    kind = _require(data, "delay", "type")
    if kind == "zero":
        _section(data, "delay", {"type"})
        return DelayModel(kind="zero")
    if kind == "fixed":
        d = _section(data, "delay", {"type", "value"})
        return DelayModel(kind="fixed", value=float(_require(d, "delay", "value")))
    if kind == "uniform":
        d = _section(data, "delay", {"type", "lo", "hi"})
        return DelayModel(kind="uniform", lo=float(_require(d, "delay", "lo")),
                          hi=float(_require(d, "delay", "hi")))
    raise ConfigError(f"unknown delay type {kind!r}")


def load_config(source, seed_override: int | None = None) -> SimConfig:
    """Build a :class:`SimConfig` from a JSON file path or a plain dict.

    Initial headings are realized here (deterministically from the
    seed) so the returned config is fully concrete.
    """
    if isinstance(source, (str, Path)):
        try:
            data = json.loads(Path(source).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        data = source
    data = _section(data, "config", _TOP_KEYS)
    try:
        n = int(_require(data, "config", "n"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"n must be an integer: {exc}") from exc
    seed = int(data.get("seed", 0))
    if seed_override is not None:
        seed = seed_override
    init = _parse_init(_require(data, "config", "init"))
    headings = init.realize(n, derived_rng("init", seed))
    return SimConfig(
        n=n,
        omega0=float(_require(data, "config", "omega0")),
        omega_max=float(_require(data, "config", "omega_max")),
        prc=_parse_prc(_require(data, "config", "prc"), n),
        topology=_parse_topology(_require(data, "config", "topology"), n),
        initial_headings=headings,
        delay_model=_parse_delay(data.get("delay", {"type": "zero"})),
        drop_prob=float(data.get("drop_prob", 0.0)),
        t_end=float(_require(data, "config", "t_end")),
        seed=seed,
        sample_interval=float(data.get("sample_interval", 0.5)),
        reset_on_fire=bool(data.get("reset_on_fire", True)),
    )
