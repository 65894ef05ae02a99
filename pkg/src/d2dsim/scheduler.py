"""Frame-level Proportional Fair scheduling of the active connections.

Per subframe the eNB serves exactly one cellular connection, chosen by the
PF metric, on the shared RB pool. Underlay connections transmit on the shared
pool in every subframe, overlay connections on the dedicated overlay pool,
and WiFi connections sit outside LTE scheduling altogether. The overlay pool
is returned to the shared pool when no connection uses mode 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import economics
from .model import Arc, Mode
from .selector import ModeAssignment, check_feasibility


@dataclass(frozen=True)
class RbPools:
    shared: int
    overlay: int

    @classmethod
    def for_modes(cls, modes: Iterable[int], rb_per_subframe: int, overlay_pool: int) -> "RbPools":
        if any(m == Mode.OVERLAY for m in modes):
            return cls(rb_per_subframe - overlay_pool, overlay_pool)
        return cls(rb_per_subframe, 0)

    def grant(self, mode: int) -> int:
        if mode in (Mode.CELLULAR, Mode.UNDERLAY):
            return self.shared
        if mode == Mode.OVERLAY:
            return self.overlay
        return 0


class PfState:
    """EWMA of served bits per subframe for each cellular connection."""

    def __init__(self, ewma: float = 0.01, floor: float = 1.0):
        self.ewma = ewma
        self.floor = floor
        self.average: dict[Arc, float] = {}

    def get(self, arc: Arc) -> float:
        return self.average.setdefault(arc, self.floor)

    def update(self, arcs: Iterable[Arc], served: Optional[Arc], bits: float):
        for arc in arcs:
            got = bits if arc == served else 0.0
            self.average[arc] = (1 - self.ewma) * self.get(arc) + self.ewma * got

    def retain(self, arcs: Iterable[Arc]):
        """Keep averages of surviving connections, forget the rest."""
        keep = set(arcs)
        self.average = {a: v for a, v in self.average.items() if a in keep}


@dataclass
class Subframe:
    cellular: Optional[Arc]
    d2d: tuple[tuple[Arc, int], ...]
    rbs: dict[Arc, int] = field(default_factory=dict)


@dataclass
class FrameAllocation:
    pools: RbPools
    subframes: list[Subframe]


def _connections(active: ModeAssignment) -> list[tuple[Arc, int]]:
    return [(Arc(n, m), i) for n, m, i in active.chosen]


def _reject_infeasible(active: ModeAssignment, problem=None):
    if problem is not None:
        violated = check_feasibility(problem, active)
        if violated is not None:
            raise ValueError(f"assignment violates {violated}")
        return
    seen = set()
    for n, m, i in active.chosen:
        for u in (n, m):
            if i == Mode.CELLULAR and u == m:
                continue
            if u in seen:
                raise ValueError(f"user {u} is in more than one active connection")
            seen.add(u)


def schedule_frame(active: ModeAssignment, rates, pf: PfState, rb_per_subframe: int = 100,
                   overlay_pool: int = 20, subframes: int = 10, problem=None) -> FrameAllocation:
    """Allocate one frame; PF averages in ``pf`` are updated in place.

    Without ``problem`` only the one-connection-per-user rule is checked.
    """
    _reject_infeasible(active, problem)
    conns = _connections(active)
    pools = RbPools.for_modes([i for _, i in conns], rb_per_subframe, overlay_pool)
    cellular = sorted(a for a, i in conns if i == Mode.CELLULAR)
    d2d = tuple((a, i) for a, i in conns if i != Mode.CELLULAR)
    out = []
    for _ in range(subframes):
        served = None
        bits = 0.0
        if cellular:
            best_metric = -1.0
            for arc in cellular:
                inst = rates.rate(arc, Mode.CELLULAR) * pools.shared
                metric = inst / pf.get(arc)
                if metric > best_metric:
                    served, best_metric, bits = arc, metric, inst
            pf.update(cellular, served, bits)
        rbs = {arc: pools.grant(i) for arc, i in d2d}
        if served is not None:
            rbs[served] = pools.shared
        out.append(Subframe(served, d2d, rbs))
    return FrameAllocation(pools, out)


def schedule_interval(active: ModeAssignment, rates, pf: PfState, cfg,
                      problem=None) -> list[FrameAllocation]:
    _reject_infeasible(active, problem)
    pf.retain(Arc(n, m) for n, m, i in active.chosen if i == Mode.CELLULAR)
    return [
        schedule_frame(active, rates, pf, cfg.rb_per_subframe, cfg.overlay_rb_pool,
                       cfg.subframes_per_frame)
        for _ in range(cfg.frames_per_interval)
    ]


@dataclass(frozen=True)
class ConnectionReport:
    tx: int
    rx: int
    mode: int
    rb_count: int
    theta: float
    energy: float
    utility: float
    predicted_utility: Optional[float] = None
    subframes: int = 0


def accumulate_interval(frames: list[FrameAllocation], active: ModeAssignment, rates, cfg,
                        predicted: Optional[dict] = None) -> list[ConnectionReport]:
    """Realised RBs, data, energy and utility of every active connection."""
    counts = {}
    rbs = {}
    for frame in frames:
        for sf in frame.subframes:
            for arc, n in sf.rbs.items():
                if n > 0:
                    counts[arc] = counts.get(arc, 0) + 1
                    rbs[arc] = rbs.get(arc, 0) + n
    out = []
    for n, m, i in active.chosen:
        arc = Arc(n, m)
        econ = economics.evaluate(i, rbs.get(arc, 0), rates.rate(arc, i), cfg)
        pred = None if predicted is None else predicted.get((n, m, i))
        out.append(ConnectionReport(n, m, i, econ.rb_count, econ.theta, econ.energy, econ.utility,
                                    pred, counts.get(arc, 0)))
    return out


FRAME_CSV_HEADER = ["interval", "frame", "subframe", "conn_tx", "conn_rx", "mode", "rb_count"]


def write_frames(writer, interval: int, frames: list[FrameAllocation],
                 active: ModeAssignment):
    modes = active.modes()
    for f, frame in enumerate(frames):
        for s, sf in enumerate(frame.subframes):
            for arc in sorted(sf.rbs):
                writer.writerow([interval, f, s, arc.tx, arc.rx, modes[(arc.tx, arc.rx)], sf.rbs[arc]])
