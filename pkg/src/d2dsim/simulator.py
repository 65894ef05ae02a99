"""Mode-interval loop of the single-cell D2D simulator."""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .config import SimConfig
from .economics import predict_utilities
from .model import DORMANT, Mode, build_graph, cellular_state, validate_states
from .radio import (RateTable, build_interference_table, draw_shadowing, estimate_cqi,
                    load_topology, node_positions, tx_powers)
from .scheduler import ConnectionReport, PfState, accumulate_interval, schedule_interval
from .selector import SelectionProblem, solve

log = logging.getLogger(__name__)

INTERVALS_CSV_HEADER = ["j", "tx", "rx", "mode", "B", "theta_bits", "energy_J", "utility"]


@dataclass
class ScenarioState:
    interval: int
    positions: np.ndarray
    waypoints: np.ndarray
    states: list
    pf: PfState
    rng: np.random.Generator = field(repr=False)


@dataclass
class IntervalReport:
    interval: int
    connections: list[ConnectionReport]
    solver: str
    predicted_objective: float
    n_candidates: int

    @property
    def total_utility(self) -> float:
        return math.fsum(c.utility for c in self.connections)

    @property
    def total_theta(self) -> float:
        return math.fsum(c.theta for c in self.connections)

    @property
    def total_energy(self) -> float:
        return math.fsum(c.energy for c in self.connections)

    def mode_counts(self) -> dict[int, int]:
        counts = {int(m): 0 for m in Mode}
        for c in self.connections:
            counts[c.mode] += 1
        return counts


def uniform_disc(rng: np.random.Generator, n: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    phi = 2 * np.pi * rng.random(n)
    return np.column_stack([r * np.cos(phi), r * np.sin(phi)])


def initial_state(cfg: SimConfig) -> ScenarioState:
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_users
    if cfg.topology_file:
        positions = load_topology(cfg.topology_file, n)
        if (np.hypot(positions[:, 0], positions[:, 1]) > cfg.cell_radius).any():
            raise ValueError("topology places a user outside the cell radius")
    else:
        positions = uniform_disc(rng, n, cfg.cell_radius)
    waypoints = uniform_disc(rng, n, cfg.cell_radius)
    states = list(cfg.initial_states) if cfg.initial_states else [DORMANT] * n
    bad = validate_states(states)
    if bad is not None:
        raise ValueError(f"initial_states: user {bad[0]} has invalid state {bad[1]}")
    return ScenarioState(0, positions, waypoints, states, PfState(cfg.pf_ewma, cfg.pf_floor), rng)


def _move(s: ScenarioState, cfg: SimConfig):
    """Random waypoint: each user walks at most speed * T toward its waypoint."""
    step = cfg.speed * cfg.interval_duration_T
    if step <= 0:
        return s.positions, s.waypoints
    pos, wp = s.positions.copy(), s.waypoints.copy()
    for u in range(len(pos)):
        delta = wp[u] - pos[u]
        dist = math.hypot(delta[0], delta[1])
        if dist <= step:
            pos[u] = wp[u]
            wp[u] = uniform_disc(s.rng, 1, cfg.cell_radius)[0]
        else:
            pos[u] = pos[u] + delta * (step / dist)
    return pos, wp


def _draw(rng: np.random.Generator, row) -> int:
    r = rng.random()
    acc = 0.0
    for k, p in enumerate(row):
        acc += p
        if r < acc:
            return k
    return len(row) - 1


def evolve_states(s: ScenarioState, cfg: SimConfig) -> ScenarioState:
    """Advance positions and user states by one mode interval.

    Pairs that drift out of D2D range, or break at random, fall back to
    cellular. Other users follow the transition matrix; those drawn as
    seeking D2D are matched with the nearest other seeker in range (lower id
    on ties), and seekers left without a partner become cellular.
    """
    n = cfg.n_users
    cell = cellular_state(n)
    rng = s.rng
    pos, wp = _move(s, cfg)
    old = s.states
    new = list(old)
    frozen = set()

    for u in range(1, n + 1):
        v = old[u - 1]
        if 1 <= v <= n and u < v:
            d = math.hypot(*(pos[u - 1] - pos[v - 1]))
            broken = rng.random() < cfg.pair_break_prob
            if broken or d > cfg.d2d_range:
                new[u - 1] = new[v - 1] = cell
                frozen.update((u, v))

    seekers = []
    for u in range(1, n + 1):
        v = old[u - 1]
        if u in frozen or 1 <= v <= n:
            continue
        row = cfg.transition_matrix[0 if v == DORMANT else 1]
        nxt = _draw(rng, row)
        if nxt == 0:
            new[u - 1] = DORMANT
        elif nxt == 1:
            new[u - 1] = cell
        else:
            seekers.append(u)

    unmatched = set(seekers)
    for u in seekers:
        if u not in unmatched:
            continue
        unmatched.discard(u)
        best = None
        for v in sorted(unmatched):
            d = math.hypot(*(pos[u - 1] - pos[v - 1]))
            if d <= cfg.d2d_range and (best is None or d < best[0]):
                best = (d, v)
        if best is None:
            new[u - 1] = cell
        else:
            v = best[1]
            unmatched.discard(v)
            new[u - 1], new[v - 1] = v, u

    bad = validate_states(new)
    if bad is not None:
        raise AssertionError(f"state evolution broke symmetry at user {bad[0]}")
    return replace(s, interval=s.interval + 1, positions=pos, waypoints=wp, states=new)


FrameHook = Callable[[int, list, object, SelectionProblem], None]


def step_interval(s: ScenarioState, cfg: SimConfig, on_frames: Optional[FrameHook] = None):
    """Select modes for the current state and schedule one interval."""
    n = cfg.n_users
    j = s.interval
    graph = build_graph(s.states, j)
    nodes = node_positions(s.positions, n)
    shadow = draw_shadowing(n + 1, cfg.shadowing_sigma_db, s.rng)
    powers = tx_powers(n, cfg.user_tx_power, cfg.enb_tx_power)
    cqi = estimate_cqi(graph, s.positions, cfg.noise_power, powers, cfg.path_loss_exponent, shadow)
    rates = RateTable.from_cqi(graph, cqi, s.positions, cfg.wifi_rate_steps)
    table = build_interference_table(nodes, powers, cfg.path_loss_exponent, shadow)
    utilities = predict_utilities(graph, rates, cfg)
    cellular = frozenset(u for u, v in enumerate(s.states, start=1) if v == cellular_state(n))
    problem = SelectionProblem(n, utilities, table, cfg.gamma, cellular)
    assignment, solver = solve(problem, cfg.exact_max_pairs)
    log.info("interval %d: %d arcs, %d candidates, solver=%s, predicted objective %r",
             j, len(graph), len(utilities), solver, assignment.objective)
    frames = schedule_interval(assignment, rates, s.pf, cfg, problem)
    if on_frames is not None:
        on_frames(j, frames, assignment, problem)
    conns = accumulate_interval(frames, assignment, rates, cfg, utilities)
    return IntervalReport(j, conns, solver, assignment.objective, len(utilities))


def run(cfg: SimConfig, on_frames: Optional[FrameHook] = None) -> list[IntervalReport]:
    cfg.validate()
    state = initial_state(cfg)
    reports = []
    for _ in range(cfg.n_intervals):
        state = evolve_states(state, cfg)
        reports.append(step_interval(state, cfg, on_frames))
    return reports


def write_intervals_csv(reports: list[IntervalReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(INTERVALS_CSV_HEADER)
        for rep in reports:
            for c in rep.connections:
                w.writerow([rep.interval, c.tx, c.rx, c.mode, c.rb_count, c.theta, c.energy, c.utility])


def summarize(reports: list[IntervalReport], cfg: SimConfig) -> dict:
    counts = {str(int(m)): 0 for m in Mode}
    solvers = {}
    for rep in reports:
        for m, k in rep.mode_counts().items():
            counts[str(m)] += k
        solvers[rep.solver] = solvers.get(rep.solver, 0) + 1
    return {
        "n_users": cfg.n_users,
        "n_intervals": len(reports),
        "seed": cfg.seed,
        "alpha": cfg.alpha,
        "gamma": cfg.gamma,
        "total_utility": math.fsum(r.total_utility for r in reports),
        "total_theta_bits": math.fsum(r.total_theta for r in reports),
        "total_energy_J": math.fsum(r.total_energy for r in reports),
        "connections_per_mode": counts,
        "solver_intervals": solvers,
        "intervals": [
            {
                "j": r.interval,
                "solver": r.solver,
                "candidates": r.n_candidates,
                "predicted_objective": r.predicted_objective,
                "realized_utility": r.total_utility,
                "modes": {str(k): v for k, v in r.mode_counts().items()},
            }
            for r in reports
        ],
    }


def write_summary(reports: list[IntervalReport], cfg: SimConfig, path) -> None:
    Path(path).write_text(json.dumps(summarize(reports, cfg), indent=2, sort_keys=True) + "\n")
