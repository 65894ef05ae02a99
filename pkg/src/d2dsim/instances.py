"""Random selection instances for regression corpora and solver checks."""

from __future__ import annotations

import numpy as np

from .model import DORMANT, build_graph, cellular_state, legal_modes
from .radio import build_interference_table, node_positions
from .selector import SelectionProblem


def random_states(rng: np.random.Generator, n_users: int, p_dormant=0.2, p_cellular=0.4) -> list[int]:
    """Valid state vector: dormant, cellular, or randomly paired users."""
    states = [DORMANT] * n_users
    seekers = []
    for user in range(1, n_users + 1):
        r = rng.random()
        if r < p_dormant:
            continue
        if r < p_dormant + p_cellular:
            states[user - 1] = cellular_state(n_users)
        else:
            seekers.append(user)
    rng.shuffle(seekers)
    while len(seekers) >= 2:
        a, b = int(seekers.pop()), int(seekers.pop())
        states[a - 1], states[b - 1] = b, a
    for u in seekers:
        states[u - 1] = cellular_state(n_users)
    return states


def random_problem(rng: np.random.Generator, n_users: int = None, max_users: int = 6,
                   radius: float = 100.0, keep_prob: float = 0.9,
                   utility_range=(-2.0, 10.0), p_dormant=0.2, p_cellular=0.4,
                   gamma_decades=(-1.0, 1.5)) -> SelectionProblem:
    """Instance built on a random graph with distance-based interference.

    ``gamma`` is drawn around the typical interference level so that the
    interference constraints bind on a good share of instances.
    """
    n = int(rng.integers(1, max_users + 1)) if n_users is None else n_users
    states = random_states(rng, n, p_dormant, p_cellular)
    graph = build_graph(states)
    r = radius * np.sqrt(rng.random(n))
    phi = rng.random(n) * 2 * np.pi
    pos = np.column_stack([r * np.cos(phi), r * np.sin(phi)])
    table = build_interference_table(node_positions(pos, n), 0.2)
    utilities = {}
    for arc in graph.arcs:
        for mode in legal_modes(arc, n):
            if rng.random() < keep_prob:
                utilities[(arc.tx, arc.rx, int(mode))] = float(rng.uniform(*utility_range))
    off = table[~np.eye(n + 1, dtype=bool)]
    scale = float(np.median(off)) if off.size else 1.0
    gamma = scale * float(10 ** rng.uniform(*gamma_decades))
    cellular = frozenset(u for u, s in enumerate(states, start=1) if s == n + 1)
    return SelectionProblem(n, utilities, table, gamma, cellular)
