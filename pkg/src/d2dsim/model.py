"""Users, states, modes and the per-interval communication graph.

User states follow the integer encoding used throughout the package: for a
cell with ``N`` users, state ``0`` is dormant, ``m`` in ``1..N`` means paired
for D2D with user ``m``, and ``N + 1`` means cellular. Node ``N + 1`` is the
eNB.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass
from enum import IntEnum
from typing import Optional, Sequence

DORMANT = 0


class Mode(IntEnum):
    CELLULAR = 0
    UNDERLAY = 1
    OVERLAY = 2
    OUTBAND = 3


D2D_MODES = (Mode.UNDERLAY, Mode.OVERLAY, Mode.OUTBAND)
LTE_MODES = (Mode.CELLULAR, Mode.UNDERLAY, Mode.OVERLAY)


def enb_id(n_users: int) -> int:
    return n_users + 1


def cellular_state(n_users: int) -> int:
    return n_users + 1


@dataclass(frozen=True, order=True)
class Arc:
    """A connection with a fixed transmitter and receiver.

    D2D arcs are oriented from the lower user id to the higher one and
    cellular arcs from the user to the eNB, so each arc is stored once.
    """

    tx: int
    rx: int

    def __post_init__(self):
        if self.tx == self.rx:
            raise ValueError(f"arc ({self.tx}, {self.rx}) connects a node to itself")

    def touches(self, node: int) -> bool:
        return node == self.tx or node == self.rx


def legal_modes(arc: Arc, n_users: int) -> tuple[Mode, ...]:
    if arc.rx == enb_id(n_users) or arc.tx == enb_id(n_users):
        return (Mode.CELLULAR,)
    return D2D_MODES


def validate_states(states: Sequence[int]) -> Optional[tuple[int, int]]:
    """Check the encoding and D2D symmetry of a state vector.

    Returns ``None`` when valid, otherwise the first offending ``(user, state)``
    pair in user order.
    """
    n = len(states)
    for user, state in enumerate(states, start=1):
        if not isinstance(state, numbers.Integral) or isinstance(state, bool):
            return (user, state)
        if state < 0 or state > n + 1:
            return (user, state)
        if 1 <= state <= n:
            if state == user or states[state - 1] != user:
                return (user, state)
    return None


@dataclass(frozen=True)
class NetworkGraph:
    n_users: int
    arcs: tuple[Arc, ...]
    interval: int = 0

    @property
    def enb(self) -> int:
        return enb_id(self.n_users)

    def degree(self, node: int) -> int:
        return sum(1 for a in self.arcs if a.touches(node))

    def d2d_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.rx != self.enb]

    def enb_arcs(self) -> list[Arc]:
        return [a for a in self.arcs if a.rx == self.enb]

    def __len__(self):
        return len(self.arcs)


def build_graph(states: Sequence[int], interval: int = 0) -> NetworkGraph:
    violation = validate_states(states)
    if violation is not None:
        raise ValueError(f"invalid user states: user {violation[0]} has state {violation[1]}")
    n = len(states)
    enb = enb_id(n)
    arcs = set()
    for user, state in enumerate(states, start=1):
        if state == DORMANT:
            continue
        arcs.add(Arc(user, enb))
        if state <= n:
            arcs.add(Arc(min(user, state), max(user, state)))
    return NetworkGraph(n, tuple(sorted(arcs)), interval)
