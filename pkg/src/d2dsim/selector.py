"""Joint mode selection and connection activation for one mode interval.

A problem lists every usable ``(tx, rx, mode)`` combination with its
predicted utility. A solution activates a subset of them such that

* C1: no user receives on more than one active connection,
* C2: no user takes part in more than one active connection,
* C3: underlay (mode 1) transmitters put at most ``gamma`` of interference
  on each cellular receiver and on the eNB,
* C4: each active underlay receiver sees at most ``gamma`` from the other
  active cellular and underlay transmitters,
* C5: each active overlay (mode 2) receiver sees at most ``gamma`` from the
  other active overlay transmitters.

The eNB is exempt from C1/C2, so several cellular connections may be active
and are then time-shared by the scheduler. Every constraint only gets harder
when connections are added, so the feasible sets are closed under removal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional

import numpy as np

from .model import Mode

Triple = tuple[int, int, int]


@dataclass(frozen=True)
class SelectionProblem:
    n_users: int
    utilities: Mapping[Triple, float]
    interference: np.ndarray
    gamma: float
    cellular_users: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        enb = self.n_users + 1
        table = np.asarray(self.interference, dtype=float)
        if table.shape != (enb, enb):
            raise ValueError(f"interference table must be {enb}x{enb}, got {table.shape}")
        if (table < 0).any() or not np.isfinite(table).all():
            raise ValueError("interference entries must be finite and >= 0")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        for n, m, i in self.utilities:
            if not (1 <= n <= enb and 1 <= m <= enb) or n == m:
                raise ValueError(f"bad arc ({n}, {m})")
            to_enb = enb in (n, m)
            if (i == Mode.CELLULAR) != to_enb or not 0 <= i <= 3:
                raise ValueError(f"mode {i} is not legal on arc ({n}, {m})")
        object.__setattr__(self, "interference", table)
        object.__setattr__(self, "utilities", dict(self.utilities))
        object.__setattr__(self, "cellular_users", frozenset(self.cellular_users))

    @property
    def enb(self) -> int:
        return self.n_users + 1

    @property
    def candidates(self) -> list[Triple]:
        return sorted(self.utilities)

    def I(self, src: int, dst: int) -> float:
        return self.interference[src - 1, dst - 1]


@dataclass(frozen=True)
class ModeAssignment:
    chosen: tuple[Triple, ...] = ()
    objective: float = 0.0

    def modes(self) -> dict[tuple[int, int], int]:
        return {(n, m): i for n, m, i in self.chosen}


def objective(p: SelectionProblem, chosen: Iterable[Triple]) -> float:
    return math.fsum(p.utilities[c] for c in chosen)


def make_assignment(p: SelectionProblem, chosen: Iterable[Triple]) -> ModeAssignment:
    chosen = tuple(sorted(chosen))
    return ModeAssignment(chosen, objective(p, chosen))


def check_feasibility(p: SelectionProblem, assignment) -> Optional[str]:
    """Return the id of the first violated constraint, or None if feasible."""
    chosen = assignment.chosen if isinstance(assignment, ModeAssignment) else tuple(assignment)
    for c in chosen:
        if c not in p.utilities:
            raise KeyError(f"connection {c} is not part of the problem")
    enb = p.enb
    chosen = sorted(chosen)

    received = {}
    for n, m, i in chosen:
        if m != enb:
            received[m] = received.get(m, 0) + 1
    if any(v > 1 for v in received.values()):
        return "C1"

    involved = {}
    for n, m, i in chosen:
        for u in (n, m):
            if u != enb:
                involved[u] = involved.get(u, 0) + 1
    if any(v > 1 for v in involved.values()):
        return "C2"

    gamma = p.gamma
    underlay = [(n, m) for n, m, i in chosen if i == Mode.UNDERLAY]
    overlay = [(n, m) for n, m, i in chosen if i == Mode.OVERLAY]
    inband_shared = [(n, m) for n, m, i in chosen if i in (Mode.CELLULAR, Mode.UNDERLAY)]

    protected = set(p.cellular_users) | {enb}
    for n, m, i in chosen:
        if i == Mode.CELLULAR:
            protected.update(u for u in (n, m) if u != enb)
    for x in sorted(protected):
        if math.fsum(p.I(n, x) for n, _ in underlay) > gamma:
            return "C3"

    for n, m in underlay:
        if math.fsum(p.I(x, m) for x, y in inband_shared if (x, y) != (n, m)) > gamma:
            return "C4"

    for n, m in overlay:
        if math.fsum(p.I(x, m) for x, y in overlay if (x, y) != (n, m)) > gamma:
            return "C5"
    return None


def _better(obj: float, chosen: tuple, best_obj: float, best: tuple) -> bool:
    return obj > best_obj or (obj == best_obj and chosen < best)


def brute_force_solve(p: SelectionProblem, max_pairs: int = 24) -> ModeAssignment:
    """Enumerate every subset of candidates and keep the best feasible one.

    Ties go to the lexicographically smallest sorted list of triples.
    """
    cands = p.candidates
    k = len(cands)
    if k > max_pairs:
        raise ValueError(f"{k} candidate connections exceed the enumeration budget of {max_pairs}")
    utils = [p.utilities[c] for c in cands]
    best, best_obj = (), 0.0
    for mask in range(1, 1 << k):
        idx = [b for b in range(k) if mask >> b & 1]
        obj = math.fsum(utils[b] for b in idx)
        if obj < best_obj:
            continue
        chosen = tuple(cands[b] for b in idx)
        if _better(obj, chosen, best_obj, best) and check_feasibility(p, chosen) is None:
            best, best_obj = chosen, obj
    return ModeAssignment(best, best_obj)


class _Search:
    """Depth-first branch and bound over include/exclude decisions.

    Feasibility is tracked incrementally here, independently of
    check_feasibility, and a branch is cut as soon as one addition breaks a
    constraint since no further addition can repair it.
    """

    def __init__(self, p: SelectionProblem):
        self.p = p
        self.cands = p.candidates
        self.utils = [p.utilities[c] for c in self.cands]
        k = len(self.cands)
        self.suffix = [0.0] * (k + 1)
        for j in range(k - 1, -1, -1):
            self.suffix[j] = self.suffix[j + 1] + max(self.utils[j], 0.0)
        self.tol = 1e-12 * (math.fsum(abs(u) for u in self.utils) + 1.0)
        self.busy = set()
        self.active = {0: [], 1: [], 2: [], 3: []}
        self.fallback = set()  # users active in cellular mode
        self.chosen = []
        self.best = ()
        self.best_obj = 0.0
        self.nodes = 0

    def _protected(self):
        p = self.p
        return set(p.cellular_users) | self.fallback | {p.enb}

    def _fits(self, c: Triple) -> bool:
        p, enb, gamma = self.p, self.p.enb, self.p.gamma
        n, m, i = c
        if any(u != enb and u in self.busy for u in (n, m)):
            return False
        shared = self.active[0] + self.active[1]
        if i == Mode.CELLULAR:
            newly = [u for u in (n, m) if u != enb and u not in p.cellular_users]
            for x in newly:
                if math.fsum(p.I(t, x) for t, _ in self.active[1]) > gamma:
                    return False
            for t, r in self.active[1]:
                terms = [p.I(x, r) for x, y in shared if (x, y) != (t, r)]
                if math.fsum(terms + [p.I(n, r)]) > gamma:
                    return False
        elif i == Mode.UNDERLAY:
            for x in self._protected():
                if math.fsum([p.I(t, x) for t, _ in self.active[1]] + [p.I(n, x)]) > gamma:
                    return False
            if math.fsum(p.I(x, m) for x, _ in shared) > gamma:
                return False
            for t, r in self.active[1]:
                terms = [p.I(x, r) for x, y in shared if (x, y) != (t, r)]
                if math.fsum(terms + [p.I(n, r)]) > gamma:
                    return False
        elif i == Mode.OVERLAY:
            ov = self.active[2]
            if math.fsum(p.I(x, m) for x, _ in ov) > gamma:
                return False
            for t, r in ov:
                terms = [p.I(x, r) for x, y in ov if (x, y) != (t, r)]
                if math.fsum(terms + [p.I(n, r)]) > gamma:
                    return False
        return True

    def _push(self, c: Triple):
        n, m, i = c
        enb = self.p.enb
        self.busy.update(u for u in (n, m) if u != enb)
        self.active[i].append((n, m))
        if i == Mode.CELLULAR:
            self.fallback.update(u for u in (n, m) if u != enb)
        self.chosen.append(c)

    def _pop(self):
        n, m, i = self.chosen.pop()
        enb = self.p.enb
        self.busy.difference_update(u for u in (n, m) if u != enb)
        self.active[i].pop()
        if i == Mode.CELLULAR:
            self.fallback.difference_update(u for u in (n, m) if u != enb)

    def run(self) -> ModeAssignment:
        self._dfs(0, 0.0)
        return ModeAssignment(self.best, self.best_obj)

    def _dfs(self, j: int, value: float):
        self.nodes += 1
        if value + self.suffix[j] < self.best_obj - self.tol:
            return
        if j == len(self.cands):
            chosen = tuple(self.chosen)
            obj = math.fsum(self.p.utilities[c] for c in chosen)
            if _better(obj, chosen, self.best_obj, self.best):
                self.best, self.best_obj = chosen, obj
            return
        c = self.cands[j]
        if self._fits(c):
            self._push(c)
            self._dfs(j + 1, value + self.utils[j])
            self._pop()
        self._dfs(j + 1, value)


def exact_solve(p: SelectionProblem) -> ModeAssignment:
    return _Search(p).run()


def greedy_solve(p: SelectionProblem) -> ModeAssignment:
    order = sorted(p.utilities, key=lambda c: (-p.utilities[c], c))
    chosen = []
    for c in order:
        if p.utilities[c] <= 0:
            break
        if check_feasibility(p, chosen + [c]) is None:
            chosen.append(c)
    return make_assignment(p, chosen)


def solve(p: SelectionProblem, max_exact_pairs: int = 24) -> tuple[ModeAssignment, str]:
    """Exact search when the instance is small enough, greedy otherwise."""
    if len(p.utilities) <= max_exact_pairs:
        return exact_solve(p), "exact"
    return greedy_solve(p), "greedy"


SOLVERS = {
    "brute": brute_force_solve,
    "exact": exact_solve,
    "greedy": greedy_solve,
}


# plain-text instance format
#
#   users N
#   gamma G
#   cellular u1 u2 ...        (users in cellular state; may be empty)
#   pair tx rx mode utility   (one line per candidate)
#   interference              (followed by N+1 rows of N+1 numbers)

def format_instance(p: SelectionProblem) -> str:
    lines = [f"users {p.n_users}", f"gamma {p.gamma!r}",
             " ".join(["cellular"] + [str(u) for u in sorted(p.cellular_users)])]
    for n, m, i in p.candidates:
        lines.append(f"pair {n} {m} {i} {p.utilities[(n, m, i)]!r}")
    lines.append("interference")
    for row in p.interference:
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_instance(text: str) -> SelectionProblem:
    n_users = None
    gamma = None
    cellular = []
    utilities = {}
    rows = []
    in_table = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        try:
            if in_table:
                rows.append([float(v) for v in parts])
                continue
            key = parts[0]
            if key == "users":
                n_users = int(parts[1])
            elif key == "gamma":
                gamma = float(parts[1])
            elif key == "cellular":
                cellular = [int(v) for v in parts[1:]]
            elif key == "pair":
                n, m, i = (int(v) for v in parts[1:4])
                if (n, m, i) in utilities:
                    raise ValueError(f"duplicate pair {(n, m, i)}")
                utilities[(n, m, i)] = float(parts[4])
            elif key == "interference":
                in_table = True
            else:
                raise ValueError(f"unknown keyword {key!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc or 'missing field'}") from None
    if n_users is None or gamma is None:
        raise ValueError("instance needs 'users' and 'gamma' lines")
    if not rows:
        rows = np.zeros((n_users + 1, n_users + 1))
    return SelectionProblem(n_users, utilities, np.array(rows, dtype=float), gamma, frozenset(cellular))


def load_instance(path) -> SelectionProblem:
    return parse_instance(Path(path).read_text())
