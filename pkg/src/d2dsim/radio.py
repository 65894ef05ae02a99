"""Channel model, CQI estimation and the worst-case interference table.

Node positions are handled as an ``(N + 1, 2)`` array: rows ``0..N-1`` are
users ``1..N`` and the last row is the eNB at the cell centre.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .model import Arc, Mode, NetworkGraph

MIN_DISTANCE_M = 1.0
RE_PER_RB = 168

# SNR (dB) at which CQI k becomes usable, k = 1..15
CQI_SNR_THRESHOLDS_DB = tuple(float(v) for v in np.round(np.linspace(-6.7, 22.7, 15), 10))

# bits per modulation symbol for CQI 1..15 (LTE 4-bit CQI table, 64QAM)
CQI_EFFICIENCY = (
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770,
    1.1758, 1.4766, 1.9141, 2.4063, 2.7305,
    3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
)


def path_gain(a, b, exponent: float = 3.5) -> float:
    d = math.hypot(a[0] - b[0], a[1] - b[1])
    return max(d, MIN_DISTANCE_M) ** (-exponent)


def gain_matrix(nodes: np.ndarray, exponent: float = 3.5,
                shadowing_db: Optional[np.ndarray] = None) -> np.ndarray:
    """Pairwise linear gains between all nodes, zero on the diagonal."""
    nodes = np.asarray(nodes, dtype=float)
    diff = nodes[:, None, :] - nodes[None, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), MIN_DISTANCE_M)
    gains = dist ** (-exponent)
    if shadowing_db is not None:
        gains = gains * 10.0 ** (-np.asarray(shadowing_db) / 10.0)
    np.fill_diagonal(gains, 0.0)
    return gains


def draw_shadowing(n_nodes: int, sigma_db: float, rng: np.random.Generator) -> Optional[np.ndarray]:
    """Symmetric lognormal shadowing in dB, or None when disabled."""
    if sigma_db <= 0:
        return None
    upper = np.triu(rng.normal(0.0, sigma_db, size=(n_nodes, n_nodes)), 1)
    return upper + upper.T


def snr_to_cqi(snr_db: float) -> int:
    if math.isnan(snr_db):
        return 0
    return int(np.searchsorted(CQI_SNR_THRESHOLDS_DB, snr_db, side="right"))


def rate_per_rb(cqi: int) -> int:
    """Bits carried by one RB at the given CQI (0 for an unusable link)."""
    if not 0 <= cqi <= 15 or int(cqi) != cqi:
        raise ValueError(f"CQI must be an integer in 0..15, got {cqi}")
    if cqi == 0:
        return 0
    return math.floor(RE_PER_RB * CQI_EFFICIENCY[int(cqi) - 1])


def wifi_rate(distance: float, steps: Sequence[tuple[float, float]]) -> float:
    """Step-function WiFi rate in bits/s; zero beyond the last step."""
    for max_dist, rate in sorted(steps):
        if distance <= max_dist:
            return float(rate)
    return 0.0


def node_positions(positions, n_users: int) -> np.ndarray:
    pos = np.asarray(positions, dtype=float).reshape(-1, 2) if len(positions) else np.zeros((0, 2))
    if len(pos) < n_users:
        raise ValueError(f"missing position for user {len(pos) + 1}")
    bad = np.flatnonzero(~np.isfinite(pos[:n_users]).all(axis=1))
    if bad.size:
        raise ValueError(f"missing position for user {bad[0] + 1}")
    return np.vstack([pos[:n_users], np.zeros((1, 2))])


def tx_powers(n_users: int, user_power: float, enb_power: float) -> np.ndarray:
    return np.append(np.full(n_users, float(user_power)), float(enb_power))


def estimate_cqi(graph: NetworkGraph, positions, noise: float, tx_power,
                 exponent: float = 3.5, shadowing_db=None) -> dict[Arc, int]:
    """CQI of every arc from the SNR at its receiver.

    ``tx_power`` is either one value for every node or a per-node array in
    node order (users, then eNB).
    """
    nodes = node_positions(positions, graph.n_users)
    gains = gain_matrix(nodes, exponent, shadowing_db)
    power = np.broadcast_to(np.asarray(tx_power, dtype=float), (len(nodes),))
    out = {}
    for arc in graph.arcs:
        signal = power[arc.tx - 1] * gains[arc.tx - 1, arc.rx - 1]
        snr_db = 10 * math.log10(signal / noise) if signal > 0 else -math.inf
        out[arc] = snr_to_cqi(snr_db)
    return out


def build_interference_table(nodes, tx_power, exponent: float = 3.5,
                             shadowing_db=None) -> np.ndarray:
    """Full-power interference ``I[a, b]`` caused by node a at node b.

    ``nodes`` are the positions of every node in the table. The simulator
    passes users ``1..N`` followed by the eNB, so index ``k`` is node ``k + 1``.
    """
    nodes = np.asarray(nodes, dtype=float).reshape(-1, 2)
    gains = gain_matrix(nodes, exponent, shadowing_db)
    power = np.broadcast_to(np.asarray(tx_power, dtype=float), (len(nodes),))
    return power[:, None] * gains


class RateTable:
    """Per-arc rates: bits/RB for the LTE modes and bits/s for WiFi."""

    def __init__(self, lte: Mapping[Arc, int], wifi: Mapping[Arc, float]):
        self.lte = dict(lte)
        self.wifi = dict(wifi)

    def rate(self, arc: Arc, mode: int) -> float:
        if mode == Mode.OUTBAND:
            return self.wifi.get(arc, 0.0)
        return self.lte.get(arc, 0)

    @classmethod
    def from_cqi(cls, graph: NetworkGraph, cqi: Mapping[Arc, int], positions,
                 wifi_steps) -> "RateTable":
        nodes = node_positions(positions, graph.n_users)
        lte = {arc: rate_per_rb(cqi[arc]) for arc in graph.arcs}
        wifi = {}
        for arc in graph.d2d_arcs():
            a, b = nodes[arc.tx - 1], nodes[arc.rx - 1]
            wifi[arc] = wifi_rate(math.hypot(a[0] - b[0], a[1] - b[1]), wifi_steps)
        return cls(lte, wifi)


def load_topology(path, n_users: int) -> np.ndarray:
    """Read ``user_id x y`` lines; every user 1..N must appear exactly once."""
    pos = np.full((n_users, 2), np.nan)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].split()
        if not line:
            continue
        if len(line) != 3:
            raise ValueError(f"{path}:{lineno}: expected 'user_id x y'")
        uid = int(line[0])
        if not 1 <= uid <= n_users:
            raise ValueError(f"{path}:{lineno}: user id {uid} outside 1..{n_users}")
        pos[uid - 1] = float(line[1]), float(line[2])
    node_positions(pos, n_users)
    return pos


def describe_tables() -> str:
    rows = ["cqi snr_threshold_db efficiency bits_per_rb"]
    for k in range(1, 16):
        rows.append(f"{k} {CQI_SNR_THRESHOLDS_DB[k - 1]:.2f} {CQI_EFFICIENCY[k - 1]:.4f} {rate_per_rb(k)}")
    return "\n".join(rows)
