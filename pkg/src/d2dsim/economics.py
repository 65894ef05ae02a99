"""Per-interval energy, delivered data and utility of a connection.

LTE modes charge energy per resource block, WiFi charges a fixed baseline
for both endpoints plus a per-bit cost.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Arc, Mode, NetworkGraph


def _check_nonneg(**values):
    for name, v in values.items():
        if v < 0:
            raise ValueError(f"{name} must be >= 0, got {v}")


def lte_energy(p_tx: float, p_rx: float, rb_count) -> float:
    _check_nonneg(p_tx=p_tx, p_rx=p_rx, rb_count=rb_count)
    return (p_tx + p_rx) * rb_count


def lte_data(rb_count, rate):
    _check_nonneg(rb_count=rb_count, rate=rate)
    return rb_count * rate


def wifi_data(duration: float, rate: float) -> float:
    if duration <= 0:
        raise ValueError(f"interval duration must be > 0, got {duration}")
    _check_nonneg(rate=rate)
    return duration * rate


def wifi_energy(beta: float, p_tx: float, p_rx: float, data) -> float:
    _check_nonneg(beta=beta, p_tx=p_tx, p_rx=p_rx, data=data)
    return 2 * beta + (p_tx + p_rx) * data


def utility(theta, energy: float, alpha: float) -> float:
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    return theta - alpha * energy


@dataclass(frozen=True)
class LinkEconomics:
    rb_count: float
    theta: float
    energy: float
    utility: float


def evaluate(mode: int, rb_count, rate, cfg) -> LinkEconomics:
    """Economics of one connection over an interval.

    ``rb_count`` is ignored for WiFi, whose data volume depends only on the
    interval length and the pair's rate.
    """
    mode = Mode(mode)
    if mode == Mode.OUTBAND:
        theta = wifi_data(cfg.interval_duration_T, rate)
        energy = wifi_energy(cfg.beta_wifi, cfg.p_tx(mode), cfg.p_rx(mode), theta)
        rb_count = 0
    else:
        theta = lte_data(rb_count, rate)
        energy = lte_energy(cfg.p_tx(mode), cfg.p_rx(mode), rb_count)
    return LinkEconomics(rb_count, theta, energy, utility(theta, energy, cfg.alpha))


def predicted_rbs(mode: int, n_cellular: int, cfg) -> float:
    """RBs a connection is expected to receive before scheduling has run.

    Cellular connections get a fair share of the subframes; D2D underlay and
    overlay transmit in every subframe on the shared and overlay pools.
    """
    subframes = cfg.subframes_per_interval
    mode = Mode(mode)
    if mode == Mode.CELLULAR:
        return subframes / max(n_cellular, 1) * cfg.rb_per_subframe
    if mode == Mode.UNDERLAY:
        return subframes * cfg.rb_per_subframe
    if mode == Mode.OVERLAY:
        return subframes * cfg.overlay_rb_pool
    return 0


def predict_utilities(graph: NetworkGraph, rates, cfg) -> dict[tuple[int, int, int], float]:
    """Predicted utility of every usable (tx, rx, mode) on the graph.

    Combinations whose rate is zero are unusable and left out.
    """
    n_cellular = sum(1 for arc in graph.enb_arcs() if rates.rate(arc, Mode.CELLULAR) > 0)
    out = {}
    for arc in graph.arcs:
        modes = (Mode.CELLULAR,) if arc.rx == graph.enb else (Mode.UNDERLAY, Mode.OVERLAY, Mode.OUTBAND)
        for mode in modes:
            rate = rates.rate(arc, mode)
            if rate <= 0:
                continue
            econ = evaluate(mode, predicted_rbs(mode, n_cellular, cfg), rate, cfg)
            out[(arc.tx, arc.rx, int(mode))] = econ.utility
    return out


def connection_key(arc: Arc, mode: int) -> tuple[int, int, int]:
    return (arc.tx, arc.rx, int(mode))
