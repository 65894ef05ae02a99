import pytest
from hypothesis import given
from hypothesis import strategies as st

from d2dsim.config import SimConfig
from d2dsim.economics import (evaluate, lte_data, lte_energy, predict_utilities, predicted_rbs,
                              utility, wifi_data, wifi_energy)
from d2dsim.model import Arc, Mode, build_graph
from d2dsim.radio import RateTable

nonneg = st.floats(0, 1e6, allow_nan=False)


def test_lte_energy():
    assert lte_energy(5.0, 7.0, 0) == 0
    assert lte_energy(2e-3, 1e-3, 10) == pytest.approx(3e-2, rel=1e-12)
    assert lte_energy(0, 0, 100) == 0
    with pytest.raises(ValueError):
        lte_energy(-1e-3, 0, 1)


def test_lte_data():
    assert lte_data(0, 933) == 0
    assert lte_data(100, 933) == 93300
    assert isinstance(lte_data(100, 933), int)
    assert lte_data(17, 0) == 0


def test_wifi_data():
    assert wifi_data(2.0, 0) == 0
    assert wifi_data(2.0, 54e6) == 1.08e8
    assert wifi_data(4.0, 54e6) == 2 * wifi_data(2.0, 54e6)
    with pytest.raises(ValueError):
        wifi_data(0.0, 1.0)


def test_wifi_energy():
    assert wifi_energy(0.3, 1e-8, 1e-8, 0) == 0.6
    assert wifi_energy(0.05, 1e-8, 1e-8, 1.08e8) == pytest.approx(2.26, rel=1e-12)
    assert wifi_energy(0, 0, 0, 12345) == 0


def test_utility():
    assert utility(93300, 3e-2, 0) == 93300
    assert utility(93300, 3e-2, 1e5) == pytest.approx(90300, rel=1e-12)
    assert utility(0, 1.0, 2.0) < 0
    with pytest.raises(ValueError):
        utility(1, 1, -0.1)


@given(nonneg, st.floats(0.001, 1e3), nonneg, nonneg)
def test_utility_non_increasing_in_alpha(theta, energy, a1, a2):
    lo, hi = sorted((a1, a2))
    assert utility(theta, energy, hi) <= utility(theta, energy, lo)
    assert utility(theta, 0.0, hi) == utility(theta, 0.0, lo)


@given(st.floats(0, 1), st.floats(0, 1), st.integers(0, 10**6), st.integers(1, 50))
def test_homogeneity(p_tx, p_rx, rbs, k):
    assert lte_energy(p_tx, p_rx, k * rbs) == pytest.approx(k * lte_energy(p_tx, p_rx, rbs), rel=1e-12)
    assert lte_data(k * rbs, 933) == k * lte_data(rbs, 933)
    assert wifi_data(k * 2.0, 6e6) == pytest.approx(k * wifi_data(2.0, 6e6), rel=1e-12)


def test_evaluate_modes():
    cfg = SimConfig(alpha=1e5, p_tx_1=2e-3, p_rx_1=1e-3, beta_wifi=0.05, p_tx_3=1e-8, p_rx_3=1e-8)
    e = evaluate(Mode.UNDERLAY, 10, 933, cfg)
    assert e.theta == 9330 and e.energy == pytest.approx(3e-2, rel=1e-12)
    assert e.utility == pytest.approx(9330 - 3000, rel=1e-12)
    w = evaluate(Mode.OUTBAND, 999, 54e6, cfg)
    assert w.rb_count == 0 and w.theta == 1.08e8
    assert w.energy == pytest.approx(2.26, rel=1e-12)


def test_predicted_rbs():
    cfg = SimConfig()
    assert predicted_rbs(Mode.CELLULAR, 4, cfg) == 2000 / 4 * 100
    assert predicted_rbs(Mode.CELLULAR, 0, cfg) == 2000 * 100
    assert predicted_rbs(Mode.UNDERLAY, 4, cfg) == 2000 * 100
    assert predicted_rbs(Mode.OVERLAY, 4, cfg) == 2000 * cfg.overlay_rb_pool
    assert predicted_rbs(Mode.OUTBAND, 4, cfg) == 0


def test_predict_utilities_skips_unusable():
    graph = build_graph([2, 1, 4])
    rates = RateTable({Arc(1, 2): 933, Arc(1, 4): 0, Arc(2, 4): 500, Arc(3, 4): 100},
                      {Arc(1, 2): 0.0})
    u = predict_utilities(graph, rates, SimConfig(alpha=0.0))
    assert set(u) == {(1, 2, 1), (1, 2, 2), (2, 4, 0), (3, 4, 0)}
    # two usable cellular arcs share the subframes
    assert u[(2, 4, 0)] == 1000 * 100 * 500
    assert u[(1, 2, 1)] == 2000 * 100 * 933
