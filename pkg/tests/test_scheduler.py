import numpy as np
import pytest

from d2dsim.config import SimConfig
from d2dsim.model import Arc
from d2dsim.radio import RateTable
from d2dsim.scheduler import (PfState, RbPools, accumulate_interval, schedule_frame,
                              schedule_interval)
from d2dsim.selector import ModeAssignment, SelectionProblem


def assignment(*chosen):
    return ModeAssignment(tuple(sorted(chosen)), 0.0)


def pf_oracle(rates, subframes, ewma=0.01, floor=1.0):
    """Plain re-statement of the PF recursion: argmax rate/avg, lowest index on ties."""
    avg = [floor] * len(rates)
    picks = []
    for _ in range(subframes):
        metrics = [r / a for r, a in zip(rates, avg)]
        k = metrics.index(max(metrics))
        picks.append(k)
        avg = [(1 - ewma) * a + ewma * (rates[j] if j == k else 0.0) for j, a in enumerate(avg)]
    return picks


def test_single_cellular_connection_gets_every_subframe():
    a = assignment((1, 3, 0))
    rates = RateTable({Arc(1, 3): 500}, {})
    frame = schedule_frame(a, rates, PfState())
    assert [sf.cellular for sf in frame.subframes] == [Arc(1, 3)] * 10
    assert sum(sf.rbs[Arc(1, 3)] for sf in frame.subframes) == 10 * 100


def test_two_equal_cellular_connections_alternate():
    a = assignment((1, 3, 0), (2, 3, 0))
    rates = RateTable({Arc(1, 3): 500, Arc(2, 3): 500}, {})
    frame = schedule_frame(a, rates, PfState())
    served = [sf.cellular for sf in frame.subframes]
    expected = [[Arc(1, 3), Arc(2, 3)][k] for k in pf_oracle([500 * 100, 500 * 100], 10)]
    assert served == expected
    assert served.count(Arc(1, 3)) == 5 and served.count(Arc(2, 3)) == 5
    assert served[0] == Arc(1, 3)


@pytest.mark.parametrize("rates", [[500, 300], [933, 25, 400], [100, 100, 100]])
def test_pf_matches_oracle_over_many_frames(rates):
    n = len(rates)
    enb = n + 1
    a = assignment(*[(k, enb, 0) for k in range(1, n + 1)])
    table = RateTable({Arc(k, enb): r for k, r in enumerate(rates, start=1)}, {})
    pf = PfState()
    served = []
    for _ in range(30):
        served += [sf.cellular.tx - 1 for sf in schedule_frame(a, table, pf).subframes]
    assert served == pf_oracle([r * 100 for r in rates], 300)


def test_overlay_pool_release():
    assert RbPools.for_modes([0, 1, 3], 100, 20) == RbPools(100, 0)
    assert RbPools.for_modes([0, 2], 100, 20) == RbPools(80, 20)
    rates = RateTable({Arc(1, 2): 900, Arc(3, 5): 400, Arc(1, 5): 1}, {})
    without = schedule_frame(assignment((1, 2, 1), (3, 5, 0)), rates, PfState(), 100, 20)
    assert without.pools.shared == 100
    assert all(sf.rbs[Arc(1, 2)] == 100 and sf.rbs[Arc(3, 5)] == 100 for sf in without.subframes)
    with_overlay = schedule_frame(assignment((1, 2, 2), (3, 5, 0)), rates, PfState(), 100, 20)
    assert with_overlay.pools == RbPools(80, 20)
    assert all(sf.rbs[Arc(1, 2)] == 20 and sf.rbs[Arc(3, 5)] == 80 for sf in with_overlay.subframes)


def test_wifi_connections_carry_no_rbs():
    rates = RateTable({}, {Arc(1, 2): 54e6})
    frame = schedule_frame(assignment((1, 2, 3)), rates, PfState())
    assert all(sf.rbs[Arc(1, 2)] == 0 and sf.cellular is None for sf in frame.subframes)


def test_rejects_infeasible_assignment():
    rates = RateTable({Arc(1, 2): 900, Arc(2, 3): 400}, {})
    with pytest.raises(ValueError):
        schedule_frame(assignment((1, 2, 1), (2, 3, 0)), rates, PfState())
    table = np.zeros((3, 3))
    table[0, 2] = 1.0
    p = SelectionProblem(2, {(1, 2, 1): 1.0}, table, 0.5)
    with pytest.raises(ValueError, match="C3"):
        schedule_frame(assignment((1, 2, 1)), rates, PfState(), problem=p)


def test_accumulate_interval():
    cfg = SimConfig(alpha=0.0)
    rates = RateTable({Arc(1, 2): 933, Arc(3, 5): 400, Arc(4, 5): 400}, {})
    a = assignment((1, 2, 1), (3, 5, 0), (4, 5, 0))
    frames = schedule_interval(a, rates, PfState(), cfg)
    reports = {(r.tx, r.rx): r for r in accumulate_interval(frames, a, rates, cfg)}
    d2d = reports[(1, 2)]
    assert d2d.rb_count == 2000 * 100
    assert d2d.theta == 2000 * 100 * 933
    assert reports[(3, 5)].subframes + reports[(4, 5)].subframes == 2000
    assert abs(reports[(3, 5)].subframes - reports[(4, 5)].subframes) <= 1


def test_accumulate_zero_subframes():
    cfg = SimConfig()
    a = assignment((1, 3, 0))
    rates = RateTable({Arc(1, 3): 400}, {})
    r = accumulate_interval([], a, rates, cfg)[0]
    assert (r.rb_count, r.theta, r.energy) == (0, 0, 0)


def test_accumulate_wifi_uses_interval_length():
    cfg = SimConfig(beta_wifi=0.05, p_tx_3=1e-8, p_rx_3=1e-8)
    a = assignment((1, 2, 3))
    rates = RateTable({}, {Arc(1, 2): 54e6})
    r = accumulate_interval([], a, rates, cfg)[0]
    assert r.theta == 1.08e8 and r.energy == pytest.approx(2.26, rel=1e-12)


def test_pf_state_persists_for_survivors():
    cfg = SimConfig(frames_per_interval=3)
    rates = RateTable({Arc(1, 4): 400, Arc(2, 4): 400}, {})
    pf = PfState()
    schedule_interval(assignment((1, 4, 0), (2, 4, 0)), rates, pf, cfg)
    kept = pf.average[Arc(1, 4)]
    schedule_interval(assignment((1, 4, 0)), rates, pf, cfg)
    assert Arc(2, 4) not in pf.average
    assert pf.average[Arc(1, 4)] != kept
    pf.retain([])
    assert pf.get(Arc(1, 4)) == pf.floor
