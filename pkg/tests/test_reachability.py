import math

import numpy as np
import pytest

from conftest import state_machine
from genbench import GenParams, random_sm
from petri_net import PlaceTransitionNet, SynchronizedNet, apply_event, place_marking
from reachability import (
    build_rg,
    build_rg_from,
    complete_rg,
    count_reachable_sm,
    k_token_markings,
    rg_to_edge_list,
    rg_to_networkx,
)
from sync_errors import BoundednessError, NetInputError, SearchTimeoutError


def test_weighted_net_reachability(weighted_net):
    rg = build_rg(weighted_net, (2, 0, 0))
    assert set(rg.nodes) == {(2, 0, 0), (0, 1, 0), (1, 0, 1)}
    assert rg.nodes[rg.initial] == (2, 0, 0)
    for s, e, t in rg.edges:
        assert rg.nodes[t] == apply_event(weighted_net, rg.nodes[s], e)


def test_completion_adds_self_loops(weighted_net):
    rg = complete_rg(build_rg(weighted_net, (2, 0, 0)))
    start = rg.node_of((2, 0, 0))
    assert rg.successors[(start, "e2")] == start
    assert len(rg.edges) == len(rg.nodes) * len(weighted_net.alphabet)
    assert complete_rg(rg) is rg


def test_loop_sm_single_token(loop_sm):
    rg = complete_rg(build_rg(loop_sm, (1, 0, 0, 0)))
    assert len(rg) == 4
    p4 = rg.node_of((0, 0, 0, 1))
    loops = {e for s, e, t in rg.edges if s == p4 and t == p4}
    assert loops == {"e1", "e2", "e4", "e5"}
    out_degree = {}
    for s, _, _ in rg.edges:
        out_degree[s] = out_degree.get(s, 0) + 1
    assert set(out_degree.values()) == {5}


def test_net_without_transitions():
    net = SynchronizedNet(PlaceTransitionNet(["p1"], [], [], []), ("e1",), ())
    rg = build_rg(net, (3,))
    assert len(rg) == 1 and rg.edges == ()


def test_unbounded_net_hits_budget():
    # t1 puts a token back and adds one more
    net = SynchronizedNet(PlaceTransitionNet(["p1"], ["t1"], [[1]], [[2]]), ("e1",), ("e1",))
    with pytest.raises(BoundednessError):
        build_rg(net, (1,), node_budget=50)


def test_deadline_in_the_past(loop_sm):
    with pytest.raises(SearchTimeoutError):
        build_rg(loop_sm, (1, 0, 0, 0), deadline=0.0)


def test_count_reachable_sm():
    assert count_reachable_sm(4, 1) == 4
    assert count_reachable_sm(4, 2) == 10
    assert count_reachable_sm(7, 0) == 1
    with pytest.raises(ValueError):
        count_reachable_sm(0, 1)
    with pytest.raises(OverflowError):
        count_reachable_sm(200, 200)


def test_k_token_markings(loop_sm):
    two = list(k_token_markings(4, 2))
    assert len(two) == 10 == len(set(two))
    assert all(sum(m) == 2 for m in two)
    assert len(build_rg(loop_sm, (0, 0, 0, 2))) == 10


def _interleaving_closure(net, m0):
    """Markings reached by firing one enabled transition at a time."""
    pt = net.net
    seen, frontier = {tuple(m0)}, [tuple(m0)]
    while frontier:
        vec = np.asarray(frontier.pop())
        for j in np.flatnonzero(np.all(vec[:, None] >= pt.pre, axis=0)):
            nxt = tuple((vec + pt.incidence[:, j]).tolist())
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


@pytest.mark.parametrize("m", [2, 3, 4, 5])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_reachable_count_on_generated_sms(m, k):
    net = random_sm(GenParams(m, m + 3, seed=100 * m + k))
    expected = count_reachable_sm(m, k)
    assert expected == math.comb(m + k - 1, m - 1)
    assert len(build_rg_from(net, k_token_markings(m, k))) == expected
    start = place_marking(net, net.places[0], k)
    assert len(_interleaving_closure(net, start)) == expected
    assert len(build_rg(net, start)) <= expected


def test_simultaneous_firing_can_shrink_the_reachability_set():
    net = state_machine(["p1", "p2"], [("t1", "p1", "p2", "e"), ("t2", "p2", "p1", "e")], ["e"])
    assert set(build_rg(net, (2, 0)).nodes) == {(2, 0), (1, 1)}
    assert len(_interleaving_closure(net, (2, 0))) == count_reachable_sm(2, 2) == 3
    assert len(build_rg_from(net, k_token_markings(2, 2))) == 3


def test_multi_start_closure(loop_sm):
    rg = build_rg_from(loop_sm, k_token_markings(4, 1))
    assert len(rg) == 4
    assert rg.nodes[0] == (1, 0, 0, 0)
    with pytest.raises(NetInputError):
        build_rg_from(loop_sm, [])


def test_exports(weighted_net):
    rg = complete_rg(build_rg(weighted_net, (2, 0, 0)))
    g = rg_to_networkx(rg)
    assert g.number_of_nodes() == 3
    assert g.number_of_edges() == 6
    assert g.nodes[0]["marking"] == (2, 0, 0)
    text = rg_to_edge_list(rg)
    assert text.startswith("# nodes 3 complete=true initial=0")
    assert "# 0 [2 0 0]" in text
    assert len([ln for ln in text.splitlines() if not ln.startswith("#")]) == 6


def test_node_of_unknown(weighted_net):
    rg = build_rg(weighted_net, (2, 0, 0))
    with pytest.raises(NetInputError):
        rg.node_of((9, 9, 9))
