import numpy as np
import pytest

from conftest import build_net, state_machine
from petri_net import (
    PlaceTransitionNet,
    apply_event,
    apply_sequence,
    check_determinism,
    enabled_transitions,
    final_markings,
    is_state_machine,
    label_sequence,
    marking_as_mapping,
    marking_from_mapping,
    place_marking,
    require_deterministic,
    token_count,
)
from sync_errors import NetInputError, NetStructureError


def test_enabled_transitions_weighted(weighted_net):
    assert enabled_transitions(weighted_net, (2, 0, 1)) == {"t1", "t3"}


def test_enabled_transitions_loop(loop_sm):
    assert enabled_transitions(loop_sm, (1, 0, 0, 0)) == {"t1"}
    assert enabled_transitions(loop_sm, (0, 0, 0, 0)) == frozenset()


def test_simultaneous_firing(weighted_net):
    after = apply_event(weighted_net, (2, 0, 1), "e1")
    assert after == (1, 1, 0)
    # independent firings are not what the event produces
    assert after not in {(0, 1, 1), (3, 0, 0)}


def test_non_receptive_event_is_identity(loop_sm, weighted_net):
    assert apply_event(loop_sm, (0, 0, 0, 1), "e1") == (0, 0, 0, 1)
    assert apply_event(weighted_net, (2, 0, 0), "e2") == (2, 0, 0)


def test_loop_firings(loop_sm):
    assert apply_event(loop_sm, (0, 1, 0, 0), "e2") == (0, 0, 1, 0)
    assert apply_sequence(loop_sm, (1, 0, 0, 0), ("e1", "e2", "e5", "e4")) == (0, 0, 0, 1)
    assert apply_sequence(loop_sm, (0, 0, 1, 0), ("e1", "e2", "e5", "e4")) == (0, 0, 0, 1)
    assert apply_sequence(loop_sm, (0, 2, 1, 0), ()) == (0, 2, 1, 0)


def test_single_server_ignores_enabling_degree(loop_sm):
    assert apply_event(loop_sm, (3, 0, 0, 0), "e1") == (2, 1, 0, 0)


def test_unknown_event_and_bad_marking(loop_sm):
    with pytest.raises(NetInputError):
        apply_event(loop_sm, (1, 0, 0, 0), "nope")
    with pytest.raises(NetStructureError):
        apply_event(loop_sm, (1, 0, 0), "e1")
    with pytest.raises(NetStructureError):
        enabled_transitions(loop_sm, (1, 0, -1, 0))


def test_state_machine_conserves_tokens(loop_sm):
    rng = np.random.default_rng(7)
    marking = (2, 1, 0, 1)
    for _ in range(200):
        event = loop_sm.alphabet[int(rng.integers(len(loop_sm.alphabet)))]
        nxt = apply_event(loop_sm, marking, event)
        assert token_count(nxt) == token_count(marking)
        assert apply_event(loop_sm, marking, event) == nxt
        marking = nxt


def test_determinism_reports(loop_sm, loop_sm_relabeled):
    assert check_determinism(loop_sm).ok
    assert check_determinism(loop_sm_relabeled).ok
    bad = loop_sm.with_labels({"t4": "e2"})
    report = check_determinism(bad)
    assert report.violations == (("p2", "t2", "t4"),)
    with pytest.raises(NetStructureError):
        require_deterministic(bad)


def test_is_state_machine(loop_sm, weighted_net):
    assert is_state_machine(loop_sm)
    assert not is_state_machine(weighted_net)
    lone = PlaceTransitionNet(["p1"], [], np.zeros((1, 0)), np.zeros((1, 0)))
    assert is_state_machine(lone)


def test_label_sequence(loop_sm):
    assert label_sequence(loop_sm, ["t1", "t2", "t5", "t4"]) == ("e1", "e2", "e5", "e4")
    assert label_sequence(loop_sm, []) == ()
    assert label_sequence(loop_sm, ["t4"]) == ("e4",)
    with pytest.raises(NetInputError):
        label_sequence(loop_sm, ["t9"])


def test_net_validation():
    with pytest.raises(NetStructureError):
        PlaceTransitionNet([], [], [], [])
    with pytest.raises(NetStructureError):
        PlaceTransitionNet(["p1", "p1"], [], [], [])
    with pytest.raises(NetStructureError):
        PlaceTransitionNet(["p1"], ["t1"], [[0]], [[0]])
    with pytest.raises(NetStructureError):
        PlaceTransitionNet(["p1"], ["t1"], [[1, 0]], [[1]])
    with pytest.raises(NetStructureError):
        state_machine(["p1"], [("t1", "p1", "p1", "e9")], ["e1"])


def test_pre_post_are_read_only(loop_sm):
    with pytest.raises(ValueError):
        loop_sm.net.pre[0, 0] = 5


def test_marking_mappings(loop_sm):
    m = marking_from_mapping(loop_sm, {"p2": 1, "p4": 3})
    assert m == (0, 1, 0, 3)
    assert marking_as_mapping(loop_sm, m) == {"p1": 0, "p2": 1, "p3": 0, "p4": 3}
    assert place_marking(loop_sm, "p3", 2) == (0, 0, 2, 0)
    with pytest.raises(NetInputError):
        place_marking(loop_sm, "p9")


def test_final_markings(loop_sm):
    singles = [place_marking(loop_sm, p) for p in loop_sm.places]
    assert final_markings(loop_sm, singles, ("e1", "e2", "e5", "e4")) == {(0, 0, 0, 1)}
    assert len(final_markings(loop_sm, singles, ())) == 4


def test_restrict_keeps_declaration_order(weighted_net):
    sub = weighted_net.restrict(["p3", "p1"], ["t3"])
    assert sub.places == ("p1", "p3")
    assert sub.labels == ("e1",)
    assert sub.net.pre.tolist() == [[0], [1]]
    with pytest.raises(NetInputError):
        weighted_net.restrict(["p1", "p9"], [])


def test_overdraw_is_reported():
    # two same-labelled outputs of p1 would both fire on one token
    net = build_net(["p1", "p2"], [("a", "e", {"p1": 1}, {"p2": 1}), ("b", "e", {"p1": 1}, {"p2": 1})], ["e"])
    assert not check_determinism(net).ok
    with pytest.raises(NetStructureError):
        apply_event(net, (1, 0), "e")
