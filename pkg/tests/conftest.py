from pathlib import Path

import pytest

from petri_net import PlaceTransitionNet, SynchronizedNet

EXAMPLES = Path(__file__).resolve().parents[1] / "data" / "example_inputs"


def build_net(places, transitions, alphabet):
    """transitions: (id, label, {place: weight} pre, {place: weight} post)."""
    ids = [t for t, _, _, _ in transitions]
    pre = {t: a for t, _, a, _ in transitions}
    post = {t: b for t, _, _, b in transitions}
    labels = {t: e for t, e, _, _ in transitions}
    return SynchronizedNet.from_labeling(PlaceTransitionNet.from_arcs(places, ids, pre, post), alphabet, labels)


def state_machine(places, arcs, alphabet):
    """arcs: (id, source place, target place, label)."""
    return build_net(places, [(t, e, {s: 1}, {d: 1}) for t, s, d, e in arcs], alphabet)


LOOP_ARCS = [
    ("t1", "p1", "p2", "e1"),
    ("t2", "p2", "p3", "e2"),
    ("t3", "p4", "p1", "e3"),
    ("t4", "p2", "p4", "e4"),
    ("t5", "p3", "p2", "e5"),
    ("t6", "p3", "p1", "e3"),
]

COMPONENT_ARCS = [
    ("t1", "p1", "p2", "e1"),
    ("t2", "p2", "p3", "e1"),
    ("t3", "p3", "p2", "e2"),
    ("t4", "p3", "p4", "e3"),
    ("t6", "p2", "p5", "e3"),
    ("t7", "p5", "p6", "e1"),
    ("t8", "p6", "p5", "e2"),
]


@pytest.fixture
def loop_sm():
    """Strongly connected 4-place SM; e1 e2 e5 e4 synchronizes on p4."""
    return state_machine(["p1", "p2", "p3", "p4"], LOOP_ARCS, ["e1", "e2", "e3", "e4", "e5"])


@pytest.fixture
def loop_sm_relabeled(loop_sm):
    """Same SM with t5 sharing t2's event: no STS to p1, but e4 e3 works."""
    return loop_sm.with_labels({"t5": "e2"})


@pytest.fixture
def weighted_net():
    """Non-SM with Pre(p1, t1) = 2; reachable from [2 0 0]: [2 0 0], [0 1 0], [1 0 1]."""
    return build_net(
        ["p1", "p2", "p3"],
        [
            ("t1", "e1", {"p1": 2}, {"p2": 1}),
            ("t2", "e2", {"p2": 1}, {"p1": 1, "p3": 1}),
            ("t3", "e1", {"p3": 1}, {"p1": 1}),
        ],
        ["e1", "e2"],
    )


@pytest.fixture
def two_ergodic_sm():
    """Transient {p1}, {p2,p3}, {p4}; ergodic {p5,p6}, {p7}."""
    arcs = COMPONENT_ARCS[:4] + [("t5", "p4", "p7", "e1")] + COMPONENT_ARCS[4:]
    return state_machine([f"p{i}" for i in range(1, 8)], arcs, ["e1", "e2", "e3"])


@pytest.fixture
def single_ergodic_sm():
    """Transient {p1}, {p2,p3}, {p4}; the only ergodic component is {p5,p6}."""
    arcs = COMPONENT_ARCS[:4] + [("t5", "p4", "p5", "e1")] + COMPONENT_ARCS[4:]
    return state_machine([f"p{i}" for i in range(1, 7)], arcs, ["e1", "e2", "e3"])


MONITORED = [
    ("t1", "e2", {"p1": 1, "p5": 1}, {"p2": 1, "p6": 1}),
    ("t2", "e1", {"p2": 1}, {"p1": 1}),
    ("t3", "e3", {"p3": 1, "p6": 1}, {"p4": 1, "p5": 1}),
    ("t4", "e1", {"p4": 1}, {"p3": 1}),
]


@pytest.fixture
def monitored_net():
    """Two 2-place toggles sharing a monitor pair p5/p6 that no remainder transition touches."""
    return build_net([f"p{i}" for i in range(1, 7)], MONITORED, ["e1", "e2", "e3"])


@pytest.fixture
def monitored_subnets():
    return [(("p1", "p2"), ("t1", "t2")), (("p3", "p4"), ("t3", "t4"))]

