#!/usr/bin/env python3
"""
Petri Net Core – v1.0

Place/Transition nets, synchronized nets and the event-driven firing rule
every other module runs on.

Conventions:
 • identifiers (places, transitions, events) are strings
 • dense indices follow declaration order
 • a marking is a tuple of ints, one entry per place
 • single-server semantics: on event e every enabled transition labelled e
   fires once, simultaneously; if none is enabled the marking is unchanged
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from sync_errors import NetInputError, NetStructureError

Marking = tuple[int, ...]
EventSequence = tuple[str, ...]


def _weights(matrix, m, q, name):
    arr = np.array(matrix, dtype=np.int64, copy=True)
    if arr.size == 0:
        arr = np.zeros((m, q), dtype=np.int64)
    if arr.shape != (m, q):
        raise NetStructureError(f"{name} has shape {arr.shape}, expected ({m}, {q})")
    if (arr < 0).any():
        raise NetStructureError(f"{name} contains negative weights")
    arr.setflags(write=False)
    return arr


def _check_unique(ids, kind):
    seen = set()
    for ident in ids:
        if ident in seen:
            raise NetStructureError(f"duplicate {kind} id {ident!r}")
        seen.add(ident)


# ------------------------------------------------------------
# Place/Transition net
# ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class PlaceTransitionNet:
    """N = (P, T, Pre, Post) with Pre/Post stored as m×q integer matrices."""

    places: tuple[str, ...]
    transitions: tuple[str, ...]
    pre: np.ndarray
    post: np.ndarray

    def __post_init__(self):
        places = tuple(str(p) for p in self.places)
        transitions = tuple(str(t) for t in self.transitions)
        if not places:
            raise NetStructureError("a net needs at least one place")
        _check_unique(places, "place")
        _check_unique(transitions, "transition")
        m, q = len(places), len(transitions)
        pre = _weights(self.pre, m, q, "Pre")
        post = _weights(self.post, m, q, "Post")
        disconnected = [transitions[j] for j in range(q) if not pre[:, j].any() and not post[:, j].any()]
        if disconnected:
            raise NetStructureError(f"transitions without arcs: {', '.join(disconnected)}")
        object.__setattr__(self, "places", places)
        object.__setattr__(self, "transitions", transitions)
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "post", post)

    @classmethod
    def from_arcs(cls, places, transitions, pre, post):
        """Build from `pre`/`post` maps of transition id -> {place id: weight}."""
        places = tuple(places)
        transitions = tuple(transitions)
        p_idx = {p: i for i, p in enumerate(places)}
        matrices = []
        for name, arcs in (("Pre", pre), ("Post", post)):
            mat = np.zeros((len(places), len(transitions)), dtype=np.int64)
            for j, t in enumerate(transitions):
                for p, w in (arcs.get(t) or {}).items():
                    if p not in p_idx:
                        raise NetStructureError(f"{name} arc of {t!r} names unknown place {p!r}")
                    mat[p_idx[p], j] = int(w)
            matrices.append(mat)
        return cls(places, transitions, matrices[0], matrices[1])

    @property
    def m(self):
        return len(self.places)

    @property
    def q(self):
        return len(self.transitions)

    @cached_property
    def place_index(self):
        return {p: i for i, p in enumerate(self.places)}

    @cached_property
    def transition_index(self):
        return {t: j for j, t in enumerate(self.transitions)}

    @cached_property
    def incidence(self):
        c = self.post - self.pre
        c.setflags(write=False)
        return c

    def p_index(self, place):
        try:
            return self.place_index[place]
        except KeyError:
            raise NetInputError(f"unknown place {place!r}") from None

    def t_index(self, transition):
        try:
            return self.transition_index[transition]
        except KeyError:
            raise NetInputError(f"unknown transition {transition!r}") from None

    def input_places(self, transition):
        j = self.t_index(transition)
        return tuple(self.places[i] for i in np.flatnonzero(self.pre[:, j]))

    def output_places(self, transition):
        j = self.t_index(transition)
        return tuple(self.places[i] for i in np.flatnonzero(self.post[:, j]))

    def place_preset(self, place):
        """•p: transitions putting tokens into `place`."""
        i = self.p_index(place)
        return tuple(self.transitions[j] for j in np.flatnonzero(self.post[i, :]))

    def place_postset(self, place):
        """p•: transitions taking tokens from `place`."""
        i = self.p_index(place)
        return tuple(self.transitions[j] for j in np.flatnonzero(self.pre[i, :]))

    def restrict(self, places, transitions):
        """Subnet on the given ids with Pre/Post restricted to them (declaration order kept)."""
        keep_p = set(places)
        keep_t = set(transitions)
        rows = [i for i, p in enumerate(self.places) if p in keep_p]
        cols = [j for j, t in enumerate(self.transitions) if t in keep_t]
        if len(rows) != len(keep_p) or len(cols) != len(keep_t):
            raise NetInputError("restriction names ids that are not in the net")
        return PlaceTransitionNet(
            [self.places[i] for i in rows],
            [self.transitions[j] for j in cols],
            self.pre[np.ix_(rows, cols)],
            self.post[np.ix_(rows, cols)],
        )


# ------------------------------------------------------------
# Synchronized net
# ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class SynchronizedNet:
    """⟨N, E, f⟩: a P/T net whose transitions carry one input event each."""

    net: PlaceTransitionNet
    alphabet: tuple[str, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        alphabet = tuple(str(e) for e in self.alphabet)
        labels = tuple(str(e) for e in self.labels)
        _check_unique(alphabet, "event")
        if len(labels) != self.net.q:
            raise NetStructureError(f"{len(labels)} labels for {self.net.q} transitions")
        unknown = sorted(set(labels) - set(alphabet))
        if unknown:
            raise NetStructureError(f"labels outside the alphabet: {', '.join(unknown)}")
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_labeling(cls, net, alphabet, labeling):
        missing = [t for t in net.transitions if t not in labeling]
        if missing:
            raise NetStructureError(f"unlabelled transitions: {', '.join(missing)}")
        return cls(net, tuple(alphabet), tuple(labeling[t] for t in net.transitions))

    @property
    def places(self):
        return self.net.places

    @property
    def transitions(self):
        return self.net.transitions

    @cached_property
    def labeling(self):
        return dict(zip(self.net.transitions, self.labels))

    @cached_property
    def _masks(self):
        labels = np.array(self.labels, dtype=object)
        masks = {}
        for e in self.alphabet:
            mask = labels == e if labels.size else np.zeros(0, dtype=bool)
            mask = np.asarray(mask, dtype=bool)
            mask.setflags(write=False)
            masks[e] = mask
        return masks

    def event_mask(self, event):
        try:
            return self._masks[event]
        except KeyError:
            raise NetInputError(f"unknown event {event!r}") from None

    def transitions_of(self, event):
        """T_e in declaration order."""
        mask = self.event_mask(event)
        return tuple(t for t, hit in zip(self.net.transitions, mask) if hit)

    def label(self, transition):
        return self.labels[self.net.t_index(transition)]

    def restrict(self, places, transitions):
        sub = self.net.restrict(places, transitions)
        return SynchronizedNet(sub, self.alphabet, tuple(self.label(t) for t in sub.transitions))

    def with_labels(self, changes):
        """Copy with some transitions relabelled; new events are appended to the alphabet."""
        labeling = {**self.labeling, **changes}
        alphabet = list(self.alphabet) + sorted(set(changes.values()) - set(self.alphabet))
        return SynchronizedNet.from_labeling(self.net, alphabet, labeling)


# ------------------------------------------------------------
# Markings
# ------------------------------------------------------------
def _pt(net):
    return net.net if isinstance(net, SynchronizedNet) else net


def _vector(net, marking):
    pt = _pt(net)
    vec = np.asarray(marking, dtype=np.int64)
    if vec.shape != (pt.m,):
        raise NetStructureError(f"marking has {vec.size} entries, net has {pt.m} places")
    if (vec < 0).any():
        raise NetStructureError("marking has negative token counts")
    return vec


def marking_from_mapping(net, mapping):
    """place id -> count map (missing places are 0) to a marking vector."""
    pt = _pt(net)
    counts = [0] * pt.m
    for place, count in mapping.items():
        counts[pt.p_index(place)] = int(count)
    return tuple(_vector(pt, counts).tolist())


def marking_as_mapping(net, marking):
    return dict(zip(_pt(net).places, (int(c) for c in marking)))


def place_marking(net, place, k=1):
    """Marking with `k` tokens in `place` and none elsewhere."""
    return marking_from_mapping(net, {place: k})


def format_marking(marking):
    return "[" + " ".join("?" if c is None else str(c) for c in marking) + "]"


# ------------------------------------------------------------
# Firing rule
# ------------------------------------------------------------
def _enabled_mask(pt, vec):
    return np.all(vec[:, None] >= pt.pre, axis=0)


def enabled_transitions(net, marking):
    """ℰ(M) = { t | M ≥ Pre(·, t) }."""
    pt = _pt(net)
    vec = _vector(pt, marking)
    return frozenset(t for t, on in zip(pt.transitions, _enabled_mask(pt, vec)) if on)


def apply_event(net, marking, event):
    """Fire every enabled transition labelled `event` once, simultaneously."""
    vec = _vector(net, marking)
    fire = _enabled_mask(net.net, vec) & net.event_mask(event)
    if not fire.any():
        return tuple(vec.tolist())
    nxt = vec + net.net.incidence[:, fire].sum(axis=1)
    if (nxt < 0).any():
        raise NetStructureError(
            f"simultaneous firing on {event!r} overdraws a place; the net violates determinism"
        )
    return tuple(nxt.tolist())


def apply_sequence(net, marking, sequence):
    current = tuple(_vector(net, marking).tolist())
    for event in sequence:
        current = apply_event(net, current, event)
    return current


def final_markings(net, markings, sequence):
    """Image of a set of markings under `sequence`."""
    return frozenset(apply_sequence(net, m, sequence) for m in markings)


# ------------------------------------------------------------
# Structural predicates
# ------------------------------------------------------------
@dataclass(frozen=True)
class DeterminismReport:
    violations: tuple[tuple[str, str, str], ...] = ()

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "deterministic"
        return "; ".join(f"{p}: {t} and {u} share a label" for p, t, u in self.violations)


def check_determinism(net):
    """Report every place with two same-labelled output transitions."""
    pt = net.net
    violations = []
    for i, place in enumerate(pt.places):
        outputs = [j for j in np.flatnonzero(pt.pre[i, :])]
        for a, b in combinations(outputs, 2):
            if net.labels[a] == net.labels[b]:
                violations.append((place, pt.transitions[a], pt.transitions[b]))
    return DeterminismReport(tuple(violations))


def require_deterministic(net):
    report = check_determinism(net)
    if not report.ok:
        raise NetStructureError(f"net is not deterministic: {report}")


def is_state_machine(net):
    """Every transition has one input and one output place, both with weight 1."""
    pt = _pt(net)
    for j in range(pt.q):
        pre_col, post_col = pt.pre[:, j], pt.post[:, j]
        if np.count_nonzero(pre_col) != 1 or np.count_nonzero(post_col) != 1:
            return False
        if pre_col.sum() != 1 or post_col.sum() != 1:
            return False
    return True


def require_state_machine(net):
    if not is_state_machine(net):
        raise NetStructureError("operation needs a state machine (|•t| = |t•| = 1, unit weights)")


def sm_arc(net, transition):
    """(input place, output place) of a state-machine transition."""
    pt = _pt(net)
    return pt.input_places(transition)[0], pt.output_places(transition)[0]


def label_sequence(net, sigma):
    """f*(σ): pointwise labelling of a transition sequence."""
    return tuple(net.label(t) for t in sigma)


def token_count(marking):
    return int(sum(marking))
