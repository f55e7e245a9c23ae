#!/usr/bin/env python3
"""
Subnet Sync – v1.0

Synchronizing sequences for bounded nets that contain strongly connected
state-machine subnets N_s,1 … N_s,n plus a remainder (P_z, T_z).

The per-subnet sequences w̄_i are computed on each isolated subnet and
concatenated. The result certifies the marking of every subnet place;
remainder places are reported as unknown (None).

Side conditions checked before concatenation:
 • isolation:  no remainder transition consumes from or produces into a subnet place
 • labels:     no event of w̄_i labels a transition that takes tokens from the
               remainder and belongs to one of the subnets 1..i
"""

from dataclasses import dataclass, field
from itertools import product

import networkx as nx
from loguru import logger

from petri_net import apply_sequence, format_marking, is_state_machine, require_deterministic, sm_arc
from reachability import build_rg, build_rg_from, k_token_markings
from rg_sync import SyncMethod, SyncResult, ss_on_rg
from settings import DEFAULT_NODE_BUDGET, DEFAULT_VERIFY_BUDGET
from sts_sync import find_sts, k_ss_from_sts
from sync_errors import NetInputError, NetStructureError, VerificationError


@dataclass(frozen=True)
class Subnet:
    places: tuple
    transitions: tuple = ()

    def __str__(self):
        return "{" + ",".join(self.places) + "}"


@dataclass(frozen=True)
class SubnetDecomposition:
    """Ordered subnets plus the remainder (P_z, T_z) left over."""

    subnets: tuple
    remainder: Subnet = field(default_factory=lambda: Subnet(()))

    @classmethod
    def infer(cls, net, subnets):
        """Build from (places, transitions) pairs; the remainder is whatever they leave out.

        Places and transitions inside each subnet are put in declaration order,
        which is also the order of each subnet's target vector.
        """
        p_order = {p: i for i, p in enumerate(net.places)}
        t_order = {t: i for i, t in enumerate(net.transitions)}
        subnets = tuple(
            Subnet(
                tuple(sorted(p, key=lambda x: p_order.get(x, len(p_order)))),
                tuple(sorted(t, key=lambda x: t_order.get(x, len(t_order)))),
            )
            for p, t in subnets
        )
        used_p = {p for s in subnets for p in s.places}
        used_t = {t for s in subnets for t in s.transitions}
        remainder = Subnet(
            tuple(p for p in net.places if p not in used_p),
            tuple(t for t in net.transitions if t not in used_t),
        )
        d = cls(subnets, remainder)
        d.validate(net)
        return d

    @property
    def subnet_places(self):
        return tuple(p for s in self.subnets for p in s.places)

    @property
    def subnet_transitions(self):
        return tuple(t for s in self.subnets for t in s.transitions)

    def validate(self, net):
        if not self.subnets:
            raise NetInputError("a decomposition needs at least one subnet")
        for kind, ids, universe in (
            ("place", self.subnet_places + self.remainder.places, net.places),
            ("transition", self.subnet_transitions + self.remainder.transitions, net.transitions),
        ):
            unknown = sorted(set(ids) - set(universe))
            if unknown:
                raise NetInputError(f"decomposition names unknown {kind}s: {', '.join(unknown)}")
            if len(ids) != len(set(ids)):
                raise NetStructureError(f"decomposition {kind} sets overlap")
            if len(ids) != len(universe):
                raise NetStructureError(f"decomposition does not cover every {kind}")
        for i, s in enumerate(self.subnets):
            if not s.places:
                raise NetStructureError(f"subnet {i + 1} has no places")
            sub = net.restrict(s.places, s.transitions)
            if not is_state_machine(sub):
                raise NetStructureError(f"subnet {i + 1} {s} is not a state machine on its own arcs")
            g = nx.MultiDiGraph()
            g.add_nodes_from(sub.places)
            g.add_edges_from(sm_arc(sub, t) for t in sub.transitions)
            if not nx.is_strongly_connected(g):
                raise NetStructureError(f"subnet {i + 1} {s} is not strongly connected")


def subnet_net(net, d, i):
    """Isolated N_s,i: its places and transitions with Pre/Post restricted to them."""
    s = d.subnets[i]
    return net.restrict(s.places, s.transitions)


# ------------------------------------------------------------
# Side conditions
# ------------------------------------------------------------
@dataclass(frozen=True)
class IsolationReport:
    violations: tuple = ()  # (remainder transition, subnet place)

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "isolated"
        return "; ".join(f"{t} touches {p}" for t, p in self.violations)


def check_isolation(net, d):
    inside = set(d.subnet_places)
    violations = []
    for t in d.remainder.transitions:
        touched = net.net.input_places(t) + net.net.output_places(t)
        for p in dict.fromkeys(touched):
            if p in inside:
                violations.append((t, p))
    return IsolationReport(tuple(violations))


@dataclass(frozen=True)
class LabelConditionReport:
    """`violations` reads the condition over subnets 1..i jointly (the verdict);
    `literal_violations` reads it as an intersection of their transition sets."""

    violations: tuple = ()  # (subnet number, event, transition)
    literal_violations: tuple = ()

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        if self.ok:
            return "label condition holds"
        return "; ".join(f"w̄_{i}: {e} labels {t}, fed by the remainder" for i, e, t in self.violations)


def check_label_condition(net, d, per_subnet_ss):
    if len(per_subnet_ss) != len(d.subnets):
        raise NetInputError(f"{len(per_subnet_ss)} sequences for {len(d.subnets)} subnets")
    fed_by_remainder = {t for p in d.remainder.places for t in net.net.place_postset(p)}
    union_reading, literal_reading = [], []
    so_far = set()
    common = None
    for i, (s, word) in enumerate(zip(d.subnets, per_subnet_ss), start=1):
        so_far |= set(s.transitions)
        common = set(s.transitions) if common is None else common & set(s.transitions)
        for e in dict.fromkeys(word):
            for t in net.transitions_of(e):
                if t not in fed_by_remainder:
                    continue
                if t in so_far:
                    union_reading.append((i, e, t))
                if t in common:
                    literal_reading.append((i, e, t))
    return LabelConditionReport(tuple(union_reading), tuple(literal_reading))


# ------------------------------------------------------------
# Concatenation
# ------------------------------------------------------------
def _subnet_ss(sub, target, node_budget, deadline, verify_budget):
    loaded = [p for p, c in zip(sub.places, target) if c]
    if len(loaded) == 1:
        sts = find_sts(sub, loaded[0], deadline=deadline)
        if sts is not None:
            return k_ss_from_sts(sub, sts, sum(target), verify_budget).sequence
    # every distribution of the subnet's tokens, not only those reachable from the target
    require_deterministic(sub)
    rg = build_rg_from(sub, k_token_markings(sub.net.m, sum(target)), node_budget, deadline)
    result = ss_on_rg(sub, rg, target, deadline)
    return None if result is None else result.sequence


def _subnet_starts(subs, certified, places, verify_budget):
    """Joint markings of N_s (in `places` order) with each subnet's token count fixed, truncated at the budget."""
    ranges = [list(k_token_markings(sub.net.m, sum(c))) for sub, c in zip(subs, certified)]
    for n, combo in enumerate(product(*ranges)):
        if n >= verify_budget:
            logger.info(f"🎲 N_s verification truncated at {verify_budget:,} markings")
            return
        counts = {p: c for sub, part in zip(subs, combo) for p, c in zip(sub.places, part)}
        yield tuple(counts[p] for p in places)


def ss_via_subnets(
    net,
    d,
    targets,
    m0=None,
    node_budget=DEFAULT_NODE_BUDGET,
    deadline=None,
    verify_budget=DEFAULT_VERIFY_BUDGET,
):
    """w̄ = w̄_1 … w̄_n, or None when a side condition fails or a subnet has no SS."""
    d.validate(net)
    if len(targets) != len(d.subnets):
        raise NetInputError(f"{len(targets)} targets for {len(d.subnets)} subnets")

    isolation = check_isolation(net, d)
    if not isolation.ok:
        logger.warning(f"⚠️ remainder is not isolated from the subnets: {isolation}")
        return None

    subs = [subnet_net(net, d, i) for i in range(len(d.subnets))]
    targets = [tuple(int(c) for c in t) for t in targets]
    words = []
    for i, (sub, target) in enumerate(zip(subs, targets), start=1):
        if len(target) != sub.net.m:
            raise NetInputError(f"target for subnet {i} has {len(target)} entries, subnet has {sub.net.m} places")
        word = _subnet_ss(sub, target, node_budget, deadline, verify_budget)
        if word is None:
            logger.warning(f"⚠️ subnet {i} {d.subnets[i - 1]} has no SS to {format_marking(target)}")
            return None
        logger.debug(f"🧩 w̄_{i} = {' '.join(word) or 'ε'}")
        words.append(word)

    labels = check_label_condition(net, d, words)
    if labels.literal_violations != labels.violations:
        logger.info(f"ℹ️ label condition readings differ: literal {len(labels.literal_violations)}, joint {len(labels.violations)}")
    if not labels.ok:
        logger.warning(f"⚠️ {labels}")
        return None

    certified = []
    for i, (sub, target) in enumerate(zip(subs, targets)):
        tail = tuple(e for w in words[i + 1:] for e in w)
        certified.append(apply_sequence(sub, target, tail))
    word = tuple(e for w in words for e in w)

    owner = {p: c for sub, marking in zip(subs, certified) for p, c in zip(sub.places, marking)}
    full_target = tuple(owner.get(p) for p in net.places)

    checked = verify_on_subnets(net, d, word, full_target, verify_budget)
    if m0 is not None:
        checked += verify_joint(net, d, m0, word, full_target, node_budget, deadline)

    logger.success(f"✅ subnet SS {' '.join(word) or 'ε'} → {format_marking(full_target)}")
    return SyncResult(word, full_target, SyncMethod.SUBNET, checked, net.places)


def verify_on_subnets(net, d, word, full_target, verify_budget=DEFAULT_VERIFY_BUDGET):
    """Apply `word` to N_s from every marking that keeps each subnet's token count; returns how many were checked."""
    idx = net.net.place_index
    subs = [subnet_net(net, d, i) for i in range(len(d.subnets))]
    certified = [tuple(full_target[idx[p]] for p in s.places) for s in d.subnets]
    n_s = net.restrict(d.subnet_places, d.subnet_transitions)
    expected = tuple(full_target[idx[p]] for p in n_s.places)
    checked = 0
    for start in _subnet_starts(subs, certified, n_s.places, verify_budget):
        reached = apply_sequence(n_s, start, word)
        if reached != expected:
            raise VerificationError(
                f"w̄ takes N_s from {format_marking(start)} to {format_marking(reached)}, not {format_marking(expected)}"
            )
        checked += 1
    return checked


def verify_joint(net, d, m0, word, full_target, node_budget=DEFAULT_NODE_BUDGET, deadline=None):
    """Apply `word` from every marking of R(N, m0); subnet places must end as certified."""
    rg = build_rg(net, m0, node_budget, deadline)
    idx = [net.net.p_index(p) for p in d.subnet_places]
    finals = set()
    for marking in rg.nodes:
        reached = apply_sequence(net, marking, word)
        for i in idx:
            if reached[i] != full_target[i]:
                raise VerificationError(
                    f"from {format_marking(marking)} the net ends at {format_marking(reached)}, "
                    f"outside the certified {format_marking(full_target)}"
                )
        finals.add(reached)
    logger.info(f"🔎 joint check: {len(rg):,} markings, {len(finals)} distinct final markings")
    return len(rg)
