#!/usr/bin/env python3
"""
RG Sync – v1.0

Synchronizing sequences for bounded synchronized nets through the completed
reachability graph: the initial uncertainty is the whole reachability set
R(N, M0), and the greedy pair-graph algorithm runs on the completed graph.
"""

from dataclasses import dataclass
from enum import Enum

from loguru import logger

from automata_sync import automaton_from_rg, build_auxiliary, greedy_ss
from petri_net import apply_sequence, format_marking, require_deterministic
from reachability import build_rg, complete_rg
from settings import DEFAULT_NODE_BUDGET
from sync_errors import NetInputError, VerificationError


class SyncMethod(str, Enum):
    RG = "RG"
    STS = "STS"
    CONDENSED = "condensed"
    SUBNET = "subnet"


@dataclass(frozen=True)
class SyncResult:
    """A certified synchronizing sequence.

    `target` holds None for places whose final marking is not certified
    (remainder places of a subnet decomposition).
    """

    sequence: tuple
    target: tuple
    method: SyncMethod
    verified_from: int
    places: tuple = ()

    @property
    def length(self):
        return len(self.sequence)

    def as_dict(self):
        return {
            "sequence": list(self.sequence),
            "target": dict(zip(self.places, self.target)) if self.places else list(self.target),
            "method": self.method.value,
            "verified_from": self.verified_from,
        }

    def __str__(self):
        return f"{' '.join(self.sequence) or 'ε'} → {format_marking(self.target)} ({self.method.value})"


def verify_from(net, markings, sequence, target):
    """Simulate `sequence` from each marking; every run must end at `target`."""
    count = 0
    for marking in markings:
        reached = apply_sequence(net, marking, sequence)
        if reached != tuple(target):
            raise VerificationError(
                f"sequence {' '.join(sequence)} takes {format_marking(marking)} to "
                f"{format_marking(reached)}, not {format_marking(target)}"
            )
        count += 1
    return count


def ss_via_rg(net, m0, target, node_budget=DEFAULT_NODE_BUDGET, deadline=None):
    """SS to `target` from every marking reachable from `m0`, or None when none exists."""
    require_deterministic(net)
    logger.info(f"📐 Building reachability graph from {format_marking(m0)} …")
    return ss_on_rg(net, build_rg(net, m0, node_budget, deadline), target, deadline)


def ss_on_rg(net, rg, target, deadline=None):
    """Greedy SS over an already built reachability graph."""
    rg = complete_rg(rg)
    target = tuple(int(c) for c in target)
    if target not in rg.index:
        raise NetInputError(f"target {format_marking(target)} is not reachable from {format_marking(rg.nodes[rg.initial])}")
    automaton = automaton_from_rg(rg)
    aux = build_auxiliary(automaton)
    logger.info(f"🔗 Auxiliary graph: {aux.n_nodes:,} pair nodes over {len(rg):,} markings")
    word = greedy_ss(automaton, aux, rg.index[target], deadline)
    if word is None:
        logger.warning(f"🚫 No synchronizing sequence to {format_marking(target)} exists over R(N, M0)")
        return None
    checked = verify_from(net, rg.nodes, word, target)
    return SyncResult(tuple(word), target, SyncMethod.RG, checked, net.places)
