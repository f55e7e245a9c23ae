#!/usr/bin/env python3
"""
STS Sync – v1.0

Structural synchronizing sequences for strongly connected state machines.

A synchronizing transition sequence (STS) comes from a directed path that
covers every place and ends at the target place p̄, where
 • C1: no transition leaving a covered place outside the path shares a
       label with a transition on the path
 • C2: a transition re-entering an already visited place shares no label
       with any earlier transition of the path
Its label word is a 1-SS; repeated k times it synchronizes k tokens.

The path is searched backward from p̄. Depth-first (longest open path
first) is the default, breadth-first returns a shortest STS.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np
from loguru import logger

from petri_net import label_sequence, place_marking, require_state_machine, sm_arc
from reachability import count_reachable_sm, k_token_markings
from rg_sync import SyncMethod, SyncResult, verify_from
from settings import DEFAULT_VERIFY_BUDGET, expired
from sync_errors import NetStructureError, SearchTimeoutError


class SearchMode(str, Enum):
    DEPTH_FIRST = "depth-first"
    BREADTH_FIRST = "breadth-first"


# ------------------------------------------------------------
# Paths
# ------------------------------------------------------------
@dataclass(frozen=True)
class DirectedPath:
    """Alternating ids p'0 t'1 p'1 … t'r p'r."""

    items: tuple

    def __post_init__(self):
        if len(self.items) % 2 != 1:
            raise NetStructureError("a directed path alternates places and transitions and ends on a place")

    @property
    def places(self):
        return self.items[0::2]

    @property
    def transitions(self):
        return self.items[1::2]

    @property
    def start(self):
        return self.items[0]

    @property
    def end(self):
        return self.items[-1]

    @property
    def elementary(self):
        return len(set(self.places)) == len(self.places)

    def __len__(self):
        return len(self.transitions)

    def check(self, net):
        """Each t'j must consume from p'(j−1) and produce into p'j."""
        for j, t in enumerate(self.transitions):
            src, dst = self.places[j], self.places[j + 1]
            if src not in net.net.input_places(t) or dst not in net.net.output_places(t):
                raise NetStructureError(f"{t} does not connect {src} to {dst}")

    def __str__(self):
        return " ".join(self.items)


@dataclass(frozen=True)
class SynchronizingTransitionSequence:
    path: DirectedPath

    @property
    def sigma(self):
        return self.path.transitions

    @property
    def target(self):
        return self.path.end

    @property
    def covered(self):
        return frozenset(self.path.places)


def satisfies_c1(net, path, covered=None):
    """No transition leaving `covered` outside σ shares a label with σ."""
    covered = frozenset(path.places) if covered is None else frozenset(covered)
    sigma = set(path.transitions)
    sigma_labels = {net.label(t) for t in sigma}
    for place in covered:
        for t in net.net.place_postset(place):
            if t not in sigma and net.label(t) in sigma_labels:
                return False
    return True


def satisfies_c2(net, path):
    """The transition re-entering a repeated place carries a label unused earlier on the path."""
    labels = [net.label(t) for t in path.transitions]
    seen = set()
    for k, place in enumerate(path.places):
        if place in seen and labels[k - 1] in labels[: k - 1]:
            return False
        seen.add(place)
    return True


# ------------------------------------------------------------
# Backward search
# ------------------------------------------------------------
def find_sts(net, target, mode=SearchMode.DEPTH_FIRST, deadline=None):
    """Backward path search from `target`; the first covering path meeting C1 and C2, or None."""
    require_state_machine(net)
    net.net.p_index(target)
    mode = SearchMode(mode)
    all_places = frozenset(net.places)
    excluded = frozenset(net.net.place_postset(target))
    max_len = max(1, net.net.q * net.net.m)

    root = DirectedPath((target,))
    if all_places == {target}:
        return SynchronizingTransitionSequence(root) if satisfies_c1(net, root) else None

    open_paths = {0: deque([root.items])}
    expanded = 0
    while open_paths:
        if expired(deadline):
            raise SearchTimeoutError(f"STS search timed out after {expanded:,} expansions")
        length = max(open_paths) if mode is SearchMode.DEPTH_FIRST else min(open_paths)
        bucket = open_paths[length]
        rho = bucket.popleft()
        if not bucket:
            del open_paths[length]
        expanded += 1

        used = set(rho[1::2])
        for t in sorted(net.net.place_preset(rho[0])):
            if t in used or t in excluded or length + 1 > max_len:
                continue
            src, _ = sm_arc(net, t)
            candidate = DirectedPath((src, t) + rho)
            if not satisfies_c2(net, candidate):
                continue
            if frozenset(candidate.places) == all_places:
                if satisfies_c1(net, candidate):
                    logger.debug(f"🧭 STS after {expanded:,} expansions: {candidate}")
                    return SynchronizingTransitionSequence(candidate)
                continue
            open_paths.setdefault(length + 1, deque()).append(candidate.items)

    logger.debug(f"🧭 no STS to {target} ({expanded:,} expansions)")
    return None


# ------------------------------------------------------------
# Sequences from an STS
# ------------------------------------------------------------
def one_ss_from_sts(net, sts):
    """w = f*(σ), verified from every single-token marking."""
    word = label_sequence(net, sts.sigma)
    target = place_marking(net, sts.target)
    starts = [place_marking(net, p) for p in net.places]
    checked = verify_from(net, starts, word, target)
    return SyncResult(word, target, SyncMethod.STS, checked, net.places)


def _sampled_markings(m, k, size, seed):
    rng = np.random.default_rng(seed)
    for _ in range(size):
        yield tuple(int(c) for c in rng.multinomial(k, [1.0 / m] * m))


def k_ss_from_sts(net, sts, k, verify_budget=DEFAULT_VERIFY_BUDGET, seed=0):
    """w^k moves all k tokens to p̄; checked exhaustively when the k-token space fits the budget."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return one_ss_from_sts(net, sts)
    word = label_sequence(net, sts.sigma) * k
    target = place_marking(net, sts.target, k)
    m = net.net.m
    if count_reachable_sm(m, k) <= verify_budget:
        starts = k_token_markings(m, k)
    else:
        logger.info(f"🎲 k-token space too large, verifying on {verify_budget:,} sampled markings")
        starts = _sampled_markings(m, k, verify_budget, seed)
    checked = verify_from(net, starts, word, target)
    return SyncResult(word, target, SyncMethod.STS, checked, net.places)


def is_k_extensible(net, word, target):
    """True iff no event of `word` labels an output transition of `target`."""
    out_labels = {net.label(t) for t in net.net.place_postset(target)}
    return not out_labels.intersection(word)


def ss_via_sts(net, target, k=1, mode=SearchMode.DEPTH_FIRST, deadline=None, verify_budget=DEFAULT_VERIFY_BUDGET):
    """find_sts followed by the k-token extension; None when no STS exists."""
    sts = find_sts(net, target, mode, deadline)
    if sts is None:
        return None
    return k_ss_from_sts(net, sts, k, verify_budget)
