#!/usr/bin/env python3
"""
Reachability Graph – v1.0

Breadth-first reachability graph of a bounded synchronized net, its completely
specified version (self-loops for non-receptive events), and the k-token
counting formula for strongly connected state machines.
"""

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement

import networkx as nx
import numpy as np
from loguru import logger

from petri_net import apply_event, apply_sequence, format_marking
from settings import DEFAULT_NODE_BUDGET, expired
from sync_errors import BoundednessError, NetInputError, SearchTimeoutError

MAX_COUNT = 2**63 - 1


@dataclass(frozen=True, eq=False)
class ReachabilityGraph:
    """Markings as nodes (BFS discovery order), event-labelled edges (source, event, target)."""

    net: object
    nodes: tuple
    edges: tuple
    initial: int = 0
    complete: bool = False

    @cached_property
    def index(self):
        return {m: i for i, m in enumerate(self.nodes)}

    @cached_property
    def successors(self):
        """(node index, event) -> target index, for the edges present."""
        return {(s, e): t for s, e, t in self.edges}

    def node_of(self, marking):
        try:
            return self.index[tuple(marking)]
        except KeyError:
            raise NetInputError(f"marking {format_marking(marking)} is not in the reachability graph") from None

    def __len__(self):
        return len(self.nodes)


def build_rg(net, m0, node_budget=DEFAULT_NODE_BUDGET, deadline=None):
    """Close {m0} under every event of the alphabet; partial graph (no self-loops added)."""
    return build_rg_from(net, [m0], node_budget, deadline)


def build_rg_from(net, starts, node_budget=DEFAULT_NODE_BUDGET, deadline=None):
    """Same closure from a set of initial markings; the first one is node 0."""
    if node_budget < 1:
        raise ValueError("node_budget must be at least 1")
    nodes, index = [], {}
    for m0 in starts:
        start = apply_sequence(net, m0, ())
        if start not in index:
            if len(nodes) >= node_budget:
                raise BoundednessError(node_budget)
            index[start] = len(nodes)
            nodes.append(start)
    if not nodes:
        raise NetInputError("reachability graph needs at least one initial marking")
    edges = []
    queue = deque(range(len(nodes)))
    pre = net.net.pre
    while queue:
        if expired(deadline):
            raise SearchTimeoutError(f"reachability graph construction timed out after {len(nodes):,} markings")
        src = queue.popleft()
        marking = nodes[src]
        enabled = np.all(np.asarray(marking)[:, None] >= pre, axis=0)
        for event in net.alphabet:
            if not (enabled & net.event_mask(event)).any():
                continue
            nxt = apply_event(net, marking, event)
            dst = index.get(nxt)
            if dst is None:
                if len(nodes) >= node_budget:
                    raise BoundednessError(node_budget)
                dst = len(nodes)
                index[nxt] = dst
                nodes.append(nxt)
                queue.append(dst)
            edges.append((src, event, dst))
    logger.debug(f"📐 RG: {len(nodes):,} markings, {len(edges):,} edges")
    return ReachabilityGraph(net, tuple(nodes), tuple(edges), 0, False)


def complete_rg(rg):
    """Add a self-loop (M, e, M) for every event with no receptive enabled transition."""
    if rg.complete:
        return rg
    present = rg.successors
    edges = list(rg.edges)
    added = 0
    for i in range(len(rg.nodes)):
        for event in rg.net.alphabet:
            if (i, event) not in present:
                edges.append((i, event, i))
                added += 1
    logger.debug(f"➕ completed RG with {added:,} self-loops")
    return ReachabilityGraph(rg.net, rg.nodes, tuple(edges), rg.initial, True)


def count_reachable_sm(m, k):
    """C(m+k−1, m−1): markings of a strongly connected SM with m places and k tokens."""
    if m < 1 or k < 0:
        raise ValueError("need m >= 1 and k >= 0")
    count = math.comb(m + k - 1, m - 1)
    if count > MAX_COUNT:
        raise OverflowError(f"C({m + k - 1}, {m - 1}) does not fit a 64-bit node index")
    return count


def k_token_markings(m, k):
    """All markings of m places holding exactly k tokens, in lexicographic order of token positions."""
    for slots in combinations_with_replacement(range(m), k):
        counts = [0] * m
        for i in slots:
            counts[i] += 1
        yield tuple(counts)


def rg_to_networkx(rg):
    g = nx.MultiDiGraph()
    for i, marking in enumerate(rg.nodes):
        g.add_node(i, marking=marking)
    for s, e, t in rg.edges:
        g.add_edge(s, t, key=e, event=e)
    return g


def rg_to_edge_list(rg):
    """Debug export: node→marking header, then `source event target` per line."""
    lines = [f"# nodes {len(rg.nodes)} complete={str(rg.complete).lower()} initial={rg.initial}"]
    lines += [f"# {i} {format_marking(m)}" for i, m in enumerate(rg.nodes)]
    lines += [f"{s} {e} {t}" for s, e, t in rg.edges]
    return "\n".join(lines) + "\n"
