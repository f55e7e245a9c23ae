#!/usr/bin/env python3
"""
Automata Sync – v1.0

Synchronizing sequences on completely specified automata with inputs:
unordered-pair auxiliary graph and the greedy merge loop toward a
user-chosen target state.

States are referred to by their position in `states`; pairs are stored
canonically as (i, j) with i <= j.
"""

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations_with_replacement

import networkx as nx
from loguru import logger

from settings import expired
from sync_errors import NetInputError, SearchTimeoutError, VerificationError


# ------------------------------------------------------------
# Automaton with inputs
# ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AutomatonWithInputs:
    """Λ = (χ, E, δ); `delta` maps (state, event) -> state and must be total."""

    states: tuple
    alphabet: tuple
    delta: dict

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        missing = [(x, e) for x in self.states for e in self.alphabet if (x, e) not in self.delta]
        if missing:
            x, e = missing[0]
            raise NetInputError(f"automaton is partial: δ({x!r}, {e!r}) undefined ({len(missing)} pairs missing)")

    @cached_property
    def index(self):
        return {x: i for i, x in enumerate(self.states)}

    @cached_property
    def table(self):
        """table[i][k] = index of δ(states[i], alphabet[k])."""
        return tuple(
            tuple(self.index[self.delta[(x, e)]] for e in self.alphabet) for x in self.states
        )

    @cached_property
    def event_index(self):
        return {e: k for k, e in enumerate(self.alphabet)}

    def state_index(self, state):
        try:
            return self.index[state]
        except KeyError:
            raise NetInputError(f"unknown state {state!r}") from None

    def run(self, i, word):
        for e in word:
            i = self.table[i][self.event_index[e]]
        return i

    def image(self, indices, word):
        return frozenset(self.run(i, word) for i in indices)

    @property
    def n(self):
        return len(self.states)


def automaton_from_rg(rg):
    """View a completed reachability graph as an automaton; states are node indices."""
    if not rg.complete:
        raise NetInputError("reachability graph must be completed before use as an automaton")
    delta = {(s, e): t for s, e, t in rg.edges}
    return AutomatonWithInputs(tuple(range(len(rg.nodes))), rg.net.alphabet, delta)


# ------------------------------------------------------------
# Auxiliary pair graph
# ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class AuxiliaryGraph:
    automaton: AutomatonWithInputs
    graph: nx.MultiDiGraph

    @property
    def n_nodes(self):
        return self.graph.number_of_nodes()


def _pair(i, j):
    return (i, j) if i <= j else (j, i)


def build_auxiliary(a):
    """One node per unordered pair (diagonal included); edge {x',x''} -e-> {δ(x',e), δ(x'',e)}."""
    g = nx.MultiDiGraph()
    for i, j in combinations_with_replacement(range(a.n), 2):
        g.add_node((i, j))
    for i, j in combinations_with_replacement(range(a.n), 2):
        row_i, row_j = a.table[i], a.table[j]
        for k, e in enumerate(a.alphabet):
            g.add_edge((i, j), _pair(row_i[k], row_j[k]), key=e, event=e)
    return AuxiliaryGraph(a, g)


def _distances_to(aux, target):
    """Shortest distance of every pair node to the diagonal (target, target)."""
    t = aux.automaton.state_index(target)
    return nx.single_source_shortest_path_length(aux.graph.reverse(copy=False), (t, t))


def exists_ss(aux, target):
    """True iff every pair node reaches (target, target)."""
    return len(_distances_to(aux, target)) == aux.n_nodes


# ------------------------------------------------------------
# Greedy merge loop
# ------------------------------------------------------------
@dataclass(frozen=True)
class UncertaintyTrace:
    sequence: tuple
    uncertainty: frozenset


def _shortest_word(a, dist, pair):
    """Walk down the distance field; ties go to the first event in alphabet order."""
    word = []
    i, j = pair
    while dist[(i, j)] > 0:
        here = dist[(i, j)]
        for k, e in enumerate(a.alphabet):
            nxt = _pair(a.table[i][k], a.table[j][k])
            if dist.get(nxt) == here - 1:
                word.append(e)
                i, j = nxt
                break
    return word


def greedy_trace(a, aux, target, deadline=None):
    """φ after each merging iteration, starting from φ(ε) = χ; None when no SS exists."""
    t = a.state_index(target)
    dist = _distances_to(aux, target)
    if len(dist) != aux.n_nodes:
        return None
    word = []
    phi = frozenset(range(a.n))
    trace = [UncertaintyTrace((), phi)]
    while phi != {t}:
        if expired(deadline):
            raise SearchTimeoutError("greedy synchronization timed out")
        ordered = sorted(phi)
        pair = (ordered[0], ordered[1]) if len(ordered) > 1 else (ordered[0], ordered[0])
        step = _shortest_word(a, dist, pair)
        word.extend(step)
        phi = a.image(phi, step)
        trace.append(UncertaintyTrace(tuple(word), phi))
    return trace


def greedy_ss(a, aux, target, deadline=None):
    """Sequence w with δ(x, w) = target for every state x, or None."""
    trace = greedy_trace(a, aux, target, deadline)
    if trace is None:
        logger.debug(f"🚫 some state pair cannot reach ({target!r}, {target!r})")
        return None
    word = trace[-1].sequence
    t = a.state_index(target)
    if a.image(range(a.n), word) != {t}:
        raise VerificationError(f"greedy sequence does not synchronize to {target!r}")
    logger.debug(f"🔗 greedy: {len(trace) - 1} merges, |w| = {len(word)}")
    return word
