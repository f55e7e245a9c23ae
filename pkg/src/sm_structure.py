#!/usr/bin/env python3
"""
SM Structure – v1.0

Structural analysis of state machines:
 • strongly connected components of the associated place graph
 • ergodic / transient classification
 • condensed graph with longest-path levels toward the single ergodic node
 • synchronizing sequences for one-token nets with a single ergodic component
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import networkx as nx
from loguru import logger

from petri_net import place_marking, require_deterministic, require_state_machine, sm_arc
from rg_sync import SyncMethod, SyncResult, ss_via_rg, verify_from
from settings import DEFAULT_NODE_BUDGET
from sts_sync import find_sts, one_ss_from_sts
from sync_errors import NetInputError, ObstructionError, VerificationError


class ComponentClass(str, Enum):
    ERGODIC = "ergodic"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class Component:
    places: tuple
    kind: ComponentClass

    @property
    def ergodic(self):
        return self.kind is ComponentClass.ERGODIC

    def __str__(self):
        return "{" + ",".join(self.places) + "}"


@dataclass(frozen=True)
class ComponentPartition:
    """Maximal strongly connected components, ordered by their first place."""

    components: tuple

    @property
    def ergodic(self):
        return [c for c in self.components if c.ergodic]

    @property
    def transient(self):
        return [c for c in self.components if not c.ergodic]

    @cached_property
    def _owner(self):
        return {p: i for i, c in enumerate(self.components) for p in c.places}

    def component_of(self, place):
        try:
            return self._owner[place]
        except KeyError:
            raise NetInputError(f"unknown place {place!r}") from None


def associated_graph(net):
    """𝒢_N: places as vertices, one arc per transition (key = transition id)."""
    require_state_machine(net)
    g = nx.MultiDiGraph()
    g.add_nodes_from(net.places)
    for t in net.transitions:
        src, dst = sm_arc(net, t)
        g.add_edge(src, dst, key=t)
    return g


def decompose(net):
    g = associated_graph(net)
    order = net.net.place_index
    components = []
    for scc in nx.strongly_connected_components(g):
        places = tuple(sorted(scc, key=order.__getitem__))
        leaves = any(dst not in scc for _, dst in g.out_edges(places))
        kind = ComponentClass.TRANSIENT if leaves else ComponentClass.ERGODIC
        components.append(Component(places, kind))
    components.sort(key=lambda c: order[c.places[0]])
    return ComponentPartition(tuple(components))


def ergodic_count(partition):
    """η; above 1 no SS exists for token-count-only uncertainty."""
    return len(partition.ergodic)


def transient_count(partition):
    """μ."""
    return len(partition.transient)


# ------------------------------------------------------------
# Condensed graph
# ------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class CondensedGraph:
    partition: ComponentPartition
    graph: nx.DiGraph
    levels: dict | None

    @property
    def l_max(self):
        return max(self.levels.values()) if self.levels else 0

    def level_set(self, level):
        return sorted(v for v, lv in self.levels.items() if lv == level)


def condense(net, partition=None):
    """𝒞(N); levels are longest-path lengths to the ergodic node when η = 1."""
    partition = partition or decompose(net)
    g = nx.DiGraph()
    g.add_nodes_from(range(len(partition.components)))
    for t in net.transitions:
        src, dst = sm_arc(net, t)
        a, b = partition.component_of(src), partition.component_of(dst)
        if a != b:
            if g.has_edge(a, b):
                g.edges[a, b]["transitions"].append(t)
            else:
                g.add_edge(a, b, transitions=[t])
    assert nx.is_directed_acyclic_graph(g), "condensed graph must be acyclic"

    levels = None
    if ergodic_count(partition) == 1:
        levels = {}
        for v in reversed(list(nx.topological_sort(g))):
            succ = list(g.successors(v))
            levels[v] = 1 + max(levels[s] for s in succ) if succ else 0
        for a, b in g.edges:
            assert levels[a] > levels[b], f"level order broken on edge {a}->{b}"
    return CondensedGraph(partition, g, levels)


def induced_subnet(net, places):
    """Component subnet: its places and the transitions with both ends inside."""
    inside = set(places)
    kept = [t for t in net.transitions if set(sm_arc(net, t)) <= inside]
    return net.restrict(places, kept)


def _component_ss(net, places, place, node_budget, deadline):
    sub = induced_subnet(net, places)
    sts = find_sts(sub, place, deadline=deadline)
    if sts is not None:
        return one_ss_from_sts(sub, sts).sequence
    require_deterministic(sub)
    start = place_marking(sub, place)
    result = ss_via_rg(sub, start, start, node_budget, deadline)
    return None if result is None else result.sequence


def ss_single_ergodic(net, target, node_budget=DEFAULT_NODE_BUDGET, deadline=None):
    """One-token SS to `target` in the ergodic component, walking the condensed graph level by level."""
    require_state_machine(net)
    require_deterministic(net)
    partition = decompose(net)
    eta = ergodic_count(partition)
    if eta != 1:
        raise ObstructionError(eta)
    cg = condense(net, partition)
    v0 = next(i for i, c in enumerate(partition.components) if c.ergodic)
    if partition.component_of(target) != v0:
        raise NetInputError(f"target {target!r} is not in the ergodic component {partition.components[v0]}")

    word = []
    for level in range(cg.l_max, 0, -1):
        for v in cg.level_set(level):
            comp = partition.components[v]
            exits = [
                (cg.levels[u], net.net.t_index(t), t)
                for u in cg.graph.successors(v)
                for t in cg.graph.edges[v, u]["transitions"]
            ]
            _, _, exit_t = min(exits)
            exit_place, _ = sm_arc(net, exit_t)
            local = _component_ss(net, comp.places, exit_place, node_budget, deadline)
            if local is None:
                logger.warning(f"⚠️ no 1-SS to {exit_place} inside component {comp}")
                return None
            word.extend(local)
            word.append(net.label(exit_t))
            logger.debug(f"⬇️ level {level} {comp}: {' '.join(local) or 'ε'} · {net.label(exit_t)}")

    final = _component_ss(net, partition.components[v0].places, target, node_budget, deadline)
    if final is None:
        logger.warning(f"⚠️ no 1-SS to {target} inside the ergodic component")
        return None
    word.extend(final)

    goal = place_marking(net, target)
    try:
        checked = verify_from(net, [place_marking(net, p) for p in net.places], tuple(word), goal)
    except VerificationError as exc:
        logger.warning(f"⚠️ component sequences interact through shared labels: {exc}")
        return None
    return SyncResult(tuple(word), goal, SyncMethod.CONDENSED, checked, net.places)
