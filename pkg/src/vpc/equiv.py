"""Bounded exploration and behavioural equivalence checks.

``bb_div_equiv`` decides divergence-preserving branching bisimilarity of two
fully explored graphs by signature refinement: a tau step is inert when it
stays inside the current block, a state's signature is the set of
(action, target block) pairs reachable through inert steps, and a marker is
added when an inert tau cycle is reachable.  ``stratified_equiv`` is a
depth-bounded game for subjects whose state space is infinite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import networkx as nx

from .lts import is_tau


class TruncatedInput(ValueError):
    """The graph was cut off by a cap and cannot be compared exactly."""


def successors(state, vbound: int) -> list:
    return state.transitions(vbound)


@dataclass
class LtsGraph:
    states: list
    edges: list  # of (src, action, dst)
    diverges: list
    truncated: list
    vbound: int

    @property
    def complete(self) -> bool:
        return not any(self.truncated)

    def out_edges(self):
        out = [[] for _ in self.states]
        for s, a, t in self.edges:
            out[s].append((a, t))
        return out

    def dump(self) -> str:
        lines = [f"states {len(self.states)} edges {len(self.edges)}"]
        lines += [f"{s} {a} {t}" for s, a, t in self.edges]
        lines.append("div:" + "".join(f" {i}" for i, d in enumerate(self.diverges) if d))
        return "\n".join(lines) + "\n"


def explore(subject, vbound: int = 1, state_cap: int = 2000, depth_cap: int = 10_000,
            transitions=successors) -> LtsGraph:
    """Breadth-first closure of ``subject`` under its transition function."""
    if state_cap <= 0 or depth_cap <= 0:
        raise ValueError("caps must be positive")
    states = [subject]
    index = {subject: 0}
    depth = [0]
    truncated = [False]
    edges = []
    queue = deque([0])
    while queue:
        i = queue.popleft()
        if depth[i] >= depth_cap:
            truncated[i] = True
            continue
        for a, t in transitions(states[i], vbound):
            j = index.get(t)
            if j is None:
                if len(states) >= state_cap:
                    truncated[i] = True
                    continue
                j = len(states)
                index[t] = j
                states.append(t)
                depth.append(depth[i] + 1)
                truncated.append(False)
                queue.append(j)
            edges.append((i, a, j))
    return LtsGraph(states, edges, _tau_divergence(len(states), edges), truncated, vbound)


def _tau_divergence(n, edges) -> list:
    """States that can reach a tau cycle by tau steps."""
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    g.add_edges_from((s, t) for s, a, t in edges if is_tau(a))
    on_cycle = set()
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(v, v) for v in comp):
            on_cycle |= comp
    rev = g.reverse(copy=False)
    reach = set(on_cycle)
    for v in on_cycle:
        reach |= nx.descendants(rev, v)
    return [i in reach for i in range(n)]


@dataclass(frozen=True)
class Verdict:
    equivalent: bool
    witness: Optional[str] = None

    def __bool__(self):
        return self.equivalent


_DIV = ("div",)


def _refine(n, edges, initial) -> list:
    """Coarsest divergence-preserving branching bisimulation refining ``initial``."""
    block = list(initial)
    tau_edges = [(s, t) for s, a, t in edges if is_tau(a)]
    nblocks = len(set(block))
    while True:
        inert = nx.DiGraph()
        inert.add_nodes_from(range(n))
        inert.add_edges_from((s, t) for s, t in tau_edges if block[s] == block[t])
        cond = nx.condensation(inert)
        members = cond.graph["mapping"]
        local = {c: set() for c in cond.nodes}
        for s, a, t in edges:
            if is_tau(a) and block[s] == block[t]:
                continue
            local[members[s]].add((a, block[t]))
        for c in cond.nodes:
            comp = cond.nodes[c]["members"]
            if len(comp) > 1 or any(inert.has_edge(v, v) for v in comp):
                local[c].add(_DIV)
        sig = {}
        for c in reversed(list(nx.topological_sort(cond))):
            acc = set(local[c])
            for d in cond.successors(c):
                acc |= sig[d]
            sig[c] = frozenset(acc)
        keys = {}
        new = [keys.setdefault((block[s], sig[members[s]]), len(keys)) for s in range(n)]
        block = new
        if len(keys) == nblocks:
            return block
        nblocks = len(keys)


def bb_div_equiv(g1: LtsGraph, g2: LtsGraph) -> Verdict:
    """Are the start states divergence-preserving branching bisimilar?"""
    if g1.vbound != g2.vbound:
        raise ValueError(f"graphs explored with different vbounds ({g1.vbound} vs {g2.vbound})")
    if not (g1.complete and g2.complete):
        raise TruncatedInput("bb_div_equiv needs fully explored graphs")
    n1 = len(g1.states)
    n = n1 + len(g2.states)
    edges = list(g1.edges) + [(s + n1, a, t + n1) for s, a, t in g2.edges]
    div = list(g1.diverges) + list(g2.diverges)
    block = _refine(n, edges, [int(d) for d in div])
    if block[0] == block[n1]:
        return Verdict(True)
    return Verdict(False, _witness(g1, g2, block, n1, div))


def _witness(g1, g2, block, n1, div) -> str:
    if div[0] != div[n1]:
        side = "left" if div[0] else "right"
        return f"divergence: only the {side} start state can reach a tau cycle"
    mine = {(str(a), block[t]) for s, a, t in g1.edges if s == 0}
    theirs = {(str(a), block[t + n1]) for s, a, t in g2.edges if s == 0}
    left = sorted(mine - theirs)
    if left:
        return f"left start does '{left[0][0]}' which the right start cannot match"
    right = sorted(theirs - mine)
    if right:
        return f"right start does '{right[0][0]}' which the left start cannot match"
    return "start states end up in different blocks"


def observable(g: LtsGraph) -> bool:
    """Can the start state reach a visible action?"""
    if not g.complete:
        raise TruncatedInput("observable needs a fully explored graph")
    return any(not is_tau(a) for _, a, _ in g.edges)


def equivalence_classes(graphs) -> list:
    """Partition a list of complete graphs into bb_div_equiv classes (by index)."""
    classes: list = []
    for i, g in enumerate(graphs):
        for cls in classes:
            if bb_div_equiv(graphs[cls[0]], g):
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


# ------------------------------------------------------------ stratified


class _Game:
    def __init__(self, vbound, closure_states=200, closure_steps=8):
        self.vbound = vbound
        self.closure_states = closure_states
        self.closure_steps = closure_steps
        self.trans_cache: dict = {}
        self.closure_cache: dict = {}
        self.memo: dict = {}

    def trans(self, s):
        out = self.trans_cache.get(s)
        if out is None:
            out = self.trans_cache[s] = successors(s, self.vbound)
        return out

    def closure(self, s):
        """(tau-reachable states in BFS order, fully explored?, tau cycle seen?)."""
        hit = self.closure_cache.get(s)
        if hit is not None:
            return hit
        order = [s]
        seen = {s: 0}
        frontier = [s]
        complete = True
        for _ in range(self.closure_steps):
            nxt = []
            for u in frontier:
                for a, v in self.trans(u):
                    if not is_tau(a) or v in seen:
                        continue
                    if len(order) >= self.closure_states:
                        complete = False
                        continue
                    seen[v] = len(order)
                    order.append(v)
                    nxt.append(v)
            frontier = nxt
            if not frontier:
                break
        complete = complete and not frontier
        cycle = False
        if complete:
            g = nx.DiGraph()
            g.add_nodes_from(range(len(order)))
            for u in order:
                g.add_edges_from((seen[u], seen[v]) for a, v in self.trans(u) if is_tau(a))
            cycle = not nx.is_directed_acyclic_graph(g)
        hit = self.closure_cache[s] = (order, complete, cycle)
        return hit

    def eq(self, p, q, n) -> bool:
        if n == 0 or p == q:
            return True
        key = (p, q, n)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        cp, cq = self.closure(p), self.closure(q)
        ok = not (cp[1] and cq[1] and cp[2] != cq[2])
        ok = ok and self._match(p, q, n) and self._match(q, p, n)
        self.memo[key] = ok
        return ok

    def _match(self, p, q, n) -> bool:
        for a, p1 in self.trans(p):
            if is_tau(a) and self.eq(p1, q, n - 1):
                continue
            if not self._answer(p, a, p1, q, n):
                return False
        return True

    def _answer(self, p, a, p1, q, n) -> bool:
        for q2 in self.closure(q)[0]:
            if q2 is not q and not self.eq(p, q2, n - 1):
                continue
            for b, q1 in self.trans(q2):
                if b == a and self.eq(p1, q1, n - 1):
                    return True
        return False


def stratified_equiv(s1, s2, depth: int = 8, vbound: int = 1) -> bool:
    """Depth-bounded branching bisimulation game between two subjects.

    Divergence can only be refuted when both tau closures were explored to
    the end; deeper mismatches go unnoticed.
    """
    game = _Game(vbound, closure_steps=max(depth, 8))
    return game.eq(s1, s2, depth)
