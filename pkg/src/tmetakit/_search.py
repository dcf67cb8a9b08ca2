"""Exact cycle/path enumeration kernel shared by the loop solvers.

Enumerates edge subsets of an explicit graph in which every vertex has degree
exactly 2 (a single Hamiltonian cycle by default, or a cycle cover when
single_cycle=False), with some edges forced in. The kernel works on integer
vertex/edge indices; callers translate to grid coordinates.

Techniques: edge-state backtracking (in/out/undecided) with unit propagation on
vertex degrees, fragment-endpoint tracking for early cycle-closure rejection,
and whole-graph connectivity pruning. Branching prefers extending an existing
path fragment and breaks ties by lowest index, so enumeration order (and
therefore every downstream report) is deterministic.
"""

from __future__ import annotations

from typing import Sequence

UNDECIDED, IN, OUT = 0, 1, 2


class BudgetExceeded(Exception):
    """Search node budget exhausted before the enumeration finished."""


class _Conflict(Exception):
    pass


class _Searcher:
    def __init__(self, n_vertices: int, edges: Sequence[tuple[int, int]], single_cycle: bool):
        self.n = n_vertices
        self.edges = list(edges)
        self.single_cycle = single_cycle
        self.incident: list[list[int]] = [[] for _ in range(n_vertices)]
        for i, (u, v) in enumerate(self.edges):
            if u == v:
                raise ValueError("self-loop edge")
            self.incident[u].append(i)
            self.incident[v].append(i)
        self.state = [UNDECIDED] * len(self.edges)
        self.deg_in = [0] * n_vertices
        self.deg_und = [len(self.incident[v]) for v in range(n_vertices)]
        # fragment endpoint partner; meaningful for vertices with deg_in == 1
        self.end = list(range(n_vertices))
        self.in_count = 0
        self.closed_cycles = 0
        # trail entries: ("e", edge_idx) or ("end", vertex, old_value)
        #             or ("in", old_in_count) or ("cc", old_closed)
        self.trail: list[tuple] = []
        self.nodes = 0

    # -- assignment with undo trail ------------------------------------
    def _set_out(self, i: int) -> None:
        if self.state[i] == OUT:
            return
        if self.state[i] == IN:
            raise _Conflict
        self.state[i] = OUT
        self.trail.append(("e", i))
        u, v = self.edges[i]
        self.deg_und[u] -= 1
        self.deg_und[v] -= 1
        self._queue.extend((u, v))

    def _set_in(self, i: int) -> None:
        if self.state[i] == IN:
            return
        if self.state[i] == OUT:
            raise _Conflict
        u, v = self.edges[i]
        if self.deg_in[u] >= 2 or self.deg_in[v] >= 2:
            raise _Conflict
        eu = self.end[u] if self.deg_in[u] == 1 else u
        ev = self.end[v] if self.deg_in[v] == 1 else v
        if eu == v:
            # u..v is one fragment; this edge closes it into a cycle
            if self.single_cycle and self.in_count + 1 != self.n:
                raise _Conflict
            self.trail.append(("cc", self.closed_cycles))
            self.closed_cycles += 1
        else:
            self.trail.append(("end", eu, self.end[eu]))
            self.trail.append(("end", ev, self.end[ev]))
            self.end[eu] = ev
            self.end[ev] = eu
        self.state[i] = IN
        self.trail.append(("e", i))
        self.trail.append(("in", self.in_count))
        self.in_count += 1
        self.deg_und[u] -= 1
        self.deg_und[v] -= 1
        self.deg_in[u] += 1
        self.deg_in[v] += 1
        self._queue.extend((u, v))

    def _undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            entry = self.trail.pop()
            if entry[0] == "e":
                i = entry[1]
                u, v = self.edges[i]
                if self.state[i] == IN:
                    self.deg_in[u] -= 1
                    self.deg_in[v] -= 1
                self.state[i] = UNDECIDED
                self.deg_und[u] += 1
                self.deg_und[v] += 1
            elif entry[0] == "end":
                self.end[entry[1]] = entry[2]
            elif entry[0] == "in":
                self.in_count = entry[1]
            else:  # "cc"
                self.closed_cycles = entry[1]

    # -- propagation ----------------------------------------------------
    def _propagate(self) -> None:
        while self._queue:
            v = self._queue.pop()
            din, dund = self.deg_in[v], self.deg_und[v]
            if din > 2 or din + dund < 2:
                raise _Conflict
            if din == 2 and dund:
                for i in self.incident[v]:
                    if self.state[i] == UNDECIDED:
                        self._set_out(i)
            elif din + dund == 2 and dund:
                for i in self.incident[v]:
                    if self.state[i] == UNDECIDED:
                        self._set_in(i)

    def _assign(self, i: int, val: int) -> None:
        self._queue: list[int] = []
        if val == IN:
            self._set_in(i)
        else:
            self._set_out(i)
        self._propagate()

    # -- pruning ---------------------------------------------------------
    def _connected(self) -> bool:
        # a single covering cycle must reach every vertex over non-OUT edges
        seen = bytearray(self.n)
        stack = [0]
        seen[0] = 1
        count = 1
        while stack:
            v = stack.pop()
            for i in self.incident[v]:
                if self.state[i] == OUT:
                    continue
                u, w = self.edges[i]
                o = w if v == u else u
                if not seen[o]:
                    seen[o] = 1
                    count += 1
                    stack.append(o)
        return count == self.n

    def _pick_edge(self) -> int | None:
        best: int | None = None
        # prefer extending a fragment end, lowest vertex index first
        for v in range(self.n):
            if self.deg_in[v] == 1 and self.deg_und[v] > 0:
                for i in self.incident[v]:
                    if self.state[i] == UNDECIDED:
                        return i
        for v in range(self.n):
            if self.deg_und[v] > 0:
                for i in self.incident[v]:
                    if self.state[i] == UNDECIDED:
                        best = i
                        break
                break
        return best

    # -- search -----------------------------------------------------------
    def run(self, forced: Sequence[int], want: int | None, node_budget: int | None
            ) -> tuple[list[frozenset[int]], bool]:
        solutions: list[frozenset[int]] = []
        if self.n == 0:
            return solutions, False
        try:
            self._queue = []
            for i in forced:
                self._set_in(i)
            for v in range(self.n):
                self._queue.append(v)
            self._propagate()
        except _Conflict:
            return solutions, False

        exhausted_early = False

        def complete() -> bool:
            if any(self.deg_in[v] != 2 for v in range(self.n)):
                return False
            if self.single_cycle and self.closed_cycles != 1:
                return False
            return True

        def dfs() -> bool:
            """Returns True to abort the whole search (cap reached)."""
            nonlocal exhausted_early
            self.nodes += 1
            if node_budget is not None and self.nodes > node_budget:
                raise BudgetExceeded(f"search exceeded {node_budget} nodes")
            if self.single_cycle and not self._connected():
                return False
            i = self._pick_edge()
            if i is None:
                if complete():
                    solutions.append(
                        frozenset(j for j, s in enumerate(self.state) if s == IN))
                    if want is not None and len(solutions) >= want:
                        exhausted_early = True
                        return True
                return False
            for val in (IN, OUT):
                mark = len(self.trail)
                try:
                    self._assign(i, val)
                except _Conflict:
                    self._undo_to(mark)
                    continue
                if dfs():
                    return True
                self._undo_to(mark)
            return False

        dfs()
        return solutions, exhausted_early


def enumerate_covers(
    n_vertices: int,
    edges: Sequence[tuple[int, int]],
    forced: Sequence[int] = (),
    *,
    single_cycle: bool = True,
    cap: int | None = None,
    node_budget: int | None = None,
) -> tuple[list[frozenset[int]], bool]:
    """All degree-2 edge covers of the graph containing every forced edge.

    single_cycle=True restricts to one cycle through every vertex (Hamiltonian
    cycle). Returns (solutions, truncated): each solution is a frozenset of
    edge indices, in search order; truncated means at least one further
    solution exists beyond the first `cap` returned. Raises BudgetExceeded if
    node_budget branch nodes are exceeded.
    """
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")
    want = None if cap is None else cap + 1
    searcher = _Searcher(n_vertices, edges, single_cycle)
    sols, _ = searcher.run(list(forced), want, node_budget)
    if cap is not None and len(sols) > cap:
        return sols[:cap], True
    return sols, False
