"""Entry-Exit: a single loop through every cell of a region-partitioned grid,
entering and exiting each region exactly once.

The testable form of the rule: in the cyclic cell sequence, the cells of every
region form exactly one contiguous arc. Solutions are canonicalized to start at
(0,0) heading toward the smaller-ordered neighbor, so enumeration is
deduplicated up to rotation and direction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ._search import BudgetExceeded
from .grid import Coord, in_bounds, neighbors

_enumerate = enumerate  # the builtin; shadowed below by the solver entry point

CellLoop = tuple  # of Coord, cyclic, each cell exactly once


@dataclass(frozen=True)
class EntryExitInstance:
    rows: int
    cols: int
    region_of: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be at least 1x1")
        if len(self.region_of) != self.rows or any(
                len(r) != self.cols for r in self.region_of):
            raise ValueError("region matrix does not match declared dimensions")
        ids = {rid for row in self.region_of for rid in row}
        if ids != set(range(len(ids))):
            raise ValueError("region ids must be dense from 0")
        # each region one orthogonally connected component
        for rid in ids:
            cells = [(r, c) for r in range(self.rows) for c in range(self.cols)
                     if self.region_of[r][c] == rid]
            seen = {cells[0]}
            stack = [cells[0]]
            while stack:
                v = stack.pop()
                for w in neighbors(v, (self.rows, self.cols)):
                    if self.region_of[w[0]][w[1]] == rid and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if len(seen) != len(cells):
                raise ValueError(f"region {rid} is not connected")

    def region(self, v: Coord) -> int:
        return self.region_of[v[0]][v[1]]

    @property
    def n_regions(self) -> int:
        return max(max(row) for row in self.region_of) + 1

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "region_of": [list(row) for row in self.region_of]}

    @staticmethod
    def from_json(data: dict) -> "EntryExitInstance":
        return EntryExitInstance(
            data["rows"], data["cols"],
            tuple(tuple(row) for row in data["region_of"]))


def loop_to_json(loop: CellLoop) -> dict:
    return {"loop": [list(v) for v in loop]}


def loop_from_json(data: dict) -> CellLoop:
    return tuple(tuple(v) for v in data["loop"])


def canonical_form(loop: CellLoop) -> CellLoop:
    """Rotate/reverse so the loop starts at its smallest cell and heads toward
    the smaller of that cell's two cyclic neighbors. Direction-invariant."""
    if not loop:
        return loop
    start = min(range(len(loop)), key=lambda i: loop[i])
    n = len(loop)
    fwd = tuple(loop[(start + i) % n] for i in range(n))
    rev = tuple(loop[(start - i) % n] for i in range(n))
    return fwd if fwd[1] <= rev[1] else rev


def arc_runs(inst: EntryExitInstance, loop: CellLoop, rid: int) -> int:
    """Number of maximal cyclic runs of region rid in the loop."""
    flags = [inst.region(v) == rid for v in loop]
    if all(flags):
        return 1
    runs = 0
    n = len(flags)
    for i in range(n):
        if flags[i] and not flags[i - 1]:
            runs += 1
    return runs


def validate(inst: EntryExitInstance, loop: CellLoop) -> list[dict]:
    violations: list[dict] = []
    dims = (inst.rows, inst.cols)
    cells = list(loop)
    if len(cells) != inst.rows * inst.cols or len(set(cells)) != len(cells):
        violations.append({
            "kind": "not-hamiltonian",
            "detail": f"loop visits {len(set(cells))} distinct cells of "
                      f"{inst.rows * inst.cols}, with {len(cells)} steps"})
    bad_cell = [v for v in cells if not (isinstance(v, tuple) and in_bounds(v, dims))]
    if bad_cell:
        violations.append({
            "kind": "cell-out-of-bounds",
            "cells": [list(v) for v in bad_cell[:8]],
            "detail": "loop leaves the grid"})
        return violations
    n = len(cells)
    for i in range(n):
        a, b = cells[i], cells[(i + 1) % n]
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            violations.append({
                "kind": "step-not-adjacent",
                "step": [list(a), list(b)],
                "detail": "consecutive loop cells must be orthogonal neighbors"})
    if violations:
        return violations
    for rid in range(inst.n_regions):
        runs = arc_runs(inst, loop, rid)
        if runs != 1:
            violations.append({
                "kind": "region-arc-violation",
                "region": rid,
                "detail": f"region {rid} is entered {runs} times; exactly one "
                          f"contiguous arc is required"})
    return violations


def instance_notes(inst: EntryExitInstance) -> list[dict]:
    """Non-fatal peculiarities surfaced alongside validation output."""
    if inst.n_regions == 1:
        return [{"kind": "single-region-instance",
                 "detail": "the whole grid is one region; any Hamiltonian "
                           "cell loop is trivially a single arc"}]
    return []


def enumerate(
    inst: EntryExitInstance, cap: int, *, node_budget: int | None = None
) -> tuple[list[CellLoop], bool]:
    """All solutions in canonical form, sorted; (solutions, truncated).

    node_budget bounds the number of search-tree extensions; exceeding it
    raises BudgetExceeded (partial output is never returned silently)."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    total = inst.rows * inst.cols
    if total < 4:
        return [], False
    dims = (inst.rows, inst.cols)
    start = (0, 0)
    start_region = inst.region(start)
    region_size = [0] * inst.n_regions
    for r in range(inst.rows):
        for c in range(inst.cols):
            region_size[inst.region_of[r][c]] += 1

    visited = {start}
    visited_in_region = [0] * inst.n_regions
    visited_in_region[start_region] = 1
    entries = [0] * inst.n_regions
    entries[start_region] = 1
    path = [start]
    found: list[CellLoop] = []
    want = cap + 1
    nodes = 0

    def extend(u: Coord, in_final_run: bool) -> bool:
        """True aborts the search (cap+1 solutions found)."""
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise BudgetExceeded(f"search exceeded {node_budget} nodes")
        ru = inst.region(u)
        for v in neighbors(u, dims):
            if v == start and len(path) == total:
                if path[1] < path[-1]:  # each cycle once, not once per direction
                    # wrap joins the last run to the first; with the pruning
                    # below every region is already a single arc
                    found.append(tuple(path))
                    if len(found) >= want:
                        return True
                continue
            if v in visited:
                continue
            rv = inst.region(v)
            if rv != ru:
                # leaving ru: a region other than the start's may never be
                # re-entered, so it must be fully covered now
                if ru != start_region and visited_in_region[ru] != region_size[ru]:
                    continue
                if ru == start_region and in_final_run:
                    continue
                final = in_final_run
                if entries[rv] >= 1:
                    if rv == start_region and not in_final_run:
                        final = True
                    else:
                        continue
                entries[rv] += 1
                visited.add(v)
                visited_in_region[rv] += 1
                path.append(v)
                if extend(v, final):
                    return True
                path.pop()
                visited_in_region[rv] -= 1
                visited.remove(v)
                entries[rv] -= 1
            else:
                visited.add(v)
                visited_in_region[rv] += 1
                path.append(v)
                if extend(v, in_final_run):
                    return True
                path.pop()
                visited_in_region[rv] -= 1
                visited.remove(v)
        return False

    extend(start, False)
    truncated = len(found) > cap
    sols = sorted(canonical_form(lp) for lp in found[:cap])
    return sols, truncated


def solve(inst: EntryExitInstance) -> CellLoop | None:
    sols, _ = enumerate(inst, cap=1)
    return sols[0] if sols else None


def load_instance(path: str) -> EntryExitInstance:
    with open(path, encoding="utf-8") as fh:
        return EntryExitInstance.from_json(json.load(fh))
