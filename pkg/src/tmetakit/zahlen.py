"""Zahlenschlange: a numbered snake across a value-filled grid.

The snake is a simple orthogonal cell path from the top-left cell to the
bottom-right cell (the closed variant instead returns to a neighbor of the
start, forming a loop). Grid values need not be distinct; the rule is global:
every value that occurs anywhere in the grid must appear on exactly one path
cell. Cells off the path are simply unused.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ._search import BudgetExceeded
from .grid import Coord, neighbors

_enumerate = enumerate  # the builtin; shadowed below by the solver entry point

CellPath = tuple  # of Coord, no repeats, consecutive cells adjacent


@dataclass(frozen=True)
class ZahlenInstance:
    rows: int
    cols: int
    values: tuple[tuple[int, ...], ...]
    closed: bool = False

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be at least 1x1")
        if len(self.values) != self.rows or any(
                len(r) != self.cols for r in self.values):
            raise ValueError("value matrix does not match declared dimensions")
        if any(v < 0 for row in self.values for v in row):
            raise ValueError("values must be nonnegative integers")

    def value(self, v: Coord) -> int:
        return self.values[v[0]][v[1]]

    @property
    def distinct_values(self) -> frozenset[int]:
        return frozenset(v for row in self.values for v in row)

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols,
                "values": [list(row) for row in self.values],
                "closed": self.closed}

    @staticmethod
    def from_json(data: dict) -> "ZahlenInstance":
        return ZahlenInstance(
            data["rows"], data["cols"],
            tuple(tuple(row) for row in data["values"]),
            bool(data.get("closed", False)))


def path_to_json(path: CellPath) -> dict:
    return {"cells": [list(v) for v in path]}


def path_from_json(data: dict) -> CellPath:
    return tuple(tuple(v) for v in data["cells"])


def validate(inst: ZahlenInstance, path: CellPath) -> list[dict]:
    violations: list[dict] = []
    cells = list(path)
    if not cells:
        return [{"kind": "empty-path", "detail": "a snake has at least one cell"}]
    oob = [v for v in cells
           if not (0 <= v[0] < inst.rows and 0 <= v[1] < inst.cols)]
    if oob:
        violations.append({
            "kind": "cell-out-of-bounds",
            "cells": [list(v) for v in oob[:8]],
            "detail": "path leaves the grid"})
        return violations
    if len(set(cells)) != len(cells):
        dup = next(v for i, v in _enumerate(cells) if v in cells[:i])
        violations.append({
            "kind": "cell-repeated",
            "cell": list(dup),
            "detail": f"cell ({dup[0]}, {dup[1]}) is visited more than once"})
    for a, b in zip(cells, cells[1:]):
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            violations.append({
                "kind": "step-not-adjacent",
                "step": [list(a), list(b)],
                "detail": "consecutive path cells must be orthogonal neighbors"})
    if cells[0] != (0, 0):
        violations.append({
            "kind": "bad-endpoint",
            "detail": f"path must start at the top-left cell, "
                      f"starts at {list(cells[0])}"})
    if inst.closed:
        a, b = cells[-1], cells[0]
        if len(cells) < 2 or abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            violations.append({
                "kind": "ends-not-adjacent",
                "detail": "closed variant requires the last cell to return "
                          "adjacent to the first"})
    else:
        goal = (inst.rows - 1, inst.cols - 1)
        if cells[-1] != goal:
            violations.append({
                "kind": "bad-endpoint",
                "detail": f"path must end at the bottom-right cell, "
                          f"ends at {list(cells[-1])}"})
    if violations:
        return violations
    # every value occurring in the grid appears on exactly one path cell
    first_at: dict[int, Coord] = {}
    for v in cells:
        val = inst.value(v)
        if val in first_at:
            violations.append({
                "kind": "value-repeated",
                "value": val,
                "cell": list(v),
                "detail": f"value {val} repeated at ({v[0]}, {v[1]})"})
        else:
            first_at[val] = v
    for val in sorted(inst.distinct_values - set(first_at)):
        violations.append({
            "kind": "value-not-covered",
            "value": val,
            "detail": f"value {val} appears in the grid but not on the path"})
    return violations


def enumerate(
    inst: ZahlenInstance, cap: int, *, node_budget: int | None = None
) -> tuple[list[CellPath], bool]:
    """All solutions sorted lexicographically; (solutions, truncated).

    Prunes on first repeated value: stepping onto a cell whose value is
    already on the path can never be completed to a solution. node_budget
    bounds search-tree extensions; exceeding it raises BudgetExceeded.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    start: Coord = (0, 0)
    goal: Coord = (inst.rows - 1, inst.cols - 1)
    if inst.rows * inst.cols == 1:
        # open variant: the one-cell path covers the one value; no loop exists
        return ([] if inst.closed else [(start,)]), False
    dims = (inst.rows, inst.cols)
    needed = len(inst.distinct_values)
    found: list[CellPath] = []
    want = cap + 1
    nodes = 0

    path: list[Coord] = [start]
    on_path = {start}
    used = {inst.value(start)}

    def extend(u: Coord) -> bool:
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise BudgetExceeded(f"search exceeded {node_budget} nodes")
        if inst.closed:
            if abs(u[0]) + abs(u[1]) == 1 and len(used) == needed:
                found.append(tuple(path))
                if len(found) >= want:
                    return True
                # a longer loop may still run through this cell; keep going
        elif u == goal:
            if len(used) == needed:
                found.append(tuple(path))
                if len(found) >= want:
                    return True
            return False  # an open path cannot pass through its terminal cell
        for v in neighbors(u, dims):
            if v in on_path:
                continue
            val = inst.value(v)
            if val in used:
                continue
            used.add(val)
            on_path.add(v)
            path.append(v)
            if extend(v):
                return True
            path.pop()
            on_path.remove(v)
            used.remove(val)
        return False

    extend(start)
    truncated = len(found) > cap
    sols = sorted(found[:cap])
    return sols, truncated


def solve(inst: ZahlenInstance) -> CellPath | None:
    sols, _ = enumerate(inst, cap=1)
    return sols[0] if sols else None


def load_instance(path: str) -> ZahlenInstance:
    with open(path, encoding="utf-8") as fh:
        return ZahlenInstance.from_json(json.load(fh))
