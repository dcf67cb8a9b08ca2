"""Hamiltonian cycles on rectangular grids of T-metacells.

A T-metacell has exactly 3 of 4 side exits and optionally one forced exit
(whose two unforced companions must sit on adjacent, not opposite, sides). A
cycle visits every cell, travels only between cells whose facing exits both
exist, and uses every forced exit's edge. This is the source problem every
reduction in this package compiles from.

A cell exit pointing at the outer boundary is representable but unusable: the
compiled puzzles seal such sides, so validation only rejects configurations
that make a cycle impossible (fewer than two inward exits) or that break a
forced exit (boundary-facing, or facing a neighbor without the matching exit).
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from . import _search
from .grid import DIRS, DIR_DELTA, OPPOSITE, Coord, Edge, edge, in_bounds

ExitDir = str  # one of DIRS


def _check_dir(d: str) -> str:
    if d not in DIRS:
        raise ValueError(f"unknown direction {d!r}")
    return d


@dataclass(frozen=True)
class MetacellSpec:
    """One cell: exactly three exits, at most one of them forced."""

    exits: frozenset[str]
    forced: str | None = None

    def __post_init__(self) -> None:
        if len(self.exits) != 3 or not self.exits <= set(DIRS):
            raise ValueError(f"exits must be 3 distinct directions, got {sorted(self.exits)}")
        if self.forced is not None:
            _check_dir(self.forced)
            if self.forced not in self.exits:
                raise ValueError("forced exit must be one of the exits")
            unforced = sorted(self.exits - {self.forced})
            if OPPOSITE[unforced[0]] == unforced[1]:
                raise ValueError(
                    f"the two unforced exits {unforced} must be on adjacent sides")


@dataclass(frozen=True)
class MetacellGridInstance:
    rows: int
    cols: int
    cells: tuple[tuple[MetacellSpec, ...], ...]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be at least 1x1")
        if len(self.cells) != self.rows or any(len(row) != self.cols for row in self.cells):
            raise ValueError("cells array does not match declared dimensions")

    def spec(self, v: Coord) -> MetacellSpec:
        return self.cells[v[0]][v[1]]

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "cells": [
                [
                    {"exits": [d for d in DIRS if d in s.exits], "forced": s.forced}
                    for s in row
                ]
                for row in self.cells
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "MetacellGridInstance":
        cells = tuple(
            tuple(
                MetacellSpec(exits=frozenset(c["exits"]), forced=c.get("forced"))
                for c in row
            )
            for row in data["cells"]
        )
        return MetacellGridInstance(rows=data["rows"], cols=data["cols"], cells=cells)


MetacellCycle = frozenset  # of Edge over cell coordinates


def _interior_exits(inst: MetacellGridInstance, v: Coord) -> list[str]:
    out = []
    for d in inst.spec(v).exits:
        dr, dc = DIR_DELTA[d]
        if in_bounds((v[0] + dr, v[1] + dc), (inst.rows, inst.cols)):
            out.append(d)
    return sorted(out)


def validate_instance(inst: MetacellGridInstance) -> list[dict]:
    """Violations that make the instance unusable as a reduction source."""
    violations: list[dict] = []
    dims = (inst.rows, inst.cols)
    for r in range(inst.rows):
        for c in range(inst.cols):
            s = inst.cells[r][c]
            if len(_interior_exits(inst, (r, c))) < 2:
                violations.append({
                    "kind": "too-few-interior-exits",
                    "cell": [r, c],
                    "detail": "fewer than 2 exits face a neighbor; the cell "
                              "cannot carry two cycle edges",
                })
            if s.forced is not None:
                dr, dc = DIR_DELTA[s.forced]
                n = (r + dr, c + dc)
                if not in_bounds(n, dims):
                    violations.append({
                        "kind": "forced-exit-at-boundary",
                        "cell": [r, c],
                        "detail": f"forced exit {s.forced} faces the outer boundary",
                    })
                elif OPPOSITE[s.forced] not in inst.spec(n).exits:
                    violations.append({
                        "kind": "forced-exit-unmatched",
                        "cell": [r, c],
                        "detail": f"forced exit {s.forced} faces {list(n)} which has "
                                  f"no {OPPOSITE[s.forced]} exit",
                    })
    return violations


def allowed_edges(inst: MetacellGridInstance) -> list[Edge]:
    """Cell adjacencies usable by a cycle: both facing exits exist."""
    out: list[Edge] = []
    for r in range(inst.rows):
        for c in range(inst.cols):
            if c + 1 < inst.cols:
                if "right" in inst.cells[r][c].exits and "left" in inst.cells[r][c + 1].exits:
                    out.append(((r, c), (r, c + 1)))
            if r + 1 < inst.rows:
                if "down" in inst.cells[r][c].exits and "up" in inst.cells[r + 1][c].exits:
                    out.append(((r, c), (r + 1, c)))
    return sorted(out)


def forced_edges(inst: MetacellGridInstance) -> list[Edge]:
    """Edges that every cycle must use (from forced exits on either side)."""
    allowed = set(allowed_edges(inst))
    out: set[Edge] = set()
    for r in range(inst.rows):
        for c in range(inst.cols):
            f = inst.cells[r][c].forced
            if f is None:
                continue
            dr, dc = DIR_DELTA[f]
            n = (r + dr, c + dc)
            if in_bounds(n, (inst.rows, inst.cols)):
                e = edge((r, c), n)
                if e in allowed:
                    out.add(e)
    return sorted(out)


def validate_cycle(inst: MetacellGridInstance, cand: MetacellCycle) -> list[dict]:
    from .grid import classify_edge_set

    violations: list[dict] = []
    dims = (inst.rows, inst.cols)
    allowed = set(allowed_edges(inst))
    for e in sorted(cand):
        if e not in allowed:
            violations.append({
                "kind": "exit-mismatch",
                "edge": [list(e[0]), list(e[1])],
                "detail": "edge without matching exits on both cells (or malformed)",
            })
    cls = classify_edge_set(cand, dims)
    if cls.kind != "single-cycle":
        violations.append({
            "kind": "not-single-cycle",
            "detail": f"edge set classifies as {cls.kind}",
        })
    else:
        missing = sorted(
            (r, c) for r in range(inst.rows) for c in range(inst.cols)
            if (r, c) not in cls.covered
        )
        if missing:
            violations.append({
                "kind": "uncovered-cells",
                "cells": [list(v) for v in missing],
                "detail": f"{len(missing)} cells not on the cycle",
            })
    for e in forced_edges(inst):
        if e not in cand:
            violations.append({
                "kind": "forced-edge-unused",
                "edge": [list(e[0]), list(e[1])],
                "detail": "a forced exit's edge is not on the cycle",
            })
    return violations


def enumerate_cycles(
    inst: MetacellGridInstance, cap: int, *, node_budget: int | None = None
) -> tuple[list[MetacellCycle], bool]:
    """All exit-respecting Hamiltonian cycles, canonically ordered.

    Returns (cycles, truncated). An instance with validation violations has no
    cycles by definition. Cycles are sorted by their canonical edge encoding;
    when truncated, the returned set is the first `cap` in search order,
    re-sorted canonically.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if validate_instance(inst):
        return [], False
    n = inst.rows * inst.cols

    def vid(v: Coord) -> int:
        return v[0] * inst.cols + v[1]

    allowed = allowed_edges(inst)
    idx_edges = [(vid(a), vid(b)) for a, b in allowed]
    forced_idx = [allowed.index(e) for e in forced_edges(inst)]
    sols, truncated = _search.enumerate_covers(
        n, idx_edges, forced_idx, single_cycle=True, cap=cap, node_budget=node_budget)
    cycles = [frozenset(allowed[i] for i in s) for s in sols]
    cycles.sort(key=lambda cyc: sorted(cyc))
    return cycles, truncated


def solve(inst: MetacellGridInstance) -> MetacellCycle | None:
    cycles, _ = enumerate_cycles(inst, cap=1)
    return cycles[0] if cycles else None


def _forced_candidates(inst: MetacellGridInstance, v: Coord) -> list[str]:
    """Directions that may legally carry this cell's forced exit."""
    r, c = v
    s = inst.spec(v)
    out = []
    for d in sorted(s.exits):
        unforced = sorted(s.exits - {d})
        if OPPOSITE[unforced[0]] == unforced[1]:
            continue
        dr, dc = DIR_DELTA[d]
        n = (r + dr, c + dc)
        if not in_bounds(n, (inst.rows, inst.cols)):
            continue
        if OPPOSITE[d] not in inst.spec(n).exits:
            continue
        out.append(d)
    return out


def random_instance(
    seed: int, rows: int, cols: int, forced_mode: str = "mixed"
) -> MetacellGridInstance:
    """Deterministic pseudo-random valid instance.

    forced_mode: "mixed" gives each cell a forced exit with probability 1/2
    where one is legal; "all" retries until every cell carries one; "none"
    leaves all exits unforced.
    """
    if rows < 2 or cols < 2:
        raise ValueError("random instances need rows >= 2 and cols >= 2")
    if forced_mode not in ("mixed", "all", "none"):
        raise ValueError(f"unknown forced_mode {forced_mode!r}")
    rng = random.Random(seed)
    dims = (rows, cols)
    for _attempt in range(1000):
        grid: list[list[MetacellSpec]] = []
        for r in range(rows):
            row = []
            for c in range(cols):
                boundary = [
                    d for d in DIRS
                    if not in_bounds((r + DIR_DELTA[d][0], c + DIR_DELTA[d][1]), dims)
                ]
                # drop one side; corners must drop a boundary side to keep two
                # inward exits available
                if len(boundary) >= 2:
                    omitted = rng.choice(sorted(boundary))
                else:
                    omitted = rng.choice(DIRS)
                row.append(MetacellSpec(exits=frozenset(set(DIRS) - {omitted})))
            grid.append(row)
        inst = MetacellGridInstance(rows, cols, tuple(tuple(r) for r in grid))
        if forced_mode == "none":
            return inst
        ok = True
        forced_grid: list[list[MetacellSpec]] = []
        for r in range(rows):
            frow = []
            for c in range(cols):
                cands = _forced_candidates(inst, (r, c))
                spec = inst.cells[r][c]
                if forced_mode == "all":
                    if not cands:
                        ok = False
                        break
                    frow.append(MetacellSpec(spec.exits, rng.choice(cands)))
                else:
                    if cands and rng.random() < 0.5:
                        frow.append(MetacellSpec(spec.exits, rng.choice(cands)))
                    else:
                        frow.append(spec)
            if not ok:
                break
            forced_grid.append(frow)
        if not ok:
            continue
        out = MetacellGridInstance(rows, cols, tuple(tuple(r) for r in forced_grid))
        if not validate_instance(out):
            return out
    raise RuntimeError("could not sample a valid instance")  # pragma: no cover


def cycle_to_json(cyc: MetacellCycle) -> dict:
    return {"edges": [[list(a), list(b)] for a, b in sorted(cyc)]}


def cycle_from_json(data: dict) -> MetacellCycle:
    return frozenset(edge(tuple(a), tuple(b)) for a, b in data["edges"])


def load_instance(path: str) -> MetacellGridInstance:
    with open(path, encoding="utf-8") as fh:
        return MetacellGridInstance.from_json(json.load(fh))
