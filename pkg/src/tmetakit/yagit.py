"""Yagit: partition a grid with border-to-border lines so that every region
holds sheep or wolves, never both.

Lines live on the lattice (the (rows+1) x (cols+1) grid of cell corners). A
line may change direction only at a marked dot, must start and end at distinct
non-corner border points, and two lines may never meet at a dotted point.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .grid import Coord, in_bounds

ANIMALS = (".", "S", "W")

PartitionLine = tuple[Coord, ...]  # lattice points, in walk order
LatticeSegment = tuple[Coord, Coord]  # canonical: smaller endpoint first


class YagitGeometryError(ValueError):
    """A partition line breaks the lattice-walk rules."""


def _seg(a: Coord, b: Coord) -> LatticeSegment:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class YagitInstance:
    rows: int
    cols: int
    animals: tuple[tuple[str, ...], ...]
    dots: frozenset[Coord]

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError("grid must be at least 1x1")
        if len(self.animals) != self.rows or any(len(row) != self.cols for row in self.animals):
            raise ValueError("animal matrix shape must match rows x cols")
        for row in self.animals:
            for a in row:
                if a not in ANIMALS:
                    raise ValueError(f"unknown animal symbol {a!r}")
        for r, c in self.dots:
            if not (0 < r < self.rows and 0 < c < self.cols):
                raise ValueError(f"dot ({r}, {c}) must be strictly interior to the lattice")

    def animal(self, v: Coord) -> str:
        return self.animals[v[0]][v[1]]

    def lattice_dims(self) -> tuple[int, int]:
        return (self.rows + 1, self.cols + 1)

    def on_border(self, p: Coord) -> bool:
        r, c = p
        return r in (0, self.rows) or c in (0, self.cols)

    def at_corner(self, p: Coord) -> bool:
        return p[0] in (0, self.rows) and p[1] in (0, self.cols)

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "animals": [list(row) for row in self.animals],
            "dots": [list(p) for p in sorted(self.dots)],
        }

    @staticmethod
    def from_json(data: dict) -> "YagitInstance":
        return YagitInstance(
            data["rows"],
            data["cols"],
            tuple(tuple(row) for row in data["animals"]),
            frozenset((r, c) for r, c in data["dots"]),
        )


def solution_to_json(lines: tuple[PartitionLine, ...]) -> dict:
    return {"lines": [[list(p) for p in line] for line in lines]}


def solution_from_json(data: dict) -> tuple[PartitionLine, ...]:
    return tuple(tuple((r, c) for r, c in line) for line in data["lines"])


def canonical_line(line: PartitionLine) -> PartitionLine:
    """Walk-direction-independent encoding: the lexicographically smaller of
    the two traversal orders."""
    rev = tuple(reversed(line))
    return line if line <= rev else rev


def line_segments(line: PartitionLine) -> list[LatticeSegment]:
    return [_seg(line[i], line[i + 1]) for i in range(len(line) - 1)]


def line_geometry_violations(
    inst: YagitInstance, line: PartitionLine, index: int
) -> list[dict]:
    """Per-line checks: lattice walk, border endpoints, turns at dots, no
    repeated segment. Returns violations; empty list means the line is a legal
    partition line on its own."""
    violations: list[dict] = []
    ldims = inst.lattice_dims()
    if len(line) < 2:
        return [{"kind": "line-too-short", "line": index,
                 "detail": "a partition line needs at least two lattice points"}]
    for p in line:
        if not in_bounds(p, ldims):
            return [{"kind": "point-out-of-bounds", "line": index, "point": list(p),
                     "detail": "lattice point outside the grid"}]
    for i in range(len(line) - 1):
        a, b = line[i], line[i + 1]
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            return [{"kind": "step-not-adjacent", "line": index,
                     "point": list(b),
                     "detail": f"step {a} -> {b} is not a unit lattice move"}]
    for p, role in ((line[0], "start"), (line[-1], "end")):
        if not inst.on_border(p):
            violations.append({"kind": "endpoint-not-border", "line": index,
                               "point": list(p),
                               "detail": f"line {role}s at an interior point"})
        elif inst.at_corner(p):
            violations.append({"kind": "endpoint-at-corner", "line": index,
                               "point": list(p),
                               "detail": "grid corners cannot anchor a line"})
    for p in line[1:-1]:
        if inst.on_border(p):
            violations.append({"kind": "border-touch", "line": index, "point": list(p),
                               "detail": "interior line points must stay off the border"})
    for i in range(1, len(line) - 1):
        prev_d = (line[i][0] - line[i - 1][0], line[i][1] - line[i - 1][1])
        next_d = (line[i + 1][0] - line[i][0], line[i + 1][1] - line[i][1])
        if prev_d != next_d and line[i] not in inst.dots:
            violations.append({"kind": "turn-not-at-dot", "line": index,
                               "point": list(line[i]),
                               "detail": "direction changes are only allowed on dots"})
    seen: set[LatticeSegment] = set()
    for s in line_segments(line):
        if s in seen:
            violations.append({"kind": "segment-repeated", "line": index,
                               "segment": [list(s[0]), list(s[1])],
                               "detail": "a line may not retrace a lattice segment"})
        seen.add(s)
    return violations


def compute_regions(
    inst: YagitInstance, lines: tuple[PartitionLine, ...]
) -> list[frozenset[Coord]]:
    """Connected components of cells under adjacency not cut by any line
    segment, sorted by smallest member. Raises YagitGeometryError for a line
    breaking the per-line rules."""
    for i, line in enumerate(lines):
        bad = line_geometry_violations(inst, line, i)
        if bad:
            v = bad[0]
            point = v.get("point") or v.get("segment", [["?"]])[0]
            raise YagitGeometryError(
                f"line {i} breaks geometry ({v['kind']}) near {point}")
    blocked: set[LatticeSegment] = set()
    for line in lines:
        blocked.update(line_segments(line))
    dims = (inst.rows, inst.cols)
    seen: set[Coord] = set()
    regions: list[frozenset[Coord]] = []
    for r in range(inst.rows):
        for c in range(inst.cols):
            if (r, c) in seen:
                continue
            comp: set[Coord] = set()
            stack = [(r, c)]
            seen.add((r, c))
            while stack:
                v = stack.pop()
                comp.add(v)
                vr, vc = v
                # right neighbor: cut by the vertical segment at col vc+1
                steps = (
                    ((vr, vc + 1), ((vr, vc + 1), (vr + 1, vc + 1))),
                    ((vr, vc - 1), ((vr, vc), (vr + 1, vc))),
                    ((vr + 1, vc), ((vr + 1, vc), (vr + 1, vc + 1))),
                    ((vr - 1, vc), ((vr, vc), (vr, vc + 1))),
                )
                for w, cut in steps:
                    if in_bounds(w, dims) and w not in seen and _seg(*cut) not in blocked:
                        seen.add(w)
                        stack.append(w)
            regions.append(frozenset(comp))
    regions.sort(key=min)
    return regions


def validate(inst: YagitInstance, lines: tuple[PartitionLine, ...]) -> list[dict]:
    """Solution checks in rule order: per-line geometry, endpoint uniqueness,
    segment disjointness, the no-two-lines-on-a-dot rule, then the
    sheep/wolf region constraints (an animal-free region is a violation)."""
    violations: list[dict] = []
    for i, line in enumerate(lines):
        violations.extend(line_geometry_violations(inst, line, i))
    if violations:
        return violations

    endpoints: dict[Coord, int] = {}
    for i, line in enumerate(lines):
        for p in (line[0], line[-1]):
            if p in endpoints:
                violations.append({"kind": "endpoint-shared", "point": list(p),
                                   "lines": [endpoints[p], i],
                                   "detail": "line endpoints must be pairwise distinct"})
            else:
                endpoints[p] = i
    seg_owner: dict[LatticeSegment, int] = {}
    for i, line in enumerate(lines):
        for s in set(line_segments(line)):
            if s in seg_owner and seg_owner[s] != i:
                violations.append({"kind": "segment-shared",
                                   "segment": [list(s[0]), list(s[1])],
                                   "lines": [seg_owner[s], i],
                                   "detail": "two lines may not share a lattice segment"})
            else:
                seg_owner[s] = i
    visits: dict[Coord, int] = {}
    for line in lines:
        for p in line:
            visits[p] = visits.get(p, 0) + 1
    for p in sorted(visits):
        if p in inst.dots and visits[p] > 1:
            violations.append({"kind": "crossing-at-dot", "point": list(p),
                               "detail": "lines may meet only where there is no dot"})
    if violations:
        return violations

    for region in compute_regions(inst, lines):
        sheep = sum(1 for v in region if inst.animal(v) == "S")
        wolves = sum(1 for v in region if inst.animal(v) == "W")
        cells = [list(v) for v in sorted(region)]
        if sheep and wolves:
            violations.append({"kind": "mixed-region", "cells": cells,
                               "detail": f"region holds {sheep} sheep and {wolves} wolves"})
        elif not sheep and not wolves:
            violations.append({"kind": "empty-region", "cells": cells,
                               "detail": "every region needs at least one animal"})
    return violations


def candidate_lines(inst: YagitInstance) -> list[PartitionLine]:
    """Every legal single line: border-to-border lattice walks that turn only
    on dots and never reuse a segment. Deduplicated across walk direction,
    canonically sorted."""
    ldims = inst.lattice_dims()
    starts: list[tuple[Coord, Coord]] = []
    for c in range(1, inst.cols):
        starts.append(((0, c), (1, 0)))
        starts.append(((inst.rows, c), (-1, 0)))
    for r in range(1, inst.rows):
        starts.append(((r, 0), (0, 1)))
        starts.append(((r, inst.cols), (0, -1)))
    found: set[PartitionLine] = set()

    def walk(path: list[Coord], d: Coord, used: set[LatticeSegment]) -> None:
        p = path[-1]
        q = (p[0] + d[0], p[1] + d[1])
        if not in_bounds(q, ldims):
            return
        s = _seg(p, q)
        if s in used:
            return
        path.append(q)
        used.add(s)
        if inst.on_border(q):
            if not inst.at_corner(q):
                found.add(canonical_line(tuple(path)))
        else:
            walk(path, d, used)
            if q in inst.dots:
                for turn in (((d[1], d[0])), ((-d[1], -d[0]))):
                    walk(path, turn, used)
        used.discard(s)
        path.pop()

    for p, d in starts:
        walk([p], d, set())
    return sorted(found)


@dataclass(frozen=True)
class YagitSolveResult:
    status: str  # "solved" | "unsat" | "limit-exceeded"
    lines: tuple[PartitionLine, ...] | None
    nodes: int

    def to_json(self) -> dict:
        out: dict = {"status": self.status, "nodes": self.nodes}
        if self.lines is not None:
            out.update(solution_to_json(self.lines))
        return out


def _required_segments(inst: YagitInstance) -> set[LatticeSegment]:
    """Lattice segments every solution must contain: the borders between
    orthogonally adjacent sheep/wolf pairs."""
    req: set[LatticeSegment] = set()
    for r in range(inst.rows):
        for c in range(inst.cols):
            here = inst.animals[r][c]
            if here == ".":
                continue
            if c + 1 < inst.cols and inst.animals[r][c + 1] not in (".", here):
                req.add(_seg((r, c + 1), (r + 1, c + 1)))
            if r + 1 < inst.rows and inst.animals[r + 1][c] not in (".", here):
                req.add(_seg((r + 1, c), (r + 1, c + 1)))
    return req


def solve(inst: YagitInstance, limits: tuple[int, int]) -> YagitSolveResult:
    """Bounded exact search for one valid line set.

    limits = (max_lines, max_nodes). The search branches on defects: an
    uncovered sheep|wolf border segment first, otherwise a mixed region; any
    valid solution must fix every defect, so exhausting the branches proves
    unsat. Hitting either limit yields "limit-exceeded", never "unsat".
    """
    max_lines, max_nodes = limits
    if max_lines < 0 or max_nodes < 1:
        raise ValueError("limits must allow at least (0 lines, 1 node)")
    cands = candidate_lines(inst)
    cand_segs = [set(line_segments(line)) for line in cands]
    required = _required_segments(inst)
    state = {"nodes": 0, "limited": False}

    def compatible(chosen: list[int], j: int) -> bool:
        line = cands[j]
        ends = {line[0], line[-1]}
        segs = cand_segs[j]
        pts = set(line)
        for i in chosen:
            other = cands[i]
            if ends & {other[0], other[-1]}:
                return False
            if segs & cand_segs[i]:
                return False
            if any(p in inst.dots for p in pts & set(other)):
                return False
        return True

    def search(chosen: list[int]) -> tuple[PartitionLine, ...] | None:
        state["nodes"] += 1
        if state["nodes"] > max_nodes:
            state["limited"] = True
            return None
        lines = tuple(cands[i] for i in chosen)
        regions = compute_regions(inst, lines)
        counts = []
        for region in regions:
            sheep = any(inst.animal(v) == "S" for v in region)
            wolves = any(inst.animal(v) == "W" for v in region)
            if not sheep and not wolves:
                return None  # splitting never repopulates an empty region
            counts.append((region, sheep and wolves))
        covered = set()
        for i in chosen:
            covered |= cand_segs[i]
        missing = sorted(required - covered)
        mixed = [region for region, bad in counts if bad]
        if not missing and not mixed:
            return lines
        if len(chosen) >= max_lines:
            return None
        if missing:
            fixers = [j for j in range(len(cands)) if missing[0] in cand_segs[j]]
        else:
            inner = {
                _seg((r, c + 1), (r + 1, c + 1))
                for r, c in mixed[0] if (r, c + 1) in mixed[0]
            } | {
                _seg((r + 1, c), (r + 1, c + 1))
                for r, c in mixed[0] if (r + 1, c) in mixed[0]
            }
            fixers = [j for j in range(len(cands)) if cand_segs[j] & inner]
        for j in fixers:
            if j in chosen or not compatible(chosen, j):
                continue
            got = search(chosen + [j])
            if got is not None:
                return got
            if state["limited"]:
                return None
        return None

    got = search([])
    if got is not None:
        return YagitSolveResult("solved", got, state["nodes"])
    if state["limited"]:
        return YagitSolveResult("limit-exceeded", None, state["nodes"])
    return YagitSolveResult("unsat", None, state["nodes"])


# The three legal ways a solution's lines pass a reduction block, as block-
# local lattice segments in the block's canonical orientation (forced port
# left, missing side up). Two strands enter at the left; they leave right
# (straight pair), bottom (turning pair), or split one each way, the split
# pair crossing at the dot-free center point.
_TYPE_PATTERNS: dict[str, frozenset[LatticeSegment]] = {
    "a": frozenset([
        ((1, 0), (1, 1)), ((1, 1), (1, 2)), ((1, 2), (1, 3)),
        ((2, 0), (2, 1)), ((2, 1), (2, 2)), ((2, 2), (2, 3)),
    ]),
    "b": frozenset([
        ((1, 0), (1, 1)), ((1, 1), (1, 2)), ((1, 2), (2, 2)), ((2, 2), (3, 2)),
        ((2, 0), (2, 1)), ((2, 1), (3, 1)),
    ]),
    "c": frozenset([
        ((1, 0), (1, 1)), ((1, 1), (1, 2)), ((1, 2), (2, 2)), ((2, 2), (3, 2)),
        ((2, 0), (2, 1)), ((2, 1), (2, 2)), ((2, 2), (2, 3)),
    ]),
}


def block_segments(
    lines: tuple[PartitionLine, ...], block_origin: Coord
) -> set[LatticeSegment]:
    """Solution segments inside the 3x3-cell block at block_origin, in
    block-local lattice coordinates. Segments running along the block's own
    boundary belong to the surrounding geometry and are excluded."""
    r0, c0 = block_origin
    out: set[LatticeSegment] = set()
    for line in lines:
        for (a, b) in line_segments(line):
            la = (a[0] - r0, a[1] - c0)
            lb = (b[0] - r0, b[1] - c0)
            pts = (la, lb)
            if not all(0 <= p[0] <= 3 and 0 <= p[1] <= 3 for p in pts):
                continue
            if la[0] == lb[0] and la[0] in (0, 3):
                continue  # horizontal run along the top/bottom boundary line
            if la[1] == lb[1] and la[1] in (0, 3):
                continue  # vertical run along the left/right boundary line
            out.add(_seg(la, lb))
    return out


def classify_block_traversal(
    inst: YagitInstance,
    lines: tuple[PartitionLine, ...],
    block_origin: Coord,
    transform=None,
) -> str:
    """Type of the line pattern inside a placed block: "a", "b", "c", or
    "invalid". `transform` is the D4Transform the block was placed with
    (reduction trace metadata); it is undone before pattern matching."""
    from .grid import D4Transform, apply_transform, inverse

    if transform is None:
        raise ValueError("block orientation metadata (transform) is required")
    if not isinstance(transform, D4Transform):
        raise ValueError(f"transform must be a D4Transform, got {type(transform).__name__}")
    segs = block_segments(lines, block_origin)
    inv = inverse(transform)
    local = {
        _seg(apply_transform(inv, a, (4, 4)), apply_transform(inv, b, (4, 4)))
        for a, b in segs
    }
    for name, pattern in _TYPE_PATTERNS.items():
        if local == pattern:
            return name
    return "invalid"


def load_instance(path: str) -> YagitInstance:
    with open(path, encoding="utf-8") as fh:
        return YagitInstance.from_json(json.load(fh))
