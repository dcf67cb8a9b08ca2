"""Reduction compiler: degree-3 grid-cycle instances into the four puzzles.

`reduce` tiles a metacell instance with atlas gadgets and returns the target
puzzle instance plus a JSON-shaped trace recording every placement. `lift`
maps a source cycle to a canonical target solution; `extract` reads a target
solution back to a source cycle (for Yagit this includes the four-block
replacement algorithm that eliminates three-exit block traversals before the
block-wise readout). `audit_bijection` enumerates both sides where feasible
and reports how the solution sets correspond.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

from . import entryexit, gadgets, grandtour, metacell, yagit, zahlen
from ._search import enumerate_covers
from .grid import (
    ALL_TRANSFORMS,
    DIR_DELTA,
    DIRS,
    IDENTITY,
    OPPOSITE,
    Coord,
    D4Transform,
    Edge,
    apply_transform,
    edge,
    edges_of_grid,
    in_bounds,
    inverse,
    transform_dir,
)

TARGETS = ("grandtour", "entryexit", "yagit", "zahlen")

#: target-unit block side lengths (vertices for grandtour at block_n=1)
_EE_B = 9
_YG_B = 3
_ZS_B = 3


class ReductionError(ValueError):
    """The source instance has a form this reduction does not support."""


class ExtractionError(ValueError):
    """A target solution cannot be read back to a source cycle."""


@dataclass(frozen=True)
class Placement:
    """One source cell realized as a gadget block in the target."""

    cell: Coord
    gadget: str
    transform: D4Transform
    origin: Coord

    def to_json(self) -> dict:
        return {
            "cell": list(self.cell),
            "gadget": self.gadget,
            "transform": {
                "rotation": self.transform.rotation,
                "reflected": self.transform.reflected,
            },
            "origin": list(self.origin),
        }

    @staticmethod
    def from_json(data: dict) -> "Placement":
        return Placement(
            cell=tuple(data["cell"]),
            gadget=data["gadget"],
            transform=D4Transform(
                rotation=data["transform"]["rotation"],
                reflected=data["transform"]["reflected"],
            ),
            origin=tuple(data["origin"]),
        )


@dataclass(frozen=True)
class Reduction:
    target: str
    instance: object
    trace: dict

    def lift(self, cycle):
        return lift(self.trace, cycle)

    def extract(self, solution):
        return extract(self.trace, solution)


def _require_valid(inst: metacell.MetacellGridInstance) -> None:
    violations = metacell.validate_instance(inst)
    if violations:
        raise ReductionError(
            "source instance does not validate: "
            + "; ".join(v["kind"] for v in violations)
        )


def _transform_for(spec: metacell.MetacellSpec) -> D4Transform:
    """Placement transform: canonical frame has the missing side up and the
    forced port left; unforced cells take the smallest aligning transform."""
    missing = next(d for d in DIRS if d not in spec.exits)
    cands = [t for t in ALL_TRANSFORMS if transform_dir(t, "up") == missing]
    if spec.forced is not None:
        cands = [t for t in cands if transform_dir(t, "left") == spec.forced]
    return min(cands)


def _dir_between(u: Coord, v: Coord) -> str:
    for d in DIRS:
        dr, dc = DIR_DELTA[d]
        if (u[0] + dr, u[1] + dc) == v:
            return d
    raise ValueError(f"cells {u} and {v} are not adjacent")


def _used_dirs(cycle, cell: Coord) -> list[str]:
    out = []
    for d in DIRS:
        dr, dc = DIR_DELTA[d]
        if edge(cell, (cell[0] + dr, cell[1] + dc)) in cycle:
            out.append(d)
    return out


def _check_cycle(src: metacell.MetacellGridInstance, cycle) -> None:
    violations = metacell.validate_cycle(src, cycle)
    if violations:
        raise ValueError(
            "source cycle does not validate: "
            + "; ".join(v["kind"] for v in violations)
        )


def _directed_ring(cycle) -> list[Coord]:
    """The cycle as a deterministic closed cell sequence: starts at the
    smallest cell and heads toward its smaller cycle neighbour."""
    nbrs: dict[Coord, list[Coord]] = {}
    for a, b in sorted(cycle):
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    start = min(nbrs)
    ring = [start, min(nbrs[start])]
    while True:
        cur, prev = ring[-1], ring[-2]
        nxt = [p for p in nbrs[cur] if p != prev]
        if nxt[0] == start:
            return ring
        ring.append(nxt[0])


def _source_from_trace(trace: dict) -> metacell.MetacellGridInstance:
    return metacell.MetacellGridInstance.from_json(trace["source"])


def _placements(trace: dict) -> list[Placement]:
    return [Placement.from_json(p) for p in trace["placements"]]


# ============================================================ reduce


def reduce(
    inst: metacell.MetacellGridInstance, target: str, *, block_n: int = 1
) -> Reduction:
    """Compile the source instance into a `target` puzzle instance + trace.

    Grand Tour and Entry-Exit accept forced and unforced cells; Yagit and
    Zahlenschlange require every cell to carry a forced exit (the two-exit
    gadgets for those puzzles exist only in the forced form)."""
    _require_valid(inst)
    if target == "grandtour":
        return _reduce_grandtour(inst, block_n)
    if block_n != 1:
        raise ReductionError("block_n applies only to the grandtour target")
    if target == "entryexit":
        return _reduce_entryexit(inst)
    if target == "yagit":
        return _reduce_yagit(inst)
    if target == "zahlen":
        return _reduce_zahlen(inst)
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


def _base_trace(inst, target, placements, block_dims) -> dict:
    return {
        "target": target,
        "source": inst.to_json(),
        "block_dims": list(block_dims),
        "placements": [p.to_json() for p in placements],
    }


def _reduce_grandtour(inst, block_n: int) -> Reduction:
    if block_n < 1:
        raise ReductionError(f"block_n must be >= 1, got {block_n}")
    s = 4 * block_n + 1
    placements: list[Placement] = []
    forced: set[Edge] = set()
    for i in range(inst.rows):
        for j in range(inst.cols):
            spec = inst.spec((i, j))
            if spec.forced is not None:
                if block_n != 1:
                    raise ReductionError(
                        "forced cells are only supported at block_n=1 "
                        "(no forced-port gadget exists for larger blocks)"
                    )
                g = gadgets.builtin("gt5-forced")
            else:
                g = gadgets.builtin(f"gt{s}")
            t = _transform_for(spec)
            tg = gadgets.transform_gadget(g, t)
            origin = (i * s, j * s)
            placements.append(Placement((i, j), g.name, t, origin))
            for a, b in tg.payload["forced"]:
                forced.add(
                    edge(
                        (a[0] + origin[0], a[1] + origin[1]),
                        (b[0] + origin[0], b[1] + origin[1]),
                    )
                )
    out = grandtour.GrandTourInstance(
        inst.rows * s, inst.cols * s, frozenset(forced)
    )
    trace = _base_trace(inst, "grandtour", placements, (s, s))
    trace["block_n"] = block_n
    return Reduction("grandtour", out, trace)


def _reduce_entryexit(inst) -> Reduction:
    g9 = gadgets.builtin("ee9")
    B = _EE_B
    rows, cols = inst.rows * B, inst.cols * B
    key_of: dict[Coord, tuple] = {}
    port_band_key: dict[tuple, tuple] = {}
    placements: list[Placement] = []
    for i in range(inst.rows):
        for j in range(inst.cols):
            t = _transform_for(inst.spec((i, j)))
            tg = gadgets.transform_gadget(g9, t)
            st = gadgets.entryexit_structure(tg)
            origin = (i * B, j * B)
            placements.append(Placement((i, j), "ee9", t, origin))
            for bi, band in enumerate(st.bands):
                key = ("band", i, j, bi)
                for (r, c) in band:
                    key_of[(origin[0] + r, origin[1] + c)] = key
                for d, port in tg.exits.items():
                    if port in (band[0], band[-1]):
                        port_band_key[((i, j), d)] = key
            for (r, c) in st.free_cells:
                p = (origin[0] + r, origin[1] + c)
                key_of[p] = ("cell",) + p
    # forced source edges: the two facing corridors become one region, so
    # every covering loop's single arc through it crosses the block seam
    parent: dict[tuple, tuple] = {}

    def find(k):
        while parent.get(k, k) != k:
            parent[k] = parent.get(parent[k], parent[k])
            k = parent[k]
        return k

    for a, b in metacell.forced_edges(inst):
        d = _dir_between(a, b)
        ka = find(port_band_key[(a, d)])
        kb = find(port_band_key[(b, OPPOSITE[d])])
        if ka != kb:
            parent[ka] = kb
    rid_of: dict[tuple, int] = {}
    region: list[list[int]] = [[0] * cols for _ in range(rows)]
    for r in range(rows):
        for c in range(cols):
            root = find(key_of[(r, c)])
            if root not in rid_of:
                rid_of[root] = len(rid_of)
            region[r][c] = rid_of[root]
    out = entryexit.EntryExitInstance(
        rows, cols, tuple(tuple(row) for row in region)
    )
    trace = _base_trace(inst, "entryexit", placements, (B, B))
    return Reduction("entryexit", out, trace)


def _require_all_forced(inst, target: str) -> None:
    for i in range(inst.rows):
        for j in range(inst.cols):
            if inst.spec((i, j)).forced is None:
                raise ReductionError(
                    f"the {target} reduction requires a forced exit on every "
                    f"cell; ({i}, {j}) has none"
                )


def _yagit_ring_waypoints(R: int, C: int) -> list[Coord]:
    return [
        (0, 1),
        (3 * R + 1, 1),
        (3 * R + 1, 3 * C + 1),
        (1, 3 * C + 1),
        (1, 4),
        (0, 4),
    ]


def _expand_polyline(waypoints) -> list[Coord]:
    pts = [tuple(waypoints[0])]
    for a, b in zip(waypoints, waypoints[1:]):
        (r1, c1), (r2, c2) = tuple(a), tuple(b)
        if r1 == r2:
            step = 1 if c2 > c1 else -1
            pts.extend((r1, c) for c in range(c1 + step, c2 + step, step))
        else:
            step = 1 if r2 > r1 else -1
            pts.extend((r, c1) for r in range(r1 + step, r2 + step, step))
    return pts


def _segments_of_points(pts) -> set[tuple[Coord, Coord]]:
    return {
        tuple(sorted((a, b))) for a, b in zip(pts, pts[1:])
    }


def _reduce_yagit(inst) -> Reduction:
    _require_all_forced(inst, "yagit")
    R, C = inst.rows, inst.cols
    corner_spec = inst.spec((0, 0))
    if not {"right", "down"} <= corner_spec.exits:
        raise ReductionError(
            "the yagit corner replacement needs the top-left cell to have "
            "right and down exits"
        )
    rows, cols = 3 * R + 2, 3 * C + 2
    animals = [["." for _ in range(cols)] for _ in range(rows)]
    for r in range(rows):
        for c in range(cols):
            if r in (0, rows - 1) or c in (0, cols - 1):
                animals[r][c] = "S"
    animals[0][1], animals[0][2], animals[0][3] = "W", ".", "W"
    dots: set[Coord] = set()
    ring = _expand_polyline(_yagit_ring_waypoints(R, C))
    for (r, c) in ring:
        if 0 < r < rows and 0 < c < cols:
            dots.add((r, c))
    placements: list[Placement] = []
    dead_ports: list[Coord] = []
    for i in range(R):
        for j in range(C):
            origin = (1 + 3 * i, 1 + 3 * j)
            if (i, j) == (0, 0):
                g = gadgets.builtin("yagit-corner")
                t = IDENTITY
                tg = g
            else:
                g = gadgets.builtin("yagit3")
                t = _transform_for(inst.spec((i, j)))
                tg = gadgets.transform_gadget(g, t)
            placements.append(Placement((i, j), g.name, t, origin))
            for r in range(3):
                for c in range(3):
                    animals[origin[0] + r][origin[1] + c] = tg.payload[
                        "animals"
                    ][r][c]
            for (dr, dc) in tg.payload["dots"]:
                dots.add((origin[0] + dr, origin[1] + dc))
            if (i, j) != (0, 0):
                for d, port in tg.exits.items():
                    dr, dc = DIR_DELTA[d]
                    if not in_bounds((i + dr, j + dc), (R, C)):
                        dead_ports.append(
                            (origin[0] + port[0], origin[1] + port[1])
                        )
    for (r, c) in dead_ports:
        animals[r][c] = "W"
    animals[2][4] = "S"
    out = yagit.YagitInstance(
        rows, cols, tuple(tuple(row) for row in animals), frozenset(dots)
    )
    trace = _base_trace(inst, "yagit", placements, (_YG_B, _YG_B))
    trace["ring_waypoints"] = [list(p) for p in _yagit_ring_waypoints(R, C)]
    trace["corner"] = {"cell": [0, 0], "turning_dots": [[2, 4], [3, 4]]}
    trace["extra_sheep"] = [[2, 4]]
    trace["border_wolf_ports"] = [list(p) for p in sorted(dead_ports)]
    return Reduction("yagit", out, trace)


def _zs_trail_cells(R: int, C: int) -> list[Coord]:
    trail = [(2, 3), (2, 2), (0, 1), (1, 1), (2, 1), (2, 0)]
    trail += [(r, 0) for r in range(3, 3 * R + 1)]
    trail += [(3 * R + 1, c) for c in range(0, 3 * C + 2)]
    return trail


def _reduce_zahlen(inst) -> Reduction:
    _require_all_forced(inst, "zahlen")
    R, C = inst.rows, inst.cols
    corner_spec = inst.spec((0, 0))
    if not {"right", "down"} <= corner_spec.exits:
        raise ReductionError(
            "the zahlen corner block needs the top-left cell to have right "
            "and down exits"
        )
    rows, cols = 3 * R + 2, 3 * C + 2
    values = [[0] * cols for _ in range(rows)]
    placements: list[Placement] = []
    for i in range(R):
        for j in range(C):
            origin = (3 * i, 2 + 3 * j)
            if (i, j) == (0, 0):
                g = gadgets.builtin("zs-corner")
                t = IDENTITY
                tg = g
            else:
                g = gadgets.builtin("zs3", n=i * C + j)
                t = _transform_for(inst.spec((i, j)))
                tg = gadgets.transform_gadget(g, t)
            placements.append(Placement((i, j), g.name, t, origin))
            for r in range(3):
                for c in range(3):
                    values[origin[0] + r][origin[1] + c] = tg.payload[
                        "values"
                    ][r][c]
    base = 3 * R * C
    trail = _zs_trail_cells(R, C)
    for k, (r, c) in enumerate(trail, start=1):
        values[r][c] = base + k
    out = zahlen.ZahlenInstance(
        rows, cols, tuple(tuple(row) for row in values), closed=False
    )
    trace = _base_trace(inst, "zahlen", placements, (_ZS_B, _ZS_B))
    trace["trail"] = [
        [r, c, base + k] for k, (r, c) in enumerate(trail, start=1)
    ]
    trace["corner"] = {"cell": [0, 0]}
    return Reduction("zahlen", out, trace)


# ============================================================ completions

_COMPLETION_CACHE: dict[tuple, tuple] = {}


def _cover_completion(g: gadgets.Gadget, pair: tuple[str, str], dims) -> frozenset:
    """Canonical-frame covering path of the block between the two ports:
    the deterministic first solution of the exact search, cached."""
    key = (g.name, g.kind, pair)
    if key in _COMPLETION_CACHE:
        return _COMPLETION_CACHE[key]
    rows, cols = dims
    n = rows * cols

    def vid(p):
        return p[0] * cols + p[1]

    base_edges = edges_of_grid(dims)
    if g.kind == "grandtour":
        forced_coord = [edge(tuple(a), tuple(b)) for a, b in g.payload["forced"]]
    else:
        forced_coord = list(gadgets.entryexit_structure(g).forced)
    edge_index = {e: i for i, e in enumerate(base_edges)}
    idx_edges = [(vid(a), vid(b)) for a, b in base_edges]
    p1, p2 = g.exits[pair[0]], g.exits[pair[1]]
    virt_index = len(idx_edges)
    sols, _ = enumerate_covers(
        n,
        idx_edges + [(vid(p1), vid(p2))],
        forced=sorted({edge_index[e] for e in forced_coord} | {virt_index}),
        single_cycle=True,
        cap=1,
    )
    if not sols:
        raise ExtractionError(
            f"gadget {g.name} has no covering path for port pair {pair}"
        )
    frag = frozenset(base_edges[i] for i in sols[0] if i != virt_index)
    _COMPLETION_CACHE[key] = frag
    return frag


def _trace_cell_path(frag: frozenset, start: Coord, n_cells: int) -> tuple:
    nbrs: dict[Coord, list[Coord]] = {}
    for a, b in sorted(frag):
        nbrs.setdefault(a, []).append(b)
        nbrs.setdefault(b, []).append(a)
    seq = [start]
    prev = None
    while len(seq) < n_cells:
        cur = seq[-1]
        nxt = [p for p in nbrs[cur] if p != prev]
        prev = cur
        seq.append(nxt[0])
    return tuple(seq)


def _canonical_pair(t: D4Transform, dirs) -> tuple[str, str]:
    inv = inverse(t)
    return tuple(sorted(transform_dir(inv, d) for d in dirs))


# ============================================================ lift


def lift(trace: dict, cycle):
    """Map a validated source cycle to a canonical target solution."""
    src = _source_from_trace(trace)
    _check_cycle(src, cycle)
    target = trace["target"]
    if target == "grandtour":
        return _lift_grandtour(trace, cycle)
    if target == "entryexit":
        return _lift_entryexit(trace, cycle)
    if target == "yagit":
        return _lift_yagit(trace, cycle)
    if target == "zahlen":
        return _lift_zahlen(trace, cycle)
    raise ValueError(f"unknown target {target!r}")


def _lift_grandtour(trace, cycle) -> frozenset:
    s = trace["block_dims"][0]
    mid = (s - 1) // 2
    out: set[Edge] = set()
    for p in _placements(trace):
        g = gadgets.builtin(p.gadget)
        pair = _canonical_pair(p.transform, _used_dirs(cycle, p.cell))
        frag = _cover_completion(g, pair, (s, s))
        for a, b in frag:
            ta = apply_transform(p.transform, a, (s, s))
            tb = apply_transform(p.transform, b, (s, s))
            out.add(
                edge(
                    (ta[0] + p.origin[0], ta[1] + p.origin[1]),
                    (tb[0] + p.origin[0], tb[1] + p.origin[1]),
                )
            )
    for u, v in cycle:
        u, v = sorted((u, v))
        if v == (u[0], u[1] + 1):
            out.add(
                edge((u[0] * s + mid, u[1] * s + s - 1), (u[0] * s + mid, v[1] * s))
            )
        else:
            out.add(
                edge((u[0] * s + s - 1, u[1] * s + mid), (v[0] * s, u[1] * s + mid))
            )
    return frozenset(out)


def _lift_entryexit(trace, cycle) -> tuple:
    B = _EE_B
    g9 = gadgets.builtin("ee9")
    by_cell = {p.cell: p for p in _placements(trace)}
    ring = _directed_ring(cycle)
    n = len(ring)
    seq: list[Coord] = []
    for idx, cell in enumerate(ring):
        p = by_cell[cell]
        d_in = _dir_between(cell, ring[idx - 1])
        d_out = _dir_between(cell, ring[(idx + 1) % n])
        inv = inverse(p.transform)
        a_in, a_out = transform_dir(inv, d_in), transform_dir(inv, d_out)
        pair = tuple(sorted((a_in, a_out)))
        frag = _cover_completion(g9, pair, (B, B))
        path = _trace_cell_path(frag, g9.exits[a_in], B * B)
        for q in path:
            tq = apply_transform(p.transform, q, (B, B))
            seq.append((tq[0] + p.origin[0], tq[1] + p.origin[1]))
    return entryexit.canonical_form(tuple(seq))


#: fixed line segments contributed by the yagit corner block: the two
#: entrance hooks through the wrap opening, the double vertical crossing
#: the corner down into the block below, and the elbow at the turning dots
_YG_CORNER_KIT = (
    ((0, 2), (1, 2)),
    ((0, 3), (1, 3)),
    ((1, 2), (2, 2)),
    ((2, 2), (3, 2)),
    ((3, 2), (4, 2)),
    ((1, 3), (2, 3)),
    ((2, 3), (3, 3)),
    ((3, 3), (4, 3)),
    ((2, 4), (3, 4)),
)

_YG_PATTERN_BY_PAIR = {("left", "right"): "a", ("down", "left"): "b"}


def _yagit_soup_from_cycle(trace, cycle) -> set:
    soup: set[tuple[Coord, Coord]] = set(
        tuple(sorted(s)) for s in _YG_CORNER_KIT
    )
    for p in _placements(trace):
        if p.gadget != "yagit3":
            continue
        pair = _canonical_pair(p.transform, _used_dirs(cycle, p.cell))
        pattern = _YG_PATTERN_BY_PAIR[pair]
        for strand in gadgets.YAGIT_STRANDS[pattern]:
            pts = [
                apply_transform(p.transform, q, (4, 4)) for q in strand
            ]
            abs_pts = [(r + p.origin[0], c + p.origin[1]) for r, c in pts]
            soup |= _segments_of_points(_expand_polyline(abs_pts))
    return soup


def _trace_open_line(segs: set, start: Coord) -> tuple:
    incident: dict[Coord, list] = {}
    for a, b in segs:
        incident.setdefault(a, []).append((a, b))
        incident.setdefault(b, []).append((a, b))
    pts = [start]
    used: set = set()
    prev_delta = None
    while True:
        cur = pts[-1]
        cands = [s for s in incident.get(cur, []) if s not in used]
        if not cands:
            break
        if prev_delta is not None and len(incident[cur]) == 4:
            straight = (cur[0] + prev_delta[0], cur[1] + prev_delta[1])
            pick = [s for s in cands if straight in s]
            if not pick:
                raise ExtractionError(
                    f"line crossing at {cur} has no straight continuation"
                )
            seg = pick[0]
        elif len(cands) == 1:
            seg = cands[0]
        else:
            raise ExtractionError(f"ambiguous line junction at {cur}")
        used.add(seg)
        nxt = seg[1] if seg[0] == cur else seg[0]
        prev_delta = (nxt[0] - cur[0], nxt[1] - cur[1])
        pts.append(nxt)
    return tuple(pts), used


def _closed_loops_from(segs: set) -> list[tuple]:
    """Trace a set of segments into closed polylines (first point == last
    point). Deterministic: each loop starts at its minimal lattice point
    (which, being extremal, is never a self-crossing) and heads toward the
    smaller neighbour; crossings are walked straight through. An open end
    means the segments do not form closed circuits and is an error."""
    incident: dict[Coord, list[Coord]] = {}
    for a, b in segs:
        incident.setdefault(a, []).append(b)
        incident.setdefault(b, []).append(a)
    remaining = set(segs)
    loops: list[tuple] = []
    while remaining:
        start = min(p for seg in remaining for p in seg)
        first = min(
            q for q in incident[start]
            if tuple(sorted((start, q))) in remaining
        )
        pts = [start, first]
        remaining.discard(tuple(sorted((start, first))))
        while pts[-1] != start:
            cur, prev = pts[-1], pts[-2]
            outs = sorted(
                q for q in incident.get(cur, ())
                if tuple(sorted((cur, q))) in remaining
            )
            if not outs:
                raise ExtractionError(
                    f"leftover line work has an open end at {cur}; it does "
                    "not form closed circuits"
                )
            straight = (2 * cur[0] - prev[0], 2 * cur[1] - prev[1])
            nxt = straight if straight in outs else outs[0]
            remaining.discard(tuple(sorted((cur, nxt))))
            pts.append(nxt)
        loops.append(tuple(pts))
    return loops


def _yagit_lines_from_soup(trace, soup, allow_loops: bool = False) -> tuple:
    R = trace["source"]["rows"]
    C = trace["source"]["cols"]
    ring_pts = _expand_polyline(trace.get("ring_waypoints") or
                                _yagit_ring_waypoints(R, C))
    snake, used = _trace_open_line(soup, (0, 2))
    if snake[-1] != (0, 3):
        raise ExtractionError(
            f"the entrance line ends at {snake[len(snake)-1]}, not at the "
            "wrap opening"
        )
    leftover = set(soup) - used - _segments_of_points(ring_pts)
    if leftover and not allow_loops:
        raise ExtractionError(
            f"{len(leftover)} line segments are unreachable from "
            "the entrance"
        )
    out = [
        yagit.canonical_line(tuple(ring_pts)),
        yagit.canonical_line(snake),
    ]
    if leftover:
        out.extend(_closed_loops_from(leftover))
    return tuple(out)


def _lift_yagit(trace, cycle) -> tuple:
    return _yagit_lines_from_soup(trace, _yagit_soup_from_cycle(trace, cycle))


#: canonical zahlen block runs (forced port left): cells visited when the
#: run leaves through the right or down port
_ZS_RUNS = {
    ("left", "right"): ((1, 0), (1, 1), (1, 2)),
    ("down", "left"): ((1, 0), (1, 1), (2, 1)),
}


def _lift_zahlen(trace, cycle) -> tuple:
    R = trace["source"]["rows"]
    C = trace["source"]["cols"]
    by_cell = {p.cell: p for p in _placements(trace)}
    ring = _directed_ring(cycle)
    # orient the tour out of the corner's right exit and back into its down
    start = ring.index((0, 0))
    ring = ring[start:] + ring[:start]
    if ring[1] != (0, 1):
        ring = [ring[0]] + list(reversed(ring[1:]))
    path: list[Coord] = [(0, 0), (0, 1), (1, 1), (1, 2), (1, 3), (1, 4)]
    n = len(ring)
    for idx in range(1, n):
        cell = ring[idx]
        p = by_cell[cell]
        d_in = _dir_between(cell, ring[idx - 1])
        d_out = _dir_between(cell, ring[(idx + 1) % n])
        inv = inverse(p.transform)
        a_in, a_out = transform_dir(inv, d_in), transform_dir(inv, d_out)
        pair = tuple(sorted((a_in, a_out)))
        run = _ZS_RUNS[pair]
        if a_in != "left":
            run = tuple(reversed(run))
        for q in run:
            tq = apply_transform(p.transform, q, (3, 3))
            path.append((tq[0] + p.origin[0], tq[1] + p.origin[1]))
    path += [(2, 3), (2, 2), (2, 1), (2, 0)]
    path += [(r, 0) for r in range(3, 3 * R + 2)]
    path += [(3 * R + 1, c) for c in range(1, 3 * C + 2)]
    return tuple(path)


# ============================================================ extract


def extract(trace: dict, solution):
    """Read a target solution back to the source cycle it encodes."""
    target = trace["target"]
    if target == "grandtour":
        return _extract_grandtour(trace, solution)
    if target == "entryexit":
        return _extract_entryexit(trace, solution)
    if target == "yagit":
        return _extract_yagit(trace, solution)
    if target == "zahlen":
        return _extract_zahlen(trace, solution)
    raise ValueError(f"unknown target {target!r}")


def _extract_grandtour(trace, loop) -> frozenset:
    src = _source_from_trace(trace)
    s = trace["block_dims"][0]
    mid = (s - 1) // 2
    out = set()
    for u, v in metacell.allowed_edges(src):
        if v == (u[0], u[1] + 1):
            crossing = edge(
                (u[0] * s + mid, u[1] * s + s - 1), (u[0] * s + mid, v[1] * s)
            )
        else:
            crossing = edge(
                (u[0] * s + s - 1, u[1] * s + mid), (v[0] * s, u[1] * s + mid)
            )
        if crossing in loop:
            out.add(edge(u, v))
    return frozenset(out)


def _extract_entryexit(trace, loop) -> frozenset:
    B = _EE_B
    out = set()
    n = len(loop)
    for k in range(n):
        a, b = loop[k], loop[(k + 1) % n]
        ba, bb = (a[0] // B, a[1] // B), (b[0] // B, b[1] // B)
        if ba != bb:
            out.add(edge(ba, bb))
    return frozenset(out)


def _extract_zahlen(trace, path) -> frozenset:
    block_of: dict[Coord, Coord] = {}
    for p in _placements(trace):
        for r in range(3):
            for c in range(3):
                block_of[(p.origin[0] + r, p.origin[1] + c)] = p.cell
    out = set()
    for a, b in zip(path, path[1:]):
        ba, bb = block_of.get(a), block_of.get(b)
        if ba is not None and bb is not None and ba != bb:
            out.add(edge(ba, bb))
    return frozenset(out)


# ------------------------------------------------------------ yagit readout


def _soup_of_lines(lines) -> set:
    soup: set = set()
    for line in lines:
        soup |= _segments_of_points([tuple(p) for p in line])
    return soup


def _block_side_crossings(soup, origin: Coord, side: str) -> list[Coord]:
    """Interior points of a 3x3 block's side where a line crosses into the
    block (a perpendicular segment on the block's inside)."""
    r0, c0 = origin
    pts = []
    if side in ("up", "down"):
        rr = r0 if side == "up" else r0 + 3
        inward = 1 if side == "up" else -1
        for cc in (c0 + 1, c0 + 2):
            if tuple(sorted(((rr, cc), (rr + inward, cc)))) in soup:
                pts.append((rr, cc))
    else:
        cc = c0 if side == "left" else c0 + 3
        inward = 1 if side == "left" else -1
        for rr in (r0 + 1, r0 + 2):
            if tuple(sorted(((rr, cc), (rr, cc + inward)))) in soup:
                pts.append((rr, cc))
    return pts


def _block_profile(soup, origin: Coord) -> dict:
    return {d: len(_block_side_crossings(soup, origin, d)) for d in DIRS}


def detect_foursomes(trace: dict, lines) -> list[tuple]:
    """2x2 groups of blocks traversed in the three-exit way.

    A three-exit (type-c-like) traversal shows one doubly-crossed side and
    two singly-crossed sides. Such blocks must tile into complete 2x2
    groups; a stray one is an extraction error."""
    soup = _soup_of_lines(lines)
    cish = []
    for p in _placements(trace):
        if p.gadget != "yagit3":
            continue
        counts = sorted(_block_profile(soup, p.origin).values())
        if counts == [0, 1, 1, 2]:
            cish.append(p.cell)
    remaining = set(cish)
    groups: list[tuple] = []
    for cell in sorted(cish):
        if cell not in remaining:
            continue
        i, j = cell
        group = ((i, j), (i, j + 1), (i + 1, j), (i + 1, j + 1))
        if not set(group) <= remaining:
            raise ExtractionError(
                f"three-exit block traversal at {cell} is not part of a "
                "complete four-block group"
            )
        remaining -= set(group)
        groups.append(group)
    return groups


def _group_window(trace, group) -> tuple[Coord, Coord]:
    """Lattice corner (top-left) and extent of a 2x2 group's 7x7 window."""
    i0, j0 = group[0]
    return (1 + 3 * i0, 1 + 3 * j0), (6, 6)


def section_cycle_count(trace: dict, lines) -> int:
    """Number of drawn line components apart from the structural border
    ring: the entrance-to-wrap thread plus any closed circuits. A plain
    two-exit solution counts 1; each four-block group contributes its
    closed circuit, so each replacement must lower the count by one.
    `lines` must be in traced component form (ring first, as produced by
    lifting or by the replacement machinery)."""
    del trace  # count is structural; the trace fixes only the ring
    return len(lines) - 1


def _window_dots(inst: yagit.YagitInstance, corner: Coord) -> set:
    """Instance dots strictly inside a group window (legal turn points for
    rewired strands)."""
    r0, c0 = corner
    return {
        (r, c)
        for (r, c) in inst.dots
        if r0 < r < r0 + 6 and c0 < c < c0 + 6
    }


def _clear_window(soup, corner: Coord) -> tuple[set, set]:
    """Remove segments strictly associated with the window interior; keep
    anything running along the window boundary lines."""
    r0, c0 = corner
    kept, removed = set(), set()
    for a, b in soup:
        inside = all(
            r0 <= p[0] <= r0 + 6 and c0 <= p[1] <= c0 + 6 for p in (a, b)
        )
        along_boundary = (
            (a[0] == b[0] and a[0] in (r0, r0 + 6))
            or (a[1] == b[1] and a[1] in (c0, c0 + 6))
        )
        if inside and not along_boundary:
            removed.add((a, b))
        else:
            kept.add((a, b))
    return kept, removed


def _window_stubs(removed: set, corner: Coord) -> list[Coord]:
    """Window-boundary points where cleared wiring used to continue, i.e.
    the loose ends a rewiring must reconnect. Read from the removed
    segments: outside wiring may run along the boundary line itself (the
    corner kit's reflector does), so probing for outward segments would
    miss those connections."""
    r0, c0 = corner

    def on_boundary(p: Coord) -> bool:
        return (
            (p[0] in (r0, r0 + 6) and c0 <= p[1] <= c0 + 6)
            or (p[1] in (c0, c0 + 6) and r0 <= p[0] <= r0 + 6)
        )

    return sorted({p for seg in removed for p in seg if on_boundary(p)})


def _inward_delta(p: Coord, corner: Coord) -> tuple[int, int]:
    r0, c0 = corner
    if p[0] == r0:
        return (1, 0)
    if p[0] == r0 + 6:
        return (-1, 0)
    if p[1] == c0:
        return (0, 1)
    return (0, -1)


def _search_rewirings(corner: Coord, stubs, dots):
    """All crossing-free ways to join the 8 boundary stubs into 4 strands
    through the open window, turning only at dots. Deterministic order."""
    r0, c0 = corner

    def interior(p):
        return r0 < p[0] < r0 + 6 and c0 < p[1] < c0 + 6

    def on_boundary(p):
        return (
            (p[0] in (r0, r0 + 6) and c0 <= p[1] <= c0 + 6)
            or (p[1] in (c0, c0 + 6) and r0 <= p[0] <= r0 + 6)
        )

    results = []

    def strands_from(remaining, used_pts, acc):
        if not remaining:
            results.append(list(acc))
            return
        start = remaining[0]
        rest = remaining[1:]

        def walk(path, delta):
            cur = path[-1]
            nxt = (cur[0] + delta[0], cur[1] + delta[1])
            if on_boundary(nxt):
                if nxt in rest:
                    acc.append(tuple(path) + (nxt,))
                    strands_from(
                        tuple(p for p in rest if p != nxt),
                        used_pts | set(path) | {nxt},
                        acc,
                    )
                    acc.pop()
                return
            if not interior(nxt) or nxt in used_pts or nxt in path:
                return
            path.append(nxt)
            walk(path, delta)
            if nxt in dots:
                for turn in ((delta[1], delta[0]), (-delta[1], -delta[0])):
                    walk(path, turn)
            path.pop()

        walk([start], _inward_delta(start, corner))

    strands_from(tuple(stubs), set(), [])
    return results


def replace_foursomes(trace: dict, lines) -> tuple:
    """Eliminate every four-block group by rewiring its window, one group
    at a time. `lines` may be a transitional configuration whose closed
    circuits are given as closed polylines (first point == last point);
    each rewiring must merge one circuit into the entrance thread, i.e.
    lower the section-cycle count by exactly one. Once no group remains
    the result must be free of closed circuits and fully valid.
    Returns (lines, replacement count)."""
    src_json = trace["source"]
    max_depth = src_json["rows"] * src_json["cols"]
    inst = reduce(
        metacell.MetacellGridInstance.from_json(src_json), "yagit"
    ).instance
    # input errors (stray three-exit cells, malformed windows) must raise;
    # inside the search the same conditions merely prune a candidate
    detect_foursomes(trace, lines)

    def step(cur, depth):
        groups = detect_foursomes(trace, cur)
        if not groups:
            if any(len(ln) > 1 and ln[0] == ln[-1] for ln in cur):
                return None  # circuits left but nothing to replace
            if yagit.validate(inst, cur):
                return None
            return cur, 0
        if depth >= max_depth:
            return None
        before = section_cycle_count(trace, cur)
        group = groups[0]
        corner, _extent = _group_window(trace, group)
        soup = _soup_of_lines(cur)
        base, removed = _clear_window(soup, corner)
        stubs = _window_stubs(removed, corner)
        if len(stubs) != 8:
            raise ExtractionError(
                f"group window at {corner} has {len(stubs)} boundary "
                "stubs; expected 8"
            )
        dots = _window_dots(inst, corner)
        for strands in _search_rewirings(corner, stubs, dots):
            cand_soup = set(base)
            for strand in strands:
                cand_soup |= _segments_of_points(list(strand))
            try:
                cand_lines = _yagit_lines_from_soup(
                    trace, cand_soup, allow_loops=True
                )
                if section_cycle_count(trace, cand_lines) != before - 1:
                    continue
                sub = step(cand_lines, depth + 1)
            except ExtractionError:
                continue
            if sub is not None:
                return sub[0], sub[1] + 1
        return None

    out = step(lines, 0)
    if out is None:
        raise ExtractionError(
            "no sequence of count-lowering window rewirings reaches a "
            "valid solution"
        )
    return out


def _extract_yagit(trace, lines) -> frozenset:
    lines, _count = replace_foursomes(trace, lines)
    soup = _soup_of_lines(lines)
    src = _source_from_trace(trace)
    out = {edge((0, 0), (0, 1)), edge((0, 0), (1, 0))}
    for p in _placements(trace):
        if p.gadget != "yagit3":
            continue
        profile = _block_profile(soup, p.origin)
        used = [d for d in DIRS if profile[d] == 2]
        stray = [d for d in DIRS if profile[d] == 1]
        if len(used) != 2 or stray:
            raise ExtractionError(
                f"block at {p.cell} has crossing profile {profile}; cannot "
                "read an exit pair"
            )
        for d in used:
            dr, dc = DIR_DELTA[d]
            out.add(edge(p.cell, (p.cell[0] + dr, p.cell[1] + dc)))
    return frozenset(out)


def insert_foursome(trace: dict, lines, window: Coord) -> tuple:
    """Inverse replacement for constructing replacement inputs: rewire the
    2x2 block window whose top-left source cell is `window` into its
    four-block three-exit form. Requires each window cell's current
    traversal to have exactly one exit crossing the window boundary (the
    four external tubes of the pinwheel). Raises ValueError when the
    window does not qualify.

    The result is a *transitional configuration*: besides the border ring
    and the entrance thread it contains closed circuits (closed polylines,
    first point == last point). Closed lines are not legal in the puzzle,
    so transitional configurations are not valid solutions; they are the
    working form consumed by `replace_foursomes`, which merges each
    circuit back into the thread. On lifted solutions of this reduction
    the rewiring always strands at least one closed circuit — the reason
    valid solutions never contain a four-block group in the first place.
    """
    i0, j0 = window
    cells = ((i0, j0), (i0, j0 + 1), (i0 + 1, j0), (i0 + 1, j0 + 1))
    by_cell = {p.cell: p for p in _placements(trace)}
    for cell in cells:
        if cell not in by_cell or by_cell[cell].gadget != "yagit3":
            raise ValueError(f"window cell {cell} is not a regular block")
    soup = _soup_of_lines(lines)
    choices = []
    for cell in cells:
        profile = _block_profile(soup, by_cell[cell].origin)
        used = [d for d in DIRS if profile[d] == 2]
        if len(used) != 2 or any(profile[d] not in (0, 2) for d in DIRS):
            raise ValueError(
                f"window cell {cell} is not in plain two-exit form"
            )
        external = [
            d
            for d in used
            if (
                cell[0] + DIR_DELTA[d][0],
                cell[1] + DIR_DELTA[d][1],
            )
            not in cells
        ]
        if len(external) != 1:
            raise ValueError(
                f"window cell {cell} has {len(external)} external exits; "
                "the pinwheel form needs exactly one"
            )
        choices.append(1 if external[0] in ("up", "down") else 0)
    corner = (1 + 3 * i0, 1 + 3 * j0)
    base, _removed = _clear_window(soup, corner)
    local_sets = _corner_choice_segments()
    new_soup = set(base)
    for segs in (
        tuple(
            tuple(sorted(s))
            for s in _FOURSOME_CORE
        ),
    ) + tuple(local_sets[k][bit] for k, bit in enumerate(choices)):
        for a, b in segs:
            aa = (a[0] + corner[0], a[1] + corner[1])
            bb = (b[0] + corner[0], b[1] + corner[1])
            new_soup.add(tuple(sorted((aa, bb))))
    return _yagit_lines_from_soup(trace, new_soup, allow_loops=True)


# ============================================================ foursome variants

#: window-local core ring shared by all 16 four-block wirings
_FOURSOME_CORE = (
    ((2, 2), (2, 3)),
    ((2, 3), (2, 4)),
    ((2, 4), (3, 4)),
    ((3, 4), (4, 4)),
    ((4, 2), (4, 3)),
    ((4, 3), (4, 4)),
    ((2, 2), (3, 2)),
    ((3, 2), (4, 2)),
)

_TL_H = (
    ((1, 0), (1, 1)),
    ((1, 1), (1, 2)),
    ((1, 2), (2, 2)),
    ((2, 0), (2, 1)),
    ((2, 1), (2, 2)),
)
_TL_V = (
    ((0, 1), (1, 1)),
    ((1, 1), (2, 1)),
    ((2, 1), (2, 2)),
    ((0, 2), (1, 2)),
    ((1, 2), (2, 2)),
)


def _window_map(f) -> "callable":
    def seg_map(segs):
        return tuple(
            tuple(sorted((f(a), f(b)))) for a, b in segs
        )

    return seg_map


def _corner_choice_segments() -> list[tuple]:
    """Per window corner (TL, TR, BL, BR): the (row-hookup, column-hookup)
    segment sets, window-local."""
    refl_h = _window_map(lambda p: (p[0], 6 - p[1]))
    refl_v = _window_map(lambda p: (6 - p[0], p[1]))
    rot180 = _window_map(lambda p: (6 - p[0], 6 - p[1]))
    tl_h = tuple(tuple(sorted(s)) for s in _TL_H)
    tl_v = tuple(tuple(sorted(s)) for s in _TL_V)
    return [
        (tl_h, tl_v),
        (refl_h(_TL_H), refl_h(_TL_V)),
        (refl_v(_TL_H), refl_v(_TL_V)),
        (rot180(_TL_H), rot180(_TL_V)),
    ]


def enumerate_foursome_variants() -> list[frozenset]:
    """The 16 wirings of a four-block three-exit group, as window-local
    segment sets (7x7 lattice): a fixed core ring plus one of two hookups
    (row-wise or column-wise) at each of the four corners."""
    corner_choices = _corner_choice_segments()
    core = tuple(tuple(sorted(s)) for s in _FOURSOME_CORE)
    out = []
    for mask in range(16):
        segs = set(core)
        for k in range(4):
            segs |= set(corner_choices[k][(mask >> k) & 1])
        out.append(frozenset(segs))
    return out


# ============================================================ audit


@dataclass(frozen=True)
class AuditReport:
    target: str
    source_count: int
    target_count: int | None
    verdict: str
    source_truncated: bool
    target_truncated: bool
    mapping: tuple  # (source cycle json, target preimage count) pairs
    findings: tuple

    def to_json(self) -> dict:
        return {
            "target": self.target,
            "source_count": self.source_count,
            "target_count": self.target_count,
            "verdict": self.verdict,
            "source_truncated": self.source_truncated,
            "target_truncated": self.target_truncated,
            "mapping": [
                {"cycle": cyc, "target_solutions": cnt}
                for cyc, cnt in self.mapping
            ],
            "findings": list(self.findings),
        }


def _cycle_key(cyc) -> str:
    return json.dumps(metacell.cycle_to_json(cyc), sort_keys=True)


def audit_bijection(
    inst: metacell.MetacellGridInstance,
    target: str,
    *,
    cap: int,
    node_budget: int | None = None,
    block_n: int = 1,
) -> AuditReport:
    """Enumerate source cycles and target solutions and compare.

    Grand Tour and Zahlenschlange targets are enumerated directly. For
    Entry-Exit the target count is computed from per-block completion
    counts (solutions factor block-wise); for Yagit no target enumerator
    exists, so the audit checks the lift image (totality of extract and
    surjectivity onto source cycles) and says so in a finding."""
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    red = reduce(inst, target, block_n=block_n)
    cycles, s_trunc = metacell.enumerate_cycles(
        inst, cap=cap, node_budget=node_budget
    )
    findings: list[dict] = []
    preimage: Counter = Counter()
    t_trunc = False
    target_count: int | None = None

    if target in ("grandtour", "zahlen"):
        if target == "grandtour":
            sols, t_trunc = grandtour.enumerate(
                red.instance, cap=cap, node_budget=node_budget
            )
        else:
            sols, t_trunc = zahlen.enumerate(
                red.instance, cap=cap, node_budget=node_budget
            )
        target_count = len(sols)
        bad = 0
        for sol in sols:
            try:
                cyc = extract(red.trace, sol)
            except ExtractionError as exc:
                findings.append(
                    {"kind": "extract-failure", "detail": str(exc)}
                )
                bad += 1
                continue
            if metacell.validate_cycle(inst, cyc):
                findings.append(
                    {
                        "kind": "extract-invalid-cycle",
                        "detail": "a target solution extracts to an "
                        "invalid source cycle",
                    }
                )
                bad += 1
                continue
            preimage[_cycle_key(cyc)] += 1
        cycle_keys = {_cycle_key(c) for c in cycles}
        covered = set(preimage) & cycle_keys
        extras = set(preimage) - cycle_keys
        if s_trunc or t_trunc:
            verdict = "inconclusive"
            findings.append(
                {
                    "kind": "truncated",
                    "detail": "enumeration hit the cap; verdict is not "
                    "conclusive",
                }
            )
        elif bad or extras:
            verdict = "mismatch"
        elif covered == cycle_keys and all(
            preimage[k] == 1 for k in cycle_keys
        ):
            verdict = "bijective"
        elif covered == cycle_keys:
            verdict = "surjective-only"
            findings.append(
                {
                    "kind": "preimage-multiplicity",
                    "detail": "some source cycles have multiple target "
                    "solutions: "
                    + ", ".join(
                        f"x{preimage[k]}"
                        for k in sorted(cycle_keys)
                        if preimage[k] > 1
                    ),
                }
            )
        elif all(preimage[k] <= 1 for k in cycle_keys):
            verdict = "injective-only"
        else:
            verdict = "mismatch"
        mapping = tuple(
            (_cycle_key(c), preimage[_cycle_key(c)]) for c in cycles
        )
        return AuditReport(
            target,
            len(cycles),
            target_count,
            verdict,
            s_trunc,
            t_trunc,
            mapping,
            tuple(findings),
        )

    # entryexit / yagit: verify on the lift image; no direct enumerator
    mapping_rows = []
    all_ok = True
    for cyc in cycles:
        sol = lift(red.trace, cyc)
        if target == "entryexit":
            valid = not entryexit.validate(red.instance, sol)
        else:
            valid = not yagit.validate(red.instance, sol)
        back = extract(red.trace, sol)
        ok = valid and back == cyc
        all_ok = all_ok and ok
        mapping_rows.append((_cycle_key(cyc), 1 if ok else 0))
        if not ok:
            findings.append(
                {
                    "kind": "lift-round-trip-failure",
                    "detail": f"cycle {_cycle_key(cyc)} does not round-trip",
                }
            )
    if target == "entryexit":
        rep = gadgets.verify_gadget(
            gadgets.builtin("ee9"), cap=cap, node_budget=node_budget
        )
        pair_counts = {
            k: (pr.count if not pr.truncated else -1) for k, pr in rep.pairs
        }
        counts_known = True
        total = 0
        for cyc in cycles:
            prod = 1
            for p in _placements(red.trace):
                pair = _canonical_pair(p.transform, _used_dirs(cyc, p.cell))
                if pair_counts[pair] < 0:
                    counts_known = False
                    break
                prod *= pair_counts[pair]
            if not counts_known:
                break
            total += prod
        if counts_known:
            target_count = total
            findings.append(
                {
                    "kind": "factored-count",
                    "detail": "target solutions counted block-wise "
                    "(completions are independent per block)",
                }
            )
        else:
            target_count = None
            t_trunc = True
            findings.append(
                {
                    "kind": "factored-count-capped",
                    "detail": "per-block completion counts exceeded the "
                    "cap; target total not computed",
                }
            )
    else:
        findings.append(
            {
                "kind": "target-not-enumerated",
                "detail": "yagit has no solution enumerator; extract "
                "totality and surjectivity are checked on the lift image",
            }
        )
    if s_trunc:
        verdict = "inconclusive"
    elif not all_ok:
        verdict = "mismatch"
    elif target_count is not None and target_count == len(cycles):
        verdict = "bijective"
    else:
        verdict = "surjective-only"
        findings.append(
            {
                "kind": "surjectivity-witnessed-by-lift",
                "detail": "every source cycle has a lifted target solution "
                "that extracts back to it",
            }
        )
    return AuditReport(
        target,
        len(cycles),
        target_count,
        verdict,
        s_trunc,
        t_trunc,
        tuple(mapping_rows),
        tuple(findings),
    )
