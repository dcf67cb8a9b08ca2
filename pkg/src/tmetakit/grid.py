"""Shared geometric primitives for rectangular grid puzzles.

Coordinates are (row, col) with the origin at the top-left corner; row grows
downward. Everything here is an immutable value, safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

Coord = tuple[int, int]
Edge = tuple[Coord, Coord]  # canonical: lexicographically smaller endpoint first
Dims = tuple[int, int]  # (rows, cols)

# Direction order is fixed (up, right, down, left) so every solver trace and
# enumeration order is deterministic.
DIRS: tuple[str, ...] = ("up", "right", "down", "left")
DIR_DELTA: dict[str, Coord] = {
    "up": (-1, 0),
    "right": (0, 1),
    "down": (1, 0),
    "left": (0, -1),
}
OPPOSITE: dict[str, str] = {"up": "down", "down": "up", "left": "right", "right": "left"}


class BoundsError(ValueError):
    """A coordinate fell outside its declared grid."""


def in_bounds(v: Coord, dims: Dims) -> bool:
    r, c = v
    return 0 <= r < dims[0] and 0 <= c < dims[1]


def neighbors(v: Coord, dims: Dims) -> list[Coord]:
    """In-bounds orthogonal neighbors of v, in up/right/down/left order."""
    if not in_bounds(v, dims):
        raise BoundsError(f"{v} outside {dims[0]}x{dims[1]} grid")
    r, c = v
    out: list[Coord] = []
    for d in DIRS:
        dr, dc = DIR_DELTA[d]
        w = (r + dr, c + dc)
        if in_bounds(w, dims):
            out.append(w)
    return out


def edge(a: Coord, b: Coord) -> Edge:
    """Canonical edge between two orthogonally adjacent points."""
    if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
        raise ValueError(f"{a} and {b} are not orthogonally adjacent")
    return (a, b) if a < b else (b, a)


def edges_of_grid(dims: Dims) -> list[Edge]:
    """All unit edges of the dims grid, in canonical sorted order."""
    rows, cols = dims
    out: list[Edge] = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                out.append(((r, c), (r, c + 1)))
            if r + 1 < rows:
                out.append(((r, c), (r + 1, c)))
    return sorted(out)


@dataclass(frozen=True)
class Classification:
    """Result of classify_edge_set.

    kind: one of "single-cycle", "disjoint-cycles", "paths-and-cycles", "invalid"
    covered: vertices touched by the edge set (single-cycle only; empty otherwise)
    cycles: number of disjoint cycles (disjoint-cycles only; 0 otherwise)
    reason: short explanation for kind == "invalid"
    """

    kind: str
    covered: frozenset[Coord] = frozenset()
    cycles: int = 0
    reason: str = ""


def classify_edge_set(edges: Iterable[Edge], dims: Dims) -> Classification:
    """Total classification of an edge set on the dims grid.

    single-cycle: every incident vertex has degree exactly 2 and the set is one
    connected cycle. disjoint-cycles(k): all degrees 2 but k > 1 components.
    paths-and-cycles: some vertex has degree 1 (path endpoints present).
    invalid: empty set, out-of-bounds or non-adjacent endpoints, or a vertex of
    degree > 2 (not a union of paths and cycles).
    """
    es = set(edges)
    if not es:
        return Classification("invalid", reason="empty edge set")
    adj: dict[Coord, list[Coord]] = {}
    for a, b in es:
        if not (in_bounds(a, dims) and in_bounds(b, dims)):
            return Classification("invalid", reason=f"edge ({a},{b}) out of bounds")
        if abs(a[0] - b[0]) + abs(a[1] - b[1]) != 1:
            return Classification("invalid", reason=f"edge ({a},{b}) not orthogonal-adjacent")
        if (a, b) != edge(a, b):
            return Classification("invalid", reason=f"edge ({a},{b}) not in canonical order")
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)
    if any(len(ns) > 2 for ns in adj.values()):
        return Classification("invalid", reason="vertex of degree > 2")
    if any(len(ns) == 1 for ns in adj.values()):
        return Classification("paths-and-cycles")
    # all degrees exactly 2: count connected components (each is a cycle)
    seen: set[Coord] = set()
    comps = 0
    for start in adj:
        if start in seen:
            continue
        comps += 1
        stack = [start]
        seen.add(start)
        while stack:
            v = stack.pop()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
    if comps == 1:
        return Classification("single-cycle", covered=frozenset(adj))
    return Classification("disjoint-cycles", cycles=comps)


@dataclass(frozen=True, order=True)
class D4Transform:
    """An element of the dihedral group of order 8 acting on a grid.

    Interpretation: reflect horizontally first (col -> cols-1-col) when
    `reflected`, then rotate clockwise by `rotation` degrees.
    """

    rotation: int = 0  # 0, 90, 180, 270 (clockwise)
    reflected: bool = False

    def __post_init__(self) -> None:
        if self.rotation not in (0, 90, 180, 270):
            raise ValueError(f"rotation must be a multiple of 90, got {self.rotation}")


IDENTITY = D4Transform(0, False)
ALL_TRANSFORMS: tuple[D4Transform, ...] = tuple(
    D4Transform(rot, refl) for refl in (False, True) for rot in (0, 90, 180, 270)
)


def transformed_dims(t: D4Transform, dims: Dims) -> Dims:
    rows, cols = dims
    return (cols, rows) if t.rotation in (90, 270) else (rows, cols)


def apply_transform(t: D4Transform, p: Coord, dims: Dims) -> Coord:
    """Map point p of the dims grid to its image in the transformed grid."""
    if not in_bounds(p, dims):
        raise BoundsError(f"{p} outside {dims[0]}x{dims[1]} grid")
    rows, cols = dims
    r, c = p
    if t.reflected:
        c = cols - 1 - c
    for _ in range(t.rotation // 90):
        # clockwise quarter turn: (r, c) of an R x C grid -> (c, R-1-r) of C x R
        r, c = c, rows - 1 - r
        rows, cols = cols, rows
    return (r, c)


def transform_dir(t: D4Transform, d: str) -> str:
    """Image of a compass direction under t (same convention as points)."""
    order = ("up", "right", "down", "left")
    i = order.index(d)
    if t.reflected:  # horizontal flip swaps left/right
        i = {0: 0, 1: 3, 2: 2, 3: 1}[i]
    i = (i + t.rotation // 90) % 4  # clockwise rotation advances the compass
    return order[i]


def _compose_table() -> dict[tuple[D4Transform, D4Transform], D4Transform]:
    # Determine compositions by action on a probe set: a generic point in a
    # square grid plus a direction distinguishes all 8 elements.
    dims = (5, 5)
    probes = [(0, 1), (1, 3)]

    def signature(t: D4Transform) -> tuple:
        return tuple(apply_transform(t, p, dims) for p in probes) + (transform_dir(t, "up"),)

    sig_to_t = {signature(t): t for t in ALL_TRANSFORMS}
    table: dict[tuple[D4Transform, D4Transform], D4Transform] = {}
    for t1 in ALL_TRANSFORMS:
        for t2 in ALL_TRANSFORMS:
            sig = tuple(
                apply_transform(t2, apply_transform(t1, p, dims), transformed_dims(t1, dims))
                for p in probes
            ) + (transform_dir(t2, transform_dir(t1, "up")),)
            table[(t2, t1)] = sig_to_t[sig]
    return table


_COMPOSE = _compose_table()


def compose(t2: D4Transform, t1: D4Transform) -> D4Transform:
    """The transform equal to applying t1 first, then t2."""
    return _COMPOSE[(t2, t1)]


def inverse(t: D4Transform) -> D4Transform:
    for u in ALL_TRANSFORMS:
        if compose(u, t) == IDENTITY:
            return u
    raise AssertionError("group element without inverse")  # pragma: no cover
