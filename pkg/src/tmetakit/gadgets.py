"""Gadget atlas: verified building blocks for the Hamiltonicity reductions.

A gadget is a rectangular block that stands in for one degree-3 vertex of a
source grid graph. It has exactly three ports (the midpoints of three of its
four sides), an optional forced port that every traversal must use, and a
puzzle-specific payload describing the block's content (forced edges, walls,
animals and dots, or cell values).

`verify_gadget` certifies a gadget's behavioural contract:

* for every pair of ports it decides whether a traversal of the block
  entering at one port and leaving at the other can cover the whole block
  (or, for value/line puzzles, satisfy the block's local rules);
* for gadgets with a forced port it checks that exactly the two pairs
  through that port are feasible;
* it reports stray behaviour (closed tours that never leave the block,
  runs that end away from a port) as spurious findings, and records
  structural impossibility certificates (e.g. checkerboard parity) so a
  zero count is distinguishable from an unexplored case.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from ._search import BudgetExceeded, enumerate_covers
from .grid import (
    DIRS,
    Coord,
    D4Transform,
    Dims,
    Edge,
    apply_transform,
    edge,
    edges_of_grid,
    in_bounds,
    neighbors,
    transform_dir,
    transformed_dims,
)
from .yagit import YagitInstance

KINDS = ("grandtour", "entryexit", "yagit", "zahlen")

#: Gadget names that are loaded from bundled fixture files.
FIXTURE_GADGETS = (
    "gt5",
    "gt5-forced",
    "gt9",
    "gt17",
    "ee7",
    "yagit3",
    "yagit-corner",
    "zs3",
    "zs-corner",
)

_SIDES = ("up", "right", "down", "left")


class UnsupportedGadgetError(ValueError):
    """Raised when a gadget has no port-pair verification semantics.

    Corner gadgets are framing blocks: they are crossed by the global
    solution in a fixed way that the reducer round-trip tests exercise,
    not interchangeable degree-3 blocks."""

    def __init__(self, gadget: str, reason: str):
        super().__init__(f"gadget {gadget!r} cannot be pair-verified: {reason}")
        self.gadget = gadget
        self.reason = reason


def port_for_side(dims: Dims, side: str) -> Coord:
    """Centre coordinate of `side` on a block of `dims` (odd side lengths)."""
    rows, cols = dims
    mid_r, mid_c = (rows - 1) // 2, (cols - 1) // 2
    if side == "up":
        return (0, mid_c)
    if side == "right":
        return (mid_r, cols - 1)
    if side == "down":
        return (rows - 1, mid_c)
    if side == "left":
        return (mid_r, 0)
    raise ValueError(f"unknown side {side!r}")


@dataclass(frozen=True)
class Gadget:
    """A block with three ports and a puzzle payload.

    `block_dims` counts vertices for grandtour gadgets and cells for the
    other kinds. `payload` is a JSON-shaped dict mirroring the target
    puzzle's instance schema restricted to the block. Extra bookkeeping
    (e.g. a zahlen block's value-band index) lives in `meta`.
    """

    name: str
    kind: str
    block_dims: Dims
    exits: dict
    forced_port: str | None
    payload: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gadget kind {self.kind!r}")
        rows, cols = self.block_dims
        if rows < 1 or cols < 1:
            raise ValueError(f"bad block dims {self.block_dims!r}")
        exits = {d: (int(p[0]), int(p[1])) for d, p in self.exits.items()}
        if len(exits) != 3:
            raise ValueError(f"a gadget needs exactly 3 exits, got {sorted(exits)}")
        for d, p in exits.items():
            if d not in _SIDES:
                raise ValueError(f"unknown exit side {d!r}")
            want = port_for_side(self.block_dims, d)
            if p != want:
                raise ValueError(
                    f"exit {d} port {p} is not the side centre {want}"
                )
        object.__setattr__(self, "exits", exits)
        object.__setattr__(self, "block_dims", (int(rows), int(cols)))
        if self.forced_port is not None:
            if self.forced_port not in exits:
                raise ValueError(
                    f"forced port {self.forced_port!r} is not an exit"
                )
            others = [d for d in exits if d != self.forced_port]
            a, b = others
            if (
                (a == "up" and b == "down")
                or (a == "down" and b == "up")
                or (a == "left" and b == "right")
                or (a == "right" and b == "left")
            ):
                raise ValueError(
                    "the two unforced exits must lie on adjacent sides"
                )

    @property
    def missing_side(self) -> str:
        (m,) = [d for d in _SIDES if d not in self.exits]
        return m

    def port(self, side: str) -> Coord:
        return self.exits[side]

    def to_json(self) -> dict:
        obj = {
            "name": self.name,
            "kind": self.kind,
            "block_dims": list(self.block_dims),
            "exits": {d: list(p) for d, p in sorted(self.exits.items())},
            "forced": self.forced_port,
            "payload": self.payload,
        }
        for k in sorted(self.meta):
            obj[k] = self.meta[k]
        return obj

    @classmethod
    def from_json(cls, data: dict) -> "Gadget":
        data = dict(data)
        name = data.pop("name")
        kind = data.pop("kind")
        block_dims = tuple(data.pop("block_dims"))
        exits = {d: tuple(p) for d, p in data.pop("exits").items()}
        forced = data.pop("forced")
        payload = data.pop("payload")
        return cls(
            name=name,
            kind=kind,
            block_dims=block_dims,
            exits=exits,
            forced_port=forced,
            payload=payload,
            meta=data,
        )


# ============================================================ the atlas


def _load_fixture(name: str) -> dict:
    fname = name.replace("-", "_") + ".json"
    path = resources.files("tmetakit").joinpath("fixtures", fname)
    return json.loads(path.read_text(encoding="utf-8"))


def builtin(name: str, n: int | None = None) -> Gadget:
    """Return a named gadget from the atlas.

    `zs3` accepts a value-band index `n`: the block's nonzero values are
    shifted by 3n so that distinct blocks in an assembled instance carry
    disjoint value triples. `gt{4k+1}` names outside the bundled set are
    built by `grandtour_family`. `ee9` is the synthesized entry-exit block
    with even-parity ports (see `entryexit_block9`).
    """
    if name == "ee9":
        if n is not None:
            raise ValueError("the value-band index n only applies to zs3")
        return entryexit_block9()
    if name in FIXTURE_GADGETS:
        g = Gadget.from_json(_load_fixture(name))
        if name == "zs3":
            shift = int(n or 0)
            if shift < 0:
                raise ValueError(f"value-band index must be >= 0, got {n}")
            if shift:
                values = [
                    [v + 3 * shift if v else 0 for v in row]
                    for row in g.payload["values"]
                ]
                payload = dict(g.payload, values=values)
                meta = dict(g.meta, block_index=shift)
                return Gadget(
                    g.name, g.kind, g.block_dims, g.exits, g.forced_port,
                    payload, meta,
                )
            return g
        if n is not None:
            raise ValueError("the value-band index n only applies to zs3")
        return g
    m = re.fullmatch(r"gt(\d+)", name)
    if m:
        s = int(m.group(1))
        if s >= 5 and s % 4 == 1:
            if n is not None:
                raise ValueError("the value-band index n only applies to zs3")
            return grandtour_family((s - 1) // 4)
    raise LookupError(
        f"unknown gadget {name!r}; available: "
        f"{', '.join(FIXTURE_GADGETS)}, ee9, gt{{4n+1}}"
    )


def _chain_edges(waypoints: list[Coord]) -> set[Edge]:
    """Unit edges along a polyline of axis-aligned waypoints."""
    out: set[Edge] = set()
    for (r1, c1), (r2, c2) in zip(waypoints, waypoints[1:]):
        if r1 == r2:
            step = 1 if c2 > c1 else -1
            for c in range(c1, c2, step):
                out.add(edge((r1, c), (r1, c + step)))
        elif c1 == c2:
            step = 1 if r2 > r1 else -1
            for r in range(r1, r2, step):
                out.add(edge((r, c1), (r + step, c1)))
        else:
            raise ValueError(f"waypoints not axis-aligned: {(r1, c1)} {(r2, c2)}")
    return out


def grandtour_family(n: int) -> Gadget:
    """The (4n+1)x(4n+1) grandtour block, n >= 1.

    Three serpentine runs of forced edges leave exactly three gaps on the
    block border, one at the centre of each of the left, right, and bottom
    sides; a covering cycle can only cross there. The bundled gt5/gt9/gt17
    fixtures equal this construction for n = 1, 2, 4.
    """
    if n < 1:
        raise ValueError(f"family index must be >= 1, got {n}")
    s, mid = 4 * n + 1, 2 * n
    chains = [
        [(mid, 0), (0, 0), (0, s - 1), (mid - 1, s - 1), (mid - 1, s - 2)],
        [(s - 2, mid + 1), (s - 1, mid + 1), (s - 1, s - 1), (mid, s - 1)],
        [(s - 1, mid), (s - 1, 0), (mid + 1, 0), (mid + 1, 1)],
    ]
    edges: set[Edge] = set()
    for ch in chains:
        edges |= _chain_edges(ch)
    payload = {
        "vrows": s,
        "vcols": s,
        "forced": sorted([list(a), list(b)] for a, b in edges),
    }
    exits = {
        "left": (mid, 0),
        "right": (mid, s - 1),
        "down": (s - 1, mid),
    }
    return Gadget(f"gt{s}", "grandtour", (s, s), exits, None, payload)


def _ee9_bands() -> tuple[tuple[Coord, ...], ...]:
    """The three border corridors of the synthesized 9x9 entry-exit block,
    each an ordered cell path starting at its port."""
    band_left = (
        [(r, 0) for r in range(4, -1, -1)]
        + [(0, c) for c in range(1, 9)]
        + [(1, 8), (2, 8), (3, 8), (3, 7)]
    )
    band_right = [(r, 8) for r in range(4, 9)] + [(8, 7), (8, 6), (8, 5), (7, 5)]
    band_down = [(8, c) for c in range(4, -1, -1)] + [(7, 0), (6, 0), (5, 0), (5, 1)]
    return tuple(tuple(b) for b in (band_left, band_right, band_down))


def entryexit_block9() -> Gadget:
    """A 9x9 entry-exit block with ports at the centres of three sides.

    The bundled 7x7 block's ports sit on the minority colour of the cell
    checkerboard, so no covering run between any two of its ports exists
    (see `verify_gadget`'s parity certificate on ee7). On a 9x9 block the
    side centres are majority-colour cells, so the same corridor idea
    yields a usable gadget: three width-1 corridors tile the border (one
    per port, each ending at its port cell), and the interior is left as
    free cells that an assembled instance turns into singleton regions.
    """
    rows = cols = 9
    bands = _ee9_bands()
    region = [[1] * cols for _ in range(rows)]
    for rid, band in zip((0, 2, 3), bands):
        for (r, c) in band:
            region[r][c] = rid
    walls: set[tuple[Coord, Coord]] = set()
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols and region[r][c] != region[r][c + 1]:
                walls.add(((r, c + 1), (r + 1, c + 1)))
            if r + 1 < rows and region[r][c] != region[r + 1][c]:
                walls.add(((r + 1, c), (r + 1, c + 1)))
    payload = {
        "rows": rows,
        "cols": cols,
        "walls": sorted([list(a), list(b)] for a, b in walls),
    }
    exits = {"left": (4, 0), "right": (4, 8), "down": (8, 4)}
    return Gadget("ee9", "entryexit", (rows, cols), exits, None, payload)


# ============================================================ transforms


def _transform_matrix(t: D4Transform, m: list[list], dims: Dims) -> list[list]:
    nr, nc = transformed_dims(t, dims)
    out = [[None] * nc for _ in range(nr)]
    for r in range(dims[0]):
        for c in range(dims[1]):
            ir, ic = apply_transform(t, (r, c), dims)
            out[ir][ic] = m[r][c]
    return out


def transform_gadget(g: Gadget, t: D4Transform) -> Gadget:
    """The gadget as placed under rotation/reflection `t`.

    Ports, the forced port, and every payload coordinate are mapped;
    verification commutes with this operation (the transformed gadget's
    report equals the original's with directions renamed by `t`)."""
    dims = g.block_dims
    new_dims = transformed_dims(t, dims)
    exits = {
        transform_dir(t, d): apply_transform(t, p, dims)
        for d, p in g.exits.items()
    }
    forced = transform_dir(t, g.forced_port) if g.forced_port else None
    payload = dict(g.payload)
    if g.kind == "grandtour":
        payload["vrows"], payload["vcols"] = new_dims
        payload["forced"] = sorted(
            sorted(
                [
                    list(apply_transform(t, tuple(a), dims)),
                    list(apply_transform(t, tuple(b), dims)),
                ]
            )
            for a, b in g.payload["forced"]
        )
    elif g.kind == "entryexit":
        lat = (dims[0] + 1, dims[1] + 1)
        payload["rows"], payload["cols"] = new_dims
        payload["walls"] = sorted(
            sorted(
                [
                    list(apply_transform(t, tuple(a), lat)),
                    list(apply_transform(t, tuple(b), lat)),
                ]
            )
            for a, b in g.payload["walls"]
        )
    elif g.kind == "yagit":
        lat = (dims[0] + 1, dims[1] + 1)
        payload["rows"], payload["cols"] = new_dims
        payload["animals"] = _transform_matrix(
            t, [list(row) for row in g.payload["animals"]], dims
        )
        payload["dots"] = sorted(
            list(apply_transform(t, tuple(p), lat)) for p in g.payload["dots"]
        )
    elif g.kind == "zahlen":
        payload["rows"], payload["cols"] = new_dims
        payload["values"] = _transform_matrix(
            t, [list(row) for row in g.payload["values"]], dims
        )
    meta = dict(g.meta)
    if "trail_cells" in meta:
        meta["trail_cells"] = [
            list(apply_transform(t, tuple(p), dims)) for p in meta["trail_cells"]
        ]
    return Gadget(g.name, g.kind, new_dims, exits, forced, payload, meta)


# ============================================================ verification


@dataclass(frozen=True)
class PairReport:
    """Verification result for one unordered port pair."""

    feasible: bool
    count: int
    truncated: bool
    certificate: str | None = None

    def to_json(self) -> dict:
        obj = {
            "feasible": self.feasible,
            "count": self.count,
            "truncated": self.truncated,
        }
        if self.certificate:
            obj["certificate"] = self.certificate
        return obj


@dataclass(frozen=True)
class GadgetReport:
    gadget: str
    kind: str
    pairs: tuple
    forced_ok: bool | None
    spurious: tuple
    findings: tuple
    type_c: dict | None
    counts_exact: bool

    def pair(self, a: str, b: str) -> PairReport:
        key = tuple(sorted((a, b)))
        for k, rep in self.pairs:
            if k == key:
                return rep
        raise KeyError(f"no such port pair {key}")

    @property
    def all_pairs_feasible(self) -> bool:
        return all(rep.feasible for _, rep in self.pairs)

    def to_json(self) -> dict:
        return {
            "gadget": self.gadget,
            "kind": self.kind,
            "pairs": {
                "+".join(k): rep.to_json() for k, rep in self.pairs
            },
            "forced_ok": self.forced_ok,
            "spurious": list(self.spurious),
            "findings": list(self.findings),
            "type_c": self.type_c,
            "counts_exact": self.counts_exact,
        }


def _pair_keys(exits: dict) -> list[tuple[str, str]]:
    dirs = sorted(exits)
    return [
        (dirs[i], dirs[j])
        for i in range(len(dirs))
        for j in range(i + 1, len(dirs))
    ]


def _forced_ok(g: Gadget, results: dict) -> bool | None:
    if g.forced_port is None:
        return None
    ok = True
    for key, rep in results.items():
        through = g.forced_port in key
        ok = ok and (rep.feasible == through)
    return ok


def regions_from_barriers(
    rows: int, cols: int, barriers: set[tuple[Coord, Coord]]
) -> list[list[int]]:
    """Flood-fill region ids for a cell grid cut by lattice segments.

    A barrier segment between lattice points blocks the cell adjacency it
    separates; the outer boundary is always closed. Region ids are dense
    and assigned in row-major order of each region's first cell."""

    def blocked(a: Coord, b: Coord) -> bool:
        (r1, c1), (r2, c2) = a, b
        if r1 == r2:  # horizontal neighbours: vertical segment between
            c = max(c1, c2)
            seg = ((r1, c), (r1 + 1, c))
        else:  # vertical neighbours: horizontal segment between
            r = max(r1, r2)
            seg = ((r, c1), (r, c1 + 1))
        return seg in barriers

    region = [[-1] * cols for _ in range(rows)]
    next_id = 0
    for r0 in range(rows):
        for c0 in range(cols):
            if region[r0][c0] != -1:
                continue
            stack = [(r0, c0)]
            region[r0][c0] = next_id
            while stack:
                cur = stack.pop()
                for nb in neighbors(cur, (rows, cols)):
                    if region[nb[0]][nb[1]] == -1 and not blocked(cur, nb):
                        region[nb[0]][nb[1]] = next_id
                        stack.append(nb)
            next_id += 1
    return region


@dataclass(frozen=True)
class EntryExitStructure:
    """Derived corridor structure of an entry-exit gadget payload."""

    region_of: tuple  # dense region id per cell
    bands: tuple  # ordered cell paths (multi-cell width-1 regions)
    free_cells: tuple  # cells of non-corridor regions
    forced: tuple  # cell-graph edges forced by corridor contiguity
    findings: tuple


def entryexit_structure(g: Gadget) -> EntryExitStructure:
    rows, cols = g.block_dims
    walls = {
        (tuple(a), tuple(b))
        for a, b in (tuple(seg) for seg in g.payload["walls"])
    }
    region = regions_from_barriers(rows, cols, walls)
    by_id: dict[int, list[Coord]] = {}
    for r in range(rows):
        for c in range(cols):
            by_id.setdefault(region[r][c], []).append((r, c))
    bands: list[tuple[Coord, ...]] = []
    free: list[Coord] = []
    findings: list[dict] = []
    band_of_cell: dict[Coord, int] = {}
    for rid in sorted(by_id):
        cells = by_id[rid]
        cellset = set(cells)
        deg = {
            p: sum(1 for nb in neighbors(p, (rows, cols)) if nb in cellset)
            for p in cells
        }
        ends = sorted(p for p, d in deg.items() if d == 1)
        is_path = (
            len(cells) >= 2
            and all(d <= 2 for d in deg.values())
            and len(ends) == 2
            and sum(deg.values()) == 2 * (len(cells) - 1)
        )
        if is_path:
            # order the corridor from one end
            order = [ends[0]]
            seen = {ends[0]}
            while len(order) < len(cells):
                cur = order[-1]
                nxt = [
                    nb
                    for nb in neighbors(cur, (rows, cols))
                    if nb in cellset and nb not in seen
                ]
                order.append(nxt[0])
                seen.add(nxt[0])
            for p in order:
                band_of_cell[p] = len(bands)
            bands.append(tuple(order))
        else:
            free.extend(cells)
            if len(cells) > 1:
                findings.append(
                    {
                        "kind": "free-region",
                        "detail": (
                            f"region {rid} ({len(cells)} cells) is not a "
                            "width-1 corridor; an assembled instance splits "
                            "it into singleton regions"
                        ),
                    }
                )
    # every border cell should be armoured by a corridor
    border = [
        (r, c)
        for r in range(rows)
        for c in range(cols)
        if r in (0, rows - 1) or c in (0, cols - 1)
    ]
    bare = [p for p in border if p not in band_of_cell]
    if bare:
        findings.append(
            {
                "kind": "unarmoured-border",
                "detail": f"border cells outside any corridor: {sorted(bare)}",
            }
        )
    # ports must be corridor ends so a crossing continues the corridor arc
    for d, p in sorted(g.exits.items()):
        bid = band_of_cell.get(p)
        if bid is None or p not in (bands[bid][0], bands[bid][-1]):
            findings.append(
                {
                    "kind": "port-not-corridor-end",
                    "detail": f"port {d} at {p} does not end a corridor",
                }
            )
    forced: list[Edge] = []
    for band in bands:
        for a, b in zip(band, band[1:]):
            forced.append(edge(a, b))
    return EntryExitStructure(
        region_of=tuple(tuple(row) for row in region),
        bands=tuple(bands),
        free_cells=tuple(sorted(free)),
        forced=tuple(sorted(forced)),
        findings=tuple(findings),
    )


def _cover_pair_reports(
    g: Gadget,
    dims: Dims,
    forced: list[Edge],
    cap: int | None,
    node_budget: int | None,
) -> tuple[dict, list[dict], list[dict]]:
    """Port-pair coverage search shared by grandtour and entry-exit.

    The block is modelled as its grid graph with `forced` edges; a pair
    traversal is a Hamiltonian path between the two port cells, found as a
    single covering cycle after adding one virtual forced edge between
    them. Checkerboard parity rules out pairs (and closed tours) without
    search where applicable; certificates say so."""
    rows, cols = dims
    n = rows * cols

    def vid(p: Coord) -> int:
        return p[0] * cols + p[1]

    base_edges = edges_of_grid(dims)
    edge_index = {e: i for i, e in enumerate(base_edges)}
    idx_edges = [(vid(a), vid(b)) for a, b in base_edges]
    forced_idx = frozenset(edge_index[e] for e in forced)

    def color(p: Coord) -> int:
        return (p[0] + p[1]) % 2

    n_even = sum(1 for r in range(rows) for c in range(cols) if (r + c) % 2 == 0)
    majority = 0 if n_even * 2 > n else (1 if n_even * 2 < n else None)

    results: dict = {}
    findings: list[dict] = []
    spurious: list[dict] = []
    certified_pairs = []
    for key in _pair_keys(g.exits):
        p1, p2 = g.exits[key[0]], g.exits[key[1]]
        cert = None
        if n % 2 == 1:
            if color(p1) != majority or color(p2) != majority:
                cert = (
                    "checkerboard parity: a covering path on an odd block "
                    "must end on two majority-colour cells"
                )
        else:
            if color(p1) == color(p2):
                cert = (
                    "checkerboard parity: a covering path on an even block "
                    "must end on opposite-colour cells"
                )
        if cert:
            results[key] = PairReport(False, 0, False, cert)
            certified_pairs.append(key)
            continue
        virt = (vid(p1), vid(p2))
        sols, truncated = enumerate_covers(
            n,
            idx_edges + [virt],
            forced=sorted(forced_idx | {len(idx_edges)}),
            single_cycle=True,
            cap=cap,
            node_budget=node_budget,
        )
        results[key] = PairReport(len(sols) > 0, len(sols), truncated)
    if certified_pairs:
        findings.append(
            {
                "kind": "port-parity-obstruction",
                "detail": (
                    "pairs impossible by checkerboard parity: "
                    + ", ".join("+".join(k) for k in certified_pairs)
                ),
            }
        )
    # a closed tour that never leaves the block would let the block
    # satisfy itself; odd blocks cannot have one (bipartite parity)
    if n % 2 == 1:
        findings.append(
            {
                "kind": "closed-tour-impossible",
                "detail": (
                    "no port-free closed tour exists: a covering cycle "
                    "needs an even cell count"
                ),
            }
        )
    else:
        sols, _ = enumerate_covers(
            n,
            idx_edges,
            forced=sorted(forced_idx),
            single_cycle=True,
            cap=1,
            node_budget=node_budget,
        )
        if sols:
            spurious.append(
                {
                    "kind": "closed-tour",
                    "detail": "the block admits a covering tour using no port",
                }
            )
    findings.append(
        {
            "kind": "odd-port-usage-impossible",
            "detail": (
                "fragments using 1 or 3 ports cannot occur: covered "
                "fragments end only at used ports, and path end counts "
                "are even"
            ),
        }
    )
    return results, findings, spurious


def _verify_grandtour(g, cap, node_budget) -> GadgetReport:
    dims = (g.payload["vrows"], g.payload["vcols"])
    forced = [edge(tuple(a), tuple(b)) for a, b in g.payload["forced"]]
    results, findings, spurious = _cover_pair_reports(
        g, dims, forced, cap, node_budget
    )
    return _assemble(g, results, findings, spurious, None)


def _verify_entryexit(g, cap, node_budget) -> GadgetReport:
    structure = entryexit_structure(g)
    results, findings, spurious = _cover_pair_reports(
        g, g.block_dims, list(structure.forced), cap, node_budget
    )
    findings = list(structure.findings) + findings
    return _assemble(g, results, tuple(findings), spurious, None)


# The three line patterns that can traverse a 3x3 yagit block, as strand
# waypoint polylines in the canonical orientation (forced port left,
# missing side up). Types a and b use two ports; type c threads all three.
YAGIT_STRANDS = {
    "a": (((1, 0), (1, 3)), ((2, 0), (2, 3))),
    "b": (((1, 0), (1, 2), (3, 2)), ((2, 0), (2, 1), (3, 1))),
    "c": (((1, 0), (1, 2), (3, 2)), ((2, 0), (2, 3))),
}

#: canonical port pair realized by each two-port pattern
YAGIT_PATTERN_PAIRS = {"a": ("left", "right"), "b": ("left", "down")}


def _strand_segments(strand: tuple[Coord, ...]) -> list[tuple[Coord, Coord]]:
    segs: list[tuple[Coord, Coord]] = []
    for a, b in zip(strand, strand[1:]):
        (r1, c1), (r2, c2) = a, b
        if r1 == r2:
            step = 1 if c2 > c1 else -1
            for c in range(c1, c2, step):
                segs.append(
                    tuple(sorted([(r1, c), (r1, c + step)]))
                )
        else:
            step = 1 if r2 > r1 else -1
            for r in range(r1, r2, step):
                segs.append(
                    tuple(sorted([(r, c1), (r + step, c1)]))
                )
    return segs


def _canonical_transform(g: Gadget) -> D4Transform:
    """The placement transform mapping the canonical frame (missing side
    up, forced port left) onto this gadget's frame."""
    from .grid import ALL_TRANSFORMS

    for t in ALL_TRANSFORMS:
        if (
            transform_dir(t, "up") == g.missing_side
            and transform_dir(t, "left") == g.forced_port
        ):
            return t
    raise ValueError(
        f"no transform maps canonical frame onto {g.missing_side}/{g.forced_port}"
    )


def _port_boundary_points(g: Gadget, side: str) -> set[Coord]:
    """Lattice points where a strand may cross `side` (the port cell's
    outer edge)."""
    rows, cols = g.block_dims
    r, c = g.exits[side]
    if side == "up":
        return {(0, c), (0, c + 1)}
    if side == "down":
        return {(rows, c), (rows, c + 1)}
    if side == "left":
        return {(r, 0), (r + 1, 0)}
    return {(r, cols), (r + 1, cols)}


def _check_yagit_pattern(
    g: Gadget, inst: YagitInstance, strands: tuple
) -> tuple[bool, list[str], set[str]]:
    """Legality of a mapped strand pair inside the block; returns
    (legal, problems, sides used)."""
    rows, cols = g.block_dims
    problems: list[str] = []
    allowed_boundary: dict[Coord, str] = {}
    for d in g.exits:
        for p in _port_boundary_points(g, d):
            allowed_boundary[p] = d
    sides_used: set[str] = set()
    seg_sets = []
    point_runs = []
    for strand in strands:
        for wp in strand:
            if not (0 <= wp[0] <= rows and 0 <= wp[1] <= cols):
                problems.append(f"waypoint {wp} outside the block lattice")
        for p in (strand[0], strand[-1]):
            on_border = p[0] in (0, rows) or p[1] in (0, cols)
            if not on_border:
                problems.append(f"strand end {p} not on the block border")
            elif p not in allowed_boundary:
                problems.append(f"strand end {p} not at a port crossing")
            else:
                sides_used.add(allowed_boundary[p])
        for wp in strand[1:-1]:
            if wp not in inst.dots:
                problems.append(f"turn at {wp} has no dot")
        segs = _strand_segments(strand)
        if len(set(segs)) != len(segs):
            problems.append("strand repeats a segment")
        pts: list[Coord] = [strand[0]]
        for a, b in segs:
            pts.append(b if pts[-1] == a else a)
        seg_sets.append(set(segs))
        point_runs.append(pts)
    if seg_sets[0] & seg_sets[1]:
        problems.append("strands share a segment")
    crossings = (set(point_runs[0]) & set(point_runs[1])) - {
        p for s in strands for p in (s[0], s[-1])
    }
    for p in crossings:
        if p in inst.dots:
            problems.append(f"strands cross at a dot {p}")
    # strands partition the block; each pocket may hold one animal type
    barriers = seg_sets[0] | seg_sets[1]
    region = regions_from_barriers(rows, cols, barriers)
    pockets: dict[int, set[str]] = {}
    for r in range(rows):
        for c in range(cols):
            a = inst.animals[r][c]
            if a != ".":
                pockets.setdefault(region[r][c], set()).add(a)
    for rid, kinds in sorted(pockets.items()):
        if len(kinds) > 1:
            problems.append(f"pocket {rid} mixes animals {sorted(kinds)}")
    # empty pockets are fine here: they open into neighbouring blocks
    # once the block is assembled into a full instance
    return (not problems, problems, sides_used)


def _verify_yagit(g, cap, node_budget) -> GadgetReport:
    if g.forced_port is None:
        raise UnsupportedGadgetError(
            g.name,
            "yagit framing blocks have no forced port and are fixed in "
            "place by the reducer",
        )
    inst = YagitInstance(
        g.payload["rows"],
        g.payload["cols"],
        tuple(tuple(row) for row in g.payload["animals"]),
        frozenset(tuple(p) for p in g.payload["dots"]),
    )
    t = _canonical_transform(g)
    lat = (g.payload["rows"] + 1, g.payload["cols"] + 1)

    def map_strand(strand):
        return tuple(apply_transform(t, p, lat) for p in strand)

    findings: list[dict] = []
    results: dict = {}
    for key in _pair_keys(g.exits):
        results[key] = PairReport(False, 0, False)
    type_c = None
    for name in sorted(YAGIT_STRANDS):
        strands = tuple(map_strand(s) for s in YAGIT_STRANDS[name])
        legal, problems, sides = _check_yagit_pattern(g, inst, strands)
        if not legal:
            findings.append(
                {
                    "kind": "pattern-illegal",
                    "detail": f"type-{name} traversal: " + "; ".join(problems),
                }
            )
        if name == "c":
            type_c = {"legal": legal, "sides": sorted(sides)}
            continue
        d1, d2 = YAGIT_PATTERN_PAIRS[name]
        key = tuple(sorted((transform_dir(t, d1), transform_dir(t, d2))))
        if legal:
            results[key] = PairReport(True, 1, False)
    unforced = tuple(sorted(d for d in g.exits if d != g.forced_port))
    results[unforced] = PairReport(
        False,
        0,
        False,
        "no traversal pattern avoids the forced port",
    )
    return _assemble(g, results, tuple(findings), (), type_c)


def _verify_zahlen(g, cap, node_budget) -> GadgetReport:
    if "trail_cells" in g.meta:
        raise UnsupportedGadgetError(
            g.name,
            "the zahlen corner is a framing block crossed by both the "
            "value trail and the block circuit",
        )
    rows, cols = g.block_dims
    values = g.payload["values"]
    wanted = frozenset(v for row in values for v in row if v)

    def runs_between(start: Coord, goals: set[Coord], cap_n):
        """Simple paths over nonzero cells covering each wanted value
        exactly once, from start to any goal; returns (end, count) map."""
        counts: dict[Coord, int] = {}
        seen_values = {values[start[0]][start[1]]}
        path = [start]
        visited = {start}

        def rec():
            cur = path[-1]
            if seen_values == wanted and cur in goals and len(path) > 1:
                counts[cur] = counts.get(cur, 0) + 1
            for nb in neighbors(cur, (rows, cols)):
                v = values[nb[0]][nb[1]]
                if v == 0 or nb in visited or v in seen_values:
                    continue
                path.append(nb)
                visited.add(nb)
                seen_values.add(v)
                rec()
                path.pop()
                visited.remove(nb)
                seen_values.remove(v)

        if values[start[0]][start[1]] != 0:
            rec()
        return counts

    results: dict = {}
    port_cells = {d: p for d, p in g.exits.items()}
    all_cells = {(r, c) for r in range(rows) for c in range(cols)}
    spurious: list[dict] = []
    pair_counts: dict = {key: 0 for key in _pair_keys(g.exits)}
    for d, p in sorted(port_cells.items()):
        counts = runs_between(p, all_cells, cap)
        for end, cnt in sorted(counts.items()):
            end_dirs = [dd for dd, pp in port_cells.items() if pp == end]
            if end_dirs:
                key = tuple(sorted((d, end_dirs[0])))
                if key in pair_counts:
                    pair_counts[key] += cnt
            else:
                spurious.append(
                    {
                        "kind": "off-port-terminating-run",
                        "detail": (
                            f"a value-covering run from port {d} can end "
                            f"at interior cell {end}"
                        ),
                    }
                )
    for key, cnt in pair_counts.items():
        # each unordered pair was counted once from either end
        assert cnt % 2 == 0, (key, cnt)
        results[key] = PairReport(cnt > 0, cnt // 2, False)
    findings = (
        {
            "kind": "single-run-certificate",
            "detail": (
                "a block is crossed by exactly one run: two runs would "
                "need four distinct port cells, and only three exist"
            ),
        },
    )
    return _assemble(g, results, findings, tuple(spurious), None)


def _assemble(g, results, findings, spurious, type_c) -> GadgetReport:
    pairs = tuple(sorted(results.items()))
    counts_exact = all(not rep.truncated for _, rep in pairs)
    return GadgetReport(
        gadget=g.name,
        kind=g.kind,
        pairs=pairs,
        forced_ok=_forced_ok(g, results),
        spurious=tuple(spurious),
        findings=tuple(findings),
        type_c=type_c,
        counts_exact=counts_exact,
    )


def verify_gadget(
    g: Gadget, *, cap: int | None = None, node_budget: int | None = None
) -> GadgetReport:
    """Certify a gadget's port behaviour by exhaustive search.

    `cap` bounds the per-pair traversal count (the pair is still proven
    feasible/infeasible; counts above the cap are reported truncated).
    `node_budget` bounds search effort and raises `BudgetExceeded` rather
    than silently passing."""
    if g.kind == "grandtour":
        return _verify_grandtour(g, cap, node_budget)
    if g.kind == "entryexit":
        return _verify_entryexit(g, cap, node_budget)
    if g.kind == "yagit":
        return _verify_yagit(g, cap, node_budget)
    if g.kind == "zahlen":
        return _verify_zahlen(g, cap, node_budget)
    raise ValueError(f"unknown gadget kind {g.kind!r}")
