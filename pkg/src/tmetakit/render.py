"""ASCII and SVG pictures of puzzle instances, solutions, and gadgets.

Both formats are deterministic: identical inputs yield byte-identical
documents. ASCII targets terminals and golden-file diffs; SVG is
dependency-free vector output with integer geometry.
"""

from __future__ import annotations

from . import entryexit, gadgets, grandtour, metacell, yagit, zahlen
from .grid import DIR_DELTA, DIRS, Coord

__all__ = [
    "ascii_entryexit",
    "ascii_gadget",
    "ascii_grandtour",
    "ascii_metacell",
    "ascii_yagit",
    "ascii_zahlen",
    "render",
    "svg_entryexit",
    "svg_gadget",
    "svg_grandtour",
    "svg_metacell",
    "svg_yagit",
    "svg_zahlen",
]

# fixed fill palette for regions / multiple lines (cycled)
_PALETTE = (
    "#bcd8f0", "#f0d8bc", "#c8e8c8", "#e8c8e8",
    "#f0f0b8", "#c8e0e8", "#e8d0c0", "#d8c8f0",
)
_LINE_PALETTE = ("#1f5fa8", "#b33a3a", "#2e7d32", "#8e44ad", "#b8860b")

_CELL = 24  # svg pixels per grid step
_MARGIN = 24


# ============================================================ ascii canvas


class _Canvas:
    def __init__(self, height: int, width: int):
        self._rows = [[" "] * width for _ in range(height)]

    def put(self, r: int, c: int, ch: str) -> None:
        self._rows[r][c] = ch

    def text(self, r: int, c: int, s: str) -> None:
        for i, ch in enumerate(s):
            self._rows[r][c + i] = ch

    def __str__(self) -> str:
        return "\n".join("".join(row).rstrip() for row in self._rows) + "\n"


def _region_char(rid: int) -> str:
    digits = "0123456789abcdefghijklmnopqrstuvwxyz"
    return digits[rid] if rid < len(digits) else "?"


# ============================================================ ascii renderers


def ascii_grandtour(inst: grandtour.GrandTourInstance, loop=None) -> str:
    """Vertex lattice; forced edges as '='/':', loop edges as '-'/'|'."""
    cv = _Canvas(2 * inst.vrows - 1, 2 * inst.vcols - 1)
    for r in range(inst.vrows):
        for c in range(inst.vcols):
            cv.put(2 * r, 2 * c, "o")

    def draw(e, horiz_ch, vert_ch):
        (r1, c1), (r2, c2) = e
        cv.put(r1 + r2, c1 + c2, horiz_ch if r1 == r2 else vert_ch)

    for e in sorted(loop or ()):
        draw(e, "-", "|")
    for e in sorted(inst.forced):
        draw(e, "=", ":")
    return str(cv)


def ascii_entryexit(inst: entryexit.EntryExitInstance, loop=None) -> str:
    """Cells show their region id; the loop runs '-'/'|' between cells."""
    cv = _Canvas(2 * inst.rows - 1, 2 * inst.cols - 1)
    for r in range(inst.rows):
        for c in range(inst.cols):
            cv.put(2 * r, 2 * c, _region_char(inst.region((r, c))))
    if loop:
        n = len(loop)
        for k in range(n):
            (r1, c1), (r2, c2) = loop[k], loop[(k + 1) % n]
            cv.put(r1 + r2, c1 + c2, "-" if r1 == r2 else "|")
    return str(cv)


def ascii_zahlen(inst: zahlen.ZahlenInstance, path=None) -> str:
    """Right-aligned values; the path runs '-'/'|' between cells."""
    w = max(len(str(v)) for row in inst.values for v in row)
    cv = _Canvas(2 * inst.rows - 1, inst.cols * (w + 1) - 1)
    for r in range(inst.rows):
        for c in range(inst.cols):
            cv.text(2 * r, c * (w + 1), str(inst.value((r, c))).rjust(w))
    if path:
        for (r1, c1), (r2, c2) in zip(path, path[1:]):
            if r1 == r2:
                cv.put(2 * r1, max(c1, c2) * (w + 1) - 1, "-")
            else:
                cv.put(r1 + r2, c1 * (w + 1) + w - 1, "|")
    return str(cv)


def ascii_yagit(inst: yagit.YagitInstance, lines=None) -> str:
    """Lattice points '+' ('*' at dots), animals in cells, lines '-'/'|'."""
    cv = _Canvas(2 * inst.rows + 1, 2 * inst.cols + 1)
    for pr in range(inst.rows + 1):
        for pc in range(inst.cols + 1):
            cv.put(2 * pr, 2 * pc, "*" if (pr, pc) in inst.dots else "+")
    for r in range(inst.rows):
        for c in range(inst.cols):
            a = inst.animal((r, c))
            if a != ".":
                cv.put(2 * r + 1, 2 * c + 1, a)
    for line in lines or ():
        for (r1, c1), (r2, c2) in zip(line, line[1:]):
            cv.put(r1 + r2, c1 + c2, "-" if r1 == r2 else "|")
    return str(cv)


def ascii_metacell(inst: metacell.MetacellGridInstance, cycle=None) -> str:
    """Cells 'o'; allowed seams '.', forced exits '='/':', cycle '-'/'|'."""
    cv = _Canvas(2 * inst.rows - 1, 2 * inst.cols - 1)
    for r in range(inst.rows):
        for c in range(inst.cols):
            cv.put(2 * r, 2 * c, "o")

    def draw(e, horiz_ch, vert_ch):
        (r1, c1), (r2, c2) = e
        cv.put(r1 + r2, c1 + c2, horiz_ch if r1 == r2 else vert_ch)

    for e in metacell.allowed_edges(inst):
        draw(e, ".", ".")
    if cycle:
        for e in sorted(cycle):
            draw(e, "-", "|")
    for e in metacell.forced_edges(inst):
        draw(e, "=", ":")
    return str(cv)


def ascii_gadget(g: gadgets.Gadget) -> str:
    """The gadget's payload drawn as its puzzle kind, plus a port legend."""
    body = _payload_ascii(g)
    ports = ", ".join(
        f"{d}={g.port(d)}" for d in DIRS if d in g.exits
    )
    legend = (
        f"gadget {g.name} kind={g.kind} dims={g.block_dims}\n"
        f"ports: {ports}; forced={g.forced_port}; missing={g.missing_side}\n"
    )
    return legend + body


def _payload_ascii(g: gadgets.Gadget) -> str:
    if g.kind == "grandtour":
        return ascii_grandtour(grandtour.GrandTourInstance.from_json(g.payload))
    if g.kind == "entryexit":
        return ascii_entryexit(entryexit.EntryExitInstance.from_json(g.payload))
    if g.kind == "yagit":
        return ascii_yagit(yagit.YagitInstance.from_json(g.payload))
    if g.kind == "zahlen":
        return ascii_zahlen(zahlen.ZahlenInstance.from_json(g.payload))
    raise ValueError(f"no ascii renderer for gadget kind {g.kind!r}")


# ============================================================ svg helpers


def _svg_doc(width: int, height: int, body: list[str]) -> str:
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">'
    )
    return "\n".join([head, *body, "</svg>"]) + "\n"


def _px(r: int, c: int) -> tuple[int, int]:
    """Pixel centre of grid position (row, col): x from col, y from row."""
    return (_MARGIN + _CELL * c, _MARGIN + _CELL * r)


def _svg_line(a: Coord, b: Coord, stroke: str, width: int) -> str:
    (x1, y1), (x2, y2) = _px(*a), _px(*b)
    return (
        f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
        f'stroke="{stroke}" stroke-width="{width}" stroke-linecap="round"/>'
    )


def _svg_circle(p: Coord, radius: int, fill: str) -> str:
    x, y = _px(*p)
    return f'<circle cx="{x}" cy="{y}" r="{radius}" fill="{fill}"/>'


def _svg_text(p: Coord, s: str, size: int = 12, fill: str = "#222") -> str:
    x, y = _px(*p)
    return (
        f'<text x="{x}" y="{y}" font-family="monospace" font-size="{size}" '
        f'fill="{fill}" text-anchor="middle" dominant-baseline="central">'
        f"{s}</text>"
    )


def _svg_cell_rect(r: int, c: int, fill: str, stroke: str = "#999") -> str:
    x, y = _px(r, c)
    h = _CELL // 2
    return (
        f'<rect x="{x - h}" y="{y - h}" width="{_CELL}" height="{_CELL}" '
        f'fill="{fill}" stroke="{stroke}" stroke-width="1"/>'
    )


def _svg_polyline(points, stroke: str, width: int, closed: bool) -> str:
    coords = " ".join("{},{}".format(*_px(*p)) for p in points)
    tag = "polygon" if closed else "polyline"
    return (
        f'<{tag} points="{coords}" fill="none" stroke="{stroke}" '
        f'stroke-width="{width}" stroke-linejoin="round" '
        f'stroke-linecap="round"/>'
    )


# ============================================================ svg renderers


def svg_grandtour(inst: grandtour.GrandTourInstance, loop=None) -> str:
    body: list[str] = []
    for e in sorted(loop or ()):
        body.append(_svg_line(*e, stroke="#222", width=3))
    for e in sorted(inst.forced):
        body.append(_svg_line(*e, stroke="#c2352b", width=5))
    for r in range(inst.vrows):
        for c in range(inst.vcols):
            body.append(_svg_circle((r, c), 3, "#222"))
    w = 2 * _MARGIN + _CELL * (inst.vcols - 1)
    h = 2 * _MARGIN + _CELL * (inst.vrows - 1)
    return _svg_doc(w, h, body)


def svg_entryexit(inst: entryexit.EntryExitInstance, loop=None) -> str:
    body: list[str] = []
    for r in range(inst.rows):
        for c in range(inst.cols):
            fill = _PALETTE[inst.region((r, c)) % len(_PALETTE)]
            body.append(_svg_cell_rect(r, c, fill, stroke="none"))
    # region borders: seams between differing neighbours plus the outer frame
    h = _CELL // 2
    for r in range(inst.rows):
        for c in range(inst.cols):
            x, y = _px(r, c)
            if c + 1 < inst.cols and inst.region((r, c)) != inst.region((r, c + 1)):
                body.append(
                    f'<line x1="{x + h}" y1="{y - h}" x2="{x + h}" '
                    f'y2="{y + h}" stroke="#333" stroke-width="2"/>'
                )
            if r + 1 < inst.rows and inst.region((r, c)) != inst.region((r + 1, c)):
                body.append(
                    f'<line x1="{x - h}" y1="{y + h}" x2="{x + h}" '
                    f'y2="{y + h}" stroke="#333" stroke-width="2"/>'
                )
    x0, y0 = _px(0, 0)
    body.append(
        f'<rect x="{x0 - h}" y="{y0 - h}" width="{_CELL * inst.cols}" '
        f'height="{_CELL * inst.rows}" fill="none" stroke="#333" '
        f'stroke-width="2"/>'
    )
    if loop:
        body.append(_svg_polyline(loop, "#222", 3, closed=True))
    w = 2 * _MARGIN + _CELL * (inst.cols - 1)
    h2 = 2 * _MARGIN + _CELL * (inst.rows - 1)
    return _svg_doc(w, h2, body)


def svg_zahlen(inst: zahlen.ZahlenInstance, path=None) -> str:
    body: list[str] = []
    for r in range(inst.rows):
        for c in range(inst.cols):
            body.append(_svg_cell_rect(r, c, "#ffffff"))
    if path:
        body.append(_svg_polyline(path, "#1f5fa8", 3, closed=inst.closed))
        if not inst.closed:
            body.append(_svg_circle(path[0], 5, "#1f5fa8"))
            body.append(_svg_circle(path[-1], 5, "#1f5fa8"))
    for r in range(inst.rows):
        for c in range(inst.cols):
            body.append(_svg_text((r, c), str(inst.value((r, c)))))
    w = 2 * _MARGIN + _CELL * (inst.cols - 1)
    h = 2 * _MARGIN + _CELL * (inst.rows - 1)
    return _svg_doc(w, h, body)


def svg_yagit(inst: yagit.YagitInstance, lines=None) -> str:
    """Lattice of (rows+1)x(cols+1) points; cells sit between them."""
    body: list[str] = []
    # cells: shift by half a step so lattice point (r, c) is a cell corner
    half = _CELL // 2
    for r in range(inst.rows):
        for c in range(inst.cols):
            a = inst.animal((r, c))
            fill = {"S": "#dcead2", "W": "#ead2d2", ".": "#ffffff"}[a]
            x, y = _px(r, c)
            body.append(
                f'<rect x="{x}" y="{y}" width="{_CELL}" height="{_CELL}" '
                f'fill="{fill}" stroke="#bbb" stroke-width="1"/>'
            )
    for r in range(inst.rows):
        for c in range(inst.cols):
            a = inst.animal((r, c))
            if a != ".":
                x, y = _px(r, c)
                body.append(
                    f'<text x="{x + half}" y="{y + half}" '
                    f'font-family="monospace" font-size="12" fill="#222" '
                    f'text-anchor="middle" dominant-baseline="central">'
                    f"{a}</text>"
                )
    for i, line in enumerate(lines or ()):
        color = _LINE_PALETTE[i % len(_LINE_PALETTE)]
        closed = len(line) > 1 and line[0] == line[-1]
        pts = line[:-1] if closed else line
        body.append(_svg_polyline(pts, color, 3, closed=closed))
    for pr, pc in sorted(
        (pr, pc) for pr in range(inst.rows + 1) for pc in range(inst.cols + 1)
    ):
        if (pr, pc) in inst.dots:
            body.append(_svg_circle((pr, pc), 4, "#111"))
        else:
            body.append(_svg_circle((pr, pc), 1, "#888"))
    w = 2 * _MARGIN + _CELL * inst.cols
    h = 2 * _MARGIN + _CELL * inst.rows
    return _svg_doc(w, h, body)


def svg_metacell(inst: metacell.MetacellGridInstance, cycle=None) -> str:
    body: list[str] = []
    stub = _CELL // 3
    for r in range(inst.rows):
        for c in range(inst.cols):
            spec = inst.spec((r, c))
            x, y = _px(r, c)
            for d in DIRS:
                if d not in spec.exits:
                    continue
                dr, dc = DIR_DELTA[d]
                color = "#c2352b" if spec.forced == d else "#888"
                body.append(
                    f'<line x1="{x}" y1="{y}" x2="{x + dc * stub}" '
                    f'y2="{y + dr * stub}" stroke="{color}" '
                    f'stroke-width="2"/>'
                )
    if cycle:
        for e in sorted(cycle):
            body.append(_svg_line(*e, stroke="#222", width=3))
    for r in range(inst.rows):
        for c in range(inst.cols):
            body.append(_svg_circle((r, c), 4, "#222"))
    w = 2 * _MARGIN + _CELL * (inst.cols - 1)
    h = 2 * _MARGIN + _CELL * (inst.rows - 1)
    return _svg_doc(w, h, body)


def svg_gadget(g: gadgets.Gadget) -> str:
    """The payload drawing plus port markers and a caption."""
    base = _payload_svg(g)
    # graft extra elements before the closing tag
    closing = "</svg>\n"
    assert base.endswith(closing)
    extra: list[str] = []
    for d in sorted(g.exits):
        p = g.port(d)
        x, y = _px(*p)
        color = "#c2352b" if g.forced_port == d else "#1f5fa8"
        extra.append(
            f'<circle cx="{x}" cy="{y}" r="7" fill="none" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    extra.append(
        f'<text x="{_MARGIN}" y="{_MARGIN // 2}" font-family="monospace" '
        f'font-size="11" fill="#222">{g.name} ({g.kind}; '
        f"forced={g.forced_port}; missing={g.missing_side})</text>"
    )
    return base[: -len(closing)] + "\n".join(extra) + "\n" + closing


def _payload_svg(g: gadgets.Gadget) -> str:
    if g.kind == "grandtour":
        return svg_grandtour(grandtour.GrandTourInstance.from_json(g.payload))
    if g.kind == "entryexit":
        return svg_entryexit(entryexit.EntryExitInstance.from_json(g.payload))
    if g.kind == "yagit":
        return svg_yagit(yagit.YagitInstance.from_json(g.payload))
    if g.kind == "zahlen":
        return svg_zahlen(zahlen.ZahlenInstance.from_json(g.payload))
    raise ValueError(f"no svg renderer for gadget kind {g.kind!r}")


# ============================================================ dispatcher


_BY_TYPE = {
    grandtour.GrandTourInstance: (ascii_grandtour, svg_grandtour),
    entryexit.EntryExitInstance: (ascii_entryexit, svg_entryexit),
    yagit.YagitInstance: (ascii_yagit, svg_yagit),
    zahlen.ZahlenInstance: (ascii_zahlen, svg_zahlen),
    metacell.MetacellGridInstance: (ascii_metacell, svg_metacell),
}


def render(obj, solution=None, fmt: str = "ascii") -> str:
    """Draw an instance (optionally with a solution) or a gadget."""
    if fmt not in ("ascii", "svg"):
        raise ValueError(f"unknown render format {fmt!r}")
    if isinstance(obj, gadgets.Gadget):
        if solution is not None:
            raise ValueError("gadgets are drawn without a solution overlay")
        return ascii_gadget(obj) if fmt == "ascii" else svg_gadget(obj)
    for klass, (fn_ascii, fn_svg) in _BY_TYPE.items():
        if isinstance(obj, klass):
            fn = fn_ascii if fmt == "ascii" else fn_svg
            return fn(obj, solution)
    raise ValueError(f"no renderer for {type(obj).__name__}")
