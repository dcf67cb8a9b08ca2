"""Grid-puzzle toolkit: solvers, gadget atlas, and Hamiltonicity reductions.

The package covers four loop/path puzzles on rectangular grids (Grand Tour,
Entry-Exit, Yagit, Zahlenschlange), a metacell abstraction for
degree-constrained grid-graph Hamiltonian cycles, a verified gadget atlas,
and reductions that compile metacell instances into each puzzle.
"""

from __future__ import annotations

from . import (
    cli,
    entryexit,
    gadgets,
    grandtour,
    grid,
    metacell,
    reducer,
    render,
    yagit,
    zahlen,
)

__version__ = "0.1.0"

__all__ = [
    "cli",
    "entryexit",
    "gadgets",
    "grandtour",
    "grid",
    "metacell",
    "reducer",
    "render",
    "yagit",
    "zahlen",
    "__version__",
]
