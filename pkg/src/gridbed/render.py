"""ASCII and SVG drawings of grid embeddings, plus an optional matplotlib figure."""

from __future__ import annotations

from typing import Sequence

from .embedding import GridEmbedding, validate
from .graph import Graph

UNIT = 24
MARGIN = 12


def _checked(f: GridEmbedding, g: Graph) -> None:
    chk = validate(g, f)
    if not chk:
        raise ValueError(f"invalid embedding: {chk.reason}")


def render_ascii(f: GridEmbedding, g: Graph) -> str:
    """Row ``a``, column ``b`` sits at canvas position ``(2a-2, 2b-2)``; the canvas is ``(2k-1) x (2r-1)``."""
    _checked(f, g)
    canvas = [[" "] * (2 * f.r - 1) for _ in range(2 * f.k - 1)]
    for a, b in f.pos.values():
        canvas[2 * a - 2][2 * b - 2] = "+"
    for u, v in g.sorted_edges():
        (a1, b1), (a2, b2) = f.pos[u], f.pos[v]
        canvas[a1 + a2 - 2][b1 + b2 - 2] = "|" if b1 == b2 else "-"
    return "\n".join("".join(row) for row in canvas)


def render_svg(f: GridEmbedding, g: Graph, labels: Sequence[str] | None = None) -> str:
    """Lattice frame, one ``<line>`` per edge and one ``<circle>`` per vertex."""
    _checked(f, g)

    def xy(cell: tuple[int, int]) -> tuple[int, int]:
        return MARGIN + (cell[1] - 1) * UNIT, MARGIN + (cell[0] - 1) * UNIT

    width = 2 * MARGIN + (f.r - 1) * UNIT
    height = 2 * MARGIN + (f.k - 1) * UNIT
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{(f.r - 1) * UNIT}" height="{(f.k - 1) * UNIT}" '
        'fill="none" stroke="#dddddd" stroke-dasharray="2,3"/>',
        '<g stroke="#333333" stroke-width="3">',
    ]
    for u, v in g.sorted_edges():
        (x1, y1), (x2, y2) = xy(f.pos[u]), xy(f.pos[v])
        out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
    out.append("</g>")
    out.append('<g fill="#1f77b4">')
    for v in f.vertices():
        x, y = xy(f.pos[v])
        name = labels[v] if labels is not None else str(v)
        out.append(f'<circle cx="{x}" cy="{y}" r="5"><title>{_escape(name)}</title></circle>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def save_figure(f: GridEmbedding, g: Graph, path: str, labels: Sequence[str] | None = None) -> None:
    """Write a raster or vector figure with matplotlib (optional dependency)."""
    _checked(f, g)
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("figures need matplotlib: pip install 'artifact[plot]'") from exc
    fig, ax = plt.subplots(figsize=(max(2.0, 0.4 * f.r), max(2.0, 0.4 * f.k)))
    for a in range(1, f.k + 1):
        ax.plot([1, f.r], [a, a], color="#eeeeee", lw=0.5, zorder=0)
    for b in range(1, f.r + 1):
        ax.plot([b, b], [1, f.k], color="#eeeeee", lw=0.5, zorder=0)
    for u, v in g.sorted_edges():
        (a1, b1), (a2, b2) = f.pos[u], f.pos[v]
        ax.plot([b1, b2], [a1, a2], color="#333333", lw=2, zorder=1)
    vs = f.vertices()
    ax.scatter([f.pos[v][1] for v in vs], [f.pos[v][0] for v in vs], s=30, color="#1f77b4", zorder=2)
    if labels is not None and g.n <= 60:
        for v in vs:
            ax.annotate(labels[v], (f.pos[v][1], f.pos[v][0]), fontsize=6, xytext=(3, 3),
                        textcoords="offset points")
    ax.set_xlim(0.5, f.r + 0.5)
    ax.set_ylim(f.k + 0.5, 0.5)
    ax.set_aspect("equal")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
