"""Disconnectivity graphs and scatter exports.

The tree is built by sweeping uniformly spaced energy thresholds downward and
computing connected components of the minima under transition states below
each threshold; two leaves share an ancestor at a level exactly when their
minima interconvert via a pathway whose highest transition state lies below
it.  Rendering emits deterministic standalone SVG with branches colored by
solution probability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .landscape import KineticTransitionNetwork
from .optim import MinimaDatabase

__all__ = [
    "DisconnectivityTree",
    "TreeNode",
    "build_disconnectivity",
    "default_spacing",
    "render_disconnectivity",
    "scatter_export",
    "parse_scatter",
]


@dataclass
class TreeNode:
    level: int          # index into threshold_levels (0 = top)
    members: tuple[int, ...]
    parent: int | None = None   # node index


@dataclass
class DisconnectivityTree:
    threshold_levels: np.ndarray          # descending energies, uniform spacing
    nodes: list[TreeNode]
    leaves: dict[int, dict]               # minimum index -> leaf info
    roots: list[int] = field(default_factory=list)


def default_spacing(net: KineticTransitionNetwork) -> tuple[float, float]:
    """(spacing, top): 1/40 of the barrier span, top one spacing above the
    highest transition state."""
    e_gm = min(r.energy for r in net.minima.records)
    e_top = max(r.energy for r in net.minima.records)
    if net.transition_states:
        e_top = max(e_top, max(ts.energy for ts in net.transition_states))
    span = max(e_top - e_gm, 1e-6)
    spacing = span / 40.0
    return spacing, e_top + spacing


def _components_below(n_minima, ts_list, threshold):
    parent = list(range(n_minima))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ts in ts_list:
        if ts.energy < threshold and ts.min_a != ts.min_b:
            ra, rb = find(ts.min_a), find(ts.min_b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for m in range(n_minima):
        groups.setdefault(find(m), []).append(m)
    return [tuple(sorted(g)) for g in sorted(groups.values())]


def build_disconnectivity(net: KineticTransitionNetwork, spacing: float | None = None,
                          top: float | None = None) -> DisconnectivityTree:
    """Superbasin tree for uniformly spaced thresholds from `top` downward."""
    if not net.minima.records:
        raise ValueError("empty network")
    if spacing is None or top is None:
        d_spacing, d_top = default_spacing(net)
        spacing = d_spacing if spacing is None else spacing
        top = d_top if top is None else top
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    energies = [r.energy for r in net.minima.records]
    e_gm = min(energies)
    levels = []
    t = top
    while t > e_gm:
        levels.append(t)
        t -= spacing
    if not levels:
        levels = [top]
    levels = np.array(levels)

    nodes: list[TreeNode] = []
    prev_nodes_by_member: dict[int, int] = {}
    for li, thr in enumerate(levels):
        present = [m for m, e in enumerate(energies) if e < thr]
        if not present:
            continue
        comps = _components_below(len(energies), net.transition_states, thr)
        for comp in comps:
            comp_present = tuple(m for m in comp if energies[m] < thr)
            if not comp_present:
                continue
            node_idx = len(nodes)
            nodes.append(TreeNode(level=li, members=comp_present))
            # link to the node one threshold higher containing these minima
            if li > 0:
                for m in comp_present:
                    up = prev_nodes_by_member.get(m)
                    if up is not None:
                        nodes[node_idx].parent = up
                        break
        prev_nodes_by_member = {}
        for k, nd in enumerate(nodes):
            if nd.level == li:
                for m in nd.members:
                    prev_nodes_by_member[m] = k

    leaves = {}
    for m, rec in enumerate(net.minima.records):
        attach = None
        for k in range(len(nodes) - 1, -1, -1):
            if m in nodes[k].members:
                attach = k
                break
        leaves[m] = dict(energy=rec.energy, p_solution=rec.p_solution,
                         p_alternative=rec.p_alternative, attach=attach)
    roots = [k for k, nd in enumerate(nodes) if nd.parent is None]
    return DisconnectivityTree(threshold_levels=levels, nodes=nodes, leaves=leaves,
                               roots=roots)


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

_VIRIDIS = np.array([
    (0.267004, 0.004874, 0.329415),
    (0.282623, 0.140926, 0.457517),
    (0.253935, 0.265254, 0.529983),
    (0.206756, 0.371758, 0.553117),
    (0.163625, 0.471133, 0.558148),
    (0.127568, 0.566949, 0.550556),
    (0.134692, 0.658636, 0.517649),
    (0.266941, 0.748751, 0.440573),
    (0.477504, 0.821444, 0.318195),
    (0.741388, 0.873449, 0.149561),
    (0.993248, 0.906157, 0.143936),
])


def _colormap(p: float, grayscale: bool = False) -> str:
    p = min(max(p, 0.0), 1.0)
    if grayscale:
        v = int(round(230 * (1.0 - p)))
        return f"#{v:02x}{v:02x}{v:02x}"
    x = p * (len(_VIRIDIS) - 1)
    k = min(int(x), len(_VIRIDIS) - 2)
    t = x - k
    rgb = (1 - t) * _VIRIDIS[k] + t * _VIRIDIS[k + 1]
    r, g, b = (int(round(255 * c)) for c in rgb)
    return f"#{r:02x}{g:02x}{b:02x}"


def _f(v: float) -> str:
    return f"{v:.2f}"


def render_disconnectivity(tree: DisconnectivityTree, coloring: str = "solution",
                           grayscale: bool = False) -> str:
    """Standalone SVG: energy axis, branches colored by the chosen
    probability channel, embedded colorbar.  Byte-deterministic."""
    if coloring not in ("solution", "alternative"):
        raise ValueError("coloring must be 'solution' or 'alternative'")

    def leaf_p(m):
        info = tree.leaves[m]
        if coloring == "alternative":
            return info["p_alternative"] if info["p_alternative"] is not None else 0.0
        return info["p_solution"]

    # leaf x-order: recursive subtree sort on minimum energy
    children: dict[int, list[int]] = {k: [] for k in range(len(tree.nodes))}
    for k, nd in enumerate(tree.nodes):
        if nd.parent is not None:
            children[nd.parent].append(k)

    leaf_order: list[int] = []

    def subtree_min_energy(k):
        return min(tree.leaves[m]["energy"] for m in tree.nodes[k].members)

    def walk(k):
        nd = tree.nodes[k]
        kids = sorted(children[k], key=lambda c: (subtree_min_energy(c), min(tree.nodes[c].members)))
        covered = set()
        for c in kids:
            covered.update(tree.nodes[c].members)
        own = [m for m in nd.members
               if m not in covered and tree.leaves[m]["attach"] == k]
        for c in kids:
            walk(c)
        for m in sorted(own, key=lambda m: (tree.leaves[m]["energy"], m)):
            leaf_order.append(m)

    for r in sorted(tree.roots, key=lambda k: (subtree_min_energy(k), min(tree.nodes[k].members))):
        walk(r)
    for m in sorted(tree.leaves):
        if m not in leaf_order:
            leaf_order.append(m)

    width, height = 640, 480
    mleft, mright, mtop, mbot = 70, 90, 20, 30
    levels = tree.threshold_levels
    e_lo = min(info["energy"] for info in tree.leaves.values())
    e_hi = float(levels[0])
    span = max(e_hi - e_lo, 1e-12)

    def ey(e):
        return mtop + (e_hi - e) / span * (height - mtop - mbot)

    n_leaves = max(len(leaf_order), 1)
    xs = {m: mleft + (k + 0.5) * (width - mleft - mright) / n_leaves
          for k, m in enumerate(leaf_order)}

    # node positions: mean of member-leaf x
    node_x = {}
    for k, nd in enumerate(tree.nodes):
        node_x[k] = sum(xs[m] for m in nd.members) / len(nd.members)

    svg = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    # energy axis (left) with ticks at every 5th threshold level
    svg.append(f'<line x1="{mleft - 10}" y1="{_f(ey(e_hi))}" x2="{mleft - 10}" '
               f'y2="{_f(ey(e_lo))}" stroke="black" stroke-width="1"/>')
    step = max(1, len(levels) // 8)
    for li in range(0, len(levels), step):
        e = float(levels[li])
        y = ey(e)
        svg.append(f'<line x1="{mleft - 14}" y1="{_f(y)}" x2="{mleft - 10}" y2="{_f(y)}" '
                   f'stroke="black" stroke-width="1"/>')
        svg.append(f'<text x="{mleft - 18}" y="{_f(y + 3)}" font-size="10" '
                   f'text-anchor="end" font-family="monospace">{e:.4g}</text>')
    # tree edges: child node -> parent node
    for k, nd in enumerate(tree.nodes):
        if nd.parent is not None:
            y1 = ey(float(levels[nd.level]))
            y0 = ey(float(levels[tree.nodes[nd.parent].level]))
            svg.append(f'<line x1="{_f(node_x[k])}" y1="{_f(y1)}" '
                       f'x2="{_f(node_x[nd.parent])}" y2="{_f(y0)}" '
                       f'stroke="#555555" stroke-width="1"/>')
    # leaf branches: from attach level down to the minimum energy
    for m in leaf_order:
        info = tree.leaves[m]
        attach = info["attach"]
        y_top = ey(float(levels[tree.nodes[attach].level])) if attach is not None else ey(e_hi)
        x_top = node_x[attach] if attach is not None else xs[m]
        color = _colormap(leaf_p(m), grayscale)
        svg.append(f'<line x1="{_f(x_top)}" y1="{_f(y_top)}" x2="{_f(xs[m])}" '
                   f'y2="{_f(ey(info["energy"]))}" stroke="{color}" stroke-width="2"/>')
    # colorbar
    bar_x, bar_w = width - mright + 25, 14
    bar_top, bar_bot = mtop + 10, height - mbot - 10
    n_seg = 64
    for k in range(n_seg):
        p0 = 1.0 - k / n_seg
        y0 = bar_top + k * (bar_bot - bar_top) / n_seg
        y1 = bar_top + (k + 1) * (bar_bot - bar_top) / n_seg
        svg.append(f'<rect x="{bar_x}" y="{_f(y0)}" width="{bar_w}" '
                   f'height="{_f(y1 - y0 + 0.5)}" fill="{_colormap(p0 - 0.5 / n_seg, grayscale)}" '
                   f'stroke="none"/>')
    for frac, label in ((0.0, "1.0"), (0.5, "0.5"), (1.0, "0.0")):
        y = bar_top + frac * (bar_bot - bar_top)
        svg.append(f'<text x="{bar_x + bar_w + 4}" y="{_f(y + 3)}" font-size="10" '
                   f'font-family="monospace">{label}</text>')
    svg.append(f'<text x="{bar_x - 2}" y="{mtop}" font-size="10" '
               f'font-family="monospace">p({"t" if coloring == "alternative" else "s"})</text>')
    svg.append("</svg>")
    return "\n".join(svg) + "\n"


# ---------------------------------------------------------------------------
# scatter export
# ---------------------------------------------------------------------------

def _g9(v) -> str:
    return f"{v:.9g}"


def scatter_export(db: MinimaDatabase, hull_s=None, hull_t=None) -> str:
    """Delimited rows of (energy, p_solution, p_alternative, layers, kind);
    hull vertices follow the data rows flagged by kind."""
    if not db.records:
        raise ValueError("empty database")
    lines = ["energy\tp_solution\tp_alternative\tlayers\tkind"]
    for r in db.records:
        alt = _g9(r.p_alternative) if r.p_alternative is not None else "-"
        lines.append(f"{_g9(r.energy)}\t{_g9(r.p_solution)}\t{alt}\t{db.layers}\tminimum")
    if hull_s is not None:
        for e, p in hull_s.vertices:
            lines.append(f"{_g9(e)}\t{_g9(p)}\t-\t{db.layers}\thull_s")
    if hull_t is not None:
        for e, p in hull_t.vertices:
            lines.append(f"{_g9(e)}\t-\t{_g9(p)}\t{db.layers}\thull_t")
    return "\n".join(lines) + "\n"


def parse_scatter(text: str):
    """Rows back to (minima, hull_s_vertices, hull_t_vertices) float arrays."""
    minima, hs, ht = [], [], []
    for ln in text.splitlines()[1:]:
        if not ln.strip():
            continue
        e, p, alt, layers, kind = ln.split("\t")
        if kind == "minimum":
            minima.append((float(e), float(p), None if alt == "-" else float(alt)))
        elif kind == "hull_s":
            hs.append((float(e), float(p)))
        elif kind == "hull_t":
            ht.append((float(e), float(alt)))
    return minima, np.array(hs) if hs else None, np.array(ht) if ht else None
