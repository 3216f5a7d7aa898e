"""Landscape-quality metrics over minima databases.

HCMP compares the global minimum's solution probability against the
next-highest (second-lowest-energy) local minimum and flags the cases where
the runner-up wins; this is what the published per-(graph, L) tables report.
The weighted metric F averages |E_gm - E_m| (1 - p_m) over the database.
Threshold metrics intersect convex hulls of the (energy, probability)
scatter: d1/d2 against a horizontal probability cutoff, d3/d4/p1/p2 against
the left edge of the competing-solution hull.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .optim import MinimaDatabase

__all__ = [
    "ConvexHull",
    "convex_hull",
    "hull_contains",
    "hcmp",
    "f_metric",
    "expectation_thresholds",
    "hull_left_edge",
    "hull_intersection_thresholds",
    "delta_metrics",
    "AnalysisReport",
    "build_report",
    "sweep_candidates",
    "solution_scatter",
    "alternative_scatter",
    "REPORT_ROW_HEADER",
]


# ---------------------------------------------------------------------------
# planar convex hull (monotone chain)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvexHull:
    points: np.ndarray
    vertices: np.ndarray  # counterclockwise cycle; degenerate hulls have < 3


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> ConvexHull:
    """Monotone-chain hull; collinear inputs give a 2-vertex segment."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] == 0:
        raise ValueError("need an (n, 2) array of points")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) == 1:
        return ConvexHull(points=pts, vertices=np.array(uniq))
    lower: list[tuple] = []
    for p in uniq:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple] = []
    for p in reversed(uniq):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    cycle = lower[:-1] + upper[:-1]
    if len(cycle) < 2:  # all collinear
        cycle = [uniq[0], uniq[-1]]
    return ConvexHull(points=pts, vertices=np.array(cycle))


def hull_contains(hull: ConvexHull, point, tol: float = 1e-12) -> bool:
    """Point-inside-or-on test via cross products against the CCW cycle."""
    v = hull.vertices
    if len(v) == 1:
        return bool(np.allclose(v[0], point, atol=tol))
    if len(v) == 2:
        d = v[1] - v[0]
        t = np.dot(np.asarray(point) - v[0], d) / float(d @ d)
        proj = v[0] + np.clip(t, 0.0, 1.0) * d
        return bool(np.linalg.norm(np.asarray(point) - proj) <= 10 * tol)
    for k in range(len(v)):
        if _cross(v[k], v[(k + 1) % len(v)], point) < -tol:
            return False
    return True


# ---------------------------------------------------------------------------
# scalar metrics
# ---------------------------------------------------------------------------

def hcmp(db: MinimaDatabase) -> tuple[float, bool]:
    """Best solution probability among {global minimum, next-highest local
    minimum}; the flag is False when the runner-up wins (the asterisked
    table entries)."""
    if not db.records:
        raise ValueError("empty database")
    p_gm = db.records[0].p_solution
    if len(db.records) == 1:
        return p_gm, True
    p_second = db.records[1].p_solution
    if p_second > p_gm:
        return p_second, False
    return p_gm, True


def f_metric(db: MinimaDatabase) -> float:
    """F = (1/(M |E_gm|)) sum_m |E_gm - E_m| (1 - p_m); zero iff M == 1."""
    if not db.records:
        raise ValueError("empty database")
    e_min = min(r.energy for r in db.records)
    if abs(e_min) < 1e-12:
        raise ValueError("global-minimum energy is zero; F normalization undefined")
    total = sum(abs(e_min - r.energy) * (1.0 - r.p_solution) for r in db.records)
    return total / (len(db.records) * abs(e_min))


def delta_metrics(db: MinimaDatabase) -> tuple[float, float] | None:
    """(|E_second - E_gm|, p_second - p_gm) when the next-highest local
    minimum carries the better solution probability; absent otherwise."""
    value, is_global = hcmp(db)
    if is_global:
        return None
    gm = db.records[0]
    second = db.records[1]
    return abs(second.energy - gm.energy), value - gm.p_solution


# ---------------------------------------------------------------------------
# hull threshold metrics
# ---------------------------------------------------------------------------

def _dedup_points(pts, tol=1e-9):
    out = []
    for p in pts:
        if not any(abs(p[0] - q[0]) <= tol and abs(p[1] - q[1]) <= tol for q in out):
            out.append(p)
    return out


def expectation_thresholds(hull: ConvexHull, e_min: float, p_op: float):
    """Energies where the hull boundary crosses p = p_op, as offsets from the
    global minimum: (d1, d2) with d1 <= d2; None when the line misses."""
    v = hull.vertices
    if len(v) < 2:
        return None
    crossings = []
    n = len(v)
    edges = range(n if n > 2 else 1)
    for k in edges:
        (e1, p1), (e2, p2) = v[k], v[(k + 1) % n]
        lo, hi = min(p1, p2), max(p1, p2)
        if p_op < lo or p_op > hi:
            continue
        if p1 == p2:
            crossings.extend([(e1, p_op), (e2, p_op)])
        else:
            t = (p_op - p1) / (p2 - p1)
            crossings.append((e1 + t * (e2 - e1), p_op))
    crossings = _dedup_points(crossings)
    if not crossings:
        return None
    energies = sorted(c[0] for c in crossings)
    return energies[0] - e_min, energies[-1] - e_min


def hull_left_edge(hull: ConvexHull) -> np.ndarray:
    """Boundary chain from the lowest-energy vertex to the highest-probability
    vertex along the low-energy side of the hull."""
    v = hull.vertices
    if len(v) <= 2:
        return v.copy()
    # cycle starts at the lexicographically smallest vertex and runs CCW
    # (lower chain first), so walking backwards climbs the left side
    apex = max(range(len(v)), key=lambda k: (v[k][1], -v[k][0]))
    if apex == 0:
        return v[:1].copy()
    chain = [v[0]]
    k = len(v) - 1
    while k >= apex:
        chain.append(v[k])
        k -= 1
    return np.array(chain)


def _segment_intersections(p1, p2, q1, q2, tol=1e-12):
    """Intersection points of two closed segments (0, 1 or 2 for overlap)."""
    r = (p2[0] - p1[0], p2[1] - p1[1])
    s = (q2[0] - q1[0], q2[1] - q1[1])
    denom = r[0] * s[1] - r[1] * s[0]
    qp = (q1[0] - p1[0], q1[1] - p1[1])
    if abs(denom) <= tol:
        if abs(qp[0] * r[1] - qp[1] * r[0]) > tol:
            return []
        # collinear: project q endpoints on r
        rr = r[0] * r[0] + r[1] * r[1]
        if rr <= tol:
            return []
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = max(0.0, min(t0, t1)), min(1.0, max(t0, t1))
        if lo > hi:
            return []
        return [(p1[0] + t * r[0], p1[1] + t * r[1]) for t in (lo, hi)]
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    u = (qp[0] * r[1] - qp[1] * r[0]) / denom
    if -tol <= t <= 1 + tol and -tol <= u <= 1 + tol:
        return [(p1[0] + t * r[0], p1[1] + t * r[1])]
    return []


def hull_intersection_thresholds(c_s: ConvexHull, c_t: ConvexHull, e_min: float):
    """Crossings of the solution hull boundary with the left edge of the
    competing-solution hull: (d3, d4, p1, p2); None with fewer than two."""
    edge = hull_left_edge(c_t)
    if len(edge) < 2:
        return None
    vs = c_s.vertices
    if len(vs) < 2:
        return None
    n = len(vs)
    boundary = [(vs[k], vs[(k + 1) % n]) for k in range(n if n > 2 else 1)]
    pts = []
    for a1, a2 in zip(edge[:-1], edge[1:]):
        for b1, b2 in boundary:
            pts.extend(_segment_intersections(a1, a2, b1, b2))
    pts = _dedup_points(pts)
    if len(pts) < 2:
        return None
    pts.sort(key=lambda q: q[0])
    (e1, p1), (e2, p2) = pts[0], pts[-1]
    return e1 - e_min, e2 - e_min, p1, p2


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

def solution_scatter(db: MinimaDatabase) -> np.ndarray:
    return np.array([[r.energy, r.p_solution] for r in db.records])


def alternative_scatter(db: MinimaDatabase) -> np.ndarray | None:
    pts = [[r.energy, r.p_alternative] for r in db.records if r.p_alternative is not None]
    return np.array(pts) if pts else None


@dataclass
class AnalysisReport:
    graph_id: str
    layers: int
    m: int
    hcmp: float
    hcmp_is_global: bool
    f_metric: float | None
    p_op: float
    d1: float | None = None
    d2: float | None = None
    d3: float | None = None
    d4: float | None = None
    p1: float | None = None
    p2: float | None = None
    delta_e: float | None = None
    delta_p: float | None = None
    counts_source: str = "basin-hopping"
    hulls_source: str | None = None

    def to_text(self) -> str:
        def fmt(v, spec="{:.6f}"):
            return "-" if v is None else spec.format(v)

        lines = [
            f"graph_id = {self.graph_id}",
            f"layers = {self.layers}",
            f"m = {self.m}",
            f"hcmp = {self.hcmp:.6f}{'' if self.hcmp_is_global else ' *'}",
            f"f = {fmt(self.f_metric)}",
            f"p_op = {self.p_op:.6f}",
            f"d1 = {fmt(self.d1)}",
            f"d2 = {fmt(self.d2)}",
            f"d3 = {fmt(self.d3)}",
            f"d4 = {fmt(self.d4)}",
            f"p1 = {fmt(self.p1)}",
            f"p2 = {fmt(self.p2)}",
            f"delta_e = {fmt(self.delta_e)}",
            f"delta_p = {fmt(self.delta_p)}",
            f"counts_source = {self.counts_source}",
            f"hulls_source = {self.hulls_source or '-'}",
        ]
        return "\n".join(lines) + "\n"

    def to_row(self) -> str:
        def fmt(v):
            if v is None:
                return "-"
            if isinstance(v, bool):
                return str(int(v))
            if isinstance(v, float):
                return f"{v:.12g}"
            return str(v)

        return "\t".join(fmt(v) for v in (
            self.graph_id, self.layers, self.m, self.hcmp, int(self.hcmp_is_global),
            self.f_metric, self.p_op, self.d1, self.d2, self.d3, self.d4,
            self.p1, self.p2, self.delta_e, self.delta_p,
            self.counts_source, self.hulls_source or "-"))


REPORT_ROW_HEADER = ("graph_id\tlayers\tm\thcmp\thcmp_is_global\tf\tp_op\t"
                     "d1\td2\td3\td4\tp1\tp2\tdelta_e\tdelta_p\t"
                     "counts_source\thulls_source")


def build_report(db: MinimaDatabase, connected: MinimaDatabase | None = None,
                 p_op: float = 0.5) -> AnalysisReport:
    """Metrics for one (graph, L).  Counts/HCMP/deltas come from the raw
    basin-hopping database; F and hull thresholds from the post-connection
    database when one is supplied (recorded in the provenance fields)."""
    value, is_global = hcmp(db)
    deltas = delta_metrics(db)
    hull_db = connected if connected is not None else db
    try:
        f_val = f_metric(hull_db)
    except ValueError:
        f_val = None
    report = AnalysisReport(
        graph_id=db.graph_id, layers=db.layers, m=len(db.records),
        hcmp=value, hcmp_is_global=is_global, f_metric=f_val, p_op=p_op,
        delta_e=None if deltas is None else deltas[0],
        delta_p=None if deltas is None else deltas[1],
        counts_source=db.source,
        hulls_source=hull_db.source,
    )
    s_pts = solution_scatter(hull_db)
    e_min = float(min(r.energy for r in hull_db.records))
    if len(s_pts) >= 2:
        c_s = convex_hull(s_pts)
        d12 = expectation_thresholds(c_s, e_min, p_op)
        if d12 is not None:
            report.d1, report.d2 = d12
        t_pts = alternative_scatter(hull_db)
        if t_pts is not None and len(t_pts) >= 2:
            c_t = convex_hull(t_pts)
            d34 = hull_intersection_thresholds(c_s, c_t, e_min)
            if d34 is not None:
                report.d3, report.d4, report.p1, report.p2 = d34
    return report


def sweep_candidates(reports: list[AnalysisReport], tol: float = 1e-6):
    """Study-level layer-count candidates from a multi-L sweep:
    smallest L whose HCMP ties the scanned maximum, and smallest L in the
    single-minimum probability-1 regime."""
    if not reports:
        return None, None
    by_layer = sorted(reports, key=lambda r: r.layers)
    best = max(r.hcmp for r in by_layer)
    l_min = next((r.layers for r in by_layer if r.hcmp >= best - tol), None)
    l_ad = next((r.layers for r in by_layer
                 if r.m == 1 and r.hcmp >= 1.0 - tol), None)
    return l_min, l_ad
