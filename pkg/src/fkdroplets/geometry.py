"""Convex hulls of circuits and roughness functionals (ALR, MLR, Delta_A).

Circuits are measured at lattice-site resolution: the point set of a
circuit is its (dual) site sequence.  Hull computations on lattice
circuits use exact integer cross products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_points(points):
    """Strict convex hull (extreme points only), CCW, via monotone chain.

    Input may be any iterable of 2-tuples; collinear boundary points are
    excluded, so the result is exactly the set of extreme points in hull
    order.
    """
    pts = sorted(set(map(tuple, points)))
    if len(pts) == 1:
        return pts
    if len(pts) == 2:
        return pts
    lower = []
    for p in pts:
        while len(lower) > 1 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) > 1 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_perimeter(vertices) -> float:
    v = np.asarray(vertices, dtype=float)
    return float(np.sum(np.hypot(*(np.roll(v, -1, axis=0) - v).T)))


def points_diameter(points) -> float:
    """Euclidean diameter of a finite point set (via hull + pairwise max)."""
    pts = np.asarray(points, dtype=float)
    if len(pts) <= 1:
        return 0.0
    hull = np.asarray(convex_hull_points(pts), dtype=float)
    if len(hull) <= 1:
        return 0.0
    d2 = np.sum((hull[:, None, :] - hull[None, :, :]) ** 2, axis=-1)
    return float(np.sqrt(d2.max()))


@dataclass
class HullData:
    """Convex hull of a circuit with the traversal bookkeeping the
    coarse-graining needs.

    ``extreme_points`` are the hull vertices in CCW order starting from
    u0, the leftmost site of minimal second coordinate; they are a subset
    of the circuit's sites.
    """

    circuit: object
    extreme_points: list
    perimeter: float
    hull_area: float

    @property
    def polygon(self) -> np.ndarray:
        off = self.circuit.offset if self.circuit is not None else 0.0
        return np.asarray(self.extreme_points, dtype=float) + off

    def edge_vectors(self) -> np.ndarray:
        p = self.polygon
        return np.roll(p, -1, axis=0) - p


def convex_hull(circuit) -> HullData:
    """HullData of a circuit, u0-anchored per the traversal convention."""
    hull = convex_hull_points(circuit.sites)
    if len(hull) < 3:
        raise ValueError("degenerate (collinear) circuit has no hull polygon")
    # rotate so traversal starts at the leftmost vertex of minimal y
    k = min(range(len(hull)), key=lambda i: (hull[i][1], hull[i][0]))
    hull = hull[k:] + hull[:k]
    poly = np.asarray(hull, dtype=float)
    return HullData(
        circuit=circuit,
        extreme_points=hull,
        perimeter=polygon_perimeter(poly),
        hull_area=abs(polygon_area(poly)),
    )


def point_segment_distance(p, a, b) -> float:
    px, py = p[0] - a[0], p[1] - a[1]
    vx, vy = b[0] - a[0], b[1] - a[1]
    vv = vx * vx + vy * vy
    if vv == 0:
        return math.hypot(px, py)
    t = max(0.0, min(1.0, (px * vx + py * vy) / vv))
    return math.hypot(px - t * vx, py - t * vy)


def points_to_polyline_distances(points, polyline) -> np.ndarray:
    """Distance from each point to a closed polyline (vertex array)."""
    pts = np.asarray(points, dtype=float)
    poly = np.asarray(polyline, dtype=float)
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    den = np.sum(ab * ab, axis=1)
    den[den == 0] = 1.0
    # (npts, nseg) projections clamped to [0, 1]
    ap = pts[:, None, :] - a[None, :, :]
    t = np.clip(np.sum(ap * ab[None, :, :], axis=2) / den[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    d = np.sqrt(np.sum((pts[:, None, :] - proj) ** 2, axis=2))
    return d.min(axis=1)


def densify_polygon(vertices, step) -> np.ndarray:
    """Points along a closed polygon boundary at spacing <= step."""
    v = np.asarray(vertices, dtype=float)
    out = []
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        length = float(np.hypot(*(b - a)))
        k = max(1, int(math.ceil(length / step)))
        for t in range(k):
            out.append(a + (b - a) * (t / k))
    return np.asarray(out)


def hausdorff(set_a, set_b) -> float:
    """Two-sided Hausdorff distance between finite point sets."""
    a = np.asarray(set_a, dtype=float)
    b = np.asarray(set_b, dtype=float)
    if len(a) == 0 or len(b) == 0:
        raise ValueError("hausdorff distance of an empty set")
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    d = np.sqrt(d2)
    return max(float(d.min(axis=1).max()), float(d.min(axis=0).max()))


def alr(circuit, hull: HullData | None = None) -> float:
    """Average local roughness: area between hull and interior over hull
    perimeter."""
    if hull is None:
        hull = convex_hull(circuit)
    return (hull.hull_area - circuit.area) / hull.perimeter


def mlr(circuit, hull: HullData | None = None) -> float:
    """Maximum local roughness: largest distance from a circuit site to the
    hull boundary."""
    if hull is None:
        hull = convex_hull(circuit)
    d = points_to_polyline_distances(circuit.points(), hull.polygon)
    return float(d.max())


def extreme_point_spacings(circuit, hull: HullData | None = None) -> np.ndarray:
    """Arc spacings (in circuit sites) between consecutive extreme points.

    Reported for the inward-excursion statistics; no scaling law is
    asserted on these.
    """
    if hull is None:
        hull = convex_hull(circuit)
    idx = sorted({circuit.index_of(p) for p in hull.extreme_points})
    idx = np.asarray(idx)
    n = len(circuit)
    gaps = np.diff(np.concatenate([idx, [idx[0] + n]]))
    return gaps


@dataclass
class RoughnessReport:
    alr: float
    mlr: float
    delta_hull: float
    delta_circuit: float
    best_translate: tuple


def _hausdorff_pts(a, b) -> float:
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    d = np.sqrt(d2)
    return max(float(d.min(axis=1).max()), float(d.min(axis=0).max()))


def delta_A(curve_points, area, wulff, return_translate=False, step_floor=0.01):
    """Hausdorff deviation from the best translate of the area-A Wulff boundary.

    ``curve_points`` is a point sampling of the closed curve (circuit sites
    or a densified hull boundary).  The translate is optimized by centroid
    initialization followed by coordinate descent on a shrinking grid; the
    final grid step is below ``step_floor``, which bounds the reported
    value's suboptimality.
    """
    pts = np.asarray(curve_points, dtype=float)
    scale = math.sqrt(area)
    wb = wulff.boundary_points(max(0.02, scale / 400.0)) * scale
    z = pts.mean(axis=0) - wb.mean(axis=0)
    best = _hausdorff_pts(pts, wb + z)
    step = max(scale / 8.0, 4 * step_floor)
    while step >= step_floor:
        improved = True
        while improved:
            improved = False
            for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1),
                           (1, -1), (-1, 1)):
                cand = z + np.array([dx * step, dy * step])
                val = _hausdorff_pts(pts, wb + cand)
                if val < best - 1e-13:
                    best, z = val, cand
                    improved = True
        step /= 2.0
    if return_translate:
        return best, (float(z[0]), float(z[1]))
    return best


def roughness_report(circuit, area, wulff) -> RoughnessReport:
    hull = convex_hull(circuit)
    hull_boundary = densify_polygon(hull.polygon, 0.25)
    d_hull, z = delta_A(hull_boundary, area, wulff, return_translate=True)
    d_circ = delta_A(circuit.points(), area, wulff)
    return RoughnessReport(
        alr=alr(circuit, hull),
        mlr=mlr(circuit, hull),
        delta_hull=d_hull,
        delta_circuit=d_circ,
        best_translate=z,
    )
