"""Coarse-graining of circuit hulls: pre-skeletons, skeletons, audits.

The construction walks the hull boundary from the leftmost lowest vertex:
from each chosen vertex it advances until it exits the tau-ball of radius
s (or returns to the start), backtracks to the last extreme point, and,
when the exit lies within the first hull edge, jumps forward to the next
extreme point instead.  A refinement pass then inserts extra vertices
wherever the accumulated tangent turning since the last kept vertex
reaches s/diam.

The audit measures the quantities the scaling bounds control: vertex
counts, the area of Int(gamma) outside the skeleton polygon, the maximal
distance from the hull to the polygon, and the tau-length gap, plus the
corner triangles T_j for the short-edge index set J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import convex_hull_points, points_diameter
from .tau_wulff import TauNorm, tau_length


def _hull_from(circuit_or_points):
    if hasattr(circuit_or_points, "points"):
        pts = circuit_or_points.points()
    else:
        pts = np.asarray(circuit_or_points, dtype=float)
    hull = convex_hull_points([tuple(p) for p in pts])
    if len(hull) < 3:
        raise ValueError("degenerate circuit: hull has fewer than 3 vertices")
    k = min(range(len(hull)), key=lambda i: (hull[i][1], hull[i][0]))
    hull = hull[k:] + hull[:k]
    return np.asarray(hull, dtype=float)


@dataclass
class PreSkeleton:
    """Vertex subsequence (u_0..u_{m+1}) of the hull, u_{m+1} = u_0."""

    hull: np.ndarray
    indices: list  # hull-vertex indices of u_0..u_m (closing u_0 implicit)
    scale: float
    tau: TauNorm

    @property
    def m(self) -> int:
        return len(self.indices) - 1

    def sites(self) -> np.ndarray:
        pts = [self.hull[i % len(self.hull)] for i in self.indices]
        pts.append(self.hull[0])
        return np.asarray(pts)


@dataclass
class HullSkeleton:
    hull: np.ndarray
    indices: list  # hull-vertex indices of w_0..w_n in order
    pre_indices: list
    scale: float
    tau: TauNorm

    @property
    def n(self) -> int:
        return len(self.indices) - 1

    def polygon(self) -> np.ndarray:
        """HPath_s: the closed polygon w_0 -> .. -> w_n (-> w_0)."""
        return np.asarray([self.hull[i % len(self.hull)] for i in self.indices])

    def sites(self) -> np.ndarray:
        poly = self.polygon()
        return np.vstack([poly, poly[:1]])


def pre_skeleton(circuit_or_points, s, tau: TauNorm) -> PreSkeleton:
    """The s-hull pre-skeleton of a circuit (or explicit convex cycle)."""
    hull = _hull_from(circuit_or_points)
    if tau.diameter(hull) < 2 * s:
        raise ValueError("tau-diameter below 2s; pre-skeleton undefined")
    h = len(hull)
    # cumulative arc positions of vertices 0..h (h = wrap to start)
    seg = np.hypot(*(np.roll(hull, -1, axis=0) - hull).T)
    pos = np.concatenate([[0.0], np.cumsum(seg)])
    total = pos[-1]

    indices = [0]
    cur = 0  # current vertex index (0..h-1), position pos[cur]
    while True:
        uj = hull[indices[-1] % h]
        # walk forward edge by edge until tau-ball exit or return to u0
        exit_edge = None
        exit_t = 0.0
        exit_pos = None
        k = cur
        while k < h:
            a = hull[k % h]
            b = hull[(k + 1) % h]
            hit = tau.first_exit(uj, a, b, s)
            if hit is not None:
                exit_edge = k
                exit_t = hit[0]
                exit_pos = pos[k] + exit_t * seg[k % h]
                break
            k += 1
        if exit_edge is None or exit_pos >= total - 1e-12:
            # u0 reached before leaving the ball
            indices.append(h)
            break
        # backtrack: last hull vertex at or before the exit point
        back_vertex = exit_edge + 1 if exit_t >= 1.0 - 1e-12 else exit_edge
        if back_vertex > indices[-1]:
            nxt = back_vertex
        else:
            # exit inside the first edge: continue straight to the next vertex
            nxt = exit_edge + 1
        if nxt >= h:
            indices.append(h)
            break
        indices.append(nxt)
        cur = nxt
    # indices holds u_0..u_m as 0..h-1 values plus the closing h (= u_0)
    closing = indices.pop()
    assert closing == h
    return PreSkeleton(hull=hull, indices=indices, scale=s, tau=tau)


def _exterior_angle(hull, i):
    h = len(hull)
    a = hull[(i - 1) % h]
    b = hull[i % h]
    c = hull[(i + 1) % h]
    v1 = b - a
    v2 = c - b
    ang = math.atan2(v1[0] * v2[1] - v1[1] * v2[0], v1[0] * v2[0] + v1[1] * v2[1])
    return ang


def refine(pre: PreSkeleton, circuit_or_points=None) -> HullSkeleton:
    """Insert refinement sites where accumulated turning reaches s/diam."""
    hull = pre.hull
    h = len(hull)
    if circuit_or_points is not None and hasattr(circuit_or_points, "points"):
        diam = points_diameter(circuit_or_points.points())
    else:
        diam = points_diameter(hull)
    theta = pre.scale / diam
    out = []
    pre_idx = list(pre.indices) + [h]
    for a, b in zip(pre_idx[:-1], pre_idx[1:]):
        out.append(a % h)
        cum = 0.0
        for v in range(a + 1, b):
            cum += _exterior_angle(hull, v % h)
            if cum >= theta - 1e-12:
                out.append(v % h)
                cum = 0.0
    return HullSkeleton(hull=hull, indices=out, pre_indices=list(pre.indices),
                        scale=pre.scale, tau=pre.tau)


def hull_skeleton(circuit_or_points, s, tau: TauNorm) -> HullSkeleton:
    return refine(pre_skeleton(circuit_or_points, s, tau), circuit_or_points)


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def _clip_convex(subject, n, hconst):
    out = []
    k = len(subject)
    for i in range(k):
        p, q = subject[i], subject[(i + 1) % k]
        dp = p[0] * n[0] + p[1] * n[1] - hconst
        dq = q[0] * n[0] + q[1] * n[1] - hconst
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            t = dp / (dp - dq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def convex_clip_area(subject, convex) -> float:
    """Area of subject (convex polygon, CCW) clipped to another convex CCW
    polygon."""
    poly = [tuple(p) for p in subject]
    m = len(convex)
    for i in range(m):
        a = convex[i]
        b = convex[(i + 1) % m]
        # inside = left of a->b: normal pointing right gives <= constraint
        n = (b[1] - a[1], -(b[0] - a[0]))
        hconst = n[0] * a[0] + n[1] * a[1]
        poly = _clip_convex(poly, n, hconst)
        if not poly:
            return 0.0
    area = 0.0
    k = len(poly)
    for i in range(k):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % k]
        area += x1 * y2 - x2 * y1
    return abs(area) / 2.0


def _point_in_convex(pt, poly, tol=1e-12):
    m = len(poly)
    for i in range(m):
        a, b = poly[i], poly[(i + 1) % m]
        cr = (b[0] - a[0]) * (pt[1] - a[1]) - (b[1] - a[1]) * (pt[0] - a[0])
        if cr < -tol:
            return False
    return True


def _dist_to_convex(pt, poly):
    from .geometry import point_segment_distance

    if _point_in_convex(pt, poly):
        return 0.0
    m = len(poly)
    return min(point_segment_distance(pt, poly[i], poly[(i + 1) % m])
               for i in range(m))


@dataclass
class SkeletonAudit:
    m: int
    n: int
    w_hull: float
    w_path: float
    area_defect: float
    max_dist: float
    length_gap: float
    j_set: list
    triangles: list
    diam: float
    scale: float
    uncovered_faces: list = field(default_factory=list)

    @property
    def diag(self) -> dict:
        s, diam = self.scale, self.diam
        return {
            "m_bound_ok": self.m <= 1 + 2 * self.w_hull / s,
            "nplus1_ratio": (self.n + 1) * s / diam,
            "defect_ratio": self.area_defect / (s * s),
            "maxdist_ratio": self.max_dist * diam / (s * s),
            "lengthgap_ratio": self.length_gap * diam / (s * s),
        }


def _tangent_triangle(hull, skel_indices, j):
    """T_j: triangle of segment w_j w_{j+1} with the forward tangent line at
    w_j and the backward tangent line at w_{j+1}."""
    h = len(hull)
    vi = skel_indices[j] % h
    vj = skel_indices[(j + 1) % len(skel_indices)] % h
    wj = hull[vi]
    wj1 = hull[vj]
    d1 = hull[(vi + 1) % h] - wj          # outgoing edge direction at w_j
    d2 = wj1 - hull[(vj - 1) % h]         # incoming edge direction at w_{j+1}
    cr = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(cr) < 1e-12:
        apex = 0.5 * (wj + wj1)
    else:
        # solve wj + t d1 = wj1 + u d2
        rhs = wj1 - wj
        t = (rhs[0] * d2[1] - rhs[1] * d2[0]) / cr
        apex = wj + t * d1
    return np.asarray([wj, apex, wj1])


def audit(skel: HullSkeleton, circuit, tau: TauNorm) -> SkeletonAudit:
    """Measure the coarse-graining error terms against their bound forms."""
    hull = skel.hull
    hpath = skel.polygon()
    w_hull = tau_length(hull, tau)
    w_path = tau_length(hpath, tau)
    s = skel.scale
    diam = points_diameter(circuit.points() if hasattr(circuit, "points")
                           else circuit)

    # J set and its triangles
    nverts = len(skel.indices)
    j_set = []
    tris = []
    for j in range(nverts):
        a = hull[skel.indices[j] % len(hull)]
        b = hull[skel.indices[(j + 1) % nverts] % len(hull)]
        if tau.value((b[0] - a[0], b[1] - a[1])) <= 2 * s + 1e-12:
            j_set.append(j)
            tris.append(_tangent_triangle(hull, skel.indices, j))

    # area defect and covering check over interior faces
    defect = 0.0
    uncovered = []
    if hasattr(circuit, "interior_faces"):
        off = 0.0 if circuit.dual else -0.5
        hp = [tuple(p) for p in hpath]
        for z in circuit.interior_faces():
            cx, cy = z[0] + off, z[1] + off
            square = [(cx - 0.5, cy - 0.5), (cx + 0.5, cy - 0.5),
                      (cx + 0.5, cy + 0.5), (cx - 0.5, cy + 0.5)]
            inter = convex_clip_area(square, hp) if len(hp) >= 3 else 0.0
            miss = 1.0 - inter
            if miss > 1e-9:
                defect += miss
                covered = any(convex_clip_area(square, [tuple(p) for p in t])
                              > 1e-12 for t in tris)
                if not covered:
                    uncovered.append(z)

    # max distance from the hull region to the skeleton polygon
    hp = [tuple(p) for p in hpath]
    max_dist = 0.0
    if len(hp) >= 3:
        for v in hull:
            max_dist = max(max_dist, _dist_to_convex((v[0], v[1]), hp))
    else:
        max_dist = float("nan")

    return SkeletonAudit(
        m=len(skel.pre_indices) - 1,
        n=skel.n,
        w_hull=w_hull,
        w_path=w_path,
        area_defect=defect,
        max_dist=max_dist,
        length_gap=w_hull - w_path,
        j_set=j_set,
        triangles=tris,
        diam=diam,
        scale=s,
        uncovered_faces=uncovered,
    )


def export_skeleton(skel: HullSkeleton, path):
    lines = [f"# fkdroplets skeleton v1 s={skel.scale!r} "
             f"m={len(skel.pre_indices) - 1} n={skel.n}"]
    for pnt in skel.polygon():
        lines.append(f"{pnt[0]!r} {pnt[1]!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def audit_csv_row(a: SkeletonAudit) -> str:
    return (f"{a.scale!r},{a.diam!r},{a.w_hull!r},{a.w_path!r},"
            f"{a.area_defect!r},{a.max_dist!r}")
