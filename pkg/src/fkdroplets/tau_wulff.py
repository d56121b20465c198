"""Surface-tension norms, Wulff shapes, and tau-geometry.

A norm is represented by its unit ball, a convex symmetric polygon; the
norm value is the Minkowski gauge, evaluated as a max of linear forms
(one per ball edge).  The Euclidean norm keeps an exact closed form as
well, so deterministic geometry tests never depend on a polygonal
approximation of the disk.

The estimated norm comes from fitting the exponential decay of dual
point-to-point connectivity along a grid of lattice directions, with a
log-distance correction term, then symmetrizing and convexifying.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDecayError


def _gauge_forms(ball_vertices: np.ndarray) -> np.ndarray:
    """Linear forms c_i with gauge(v) = max_i c_i . v for a convex 0-symmetric
    polygon given by CCW vertices."""
    v = np.asarray(ball_vertices, dtype=float)
    nxt = np.roll(v, -1, axis=0)
    edges = nxt - v
    normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1)  # outward for CCW
    support = np.sum(normals * v, axis=1)
    if np.any(support <= 0):
        raise ValueError("ball polygon must contain the origin strictly")
    return normals / support[:, None]


class TauNorm:
    """Positively homogeneous, lattice-symmetric norm.

    ``forms`` is the (k, 2) array of gauge linear forms; ``exact`` marks
    the closed-form Euclidean norm, which bypasses the polygon for value
    computations.
    """

    def __init__(self, ball_vertices, exact=None, scale=1.0, meta=None):
        self.ball = np.asarray(ball_vertices, dtype=float)
        self.forms = _gauge_forms(self.ball)
        self.exact = exact  # None or "l2"
        self.scale = float(scale)
        self.meta = meta or {}

    # -- factories ---------------------------------------------------------

    @staticmethod
    def l1(scale=1.0):
        ball = np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]) / scale
        return TauNorm(ball, meta={"kind": "l1", "scale": scale})

    @staticmethod
    def linf(scale=1.0):
        ball = np.array([(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]) / scale
        return TauNorm(ball, meta={"kind": "linf", "scale": scale})

    @staticmethod
    def euclidean(scale=1.0, n_ball_vertices=256):
        th = np.arange(n_ball_vertices) * (2 * math.pi / n_ball_vertices)
        ball = np.stack([np.cos(th), np.sin(th)], axis=1) / scale
        return TauNorm(ball, exact="l2", scale=scale,
                       meta={"kind": "euclidean", "scale": scale})

    @staticmethod
    def scaled(base: "TauNorm", c: float) -> "TauNorm":
        """c * tau: the ball shrinks by 1/c."""
        t = TauNorm(base.ball / c, exact=base.exact,
                    scale=base.scale * c, meta=dict(base.meta))
        return t

    @staticmethod
    def from_direction_values(directions, values, stderrs=None, meta=None):
        """Norm from values on first-octant directions, extended by the
        lattice symmetry group and convexified.

        ``directions`` are integer (or unit) vectors with 0 <= y <= x;
        ``values`` are tau evaluated at exactly those vectors.
        """
        from .geometry import convex_hull_points

        pts = []
        for d, t in zip(directions, values):
            if t <= 0:
                raise InsufficientDecayError(f"non-positive tau at direction {d}")
            x, y = d[0] / t, d[1] / t
            for sx in (1, -1):
                for sy in (1, -1):
                    pts.append((sx * x, sy * y))
                    pts.append((sx * y, sy * x))
        hull = convex_hull_points(pts)
        meta = dict(meta or {})
        meta.setdefault("kind", "estimated")
        if stderrs is not None:
            meta["direction_stderrs"] = list(stderrs)
        meta["directions"] = [tuple(d) for d in directions]
        meta["direction_values"] = list(values)
        return TauNorm(np.asarray(hull, dtype=float), meta=meta)

    # -- evaluation --------------------------------------------------------

    def value(self, v) -> float:
        if self.exact == "l2":
            return self.scale * math.hypot(v[0], v[1])
        return float(np.max(self.forms @ np.asarray(v, dtype=float)))

    __call__ = value

    def values(self, vs) -> np.ndarray:
        vs = np.asarray(vs, dtype=float)
        if self.exact == "l2":
            return self.scale * np.hypot(vs[..., 0], vs[..., 1])
        return np.max(vs @ self.forms.T, axis=-1)

    @property
    def kappa(self) -> float:
        """tau(e1), the axis value."""
        return self.value((1.0, 0.0))

    def distance(self, x, y) -> float:
        return self.value((y[0] - x[0], y[1] - x[1]))

    def diameter(self, points) -> float:
        """sup over point pairs of tau(a - b)."""
        pts = np.asarray(points, dtype=float)
        if len(pts) <= 1:
            return 0.0
        if self.exact == "l2":
            from .geometry import points_diameter

            return self.scale * points_diameter(pts)
        proj = pts @ self.forms.T
        return float(np.max(proj.max(axis=0) - proj.min(axis=0)))

    def ball_polygon(self, center=(0.0, 0.0), radius=1.0) -> np.ndarray:
        """Vertices of B_tau(center, radius)."""
        return np.asarray(center, dtype=float) + radius * self.ball

    def first_exit(self, anchor, a, b, radius):
        """First point on segment a->b where tau(. - anchor) reaches radius.

        Returns (t, point) with t in [0, 1], or None if the segment stays
        strictly inside the open ball.  tau along the segment is convex, so
        starting inside the ball there is at most one upward crossing.
        """
        ax = np.asarray(anchor, dtype=float)
        pa = np.asarray(a, dtype=float) - ax
        pb = np.asarray(b, dtype=float) - ax
        fa = self.value(pa) - radius
        fb = self.value(pb) - radius
        if fa >= 0:
            return 0.0, tuple(np.asarray(a, dtype=float))
        if fb < 0:
            return None
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            fm = self.value(pa + mid * (pb - pa)) - radius
            if fm < 0:
                lo = mid
            else:
                hi = mid
        t = hi
        pt = np.asarray(a, dtype=float) + t * (np.asarray(b, dtype=float)
                                               - np.asarray(a, dtype=float))
        return t, (float(pt[0]), float(pt[1]))


def tau_length(vertices, tau: TauNorm, closed=True) -> float:
    """tau-length of a polygonal curve: sum of tau(edge vector)."""
    v = np.asarray(vertices, dtype=float)
    if len(v) < 2:
        return 0.0
    edges = (np.roll(v, -1, axis=0) - v) if closed else (v[1:] - v[:-1])
    lengths = tau.values(edges)
    # zero-length edges contribute nothing and are tolerated
    return float(np.sum(lengths))


@dataclass
class WulffShape:
    """Unit-area minimizer of tau-boundary-length, as a convex polygon."""

    vertices: np.ndarray
    w1: float
    tau: TauNorm
    meta: dict = field(default_factory=dict)

    @property
    def area(self) -> float:
        from .geometry import polygon_area

        return abs(polygon_area(self.vertices))

    @property
    def max_extent(self) -> float:
        """max |vertex|_inf; the largest c with sqrt(c) K_1 in [-1,1]^2 is
        1/max_extent^2."""
        return float(np.max(np.abs(self.vertices)))

    def boundary_points(self, step) -> np.ndarray:
        from .geometry import densify_polygon

        return densify_polygon(self.vertices, step)


def _halfplane_clip(poly, n, h):
    """Clip polygon by {x : x . n <= h} (Sutherland-Hodgman step)."""
    out = []
    k = len(poly)
    for i in range(k):
        p, q = poly[i], poly[(i + 1) % k]
        dp = p[0] * n[0] + p[1] * n[1] - h
        dq = q[0] * n[0] + q[1] * n[1] - h
        if dp <= 0:
            out.append(p)
        if (dp < 0 < dq) or (dq < 0 < dp):
            t = dp / (dp - dq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _dedupe_polygon(poly, tol=1e-9):
    out = []
    for p in poly:
        if not out or (abs(p[0] - out[-1][0]) > tol or abs(p[1] - out[-1][1]) > tol):
            out.append(p)
    if len(out) > 1 and abs(out[0][0] - out[-1][0]) <= tol and \
            abs(out[0][1] - out[-1][1]) <= tol:
        out.pop()
    # drop collinear vertices
    cleaned = []
    m = len(out)
    for i in range(m):
        a, b, c = out[(i - 1) % m], out[i], out[(i + 1) % m]
        cr = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(cr) > tol:
            cleaned.append(b)
    return cleaned


def wulff_shape(tau: TauNorm, n_directions=64) -> WulffShape:
    """Wulff shape of tau: half-plane intersection over a direction grid.

    ``n_directions`` is the grid resolution on [0, pi/4], extended over the
    full circle by the lattice symmetries; the polygon is rescaled to unit
    area and w1 is the tau-length of its boundary.
    """
    m = 8 * n_directions
    kappa = tau.kappa
    big = 4.0 * kappa
    poly = [(-big, -big), (big, -big), (big, big), (-big, big)]
    for i in range(m):
        th = 2.0 * math.pi * i / m
        n = (math.cos(th), math.sin(th))
        poly = _halfplane_clip(poly, n, tau.value(n))
        if len(poly) < 3:
            raise ValueError("tau table failed convexity; empty Wulff shape")
    poly = _dedupe_polygon(poly)
    from .geometry import polygon_area

    area = abs(polygon_area(poly))
    s = 1.0 / math.sqrt(area)
    verts = np.asarray(poly, dtype=float) * s
    # canonical start: lowest vertex, then leftmost
    k = int(min(range(len(verts)), key=lambda i: (verts[i][1], verts[i][0])))
    verts = np.roll(verts, -k, axis=0)
    w1 = tau_length(verts, tau)
    shape = WulffShape(vertices=verts, w1=w1, tau=tau,
                       meta={"n_directions": n_directions})
    if not w1 <= 4.0 * kappa + 1e-9:
        raise AssertionError("w1 <= 4 kappa violated; invalid tau table")
    return shape


def tau_ball(tau: TauNorm, center, radius) -> np.ndarray:
    return tau.ball_polygon(center, radius)


# ---------------------------------------------------------------------------
# estimation from dual connectivity decay
# ---------------------------------------------------------------------------

_DEFAULT_DIRECTIONS = ((1, 0), (3, 1), (2, 1), (3, 2), (1, 1))


@dataclass
class ConnectivityFit:
    direction: tuple
    ns: np.ndarray
    p_hat: np.ndarray
    tau_value: float
    stderr: float
    log_coeff: float
    intercept: float


def fit_decay(ns, p_hat, n_samples):
    """Weighted LS fit of -log p = tau*n + c*log n + b; returns coefficients
    and the stderr of tau."""
    ns = np.asarray(ns, dtype=float)
    p = np.asarray(p_hat, dtype=float)
    y = -np.log(p)
    # var of -log p_hat by the delta method
    var = (1.0 - p) / (n_samples * p)
    w = 1.0 / np.maximum(var, 1e-12)
    x = np.stack([ns, np.log(ns), np.ones_like(ns)], axis=1)
    sw = np.sqrt(w)
    beta, *_ = np.linalg.lstsq(x * sw[:, None], y * sw, rcond=None)
    resid = y - x @ beta
    dof = max(1, len(ns) - 3)
    s2 = float(np.sum(w * resid ** 2)) / dof
    cov = np.linalg.inv((x * w[:, None]).T @ x) * max(s2, 1.0)
    return beta, math.sqrt(abs(cov[0, 0]))


def estimate_tau(params, bc="wired", directions=_DEFAULT_DIRECTIONS, max_n=8,
                 samples=4000, box_half=None, seed=1, n_sweeps=40,
                 thin=2) -> TauNorm:
    """Estimate the surface-tension norm from dual connectivity decay.

    For each direction x the probabilities P(0* <-> (nx)*) are measured on
    a box at least four times the largest displacement, then fitted with a
    log-n corrected exponential decay.  Fitted axis values are symmetrized
    over the lattice group and the unit ball convexified.

    Raises InsufficientDecayError when a fit has non-positive slope or the
    dual side shows no connectivity at all (degenerate p).
    """
    from . import kernels
    from .sampler import ModelParams

    if not isinstance(params, ModelParams):
        params = ModelParams(*params)
    params.require_nondegenerate()
    max_disp = max(max(abs(d[0]), abs(d[1])) * max(2, max_n // max(abs(d[0]), abs(d[1])))
                   for d in directions)
    if box_half is None:
        box_half = max(2 * max_disp, max_disp + 8)

    targets = []
    for d in directions:
        step = max(abs(d[0]), abs(d[1]))
        n_hi = max(2, max_n // step)
        for n in range(1, n_hi + 1):
            targets.append((d, n, (n * d[0], n * d[1])))
    target_pts = np.asarray([t[2] for t in targets], dtype=np.int64)

    if params.q == 1.0:
        hits = kernels.iid_dual_connectivity_counts(
            1.0 - params.p, box_half, target_pts, samples, seed)
        eff_samples = samples
    else:
        hits = kernels.fk_dual_connectivity_counts(
            params.p, params.q, box_half, target_pts, samples, seed,
            wired=(bc == "wired"), n_sweeps=n_sweeps, thin=thin)
        eff_samples = samples

    fits = []
    values, errs = [], []
    for d in directions:
        ns, ps = [], []
        for (dd, n, _pt), h in zip(targets, hits):
            if dd == d and h > 0:
                ns.append(n)
                ps.append(h / eff_samples)
        if len(ns) < 3:
            raise InsufficientDecayError(
                f"direction {d}: not enough nonzero connectivity counts "
                f"(dual side degenerate at p={params.p})")
        beta, se = fit_decay(ns, ps, eff_samples)
        if beta[0] <= 0:
            raise InsufficientDecayError(
                f"direction {d}: fitted decay slope {beta[0]:.4g} <= 0; "
                "model not in the exponential-decay regime")
        fits.append(ConnectivityFit(tuple(d), np.asarray(ns), np.asarray(ps),
                                    float(beta[0]), se, float(beta[1]),
                                    float(beta[2])))
        values.append(float(beta[0]))
        errs.append(se)

    norm = TauNorm.from_direction_values(directions, values, errs,
                                         meta={
                                             "kind": "estimated",
                                             "p": params.p,
                                             "q": params.q,
                                             "bc": bc,
                                             "seed": seed,
                                             "samples": samples,
                                             "box_half": box_half,
                                         })
    norm.meta["fits"] = fits
    return norm


def equivnorm_band(norm: TauNorm, n_check=64, tol=None):
    """Check (1/sqrt2) kappa <= tau(x)/|x| <= sqrt2 kappa on a direction fan.

    ``tol`` defaults to three fitted standard errors when available, else
    1e-9.  Returns (ok, worst_low_margin, worst_high_margin).
    """
    if tol is None:
        errs = norm.meta.get("direction_stderrs")
        tol = 3.0 * max(errs) if errs else 1e-9
    kappa = norm.kappa
    th = np.linspace(0, 2 * math.pi, n_check, endpoint=False)
    dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    ratios = norm.values(dirs)
    lo = kappa / math.sqrt(2) - tol
    hi = kappa * math.sqrt(2) + tol
    ok = bool(np.all(ratios >= lo) and np.all(ratios <= hi))
    return ok, float(ratios.min() - lo), float(hi - ratios.max())


def conupr_check(norm: TauNorm):
    """Verify the subadditivity upper bound on the measured connectivities.

    For every measured point x = n*dir: p_hat <= exp(-tau_hat(x)) within
    three combined standard errors (fit + binomial).  Returns the list of
    violations (empty when the estimate is consistent).
    """
    out = []
    n_samp = norm.meta.get("samples", 1)
    for f in norm.meta.get("fits", []):
        d = np.asarray(f.direction, dtype=float)
        for n, p in zip(f.ns, f.p_hat):
            tau_x = norm.value(n * d)
            se_p = math.sqrt((1 - p) / max(1, n_samp * p))
            slack = 3.0 * (n * f.stderr + se_p)
            if math.log(p) > -tau_x + slack:
                out.append((f.direction, int(n), float(p), float(tau_x)))
    return out


def save_tau_table(norm: TauNorm, path):
    """Text rows 'angle value stderr' with a provenance header."""
    meta = norm.meta
    hdr = (f"# fkdroplets tau v1 kind={meta.get('kind')} p={meta.get('p')} "
           f"q={meta.get('q')} bc={meta.get('bc')} seed={meta.get('seed')} "
           f"samples={meta.get('samples')} box_half={meta.get('box_half')}")
    lines = [hdr]
    dirs = meta.get("directions")
    if dirs:
        vals = meta["direction_values"]
        errs = meta.get("direction_stderrs") or [float("nan")] * len(dirs)
        for d, v, e in zip(dirs, vals, errs):
            ang = math.atan2(d[1], d[0])
            norm_d = math.hypot(d[0], d[1])
            lines.append(f"{ang!r} {v / norm_d!r} {e / norm_d!r}")
    else:
        for i in range(64):
            ang = math.pi / 4 * i / 64
            v = norm.value((math.cos(ang), math.sin(ang)))
            lines.append(f"{ang!r} {v!r} nan")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def save_wulff_polygon(shape: WulffShape, path, extra_header=""):
    hdr = f"# fkdroplets wulff v1 w1={shape.w1!r} {extra_header}".rstrip()
    lines = [hdr]
    for x, y in shape.vertices:
        lines.append(f"{x!r} {y!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
