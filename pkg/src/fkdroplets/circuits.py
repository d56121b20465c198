"""Dual circuits, interiors, and exterior-circuit extraction.

Conventions
-----------
A circuit on the dual lattice is stored as the cyclic sequence of its
dual sites (base integer coordinates; the actual point is base + 1/2),
positively (counterclockwise) oriented.  Its interior decomposes exactly
into unit faces of the dual lattice; those faces are indexed by their
centers, which are regular lattice sites.  Symmetrically, a circuit of
regular bonds has interior faces indexed by the dual sites at their
centers.

Circuits may touch themselves at sites (never crossing); interiors are
computed by flood fill over faces blocked by circuit bonds, which is
insensitive to touching.

Face/vertex convention used throughout: a face with integer index z has
its four corners at the lattice points with base coordinates z-(1,1),
z-(1,0), z-(0,1) and z.  For a dual circuit, z is a regular site (the
face center); for a regular circuit, z is the dual-site base of the face
center shifted by (1,1), i.e. the face centered at the dual point
b + (1/2,1/2) carries index z = b + (1,1).
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import MalformedCircuitError

# direction vectors, counterclockwise order: E, N, W, S
_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


def _bond_key(a, b):
    """Canonical key (x, y, axis) for the unit bond between lattice points a, b."""
    if b < a:
        a, b = b, a
    dx, dy = b[0] - a[0], b[1] - a[1]
    if (dx, dy) == (1, 0):
        return (a[0], a[1], 0)
    if (dx, dy) == (0, 1):
        return (a[0], a[1], 1)
    raise MalformedCircuitError(f"{a} and {b} are not lattice neighbours")


def _face_wall(face, d):
    """Bond key of the wall crossed when stepping from ``face`` by direction d."""
    zx, zy = face
    if d == (1, 0):
        return (zx, zy - 1, 1)
    if d == (-1, 0):
        return (zx - 1, zy - 1, 1)
    if d == (0, 1):
        return (zx - 1, zy, 0)
    return (zx - 1, zy - 1, 0)


def _edge_faces(key):
    """The two face indices flanking a bond, as (left, right) of its +direction."""
    x, y, axis = key
    if axis == 0:
        return (x + 1, y + 1), (x + 1, y)
    return (x, y + 1), (x + 1, y + 1)


def _left_right_faces(base, d):
    """Face indices left/right of the directed unit edge from point ``base``."""
    x, y = base
    if d == (1, 0):
        return (x + 1, y + 1), (x + 1, y)
    if d == (-1, 0):
        return (x, y), (x, y + 1)
    if d == (0, 1):
        return (x, y + 1), (x + 1, y + 1)
    return (x + 1, y), (x, y)


class Circuit:
    """A non-self-crossing lattice circuit, CCW oriented.

    ``sites`` holds base integer coordinates; for a dual circuit the plane
    point of a site is base + (1/2, 1/2), for a regular circuit the base
    itself.
    """

    __slots__ = ("sites", "dual", "_cache")

    def __init__(self, sites, dual=True):
        sites = tuple((int(x), int(y)) for x, y in sites)
        if len(sites) < 4:
            raise MalformedCircuitError("circuit needs at least 4 sites")
        self.sites = sites
        self.dual = bool(dual)
        self._cache = {}

    def __len__(self):
        return len(self.sites)

    def __repr__(self):
        kind = "dual" if self.dual else "regular"
        return f"Circuit({kind}, {len(self.sites)} sites, start={self.sites[0]})"

    def __eq__(self, other):
        return (isinstance(other, Circuit) and self.dual == other.dual
                and self.canonical_sites() == other.canonical_sites())

    def __hash__(self):
        return hash((self.dual, self.canonical_sites()))

    def canonical_sites(self):
        """Rotation-invariant representative of the cyclic site sequence."""
        if "canon" not in self._cache:
            s = self.sites
            k = min(range(len(s)), key=lambda i: s[i])
            self._cache["canon"] = s[k:] + s[:k]
        return self._cache["canon"]

    @property
    def offset(self):
        return 0.5 if self.dual else 0.0

    def points(self) -> np.ndarray:
        """(n, 2) float array of the circuit's plane points, cyclic order."""
        if "points" not in self._cache:
            self._cache["points"] = np.asarray(self.sites, dtype=float) + self.offset
        return self._cache["points"]

    @property
    def bonds(self):
        """Ordered tuple of bond keys along the circuit."""
        if "bonds" not in self._cache:
            s = self.sites
            self._cache["bonds"] = tuple(
                _bond_key(s[i], s[(i + 1) % len(s)]) for i in range(len(s))
            )
        return self._cache["bonds"]

    @property
    def bond_set(self) -> frozenset:
        if "bond_set" not in self._cache:
            self._cache["bond_set"] = frozenset(self.bonds)
        return self._cache["bond_set"]

    @property
    def site_set(self) -> frozenset:
        if "site_set" not in self._cache:
            self._cache["site_set"] = frozenset(self.sites)
        return self._cache["site_set"]

    def validate(self):
        """Check adjacency, distinct bonds, and the non-crossing property."""
        s = self.sites
        n = len(s)
        seen = set()
        for i in range(n):
            key = _bond_key(s[i], s[(i + 1) % n])
            if key in seen:
                raise MalformedCircuitError("repeated bond")
            seen.add(key)
        occ = {}
        for i, x in enumerate(s):
            occ.setdefault(x, []).append(i)
        for x, idxs in occ.items():
            if len(idxs) == 1:
                continue
            if len(idxs) > 2:
                raise MalformedCircuitError("site visited more than twice")
            i, j = idxs
            pairs = []
            for k in (i, j):
                pin = _dir_index(x, s[(k - 1) % n])
                pout = _dir_index(x, s[(k + 1) % n])
                pairs.append((pin, pout))
            if _pairs_interleave(pairs[0], pairs[1]):
                raise MalformedCircuitError(f"circuit crosses itself at {x}")
        return self

    def interior_faces(self) -> frozenset:
        """Face indices of Int: the faces of the bounded components."""
        if "faces" not in self._cache:
            self._cache["faces"] = _interior_faces(self.bond_set, self.sites)
        return self._cache["faces"]

    @property
    def area(self) -> int:
        return len(self.interior_faces())

    def interior_points(self) -> np.ndarray:
        """Plane points of the interior face centers."""
        off = 0.0 if self.dual else -0.5
        faces = sorted(self.interior_faces())
        return np.asarray(faces, dtype=float) + off

    def signed_area(self) -> float:
        """Shoelace area of the site polygon; positive when CCW."""
        p = self.points()
        x, y = p[:, 0], p[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def reversed(self) -> "Circuit":
        return Circuit(tuple(reversed(self.sites)), self.dual)

    def translated(self, dx, dy) -> "Circuit":
        return Circuit(tuple((x + dx, y + dy) for x, y in self.sites), self.dual)

    def index_of(self, site, occurrence=0):
        hits = [i for i, s in enumerate(self.sites) if s == tuple(site)]
        if not hits:
            raise ValueError(f"{site} not on circuit")
        return hits[occurrence]

    def site_strictly_interior(self, site) -> bool:
        """True when the lattice point (base coords) is in Int, not on the circuit."""
        site = (site[0], site[1])
        if site in self.site_set:
            return False
        # the four faces cornered at the site share one component; check one
        return site in self.interior_faces()

    def bond_interior(self, key) -> bool:
        """True when the bond's open segment lies in Int."""
        if key in self.bond_set:
            return False
        left, _right = _edge_faces(key)
        return left in self.interior_faces()

    def euclid_diameter(self) -> float:
        if "diam" not in self._cache:
            from .geometry import points_diameter

            self._cache["diam"] = points_diameter(self.points())
        return self._cache["diam"]

    def tau_diameter(self, tau) -> float:
        return tau.diameter(self.points())


def _dir_index(origin, other):
    d = (other[0] - origin[0], other[1] - origin[1])
    return _DIRS.index(d)


def _pairs_interleave(p1, p2):
    """Whether two transition chords at a 4-valent site interleave (cross)."""
    a, b = sorted(p1)
    c, d = sorted(p2)
    return (a < c < b < d) or (c < a < d < b)


def _interior_faces(bond_set, sites) -> frozenset:
    """Flood fill from outside the bounding box; unreached faces = interior."""
    xs = [s[0] for s in sites]
    ys = [s[1] for s in sites]
    x0, x1 = min(xs) - 1, max(xs) + 2
    y0, y1 = min(ys) - 1, max(ys) + 2
    w, h = x1 - x0 + 1, y1 - y0 + 1
    reached = np.zeros((w, h), dtype=bool)
    dq = deque()
    for i in range(w):
        for j in (0, h - 1):
            if not reached[i, j]:
                reached[i, j] = True
                dq.append((i, j))
    for j in range(h):
        for i in (0, w - 1):
            if not reached[i, j]:
                reached[i, j] = True
                dq.append((i, j))
    while dq:
        i, j = dq.popleft()
        z = (x0 + i, y0 + j)
        for d in _DIRS:
            i2, j2 = i + d[0], j + d[1]
            if 0 <= i2 < w and 0 <= j2 < h and not reached[i2, j2]:
                if _face_wall(z, d) not in bond_set:
                    reached[i2, j2] = True
                    dq.append((i2, j2))
    out = []
    for i in range(w):
        for j in range(h):
            if not reached[i, j]:
                out.append((x0 + i, y0 + j))
    return frozenset(out)


# ---------------------------------------------------------------------------
# boundary tracing and extraction
# ---------------------------------------------------------------------------


def trace_outer_boundary(faces) -> tuple:
    """CCW outer-boundary site cycle of an 8-connected face set.

    Walks directed edges keeping the region on the left; at pinch sites the
    rightmost admissible turn is taken, which merges diagonally-touching
    lobes into a single self-touching, non-crossing circuit.
    """
    faces = set(faces)
    f0 = min(faces, key=lambda z: (z[1], z[0]))
    start = (f0[0] - 1, f0[1] - 1)  # SW corner of the lowest, leftmost face
    seq = [start]
    di = 0  # first edge heads east along the bottom of f0
    v = (start[0] + 1, start[1])
    guard = 8 * len(faces) + 16
    while v != start:
        seq.append(v)
        for turn in (-1, 0, 1, 2):  # right, straight, left, back
            nd = (di + turn) % 4
            d = _DIRS[nd]
            lf, rf = _left_right_faces(v, d)
            if lf in faces and rf not in faces:
                v = (v[0] + d[0], v[1] + d[1])
                di = nd
                break
        else:
            raise MalformedCircuitError("boundary trace stuck")
        guard -= 1
        if guard <= 0:
            raise MalformedCircuitError("boundary trace did not close")
    return tuple(seq)


def _eight_components(faces) -> list[set]:
    faces = set(faces)
    comps = []
    while faces:
        seed = faces.pop()
        comp = {seed}
        dq = deque([seed])
        while dq:
            x, y = dq.popleft()
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    nb = (x + dx, y + dy)
                    if nb in faces:
                        faces.remove(nb)
                        comp.add(nb)
                        dq.append(nb)
        comps.append(comp)
    return comps


def extract_exterior_circuits(open_bonds, face_lo, face_hi, dual=True,
                              discard_margin=1):
    """All exterior circuits of a set of open (dual) bond keys.

    Faces are scanned over the integer rectangle [face_lo, face_hi]^2 with
    one ring of padding.  Components of unreached faces that come within
    ``discard_margin`` faces of the rectangle's edge are discarded: such
    circuits cannot be certified exterior in finite volume.

    Returns a list of (circuit, interior_face_set) pairs.
    """
    open_bonds = set(open_bonds)
    x0 = face_lo - 1
    x1 = face_hi + 1
    w = x1 - x0 + 1
    reached = np.zeros((w, w), dtype=bool)
    dq = deque()
    for i in range(w):
        for j in (0, w - 1):
            reached[i, j] = True
            reached[j, i] = True
            dq.append((i, j))
            dq.append((j, i))
    while dq:
        i, j = dq.popleft()
        z = (x0 + i, x0 + j)
        for d in _DIRS:
            i2, j2 = i + d[0], j + d[1]
            if 0 <= i2 < w and 0 <= j2 < w and not reached[i2, j2]:
                if _face_wall(z, d) not in open_bonds:
                    reached[i2, j2] = True
                    dq.append((i2, j2))
    unreached = {
        (x0 + i, x0 + j) for i in range(w) for j in range(w) if not reached[i, j]
    }
    lo_keep = face_lo + discard_margin
    hi_keep = face_hi - discard_margin
    out = []
    for comp in _eight_components(unreached):
        if any(not (lo_keep <= z[0] <= hi_keep and lo_keep <= z[1] <= hi_keep)
               for z in comp):
            continue
        seq = trace_outer_boundary(comp)
        out.append((Circuit(seq, dual=dual), frozenset(comp)))
    return out


def dual_clusters(config):
    """Partition of the box's dual sites by open-dual-bond connectivity."""
    parent = {}

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for ds in config.dual_sites():
        parent[ds] = ds
    for (x, y, axis) in config.open_dual_bonds():
        a = (x, y)
        b = (x + 1, y) if axis == 0 else (x, y + 1)
        if a in parent and b in parent:
            union(a, b)
    groups = {}
    for ds in parent:
        groups.setdefault(find(ds), set()).add(ds)
    return list(groups.values())


def exterior_circuit_around(config, site, discard_margin=1):
    """The exterior open dual circuit surrounding a regular site (Gamma_x)."""
    n = config.box.half_width
    if not (-n + 1 <= site[0] <= n - 1 and -n + 1 <= site[1] <= n - 1):
        raise ValueError("site must be inside the box with margin >= 1")
    target = (site[0], site[1])
    for circ, faces in config.exterior_circuits(discard_margin=discard_margin):
        if target in faces:
            return circ
    return None


def large_exterior_circuits(config, threshold, tau, discard_margin=1):
    """Exterior open dual circuits with tau-diameter strictly above threshold."""
    return [
        circ
        for circ, _faces in config.exterior_circuits(discard_margin=discard_margin)
        if circ.tau_diameter(tau) > threshold
    ]


def innermost_circuit_surrounding(config, region_faces, discard_margin=1):
    """Innermost open circuit of regular bonds surrounding the given faces.

    ``region_faces`` are regular-lattice faces given by the dual-site base
    of their centers (the face with corners (x, y)..(x+1, y+1) is passed as
    (x, y)).  Fills outward from the region across closed bonds; the fill's
    outer boundary is the innermost surrounding open circuit.  Returns None
    when the fill escapes towards the box boundary.
    """
    n = config.box.half_width
    open_bonds = set(config.open_regular_bonds())
    # shared convention: face index z has corners at sites z-(1,1)..z
    region = {(f[0] + 1, f[1] + 1) for f in region_faces}
    lo, hi = -n + 1 + discard_margin, n - discard_margin
    filled = set(region)
    dq = deque(region)
    while dq:
        z = dq.popleft()
        for d in _DIRS:
            nb = (z[0] + d[0], z[1] + d[1])
            if nb in filled:
                continue
            if _face_wall(z, d) not in open_bonds:
                if not (lo <= nb[0] <= hi and lo <= nb[1] <= hi):
                    return None
                filled.add(nb)
                dq.append(nb)
    for comp in _eight_components(filled):
        if comp & region:
            return Circuit(trace_outer_boundary(comp), dual=False)
    return None


def segment(circuit: Circuit, u, v, closed=True, u_occurrence=0, v_occurrence=0):
    """Arc of the circuit from u to v in positive orientation (site list).

    ``closed`` includes both endpoints (gamma^[u,v]); otherwise both are
    excluded (gamma^(u,v)).
    """
    i = circuit.index_of(u, u_occurrence)
    j = circuit.index_of(v, v_occurrence)
    n = len(circuit)
    if closed:
        if i == j:
            return [circuit.sites[i]]
        out = []
        k = i
        while True:
            out.append(circuit.sites[k])
            if k == j:
                return out
            k = (k + 1) % n
    out = []
    k = (i + 1) % n
    while k != j:
        out.append(circuit.sites[k])
        k = (k + 1) % n
    return out


def arc_index_range(n, i, j):
    """Indices of the closed arc from position i to position j on an n-cycle."""
    out = [i]
    k = i
    while k != j:
        k = (k + 1) % n
        out.append(k)
    return out


def export_circuit(circuit: Circuit, path, tau=None):
    """Write a circuit file: header with area and tau-diameter, one site/line."""
    tdiam = circuit.tau_diameter(tau) if tau is not None else float("nan")
    lines = [f"# fkdroplets circuit v1 area={circuit.area} tau_diam={tdiam!r} "
             f"dual={int(circuit.dual)}"]
    for p in circuit.points():
        lines.append(f"{p[0]!r} {p[1]!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_circuit(path) -> Circuit:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise MalformedCircuitError("missing circuit header")
    dual = "dual=0" not in lines[0]
    off = 0.5 if dual else 0.0
    sites = []
    for ln in lines[1:]:
        xs, ys = ln.split()
        x, y = float(xs) - off, float(ys) - off
        xi, yi = round(x), round(y)
        if abs(x - xi) > 1e-9 or abs(y - yi) > 1e-9:
            raise MalformedCircuitError(f"non-lattice site line: {ln}")
        sites.append((xi, yi))
    return Circuit(tuple(sites), dual=dual).validate()
