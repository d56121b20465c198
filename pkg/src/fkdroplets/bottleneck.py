"""Bottlenecks, surgery, and descendant trees of dual circuits.

A (q, r)-bottleneck of an exterior dual circuit is an ordered site pair
(u, v) joined through the interior by a dual path of at most q bonds,
whose two circuit arcs both have Euclidean diameter at least r.  It is
clean when the L-shaped canonical path between the sites stays interior.
Surgery cuts the circuit across a clean bottleneck by opening the regular
collar around the canonical path and re-closing the patch bonds that were
interior, splitting the circuit into offspring whose interiors exactly
tile Int(gamma) minus the 2-neighborhood of the path.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .circuits import (Circuit, _bond_key, _face_wall, arc_index_range,
                       extract_exterior_circuits)
from .geometry import points_diameter

_DIRS = ((1, 0), (0, 1), (-1, 0), (0, -1))


@dataclass(frozen=True)
class BottleneckParams:
    q: int
    r: float

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be a positive integer")
        if self.r <= self.q:
            raise ValueError("need r > q")


@dataclass
class Bottleneck:
    u: tuple
    v: tuple
    u_idx: int
    v_idx: int
    witness: list            # dual-site path u..v, len(witness)-1 bonds
    clean: bool
    diam_uv: float           # diameter of the arc u -> v (positive orientation)
    diam_vu: float

    @property
    def path_length(self) -> int:
        return len(self.witness) - 1


def canonical_path(u, v) -> list:
    """L-shaped dual path: horizontal from u to (v_x, u_y), then vertical."""
    if tuple(u) == tuple(v):
        raise ValueError("canonical path needs distinct endpoints")
    out = [(u[0], u[1])]
    if v[0] != u[0]:
        step = 1 if v[0] > u[0] else -1
        for x in range(u[0] + step, v[0] + step, step):
            out.append((x, u[1]))
    if v[1] != u[1]:
        step = 1 if v[1] > u[1] else -1
        for y in range(u[1] + step, v[1] + step, step):
            out.append((v[0], y))
    return out


def _path_bonds(path):
    return [_bond_key(path[i], path[i + 1]) for i in range(len(path) - 1)]


def path_is_interior(circuit: Circuit, path) -> bool:
    """Whether the path lies in Int(circuit) except for its endpoints."""
    interior = circuit.site_strictly_interior
    for site in path[1:-1]:
        if not interior(site):
            return False
    if len(path) == 2:
        return circuit.bond_interior(_bond_key(path[0], path[1]))
    # with strictly interior intermediate sites the end bonds are interior too
    return True


def is_clean(circuit: Circuit, u, v) -> bool:
    return path_is_interior(circuit, canonical_path(u, v))


def _interior_reach(circuit: Circuit, u, q):
    """Map circuit-site -> (dist, interior witness path from u), dist <= q."""
    hits = {}
    site_set = circuit.site_set
    interior = circuit.site_strictly_interior
    for d in _DIRS:
        y = (u[0] + d[0], u[1] + d[1])
        if y in site_set and y != u:
            if circuit.bond_interior(_bond_key(u, y)):
                hits[y] = [u, y]
    parent = {}
    dist = {}
    dq = deque()
    for d in _DIRS:
        x = (u[0] + d[0], u[1] + d[1])
        if interior(x):
            dist[x] = 1
            parent[x] = u
            dq.append(x)
    while dq:
        x = dq.popleft()
        dx = dist[x]
        for d in _DIRS:
            y = (x[0] + d[0], x[1] + d[1])
            if y in site_set:
                if y != u and dx + 1 <= q and y not in hits:
                    path = [y, x]
                    s = x
                    while s != u:
                        s = parent[s]
                        path.append(s)
                    hits[y] = path[::-1]
            elif dx + 1 <= q - 1 and y not in dist and interior(y):
                dist[y] = dx + 1
                parent[y] = x
                dq.append(y)
    return hits


def find_bottlenecks(circuit: Circuit, params: BottleneckParams,
                     clean_only=False) -> list[Bottleneck]:
    """All ordered (q, r)-bottlenecks, sorted by (u, v) site pairs.

    Interior witness paths are found by breadth-first search from each
    circuit site through strictly interior dual sites (the endpoints may
    lie on the circuit, nothing else may).
    """
    q, r = params.q, params.r
    n = len(circuit)
    pts = circuit.points()
    positions = {}
    for i, s in enumerate(circuit.sites):
        positions.setdefault(s, []).append(i)
    reach_cache = {}
    out = []
    seen_pairs = set()
    for u_site, u_idxs in positions.items():
        if u_site not in reach_cache:
            reach_cache[u_site] = _interior_reach(circuit, u_site, q)
        hits = reach_cache[u_site]
        for v_site, witness in hits.items():
            for i in u_idxs:
                for j in positions[v_site]:
                    if (i, j) in seen_pairs or i == j:
                        continue
                    seen_pairs.add((i, j))
                    arc_uv = arc_index_range(n, i, j)
                    arc_vu = arc_index_range(n, j, i)
                    d_uv = points_diameter(pts[arc_uv])
                    if d_uv < r:
                        continue
                    d_vu = points_diameter(pts[arc_vu])
                    if d_vu < r:
                        continue
                    cl = is_clean(circuit, u_site, v_site)
                    if clean_only and not cl:
                        continue
                    out.append(Bottleneck(u=u_site, v=v_site, u_idx=i,
                                          v_idx=j, witness=witness, clean=cl,
                                          diam_uv=d_uv, diam_vu=d_vu))
    out.sort(key=lambda b: (b.u, b.v, b.u_idx, b.v_idx))
    return out


def primary_bottleneck(circuit: Circuit, params: BottleneckParams) -> Bottleneck:
    """Deterministic choice: lexicographically smallest clean (u, v)."""
    found = find_bottlenecks(circuit, params, clean_only=True)
    if not found:
        raise ValueError("circuit has no clean bottleneck at these parameters")
    return found[0]


def clean_from_any(circuit: Circuit, b: Bottleneck,
                   params: BottleneckParams) -> Bottleneck:
    """Constructive reduction: a (q, r)-bottleneck with r > 3q yields a
    clean (q, r/3)-bottleneck.

    Walks the canonical path between the endpoints, splits it at its
    circuit contacts into interior gaps, and returns the gap separating
    two far points of the two arcs; its own arcs have diameter at least
    (r - q)/2 > r/3.
    """
    q, r = params.q, params.r
    if not r > 3 * q:
        raise ValueError("reduction requires r > 3q")
    n = len(circuit)
    pts = circuit.points()
    zeta = canonical_path(b.u, b.v)
    if path_is_interior(circuit, zeta):
        return Bottleneck(u=b.u, v=b.v, u_idx=b.u_idx, v_idx=b.v_idx,
                          witness=zeta, clean=True, diam_uv=b.diam_uv,
                          diam_vu=b.diam_vu)

    # far points of the two arcs, distance >= (r - q)/2 from the path
    zeta_pts = np.asarray(zeta, dtype=float) + circuit.offset
    arc_uv = arc_index_range(n, b.u_idx, b.v_idx)
    arc_vu = arc_index_range(n, b.v_idx, b.u_idx)

    def far_point(arc):
        apts = pts[arc]
        d2 = np.sum((apts[:, None, :] - zeta_pts[None, :, :]) ** 2, axis=-1)
        dmin = np.sqrt(d2.min(axis=1))
        k = int(np.argmax(dmin))
        return arc[k], float(dmin[k])

    iz1, d1 = far_point(arc_uv)
    iz2, d2 = far_point(arc_vu)
    need = (r - q) / 2.0
    if d1 < need or d2 < need:
        raise AssertionError("far-point guarantee failed; not a (q,r)-bottleneck?")

    # decompose the canonical path at its circuit contacts
    site_set = circuit.site_set
    contacts = [k for k, ssite in enumerate(zeta) if ssite in site_set]
    gaps = []
    for a, c in zip(contacts[:-1], contacts[1:]):
        seg = zeta[a:c + 1]
        if path_is_interior(circuit, seg):
            gaps.append((a, c))
    for a, c in gaps:
        xa, xc = zeta[a], zeta[c]
        for ia in _occurrences(circuit, xa):
            for ic in _occurrences(circuit, xc):
                if ia == ic:
                    continue
                arc = set(arc_index_range(n, ia, ic))
                inside = (iz1 in arc, iz2 in arc)
                if inside[0] == inside[1]:
                    continue
                d_ab = points_diameter(pts[arc_index_range(n, ia, ic)])
                d_ba = points_diameter(pts[arc_index_range(n, ic, ia)])
                if d_ab >= need - 1e-9 and d_ba >= need - 1e-9:
                    return Bottleneck(u=xa, v=xc, u_idx=ia, v_idx=ic,
                                      witness=zeta[a:c + 1], clean=True,
                                      diam_uv=d_ab, diam_vu=d_ba)
    raise AssertionError("no separating interior gap found; input was not a "
                         "(q,r)-bottleneck with r > 3q")


def _occurrences(circuit: Circuit, site):
    return [i for i, s in enumerate(circuit.sites) if s == site]


# ---------------------------------------------------------------------------
# surgery
# ---------------------------------------------------------------------------


@dataclass
class SurgeryContext:
    zeta: list
    q1_corner_sites: set      # V(B(Q1)): regular-site corners of the path faces
    boundary_q1: set          # regular bond keys opened by the surgery
    q2_faces: frozenset       # dual faces removed from the interior
    boundary_q2: frozenset    # dual bond keys on the boundary of Q2
    j_eta: frozenset          # the interior ones among boundary_q2
    eta_id: str

    @property
    def q2_area(self) -> int:
        return len(self.q2_faces)


def surgery_context(circuit: Circuit, u, v) -> SurgeryContext:
    zeta = canonical_path(u, v)
    corners = set()
    for b in zeta:
        for dx in (0, 1):
            for dy in (0, 1):
                corners.add((b[0] + dx, b[1] + dy))
    boundary_q1 = set()
    for s in corners:
        for d in _DIRS:
            t = (s[0] + d[0], s[1] + d[1])
            if t not in corners:
                boundary_q1.add(_bond_key(s, t))
    q2 = frozenset(corners)  # dual faces covered by the 2x2 squares
    boundary_q2 = set()
    for z in q2:
        for d in _DIRS:
            nb = (z[0] + d[0], z[1] + d[1])
            if nb not in q2:
                boundary_q2.add(_face_wall(z, d))
    j_eta = frozenset(e for e in boundary_q2 if circuit.bond_interior(e))
    eta_id = hashlib.sha1(repr(sorted(j_eta)).encode()).hexdigest()[:8]
    assert len(boundary_q2) <= 4 * (len(zeta) - 1) + 8
    return SurgeryContext(zeta=zeta, q1_corner_sites=corners,
                          boundary_q1=frozenset(boundary_q1),
                          q2_faces=q2, boundary_q2=frozenset(boundary_q2),
                          j_eta=j_eta, eta_id=eta_id)


def _dual_key_of_regular(key):
    x, y, axis = key
    return (x, y - 1, 1) if axis == 0 else (x - 1, y, 0)


def surgery_on_circuit(circuit: Circuit, b: Bottleneck):
    """Pure surgery: offspring circuits of gamma at the clean bottleneck.

    Works on the minimal configuration in which gamma's bonds are the only
    open dual bonds; the offspring consist of surviving gamma bonds plus
    the patch bonds of J_eta.  Returns (offspring list, SurgeryContext).
    """
    if not b.clean:
        raise ValueError("surgery requires a clean bottleneck")
    ctx = surgery_context(circuit, b.u, b.v)
    cut = {_dual_key_of_regular(e) for e in ctx.boundary_q1}
    new_open = (set(circuit.bond_set) - cut) | set(ctx.j_eta)
    xs = [s[0] for s in circuit.sites]
    ys = [s[1] for s in circuit.sites]
    lo = min(min(xs), min(ys)) - 2
    hi = max(max(xs), max(ys)) + 3
    found = extract_exterior_circuits(new_open, lo, hi, dual=True,
                                      discard_margin=1)
    allowed = circuit.interior_faces() - ctx.q2_faces
    offspring = [c for c, faces in found if faces <= allowed]
    return offspring, ctx


def surgery(config, circuit: Circuit, b: Bottleneck, eta=None):
    """Configuration-level surgery Y_{uv eta}.

    Opens the regular bonds of the Q1 collar, closes the regular bonds
    dual to J_eta, leaves everything else; eta (a bond set or its id) is
    recomputed from the circuit and must match when declared.  Returns
    (new config, offspring circuits, context).
    """
    from .lattice import DualBond, DualSite, primal_of

    if not b.clean:
        raise ValueError("surgery requires a clean bottleneck")
    ctx = surgery_context(circuit, b.u, b.v)
    if eta is not None:
        declared = eta if isinstance(eta, str) else \
            hashlib.sha1(repr(sorted(eta)).encode()).hexdigest()[:8]
        if declared != ctx.eta_id:
            raise ValueError(
                f"declared type {declared} does not match the configuration's "
                f"interior boundary set {ctx.eta_id}")
    new = config.copy()
    for key in ctx.boundary_q1:
        x, y, axis = key
        endpoint = (x + (1 - axis), y + axis)
        # collar bonds outside the box have no open dual partner anyway
        if config.box.contains_site((x, y)) and config.box.contains_site(endpoint):
            new.set(key, 1)
    for dkey in ctx.j_eta:
        e = primal_of(DualBond(DualSite(dkey[0], dkey[1]), dkey[2]))
        new.set((e.site.x, e.site.y, e.axis), 0)
    allowed = circuit.interior_faces() - ctx.q2_faces
    offspring = [c for c, faces in new.exterior_circuits() if faces <= allowed]
    return new, offspring, ctx


def newcircuits_identity_ok(circuit: Circuit, offspring, ctx) -> bool:
    """E-check: union of offspring interiors == Int(gamma) minus Q2, exactly."""
    union = set()
    for a in offspring:
        faces = a.interior_faces()
        if union & faces:
            return False
        union |= faces
    return union == set(circuit.interior_faces() - ctx.q2_faces)


# ---------------------------------------------------------------------------
# descendant trees
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    circuit: Circuit
    depth: int
    parent: int
    surgery_u: tuple = None
    surgery_v: tuple = None
    eta_id: str = None
    children: list = field(default_factory=list)
    is_final: bool = False


@dataclass
class DescendantTree:
    root: Circuit
    params: BottleneckParams
    tau: object
    nodes: list
    surgeries: int

    @property
    def finals(self) -> list:
        return [n.circuit for n in self.nodes if n.is_final]

    def alpha_max(self) -> Circuit:
        return max(self.finals, key=lambda c: (c.area, c.canonical_sites()))

    def large_finals(self) -> list:
        thr = self.tau.kappa * self.params.r / 3.0
        return [c for c in self.finals if self.tau.diameter(c.points()) > thr]

    def f_set(self) -> list:
        return self.large_finals()

    def f_prime(self) -> list:
        amax = self.alpha_max()
        return [c for c in self.large_finals() if c is not amax]

    def d_sum(self) -> float:
        return float(sum(self.tau.diameter(c.points())
                         for c in self.large_finals()))

    def d_prime(self) -> float:
        return float(sum(self.tau.diameter(c.points()) for c in self.f_prime()))


def descend(circuit: Circuit, params: BottleneckParams, tau) -> DescendantTree:
    """Iterate clean-bottleneck surgery to the final descendants.

    Each node with a clean (q, r)-bottleneck is cut at its primary (the
    lexicographically least clean pair); offspring recurse.  Nodes without
    clean bottlenecks are final.
    """
    nodes = [TreeNode(circuit=circuit, depth=0, parent=-1)]
    stack = [0]
    surgeries = 0
    while stack:
        k = stack.pop()
        node = nodes[k]
        found = find_bottlenecks(node.circuit, params, clean_only=True)
        if not found:
            node.is_final = True
            continue
        b = found[0]
        offspring, ctx = surgery_on_circuit(node.circuit, b)
        if not newcircuits_identity_ok(node.circuit, offspring, ctx):
            raise AssertionError("surgery identity violated")
        surgeries += 1
        node.surgery_u, node.surgery_v = b.u, b.v
        node.eta_id = ctx.eta_id
        for a in offspring:
            nodes.append(TreeNode(circuit=a, depth=node.depth + 1, parent=k))
            node.children.append(len(nodes) - 1)
            stack.append(len(nodes) - 1)
    return DescendantTree(root=circuit, params=params, tau=tau, nodes=nodes,
                          surgeries=surgeries)


@dataclass
class HullSizeAudit:
    lhs: float      # W(dCo(gamma))
    rhs: float      # W(dCo(alpha_max)) + 19 D'
    w_alpha_max: float
    d_prime: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + 1e-9


def hull_size_check(tree: DescendantTree) -> HullSizeAudit:
    from .geometry import convex_hull
    from .tau_wulff import tau_length

    tau = tree.tau
    lhs = tau_length(convex_hull(tree.root).polygon, tau)
    amax = tree.alpha_max()
    w_amax = tau_length(convex_hull(amax).polygon, tau)
    dp = tree.d_prime()
    return HullSizeAudit(lhs=lhs, rhs=w_amax + 19.0 * dp,
                         w_alpha_max=w_amax, d_prime=dp)


def export_tree(tree: DescendantTree, path):
    lines = [f"# fkdroplets tree v1 q={tree.params.q} r={tree.params.r!r} "
             f"surgeries={tree.surgeries}"]
    for node in tree.nodes:
        u = node.surgery_u if node.surgery_u else "-"
        v = node.surgery_v if node.surgery_v else "-"
        eta = node.eta_id or "-"
        lines.append(f"{node.depth} {u} {v} {eta} {node.circuit.area} "
                     f"{tree.tau.diameter(node.circuit.points())!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def tree_summary_csv_row(tree: DescendantTree) -> str:
    a = tree.root.area
    ap = tree.alpha_max().area
    k = len(tree.f_prime())
    return f"{a},{ap},{k},{tree.d_sum()!r},{tree.d_prime()!r}"
