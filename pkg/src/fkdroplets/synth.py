"""Synthetic circuit fixtures: blobs, dumbbells, convex lattice cycles.

These generators feed the randomized corpora (skeleton bounds, bottleneck
lemmas, surgery identities).  Everything is seeded through an explicit
numpy Generator so corpora are reproducible.
"""

from __future__ import annotations

import numpy as np

from .circuits import Circuit, _eight_components, trace_outer_boundary
from .geometry import convex_hull_points


def circuit_from_faces(faces, dual=True) -> Circuit:
    """Outer-boundary circuit of an 8-connected face set."""
    comps = _eight_components(set(faces))
    comp = max(comps, key=len)
    return Circuit(trace_outer_boundary(comp), dual=dual)


def disk_faces(cx, cy, radius):
    out = set()
    r2 = radius * radius
    for x in range(int(cx - radius) - 1, int(cx + radius) + 2):
        for y in range(int(cy - radius) - 1, int(cy + radius) + 2):
            if (x - cx) ** 2 + (y - cy) ** 2 <= r2:
                out.add((x, y))
    return out


def random_blob_circuit(rng, mean_radius=8, n_lobes=4, bite_fraction=0.5,
                        dual=True) -> Circuit:
    """Rough droplet: union of overlapping disks with boundary bites.

    Bites subtract small disks centered near the boundary, producing the
    inward excursions the roughness functionals measure.
    """
    faces = set(disk_faces(0, 0, mean_radius))
    for _ in range(n_lobes):
        ang = rng.uniform(0, 2 * np.pi)
        rad = rng.uniform(0.3, 0.7) * mean_radius
        d = rng.uniform(0.4, 0.9) * mean_radius
        faces |= disk_faces(d * np.cos(ang), d * np.sin(ang), rad)
    n_bites = rng.integers(0, max(1, int(bite_fraction * 6)) + 1)
    for _ in range(n_bites):
        ang = rng.uniform(0, 2 * np.pi)
        rad = rng.uniform(0.15, 0.35) * mean_radius
        d = rng.uniform(0.9, 1.25) * mean_radius
        bite = disk_faces(d * np.cos(ang), d * np.sin(ang), rad)
        if len(faces - bite) > 8:
            faces -= bite
    comps = _eight_components(faces)
    comp = max(comps, key=len)
    return Circuit(trace_outer_boundary(comp), dual=dual)


def rect_faces(x0, y0, x1, y1):
    return {(x, y) for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)}


def dumbbell_circuit(block=11, neck_len=3, neck_width=1, offset=0,
                     dual=True) -> Circuit:
    """Two block x block squares joined by a corridor of the given width.

    ``offset`` shifts the corridor off the blocks' midline.
    """
    half = block // 2
    left = rect_faces(-neck_len // 2 - block, -half, -neck_len // 2 - 1, half)
    right = rect_faces(neck_len // 2 + 1, -half, neck_len // 2 + block, half)
    y0 = offset
    neck = rect_faces(-neck_len // 2 - 1, y0, neck_len // 2 + 1,
                      y0 + neck_width - 1)
    return circuit_from_faces(left | right | neck, dual=dual)


def zigzag_dumbbell_circuit(block=11, jog=3, dual=True) -> Circuit:
    """Dumbbell whose neck jogs sideways, so the canonical L-path between
    the flanking sites leaves the interior (a non-clean bottleneck)."""
    half = block // 2
    left = rect_faces(-6 - block, -half, -7 + block - block, half)
    left = rect_faces(-6 - block, -half, -7, half)
    right = rect_faces(7, -half, 6 + block, half)
    neck = rect_faces(-7, 0, -3, 0) | rect_faces(-3, -jog, -3, 0) \
        | rect_faces(-3, -jog, 3, -jog) | rect_faces(3, -jog, 3, 0) \
        | rect_faces(3, 0, 7, 0)
    return circuit_from_faces(left | right | neck, dual=dual)


def chain_dumbbell_circuit(blocks=3, block=9, neck_len=3, dual=True) -> Circuit:
    """Several blocks in a row joined by width-1 corridors."""
    faces = set()
    step = block + neck_len
    for k in range(blocks):
        x0 = k * step
        faces |= rect_faces(x0, 0, x0 + block - 1, block - 1)
        if k + 1 < blocks:
            mid = block // 2
            faces |= rect_faces(x0 + block, mid, x0 + block + neck_len - 1, mid)
    return circuit_from_faces(faces, dual=dual)


def random_dumbbell_circuit(rng, dual=True) -> Circuit:
    """Randomized two-blob shape with a narrow neck (has a bottleneck)."""
    r1 = int(rng.integers(5, 9))
    r2 = int(rng.integers(5, 9))
    gap = int(rng.integers(2, 6))
    off = int(rng.integers(-2, 3))
    neck_w = int(rng.integers(1, 3))
    left = disk_faces(-r1 - gap, 0, r1)
    right = disk_faces(r2 + gap, 0, r2)
    neck = rect_faces(-gap - 1, off, gap + 1, off + neck_w - 1)
    faces = left | right | neck
    # ragged edges
    for _ in range(int(rng.integers(0, 4))):
        ang = rng.uniform(0, 2 * np.pi)
        c = (-r1 - gap, 0) if rng.random() < 0.5 else (r2 + gap, 0)
        rad = rng.uniform(1.0, 2.5)
        rr = max(r1, r2)
        bite = disk_faces(c[0] + rr * np.cos(ang), c[1] + rr * np.sin(ang), rad)
        cand = faces - bite
        comps = _eight_components(cand)
        if comps and len(max(comps, key=len)) > 0.8 * len(faces):
            faces = max(comps, key=len)
    return circuit_from_faces(faces, dual=dual)


def random_convex_cycle(rng, radius=30, n_points=40):
    """Convex lattice polygon: hull of random integer points in a disk.

    Returned as the CCW vertex array (floats), for hull-only machinery
    such as the skeleton construction.
    """
    pts = set()
    while len(pts) < max(8, n_points):
        x = rng.uniform(-radius, radius)
        y = rng.uniform(-radius, radius)
        if x * x + y * y <= radius * radius:
            pts.add((int(round(x)), int(round(y))))
    hull = convex_hull_points(pts)
    if len(hull) < 3:
        return random_convex_cycle(rng, radius + 2, n_points + 8)
    return np.asarray(hull, dtype=float)


def convex_blob_circuit(rng, radius=10, dual=True) -> Circuit:
    """Near-convex lattice circuit: faces inside a random convex polygon."""
    poly = random_convex_cycle(rng, radius=radius, n_points=24)
    from .skeleton import _point_in_convex

    faces = set()
    lo = int(np.floor(poly.min())) - 1
    hi = int(np.ceil(poly.max())) + 1
    hp = [tuple(p) for p in poly]
    for x in range(lo, hi + 1):
        for y in range(lo, hi + 1):
            if _point_in_convex((x, y), hp):
                faces.add((x, y))
    return circuit_from_faces(faces, dual=dual)


def dilate_circuit(circuit: Circuit, k: int) -> Circuit:
    """Integer dilation: each face becomes a k x k block of faces."""
    faces = circuit.interior_faces()
    big = set()
    for (x, y) in faces:
        for dx in range(k):
            for dy in range(k):
                big.add((k * x + dx, k * y + dy))
    return circuit_from_faces(big, dual=circuit.dual)


def forced_droplet_config(n, face_sets, bc="free", p_open=1.0, rng=None):
    """Box config whose open dual bonds are exactly the boundaries of the
    given face sets (plus iid noise on the remaining bonds when p_open < 1).

    Used to inject deterministic droplets for census mechanics tests.
    """
    from .sampler import BondConfig

    if rng is None or p_open >= 1.0:
        cfg = BondConfig.all_open(n, bc)
    else:
        cfg = BondConfig.random(n, bc, p_open, rng)
    from .lattice import DualBond, DualSite, primal_of

    for faces in face_sets:
        circ = circuit_from_faces(faces, dual=True)
        for (x, y, axis) in circ.bond_set:
            e = primal_of(DualBond(DualSite(x, y), axis))
            cfg.set((e.site.x, e.site.y, e.axis), 0)
    return cfg
