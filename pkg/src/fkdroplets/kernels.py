"""Numba kernels: heat-bath dynamics, dual flood fills, umbrella chains.

Array conventions (box of half-width B):
  regular sites  [-B..B]^2, side R = 2B+1
  dual sites     [-B..B-1]^2 (base coords), side S = 2B
  dual h-bonds   dh[x+B, y+B], base x in [-B..B-2], y in [-B..B-1]
  dual v-bonds   dv[x+B, y+B], base x in [-B..B-1], y in [-B..B-2]
  faces of dual circuits = regular sites, grid side F = R

A dual bond is open exactly when its regular bond is closed, so q = 1
sampling draws the dual arrays directly as iid Bernoulli(1 - p).

All kernels are seeded explicitly and single-threaded, so runs are
reproducible bit-for-bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# ---------------------------------------------------------------------------
# generic finite-graph heat bath (any q), used by the sampler and by the
# tau estimation chains
# ---------------------------------------------------------------------------


@njit(cache=True)
def _connected_off_bond(a, b, skip_bond, state, frozen, indptr, adj_bond,
                        adj_other, visited, stamp, queue):
    if a == b:
        return True
    visited[a] = stamp
    queue[0] = a
    head, tail = 0, 1
    while head < tail:
        s = queue[head]
        head += 1
        for k in range(indptr[s], indptr[s + 1]):
            e = adj_bond[k]
            if e == skip_bond:
                continue
            if state[e] == 0 and frozen[e] == 0:
                continue
            t = adj_other[k]
            if visited[t] == stamp:
                continue
            if t == b:
                return True
            visited[t] = stamp
            queue[tail] = t
            tail += 1
    return False


@njit(cache=True)
def heat_bath_run(state, frozen, indptr, adj_bond, adj_other, n_sites,
                  p, q, n_sweeps, seed):
    """In-place heat-bath sweeps over all non-frozen bonds in fixed order."""
    np.random.seed(seed)
    n_bonds = state.shape[0]
    visited = np.zeros(n_sites, dtype=np.int64)
    queue = np.empty(n_sites, dtype=np.int64)
    stamp = 0
    p_conn = p
    p_disc = p / (p + q * (1.0 - p))
    # endpoints are recovered from the adjacency of each bond
    ends_a = np.empty(n_bonds, dtype=np.int64)
    ends_b = np.empty(n_bonds, dtype=np.int64)
    ends_a[:] = -1
    for s in range(n_sites):
        for k in range(indptr[s], indptr[s + 1]):
            e = adj_bond[k]
            if ends_a[e] < 0:
                ends_a[e] = s
                ends_b[e] = adj_other[k]
    for _ in range(n_sweeps):
        for e in range(n_bonds):
            if frozen[e] == 1:
                continue
            stamp += 1
            conn = _connected_off_bond(ends_a[e], ends_b[e], e, state, frozen,
                                       indptr, adj_bond, adj_other, visited,
                                       stamp, queue)
            pr = p_conn if conn else p_disc
            state[e] = 1 if np.random.random() < pr else 0
    return state


@njit(cache=True)
def count_clusters(state, frozen, indptr, adj_bond, adj_other, n_sites,
                   visited, queue, stamp):
    c = 0
    for s in range(n_sites):
        if visited[s] >= stamp:
            continue
        c += 1
        visited[s] = stamp
        queue[0] = s
        head, tail = 0, 1
        while head < tail:
            u = queue[head]
            head += 1
            for k in range(indptr[u], indptr[u + 1]):
                e = adj_bond[k]
                if state[e] == 0 and frozen[e] == 0:
                    continue
                t = adj_other[k]
                if visited[t] < stamp:
                    visited[t] = stamp
                    queue[tail] = t
                    tail += 1
    return c


@njit(cache=True)
def heat_bath_stats(state, frozen, indptr, adj_bond, adj_other, n_sites,
                    p, q, burn, thin, n_samples, seed):
    """(n_open, n_clusters) for thinned heat-bath samples."""
    np.random.seed(seed)
    n_bonds = state.shape[0]
    visited = np.zeros(n_sites, dtype=np.int64)
    queue = np.empty(n_sites, dtype=np.int64)
    stamp = 0
    p_conn = p
    p_disc = p / (p + q * (1.0 - p))
    ends_a = np.empty(n_bonds, dtype=np.int64)
    ends_b = np.empty(n_bonds, dtype=np.int64)
    ends_a[:] = -1
    for s in range(n_sites):
        for k in range(indptr[s], indptr[s + 1]):
            e = adj_bond[k]
            if ends_a[e] < 0:
                ends_a[e] = s
                ends_b[e] = adj_other[k]
    out_open = np.empty(n_samples, dtype=np.int64)
    out_clus = np.empty(n_samples, dtype=np.int64)
    total_sweeps = burn + thin * n_samples
    rec = 0
    for sw in range(total_sweeps):
        for e in range(n_bonds):
            if frozen[e] == 1:
                continue
            stamp += 1
            conn = _connected_off_bond(ends_a[e], ends_b[e], e, state, frozen,
                                       indptr, adj_bond, adj_other, visited,
                                       stamp, queue)
            pr = p_conn if conn else p_disc
            state[e] = 1 if np.random.random() < pr else 0
        if sw >= burn and (sw - burn + 1) % thin == 0 and rec < n_samples:
            nop = 0
            for e in range(n_bonds):
                if frozen[e] == 0 and state[e] == 1:
                    nop += 1
            stamp += 1
            out_clus[rec] = count_clusters(state, frozen, indptr, adj_bond,
                                           adj_other, n_sites, visited, queue,
                                           stamp)
            out_open[rec] = nop
            rec += 1
    return out_open, out_clus


# ---------------------------------------------------------------------------
# iid dual sampling (q = 1) and droplet flood fills
# ---------------------------------------------------------------------------


@njit(cache=True)
def iid_dual_connectivity_counts(d, B, targets, samples, seed):
    """Hit counts of 0* <-> target* over iid dual configurations.

    ``targets`` is an (m, 2) int64 array of dual-site base coordinates.
    BFS explores only the origin's dual cluster.
    """
    np.random.seed(seed)
    S = 2 * B
    m = targets.shape[0]
    hits = np.zeros(m, dtype=np.int64)
    visited = np.zeros((S, S), dtype=np.int64)
    qx = np.empty(S * S, dtype=np.int64)
    qy = np.empty(S * S, dtype=np.int64)
    for it in range(samples):
        dh = np.random.random((S - 1, S)) < d
        dv = np.random.random((S, S - 1)) < d
        stamp = it + 1
        ox, oy = B, B  # origin dual site (base (0,0))
        visited[ox, oy] = stamp
        qx[0], qy[0] = ox, oy
        head, tail = 0, 1
        while head < tail:
            x, y = qx[head], qy[head]
            head += 1
            if x + 1 < S and visited[x + 1, y] != stamp and dh[x, y]:
                visited[x + 1, y] = stamp
                qx[tail], qy[tail] = x + 1, y
                tail += 1
            if x - 1 >= 0 and visited[x - 1, y] != stamp and dh[x - 1, y]:
                visited[x - 1, y] = stamp
                qx[tail], qy[tail] = x - 1, y
                tail += 1
            if y + 1 < S and visited[x, y + 1] != stamp and dv[x, y]:
                visited[x, y + 1] = stamp
                qx[tail], qy[tail] = x, y + 1
                tail += 1
            if y - 1 >= 0 and visited[x, y - 1] != stamp and dv[x, y - 1]:
                visited[x, y - 1] = stamp
                qx[tail], qy[tail] = x, y - 1
                tail += 1
        for t in range(m):
            tx, ty = targets[t, 0] + B, targets[t, 1] + B
            if 0 <= tx < S and 0 <= ty < S and visited[tx, ty] == stamp:
                hits[t] += 1
    return hits


@njit(cache=True)
def _dual_bfs_targets(state, rh_idx, rv_idx, B, targets, visited, stamp,
                      qx, qy, hits):
    """BFS over open dual bonds of a graph-state config; bumps hit counts."""
    S = 2 * B
    ox, oy = B, B
    visited[ox, oy] = stamp
    qx[0], qy[0] = ox, oy
    head, tail = 0, 1
    while head < tail:
        x, y = qx[head], qy[head]
        head += 1
        # dual h-bond base (x-B, y-B): dual of regular v-bond at
        # (x-B+1, y-B)-(x-B+1, y-B+1): open-dual iff regular closed
        if x + 1 < S and visited[x + 1, y] != stamp:
            e = rv_idx[x + 1, y]
            if e >= 0 and state[e] == 0:
                visited[x + 1, y] = stamp
                qx[tail], qy[tail] = x + 1, y
                tail += 1
        if x - 1 >= 0 and visited[x - 1, y] != stamp:
            e = rv_idx[x, y]
            if e >= 0 and state[e] == 0:
                visited[x - 1, y] = stamp
                qx[tail], qy[tail] = x - 1, y
                tail += 1
        if y + 1 < S and visited[x, y + 1] != stamp:
            e = rh_idx[x, y + 1]
            if e >= 0 and state[e] == 0:
                visited[x, y + 1] = stamp
                qx[tail], qy[tail] = x, y + 1
                tail += 1
        if y - 1 >= 0 and visited[x, y - 1] != stamp:
            e = rh_idx[x, y]
            if e >= 0 and state[e] == 0:
                visited[x, y - 1] = stamp
                qx[tail], qy[tail] = x, y - 1
                tail += 1
    for t in range(targets.shape[0]):
        tx, ty = targets[t, 0] + B, targets[t, 1] + B
        if 0 <= tx < S and 0 <= ty < S and visited[tx, ty] == stamp:
            hits[t] += 1


def fk_dual_connectivity_counts(p, q, B, targets, samples, seed, wired=True,
                                n_sweeps=40, thin=2):
    """Dual connectivity hit counts under the FK(p, q) box chain."""
    from .sampler import BondConfig, ModelParams, _box_graph_arrays

    cfg = BondConfig.all_open(B, "wired" if wired else "free")
    arrays = _box_graph_arrays(cfg)
    state, frozen, indptr, adj_bond, adj_other, n_sites, rh_idx, rv_idx = arrays
    heat_bath_run(state, frozen, indptr, adj_bond, adj_other, n_sites,
                  p, q, n_sweeps, seed)
    S = 2 * B
    visited = np.zeros((S, S), dtype=np.int64)
    qx = np.empty(S * S, dtype=np.int64)
    qy = np.empty(S * S, dtype=np.int64)
    hits = np.zeros(targets.shape[0], dtype=np.int64)
    for i in range(samples):
        heat_bath_run(state, frozen, indptr, adj_bond, adj_other, n_sites,
                      p, q, thin, seed + 1 + i)
        _dual_bfs_targets(state, rh_idx, rv_idx, B, targets, visited, i + 1,
                          qx, qy, hits)
    return hits


@njit(cache=True)
def droplet_fill(dh, dv, B, reached, comp, qx, qy):
    """Recompute the droplet around the origin site.

    Fills the face grid (faces = regular sites, side F = 2B+1) from the
    border across closed dual bonds; then collects the 8-connected
    unreached component containing the origin face.  ``reached`` and
    ``comp`` are uint8 work grids of side F, overwritten.  Returns the
    component's face count (0 when the origin face is reachable).
    """
    F = 2 * B + 1
    for i in range(F):
        for j in range(F):
            reached[i, j] = 0
            comp[i, j] = 0
    head, tail = 0, 1
    qx[0], qy[0] = 0, 0
    reached[0, 0] = 1
    for i in range(F):
        for jj in range(2):
            j = 0 if jj == 0 else F - 1
            if reached[i, j] == 0:
                reached[i, j] = 1
                qx[tail], qy[tail] = i, j
                tail += 1
            if reached[j, i] == 0:
                reached[j, i] = 1
                qx[tail], qy[tail] = j, i
                tail += 1
    while head < tail:
        i, j = qx[head], qy[head]
        head += 1
        # east wall: dual v-bond base (z_x, z_y-1) = arrays dv[i, j-1]
        if i + 1 < F:
            blocked = False
            if 0 <= j - 1 < dv.shape[1] and i < dv.shape[0]:
                blocked = dv[i, j - 1]
            if not blocked and reached[i + 1, j] == 0:
                reached[i + 1, j] = 1
                qx[tail], qy[tail] = i + 1, j
                tail += 1
        if i - 1 >= 0:
            blocked = False
            if 0 <= j - 1 < dv.shape[1] and i - 1 < dv.shape[0]:
                blocked = dv[i - 1, j - 1]
            if not blocked and reached[i - 1, j] == 0:
                reached[i - 1, j] = 1
                qx[tail], qy[tail] = i - 1, j
                tail += 1
        if j + 1 < F:
            blocked = False
            if 0 <= i - 1 < dh.shape[0] and j < dh.shape[1]:
                blocked = dh[i - 1, j]
            if not blocked and reached[i, j + 1] == 0:
                reached[i, j + 1] = 1
                qx[tail], qy[tail] = i, j + 1
                tail += 1
        if j - 1 >= 0:
            blocked = False
            if 0 <= i - 1 < dh.shape[0] and j - 1 < dh.shape[1]:
                blocked = dh[i - 1, j - 1]
            if not blocked and reached[i, j - 1] == 0:
                reached[i, j - 1] = 1
                qx[tail], qy[tail] = i, j - 1
                tail += 1
    if reached[B, B] == 1:
        return 0
    # 8-connected component of the origin face among unreached faces
    comp[B, B] = 1
    qx[0], qy[0] = B, B
    head, tail = 0, 1
    area = 0
    while head < tail:
        i, j = qx[head], qy[head]
        head += 1
        area += 1
        for di in range(-1, 2):
            for dj in range(-1, 2):
                ii, jj = i + di, j + dj
                if 0 <= ii < F and 0 <= jj < F and reached[ii, jj] == 0 \
                        and comp[ii, jj] == 0:
                    comp[ii, jj] = 1
                    qx[tail], qy[tail] = ii, jj
                    tail += 1
    return area


@njit(cache=True)
def _mark_gamma_bonds(comp, B, gh, gv):
    """Mark the circuit bonds: dual bonds separating comp from non-comp."""
    F = 2 * B + 1
    for i in range(gh.shape[0]):
        for j in range(gh.shape[1]):
            gh[i, j] = 0
    for i in range(gv.shape[0]):
        for j in range(gv.shape[1]):
            gv[i, j] = 0
    for i in range(F):
        for j in range(F):
            if comp[i, j] == 0:
                continue
            # east neighbour across dv[i, j-1]
            if i + 1 < F and comp[i + 1, j] == 0:
                if 0 <= j - 1 < gv.shape[1] and i < gv.shape[0]:
                    gv[i, j - 1] = 1
            if i - 1 >= 0 and comp[i - 1, j] == 0:
                if 0 <= j - 1 < gv.shape[1] and i - 1 >= 0:
                    gv[i - 1, j - 1] = 1
            if j + 1 < F and comp[i, j + 1] == 0:
                if 0 <= i - 1 < gh.shape[0] and j < gh.shape[1]:
                    gh[i - 1, j] = 1
            if j - 1 >= 0 and comp[i, j - 1] == 0:
                if 0 <= i - 1 < gh.shape[0] and j - 1 < gh.shape[1]:
                    gh[i - 1, j - 1] = 1


@njit(cache=True)
def umbrella_chunk(dh, dv, B, d, lng, hist, bin_lo, bin_width, n_bins,
                   win_lo, win_hi, lnf, n_sweeps, seed,
                   comp, gh, gv, reached, scratch, qx, qy, area_in,
                   sweep_areas):
    """Biased q=1 chain on the droplet area; runs n_sweeps and returns area.

    Proposals resample each dual bond from Bernoulli(d); moves that change
    the droplet are Metropolis-corrected by the piecewise-constant bias
    ``lng`` over area bins.  When ``lnf`` > 0 the bias adapts Wang-Landau
    style.  Moves leaving [win_lo, win_hi] are rejected.  The droplet mask
    ``comp``, its circuit-bond marks ``gh``/``gv`` and ``area_in`` must be
    consistent on entry (use droplet_fill + _mark_gamma_bonds).
    """
    np.random.seed(seed)
    area = area_in
    SH0, SH1 = dh.shape
    SV0, SV1 = dv.shape
    for sw in range(n_sweeps):
        for horiz in range(2):
            n0 = SH0 if horiz == 1 else SV0
            n1 = SH1 if horiz == 1 else SV1
            for x in range(n0):
                for y in range(n1):
                    if horiz == 1:
                        old = dh[x, y]
                    else:
                        old = dv[x, y]
                    new = 1 if np.random.random() < d else 0
                    if new == old:
                        b = (area - bin_lo) // bin_width
                        if lnf > 0.0 and 0 <= b < n_bins:
                            lng[b] += lnf
                            hist[b] += 1
                        continue
                    # flank faces of this dual bond
                    if horiz == 1:
                        # dual h-bond base (x-B, y-B): faces (x+1, y+1), (x+1, y)
                        f1i, f1j = x + 1, y + 1
                        f2i, f2j = x + 1, y
                        on_gamma = gh[x, y] == 1
                    else:
                        f1i, f1j = x, y + 1
                        f2i, f2j = x + 1, y + 1
                        on_gamma = gv[x, y] == 1
                    lazy = False
                    if new == 1:
                        if comp[f1i, f1j] == 1 and comp[f2i, f2j] == 1:
                            lazy = True
                    else:
                        if not on_gamma:
                            lazy = True
                    if lazy:
                        if horiz == 1:
                            dh[x, y] = new
                        else:
                            dv[x, y] = new
                        b = (area - bin_lo) // bin_width
                        if lnf > 0.0 and 0 <= b < n_bins:
                            lng[b] += lnf
                            hist[b] += 1
                        continue
                    # full recompute path
                    if horiz == 1:
                        dh[x, y] = new
                    else:
                        dv[x, y] = new
                    new_area = droplet_fill(dh, dv, B, reached, scratch, qx, qy)
                    accept = True
                    if new_area < win_lo or new_area > win_hi:
                        accept = False
                    else:
                        b_old = (area - bin_lo) // bin_width
                        b_new = (new_area - bin_lo) // bin_width
                        if b_old < 0:
                            b_old = 0
                        if b_old >= n_bins:
                            b_old = n_bins - 1
                        if b_new < 0:
                            b_new = 0
                        if b_new >= n_bins:
                            b_new = n_bins - 1
                        dl = lng[b_old] - lng[b_new]
                        if dl < 0.0:
                            if np.random.random() >= np.exp(dl):
                                accept = False
                    if accept:
                        area = new_area
                        for i in range(comp.shape[0]):
                            for j in range(comp.shape[1]):
                                comp[i, j] = scratch[i, j]
                        _mark_gamma_bonds(comp, B, gh, gv)
                    else:
                        if horiz == 1:
                            dh[x, y] = old
                        else:
                            dv[x, y] = old
                    b = (area - bin_lo) // bin_width
                    if lnf > 0.0 and 0 <= b < n_bins:
                        lng[b] += lnf
                        hist[b] += 1
        sweep_areas[sw] = area
    return area


@njit(cache=True)
def iid_area_tail_counts(d, B, thresholds, samples, seed):
    """Direct counting of P(|Int(Gamma_0)| >= A) under iid dual bonds."""
    np.random.seed(seed)
    S = 2 * B
    F = 2 * B + 1
    reached = np.zeros((F, F), dtype=np.uint8)
    comp = np.zeros((F, F), dtype=np.uint8)
    qx = np.empty(F * F, dtype=np.int64)
    qy = np.empty(F * F, dtype=np.int64)
    m = thresholds.shape[0]
    counts = np.zeros(m, dtype=np.int64)
    exist = 0
    for _ in range(samples):
        dh = (np.random.random((S - 1, S)) < d).astype(np.uint8)
        dv = (np.random.random((S, S - 1)) < d).astype(np.uint8)
        a = droplet_fill(dh, dv, B, reached, comp, qx, qy)
        if a > 0:
            exist += 1
        for t in range(m):
            if a >= thresholds[t]:
                counts[t] += 1
    return counts, exist


@njit(cache=True)
def census_fill(dh, dv, B, margin, forms, thr, labels, qx, qy, areas,
                diams):
    """Label the unreached 8-components; per component area and tau-diameter.

    Components touching the ``margin`` ring of the face grid are given a
    negative diameter so callers can discard them.  ``forms`` is the (k, 2)
    array of gauge forms of the norm.  Returns (n_components, total_large_area)
    with total_large_area the combined area of kept components whose
    tau-diameter exceeds ``thr``.
    """
    F = 2 * B + 1
    for i in range(F):
        for j in range(F):
            labels[i, j] = 0
    # border fill: label 'reached' as -1
    head, tail = 0, 1
    qx[0], qy[0] = 0, 0
    labels[0, 0] = -1
    for i in range(F):
        for jj in range(2):
            j = 0 if jj == 0 else F - 1
            if labels[i, j] == 0:
                labels[i, j] = -1
                qx[tail], qy[tail] = i, j
                tail += 1
            if labels[j, i] == 0:
                labels[j, i] = -1
                qx[tail], qy[tail] = j, i
                tail += 1
    while head < tail:
        i, j = qx[head], qy[head]
        head += 1
        if i + 1 < F and labels[i + 1, j] == 0:
            blocked = 0 <= j - 1 < dv.shape[1] and dv[i, j - 1]
            if not blocked:
                labels[i + 1, j] = -1
                qx[tail], qy[tail] = i + 1, j
                tail += 1
        if i - 1 >= 0 and labels[i - 1, j] == 0:
            blocked = 0 <= j - 1 < dv.shape[1] and dv[i - 1, j - 1]
            if not blocked:
                labels[i - 1, j] = -1
                qx[tail], qy[tail] = i - 1, j
                tail += 1
        if j + 1 < F and labels[i, j + 1] == 0:
            blocked = 0 <= i - 1 < dh.shape[0] and dh[i - 1, j]
            if not blocked:
                labels[i, j + 1] = -1
                qx[tail], qy[tail] = i, j + 1
                tail += 1
        if j - 1 >= 0 and labels[i, j - 1] == 0:
            blocked = 0 <= i - 1 < dh.shape[0] and dh[i - 1, j - 1]
            if not blocked:
                labels[i, j - 1] = -1
                qx[tail], qy[tail] = i, j - 1
                tail += 1
    k_forms = forms.shape[0]
    n_comp = 0
    total_large = 0
    for si in range(F):
        for sj in range(F):
            if labels[si, sj] != 0:
                continue
            n_comp += 1
            lab = n_comp
            labels[si, sj] = lab
            qx[0], qy[0] = si, sj
            head, tail = 0, 1
            area = 0
            touches = False
            for kf in range(k_forms):
                areas[kf] = 1e30  # reuse areas as per-form minima
                diams[kf] = -1e30  # per-form maxima
            while head < tail:
                i, j = qx[head], qy[head]
                head += 1
                area += 1
                if i < margin or i >= F - margin or j < margin or j >= F - margin:
                    touches = True
                zx = float(i - B)
                zy = float(j - B)
                for kf in range(k_forms):
                    v = forms[kf, 0] * zx + forms[kf, 1] * zy
                    if v < areas[kf]:
                        areas[kf] = v
                    if v > diams[kf]:
                        diams[kf] = v
                for di in range(-1, 2):
                    for dj in range(-1, 2):
                        ii, jj = i + di, j + dj
                        if 0 <= ii < F and 0 <= jj < F and labels[ii, jj] == 0:
                            labels[ii, jj] = lab
                            qx[tail], qy[tail] = ii, jj
                            tail += 1
            td = 0.0
            for kf in range(k_forms):
                span = diams[kf] - areas[kf] + abs(forms[kf, 0]) + abs(forms[kf, 1])
                if span > td:
                    td = span
            if (not touches) and td > thr:
                total_large += area
    return n_comp, total_large


@njit(cache=True)
def census_chain_chunk(dh, dv, B, d, margin, forms, thr, lng, hist, bin_lo,
                       bin_width, n_bins, win_lo, win_hi, lnf, n_sweeps, seed,
                       labels, qx, qy, fmin, fmax, total_in, sweep_totals):
    """Biased q=1 chain on the total area of large circuits (census umbrella).

    Every actual flip recomputes the census observable; no lazy shortcut.
    """
    np.random.seed(seed)
    total = total_in
    SH0, SH1 = dh.shape
    SV0, SV1 = dv.shape
    for sw in range(n_sweeps):
        for horiz in range(2):
            n0 = SH0 if horiz == 1 else SV0
            n1 = SH1 if horiz == 1 else SV1
            for x in range(n0):
                for y in range(n1):
                    old = dh[x, y] if horiz == 1 else dv[x, y]
                    new = 1 if np.random.random() < d else 0
                    if new == old:
                        b = (total - bin_lo) // bin_width
                        if lnf > 0.0 and 0 <= b < n_bins:
                            lng[b] += lnf
                            hist[b] += 1
                        continue
                    if horiz == 1:
                        dh[x, y] = new
                    else:
                        dv[x, y] = new
                    _nc, new_total = census_fill(dh, dv, B, margin, forms, thr,
                                                 labels, qx, qy, fmin, fmax)
                    accept = True
                    if new_total < win_lo or new_total > win_hi:
                        accept = False
                    else:
                        b_old = min(max((total - bin_lo) // bin_width, 0), n_bins - 1)
                        b_new = min(max((new_total - bin_lo) // bin_width, 0),
                                    n_bins - 1)
                        dl = lng[b_old] - lng[b_new]
                        if dl < 0.0 and np.random.random() >= np.exp(dl):
                            accept = False
                    if accept:
                        total = new_total
                    else:
                        if horiz == 1:
                            dh[x, y] = old
                        else:
                            dv[x, y] = old
                    b = (total - bin_lo) // bin_width
                    if lnf > 0.0 and 0 <= b < n_bins:
                        lng[b] += lnf
                        hist[b] += 1
        sweep_totals[sw] = total
    return total
