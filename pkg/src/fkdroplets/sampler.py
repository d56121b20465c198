"""FK random-cluster sampling on finite boxes.

The box model keeps one uint8 array per bond orientation.  Wired boundary
is implemented by fusing all sites on the box edge through a ghost site
joined by frozen-open pseudo-bonds, matching the convention that sites
connected to the boundary form a single cluster.

Exact enumeration works on small abstract graphs (any site set, bond
list, fused groups), which also serves the planar-duality and circuit-
Markov checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import (DegenerateParameterError, EnumerationTooLargeError,
                     RejectionFloorError)
from .lattice import BoxRegion


@dataclass(frozen=True)
class ModelParams:
    p: float
    q: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ValueError(f"p={self.p} outside [0, 1]")
        if self.q <= 0:
            raise ValueError(f"q={self.q} must be positive")

    @property
    def degenerate(self) -> bool:
        return self.p in (0.0, 1.0)

    def require_nondegenerate(self):
        if self.degenerate:
            raise DegenerateParameterError(
                f"p={self.p}: log-weights undefined; only dual_config is "
                "meaningful at degenerate p")

    def heat_bath_probs(self):
        """(p_connected, p_disconnected) single-bond conditionals."""
        self.require_nondegenerate()
        return self.p, self.p / (self.p + self.q * (1.0 - self.p))


def dual_point(p: float, q: float) -> float:
    """p* with (1 - p*)/p* = p / (q (1 - p)); involutive."""
    if p in (0.0, 1.0):
        raise DegenerateParameterError("dual point undefined at p in {0, 1}")
    return q * (1.0 - p) / (p + q * (1.0 - p))


def self_dual_point(q: float) -> float:
    return math.sqrt(q) / (1.0 + math.sqrt(q))


class BondConfig:
    """Open/closed assignment on the bonds of Lambda_N with a boundary
    condition."""

    __slots__ = ("box", "bc", "h", "v", "_cache")

    def __init__(self, box, bc="free", h=None, v=None):
        if isinstance(box, int):
            box = BoxRegion(box)
        if bc not in ("free", "wired"):
            raise ValueError("bc must be 'free' or 'wired'")
        self.box = box
        self.bc = bc
        n = box.half_width
        self.h = np.zeros((2 * n, 2 * n + 1), dtype=np.uint8) if h is None else h
        self.v = np.zeros((2 * n + 1, 2 * n), dtype=np.uint8) if v is None else v
        self._cache = {}

    # -- constructors --------------------------------------------------

    @classmethod
    def all_open(cls, n, bc="free"):
        c = cls(n, bc)
        c.h[:] = 1
        c.v[:] = 1
        return c

    @classmethod
    def all_closed(cls, n, bc="free"):
        return cls(n, bc)

    @classmethod
    def random(cls, n, bc, p_open, rng):
        c = cls(n, bc)
        c.h[:] = rng.random(c.h.shape) < p_open
        c.v[:] = rng.random(c.v.shape) < p_open
        return c

    def copy(self) -> "BondConfig":
        return BondConfig(self.box, self.bc, self.h.copy(), self.v.copy())

    # -- bond access -----------------------------------------------------

    def bond_keys(self):
        n = self.box.half_width
        for x in range(-n, n):
            for y in range(-n, n + 1):
                yield (x, y, 0)
        for x in range(-n, n + 1):
            for y in range(-n, n):
                yield (x, y, 1)

    @property
    def n_bonds(self) -> int:
        return self.h.size + self.v.size

    def get(self, key) -> int:
        x, y, axis = key
        n = self.box.half_width
        return int(self.h[x + n, y + n] if axis == 0 else self.v[x + n, y + n])

    def set(self, key, value):
        x, y, axis = key
        n = self.box.half_width
        if axis == 0:
            self.h[x + n, y + n] = value
        else:
            self.v[x + n, y + n] = value
        self._cache.clear()

    @property
    def n_open(self) -> int:
        return int(self.h.sum()) + int(self.v.sum())

    def open_regular_bonds(self):
        n = self.box.half_width
        xs, ys = np.nonzero(self.h)
        for x, y in zip(xs, ys):
            yield (int(x) - n, int(y) - n, 0)
        xs, ys = np.nonzero(self.v)
        for x, y in zip(xs, ys):
            yield (int(x) - n, int(y) - n, 1)

    def open_dual_bonds(self):
        """Dual keys of the closed regular bonds."""
        n = self.box.half_width
        xs, ys = np.nonzero(self.h == 0)
        for x, y in zip(xs, ys):
            # dual of horizontal (x, y, 0) is (x, y-1, 1)
            yield (int(x) - n, int(y) - n - 1, 1)
        xs, ys = np.nonzero(self.v == 0)
        for x, y in zip(xs, ys):
            yield (int(x) - n - 1, int(y) - n, 0)

    def dual_sites(self):
        n = self.box.half_width
        return [(x, y) for x in range(-n, n) for y in range(-n, n)]

    def edge_sites(self):
        n = self.box.half_width
        out = []
        for x in range(-n, n + 1):
            for y in range(-n, n + 1):
                if abs(x) == n or abs(y) == n:
                    out.append((x, y))
        return out

    # -- topology ----------------------------------------------------------

    def exterior_circuits(self, discard_margin=1):
        from .circuits import extract_exterior_circuits

        key = ("ext", discard_margin)
        if key not in self._cache:
            n = self.box.half_width
            self._cache[key] = extract_exterior_circuits(
                set(self.open_dual_bonds()), -n, n, dual=True,
                discard_margin=discard_margin)
        return self._cache[key]

    def to_dual_arrays(self):
        """(dh, dv) uint8 arrays in the kernels' dual-bond layout."""
        n = self.box.half_width
        S = 2 * n
        dh = np.zeros((S - 1, S), dtype=np.uint8)
        dv = np.zeros((S, S - 1), dtype=np.uint8)
        for (x, y, axis) in self.open_dual_bonds():
            if axis == 0:
                if 0 <= x + n < S - 1 and 0 <= y + n < S:
                    dh[x + n, y + n] = 1
            else:
                if 0 <= x + n < S and 0 <= y + n < S - 1:
                    dv[x + n, y + n] = 1
        return dh, dv

    @classmethod
    def from_dual_arrays(cls, dh, dv, bc="free"):
        S = dh.shape[1]
        n = S // 2
        c = cls.all_open(n, bc)
        xs, ys = np.nonzero(dh)
        for x, y in zip(xs, ys):
            # dual h-bond base (x-n, y-n) is the dual of regular v-bond
            c.set((int(x) - n + 1, int(y) - n, 1), 0)
        xs, ys = np.nonzero(dv)
        for x, y in zip(xs, ys):
            c.set((int(x) - n, int(y) - n + 1, 0), 0)
        return c


def dual_config(config: BondConfig) -> dict:
    """Dual configuration: map dual-bond key -> state (open iff primal closed).

    The involution partner is :func:`primal_config`.
    """
    out = {}
    n = config.box.half_width
    for x in range(-n, n):
        for y in range(-n, n + 1):
            out[(x, y - 1, 1)] = 1 - config.get((x, y, 0))
    for x in range(-n, n + 1):
        for y in range(-n, n):
            out[(x - 1, y, 0)] = 1 - config.get((x, y, 1))
    return out


def primal_config(dual_states: dict, n, bc="free") -> BondConfig:
    """Rebuild the box config from a dual-state map (inverse of dual_config)."""
    from .lattice import Bond, DualBond, DualSite, Site, primal_of

    c = BondConfig(n, bc)
    for (x, y, axis), s in dual_states.items():
        e = primal_of(DualBond(DualSite(x, y), axis))
        c.set((e.site.x, e.site.y, e.axis), 1 - s)
    return c


# ---------------------------------------------------------------------------
# abstract graphs and exact enumeration
# ---------------------------------------------------------------------------


@dataclass
class GraphSpec:
    """Finite multigraph with optional fused site groups (wired counting)."""

    n_sites: int
    bonds: list
    fused: list

    def cluster_count(self, open_mask: int) -> int:
        parent = list(range(self.n_sites))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for grp in self.fused:
            grp = list(grp)
            for s in grp[1:]:
                union(grp[0], s)
        for i, (a, b) in enumerate(self.bonds):
            if open_mask >> i & 1:
                union(a, b)
        return len({find(s) for s in range(self.n_sites)})


def box_graph(config_or_box, bc=None) -> tuple[GraphSpec, list]:
    """GraphSpec of a box plus the bond-key order used for mask bits."""
    if isinstance(config_or_box, BondConfig):
        box, bc = config_or_box.box, config_or_box.bc
    else:
        box = BoxRegion(config_or_box) if isinstance(config_or_box, int) \
            else config_or_box
        bc = bc or "free"
    n = box.half_width
    sites = [(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]
    index = {s: i for i, s in enumerate(sites)}
    keys = []
    bonds = []
    for x in range(-n, n):
        for y in range(-n, n + 1):
            keys.append((x, y, 0))
            bonds.append((index[(x, y)], index[(x + 1, y)]))
    for x in range(-n, n + 1):
        for y in range(-n, n):
            keys.append((x, y, 1))
            bonds.append((index[(x, y)], index[(x, y + 1)]))
    fused = []
    if bc == "wired":
        fused = [{index[s] for s in sites if abs(s[0]) == n or abs(s[1]) == n}]
    return GraphSpec(len(sites), bonds, fused), keys


def cluster_count(config: BondConfig) -> int:
    """Number of open clusters, counted per the boundary condition."""
    graph, keys = box_graph(config)
    mask = 0
    for i, k in enumerate(keys):
        if config.get(k):
            mask |= 1 << i
    return graph.cluster_count(mask)


def fk_log_weight(config: BondConfig, params: ModelParams) -> float:
    """log of the unnormalized FK weight p^|w| (1-p)^(|D|-|w|) q^C(w)."""
    params.require_nondegenerate()
    k = config.n_open
    m = config.n_bonds
    c = cluster_count(config)
    return (k * math.log(params.p) + (m - k) * math.log(1.0 - params.p)
            + c * math.log(params.q))


def graph_log_weight(graph: GraphSpec, mask: int, params: ModelParams) -> float:
    params.require_nondegenerate()
    k = bin(mask).count("1")
    m = len(graph.bonds)
    c = graph.cluster_count(mask)
    return (k * math.log(params.p) + (m - k) * math.log(1.0 - params.p)
            + c * math.log(params.q))


class ExactDistribution:
    """Exact FK law on a small graph: probability per bond-mask."""

    def __init__(self, graph: GraphSpec, params: ModelParams, keys=None):
        m = len(graph.bonds)
        if m > 16:
            raise EnumerationTooLargeError(f"{m} bonds > 16")
        params.require_nondegenerate()
        self.graph = graph
        self.params = params
        self.keys = keys
        logw = np.empty(1 << m, dtype=float)
        self.cluster_counts = np.empty(1 << m, dtype=np.int64)
        for mask in range(1 << m):
            c = graph.cluster_count(mask)
            self.cluster_counts[mask] = c
            k = mask.bit_count()
            logw[mask] = (k * math.log(params.p)
                          + (m - k) * math.log(1.0 - params.p)
                          + c * math.log(params.q))
        logw -= logw.max()
        w = np.exp(logw)
        self.probs = w / w.sum()
        self.n_bonds = m

    def prob_of(self, predicate) -> float:
        return float(sum(self.probs[m] for m in range(len(self.probs))
                         if predicate(m)))

    def joint_open_cluster_law(self) -> dict:
        """pmf of (|w|, C(w))."""
        out = {}
        for mask, pr in enumerate(self.probs):
            key = (int(mask).bit_count(), int(self.cluster_counts[mask]))
            out[key] = out.get(key, 0.0) + float(pr)
        return out

    def conditional(self, predicate):
        keep = np.array([predicate(m) for m in range(len(self.probs))])
        probs = np.where(keep, self.probs, 0.0)
        total = probs.sum()
        if total <= 0:
            raise ValueError("conditioning event has probability zero")
        return probs / total


def exact_distribution(config_or_graph, params, bc=None) -> ExactDistribution:
    if isinstance(config_or_graph, GraphSpec):
        return ExactDistribution(config_or_graph, params)
    graph, keys = box_graph(config_or_graph, bc)
    return ExactDistribution(graph, params, keys)


def tv_distance(pmf_a: dict, pmf_b: dict) -> float:
    keys = set(pmf_a) | set(pmf_b)
    return 0.5 * sum(abs(pmf_a.get(k, 0.0) - pmf_b.get(k, 0.0)) for k in keys)


# -- planar duality on the box ------------------------------------------------


def wired_interior_graph(n) -> tuple[GraphSpec, list]:
    """Wired box with only the non-perimeter bonds random.

    Perimeter bonds (both endpoints on the box edge) are cluster-neutral
    under wired counting and iid Bernoulli(p), so the law of the interior
    bonds is an exact marginal of the full wired model; these interior
    bonds are exactly the ones whose duals form the matched dual grid.
    """
    box = BoxRegion(n)
    sites = [(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]
    index = {s: i for i, s in enumerate(sites)}
    keys = []
    bonds = []

    def on_edge(s):
        return abs(s[0]) == n or abs(s[1]) == n

    for x in range(-n, n):
        for y in range(-n, n + 1):
            a, b = (x, y), (x + 1, y)
            if not (on_edge(a) and on_edge(b)):
                keys.append((x, y, 0))
                bonds.append((index[a], index[b]))
    for x in range(-n, n + 1):
        for y in range(-n, n):
            a, b = (x, y), (x, y + 1)
            if not (on_edge(a) and on_edge(b)):
                keys.append((x, y, 1))
                bonds.append((index[a], index[b]))
    fused = [{index[s] for s in sites if on_edge(s)}]
    return GraphSpec(len(sites), bonds, fused), keys


def dual_grid_graph(n) -> tuple[GraphSpec, list]:
    """Free FK graph on the dual sites of Lambda_n (the matched dual box).

    Bond k of this graph is the dual of bond k of wired_interior_graph(n).
    """
    from .lattice import Bond, Site, dual_of

    _graph, keys = wired_interior_graph(n)
    dual_sites = [(x, y) for x in range(-n, n) for y in range(-n, n)]
    index = {s: i for i, s in enumerate(dual_sites)}
    bonds = []
    dual_keys = []
    for (x, y, axis) in keys:
        d = dual_of(Bond(Site(x, y), axis))
        a = (d.site.x, d.site.y)
        b = (d.b.x, d.b.y)
        bonds.append((index[a], index[b]))
        dual_keys.append((d.site.x, d.site.y, d.axis))
    return GraphSpec(len(dual_sites), bonds, []), dual_keys


def duality_tv(n, params: ModelParams) -> float:
    """TV distance between the dual of wired FK(p,q) and free FK(p*,q).

    Exact enumeration on the matched pair; masks map by bit complement
    (dual bond open iff regular bond closed).
    """
    wired, _keys = wired_interior_graph(n)
    dualg, _dkeys = dual_grid_graph(n)
    m = len(wired.bonds)
    ex_w = ExactDistribution(wired, params)
    pstar = dual_point(params.p, params.q)
    ex_d = ExactDistribution(dualg, ModelParams(pstar, params.q))
    full = (1 << m) - 1
    tv = 0.0
    for mask in range(1 << m):
        tv += abs(ex_w.probs[mask] - ex_d.probs[full ^ mask])
    return 0.5 * tv


# ---------------------------------------------------------------------------
# dynamics
# ---------------------------------------------------------------------------


@dataclass
class ChainState:
    config: BondConfig
    params: ModelParams
    rng_seed: int
    sweep_count: int = 0


def _box_graph_arrays(config: BondConfig):
    """CSR arrays for the jitted heat bath, plus dual-index maps.

    Wired boundary adds a ghost site joined to every edge site by a
    frozen-open bond.
    """
    key = "graph_arrays"
    if key in config._cache:
        return config._cache[key]
    n = config.box.half_width
    graph, keys = box_graph(config)
    n_sites = (2 * n + 1) ** 2
    bonds = list(graph.bonds)
    frozen_flags = [0] * len(bonds)
    state_list = [config.get(k) for k in keys]
    if config.bc == "wired" and graph.fused:
        ghost = n_sites
        n_sites += 1
        for s in graph.fused[0]:
            bonds.append((s, ghost))
            frozen_flags.append(1)
            state_list.append(1)
    m = len(bonds)
    deg = np.zeros(n_sites + 1, dtype=np.int64)
    for a, b in bonds:
        deg[a + 1] += 1
        deg[b + 1] += 1
    indptr = np.cumsum(deg)
    adj_bond = np.empty(2 * m, dtype=np.int64)
    adj_other = np.empty(2 * m, dtype=np.int64)
    cursor = indptr[:-1].copy()
    for e, (a, b) in enumerate(bonds):
        adj_bond[cursor[a]] = e
        adj_other[cursor[a]] = b
        cursor[a] += 1
        adj_bond[cursor[b]] = e
        adj_other[cursor[b]] = a
        cursor[b] += 1
    state = np.asarray(state_list, dtype=np.uint8)
    frozen = np.asarray(frozen_flags, dtype=np.uint8)
    # regular-bond index grids for dual BFS kernels
    rh_idx = -np.ones((2 * n, 2 * n + 1), dtype=np.int64)
    rv_idx = -np.ones((2 * n + 1, 2 * n), dtype=np.int64)
    for i, (x, y, axis) in enumerate(keys):
        if axis == 0:
            rh_idx[x + n, y + n] = i
        else:
            rv_idx[x + n, y + n] = i
    out = (state, frozen, indptr, adj_bond, adj_other, n_sites, rh_idx, rv_idx)
    config._cache[key] = out
    return out


def _apply_state(config: BondConfig, state) -> BondConfig:
    n = config.box.half_width
    _graph, keys = box_graph(config)
    new = BondConfig(config.box, config.bc)
    for i, k in enumerate(keys):
        if state[i]:
            new.set((k[0], k[1], k[2]), 1)
    return new


def _sweep_seed(rng_seed: int, sweep_count: int) -> int:
    return (rng_seed * 2654435761 + sweep_count * 97531) % (2 ** 31 - 1) + 1


def heat_bath_sweep(chain: ChainState) -> ChainState:
    """One heat-bath pass over all bonds; exact single-bond conditionals.

    A bond is resampled open with probability p when its endpoints are
    connected off the bond, else p/(p + q(1-p)); the trajectory is a
    deterministic function of (initial config, rng_seed).
    """
    chain.params.require_nondegenerate()
    arrays = _box_graph_arrays(chain.config)
    state, frozen, indptr, adj_bond, adj_other, n_sites, *_ = arrays
    state = state.copy()
    kernels.heat_bath_run(state, frozen, indptr, adj_bond, adj_other, n_sites,
                          chain.params.p, chain.params.q, 1,
                          _sweep_seed(chain.rng_seed, chain.sweep_count))
    cfg = _apply_state(chain.config, state)
    return ChainState(cfg, chain.params, chain.rng_seed, chain.sweep_count + 1)


def heat_bath_conditional(config: BondConfig, params: ModelParams, key) -> float:
    """The exact conditional open-probability the sweep uses at one bond."""
    p_conn, p_disc = params.heat_bath_probs()
    saved = config.get(key)
    config.set(key, 0)
    try:
        graph, keys = box_graph(config)
        mask = 0
        for i, k in enumerate(keys):
            if config.get(k):
                mask |= 1 << i
        kidx = keys.index(key)
        a, b = graph.bonds[kidx]
        parent = list(range(graph.n_sites))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for grp in graph.fused:
            grp = list(grp)
            for s in grp[1:]:
                parent[find(s)] = find(grp[0])
        for i, (u, w) in enumerate(graph.bonds):
            if mask >> i & 1:
                parent[find(u)] = find(w)
        connected = find(a) == find(b)
    finally:
        config.set(key, saved)
    return p_conn if connected else p_disc


def run_sweeps(chain: ChainState, n_sweeps: int) -> ChainState:
    """n_sweeps of heat bath in one kernel call (same trajectory as
    repeated heat_bath_sweep)."""
    chain.params.require_nondegenerate()
    arrays = _box_graph_arrays(chain.config)
    state, frozen, indptr, adj_bond, adj_other, n_sites, *_ = arrays
    state = state.copy()
    for k in range(n_sweeps):
        kernels.heat_bath_run(state, frozen, indptr, adj_bond, adj_other,
                              n_sites, chain.params.p, chain.params.q, 1,
                              _sweep_seed(chain.rng_seed,
                                          chain.sweep_count + k))
    cfg = _apply_state(chain.config, state)
    return ChainState(cfg, chain.params, chain.rng_seed,
                      chain.sweep_count + n_sweeps)


def box_chain_stats(n, bc, params: ModelParams, n_samples, burn=200, thin=2,
                    seed=1):
    """Thinned samples of (|w|, C(w)) from the box heat bath (jitted)."""
    cfg = BondConfig.random(n, bc, params.p, np.random.default_rng(seed))
    arrays = _box_graph_arrays(cfg)
    state, frozen, indptr, adj_bond, adj_other, n_sites, *_ = arrays
    return kernels.heat_bath_stats(state.copy(), frozen, indptr, adj_bond,
                                   adj_other, n_sites, params.p, params.q,
                                   burn, thin, n_samples,
                                   _sweep_seed(seed, 0))


# ---------------------------------------------------------------------------
# conditioning
# ---------------------------------------------------------------------------


def sample_conditioned(chain: ChainState, predicate, mode="rejection",
                       n_samples=100, thin=2, burn=100,
                       acceptance_floor=1e-6, max_sweeps=None,
                       observable=None, umbrella=None):
    """Stream of configs (rejection) or (config, weight) pairs (umbrella).

    rejection: exact conditional samples of the predicate event.  Aborts
    with RejectionFloorError when the running acceptance rate falls under
    ``acceptance_floor`` (diagnostic recommends umbrella mode).

    umbrella: requires an integer ``observable(config)`` (the droplet-area
    observable in all shipped uses) and an ``umbrella`` dict with keys
    lo, hi, bin_width plus optional wang-landau controls; yields
    (config, weight) with weights importance-correcting to the
    unconditioned law restricted to the window, filtered by ``predicate``.
    """
    if mode == "rejection":
        yield from _rejection_stream(chain, predicate, n_samples, thin, burn,
                                     acceptance_floor, max_sweeps)
    elif mode == "umbrella":
        if observable is None:
            raise ValueError("umbrella mode needs an observable")
        yield from _umbrella_stream(chain, predicate, observable,
                                    umbrella or {}, n_samples, thin)
    else:
        raise ValueError(f"unknown mode {mode!r}")


def _rejection_stream(chain, predicate, n_samples, thin, burn,
                      acceptance_floor, max_sweeps):
    produced = 0
    trials = 0
    chain = run_sweeps(chain, burn)
    while produced < n_samples:
        chain = run_sweeps(chain, thin)
        trials += 1
        if predicate(chain.config):
            produced += 1
            yield chain.config.copy()
        if trials >= 2000 and produced / trials < acceptance_floor:
            raise RejectionFloorError(
                f"acceptance rate {produced}/{trials} below floor "
                f"{acceptance_floor}; use umbrella mode for this event")
        if max_sweeps is not None and trials * thin + burn > max_sweeps:
            break


def _umbrella_stream(chain, predicate, observable, u, n_samples, thin):
    """Generic (any q) single-bond Metropolis umbrella chain.

    Desk-scale fallback; the q = 1 experiments use the jitted kernels
    instead.  Piecewise-constant bias over observable bins, Wang-Landau
    adaptation, then frozen-bias measurement.
    """
    rng = np.random.default_rng(chain.rng_seed)
    params = chain.params
    params.require_nondegenerate()
    lo = int(u.get("lo", 0))
    hi = int(u.get("hi", 64))
    width = int(u.get("bin_width", max(1, (hi - lo) // 16)))
    n_bins = (hi - lo) // width + 1
    lng = np.zeros(n_bins, dtype=float)
    lnf = float(u.get("lnf0", 1.0))
    lnf_floor = float(u.get("lnf_floor", 0.02))
    adapt_sweeps = int(u.get("adapt_sweeps", 400))
    cfg = chain.config.copy()
    keys = list(cfg.bond_keys())
    a_cur = observable(cfg)

    def bin_of(a):
        return min(max((a - lo) // width, 0), n_bins - 1)

    def metro_sweep(adapting):
        nonlocal a_cur, lnf
        for key in keys:
            old = cfg.get(key)
            new = 1 if rng.random() < params.p else 0
            if new == old:
                if adapting:
                    lng[bin_of(a_cur)] += lnf
                continue
            # FK weight ratio for the flip: bond factor times q^(dC)
            cfg.set(key, new)
            a_new = observable(cfg)
            if a_new < lo or a_new > hi:
                cfg.set(key, old)
            else:
                c_new = cluster_count(cfg)
                cfg.set(key, old)
                c_old = cluster_count(cfg)
                # proposal Bernoulli(p) cancels the bond factor
                log_ratio = (c_new - c_old) * math.log(params.q) \
                    + lng[bin_of(a_cur)] - lng[bin_of(a_new)]
                if log_ratio >= 0 or rng.random() < math.exp(log_ratio):
                    cfg.set(key, new)
                    a_cur = a_new
            if adapting:
                lng[bin_of(a_cur)] += lnf
        return a_cur

    sweeps_done = 0
    while lnf > lnf_floor and sweeps_done < adapt_sweeps:
        for _ in range(20):
            metro_sweep(True)
            sweeps_done += 1
        lnf *= 0.5
    produced = 0
    while produced < n_samples:
        for _ in range(thin):
            metro_sweep(False)
        if predicate(cfg):
            produced += 1
            weight = math.exp(lng[bin_of(a_cur)] - lng.max())
            yield cfg.copy(), weight


def droplet_area_observable(config: BondConfig) -> int:
    """|Int(Gamma_0)|: area of the exterior open dual circuit around the
    origin (0 when there is none)."""
    from .circuits import exterior_circuit_around

    circ = exterior_circuit_around(config, (0, 0))
    return 0 if circ is None else circ.area


# ---------------------------------------------------------------------------
# snapshot files
# ---------------------------------------------------------------------------


def save_config(config: BondConfig, path, params=None, seed=0, sweep=0):
    """Line-oriented snapshot; bit-exact round trip via repr floats."""
    p = params.p if params else float("nan")
    q = params.q if params else float("nan")
    lines = [f"# fkdroplets config v1 N={config.box.half_width} p={p!r} "
             f"q={q!r} bc={config.bc} seed={seed} sweep={sweep}"]
    for (x, y, axis) in sorted(config.open_regular_bonds()):
        dx, dy = (1, 0) if axis == 0 else (0, 1)
        lines.append(f"{x} {y} {dx} {dy}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_config(path):
    """Returns (config, meta dict)."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    hdr = lines[0]
    if not hdr.startswith("# fkdroplets config v1"):
        raise ValueError("not a config snapshot")
    meta = {}
    for tok in hdr.split()[4:]:
        k, v = tok.split("=", 1)
        meta[k] = v
    n = int(meta["N"])
    cfg = BondConfig(n, meta["bc"])
    for ln in lines[1:]:
        x, y, dx, dy = (int(t) for t in ln.split())
        cfg.set((x, y, 0 if dx == 1 else 1), 1)
    meta["p"] = float(meta["p"])
    meta["q"] = float(meta["q"])
    meta["seed"] = int(meta["seed"])
    meta["sweep"] = int(meta["sweep"])
    return cfg, meta
