"""Primitive types for Z^2, its dual lattice, bonds and boundary operators.

Everything here is exact integer arithmetic.  A dual site sits at
``base + (1/2, 1/2)`` and is stored by its integer base point, so no
floating point enters any topology computation.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple


class Site(NamedTuple):
    x: int
    y: int

    def __add__(self, other):
        return Site(self.x + other[0], self.y + other[1])

    def point(self):
        return (float(self.x), float(self.y))


class DualSite(NamedTuple):
    """Dual lattice site at ``(base.x + 1/2, base.y + 1/2)``."""

    x: int
    y: int

    def point(self):
        return (self.x + 0.5, self.y + 0.5)


class Bond(NamedTuple):
    """Unordered nearest-neighbour pair, stored canonically.

    ``site`` is the lexicographically smaller endpoint and ``axis`` is 0
    for a horizontal bond (towards +x) and 1 for a vertical one.
    """

    site: Site
    axis: int

    @property
    def a(self) -> Site:
        return self.site

    @property
    def b(self) -> Site:
        return Site(self.site.x + (1 - self.axis), self.site.y + self.axis)

    @staticmethod
    def between(a, b) -> "Bond":
        ax, ay = a
        bx, by = b
        if (bx, by) < (ax, ay):
            ax, ay, bx, by = bx, by, ax, ay
        dx, dy = bx - ax, by - ay
        if (dx, dy) == (1, 0):
            return Bond(Site(ax, ay), 0)
        if (dx, dy) == (0, 1):
            return Bond(Site(ax, ay), 1)
        raise ValueError(f"sites {a!r}, {b!r} are not nearest neighbours")

    def midpoint(self):
        return (self.site.x + 0.5 * (1 - self.axis), self.site.y + 0.5 * self.axis)


class DualBond(NamedTuple):
    """Unit bond of the dual lattice, canonical like :class:`Bond`."""

    site: DualSite
    axis: int

    @property
    def a(self) -> DualSite:
        return self.site

    @property
    def b(self) -> DualSite:
        return DualSite(self.site.x + (1 - self.axis), self.site.y + self.axis)

    @staticmethod
    def between(a, b) -> "DualBond":
        bond = Bond.between(a, b)
        return DualBond(DualSite(*bond.site), bond.axis)


class BoxRegion(NamedTuple):
    """The box Lambda_N = [-N, N]^2 (sites)."""

    half_width: int

    def sites(self) -> list[Site]:
        n = self.half_width
        return [Site(x, y) for x in range(-n, n + 1) for y in range(-n, n + 1)]

    def contains_site(self, s) -> bool:
        n = self.half_width
        return -n <= s[0] <= n and -n <= s[1] <= n


def dual_of(e: Bond) -> DualBond:
    """Perpendicular-bisector dual of a regular bond.

    A horizontal bond (x,y)-(x+1,y) is bisected by the vertical dual bond
    through (x+1/2, y), i.e. from (x, y-1)* to (x, y)*; a vertical bond by
    the horizontal dual bond from (x-1, y)* to (x, y)*.
    """
    x, y = e.site
    if e.axis == 0:
        return DualBond(DualSite(x, y - 1), 1)
    return DualBond(DualSite(x - 1, y), 0)


def primal_of(d: DualBond) -> Bond:
    """Inverse of :func:`dual_of`."""
    x, y = d.site
    if d.axis == 1:
        return Bond(Site(x, y + 1), 0)
    return Bond(Site(x + 1, y), 1)


def bonds_in(region) -> set[Bond]:
    """All bonds with both endpoints in the given site collection.

    ``region`` may be a :class:`BoxRegion` or any iterable of sites.
    For plane regions only axis-aligned rectangles are supported, given
    as ((xmin, ymin), (xmax, ymax)) in site coordinates; a bond belongs
    to the rectangle when its open segment lies inside it.
    """
    if isinstance(region, BoxRegion):
        sites = set(region.sites())
    elif isinstance(region, tuple) and len(region) == 2 and isinstance(region[0], tuple):
        # axis-aligned plane rectangle: a bond qualifies when its open
        # segment lies in the closed rectangle
        (xmin, ymin), (xmax, ymax) = region
        out = set()
        import math

        for x in range(math.ceil(xmin), math.floor(xmax) + 1):
            for y in range(math.ceil(ymin), math.floor(ymax) + 1):
                if x + 1 <= xmax:
                    out.add(Bond(Site(x, y), 0))
                if y + 1 <= ymax:
                    out.add(Bond(Site(x, y), 1))
        return out
    else:
        sites = {Site(s[0], s[1]) for s in region}
    out = set()
    for s in sites:
        for axis in (0, 1):
            b = Bond(s, axis)
            if b.b in sites:
                out.add(b)
    return out


def boundary_ops(bonds: Iterable[Bond]):
    """Return (V(D), boundary dD, closure) for a finite bond set D.

    dD consists of the bonds with exactly one endpoint in V(D); the
    closure is D together with dD.
    """
    d = set(bonds)
    v: set[Site] = set()
    for e in d:
        v.add(e.a)
        v.add(e.b)
    boundary = set()
    for s in v:
        for nb in neighbors(s):
            if nb not in v:
                boundary.add(Bond.between(s, nb))
    return v, boundary, d | boundary


def neighbors(s) -> list[Site]:
    x, y = s[0], s[1]
    return [Site(x + 1, y), Site(x - 1, y), Site(x, y + 1), Site(x, y - 1)]


def rotate90_site(s) -> Site:
    """Rotate a site by 90 degrees counterclockwise about the origin."""
    return Site(-s[1], s[0])


def rotate90_bond(e: Bond) -> Bond:
    return Bond.between(rotate90_site(e.a), rotate90_site(e.b))


def rotate90_dual_bond(d: DualBond) -> DualBond:
    """Rotate a dual bond by 90 degrees about the origin.

    The dual lattice rotates about the plane origin; in base coordinates
    the dual point (x+1/2, y+1/2) maps to (-y-1/2, x+1/2), base (-y-1, x).
    """
    ax, ay = d.site
    a2 = DualSite(-ay - 1, ax)
    x, y = d.b
    b2 = DualSite(-y - 1, x)
    return DualBond.between((a2.x, a2.y), (b2.x, b2.y))
