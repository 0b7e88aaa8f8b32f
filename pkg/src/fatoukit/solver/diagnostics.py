"""Checks on solved fields: oscillation decay, Harnack ratios, convexity."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.spatial import ConvexHull, Delaunay
from scipy.spatial import QhullError

from .grids import SectorGrid, TAG_INACTIVE


def oscillation_profile(fld):
    """Rows ``(height, max, min, mean)`` over the levels of the field."""
    heights, rows = fld.levels()
    out = []
    for hgt, row in zip(heights, rows):
        row = row[np.isfinite(row)]
        if row.size:
            out.append((float(hgt), float(row.max()), float(row.min()), float(row.mean())))
    return out


def monotonicity_defect(profile):
    """Largest increase of the level max or decrease of the level min with height."""
    arr = np.asarray(profile, dtype=float)
    if arr.shape[0] < 2:
        return 0.0
    up = np.max(np.diff(arr[:, 1]))
    down = np.max(-np.diff(arr[:, 2]))
    return float(max(up, down, 0.0))


def fit_decay(profile, start=0.0, floor=1e-12):
    """Exponential rate and per-doubling factor of the oscillation.

    Returns ``(rate, theta)``: ``rate`` is the least-squares slope of
    ``-log osc`` against height over heights ``>= start`` where the
    oscillation is above ``floor`` times its initial value; ``theta`` is the
    largest ratio ``osc(2z)/osc(z)`` over those heights.
    """
    arr = np.asarray(profile, dtype=float)
    z, osc = arr[:, 0], arr[:, 1] - arr[:, 2]
    base = osc[0] if osc[0] > 0 else (osc.max() if osc.size else 0.0)
    if base <= 0:
        return 0.0, 0.0
    sel = (z >= start) & (osc > floor * base)
    if np.count_nonzero(sel) < 2:
        return None, None
    slope = np.polyfit(z[sel], np.log(osc[sel]), 1)[0]
    zz = z[sel]
    zz = zz[zz > 0]
    ratios = []
    for z0 in zz:
        if 2.0 * z0 <= z[-1]:
            o2 = np.interp(2.0 * z0, z, osc)
            o1 = np.interp(z0, z, osc)
            if o1 > floor * base:
                ratios.append(o2 / o1)
    theta = float(max(ratios)) if ratios else None
    return float(-slope), theta


def harnack_ratio(fld, radius, center=None):
    """``max/min`` of a positive field over the ball ``B(center, radius)``.

    The default center sits at distance ``2 radius`` above the origin of the
    plane, so the ball stays at distance ``radius`` from it.
    """
    g = fld.grid
    coords = g.coordinates()
    if center is None:
        center = np.zeros(coords.shape[1])
        center[-1] = 2.0 * radius
    center = np.asarray(center, dtype=float)
    d = coords - center
    if not isinstance(g, SectorGrid):
        k, tau = g.geometry.k, g.tau
        d[:, :k] = (d[:, :k] + 0.5 * tau) % tau - 0.5 * tau
    inside = (np.einsum("ij,ij->i", d, d) <= radius * radius) & (fld.tags != TAG_INACTIVE)
    vals = np.asarray(fld.values)[inside]
    if vals.size == 0:
        raise ValueError("no grid node inside the ball")
    if vals.min() <= 0:
        raise ValueError("Harnack ratio needs a positive field on the ball")
    return float(vals.max() / vals.min())


@dataclass
class ConvexityReport:
    thresholds: list
    violations: list
    depth: list = field(default_factory=list)

    @property
    def convex(self):
        return all(v == 0 for v in self.violations)


def _plane_points(fld):
    g = fld.grid
    pts = g.coordinates()
    vals = np.asarray(fld.values, dtype=float)
    keep = fld.tags != TAG_INACTIVE
    pts, vals = pts[keep], vals[keep]
    if isinstance(g, SectorGrid):
        if g.symmetric:
            mirror = pts[:, 0] > 0
            pts = np.concatenate([pts, pts[mirror] * np.array([-1.0, 1.0])])
            vals = np.concatenate([vals, vals[mirror]])
        return pts, vals
    if pts.shape[1] != 2:
        raise ValueError("convexity diagnostic needs a two-dimensional field")
    return pts, vals


def default_thresholds(fld, count=8):
    """Levels taken from the field along the ``e_n`` axis, away from the datum."""
    g = fld.grid
    if isinstance(g, SectorGrid):
        arr = fld.array()
        j = int(np.argmin(np.abs(g.phi - math.pi / 2.0)))
        radii = np.geomspace(16.0, g.r_max / 100.0, count)
        return [float(np.interp(math.log(r), g.xi, arr[:, j])) for r in radii]
    vals = np.asarray(fld.values, dtype=float)
    vals = vals[np.isfinite(vals)]
    return list(np.quantile(vals, np.linspace(0.2, 0.9, count)))


def convexity_diagnostic(fld, thresholds=None, rel_tol=1e-3, exclude_radius=None,
                         points=None, values=None):
    """Count nodes inside the hull of ``{u > c}`` whose value is below ``c``.

    A node counts as a violation when its value is below ``c (1 - rel_tol)``.
    Nodes closer than ``exclude_radius`` to the origin are not tested; on a
    sector grid the default of 8 keeps the check away from the mollified
    datum, whose level sets are not those of the Martin function.
    ``points``/``values`` may be given directly instead of a field.
    """
    if exclude_radius is None:
        exclude_radius = 8.0 if fld is not None and isinstance(fld.grid, SectorGrid) else 0.0
    if points is None:
        points, values = _plane_points(fld)
        if thresholds is None:
            thresholds = default_thresholds(fld)
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if thresholds is None:
        thresholds = list(np.quantile(values, np.linspace(0.2, 0.9, 8)))
    viol, depth = [], []
    for c in thresholds:
        sup = values > c
        if np.count_nonzero(sup) < 3:
            viol.append(0)
            depth.append(0.0)
            continue
        try:
            hull = ConvexHull(points[sup])
        except QhullError:
            viol.append(0)
            depth.append(0.0)
            continue
        verts = points[sup][hull.vertices]
        lo, hi = verts.min(axis=0), verts.max(axis=0)
        far = np.einsum("ij,ij->i", points, points) >= exclude_radius ** 2
        cand = np.nonzero(~sup & far & np.all(points >= lo, axis=1) & np.all(points <= hi, axis=1))[0]
        inside = Delaunay(verts).find_simplex(points[cand]) >= 0 if cand.size else np.zeros(0, bool)
        bad = cand[inside]
        gap = c - values[bad]
        bad_mask = gap > rel_tol * abs(c)
        viol.append(int(np.count_nonzero(bad_mask)))
        depth.append(float(gap[bad_mask].max()) if bad_mask.any() else 0.0)
    return ConvexityReport(list(map(float, thresholds)), viol, depth)
