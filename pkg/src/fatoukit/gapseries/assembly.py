"""Extensions of the damped boundary sums and the layered closeness checks."""

from dataclasses import dataclass, field
import math

import numpy as np

from ..errors import PlanOverflowError, RegimeError
from ..exponents import Geometry
from ..solver.estimators import PLaplaceSolver
from ..solver.grids import SlabGrid
from .series import build_damping
from .waves import divergent_coefficients, positive_coefficients, triangle_wave


@dataclass
class LayerCheck:
    """One inequality at one index: measured value against its bound."""

    name: str
    index: int
    band: tuple
    measured: float
    bound: float

    @property
    def margin(self):
        return self.bound - self.measured


@dataclass
class AssemblyReport:
    p: float
    n: int
    plan: tuple
    levels: int
    alpha: float
    heights: list
    A: list
    checks: list
    sup_extension: list
    sup_boundary: list
    max_principle_tol: float
    state: object = field(repr=False, default=None)
    fields: list = field(repr=False, default_factory=list)

    @property
    def min_margin(self):
        return min((c.margin for c in self.checks), default=math.inf)

    @property
    def sandwich_holds(self):
        return all(c.margin >= 0 for c in self.checks)

    @property
    def max_principle_holds(self):
        return all(a <= b + self.max_principle_tol
                   for a, b in zip(self.sup_extension, self.sup_boundary))

    @property
    def A_spread(self):
        pos = [a for a in self.A if a > 0]
        return max(pos) / min(pos) if pos else 1.0


def _sup_band(diff, z, lo, hi):
    sel = (z > lo) & (z < hi) if hi > lo else np.zeros_like(z, dtype=bool)
    if not sel.any():
        return 0.0
    d = diff[sel]
    d = d[np.isfinite(d)]
    return float(np.max(np.abs(d))) if d.size else 0.0


def _decay_height(diff, z, boundary_osc, fraction):
    """Lowest grid height above which ``osc(diff) <= fraction * boundary_osc`` at every level."""
    rows = diff.reshape(z.size, -1)
    osc = np.nanmax(rows, axis=1) - np.nanmin(rows, axis=1)
    ok = osc <= fraction * boundary_osc
    if ok.all():
        return 0.0
    bad = np.nonzero(~ok)[0]
    last = bad[-1]
    return float(z[min(last + 1, z.size - 1)])


def assemble_counterexample(plan, p=3.0, levels=3, nx=1728, H=4.0, n=2, variant="bounded-divergent",
                            wave=None, coeffs=None, growth=1.05, decay_fraction=0.1,
                            max_principle_tol=1e-6, solver=None):
    """Solve the extensions of ``sigma'_1..sigma'_levels`` and check the layered bounds.

    The boundary sums come from :func:`build_damping` on the ``nx``-point
    torus (sub-grid surrogate on unresolved levels).  Each is extended by a
    p-harmonic function on the slab of period 1 and height ``H``.  For
    ``j < levels`` the height ``h_j`` is the lowest level above which
    the oscillation of ``sigma^_{j+1} - sigma^_j`` has dropped to
    ``decay_fraction`` times its boundary oscillation, and
    ``A_j = h_j T_{j+1}^alpha`` with ``alpha = 1 - 2/p``.
    The limit ``sigma^`` is approximated by ``sigma^_levels`` and
    ``h_levels = 0``.  Checks (index ``j``):

    - ``step``: ``|sigma^_{j+1} - sigma^_j| < 2^-(j+1)`` above ``h_j``
    - ``near``: ``|sigma^_{j+1}(x) - sigma'_j(x')| < 2^-(j+1) + |a_{j+1}|`` below ``h_j``
    - ``limit``: ``|sigma^ - sigma^_j| < 2^-j`` above ``h_j``
    - ``band``: ``|sigma^(x) - sigma'_j(x')| < 2^-(j+1) + 2^-j + |a_{j+1}|`` for ``h_{j+1} < |x''| < h_j``
    """
    if not p > 2:
        raise RegimeError(f"need p > 2, got {p}", field="p", inequality="p > 2")
    if n not in (2, 3):
        raise RegimeError(f"slab dimension must be 2 or 3, got {n}", field="n", inequality="n in {2, 3}")
    if not 1 <= levels <= plan.J:
        raise ValueError(f"levels must be in 1..{plan.J}")
    if 8 * plan[levels] > nx:
        raise PlanOverflowError(
            f"T_{levels} = {plan[levels]} needs nx >= {8 * plan[levels]} (got {nx})")
    k = n - 1
    wave = triangle_wave(k) if wave is None else wave
    if coeffs is None:
        coeffs = (positive_coefficients(levels) if variant == "positive-vanishing"
                  else divergent_coefficients(levels))
    state = build_damping(wave, plan, coeffs, variant, nx, subgrid="surrogate")
    geom = Geometry(n, k, p)
    grid = SlabGrid.graded(geom, 1.0, nx, H, growth=growth)
    solver = PLaplaceSolver() if solver is None else solver
    z = grid.z
    alpha = 1.0 - 2.0 / p

    fields, ext, bnd = [], [], []
    for j in range(levels):
        datum = state.sigma[j]
        fld = solver.fit(grid, datum.ravel()).field_
        arr = fld.array().reshape(z.size, -1)
        fields.append(fld)
        ext.append(arr)
        bnd.append(datum.ravel())
    a = coeffs.a

    heights = []
    for j in range(levels - 1):
        diff = ext[j + 1] - ext[j]
        b_osc = float(np.ptp(bnd[j + 1] - bnd[j]))
        heights.append(_decay_height(diff, z, b_osc, decay_fraction))
    heights.append(0.0)
    A = [heights[j] * float(plan[j + 2]) ** alpha for j in range(levels - 1)]

    top = float(z[-1]) + 1.0
    checks = []
    lim = ext[-1]
    for j in range(levels - 1):
        idx = j + 1
        h = heights[j]
        checks.append(LayerCheck("step", idx, (h, top),
                                 _sup_band(ext[j + 1] - ext[j], z[:, None] + 0 * ext[j], h, top),
                                 2.0 ** -(idx + 1)))
        near = ext[j + 1] - bnd[j][None, :]
        checks.append(LayerCheck("near", idx, (0.0, h),
                                 _sup_band(near, z[:, None] + 0 * near, 0.0, h),
                                 2.0 ** -(idx + 1) + abs(a[idx])))
        checks.append(LayerCheck("limit", idx, (h, top),
                                 _sup_band(lim - ext[j], z[:, None] + 0 * lim, h, top),
                                 2.0 ** -idx))
        lo = heights[j + 1]
        band = lim - bnd[j][None, :]
        checks.append(LayerCheck("band", idx, (lo, h),
                                 _sup_band(band, z[:, None] + 0 * band, lo, h),
                                 2.0 ** -(idx + 1) + 2.0 ** -idx + abs(a[idx])))
    sup_ext = [float(np.nanmax(np.abs(e))) for e in ext]
    sup_bnd = [float(np.max(np.abs(b))) for b in bnd]
    return AssemblyReport(p, n, tuple(plan.T), levels, alpha, heights, A, checks, sup_ext, sup_bnd,
                          max_principle_tol, state, fields)
