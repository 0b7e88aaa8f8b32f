"""Structured grids and their corner-stencil quadratures.

Each cell contributes one quadrature point per corner; the gradient at a
corner uses one-sided differences along the cell edges leaving that corner.
Averaging the ``2**d`` corners gives a consistent, hourglass-free energy that
is exact for affine functions and obeys a discrete maximum principle for the
plain p-Laplacian (truncation shrinks every edge difference).
"""

from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from ..errors import RegimeError, ResolutionError
from ..exponents import Geometry
from .engine import DiscreteEnergy

TAG_INTERIOR = 0
TAG_BOTTOM = 1
TAG_TOP = 2
TAG_INNER = 3
TAG_INACTIVE = 4


def corner_quadrature(node_shape, periodic, spacings, cell_weight=None, rotation=None,
                      cell_active=None):
    """Corner-stencil quadrature on a tensor grid.

    Parameters
    ----------
    node_shape : tuple of int
        Number of distinct nodes along each axis.
    periodic : tuple of bool
        Periodic axes have as many cells as nodes (index wrap-around).
    spacings : list of arrays
        Cell widths along each axis (length = number of cells on that axis).
    cell_weight : array, optional
        Extra weight per cell (cell shape), multiplied into the volume.
    rotation : array, optional
        Per-cell ``d x d`` matrices mapping axis derivatives to the physical
        gradient (cell shape + (d, d)).
    cell_active : bool array, optional
        Cells excluded from the energy when False.

    Returns
    -------
    idx, M, w : arrays of shapes (Q, d+1), (Q, d, d+1), (Q,)
    """
    d = len(node_shape)
    cell_shape = tuple(n if per else n - 1 for n, per in zip(node_shape, periodic))
    cells = np.indices(cell_shape).reshape(d, -1).T
    if cell_active is not None:
        cells = cells[np.ravel(cell_active)]
    ncell = cells.shape[0]
    widths = np.stack([np.asarray(spacings[a])[cells[:, a]] for a in range(d)], axis=1)
    vol = np.prod(widths, axis=1)
    if cell_weight is not None:
        flat = np.ravel(cell_weight) if cell_active is None else np.ravel(cell_weight)[np.ravel(cell_active)]
        vol = vol * flat
    rot = None
    if rotation is not None:
        rot = rotation.reshape(-1, d, d)
        if cell_active is not None:
            rot = rot[np.ravel(cell_active)]

    def flat_index(multi):
        multi = multi.copy()
        for a in range(d):
            if periodic[a]:
                multi[:, a] %= node_shape[a]
        return np.ravel_multi_index(multi.T, node_shape)

    corners = list(itertools.product((0, 1), repeat=d))
    idx = np.empty((ncell, len(corners), d + 1), dtype=np.int64)
    M = np.zeros((ncell, len(corners), d, d + 1))
    for ci, sigma in enumerate(corners):
        sigma = np.array(sigma)
        corner = cells + sigma
        idx[:, ci, 0] = flat_index(corner)
        for a in range(d):
            nb = corner.copy()
            nb[:, a] += 1 - 2 * sigma[a]
            idx[:, ci, a + 1] = flat_index(nb)
            sgn = 1.0 - 2.0 * sigma[a]
            M[:, ci, a, 0] = -sgn / widths[:, a]
            M[:, ci, a, a + 1] = sgn / widths[:, a]
        if rot is not None:
            M[:, ci] = np.einsum("cij,cjm->cim", rot, M[:, ci])
    w = np.repeat(vol[:, None] / len(corners), len(corners), axis=1)
    return idx.reshape(-1, d + 1), M.reshape(-1, d, d + 1), w.ravel()


class _Grid:
    """Common bookkeeping: problem cache keyed by boundary mode."""

    def __post_init__(self):
        self._cache = {}

    def problem(self, fixed_values, mode):
        key = mode
        if key not in self._cache:
            idx, M, w, fixed = self._assemble(mode)
            self._cache[key] = DiscreteEnergy(self.n_nodes, idx, M, w, fixed, np.zeros(int(fixed.sum())))
        base = self._cache[key]
        prob = DiscreteEnergy.__new__(DiscreteEnergy)
        prob.__dict__.update(base.__dict__)
        prob.fixed_values = np.asarray(fixed_values, dtype=float)
        return prob


@dataclass(eq=False)
class SlabGrid(_Grid):
    """Laterally periodic slab over R^k x [0, H] (k = n-1) or cylinder (k <= n-2).

    For ``k = n-1`` the vertical axis has ``nz`` cells; with ``growth > 1``
    the cell heights grow geometrically from the bottom.  For ``k <= n-2``
    each x'' axis covers ``[-H, H]`` with ``2 nz`` uniform cells and only
    cells inside the ball ``|x''| <= H`` are kept.
    """

    geometry: Geometry
    tau: float = 1.0
    nx: int = 64
    H: float = 4.0
    nz: int = 256
    growth: float = 1.0
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not self.H / self.tau >= 4.0 - 1e-12:
            raise RegimeError(f"H/tau >= 4 violated: H={self.H}, tau={self.tau}",
                              field="H", inequality="H/tau >= 4")
        if self.nx < 4 or self.nz < 2:
            raise ResolutionError("need nx >= 4 and nz >= 2")
        if self.growth < 1.0:
            raise ValueError("growth must be >= 1")
        if not self.geometry.halfspace and self.growth != 1.0:
            raise ValueError("graded vertical spacing is only available for k = n-1")
        self._cache = {}

    @classmethod
    def graded(cls, geometry, tau, nx, H, growth=1.05, dz0=None):
        """Slab whose first vertical cell is ``dz0`` (default ``h``) and grows by ``growth``."""
        h = tau / nx
        dz0 = h if dz0 is None else dz0
        if growth == 1.0:
            nz = int(math.ceil(H / dz0))
        else:
            nz = int(math.ceil(math.log(1.0 + H * (growth - 1.0) / dz0) / math.log(growth)))
        return cls(geometry, tau, nx, H, max(nz, 2), growth)

    @property
    def h(self):
        return self.tau / self.nx

    @property
    def k(self):
        return self.geometry.k

    @property
    def cylinder(self):
        return not self.geometry.halfspace

    @property
    def z(self):
        """Vertical node coordinates (half-space slab) or x'' axis nodes (cylinder)."""
        if self.cylinder:
            return np.linspace(-self.H, self.H, 2 * self.nz + 1)
        if self.growth == 1.0:
            return np.linspace(0.0, self.H, self.nz + 1)
        dz = self.growth ** np.arange(self.nz)
        z = np.concatenate([[0.0], np.cumsum(dz)])
        return z * (self.H / z[-1])

    @property
    def x(self):
        return np.arange(self.nx) * self.h

    @property
    def node_shape(self):
        k, n = self.geometry.k, self.geometry.n
        if self.cylinder:
            return (self.nx,) * k + (2 * self.nz + 1,) * (n - k)
        return (self.nz + 1,) + (self.nx,) * k

    @property
    def n_nodes(self):
        return int(np.prod(self.node_shape))

    def coordinates(self):
        """Physical coordinates of every node, shape (n_nodes, n), x' first."""
        k, n = self.geometry.k, self.geometry.n
        if self.cylinder:
            axes = [self.x] * k + [self.z] * (n - k)
            grids = np.meshgrid(*axes, indexing="ij")
            return np.stack([g.ravel() for g in grids], axis=1)
        axes = [self.z] + [self.x] * k
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids[1:]] + [grids[0].ravel()], axis=1)

    def _cell_active(self):
        if not self.cylinder:
            return None
        k, n = self.geometry.k, self.geometry.n
        zc = self.z
        cell_shape = (self.nx,) * k + (2 * self.nz,) * (n - k)
        # a cell is kept when its farthest corner lies inside the ball
        far = np.maximum(np.abs(zc[:-1]), np.abs(zc[1:]))
        r2 = np.zeros(cell_shape)
        for a in range(n - k):
            shape = [1] * len(cell_shape)
            shape[k + a] = -1
            r2 = r2 + (far ** 2).reshape(shape)
        return r2 <= self.H ** 2 * (1.0 + 1e-12)

    def tags(self):
        k, n = self.geometry.k, self.geometry.n
        tags = np.zeros(self.node_shape, dtype=np.int8)
        if not self.cylinder:
            tags[0] = TAG_BOTTOM
            return tags.ravel()
        active = self._cell_active()
        touched = np.zeros(self.node_shape, dtype=bool)
        touched_bad = np.zeros(self.node_shape, dtype=bool)
        for sigma in itertools.product((0, 1), repeat=n - k):
            sl = tuple([slice(None)] * k + [slice(s, s + 2 * self.nz) for s in sigma])
            touched[sl] |= active
            touched_bad[sl] |= ~active
        tags[~touched] = TAG_INACTIVE
        # outer rim: active nodes on the box boundary or next to a dropped cell
        rim = touched & touched_bad
        for a in range(n - k):
            for end in (0, -1):
                sl = [slice(None)] * (k + n - k)
                sl[k + a] = end
                rim[tuple(sl)] |= touched[tuple(sl)]
        tags[rim] = TAG_TOP
        center = tuple([slice(None)] * k + [self.nz] * (n - k))
        tags[center] = TAG_BOTTOM
        return tags.ravel()

    def _assemble(self, mode):
        k, n = self.geometry.k, self.geometry.n
        h = self.h
        if self.cylinder:
            dz = np.diff(self.z)
            spacings = [np.full(self.nx, h)] * k + [dz] * (n - k)
            periodic = (True,) * k + (False,) * (n - k)
            idx, M, w = corner_quadrature(self.node_shape, periodic, spacings,
                                          cell_active=self._cell_active())
        else:
            dz = np.diff(self.z)
            spacings = [dz] + [np.full(self.nx, h)] * k
            periodic = (False,) + (True,) * k
            idx, M, w = corner_quadrature(self.node_shape, periodic, spacings)
            # reorder derivative rows so that gradients read (x', x_n)
            M = np.concatenate([M[:, 1:], M[:, :1]], axis=1)
        tags = self.tags()
        fixed = (tags == TAG_BOTTOM) | (tags == TAG_INACTIVE)
        if mode != "neumann":
            fixed |= tags == TAG_TOP
        return idx, M, w, fixed

    def boundary_values(self, datum, top="neumann"):
        """Fixed-node values for a lateral datum; returns ``(values, mode, scale)``."""
        coords = self.coordinates()
        tags = self.tags()
        k = self.geometry.k
        bottom = tags == TAG_BOTTOM
        lateral = coords[bottom][:, :k]
        if callable(datum):
            vals = np.asarray(datum(lateral), dtype=float).reshape(-1)
        else:
            vals = np.asarray(datum, dtype=float).reshape(-1)
            if vals.size != lateral.shape[0]:
                raise ValueError(f"datum array must have {lateral.shape[0]} entries")
        if not np.all(np.isfinite(vals)):
            raise ValueError("datum must be finite")
        full = np.zeros(self.n_nodes)
        full[bottom] = vals
        mode = "neumann" if top == "neumann" else "dirichlet"
        if mode == "dirichlet":
            top_value = float(np.mean(vals)) if top == "mean" else float(top)
            full[tags == TAG_TOP] = top_value
        fixed = (tags == TAG_BOTTOM) | (tags == TAG_INACTIVE)
        if mode == "dirichlet":
            fixed |= tags == TAG_TOP
        return full[fixed], mode, _datum_scale(vals, k, self.nx, self.h)


def _datum_scale(vals, k, nx, h):
    """Discrete Lipschitz constant of a lateral datum (at least 1e-12)."""
    arr = vals.reshape((nx,) * k)
    lip = 0.0
    for a in range(k):
        lip = max(lip, float(np.max(np.abs(np.roll(arr, -1, axis=a) - arr))) / h)
    if lip == 0.0:
        return max(abs(float(vals[0])), 1.0)
    return lip


@dataclass(eq=False)
class SectorGrid(_Grid):
    """Log-polar grid of the (t, s) half-plane for data radial in x' and x''.

    Nodes sit at ``rho = exp(xi)`` with ``xi`` uniform on
    ``[log r_min, log r_max]`` and at angles ``phi`` measured from the plane.
    With ``symmetric=True`` the angle covers ``[0, pi/2]`` (``t = |x'|``,
    natural boundary on the x'' axis); otherwise ``k = 1`` and the angle
    covers ``[0, pi]`` with ``t`` signed.  The energy weight is
    ``rho^(n-p) cos^(k-1)(phi) sin^(n-k-1)(phi)`` times the polar measure.
    """

    geometry: Geometry
    n_angle: int = 256
    n_radial: int = 1024
    r_min: float = 1e-3
    r_max: float = 1e6
    symmetric: bool = True
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if not self.symmetric and self.geometry.k != 1:
            raise RegimeError("the full-angle sector needs k = 1", field="k",
                              inequality="k = 1")
        if self.n_angle < 4 or self.n_radial < 4:
            raise ResolutionError("need n_angle >= 4 and n_radial >= 4")
        self._cache = {}

    @property
    def xi(self):
        return np.linspace(math.log(self.r_min), math.log(self.r_max), self.n_radial + 1)

    @property
    def rho(self):
        return np.exp(self.xi)

    @property
    def phi(self):
        top = math.pi / 2.0 if self.symmetric else math.pi
        return np.linspace(0.0, top, self.n_angle + 1)

    @property
    def node_shape(self):
        return (self.n_radial + 1, self.n_angle + 1)

    @property
    def n_nodes(self):
        return int(np.prod(self.node_shape))

    def coordinates(self):
        """(t, s) of every node, shape (n_nodes, 2)."""
        R, P = np.meshgrid(self.rho, self.phi, indexing="ij")
        return np.stack([(R * np.cos(P)).ravel(), (R * np.sin(P)).ravel()], axis=1)

    def tags(self):
        tags = np.zeros(self.node_shape, dtype=np.int8)
        tags[-1, :] = TAG_TOP
        tags[0, :] = TAG_INNER
        tags[:, 0] = TAG_BOTTOM
        if not self.symmetric:
            tags[:, -1] = TAG_BOTTOM
        return tags.ravel()

    def _assemble(self, mode):
        n, k, p = self.geometry.n, self.geometry.k, float(self.geometry.p)
        xi, phi = self.xi, self.phi
        dxi, dphi = np.diff(xi), np.diff(phi)
        xc = 0.5 * (xi[:-1] + xi[1:])
        pc = 0.5 * (phi[:-1] + phi[1:])
        Xc, Pc = np.meshgrid(xc, pc, indexing="ij")
        weight = np.exp((n - p) * Xc) * np.abs(np.cos(Pc)) ** (k - 1) * np.sin(Pc) ** (n - k - 1)
        c, s = np.cos(Pc), np.sin(Pc)
        rot = np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
        idx, M, w = corner_quadrature(self.node_shape, (False, False), [dxi, dphi],
                                      cell_weight=weight, rotation=rot)
        tags = self.tags()
        fixed = tags != TAG_INTERIOR
        return idx, M, w, fixed

    def boundary_values(self, datum, outer=0.0):
        """Fixed values: datum on the plane rays, datum(r_min cos phi) on the
        inner arc, ``outer`` on the outer arc."""
        coords = self.coordinates()
        tags = self.tags()
        fixed = tags != TAG_INTERIOR
        vals = np.zeros(self.n_nodes)
        t = coords[:, 0]
        on_plane = tags == TAG_BOTTOM
        inner = tags == TAG_INNER
        vals[on_plane] = np.asarray(datum(t[on_plane][:, None]), dtype=float).reshape(-1)
        vals[inner] = np.asarray(datum(t[inner][:, None]), dtype=float).reshape(-1)
        vals[tags == TAG_TOP] = float(outer)
        span = float(np.ptp(vals[fixed]))
        return vals[fixed], "dirichlet", (span if span > 0 else 1.0)

    def tilt_plane(self, a):
        """Project a tilt vector of R^n onto the (t, s) plane, checking symmetry."""
        a = np.asarray(a, dtype=float)
        k, n = self.geometry.k, self.geometry.n
        ap, app = a[:k], a[k:]
        if self.symmetric:
            if np.any(ap != 0):
                raise RegimeError("a' must vanish for data radial in x'", field="a",
                                  inequality="a' = 0")
            at = 0.0
        else:
            at = float(ap[0])
        if n - k == 1:
            as_ = float(app[0])
        else:
            if np.any(app != 0):
                raise RegimeError("a'' must vanish for data radial in x''", field="a",
                                  inequality="a'' = 0 when n-k >= 2")
            as_ = 0.0
        return np.array([at, as_])
