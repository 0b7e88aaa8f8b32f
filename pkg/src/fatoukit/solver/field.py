"""Solved fields, grid dumps and profile CSV files."""

from dataclasses import dataclass, field
import csv
import io

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..exponents import Geometry
from .engine import SolveInfo
from .grids import SectorGrid, SlabGrid, TAG_INACTIVE

DUMP_KEYS = ("n", "k", "p", "tau", "nx", "H", "nz", "eps", "tol")


@dataclass(eq=False)
class ScalarField:
    """Nodal values on a grid together with node tags and solver diagnostics."""

    values: np.ndarray
    grid: object
    tags: np.ndarray
    info: SolveInfo = field(default_factory=SolveInfo)

    def array(self):
        """Values reshaped to the grid's node shape; inactive nodes are NaN."""
        v = np.array(self.values, dtype=float)
        v[self.tags == TAG_INACTIVE] = np.nan
        return v.reshape(self.grid.node_shape)

    def levels(self):
        """``(heights, rows)``: node rows grouped by distance to the plane.

        For a half-space slab each row is one horizontal level.  For a
        cylinder the rows are the nodes on ``|x''| = const`` shells of the
        x'' grid (nodes sharing the same radius up to rounding).  For a sector
        grid the rows are the radial shells.
        """
        g = self.grid
        arr = self.array()
        if isinstance(g, SectorGrid):
            return g.rho, [arr[i] for i in range(arr.shape[0])]
        if not g.cylinder:
            return g.z, [arr[i].ravel() for i in range(arr.shape[0])]
        k, n = g.geometry.k, g.geometry.n
        coords = g.coordinates()
        rad = np.round(np.linalg.norm(coords[:, k:], axis=1), 12)
        ok = self.tags != TAG_INACTIVE
        heights = np.unique(rad[ok])
        flat = np.asarray(self.values, dtype=float)
        rows = [flat[ok & (rad == hgt)] for hgt in heights]
        return heights, rows

    def interpolator(self):
        """Multilinear interpolant in physical coordinates.

        Returns a callable on ``(m, n)`` points (slab/cylinder) or ``(m, 2)``
        points ``(t, s)`` (sector grid).
        """
        g = self.grid
        arr = self.array()
        if isinstance(g, SectorGrid):
            itp = RegularGridInterpolator((g.xi, g.phi), arr, bounds_error=False, fill_value=np.nan)

            def call(X):
                X = np.atleast_2d(np.asarray(X, dtype=float))
                t, s = X[:, 0], X[:, 1]
                rho = np.hypot(t, s)
                phi = np.arctan2(s, t if not g.symmetric else np.abs(t))
                return itp(np.stack([np.log(np.maximum(rho, 1e-300)), phi], axis=1))
            return call
        k, n = g.geometry.k, g.geometry.n
        # close the periodic axes by appending the wrapped first slice
        xs = np.append(g.x, g.tau)
        if g.cylinder:
            for a in range(k):
                arr = np.concatenate([arr, np.take(arr, [0], axis=a)], axis=a)
            itp = RegularGridInterpolator([xs] * k + [g.z] * (n - k), arr,
                                          bounds_error=False, fill_value=np.nan)

            def call(X):
                X = np.atleast_2d(np.asarray(X, dtype=float)).copy()
                X[:, :k] = np.mod(X[:, :k], g.tau)
                return itp(X)
            return call
        for a in range(1, k + 1):
            arr = np.concatenate([arr, np.take(arr, [0], axis=a)], axis=a)
        itp = RegularGridInterpolator([g.z] + [xs] * k, arr, bounds_error=False, fill_value=np.nan)

        def call(X):
            X = np.atleast_2d(np.asarray(X, dtype=float))
            Y = np.concatenate([X[:, k:k + 1], np.mod(X[:, :k], g.tau)], axis=1)
            return itp(Y)
        return call

    def nearest(self, X):
        """Value at the node nearest to each physical point."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        coords = self.grid.coordinates()
        ok = self.tags != TAG_INACTIVE
        idx = np.nonzero(ok)[0]
        out = np.empty(X.shape[0])
        for i, x in enumerate(X):
            d = coords[idx] - x
            if isinstance(self.grid, SlabGrid):
                k = self.grid.geometry.k
                tau = self.grid.tau
                d[:, :k] = (d[:, :k] + 0.5 * tau) % tau - 0.5 * tau
            out[i] = self.values[idx[np.argmin(np.einsum("ij,ij->i", d, d))]]
        return out


def write_grid_dump(fld, path_or_file):
    """Plain-text dump: ``key value`` header lines, then one block per level.

    Each block starts with ``# level <i> height <z>`` followed by the
    row-major node values of that level, one per line.
    """
    g = fld.grid
    if not isinstance(g, SlabGrid):
        raise TypeError("grid dumps are defined for slab grids")
    geo = g.geometry
    header = {"n": geo.n, "k": geo.k, "p": float(geo.p), "tau": g.tau, "nx": g.nx,
              "H": g.H, "nz": g.nz, "eps": fld.info.eps, "tol": fld.info.residual}
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        for key in DUMP_KEYS:
            val = header[key]
            fh.write(f"{key} {val if val is None or isinstance(val, int) else float(val)!r}\n")
        arr = fld.array()
        lead = g.z if not g.cylinder else g.x
        for i in range(arr.shape[0]):
            fh.write(f"# level {i} height {float(lead[i])!r}\n")
            for v in arr[i].ravel():
                fh.write(f"{float(v)!r}\n")
    finally:
        if own:
            fh.close()


def read_grid_dump(path_or_file):
    """Inverse of :func:`write_grid_dump`; returns ``(header, array)``."""
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file) if own else path_or_file
    try:
        lines = fh.read().splitlines()
    finally:
        if own:
            fh.close()
    header = {}
    pos = 0
    for key in DUMP_KEYS:
        name, val = lines[pos].split(" ", 1)
        if name != key:
            raise ValueError(f"expected header key {key!r}, found {name!r}")
        header[key] = None if val == "None" else float(val)
        pos += 1
    blocks, cur = [], None
    for line in lines[pos:]:
        if line.startswith("#"):
            cur = []
            blocks.append(cur)
        else:
            cur.append(float(line))
    for key in ("n", "k", "nx", "nz"):
        header[key] = int(header[key])
    return header, np.array(blocks)


def write_profile_csv(profile, path_or_file=None):
    """Write ``height,max,min,mean`` rows; returns the text when no target is given."""
    buf = io.StringIO() if path_or_file is None else None
    own = path_or_file is not None and not hasattr(path_or_file, "write")
    fh = buf if buf is not None else (open(path_or_file, "w", newline="") if own else path_or_file)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["height", "max", "min", "mean"])
        for row in profile:
            w.writerow([repr(float(v)) for v in row])
    finally:
        if own:
            fh.close()
    return buf.getvalue() if buf is not None else None


def geometry_from_header(header):
    p = header["p"]
    return Geometry(header["n"], header["k"], int(p) if float(p).is_integer() else p)
