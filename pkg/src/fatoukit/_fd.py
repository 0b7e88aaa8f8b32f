"""Full-coordinate finite-difference divergence used by the brute-force oracles."""

import numpy as np

# 4th-order central first derivative: offsets and weights (divide by h)
_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])
_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def gradient4(func, centers, h):
    """4th-order central gradient of ``func`` at each row of ``centers``.

    ``func`` maps an ``(m, n)`` array of points to ``m`` values.
    """
    centers = np.atleast_2d(centers)
    m, n = centers.shape
    eye = np.eye(n)
    # points[c, l, j] = centers[c] + offset_j * h * e_l
    pts = centers[:, None, None, :] + (_OFFSETS[None, None, :, None] * h) * eye[None, :, None, :]
    vals = func(pts.reshape(-1, n)).reshape(m, n, len(_OFFSETS))
    return vals @ _WEIGHTS / h


def normalized_divergence(func, x, h, flux, scale):
    """``scale(grad u(x))**-1 * div flux(grad u)`` by nested central differences.

    The inner gradients are 4th order, the outer divergence 2nd order.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    eye = np.eye(n)
    shifted = np.concatenate([x + h * eye, x - h * eye])
    grads = gradient4(func, shifted, h)
    fluxes = flux(grads)
    div = np.sum((np.diag(fluxes[:n]) - np.diag(fluxes[n:])) / (2.0 * h))
    g0 = gradient4(func, x[None, :], h)[0]
    return div / scale(g0)
