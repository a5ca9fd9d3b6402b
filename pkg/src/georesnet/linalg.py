"""Small fixed-size linear algebra: 3x3 skew matrices and their exponentials.

Axial coordinates follow the cross-product convention: for a 3-vector omega,
``skew_from_axial(omega) @ v == cross(omega, v)``.  Consequently the unit
axial vectors map to rotation generators about the matching coordinate axis,

    skew_from_axial((0, 0, 1)) = [[0, -1, 0], [1, 0, 0], [0,  0, 0]]   (about z)
    skew_from_axial((0, 1, 0)) = [[0, 0, 1], [0, 0, 0], [-1, 0, 0]]   (about y)
    skew_from_axial((1, 0, 0)) = [[0, 0, 0], [0, 0, -1], [0, 1, 0]]   (about x)

All functions accept a single item (shape ``(3,)`` or ``(3, 3)``) or a
batch with leading axes, and return matching shapes.  Everything is double
precision.
"""

import numpy as np
import scipy.linalg

# Below this angle the closed-form sin(t)/t and (1-cos(t))/t**2 lose digits
# to cancellation; 4-term Taylor series keep truncation error under 1e-17.
SMALL_ANGLE = 1e-4


def skew_from_axial(omega):
    """Skew-symmetric matrix of the axial vector, so that W @ v = omega x v."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros(omega.shape[:-1] + (3, 3))
    wx, wy, wz = omega[..., 0], omega[..., 1], omega[..., 2]
    out[..., 0, 1] = -wz
    out[..., 0, 2] = wy
    out[..., 1, 0] = wz
    out[..., 1, 2] = -wx
    out[..., 2, 0] = -wy
    out[..., 2, 1] = wx
    return out


def axial_from_skew(mat):
    """Inverse of skew_from_axial; reads the three independent entries."""
    mat = np.asarray(mat, dtype=float)
    return np.stack(
        [mat[..., 2, 1], mat[..., 0, 2], mat[..., 1, 0]], axis=-1
    )


def _sinc_coeffs(theta):
    """Return (sin(t)/t, (1-cos(t))/t^2) with a series branch near zero.

    The series are 4-term Horner evaluations of the Taylor expansions; at
    the SMALL_ANGLE threshold both branches agree to well under 1e-12,
    which the tests pin down.
    """
    theta = np.asarray(theta, dtype=float)
    s = np.empty_like(theta)
    c = np.empty_like(theta)
    small = theta < SMALL_ANGLE
    t2 = theta[small] ** 2
    s[small] = 1.0 - t2 / 6.0 * (1.0 - t2 / 20.0 * (1.0 - t2 / 42.0))
    c[small] = 0.5 * (1.0 - t2 / 12.0 * (1.0 - t2 / 30.0 * (1.0 - t2 / 56.0)))
    big = ~small
    tb = theta[big]
    s[big] = np.sin(tb) / tb
    c[big] = (1.0 - np.cos(tb)) / tb ** 2
    return s, c


def expm_skew3(omega):
    """Exponential of skew_from_axial(omega) by the Rodrigues closed form.

    R = I + (sin t / t) W + ((1 - cos t) / t^2) W^2 with t = ||omega||.
    The result is a rotation matrix to machine precision for any finite
    omega; the small-angle branch of the scalar coefficients keeps the
    formula smooth through t = 0.
    """
    omega = np.asarray(omega, dtype=float)
    theta = np.linalg.norm(omega, axis=-1)
    s, c = _sinc_coeffs(theta)
    w = skew_from_axial(omega)
    w2 = w @ w
    eye = np.broadcast_to(np.eye(3), w.shape)
    return eye + s[..., None, None] * w + c[..., None, None] * w2


def expm_dense(mat):
    """General matrix exponential, used as an independent oracle.

    Deliberately takes a different route than expm_skew3 (scaling and
    squaring with Pade approximation) so the two can cross-check each
    other.  Accepts a single matrix only.
    """
    return scipy.linalg.expm(np.asarray(mat, dtype=float))


def frobenius_inner(a, b):
    """Sum of entrywise products, Tr(A^T B).  Batched over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sum(a * b, axis=(-2, -1))
