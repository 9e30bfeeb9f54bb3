"""Constant-per-line shifts of gridded data by spline interpolation.

Every advection sub-step of the splitting moves each grid line rigidly:
the drift shifts row ``p_j`` by ``p_j dt / 2`` in ``q`` and the kick shifts
column ``q_i`` by ``-M sin(q_i - phi) dt`` in ``p``. A shift by ``s`` cells
means ``new[x] = old(x - s)``.
"""

import numpy as np
from scipy.linalg import lapack

CUBIC = "cubic"
LINEAR = "linear"
_OFFSETS = np.arange(-1, 3)


def bspline3(x):
    """Centred cubic B-spline (support ``(-2, 2)``)."""
    ax = np.abs(x)
    return np.where(ax < 1.0, 2.0 / 3.0 - ax * ax + 0.5 * ax ** 3,
                    np.where(ax < 2.0, (2.0 - ax) ** 3 / 6.0, 0.0))


def periodic_shift_multiplier(n, shifts, kind=CUBIC):
    """rfft-domain factors shifting periodic data along axis 0.

    ``shifts[j]`` is the shift (in cells) applied to column ``j``. The
    periodic cubic spline interpolant evaluated at shifted nodes is a
    circulant operator, so interpolation plus evaluation collapses to one
    multiplier per wavenumber.
    """
    shifts = np.asarray(shifts, dtype=float)[None, :]
    theta = (2.0 * np.pi / n) * np.arange(n // 2 + 1)[:, None]
    n0 = np.floor(shifts)
    alpha = shifts - n0
    phase = np.exp(-1j * theta * n0)
    if kind == CUBIC:
        w = sum(bspline3(m - alpha) * np.exp(-1j * theta * m) for m in _OFFSETS)
        return phase * w / ((4.0 + 2.0 * np.cos(theta)) / 6.0)
    if kind == LINEAR:
        return phase * ((1.0 - alpha) + alpha * np.exp(-1j * theta))
    raise ValueError(f"unknown interpolation {kind!r}")


def apply_periodic_multiplier(values, multiplier):
    n = values.shape[0]
    return np.fft.irfft(np.fft.rfft(values, axis=0) * multiplier, n=n, axis=0)


class NaturalSplineShifter:
    """Shift rows of ``values[i, :]`` along axis 1 by per-row amounts.

    Uses natural cubic spline interpolation on the cell-centred nodes and
    zero inflow: targets beyond the box edge (half a cell past the outer
    nodes) evaluate to 0.
    """

    def __init__(self, n, kind=CUBIC):
        if kind not in (CUBIC, LINEAR):
            raise ValueError(f"unknown interpolation {kind!r}")
        if n < 4:
            raise ValueError("need at least 4 nodes")
        self.n = n
        self.kind = kind
        # natural end conditions pin c_0 = f_0 and c_{n-1} = f_{n-1}; the
        # interior system (1, 4, 1)/6 is symmetric positive definite
        d, e, info = lapack.dpttrf(np.full(n - 2, 4.0 / 6.0), np.full(n - 3, 1.0 / 6.0))
        if info != 0:
            raise RuntimeError("spline system factorisation failed")
        self._d, self._e = d, e
        self._j = np.arange(n)[None, :]

    def coefficients(self, values, pad=2):
        """B-spline coefficients with ``pad`` extra entries per side.

        The first two entries on each side are linear extrapolations (ghost
        coefficients of the natural spline); further padding is zero.
        """
        n = self.n
        rhs = np.array(values[:, 1:-1].T, order="F")
        rhs[0] -= values[:, 0] / 6.0
        rhs[-1] -= values[:, -1] / 6.0
        c, info = lapack.dpttrs(self._d, self._e, rhs)
        if info != 0:
            raise RuntimeError("spline solve failed")
        ext = np.zeros((values.shape[0], n + 2 * pad))
        ext[:, pad + 1 : pad + n - 1] = c.T
        ext[:, pad] = values[:, 0]
        ext[:, pad + n - 1] = values[:, -1]
        ext[:, pad - 1] = 2.0 * ext[:, pad] - ext[:, pad + 1]
        ext[:, pad - 2] = 2.0 * ext[:, pad - 1] - ext[:, pad]
        ext[:, pad + n] = 2.0 * ext[:, pad + n - 1] - ext[:, pad + n - 2]
        ext[:, pad + n + 1] = 2.0 * ext[:, pad + n] - ext[:, pad + n - 1]
        return ext

    def shift(self, values, shifts):
        n = self.n
        shifts = np.asarray(shifts, dtype=float)
        pad = int(np.ceil(np.max(np.abs(shifts)))) + 4
        n0 = np.floor(-shifts)
        alpha = (-shifts - n0)[:, None]
        x = self._j - shifts[:, None]
        inside = (x >= -0.5) & (x <= n - 0.5)
        if self.kind == CUBIC:
            src = self.coefficients(values, pad)
        else:
            src = np.zeros((values.shape[0], n + 2 * pad))
            src[:, pad : pad + n] = values
        width = src.shape[1]
        flat = src.ravel()
        base = np.arange(values.shape[0])[:, None] * width + self._j
        base += (n0.astype(np.int64) + pad)[:, None]
        if self.kind == CUBIC:
            out = bspline3(alpha + 1.0) * flat[base - 1]
            for m in (0, 1, 2):
                out += bspline3(alpha - m) * flat[base + m]
        else:
            out = (1.0 - alpha) * flat[base] + alpha * flat[base + 1]
        out *= inside
        return out
