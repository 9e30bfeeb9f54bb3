"""Uniform tabulation of a phase-space density on ``(-pi, pi] x [-p_max, p_max]``."""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError


@dataclass
class PhaseGrid:
    """Density values ``f(q_i, p_j)`` stored as ``values[i, j]``.

    ``q`` is periodic with nodes ``-pi + (i + 1) dq`` (so ``pi`` is a node and
    ``-pi`` is not); ``p`` uses cell centres ``-p_max + (j + 1/2) dp``.
    All integrals are plain Riemann sums, which is the trapezoidal rule in the
    periodic direction and the midpoint rule in ``p``.
    """

    values: np.ndarray
    p_max: float = 3.0
    q: np.ndarray = field(init=False, repr=False)
    p: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise DomainError("grid values must be a 2-D array (n_q, n_p)")
        n_q, n_p = self.values.shape
        if n_q < 4 or n_p < 4:
            raise DomainError("grid needs at least 4 nodes per direction")
        if not self.p_max > 0:
            raise DomainError("p_max must be positive")
        self.q = -np.pi + (np.arange(n_q) + 1.0) * (2.0 * np.pi / n_q)
        self.p = -self.p_max + (np.arange(n_p) + 0.5) * (2.0 * self.p_max / n_p)

    @classmethod
    def zeros(cls, n_q, n_p, p_max=3.0):
        return cls(np.zeros((int(n_q), int(n_p))), p_max)

    @classmethod
    def tabulate(cls, func, n_q, n_p, p_max=3.0):
        """Evaluate ``func(Q, P)`` on the mesh (``func`` must broadcast)."""
        grid = cls.zeros(n_q, n_p, p_max)
        Q, P = grid.mesh()
        grid.values = np.asarray(func(Q, P), dtype=float) * np.ones_like(Q)
        return grid

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_q(self):
        return self.values.shape[0]

    @property
    def n_p(self):
        return self.values.shape[1]

    @property
    def dq(self):
        return 2.0 * np.pi / self.n_q

    @property
    def dp(self):
        return 2.0 * self.p_max / self.n_p

    @property
    def cell_area(self):
        return self.dq * self.dp

    def mesh(self):
        return np.meshgrid(self.q, self.p, indexing="ij")

    def integrate(self, integrand=None):
        """Riemann sum of ``values`` (or of a same-shape ``integrand``)."""
        data = self.values if integrand is None else integrand
        return float(np.sum(data) * self.cell_area)

    def mass(self):
        return self.integrate()

    def copy(self):
        return PhaseGrid(self.values.copy(), self.p_max)

    def with_values(self, values):
        return PhaseGrid(values, self.p_max)

    def boundary_max(self):
        """Largest ``|f|`` on the two outermost momentum rows."""
        return float(max(np.abs(self.values[:, 0]).max(), np.abs(self.values[:, -1]).max()))

    def recurrence_time(self):
        """Free-streaming recurrence time ``2 pi / dp`` of the lowest spatial mode."""
        return 2.0 * np.pi / self.dp
