"""Semi-Lagrangian integration of the HMF Vlasov equation.

One step is a Strang splitting: half drift in ``q`` (``q -> q + p dt/2``),
refresh of the mean field ``M e^{i phi}`` from the intermediate density,
full kick in ``p`` (``p -> p - M sin(q - phi) dt``), and a second half
drift. Shifts are interpolated with cubic splines (periodic in ``q``,
natural with zero inflow in ``p``). After each step negative overshoots are
clipped to zero and the density is rescaled to its initial mass; the
pre-rescaling mass change is accumulated in ``TimeSeries.mass_drift``.
"""

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._interp import CUBIC, LINEAR, NaturalSplineShifter, apply_periodic_multiplier, periodic_shift_multiplier
from ._validation import check_grid
from .exceptions import CFLWarning, ConservationError, DomainError
from .grid import PhaseGrid

CSV_COLUMNS = ("t", "M", "phase", "mass", "l2", "energy")
INTERPOLATIONS = {"cubic": CUBIC, "cubicspline": CUBIC, "linear": LINEAR}


@dataclass
class SimConfig:
    dt: float = 0.05
    t_end: float = 100.0
    diag_stride: int = 20
    interpolation: str = "cubic"
    force: bool = True
    max_mass_drift: float = 1e-2
    cfl_factor: float = 10.0

    def __post_init__(self):
        key = str(self.interpolation).replace("_", "").lower()
        if key not in INTERPOLATIONS:
            raise DomainError(f"interpolation must be 'cubic' or 'linear', got {self.interpolation!r}")
        self.interpolation = INTERPOLATIONS[key]
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if not self.t_end >= 0:
            raise DomainError(f"t_end must be >= 0, got {self.t_end}")
        if int(self.diag_stride) < 1:
            raise DomainError("diag_stride must be a positive integer")
        self.diag_stride = int(self.diag_stride)

    @property
    def n_steps(self):
        n = self.t_end / self.dt
        steps = int(round(n))
        if abs(n - steps) > 1e-9 * max(1.0, n):
            raise DomainError(f"t_end={self.t_end} is not a multiple of dt={self.dt}")
        return steps


@dataclass
class TimeSeries:
    t: np.ndarray
    M: np.ndarray
    phase: np.ndarray
    mass: np.ndarray
    l2: np.ndarray
    energy: np.ndarray
    mass_drift: np.ndarray = None
    final_grid: PhaseGrid = field(default=None, repr=False)

    def __post_init__(self):
        for name in CSV_COLUMNS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.mass_drift is None:
            self.mass_drift = np.zeros_like(self.t)
        lengths = {len(getattr(self, name)) for name in CSV_COLUMNS}
        if len(lengths) != 1:
            raise ValueError("time-series columns differ in length")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    @property
    def M_final(self):
        return float(self.M[-1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            cols = [getattr(self, name) for name in CSV_COLUMNS]
            for row in zip(*cols):
                writer.writerow([f"{v:.16g}" for v in row])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if tuple(header) != CSV_COLUMNS:
                raise ValueError(f"unexpected header {header}")
            rows = np.array([[float(v) for v in row] for row in reader]).reshape(-1, len(CSV_COLUMNS))
        return cls(*rows.T)


def magnetization(grid):
    """Return ``(M, phi)`` with ``M e^{i phi} = iint f e^{iq} dq dp``."""
    check_grid(grid)
    z = _complex_moment(grid.values, grid)
    return abs(z), math.atan2(z.imag, z.real)


def _complex_moment(values, grid):
    marginal = values.sum(axis=1) * grid.cell_area
    return complex(np.dot(marginal, np.exp(1j * grid.q)))


def diagnostics(grid, M=None):
    """``(M, phase, mass, l2, energy)`` of a grid; energy is ``<p^2/2> - M^2/2``."""
    z = _complex_moment(grid.values, grid)
    mass = grid.mass()
    l2 = math.sqrt(grid.integrate(grid.values ** 2))
    kinetic = float(np.dot(grid.values.sum(axis=0), 0.5 * grid.p ** 2) * grid.cell_area)
    m = abs(z)
    return m, math.atan2(z.imag, z.real), mass, l2, kinetic - 0.5 * m * m


class SplitStepper:
    """Pre-computed operators for repeated Strang steps on one grid shape."""

    def __init__(self, grid, dt, interpolation=CUBIC, force=True, cfl_factor=10.0):
        check_grid(grid)
        self.n_q, self.n_p = grid.shape
        self.dt = float(dt)
        self.force = force
        self._grid = grid.with_values(np.zeros(grid.shape))
        cells = grid.p * (0.5 * self.dt) / grid.dq
        if np.max(np.abs(cells)) > cfl_factor:
            warnings.warn(
                f"half drift moves up to {np.max(np.abs(cells)):.1f} cells in q per step",
                CFLWarning, stacklevel=3,
            )
        self._drift = periodic_shift_multiplier(self.n_q, cells, interpolation)
        self._kick = NaturalSplineShifter(self.n_p, interpolation)
        self._sin_dt = None
        self.last_field = (0.0, 0.0)

    def advect(self, values):
        """One step without clipping or renormalisation."""
        half = apply_periodic_multiplier(values, self._drift)
        if self.force:
            z = _complex_moment(half, self._grid)
            m, phi = abs(z), math.atan2(z.imag, z.real)
            self.last_field = (m, phi)
            shift = -m * np.sin(self._grid.q - phi) * self.dt / self._grid.dp
            half = self._kick.shift(half, shift)
        return apply_periodic_multiplier(half, self._drift)

    def step(self, values, target_mass):
        new = self.advect(values)
        np.maximum(new, 0.0, out=new)
        raw = new.sum() * self._grid.cell_area
        if raw > 0:
            new *= target_mass / raw
        return new, raw


def step(grid, dt, config=None):
    """Advance ``grid`` by one Strang step of size ``dt`` (negative ``dt`` runs backwards)."""
    config = config or SimConfig(dt=abs(dt) or 1.0)
    stepper = SplitStepper(grid, dt, config.interpolation, config.force, config.cfl_factor)
    values, _ = stepper.step(grid.values, grid.mass())
    return grid.with_values(values)


def run(initial, config, *, stepper=None, callback=None):
    """Integrate ``initial`` to ``config.t_end`` and return the diagnostics.

    Diagnostics are recorded every ``diag_stride`` steps and at the final
    step. Raises :class:`ConservationError` once the cumulative mass change
    before renormalisation exceeds ``config.max_mass_drift``.
    """
    check_grid(initial)
    n_steps = config.n_steps
    stepper = stepper or SplitStepper(initial, config.dt, config.interpolation,
                                      config.force, config.cfl_factor)
    values = initial.values.copy()
    target = initial.mass()
    if not target > 0:
        raise DomainError("initial grid must have positive mass")
    rows, drift = [], 1.0
    probe = initial.with_values(values)

    def record(n):
        probe.values = values
        rows.append((n * config.dt, *diagnostics(probe), drift - 1.0))

    record(0)
    for n in range(1, n_steps + 1):
        values, raw = stepper.step(values, target)
        drift *= raw / target
        if abs(drift - 1.0) > config.max_mass_drift:
            raise ConservationError(
                f"mass drift {drift - 1.0:.3e} at t={n * config.dt:g} exceeds {config.max_mass_drift:g}"
            )
        if n % config.diag_stride == 0 or n == n_steps:
            record(n)
            if callback is not None:
                callback(n * config.dt, values)
    data = np.array(rows)
    return TimeSeries(*data[:, :6].T, mass_drift=data[:, 6],
                      final_grid=initial.with_values(values))
