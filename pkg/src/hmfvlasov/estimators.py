"""scikit-learn style wrappers around the simulator, the functional and the norms.

Nothing here is learned from data. ``fit`` runs the computation and stores
its result in trailing-underscore attributes, which lets the pieces be
configured through ``get_params``/``set_params`` and cloned like any other
estimator.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_grid
from .exceptions import DomainError
from .grid import PhaseGrid
from .norms import NormSpec, norm
from .stability import StationarySpec, stability_functional
from .vlasov import SimConfig, run


def _as_specs(X):
    specs = [X] if isinstance(X, StationarySpec) else list(X)
    for s in specs:
        if not isinstance(s, StationarySpec):
            raise DomainError(f"expected StationarySpec, got {type(s).__name__}")
    return specs


def _as_grids(X):
    grids = [X] if isinstance(X, PhaseGrid) else list(X)
    for g in grids:
        check_grid(g)
    return grids


class VlasovSimulator(BaseEstimator):
    """Runs the split-step solver on a :class:`PhaseGrid`.

    After ``fit``: ``series_`` (the :class:`TimeSeries`) and ``grid_`` (the
    final state). ``predict`` returns the final magnetization of each input.
    """

    def __init__(self, dt=0.05, t_end=100.0, diag_stride=20, interpolation="cubic",
                 force=True, max_mass_drift=1e-2):
        self.dt = dt
        self.t_end = t_end
        self.diag_stride = diag_stride
        self.interpolation = interpolation
        self.force = force
        self.max_mass_drift = max_mass_drift

    def _config(self):
        return SimConfig(dt=self.dt, t_end=self.t_end, diag_stride=self.diag_stride,
                         interpolation=self.interpolation, force=self.force,
                         max_mass_drift=self.max_mass_drift)

    def fit(self, X, y=None):
        check_grid(X)
        self.series_ = run(X, self._config())
        self.grid_ = self.series_.final_grid
        return self

    def transform(self, X):
        """Evolved grids, one per input grid."""
        cfg = self._config()
        return [run(g, cfg).final_grid for g in _as_grids(X)]

    def predict(self, X):
        cfg = self._config()
        return np.array([run(g, cfg).M_final for g in _as_grids(X)])


class StabilityEstimator(BaseEstimator):
    """Evaluates the functional on stationary states.

    ``decision_function`` returns ``I``; ``predict`` the verdict labels.
    """

    def __init__(self, tol=1e-10):
        self.tol = tol

    def fit(self, X, y=None):
        self.reports_ = [stability_functional(s, tol=self.tol) for s in _as_specs(X)]
        return self

    def decision_function(self, X):
        return np.array([stability_functional(s, tol=self.tol).I for s in _as_specs(X)])

    def predict(self, X):
        return np.array([stability_functional(s, tol=self.tol).verdict.value
                         for s in _as_specs(X)])

    def fit_predict(self, X, y=None):
        self.fit(X)
        return np.array([r.verdict.value for r in self.reports_])


class NormTransformer(TransformerMixin, BaseEstimator):
    """Maps grids to a column of norms of the configured family."""

    def __init__(self, family="Lp", p=2.0, s=0.0):
        self.family = family
        self.p = p
        self.s = s

    def fit(self, X=None, y=None):
        self.spec_ = NormSpec(self.family, self.p, self.s)
        return self

    def transform(self, X):
        check_is_fitted(self, "spec_")
        return np.array([[norm(g, self.spec_)] for g in _as_grids(X)])
