import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from hmfvlasov import (
    NormTransformer,
    PhaseGrid,
    StabilityEstimator,
    StateKind,
    StationarySpec,
    VlasovSimulator,
)
from hmfvlasov.exceptions import DomainError
from hmfvlasov.norms import lp_norm, w1p_norm
from hmfvlasov.vlasov import magnetization


def gaussian_grid(n=32, p_max=3.0):
    return PhaseGrid.tabulate(lambda q, p: np.exp(-p * p / 1.2) * (1 + 0.01 * np.cos(q)), n, 2 * n, p_max)


def test_params_survive_clone():
    sim = VlasovSimulator(dt=0.1, t_end=3.0, interpolation="linear")
    twin = clone(sim)
    assert twin.get_params() == sim.get_params()
    assert twin is not sim
    sim.set_params(dt=0.2)
    assert sim.dt == 0.2 and twin.dt == 0.1


def test_simulator_fit_predict_transform():
    grid = gaussian_grid()
    sim = VlasovSimulator(dt=0.1, t_end=1.0, diag_stride=5).fit(grid)
    assert sim.series_.t[-1] == pytest.approx(1.0)
    assert sim.grid_.values.shape == grid.values.shape
    pred = sim.predict([grid, grid])
    assert pred.shape == (2,) and pred[0] == pred[1] == pytest.approx(sim.series_.M_final)
    (final,) = sim.transform(grid)
    assert magnetization(final)[0] == pytest.approx(pred[0], rel=1e-12)


def test_simulator_rejects_non_grids():
    with pytest.raises(TypeError):
        VlasovSimulator().fit(np.ones((4, 4)))


def test_stability_estimator():
    specs = [StationarySpec(StateKind.THERMAL_HOMOGENEOUS, T) for T in (0.6, 0.5, 0.45)]
    est = StabilityEstimator()
    labels = est.fit_predict(specs)
    assert list(labels) == ["Stable", "Marginal", "Unstable"]
    I = est.decision_function(specs)
    assert I[0] == pytest.approx(1 / 6, abs=1e-12)
    assert I[2] == pytest.approx(1 - 0.5 / 0.45, abs=1e-12)
    assert len(est.reports_) == 3
    assert list(est.predict(specs[0])) == ["Stable"]


def test_stability_estimator_rejects_other_inputs():
    with pytest.raises(DomainError):
        StabilityEstimator().fit([0.6])


def test_norm_transformer():
    grids = [gaussian_grid(16), gaussian_grid(32)]
    with pytest.raises(NotFittedError):
        NormTransformer().transform(grids)
    col = NormTransformer(family="Lp", p=2).fit_transform(grids)
    assert col.shape == (2, 1)
    assert col[1, 0] == pytest.approx(lp_norm(grids[1], 2))
    w = NormTransformer(family="W1p", p=3).fit(None).transform(grids[0])
    assert w[0, 0] == pytest.approx(w1p_norm(grids[0], 3))


def test_norm_transformer_validates_at_fit():
    with pytest.raises(DomainError):
        NormTransformer(family="Hs", p=3).fit()
    with pytest.raises(ValueError):
        NormTransformer(family="Sobolev").fit()
    assert math.isfinite(NormTransformer(family="Hs", s=1).fit().transform(gaussian_grid(16, 8.0))[0, 0])
