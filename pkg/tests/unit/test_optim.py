"""Unit tests for src/optim: proximal maps, TV, power iteration and FISTA."""

import math

import numpy as np
import pytest
from scipy.optimize import nnls

from src.common.errors import ValidationError
from src.common.models import Field
from src.optim.fista import ZERO_REGULARIZER, LeastSquaresTerm, ProxTerm, fista
from src.optim.models import (
    BACKTRACK,
    DIRICHLET_ALL,
    DIRICHLET_DETECTION_PLANE,
    MOMENTUM_RESET,
    NEUMANN_ALL,
    RESTART,
    FistaConfig,
    IterationLog,
    IterationRecord,
    TvConfig,
    validate_fista_config,
    validate_tv_config,
)
from src.optim.power import power_iteration
from src.optim.prox import l2_energy, prox_l2_nonneg
from src.optim.tv import tv_denoise, tv_divergence, tv_energy, tv_gradient


def _tv_loop(p, boundary):
    """Isotropic TV by explicit loops over the padded volume."""
    pad = {
        NEUMANN_ALL: [(0, 0)] * 3,
        DIRICHLET_ALL: [(1, 1)] * 3,
        DIRICHLET_DETECTION_PLANE: [(1, 0), (0, 0), (0, 0)],
    }[boundary]
    q = np.pad(p, pad)
    total = 0.0
    nx, ny, nz = q.shape
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                dx = q[i + 1, j, k] - q[i, j, k] if i + 1 < nx else 0.0
                dy = q[i, j + 1, k] - q[i, j, k] if j + 1 < ny else 0.0
                dz = q[i, j, k + 1] - q[i, j, k] if k + 1 < nz else 0.0
                total += math.sqrt(dx * dx + dy * dy + dz * dz)
    return total


class TestProx:
    def test_closed_form(self):
        np.testing.assert_allclose(prox_l2_nonneg(np.array([-1.0, 0.0, 3.0]), 0.5), [0.0, 0.0, 2.0])

    def test_matches_brute_force(self):
        grid = np.linspace(0.0, 5.0, 500_001)
        for q in (-2.0, 0.3, 4.0):
            for alpha in (0.1, 1.0, 3.0):
                objective = 0.5 * grid ** 2 + (grid - q) ** 2 / (2 * alpha)
                best = grid[np.argmin(objective)]
                assert abs(prox_l2_nonneg(np.array([q]), alpha)[0] - best) <= 1e-5

    def test_field_in_field_out(self):
        out = prox_l2_nonneg(Field(values=np.full((2, 2, 2), 2.0), spacing=(1.0, 1.0, 1.0)), 1.0)
        assert isinstance(out, Field)
        np.testing.assert_allclose(out.values, 1.0)

    def test_zero_alpha_projects(self):
        np.testing.assert_array_equal(prox_l2_nonneg(np.array([-1.0, 2.0]), 0.0), [0.0, 2.0])

    def test_negative_alpha(self):
        with pytest.raises(ValueError):
            prox_l2_nonneg(np.zeros(2), -1.0)

    def test_energy(self):
        assert l2_energy(np.array([3.0, 4.0])) == 12.5


class TestTv:
    @pytest.mark.parametrize("boundary", [NEUMANN_ALL, DIRICHLET_ALL, DIRICHLET_DETECTION_PLANE])
    def test_divergence_is_negative_transpose(self, boundary):
        rng = np.random.default_rng(0)
        p = rng.standard_normal((5, 4, 6))
        g = rng.standard_normal(tv_gradient(p, boundary).shape)
        lhs = np.vdot(tv_gradient(p, boundary), g)
        rhs = -np.vdot(p, tv_divergence(g, boundary))
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))

    @pytest.mark.parametrize("boundary", [NEUMANN_ALL, DIRICHLET_ALL, DIRICHLET_DETECTION_PLANE])
    def test_energy_matches_loop(self, boundary):
        p = np.random.default_rng(1).random((4, 5, 3))
        assert math.isclose(tv_energy(p, TvConfig(boundary=boundary)), _tv_loop(p, boundary), rel_tol=1e-12)

    def test_constant_has_zero_neumann_energy(self):
        assert tv_energy(np.ones((4, 4, 4)), TvConfig(boundary=NEUMANN_ALL)) == 0.0
        assert tv_energy(np.ones((4, 4, 4)), TvConfig(boundary=DIRICHLET_ALL)) > 0.0

    def test_step_edge_energy(self):
        p = np.zeros((4, 3, 2))
        p[2:] = 1.0
        # one jump of height 1 per (y, z) column
        assert tv_energy(p, TvConfig(boundary=NEUMANN_ALL)) == 6.0

    def test_denoise_zero_lambda_projects(self):
        p = np.array([[[-1.0, 2.0]]])
        np.testing.assert_array_equal(tv_denoise(p, 0.0, TvConfig(nonneg=True)), [[[0.0, 2.0]]])

    def test_denoise_keeps_constant_under_neumann(self):
        p = np.full((6, 6, 6), 0.4)
        out = tv_denoise(p, 0.5, TvConfig(boundary=NEUMANN_ALL))
        np.testing.assert_allclose(out, 0.4, atol=1e-6)

    def test_denoise_decreases_objective_and_matches_long_run(self):
        rng = np.random.default_rng(2)
        p = np.zeros((8, 8, 8))
        p[2:6, 2:6, 2:6] = 1.0
        noisy = p + 0.2 * rng.standard_normal(p.shape)
        lam = 0.15
        cfg = TvConfig(boundary=DIRICHLET_ALL, nonneg=True, pdhg_iters=1000, pdhg_tol=1e-7)
        reference = tv_denoise(noisy, lam, TvConfig(boundary=DIRICHLET_ALL, nonneg=True, pdhg_iters=20000, pdhg_tol=1e-12))
        out = tv_denoise(noisy, lam, cfg)

        def objective(x):
            return 0.5 * np.sum((x - noisy) ** 2) + lam * tv_energy(x, cfg)

        assert out.min() >= 0.0
        assert objective(out) <= objective(np.maximum(noisy, 0.0))
        assert objective(out) <= objective(reference) * (1 + 1e-3)
        assert np.linalg.norm(out - reference) <= 5e-2 * np.linalg.norm(reference)

    def test_denoise_field_round_trip(self):
        field = Field(values=np.ones((4, 4, 4)), spacing=(2.0, 2.0, 2.0), provenance={"a": 1})
        out = tv_denoise(field, 0.1, TvConfig())
        assert isinstance(out, Field)
        assert out.spacing == (2.0, 2.0, 2.0)
        assert out.provenance == {"a": 1}

    def test_rejects_bad_config(self):
        with pytest.raises(ValidationError):
            tv_denoise(np.zeros((2, 2, 2)), 1.0, TvConfig(boundary="periodic"))
        with pytest.raises(ValueError):
            tv_denoise(np.zeros((2, 2, 2)), -1.0)


class TestConfigs:
    def test_validate_tv(self):
        assert validate_tv_config(TvConfig()) == []
        assert "pdhg_iters" in validate_tv_config(TvConfig(pdhg_iters=0))[0]

    def test_validate_fista(self):
        assert validate_fista_config(FistaConfig()) == []
        assert "step_scale" in validate_fista_config(FistaConfig(step_scale=2.0))[0]
        assert "max_iters" in validate_fista_config(FistaConfig(max_iters=0))[0]
        assert "momentum_step_scale" in validate_fista_config(FistaConfig(momentum_step_scale=1.5))[0]

    def test_round_trip(self):
        cfg = FistaConfig(max_iters=7, restart=False)
        assert FistaConfig.from_dict({**cfg.to_dict(), "extra": 1}) == cfg
        assert TvConfig.from_dict(TvConfig(boundary=DIRICHLET_ALL).to_dict()).boundary == DIRICHLET_ALL


class TestIterationLog:
    def test_csv_and_counts(self):
        log = IterationLog()
        log.append(IterationRecord(0, 2.0, 1.5, 2.0, [], 1.3))
        log.append(IterationRecord(1, 1.0, 0.5, 1.0, [RESTART, BACKTRACK, BACKTRACK]))
        assert len(log) == 2
        assert log.best_objectives == [2.0, 1.0]
        assert log.event_count(BACKTRACK) == 2
        lines = log.to_csv().splitlines()
        assert lines[0] == "iter,objective,data_discrepancy,step_events"
        assert lines[1] == "0,2.0,1.3,"
        assert lines[2] == "1,1.0,,restart|backtrack|backtrack"
        assert log.to_dicts()[1]["events"] == [RESTART, BACKTRACK, BACKTRACK]


class TestPowerIteration:
    def test_diagonal(self):
        d = np.array([4.0, 1.0, 1.0])
        assert abs(power_iteration(lambda x: d * x, (3,), n_iters=200, tol=1e-12) - 4.0) <= 1e-6

    def test_matrix(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((20, 10))
        m = a.T @ a
        expected = np.linalg.eigvalsh(m).max()
        estimate = power_iteration(lambda x: m @ x, (10,), n_iters=500, tol=1e-12)
        assert abs(estimate - expected) <= 1e-6 * expected

    def test_zero_operator(self):
        assert power_iteration(lambda x: np.zeros_like(x), (4,)) == 0.0

    def test_defaults_resolve_close_top_eigenvalues(self):
        rng = np.random.default_rng(4)
        q, _ = np.linalg.qr(rng.standard_normal((40, 40)))
        m = q @ np.diag(np.linspace(1.0, 0.5, 40)) @ q.T
        estimate = power_iteration(lambda x: m @ x, (40,))
        assert estimate <= 1.0 + 1e-12
        assert 1.0 - estimate <= 1e-3


def _make_least_squares(seed=0, shape=(30, 8)):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(shape)
    b = rng.standard_normal(shape[0])
    term = LeastSquaresTerm(op=lambda x: a @ x, adjoint=lambda r: a.T @ r, data=b)
    return a, b, term, float(np.linalg.norm(a, 2) ** 2)


class TestFista:
    def test_unregularized_least_squares(self):
        a, b, term, lip = _make_least_squares()
        cfg = FistaConfig(max_iters=2000, step_scale=1.0, stall_window=50)
        result = fista(term, ZERO_REGULARIZER, lip, cfg, shape=(8,))
        expected = np.linalg.lstsq(a, b, rcond=None)[0]
        np.testing.assert_allclose(result.x, expected, atol=1e-6)
        np.testing.assert_allclose(result.ax, a @ result.x, atol=1e-10)

    def test_nonneg_tikhonov_matches_nnls(self):
        a, b, term, lip = _make_least_squares(seed=1)
        lam = 0.7
        reg = ProxTerm(
            prox=lambda v, step: prox_l2_nonneg(v, step * lam),
            energy=lambda x: lam * l2_energy(x),
        )
        cfg = FistaConfig(max_iters=3000, step_scale=1.0, stall_window=50)
        result = fista(term, reg, lip, cfg, shape=(8,))
        augmented = np.vstack([a, math.sqrt(lam) * np.eye(8)])
        expected, _ = nnls(augmented, np.concatenate([b, np.zeros(8)]))
        np.testing.assert_allclose(result.x, expected, atol=1e-6)
        assert result.x.min() >= 0.0

    def test_best_objective_never_increases(self):
        _, _, term, lip = _make_least_squares(seed=2)
        result = fista(term, ZERO_REGULARIZER, lip, FistaConfig(max_iters=60), shape=(8,))
        best = result.log.best_objectives
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
        assert result.objective == min(r.objective for r in result.log.records)

    def test_backtracking_after_overshoot(self):
        term = LeastSquaresTerm(op=lambda x: x, adjoint=lambda r: r, data=np.array([1.0]))
        cfg = FistaConfig(max_iters=1, step_scale=1.0)
        result = fista(term, ZERO_REGULARIZER, 0.25, cfg, shape=(1,))
        assert result.log.records[1].events == [RESTART, BACKTRACK]
        np.testing.assert_allclose(result.log.records[1].objective, 0.5)

    def test_underestimated_lipschitz_restarts(self):
        _, _, term, lip = _make_least_squares(seed=3)
        cfg = FistaConfig(max_iters=200, step_scale=1.0, stall_window=200)
        result = fista(term, ZERO_REGULARIZER, lip / 2.5, cfg, shape=(8,))
        assert result.log.event_count(RESTART) >= 1
        best = result.log.best_objectives
        assert best[-1] < best[0]

    def test_momentum_reset_on_ill_conditioned_quadratic(self):
        d = np.logspace(0.0, -1.0, 40)
        b = d * np.ones(40)
        term = LeastSquaresTerm(op=lambda x: d * x, adjoint=lambda r: d * r, data=b)
        cfg = FistaConfig(max_iters=200, stall_window=200)
        result = fista(term, ZERO_REGULARIZER, 1.0, cfg, shape=(40,))
        assert result.log.event_count(MOMENTUM_RESET) >= 1
        assert np.linalg.norm(result.ax - b) <= 1e-4 * np.linalg.norm(b)

    def test_lasso_matches_long_run(self):
        rng = np.random.default_rng(5)
        a = rng.standard_normal((20, 30))
        b = rng.standard_normal(20)
        lam = 0.1 * float(np.max(np.abs(a.T @ b)))
        term = LeastSquaresTerm(op=lambda x: a @ x, adjoint=lambda r: a.T @ r, data=b)
        l1 = ProxTerm(
            prox=lambda v, step: np.sign(v) * np.maximum(np.abs(v) - step * lam, 0.0),
            energy=lambda x: lam * float(np.abs(x).sum()),
        )
        lip = float(np.linalg.norm(a, 2) ** 2)
        short = fista(term, l1, lip, FistaConfig(max_iters=500, stall_window=50), shape=(30,))
        reference = fista(term, l1, lip, FistaConfig(max_iters=5000, stall_window=500), shape=(30,))
        assert reference.objective <= short.objective
        assert short.objective - reference.objective <= 1e-5 * reference.objective

    def test_no_restart_when_disabled(self):
        _, _, term, lip = _make_least_squares(seed=3)
        cfg = FistaConfig(max_iters=50, step_scale=1.99, restart=False, stall_window=200)
        result = fista(term, ZERO_REGULARIZER, lip, cfg, shape=(8,))
        assert result.log.event_count(RESTART) == 0

    def test_discrepancy_logged(self):
        _, _, term, lip = _make_least_squares()
        result = fista(term, ZERO_REGULARIZER, lip, FistaConfig(max_iters=3), shape=(8,), discrepancy=lambda rn: 2 * rn)
        first = result.log.records[0]
        assert math.isclose(first.discrepancy, 2 * math.sqrt(2 * first.data_term))

    def test_stop_reasons(self):
        _, _, term, lip = _make_least_squares()
        result = fista(term, ZERO_REGULARIZER, lip, FistaConfig(max_iters=2, stall_window=50), shape=(8,))
        assert result.log.stop_reason == "max_iters"
        assert len(result.log) == 3

    def test_needs_start(self):
        _, _, term, lip = _make_least_squares()
        with pytest.raises(ValueError):
            fista(term, ZERO_REGULARIZER, lip)
        with pytest.raises(ValueError):
            fista(term, ZERO_REGULARIZER, 0.0, shape=(8,))
