"""The composite measurement operator C A and its Lipschitz constant."""

import logging
import math
from typing import Optional

import numpy as np

from src.common.errors import ValidationError
from src.common.lookup import LipschitzTable, default_table
from src.common.models import Grid, SensingPattern
from src.common.provenance import operator_key
from src.optim.power import DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL, power_iteration
from src.sensing.operators import adjoint_plane, apply_plane
from src.sensing.patterns import require_valid
from src.wavecore.operators import get_solver

logger = logging.getLogger(__name__)


class MeasurementOperator:
    """x -> C A x on bare arrays, with the exact transpose."""

    def __init__(self, grid: Grid, pattern: SensingPattern):
        require_valid(pattern)
        if pattern.plane_dims != grid.plane_dims:
            raise ValidationError(
                f"pattern plane {pattern.plane_dims} does not match grid plane {grid.plane_dims}"
            )
        self.grid = grid
        self.pattern = pattern
        self.solver = get_solver(grid)

    @property
    def image_shape(self):
        return self.grid.dims

    @property
    def data_shape(self):
        return self.pattern.m_c, self.grid.nt

    def forward(self, x: np.ndarray) -> np.ndarray:
        return apply_plane(self.pattern, self.solver.forward_array(x))

    def adjoint(self, f: np.ndarray) -> np.ndarray:
        return self.solver.adjoint_array(adjoint_plane(self.pattern, f))

    def normal(self, x: np.ndarray) -> np.ndarray:
        return self.adjoint(self.forward(x))

    def discrepancy(self, residual_norm: float, sigma: float) -> float:
        """Residual norm relative to the expected noise norm sqrt(M_c M_t) sigma."""
        m_c, nt = self.data_shape
        return residual_norm / (math.sqrt(m_c * nt) * sigma)

    def lipschitz(
        self,
        table: Optional[LipschitzTable] = None,
        n_iters: int = DEFAULT_POWER_ITERS,
        tol: float = DEFAULT_POWER_TOL,
    ) -> float:
        return lipschitz_constant(self.grid, self.pattern, table, n_iters, tol, operator=self)


def lipschitz_constant(
    grid: Grid,
    pattern: SensingPattern,
    table: Optional[LipschitzTable] = None,
    n_iters: int = DEFAULT_POWER_ITERS,
    tol: float = DEFAULT_POWER_TOL,
    operator: Optional[MeasurementOperator] = None,
) -> float:
    """Largest eigenvalue of A^T C^T C A, served from the lookup table."""
    table = table or default_table()
    op = operator or MeasurementOperator(grid, pattern)
    key = operator_key(grid, pattern)
    return table.get_or_compute(
        key, lambda: power_iteration(op.normal, grid.dims, n_iters=n_iters, tol=tol),
    )
