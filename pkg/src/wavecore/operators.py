"""Field-level wave operators: forward A, adjoint A^T and time reversal."""

import logging
import threading
from collections import OrderedDict

from src.common.errors import raise_on_errors
from src.common.models import Field, Grid, PlaneSeries
from src.common.provenance import grid_key
from src.wavecore.grid import check_conforms, validate_grid
from src.wavecore.solver import KSpaceSolver

logger = logging.getLogger(__name__)

MAX_CACHED_SOLVERS = 4

_solvers: "OrderedDict[str, KSpaceSolver]" = OrderedDict()
_solvers_lock = threading.Lock()


def get_solver(grid: Grid) -> KSpaceSolver:
    """Validated solver for a grid, reused across calls with the same grid."""
    raise_on_errors(validate_grid(grid))
    key = grid_key(grid)
    with _solvers_lock:
        solver = _solvers.get(key)
        if solver is not None:
            _solvers.move_to_end(key)
            return solver
    solver = KSpaceSolver(grid)
    with _solvers_lock:
        _solvers[key] = solver
        while len(_solvers) > MAX_CACHED_SOLVERS:
            _solvers.popitem(last=False)
    return solver


def forward(p0: Field, grid: Grid) -> PlaneSeries:
    solver = get_solver(grid)
    check_conforms(p0.values, grid.dims, "initial pressure")
    record = solver.forward_array(p0.values)
    return PlaneSeries(values=record, dt=grid.dt, provenance={"operator": "forward"})


def adjoint(series: PlaneSeries, grid: Grid) -> Field:
    solver = get_solver(grid)
    check_conforms(series.values, grid.plane_dims + (grid.nt,), "plane series")
    values = solver.adjoint_array(series.values)
    return Field(values=values, spacing=grid.spacing, provenance={"operator": "adjoint"})


def time_reverse(series: PlaneSeries, grid: Grid) -> Field:
    solver = get_solver(grid)
    check_conforms(series.values, grid.plane_dims + (grid.nt,), "plane series")
    values = solver.time_reverse_array(series.values)
    return Field(values=values, spacing=grid.spacing, provenance={"operator": "time_reverse"})
