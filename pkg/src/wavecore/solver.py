"""k-space pseudospectral solver for the acoustic initial value problem.

State is split per axis and lives on a staggered grid: particle velocity u_i
at half time steps and x-shifted positions, acoustic density rho_i at integer
steps, pressure p = c^2 * sum(rho_i) with unit ambient density. Each step is

    u_i   <- a_i * (a_i * u_i   - dt * D+_i p)
    rho_i <- b_i * (b_i * rho_i - dt * D-_i u_i)

where D+/- are spectral derivatives with half-cell shifts and the k-space
correction sinc(c_ref * |k| * dt / 2), and a_i, b_i are PML damping factors.
The image domain is embedded in a PML of ``pml_thickness`` voxels on every
face; the detection plane is the first image layer in x, so the x-low PML
sits behind it.

The adjoint is the literal transpose of this pipeline, step by step in
reverse, so the dot-product identity holds to rounding.
"""

import logging
from typing import List, Tuple

import numpy as np
import scipy.fft

from src.common import runtime
from src.common.errors import NumericalError
from src.common.models import Grid
from src.wavecore.pml import axis_view, pml_profile

logger = logging.getLogger(__name__)


class KSpaceSolver:
    """Forward, adjoint and time-reversal runs for one grid."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.pad = grid.pml_thickness
        self.shape = tuple(n + 2 * self.pad for n in grid.dims)
        self.dt = grid.dt
        self.nt = grid.nt
        self.c_ref = grid.c_max

        if grid.is_homogeneous:
            self._c2 = float(grid.sound_speed) ** 2
        else:
            self._c2 = np.pad(grid.sound_speed, self.pad, mode="edge") ** 2

        kvecs = [
            axis_view(2 * np.pi * scipy.fft.fftfreq(n, d=h), axis)
            for axis, (n, h) in enumerate(zip(self.shape, grid.spacing))
        ]
        kmag = np.sqrt(sum(k ** 2 for k in kvecs))
        # np.sinc(x) = sin(pi x) / (pi x)
        kappa = np.sinc(self.c_ref * kmag * self.dt / (2 * np.pi))
        self._grad_k = [
            1j * k * np.exp(1j * k * h / 2) * kappa for k, h in zip(kvecs, grid.spacing)
        ]
        self._div_k = [
            1j * k * np.exp(-1j * k * h / 2) * kappa for k, h in zip(kvecs, grid.spacing)
        ]
        self._grad_k_t = None
        self._div_k_t = None

        self._a = []
        self._b = []
        for axis, (n, h) in enumerate(zip(self.shape, grid.spacing)):
            self._a.append(axis_view(pml_profile(
                n, h, self.dt, self.c_ref, self.pad, grid.pml_alpha, staggered=True,
            ), axis))
            self._b.append(axis_view(pml_profile(
                n, h, self.dt, self.c_ref, self.pad, grid.pml_alpha, staggered=False,
            ), axis))

        ny, nz = grid.plane_dims
        self._plane = (self.pad, slice(self.pad, self.pad + ny), slice(self.pad, self.pad + nz))
        self._interior = tuple(slice(self.pad, self.pad + n) for n in grid.dims)
        if grid.is_homogeneous:
            self._c2_plane = self._c2
        else:
            self._c2_plane = self._c2[self._plane]

        logger.debug(
            "KSpaceSolver ready: dims=%s padded=%s nt=%d dt=%.4g c_ref=%.1f",
            grid.dims, self.shape, self.nt, self.dt, self.c_ref,
        )

    # spectral helpers

    def _fft(self, f: np.ndarray) -> np.ndarray:
        return scipy.fft.fftn(f, workers=runtime.fft_workers())

    def _ifft(self, f_k: np.ndarray) -> np.ndarray:
        return scipy.fft.ifftn(f_k, workers=runtime.fft_workers()).real

    def _transposed_kernels(self) -> Tuple[List[np.ndarray], List[np.ndarray]]:
        if self._grad_k_t is None:
            self._grad_k_t = [np.conj(k) for k in self._grad_k]
            self._div_k_t = [np.conj(k) for k in self._div_k]
        return self._grad_k_t, self._div_k_t

    def _embed(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self._interior] = x
        return out

    def _crop(self, x: np.ndarray) -> np.ndarray:
        return x[self._interior].copy()

    def _pressure(self, rho: List[np.ndarray]) -> np.ndarray:
        return self._c2 * (rho[0] + rho[1] + rho[2])

    def _initial_state(self, p0: np.ndarray):
        p_k = self._fft(p0)
        u = [0.5 * self.dt * self._ifft(k * p_k) for k in self._grad_k]
        rho = [p0 / (3 * self._c2) for _ in range(3)]
        return u, rho

    def _step(self, u: List[np.ndarray], rho: List[np.ndarray]) -> None:
        p_k = self._fft(self._pressure(rho))
        for i in range(3):
            u[i] = self._a[i] * (self._a[i] * u[i] - self.dt * self._ifft(self._grad_k[i] * p_k))
        for i in range(3):
            du = self._ifft(self._div_k[i] * self._fft(u[i]))
            rho[i] = self._b[i] * (self._b[i] * rho[i] - self.dt * du)

    def _step_transpose(self, mu_u: List[np.ndarray], mu_rho: List[np.ndarray]) -> None:
        grad_t, div_t = self._transposed_kernels()
        for i in range(3):
            w = self._b[i] * mu_rho[i]
            mu_u[i] = mu_u[i] - self.dt * self._ifft(div_t[i] * self._fft(w))
            mu_rho[i] = self._b[i] * w
        mu_p_k = 0
        for i in range(3):
            w = self._a[i] * mu_u[i]
            mu_p_k = mu_p_k + grad_t[i] * self._fft(w)
            mu_u[i] = self._a[i] * w
        mu_p = -self.dt * self._c2 * self._ifft(mu_p_k)
        for i in range(3):
            mu_rho[i] = mu_rho[i] + mu_p

    # public runs on bare arrays

    def forward_array(self, p0: np.ndarray) -> np.ndarray:
        """Pressure on the detection plane, shape (Ny, Nz, nt)."""
        u, rho = self._initial_state(self._embed(p0))
        record = np.empty(self.grid.plane_dims + (self.nt,))
        record[..., 0] = self._pressure(rho)[self._plane]
        for n in range(1, self.nt):
            self._step(u, rho)
            record[..., n] = self._pressure(rho)[self._plane]
        return _checked(record, "forward")

    def adjoint_array(self, y: np.ndarray) -> np.ndarray:
        """Exact transpose of forward_array."""
        mu_u = [np.zeros(self.shape) for _ in range(3)]
        mu_rho = [np.zeros(self.shape) for _ in range(3)]
        for n in range(self.nt - 1, 0, -1):
            self._inject_plane(mu_rho, y[..., n])
            self._step_transpose(mu_u, mu_rho)
        self._inject_plane(mu_rho, y[..., 0])

        grad_t, _ = self._transposed_kernels()
        mu_u_k = 0
        for i in range(3):
            mu_u_k = mu_u_k + grad_t[i] * self._fft(mu_u[i])
        x = (mu_rho[0] + mu_rho[1] + mu_rho[2]) / (3 * self._c2)
        x = x + 0.5 * self.dt * self._ifft(mu_u_k)
        return _checked(self._crop(x), "adjoint")

    def _inject_plane(self, mu_rho: List[np.ndarray], y_n: np.ndarray) -> None:
        g = self._c2_plane * y_n
        for i in range(3):
            mu_rho[i][self._plane] += g

    def time_reverse_array(self, y: np.ndarray) -> np.ndarray:
        """Run backwards with the reversed record imposed on the plane voxels."""
        u = [np.zeros(self.shape) for _ in range(3)]
        rho = [np.zeros(self.shape) for _ in range(3)]
        for m in range(self.nt):
            if m > 0:
                self._step(u, rho)
            share = y[..., self.nt - 1 - m] / (3 * self._c2_plane)
            for i in range(3):
                rho[i][self._plane] = share
        return _checked(self._crop(self._pressure(rho)), "time reversal")


def _checked(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{what} run produced non-finite values")
    return values
