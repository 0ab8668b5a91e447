"""Shared desk-scale scenarios for the solver and experiment tests."""

import numpy as np
import pytest

from mildlab.grids import Grid, TimeGrid
from mildlab.spectral import SpectralField, VectorField
from mildlab.fields import gaussian, solenoidal_gaussian, radial_homogeneous_force
from mildlab.state import StateTuple
from mildlab.admissibility import ExponentSet
from mildlab.duhamel import ForceField
from mildlab.solver import SolverConfig, smallness_check


def exponents_2d(gamma=0.0):
    return ExponentSet(N=2, gamma=gamma, p=4, q=3, r=4, p1=3, q1=9 / 4, r1=3, N1=2)


def exponents_3d(gamma=0.0):
    return ExponentSet(N=3, gamma=gamma, p=4, q=3, r=4, p1=8 / 3, q1=2, r1=8 / 3, N1=2)


def gaussian_data(grid, amplitude=1.0):
    """Offset Gaussian 4-tuple; the offsets keep the advection products of
    the azimuthal velocity from vanishing by symmetry."""
    n0 = gaussian(grid, a=1.0, amplitude=amplitude, center=(1.0, -0.5) + (0.0,) * (grid.dim - 2))
    c0 = gaussian(grid, a=1.5, amplitude=amplitude, center=(-0.7, 0.6) + (0.0,) * (grid.dim - 2))
    v0 = SpectralField(grid, gaussian(grid, a=1.2, amplitude=amplitude,
                                      center=(0.4, 0.8) + (0.0,) * (grid.dim - 2)).coeffs,
                       pinned=True)
    u0 = solenoidal_gaussian(grid, a=1.0, amplitude=amplitude, center=(-1.1, 0.2) + (0.0,) * (grid.dim - 2)) \
        + solenoidal_gaussian(grid, a=1.3, amplitude=0.6 * amplitude,
                              center=(0.9, 0.7) + (0.0,) * (grid.dim - 2))
    return StateTuple(0.0, n0, c0, v0, u0)


def scale_data(data, factor):
    return StateTuple(0.0, factor * data.n, factor * data.c,
                      SpectralField(data.grid, factor * data.v.coeffs, pinned=True),
                      factor * data.u)


@pytest.fixture(scope="session")
def small_solve_2d():
    """A converged small-data 2D solve shared across tests: config, data,
    constants table, trajectory and trace."""
    from mildlab.solver import picard_solve

    grid = Grid(2, 96, 16.0)
    exps = exponents_2d()
    tg = TimeGrid.spanning(grid.spacing ** 2, grid.box_half_width ** 2, 36)
    force = ForceField(radial_homogeneous_force(grid, amplitude=0.02, sigma_cells=2.0), exps.N1)
    config = SolverConfig(exps=exps, grid=grid, time_grid=tg, gamma=0.0,
                          quad_nodes=32, max_iters=50, tol=1e-8, force=force)
    probe = gaussian_data(grid, amplitude=1.0)
    table = smallness_check(probe, config)
    data = scale_data(probe, 0.5 * table.delta / table.data_norm)
    table = smallness_check(data, config)
    assert table.small_enough
    traj, trace = picard_solve(data, config, constants=table)
    return {"grid": grid, "exps": exps, "config": config, "data": data,
            "table": table, "traj": traj, "trace": trace}
