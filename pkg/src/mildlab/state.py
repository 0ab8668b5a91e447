"""State tuples (n, c, v, u) and stored trajectories on geometric time grids."""

import numpy as np

from .spectral import SpectralField, VectorField, spectral_divergence_defect


class StateTuple:
    """The 4-tuple (cell density, oxygen, attractant, velocity) at one time.

    ``t = 0`` is used for initial data; trajectory states carry t > 0.
    The attractant component v is pinned to zero mean, the velocity u is
    solenoidal up to spectral round-off.
    """

    __slots__ = ("t", "n", "c", "v", "u")

    def __init__(self, t, n, c, v, u):
        self.t = float(t)
        self.n = n
        self.c = c
        self.v = v
        self.u = u

    @classmethod
    def zero(cls, grid, t=0.0):
        return cls(t, SpectralField.zero(grid), SpectralField.zero(grid),
                   SpectralField.zero(grid, pinned=True), VectorField.zero(grid))

    @property
    def grid(self):
        return self.n.grid

    def validate(self, div_tol=1e-10):
        problems = []
        dim = self.grid.dim
        if abs(self.v.coeffs[(0,) * dim]) != 0.0:
            problems.append("v zero mode is not pinned to 0")
        defect = spectral_divergence_defect(self.u)
        if defect > div_tol:
            problems.append(f"u divergence defect {defect:.2e} exceeds {div_tol:.0e}")
        return problems

    def __sub__(self, other):
        return StateTuple(self.t, self.n - other.n, self.c - other.c,
                          self.v - other.v, self.u - other.u)


class Trajectory:
    """States stored at every point of a geometric time grid.

    Coefficients are stacked per component for vectorized access:
    scalars as (T, *kshape), velocity as (T, dim, *kshape).  Between
    stored times the trajectory is interpolated linearly in log t on
    the spectral coefficients; outside the span it is clamped.
    """

    def __init__(self, grid, times, n, c, v, u):
        self.grid = grid
        self.times = np.asarray(times, dtype=float)
        if np.any(np.diff(self.times) <= 0) or np.any(self.times <= 0):
            raise ValueError("trajectory times must be positive and strictly increasing")
        self.n = n
        self.c = c
        self.v = v
        self.u = u
        self._log_times = np.log(self.times)

    @classmethod
    def from_states(cls, states):
        if not states:
            raise ValueError("empty trajectory")
        grid = states[0].grid
        times = [s.t for s in states]
        n = np.stack([s.n.coeffs for s in states])
        c = np.stack([s.c.coeffs for s in states])
        v = np.stack([s.v.coeffs for s in states])
        u = np.stack([np.stack([comp.coeffs for comp in s.u.components]) for s in states])
        return cls(grid, times, n, c, v, u)

    @classmethod
    def zero(cls, grid, times):
        t = len(times)
        ks = grid.kshape
        return cls(grid, times,
                   np.zeros((t,) + ks, dtype=complex),
                   np.zeros((t,) + ks, dtype=complex),
                   np.zeros((t,) + ks, dtype=complex),
                   np.zeros((t, grid.dim) + ks, dtype=complex))

    def __len__(self):
        return len(self.times)

    def state(self, k):
        g = self.grid
        return StateTuple(self.times[k],
                          SpectralField(g, self.n[k]),
                          SpectralField(g, self.c[k]),
                          SpectralField(g, self.v[k], pinned=True),
                          VectorField([SpectralField(g, self.u[k, ax]) for ax in range(g.dim)]))

    def states(self):
        return [self.state(k) for k in range(len(self))]

    def locate(self, t):
        """Interval index and log-space weight, clamped to the stored span."""
        if t <= self.times[0]:
            return 0, 0.0
        if t >= self.times[-1]:
            return len(self.times) - 2, 1.0
        j = int(np.searchsorted(self.times, t, side="right")) - 1
        theta = (np.log(t) - self._log_times[j]) / (self._log_times[j + 1] - self._log_times[j])
        return j, float(theta)

    def component_at(self, name, t):
        """Log-lerp of one stacked component array at time t."""
        arr = getattr(self, name)
        j, theta = self.locate(t)
        if theta == 0.0:
            return arr[j]
        if theta == 1.0:
            return arr[j + 1]
        return (1.0 - theta) * arr[j] + theta * arr[j + 1]

    def state_at(self, t):
        g = self.grid
        return StateTuple(t,
                          SpectralField(g, self.component_at("n", t)),
                          SpectralField(g, self.component_at("c", t)),
                          SpectralField(g, self.component_at("v", t), pinned=True),
                          VectorField([SpectralField(g, self.component_at("u", t)[ax])
                                       for ax in range(g.dim)]))

    def copy(self):
        return Trajectory(self.grid, self.times.copy(), self.n.copy(), self.c.copy(),
                          self.v.copy(), self.u.copy())

    def __sub__(self, other):
        if not np.array_equal(self.times, other.times):
            raise ValueError("trajectories live on different time grids")
        return Trajectory(self.grid, self.times, self.n - other.n, self.c - other.c,
                          self.v - other.v, self.u - other.u)
