"""The fixed-point engine: caloric extension of the data, the full
integral map on stored trajectories, Picard iteration with a contraction
trace, and the constant bookkeeping behind the smallness threshold.

The map evaluates its nine integral terms by the matched singular rules;
integrand spectra are formed once per stored time (with every
lag-independent factor applied) and interpolated linearly in log t at the
quadrature nodes, clamped below the first stored time.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grids import Grid, TimeGrid
from .state import StateTuple, Trajectory
from .spectral import SpectralField, VectorField, heat_apply, damped_heat_apply, \
    leray_project, spectral_divergence_defect
from .norms import MorreyIndex, x_space_norms, data_norm_I, smoothing_constant
from .duhamel import (QuadratureRule, rule_exponents, bilinear_constant_bound,
                      linear_constant_bound, ConstantsTable, ForceField,
                      integrand_spectrum, ALL_TAGS)
from .admissibility import check_admissible

_BILINEAR_TAGS = ("B141", "B112", "B113", "B242", "B212", "B343", "B444")
_RULE_GROUPS = (("B141",), ("B112", "B113"), ("B242",), ("B212",), ("B343",),
                ("B444",), ("L3",), ("L4",))


@dataclass
class SolverConfig:
    exps: object
    grid: Grid
    time_grid: TimeGrid
    gamma: float = 0.0
    quad_nodes: int = 32
    max_iters: int = 50
    tol: float = 1e-8
    force: ForceField = None
    sampling: object = None
    integrand_dtype: type = complex

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        report = check_admissible(self.exps)
        if not report.admissible:
            raise ValueError("exponents are not admissible: "
                             + "; ".join(report.failed_clauses))

    def rules(self):
        return {tag: QuadratureRule(*rule_exponents(tag, self.exps),
                                    node_count=self.quad_nodes)
                for tag in ALL_TAGS}


@dataclass
class IterationTrace:
    """Per-iterate norms, successive differences, and the verdict."""

    x_norms: list = field(default_factory=list)
    diffs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    iterations: int = 0
    final_residual: float = math.nan
    constants: ConstantsTable = None

    def as_dict(self):
        return {
            "x_norms": list(self.x_norms),
            "diffs": list(self.diffs),
            "ratios": list(self.ratios),
            "converged": self.converged,
            "diverged": self.diverged,
            "iterations": self.iterations,
            "final_residual": self.final_residual,
        }


def caloric_extension(data, gamma, time_grid):
    """Free evolution of the data at every stored time: the first Picard
    iterate (e^{tL} n0, e^{tL} c0, e^{-gt} e^{tL} v0, e^{tL} u0)."""
    grid = data.grid
    u0 = data.u
    defect = spectral_divergence_defect(u0)
    if defect > 1e-10:
        warnings.warn(f"initial velocity has divergence defect {defect:.2e}; projecting")
        u0 = leray_project(u0)
    states = []
    for t in time_grid.times:
        states.append(StateTuple(
            t,
            heat_apply(data.n, t),
            heat_apply(data.c, t),
            damped_heat_apply(SpectralField(grid, data.v.coeffs, pinned=True), t, gamma),
            heat_apply(u0, t),
        ))
    return Trajectory.from_states(states)


def _integrand_store(traj, force, have_force, dtype=complex):
    """Contracted integrand spectra of every bilinear term and L4, stacked
    per stored time; shares the physical transforms across tags."""
    grid = traj.grid
    dim = grid.dim
    ks = grid.kshape
    t_count = len(traj)
    mask = grid.dealias_mask
    k = grid.k
    store = {tag: np.empty((t_count,) + ks, dtype=dtype)
             for tag in ("B141", "B112", "B113", "B242", "B212", "B343")}
    store["B444"] = np.empty((t_count, dim) + ks, dtype=dtype)
    if have_force:
        store["L4"] = np.empty((t_count, dim) + ks, dtype=dtype)
    f_phys = force.f.to_physical() if have_force else None
    inv_k2 = grid.inv_k2

    for kk in range(t_count):
        n_phys = grid.backward(traj.n[kk])
        c_phys = grid.backward(traj.c[kk])
        u_phys = [grid.backward(traj.u[kk, ax]) for ax in range(dim)]
        grad_c = [grid.backward((1j * k[ax]) * traj.c[kk]) for ax in range(dim)]
        grad_v = [grid.backward((1j * k[ax]) * traj.v[kk]) for ax in range(dim)]

        def div_contract(phys_list):
            acc = None
            for ax, vals in enumerate(phys_list):
                term = (1j * k[ax]) * (grid.forward(vals) * mask)
                acc = term if acc is None else acc + term
            return -acc

        store["B141"][kk] = div_contract([up * n_phys for up in u_phys])
        store["B112"][kk] = div_contract([n_phys * g for g in grad_c])
        store["B113"][kk] = div_contract([n_phys * g for g in grad_v])
        store["B242"][kk] = div_contract([up * c_phys for up in u_phys])
        store["B212"][kk] = -(grid.forward(n_phys * c_phys) * mask)
        store["B343"][kk] = -(grid.forward(sum(a * b for a, b in zip(u_phys, grad_v)))
                              * mask)
        # projected divergence of the velocity self-advection tensor
        raw = [None] * dim
        for j in range(dim):
            acc = None
            for l in range(dim):
                term = (1j * k[l]) * (grid.forward(u_phys[l] * u_phys[j]) * mask)
                acc = term if acc is None else acc + term
            raw[j] = -acc
        dot = sum(k[ax] * raw[ax] for ax in range(dim)) * inv_k2
        for j in range(dim):
            store["B444"][kk, j] = raw[j] - k[j] * dot
        if have_force:
            raw = [-(grid.forward(n_phys * f_phys[j]) * mask) for j in range(dim)]
            dot = sum(k[ax] * raw[ax] for ax in range(dim)) * inv_k2
            for j in range(dim):
                store["L4"][kk, j] = raw[j] - k[j] * dot
    store["L3"] = traj.n
    return store


def picard_map(traj, data, config):
    """One application of the integral map: the free evolution of the data
    plus the seven bilinear and two linear Duhamel terms of the input
    trajectory.  Caloric rows are rebuilt from the data per output time,
    so no second trajectory is ever held in memory."""
    grid = config.grid
    times = config.time_grid.times
    if len(traj) != len(times) or not np.allclose(traj.times, times, rtol=1e-12):
        raise ValueError("trajectory is not defined on the configured time grid")
    defect = spectral_divergence_defect(traj.state(len(traj) - 1).u)
    if defect > 1e-8:
        raise ValueError(f"velocity along the trajectory is not solenoidal "
                         f"(defect {defect:.2e})")
    have_force = config.force is not None and \
        any(np.abs(c.coeffs).any() for c in config.force.f.components)
    store = _integrand_store(traj, config.force, have_force, dtype=config.integrand_dtype)
    rules = config.rules()
    k2 = grid.k2
    zero_idx = (0,) * grid.dim
    dim = grid.dim
    log_times = np.log(times)

    def locate(tau):
        if tau <= times[0]:
            return 0, 0.0
        if tau >= times[-1]:
            return len(times) - 2, 1.0
        j = int(np.searchsorted(times, tau, side="right")) - 1
        theta = (math.log(tau) - log_times[j]) / (log_times[j + 1] - log_times[j])
        return j, theta

    def lerp(tag, tau):
        arr = store[tag]
        j, theta = locate(tau)
        if theta == 0.0:
            return arr[j]
        if theta == 1.0:
            return arr[j + 1]
        return (1.0 - theta) * arr[j] + theta * arr[j + 1]

    ks = grid.kshape
    n_new = np.empty((len(times),) + ks, dtype=complex)
    c_new = np.empty_like(n_new)
    v_new = np.empty_like(n_new)
    u_new = np.empty((len(times), dim) + ks, dtype=complex)
    u0 = data.u
    if spectral_divergence_defect(u0) > 1e-10:
        u0 = leray_project(u0)
    for kk, t in enumerate(times):
        decay = np.exp(-t * k2)
        n_new[kk] = data.n.coeffs * decay
        c_new[kk] = data.c.coeffs * decay
        v_new[kk] = data.v.coeffs * (math.exp(-config.gamma * t) * decay)
        for ax in range(dim):
            u_new[kk, ax] = u0.components[ax].coeffs * decay
    v_new[(slice(None),) + zero_idx] = 0.0
    target = {"B141": n_new, "B112": n_new, "B113": n_new,
              "B242": c_new, "B212": c_new,
              "B343": v_new, "L3": v_new,
              "B444": u_new, "L4": u_new}

    for kk, t in enumerate(times):
        for group in _RULE_GROUPS:
            if group[0] == "L4" and not have_force:
                continue
            rule = rules[group[0]]
            gamma_eff = config.gamma if group[0] in ("B343", "L3") else 0.0
            accs = [None] * len(group)
            for z, w in zip(rule.nodes, rule.weights):
                tau = t * z
                s = t - tau
                mult = np.exp(-s * k2)
                if gamma_eff:
                    mult *= math.exp(-gamma_eff * s)
                scale = t * w * (1.0 - z) ** rule.a * z ** rule.b
                for gi, tag in enumerate(group):
                    term = scale * (mult * lerp(tag, tau))
                    accs[gi] = term if accs[gi] is None else accs[gi] + term
            for gi, tag in enumerate(group):
                target[tag][kk] += accs[gi]
        # the attractant is defined modulo constants: pin its zero mode
        v_new[(kk,) + zero_idx] = 0.0
    return Trajectory(grid, times.copy(), n_new, c_new, v_new, u_new)


def _trace_norm(traj, config):
    return x_space_norms(traj, config.exps, config.sampling).total


def picard_solve(data, config, constants=None):
    """Iterate x_(m+1) = caloric + B(x_m) from the caloric extension until
    the successive difference falls below tol, recording the trace.

    Divergence (three consecutive growing differences, or a non-finite
    norm) stops the iteration with the diverged flag set.
    """
    trace = IterationTrace(constants=constants)
    x = caloric_extension(data, config.gamma, config.time_grid)
    norm_x = _trace_norm(x, config)
    trace.x_norms.append(norm_x)
    for m in range(config.max_iters):
        x_next = picard_map(x, data, config)
        diff = x_next - x
        d_m = _trace_norm(diff, config)
        norm_next = _trace_norm(x_next, config)
        trace.diffs.append(d_m)
        trace.x_norms.append(norm_next)
        if len(trace.diffs) >= 2:
            prev = trace.diffs[-2]
            trace.ratios.append(d_m / prev if prev > 0 else math.nan)
        trace.iterations = m + 1
        x = x_next
        if not math.isfinite(d_m) or not math.isfinite(norm_next):
            trace.diverged = True
            break
        if d_m <= config.tol * norm_next:
            trace.converged = True
            trace.final_residual = d_m
            break
        tail = trace.ratios[-3:]
        if len(tail) == 3 and all(r > 1.0 for r in tail):
            trace.diverged = True
            break
    if trace.converged:
        trace.final_residual = trace.diffs[-1]
    return x, trace


#: smoothing-estimate measurement behind each constant: source and target
#: Morrey pairs of the heat (or heat-gradient) step in its proof
def _smoothing_pairs(exps):
    p, q, r, n1 = exps.p, exps.q, exps.r, exps.N1
    p1, q1, r1 = exps.p1, exps.q1, exps.r1
    s1 = p1 * q1 / (p1 + q1)
    s2 = r1 * q1 / (r1 + q1)
    s3 = p1 * r1 / (p1 + r1)
    s4 = n1 * q1 / (n1 + q1)
    pq = p * q / (p + q)
    rq = r * q / (r + q)
    pr = p * r / (p + r)
    nq = exps.N * q / (exps.N + q)
    inf = math.inf
    pairs = {
        "C1": (pq, s1, q, q1, True),
        "C2": (rq, s2, q, q1, True),
        "C3": (rq, s2, q, q1, True),
        "C4_1": (p, p1, inf, inf, True),
        "C4_2": (pr, s3, r, r1, True),
        "C5_1": (q, q1, inf, inf, False),
        "C5_2": (q, q1, r, r1, True),
        "C6": (pr, s3, r, r1, True),
        "C7": (p / 2, p1 / 2, p, p1, True),
        "alpha": (q, q1, r, r1, True),
        "beta": (nq, s4, p, p1, False),
    }
    if p1 / 2 < 1:
        raise ValueError("the velocity self-product needs an inner exponent "
                         f"p1 >= 2, got p1 = {p1:g}")
    return pairs


def measured_constants(config, n_fields=None, seed=1234):
    """Empirical smoothing constants times the exact beta factors, for
    every operator constant of the map."""
    exps = config.exps
    grid = config.grid
    if n_fields is None:
        n_fields = 8 if grid.dim == 2 else 5
    pairs = _smoothing_pairs(exps)
    out = {}
    for name, (sp, sp1, dp, dp1, deriv) in pairs.items():
        if name == "beta" and config.force is None:
            out[name] = 0.0
            continue
        c_smooth = smoothing_constant(grid, MorreyIndex(sp, sp1), MorreyIndex(dp, dp1),
                                      derivative=deriv, n_fields=n_fields, seed=seed,
                                      sampling=config.sampling)
        if name in ("alpha", "beta"):
            factor = linear_constant_bound(name, exps,
                                           config.force if name == "beta" else None)
            out[name] = c_smooth * factor
        else:
            out[name] = c_smooth * bilinear_constant_bound(name, exps)
    return out


def smallness_check(data, config, n_fields=None, seed=1234):
    """Assemble the constants table: measured C1..C7, alpha, beta, the
    contraction numbers K1/K2, epsilon = 1/(8 K1 K2), the measured caloric
    extension constant C0, delta = epsilon/C0, and the data verdict."""
    consts = measured_constants(config, n_fields=n_fields, seed=seed)
    bil = {name: consts[name] for name in
           ("C1", "C2", "C3", "C4_1", "C4_2", "C5_1", "C5_2", "C6", "C7")}
    norm_data = data_norm_I(data, config.exps, time_grid=config.time_grid,
                            sampling=config.sampling)
    if norm_data == 0.0:
        c0 = math.nan
    else:
        caloric = caloric_extension(data, config.gamma, config.time_grid)
        c0 = x_space_norms(caloric, config.exps, config.sampling).total / norm_data
    return ConstantsTable.assemble(bil, consts["alpha"], consts["beta"], c0,
                                   data_norm=norm_data)
