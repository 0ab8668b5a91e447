"""Named field recipes: Gaussians, mollified homogeneous profiles, bumps,
band-limited random fields.

Homogeneous profiles (degrees -2, -1, 0) are softened at a core scale of a
few cells and cut off by a smooth radial envelope inside the box, so they
are grid-representable; self-similarity checks restrict attention to the
window between those two scales.
"""

import math

import numpy as np

from .grids import Grid
from .spectral import SpectralField, VectorField, heat_apply, leray_project


def _offset_r2(grid, center):
    if center is None:
        return sum(xi ** 2 for xi in grid.x)
    half = 2.0 * grid.box_half_width
    r2 = np.zeros(grid.shape)
    for xi, ci in zip(grid.x, center):
        d = np.abs(xi - ci)
        d = np.minimum(d, half - d)
        r2 = r2 + d ** 2
    return r2


def gaussian(grid, a=1.0, amplitude=1.0, center=None):
    """amplitude * exp(-|x - c|^2 / (2a)); heat flow sends a -> a + 2t."""
    r2 = _offset_r2(grid, center)
    return SpectralField.from_physical(grid, amplitude * np.exp(-r2 / (2.0 * a)))


def gaussian_evolved(grid, a, t, amplitude=1.0, center=None):
    """Closed form of the heat-evolved Gaussian, for oracle comparisons."""
    at = a + 2.0 * t
    r2 = _offset_r2(grid, center)
    amp = amplitude * (a / at) ** (grid.dim / 2.0)
    return SpectralField.from_physical(grid, amp * np.exp(-r2 / (2.0 * at)))


def solenoidal_gaussian(grid, a=1.0, amplitude=1.0, center=None):
    """Divergence-free velocity from a Gaussian stream function."""
    half = 2.0 * grid.box_half_width
    if center is None:
        center = (0.0,) * grid.dim
    disp = []
    for xi, ci in zip(grid.x, center):
        d = xi - ci
        d = d - half * np.round(d / half)
        disp.append(d)
    r2 = sum(d ** 2 for d in disp)
    psi = amplitude * np.exp(-r2 / (2.0 * a))
    # planar curl (d_y psi, -d_x psi[, 0]) is exactly solenoidal
    comps = [psi * (-disp[1] / a), psi * (disp[0] / a)]
    while len(comps) < grid.dim:
        comps.append(np.zeros(grid.shape))
    u = VectorField.from_physical(grid, comps)
    return leray_project(u)


def smooth_step(s):
    """C-infinity ramp: 0 for s <= 0, 1 for s >= 1."""
    s = np.clip(s, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        f = np.where(s > 0, np.exp(-1.0 / np.maximum(s, 1e-300)), 0.0)
        g = np.where(s < 1, np.exp(-1.0 / np.maximum(1.0 - s, 1e-300)), 0.0)
    return f / (f + g)


def radial_envelope(grid, r_on, r_off):
    """1 inside r_on, smooth C-infinity transition to 0 at r_off."""
    r = grid.radius()
    return 1.0 - smooth_step((r - r_on) / (r_off - r_on))


def bump(grid, radius, amplitude=1.0, center=None):
    """Compactly supported C-infinity bump of the given radius."""
    if center is None:
        center = (0.0,) * grid.dim
    half = 2.0 * grid.box_half_width
    r2 = np.zeros(grid.shape)
    for xi, ci in zip(grid.x, center):
        d = np.abs(xi - ci)
        d = np.minimum(d, half - d)
        r2 = r2 + d ** 2
    s = r2 / radius ** 2
    vals = np.zeros(grid.shape)
    inside = s < 1.0
    vals[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return SpectralField.from_physical(grid, vals)


def mollify(field, sigma):
    """Gaussian mollification at scale sigma, done spectrally."""
    if sigma <= 0:
        return field
    if isinstance(field, VectorField):
        return VectorField([mollify(c, sigma) for c in field.components])
    return heat_apply(field, 0.5 * sigma ** 2)


def homogeneous_scalar(grid, degree, amplitude=1.0, sigma_cells=2.0,
                       envelope_on=0.44, envelope_off=0.5, angular=None):
    """Mollified, enveloped sample of amplitude * |x|^degree.

    The raw profile is sampled with the radius floored at half a cell,
    mollified at sigma_cells grid cells, and truncated by a smooth radial
    envelope between envelope_on*L and envelope_off*L.  ``angular`` may
    supply a degree-0 directional factor, called as angular(grid, r_soft).
    """
    h = grid.spacing
    ell = grid.box_half_width
    r = grid.radius()
    r_soft = np.maximum(r, 0.5 * h)
    vals = amplitude * r_soft ** degree
    if angular is not None:
        vals = vals * angular(grid, r_soft)
    vals = vals * radial_envelope(grid, envelope_on * ell, envelope_off * ell)
    field = SpectralField.from_physical(grid, vals)
    return mollify(field, sigma_cells * h)


def azimuthal_homogeneous_velocity(grid, amplitude=1.0, sigma_cells=2.0,
                                   envelope_on=0.44, envelope_off=0.5):
    """Degree -1 homogeneous velocity (-x2, x1, 0)/|x|^2, exactly solenoidal.

    Radial factors (core softening, envelope) preserve solenoidality of
    this azimuthal profile; a final projection removes grid round-off.
    """
    h = grid.spacing
    ell = grid.box_half_width
    r = grid.radius()
    r_soft = np.maximum(r, 0.5 * h)
    env = radial_envelope(grid, envelope_on * ell, envelope_off * ell)
    base = amplitude * env / r_soft ** 2
    comps = [-grid.x[1] * base, grid.x[0] * base]
    while len(comps) < grid.dim:
        comps.append(np.zeros(grid.shape))
    u = VectorField.from_physical(grid, comps)
    u = mollify(u, sigma_cells * h)
    return leray_project(u)


def radial_homogeneous_force(grid, amplitude=1.0, sigma_cells=2.0,
                             envelope_on=0.44, envelope_off=0.5):
    """Degree -1 homogeneous force x/|x|^2, mollified and enveloped."""
    h = grid.spacing
    ell = grid.box_half_width
    r = grid.radius()
    r_soft = np.maximum(r, 0.5 * h)
    env = radial_envelope(grid, envelope_on * ell, envelope_off * ell)
    base = amplitude * env / r_soft ** 2
    comps = [xi * base for xi in grid.x]
    f = VectorField.from_physical(grid, comps)
    return mollify(f, sigma_cells * h)


def mollified_power_profile(grid, t_moll):
    """Exact Gaussian mollification of |x|^-2 in 3D:
    e^{t Lap} r^-2 = dawsn(r / (2 sqrt(t))) / (r sqrt(t)), smooth at 0."""
    from scipy.special import dawsn
    s = math.sqrt(t_moll)
    r = grid.radius()
    small = r < 1e-12
    r_safe = np.where(small, 1.0, r)
    vals = dawsn(r_safe / (2.0 * s)) / (r_safe * s)
    return np.where(small, 0.5 / t_moll, vals)


def exact_homogeneous_density(grid, amplitude=1.0, sigma_cells=2.0):
    """Degree -2 cell density from the closed-form mollified profile."""
    t_moll = 0.5 * (sigma_cells * grid.spacing) ** 2
    return SpectralField.from_physical(grid, amplitude * mollified_power_profile(grid, t_moll))


def exact_azimuthal_velocity(grid, amplitude=1.0, sigma_cells=2.0):
    """Degree -1 solenoidal velocity (-x2, x1, 0) p(r) built on the
    mollified inverse-square profile; azimuthal times radial is exactly
    divergence-free."""
    t_moll = 0.5 * (sigma_cells * grid.spacing) ** 2
    p = amplitude * mollified_power_profile(grid, t_moll)
    comps = [-grid.x[1] * p, grid.x[0] * p]
    while len(comps) < grid.dim:
        comps.append(np.zeros(grid.shape))
    return leray_project(VectorField.from_physical(grid, comps))


def exact_radial_force(grid, amplitude=1.0, sigma_cells=2.0):
    """Degree -1 force x p(r) on the mollified inverse-square profile."""
    t_moll = 0.5 * (sigma_cells * grid.spacing) ** 2
    p = amplitude * mollified_power_profile(grid, t_moll)
    return VectorField.from_physical(grid, [xi * p for xi in grid.x])


def random_band_limited(grid, seed, corr_cells=4.0, amplitude=1.0, zero_mean=True):
    """Smooth random field: white noise filtered by a Gaussian spectrum,
    normalized to the requested peak amplitude."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(grid.shape)
    field = SpectralField.from_physical(grid, noise)
    xi_c = 2.0 * np.pi / (corr_cells * grid.spacing)
    k_cut = 0.75 * np.pi / grid.spacing
    coeffs = field.coeffs * np.exp(-grid.k2 / xi_c ** 2) * (grid.k2 < k_cut ** 2)
    if zero_mean:
        coeffs[(0,) * grid.dim] = 0.0
    out = SpectralField(grid, coeffs)
    peak = np.abs(out.to_physical()).max()
    if peak > 0:
        out = out * (amplitude / peak)
    return out


def spectral_upsample(field, fine_grid):
    """Exact trigonometric interpolation onto a finer grid of the same box.

    Zero-pads the half-spectrum; the coarse Nyquist planes are dropped,
    so the input should be band-limited below them (true for the filtered
    random fields used in refinement studies).
    """
    coarse = field.grid
    if fine_grid.dim != coarse.dim or fine_grid.box_half_width != coarse.box_half_width:
        raise ValueError("refinement must keep dimension and box size")
    if fine_grid.m < coarse.m:
        raise ValueError("target grid is coarser than the source")
    if fine_grid.m == coarse.m:
        return SpectralField(fine_grid, field.coeffs.copy(), pinned=field.pinned)
    mc, mf = coarse.m, fine_grid.m
    out = np.zeros(fine_grid.kshape, dtype=complex)
    half = mc // 2
    # full-length axes: keep rows [0, half) and the top (half-1) negatives
    src = [np.r_[0:half, mc - half + 1:mc] for _ in range(coarse.dim - 1)]
    dst = [np.r_[0:half, mf - half + 1:mf] for _ in range(coarse.dim - 1)]
    src.append(np.arange(0, half))          # rfft axis, Nyquist column dropped
    dst.append(np.arange(0, half))
    out[np.ix_(*dst)] = field.coeffs[np.ix_(*src)]
    out *= (mf / mc) ** coarse.dim
    return SpectralField(fine_grid, out, pinned=field.pinned)


def shared_random_field(dim, box_half_width, coarse_m, grid, seed, corr_cells=4.0,
                        amplitude=1.0, zero_mean=True):
    """Random field defined on a coarse lattice, evaluated on ``grid``.

    The draw happens on the coarse grid and is spectrally upsampled, so
    refinements of the same box see the identical continuum function.
    """
    base = Grid(dim, coarse_m, box_half_width)
    f = random_band_limited(base, seed, corr_cells=corr_cells, amplitude=amplitude,
                            zero_mean=zero_mean)
    return spectral_upsample(f, grid)
