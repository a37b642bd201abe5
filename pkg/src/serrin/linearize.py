"""Linearized flux map on straight tubes: extension, action, resolvent.

The derivative of the boundary-flux map H at a constant profile lam acts on
boundary data w through the harmonic extension ext(w) of w into the tube:

    L_lam[w] = tan(lam)/(2 lam) * d ext(w)/dt |_{t=1} - w / (2 cos^2 lam).

On a pure mode cos(n * angle) this returns sigma_n(lam) * cos(n * angle),
which ties the discrete operator here to the ODE-based curves in
:mod:`serrin.spectrum`; the finite-difference derivative of the full
nonlinear H provides the end-to-end validation of that identity.  The
diagonal structure also yields the truncated resolvent used by the
branch-continuation preconditioner.
"""

from dataclasses import dataclass

import numpy as np

from .discrete import DEFAULT_GRADING, DEFAULT_HALF_WIDTH, TubeOperator
from .errors import AnalysisError, DomainValidationError, NumericalError
from .fourier import CosineSeries, cosine_coefficients
from .geometry import HALF_PI, Axis, BoundaryProfile, ModeIndex
from .spectrum import sigma
from .torsion import parse_resolution, solve_torsion

__all__ = ["HarmonicExtension", "LApplication", "SpectralDecomposition",
           "harmonic_extend", "apply_L", "fd_derivative_H", "resolvent_apply",
           "spectral_decomposition", "constant_operator", "FDDerivativeTable"]

DEFAULT_RESOLUTION = (256, 48)
_OP_CACHE = {}
_OP_CACHE_MAX = 24


def _as_series(w):
    if isinstance(w, CosineSeries):
        return w
    if isinstance(w, ModeIndex):
        return CosineSeries.basis(w.n)
    return CosineSeries(np.asarray(w, dtype=float))


def constant_operator(axis, lam, resolution=DEFAULT_RESOLUTION,
                      half_width=DEFAULT_HALF_WIDTH, beta=DEFAULT_GRADING,
                      angle_scheme="fourier", axis_shift=None):
    """Assembled (and factorization-cached) operator of a straight tube.

    One factorization serves every boundary datum at the same radius, which
    keeps mode sweeps and spectral decompositions cheap.
    """
    axis = Axis(axis)
    n_t, m = parse_resolution(resolution)
    key = (axis, round(float(lam), 14), n_t, m, half_width, beta,
           angle_scheme, axis_shift)
    op = _OP_CACHE.get(key)
    if op is None:
        profile = BoundaryProfile.constant(axis, lam)
        op = TubeOperator(profile, n_t, m, half_width=half_width, beta=beta,
                          angle_scheme=angle_scheme, axis_shift=axis_shift)
        if len(_OP_CACHE) >= _OP_CACHE_MAX:
            _OP_CACHE.pop(next(iter(_OP_CACHE)))
        _OP_CACHE[key] = op
    return op


@dataclass
class HarmonicExtension:
    """Discrete harmonic field with the given boundary trace."""

    lam: float
    axis: Axis
    w: CosineSeries
    t: np.ndarray
    angles: np.ndarray
    field: np.ndarray
    t_trace: np.ndarray      # d field/dt on t = 1
    residual: float


def harmonic_extend(lam, w, axis=Axis.XI, resolution=DEFAULT_RESOLUTION,
                    operator=None):
    """Harmonic extension of single-angle boundary data into the tube.

    Goes through the same two-dimensional assembly as the torsion solver
    (rather than per-mode radial solves), so cross-mode leakage of the
    discrete operator is genuinely measured by the callers.
    """
    lam = float(lam)
    if not 0.0 < lam < HALF_PI:
        raise DomainValidationError(f"lambda must lie in (0, pi/2), got {lam}")
    w = _as_series(w)
    op = operator if operator is not None else constant_operator(axis, lam, resolution)
    bc = w.samples(op.m_angles)
    fieldvals = op.solve(0.0, bc)
    residual = op.scaled_residual(fieldvals, 0.0, bc)
    if residual > 1e-10:
        raise NumericalError(f"harmonic extension residual {residual:.3e} too large")
    return HarmonicExtension(lam, Axis(axis), w, op.t, op.angles, fieldvals,
                             op.t_derivative_trace(fieldvals, bc), residual)


@dataclass
class LApplication:
    """Result of applying the linearized flux map to boundary data."""

    lam: float
    axis: Axis
    w: CosineSeries
    angles: np.ndarray
    samples: np.ndarray
    series: CosineSeries
    sine_residual: float

    def leakage(self, keep):
        """Largest output coefficient outside the given input frequencies."""
        out = 0.0
        for m in range(self.series.n_modes + 1):
            if m not in keep:
                out = max(out, abs(self.series.coefficient(m)))
        return max(out, self.sine_residual)


def apply_L(lam, w, axis=Axis.XI, resolution=DEFAULT_RESOLUTION, operator=None):
    """Apply the linearized flux map at a straight tube to boundary data."""
    ext = harmonic_extend(lam, w, axis=axis, resolution=resolution, operator=operator)
    lam = ext.lam
    samples = (np.tan(lam) / (2.0 * lam)) * ext.t_trace \
        - ext.w(ext.angles) / (2.0 * np.cos(lam) ** 2)
    coeffs, sine_res = cosine_coefficients(samples)
    return LApplication(lam, ext.axis, ext.w, ext.angles, samples,
                        CosineSeries(coeffs), sine_res)


@dataclass
class FDDerivativeTable:
    """Centered-difference derivative of H with its convergence record."""

    lam: float
    axis: Axis
    w: CosineSeries
    steps: np.ndarray
    deviations: np.ndarray   # max-norm distance from apply_L per step
    samples: np.ndarray      # Richardson-extrapolated derivative samples
    extrapolated_deviation: float
    slope: float             # fitted convergence order of the raw differences


def fd_derivative_H(lam, w, axis=Axis.XI, steps=(1e-2, 1e-3, 1e-4, 1e-5),
                    resolution=(64, 64), richardson_pairs=1):
    """Directional derivative of the nonlinear flux map by central differences.

    Solves the torsion problem at profiles lam +/- h*w, forms
    (H(lam + h w) - H(lam - h w)) / (2 h) per step, Richardson-extrapolates
    the two finest steps, and tabulates the per-step deviation from the
    linearized operator.  The raw deviations must shrink with h (order ~2);
    if they fail to decrease at the coarse end the run aborts, since that
    signals an inconsistent linearization rather than roundoff.
    """
    w = _as_series(w)
    axis = Axis(axis)
    steps = np.asarray(sorted(steps, reverse=True), dtype=float)
    scale = float(np.max(np.abs(w.samples(256)))) or 1.0
    for h in steps:
        hi = lam + h * scale
        lo = lam - h * scale
        if not (0.0 < lo and hi < HALF_PI):
            raise DomainValidationError(
                f"step {h} pushes the profile outside the admissible band")

    reference = apply_L(lam, w, axis=axis, resolution=resolution)
    m = reference.angles.size

    diffs = []
    for h in steps:
        plus = _perturbed_profile(axis, lam, w, h)
        minus = _perturbed_profile(axis, lam, w, -h)
        h_plus = solve_torsion(plus, resolution).neumann
        h_minus = solve_torsion(minus, resolution).neumann
        diffs.append((h_plus - h_minus) / (2.0 * h))
    diffs = np.asarray(diffs)

    ref_samples = _resample(reference.samples, m)
    deviations = np.max(np.abs(diffs - ref_samples[None, :]), axis=1)
    if deviations.size >= 2 and deviations[1] > deviations[0]:
        raise AnalysisError(
            "finite-difference derivative of H is not converging toward the "
            f"linearized operator (deviations {deviations[:2]})")

    extrap = diffs[-1]
    for _ in range(richardson_pairs):
        r = steps[-2] / steps[-1]
        extrap = (r ** 2 * diffs[-1] - diffs[-2]) / (r ** 2 - 1.0)
    # fit the convergence order on the steps still above the roundoff floor
    # (the finest steps bottom out on solver noise divided by 2h)
    good = deviations > max(1e-8, 50.0 * deviations.min())
    if np.count_nonzero(good) < 2:
        good = np.zeros_like(deviations, dtype=bool)
        good[:2] = True
    slope = float(np.polyfit(np.log(steps[good]), np.log(deviations[good]), 1)[0])
    return FDDerivativeTable(lam, axis, w, steps, deviations, extrap,
                             float(np.max(np.abs(extrap - ref_samples))), slope)


def _perturbed_profile(axis, lam, w, h):
    coeffs = h * w.coeffs.copy()
    coeffs[0] += lam
    return BoundaryProfile(axis, coeffs)


def _resample(samples, m):
    if samples.size == m:
        return samples
    coeffs, _ = cosine_coefficients(samples)
    return CosineSeries(coeffs).samples(m)


def resolvent_apply(lam, j, v, axis=Axis.XI, truncation=32):
    """Truncated resolvent of the linearized map on the j-orthogonal block.

    Maps v with no cos(j .) component to
    sum_{m <= truncation, m != j} v_m / (sigma_m - sigma_j) cos(m .),
    the inverse of (L - sigma_j) on the complement of the kernel mode.
    Strict monotonicity of sigma_m in m keeps every denominator nonzero.
    """
    v = _as_series(v)
    if abs(v.coefficient(j)) >= 1e-12:
        raise DomainValidationError(
            f"resolvent needs data orthogonal to mode {j}; "
            f"found coefficient {v.coefficient(j):.3e}")
    sig_j = sigma(ModeIndex(axis, j), lam)
    out = np.zeros(truncation + 1)
    for m in range(min(v.n_modes, truncation) + 1):
        if m == j:
            continue
        cm = v.coefficient(m)
        if cm != 0.0:
            out[m] = cm / (sigma(ModeIndex(axis, m), lam) - sig_j)
    return CosineSeries(out)


@dataclass
class SpectralDecomposition:
    """Mode-by-mode projections of boundary data with their eigenvalues."""

    lam: float
    axis: Axis
    truncation: int
    coefficients: np.ndarray
    eigenvalues: np.ndarray

    def reconstruct(self):
        return CosineSeries(self.coefficients)

    @property
    def spectral_gap(self):
        """Smallest nonzero |sigma_m|; reported alongside resolvent uses."""
        nz = np.abs(self.eigenvalues[np.abs(self.eigenvalues) > 0.0])
        return float(np.min(nz)) if nz.size else 0.0


def spectral_decomposition(lam, w, axis=Axis.XI, truncation=32):
    """Project boundary data on the cosine modes and attach sigma values."""
    w = _as_series(w).truncated(truncation)
    eig = np.array([sigma(ModeIndex(axis, m), lam) for m in range(truncation + 1)])
    return SpectralDecomposition(float(lam), Axis(axis), truncation, w.coeffs.copy(), eig)
