"""Geometry of tube domains around a core circle in the round three-sphere.

The three-sphere is swept out by the family of flat tori

    (theta, eta, xi) -> (sin(theta) cos(eta), sin(theta) sin(eta),
                         cos(theta) cos(xi),  cos(theta) sin(xi)),

with theta in [0, pi/2]; the round metric pulls back to

    g = d theta^2 + sin^2(theta) d eta^2 + cos^2(theta) d xi^2.

A boundary profile phi on one of the two circle factors defines the tube
{theta < phi(angle)}, which is mapped onto the fixed reference domain
{0 <= t < 1} by theta = t * phi(angle).  This module carries the pulled-back
metric on the reference domain, its Laplace-Beltrami coefficients, volume and
boundary-area quadrature, and the outward-normal weight that converts a
radial derivative at t = 1 into a true normal derivative.

Conventions: the "active" angle is the one the profile depends on (xi for
``Axis.XI``, eta for ``Axis.ETA``); the other ("passive") angle is cyclic and
never enters the data.  All angles and lengths are radians.
"""

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, DomainValidationError
from .fourier import CosineSeries, angle_grid, cosine_coefficients

__all__ = [
    "Axis", "ModeIndex", "MetricAtPoint", "BoundaryProfile",
    "metric_lambda", "metric_phi", "volume", "boundary_area",
    "neumann_weight", "laplacian_coefficients", "HALF_PI",
]

HALF_PI = 0.5 * np.pi


class Axis(str, Enum):
    """Which circle factor the profile (and boundary data) depends on."""

    XI = "xi"
    ETA = "eta"


def _as_axis(axis):
    if isinstance(axis, Axis):
        return axis
    try:
        return Axis(str(axis).lower())
    except ValueError:
        raise DomainValidationError(f"unknown axis {axis!r}, expected 'xi' or 'eta'")


@dataclass(frozen=True)
class ModeIndex:
    """One pure angular frequency on one axis.

    ``n`` is the frequency of cos(n * angle); the axis selects which of the
    two eigenvalue families the mode belongs to.  Bifurcation analysis is
    only meaningful for n >= 2.
    """

    axis: Axis
    n: int

    def __post_init__(self):
        object.__setattr__(self, "axis", _as_axis(self.axis))
        if int(self.n) != self.n or self.n < 0:
            raise DomainValidationError(f"mode frequency must be an integer >= 0, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def eps_delta(self):
        """Frequencies (eps, delta) on the (collapsing, surviving) circles.

        eps multiplies 1/sin^2(t phi) in the radial mode equation and delta
        multiplies 1/cos^2(t phi); an eta-mode oscillates on the circle that
        collapses on the tube core, a xi-mode on the one that survives.
        """
        return (self.n, 0) if self.axis is Axis.ETA else (0, self.n)


@dataclass(frozen=True)
class MetricAtPoint:
    """Metric components at one point of the reference domain.

    Coordinates are ordered (t, active angle, passive angle); the passive
    angle is orthogonal to the other two, so only g_ta couples directions.
    ``sqrt_det`` is the volume density, vanishing exactly on the axis t = 0.
    """

    g_tt: float
    g_ta: float
    g_aa: float
    g_bb: float
    sqrt_det: float


class BoundaryProfile:
    """Admissible boundary profile phi on one circle factor.

    The cosine coefficients are authoritative; collocation values are
    evaluated from them (they agree with a discrete cosine transform of the
    samples whenever the sample count resolves every retained mode).
    Admissibility means 0 < phi < pi/2 everywhere, so the tube stays inside
    the smooth part of the torus sweep.
    """

    def __init__(self, axis, coeffs, check=True):
        self.axis = _as_axis(axis)
        self.series = coeffs if isinstance(coeffs, CosineSeries) else CosineSeries(coeffs)
        if check:
            self.validate()

    # -- constructors -------------------------------------------------
    @classmethod
    def constant(cls, axis, lam):
        return cls(axis, [float(lam)])

    @classmethod
    def perturbed(cls, axis, lam, mode, amplitude):
        """lam + amplitude * cos(mode * angle)."""
        c = np.zeros(mode + 1)
        c[0] = lam
        c[mode] = amplitude
        return cls(axis, c)

    @classmethod
    def from_collocation(cls, axis, values, max_mode=None):
        coeffs, residual = cosine_coefficients(values, max_mode)
        if residual > 1e-10 * max(1.0, float(np.max(np.abs(values)))):
            raise DomainValidationError(
                f"collocation values are not even in the angle (sine residual {residual:.3e})")
        return cls(axis, coeffs)

    # -- evaluation ----------------------------------------------------
    @property
    def coeffs(self):
        return self.series.coeffs

    @property
    def n_modes(self):
        return self.series.n_modes

    @property
    def is_constant(self):
        return self.series.coeffs.size == 1 or not np.any(self.series.coeffs[1:])

    def value(self, angle):
        return self.series(angle)

    def slope(self, angle):
        return self.series.derivative(angle)

    def curvature(self, angle):
        return self.series.second_derivative(angle)

    def collocation(self, m_angles):
        return self.series.samples(m_angles)

    def validate(self, n_check=None):
        """Check 0 < phi < pi/2 on a grid fine enough for the truncation."""
        n_check = n_check or max(512, 8 * (self.n_modes + 1))
        vals = self.collocation(n_check)
        lo, hi = float(np.min(vals)), float(np.max(vals))
        if lo <= 0.0 or hi >= HALF_PI:
            raise DomainValidationError(
                f"profile leaves the admissible band (0, pi/2): range [{lo:.6f}, {hi:.6f}]")

    # -- serialization --------------------------------------------------
    def to_json(self):
        return json.dumps({
            "axis": self.axis.value,
            "coeffs": [float(c) for c in self.coeffs],
            "n_modes": self.n_modes,
        })

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        prof = cls(data["axis"], data["coeffs"])
        if "n_modes" in data and int(data["n_modes"]) != prof.n_modes:
            raise DomainValidationError("n_modes field disagrees with coefficient count")
        return prof

    def __repr__(self):
        return f"BoundaryProfile(axis={self.axis.value}, coeffs={self.coeffs})"


def _check_lambda_t(lam, t):
    lam = np.asarray(lam, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(lam <= 0.0) or np.any(lam >= HALF_PI):
        raise DomainValidationError(f"lambda must lie in (0, pi/2), got {lam}")
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainValidationError(f"t must lie in [0, 1], got {t}")
    return lam, t


def metric_lambda(lam, t):
    """Pulled-back metric of the straight tube of radius ``lam`` at radius t.

    Components are (lam^2, 0, sin^2(t lam), cos^2(t lam)) with density
    lam sin(t lam) cos(t lam); the density vanishes only on the axis.
    A straight tube has no preferred angle, so the components are reported
    in the fixed coordinate order (t, eta, xi): ``g_aa`` is the eta-circle
    coefficient.  ``metric_phi`` of a constant eta-profile reproduces this
    componentwise; a constant xi-profile swaps the two angle slots.
    """
    lam, t = _check_lambda_t(lam, t)
    s, c = np.sin(t * lam), np.cos(t * lam)
    return MetricAtPoint(g_tt=lam * lam, g_ta=0.0 * s, g_aa=s * s, g_bb=c * c,
                         sqrt_det=lam * s * c)


def metric_phi(profile, t, angle):
    """Pulled-back metric of the deformed tube at (t, active angle).

    Derived from theta = t * phi(angle): with S = sin(t phi), C = cos(t phi),

        XI case:  (phi^2, t phi phi', t^2 phi'^2 + C^2, S^2),
        ETA case: (phi^2, t phi phi', t^2 phi'^2 + S^2, C^2),

    both with density phi * S * C.  For a constant profile this reduces
    componentwise to ``metric_lambda``.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > 1.0):
        raise DomainValidationError(f"t must lie in [0, 1], got {t}")
    phi = profile.value(angle)
    dphi = profile.slope(angle)
    s, c = np.sin(t * phi), np.cos(t * phi)
    g_tt = phi * phi
    g_ta = t * phi * dphi
    if profile.axis is Axis.XI:
        g_aa = (t * dphi) ** 2 + c * c
        g_bb = s * s
    else:
        g_aa = (t * dphi) ** 2 + s * s
        g_bb = c * c
    return MetricAtPoint(g_tt=g_tt, g_ta=g_ta, g_aa=g_aa, g_bb=g_bb,
                         sqrt_det=phi * s * c)


def laplacian_coefficients(profile, t, angle):
    """Coefficients of the Laplace-Beltrami operator on the reference tube.

    For fields independent of the passive angle the operator reads

        L u = g^tt u_tt + 2 g^ta u_ta + g^aa u_aa + c_t u_t,

    (the first-order angular coefficient vanishes identically; this was
    derived from the divergence form and is covered by the finite-difference
    metric oracle in the tests).  Returns (g^tt, g^ta, g^aa, g^bb, c_t),
    each broadcast over ``t`` x ``angle``.
    """
    t = np.asarray(t, dtype=float)[:, None]
    phi = np.asarray(profile.value(angle), dtype=float)[None, :]
    dphi = np.asarray(profile.slope(angle), dtype=float)[None, :]
    ddphi = np.asarray(profile.curvature(angle), dtype=float)[None, :]
    s, c = np.sin(t * phi), np.cos(t * phi)
    if profile.axis is Axis.XI:
        axis_fac, wall_fac = s, c        # sin collapses on the axis
    else:
        axis_fac, wall_fac = c, s        # roles swap: eta-circle collapses
    g_tt = ((t * dphi) ** 2 + wall_fac ** 2) / (phi * wall_fac) ** 2
    g_ta = -t * dphi / (phi * wall_fac ** 2)
    g_aa = 1.0 / wall_fac ** 2
    g_bb = 1.0 / axis_fac ** 2
    rho = phi * s * c
    # c_t * rho = 2 t phi'^2 axis_fac/(phi wall_fac) + (c^2 - s^2)
    #             - t phi'' axis_fac/wall_fac
    ct = (2.0 * t * dphi ** 2 * axis_fac / (phi * wall_fac)
          + (c * c - s * s) - t * ddphi * axis_fac / wall_fac) / rho
    return g_tt, g_ta, g_aa, g_bb, ct


def _quad_nodes(profile, quad_order):
    if quad_order < 2:
        raise ConfigError(f"quad_order must be >= 2, got {quad_order}")
    tq, tw = np.polynomial.legendre.leggauss(quad_order)
    tq = 0.5 * (tq + 1.0)       # open rule on (0,1): no node on the axis
    tw = 0.5 * tw
    m_angles = max(32, 4 * (profile.n_modes + 1), quad_order)
    return tq, tw, angle_grid(m_angles)


def volume(profile, quad_order=40):
    """Volume of the tube by tensor-product quadrature of the density.

    Gauss-Legendre in t (open: the degenerate axis is never sampled) and a
    periodic trapezoid in the active angle, times 2*pi for the passive one.
    A constant profile lam gives 2 pi^2 sin^2(lam) exactly.
    """
    tq, tw, ang = _quad_nodes(profile, quad_order)
    phi = profile.value(ang)[None, :]
    dens = phi * np.sin(tq[:, None] * phi) * np.cos(tq[:, None] * phi)
    return float(tw @ dens.mean(axis=1)) * (2.0 * np.pi) ** 2


def boundary_area(profile, quad_order=40):
    """Area of the boundary torus t = 1.

    The induced area element is sin(phi) sqrt(phi'^2 + cos^2 phi) for a
    xi-profile (sin and cos swap for eta); the constant case gives
    4 pi^2 sin(lam) cos(lam).
    """
    _, _, ang = _quad_nodes(profile, quad_order)
    return float(np.mean(boundary_area_element(profile, ang))) * (2.0 * np.pi) ** 2


def boundary_area_element(profile, angle):
    """Pointwise boundary area density (per unit square angle)."""
    phi = profile.value(angle)
    dphi = profile.slope(angle)
    if profile.axis is Axis.XI:
        return np.sin(phi) * np.sqrt(dphi ** 2 + np.cos(phi) ** 2)
    return np.cos(phi) * np.sqrt(dphi ** 2 + np.sin(phi) ** 2)


def neumann_weight(profile, angle):
    """Factor converting du/dt at t=1 into the outward normal derivative.

    The boundary is the level set of f(t, .) = t, so du/dnu = |grad f| du/dt
    once tangential derivatives drop (the torsion solution vanishes on the
    boundary).  For a xi-profile

        w = sqrt(phi'^2 + cos^2 phi) / (phi cos phi),

    with sin in place of cos for an eta-profile; a constant profile gives
    1/lam, the straight-tube normal 1/lam * d/dt.
    """
    phi = profile.value(angle)
    dphi = profile.slope(angle)
    wall = np.cos(phi) if profile.axis is Axis.XI else np.sin(phi)
    return np.sqrt(dphi ** 2 + wall ** 2) / (phi * wall)
