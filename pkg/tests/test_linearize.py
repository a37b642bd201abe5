import numpy as np
import pytest

from serrin.errors import DomainValidationError
from serrin.fourier import CosineSeries
from serrin.geometry import Axis, ModeIndex
from serrin.linearize import (apply_L, constant_operator, fd_derivative_H,
                              harmonic_extend, resolvent_apply,
                              spectral_decomposition)
from serrin.modes import solve_l
from serrin.spectrum import sigma

XI, ETA = Axis.XI, Axis.ETA


class TestHarmonicExtension:
    def test_constant_data_extends_to_constant(self):
        ext = harmonic_extend(0.7, CosineSeries.constant(1.0), axis=XI,
                              resolution=(48, 16))
        assert np.max(np.abs(ext.field - 1.0)) < 1e-11
        assert np.max(np.abs(ext.t_trace)) < 1e-9

    def test_pure_mode_has_product_structure(self):
        lam = 0.9
        ext = harmonic_extend(lam, CosineSeries.basis(2), axis=XI)
        ms = solve_l(0, 2, lam, t_grid=ext.t)
        prod = ms.values[:, None] * np.cos(2 * ext.angles)[None, :]
        assert np.max(np.abs(ext.field - prod)) < 1e-8

    def test_superposition(self):
        lam = 0.8
        w = CosineSeries([0.0, 1.0, 0.0, 1.0])      # cos + cos(3.)
        both = harmonic_extend(lam, w, axis=XI, resolution=(64, 16))
        one = harmonic_extend(lam, CosineSeries.basis(1), axis=XI, resolution=(64, 16))
        three = harmonic_extend(lam, CosineSeries.basis(3), axis=XI, resolution=(64, 16))
        assert np.max(np.abs(both.field - one.field - three.field)) < 1e-9

    def test_lambda_validation(self):
        with pytest.raises(DomainValidationError):
            harmonic_extend(1.6, CosineSeries.basis(1))


class TestApplyL:
    def test_eigenfunction_identity_with_leakage(self):
        for axis in (XI, ETA):
            for lam in (0.4, 1.0):
                op = constant_operator(axis, lam)
                for n in range(0, 9):
                    la = apply_L(lam, CosineSeries.basis(n), axis=axis, operator=op)
                    sig = sigma(ModeIndex(axis, n), lam)
                    dev = np.max(np.abs(la.samples - sig * np.cos(n * la.angles)))
                    assert dev < 1e-7, f"{axis} n={n} lam={lam}: {dev:.2e}"
                    assert la.leakage({n}) < 1e-8

    def test_constant_data_returns_zero_mode_eigenvalue(self):
        lam = 0.85
        la = apply_L(lam, CosineSeries.constant(1.0), axis=ETA)
        assert np.max(np.abs(la.samples + 0.5 / np.cos(lam) ** 2)) < 1e-9

    def test_kernel_direction_at_root(self, lambda_roots):
        point = lambda_roots[(XI, 2)]
        la = apply_L(point.lambda_n, CosineSeries.basis(2), axis=XI)
        assert np.max(np.abs(la.samples)) < 1e-6


class TestFdDerivative:
    def test_matches_linearization_for_xi_mode(self):
        tab = fd_derivative_H(0.5, CosineSeries.basis(2), axis=XI)
        scale = abs(sigma(ModeIndex(XI, 2), 0.5))
        assert tab.extrapolated_deviation < 1e-4 * scale
        assert np.all(np.diff(tab.deviations[:3]) < 0.0)   # decreasing steps
        assert 1.7 < tab.slope < 2.3                       # central differences

    def test_matches_linearization_for_eta_mode(self):
        tab = fd_derivative_H(1.0, CosineSeries.basis(2), axis=ETA,
                              steps=(1e-2, 1e-3, 1e-4))
        scale = abs(sigma(ModeIndex(ETA, 2), 1.0))
        assert tab.extrapolated_deviation < 1e-4 * scale

    def test_constant_direction_reproduces_flux_derivative(self):
        # d/dlam of the constant flux -(tan lam)/2 is -1/(2 cos^2 lam)
        lam = 0.7
        tab = fd_derivative_H(lam, CosineSeries.constant(1.0), axis=XI,
                              steps=(1e-3, 1e-4))
        expected = -0.5 / np.cos(lam) ** 2
        assert np.max(np.abs(tab.samples - expected)) < 1e-8

    def test_inadmissible_step_rejected(self):
        with pytest.raises(DomainValidationError):
            fd_derivative_H(1.56, CosineSeries.basis(2), axis=XI, steps=(2e-2,))


class TestResolvent:
    def test_pure_mode_scaling(self):
        lam, j, m = 0.9, 2, 3
        r = resolvent_apply(lam, j, CosineSeries.basis(m), axis=XI)
        expected = 1.0 / (sigma(ModeIndex(XI, m), lam) - sigma(ModeIndex(XI, j), lam))
        assert np.isclose(r.coefficient(m), expected, rtol=1e-12)

    def test_round_trip_identity(self):
        lam, j = 0.8, 2
        sig_j = sigma(ModeIndex(XI, j), lam)
        for m in (0, 1, 3, 5, 8):
            r = resolvent_apply(lam, j, CosineSeries.basis(m), axis=XI)
            back = (sigma(ModeIndex(XI, m), lam) - sig_j) * r.coefficient(m)
            assert abs(back - 1.0) < 1e-8

    def test_zero_maps_to_zero(self):
        r = resolvent_apply(0.8, 2, CosineSeries.constant(0.0), axis=XI)
        assert np.all(r.coeffs == 0.0)

    def test_kernel_component_precondition(self):
        with pytest.raises(DomainValidationError):
            resolvent_apply(0.8, 2, CosineSeries.basis(2), axis=XI)


class TestSpectralDecomposition:
    def test_reconstruction_and_projections(self):
        w = CosineSeries([0.2, 0.0, 1.0, 0.5])
        dec = spectral_decomposition(0.9, w, axis=XI, truncation=8)
        assert np.allclose(dec.reconstruct().coeffs[:4], w.coeffs)
        assert dec.eigenvalues.shape == (9,)
        assert dec.spectral_gap > 0.0

    def test_projections_are_orthogonal(self):
        w = CosineSeries([0.0, 1.0, 2.0])
        p1, p2 = w.project(1), w.project(2)
        overlap = np.sum(p1.samples(32) * p2.samples(32))
        assert abs(overlap) < 1e-12


class TestDiscreteKernelStructure:
    def test_exactly_one_small_eigenvalue_at_root(self, lambda_roots):
        lam2 = lambda_roots[(XI, 2)].lambda_n
        op = constant_operator(XI, lam2, (64, 32))
        sigmas = []
        for m in range(0, 9):
            la = apply_L(lam2, CosineSeries.basis(m), axis=XI, operator=op)
            sigmas.append(la.series.coefficient(m))
        small = [m for m, s in enumerate(sigmas) if abs(s) < 1e-6]
        assert small == [2]
        others = [abs(s) for m, s in enumerate(sigmas) if m != 2]
        assert min(others) > 1e-2

    def test_transversality_sign_from_discrete_operator(self, lambda_roots):
        lam2 = lambda_roots[(XI, 2)].lambda_n
        h = 1e-4
        vals = []
        for lam in (lam2 - h, lam2 + h):
            la = apply_L(lam, CosineSeries.basis(2), axis=XI, resolution=(64, 32))
            vals.append(la.series.coefficient(2))
        slope = (vals[1] - vals[0]) / (2 * h)
        assert slope > 0.0 and abs(slope - 2.0) < 1e-3   # closed form is 2
