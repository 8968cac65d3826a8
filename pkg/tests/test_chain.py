"""Tests for TIHC spectra, node thermometry, and gap-error scaling.

The dense-eigensolver oracle builds the full (2N+1)x(2N+1) circulant
matrix and evaluates the node covariance from eigenvectors, independent of
the analytic cosine weights used by the implementation.
"""

import math

import numpy as np
import pytest
from scipy.special import zeta

from qthermo import (
    ChainSpec,
    UnstableChainError,
    ZeroModeError,
    chain_spectrum,
    fit_exponential_gap,
    fit_power_law,
    gap_error_scaling,
    gapless_frequency_sq,
    node_covariance_derivatives,
    node_covariances,
    node_qfi,
    power_law_chain,
    read_couplings_csv,
    thermal_mode_covariance,
    thermal_mode_derivatives,
    write_couplings_csv,
)
from qthermo.gaussian import QfiCurve, qfi_from_derivatives


def dense_node_covariance(c: ChainSpec, T: float):
    """Oracle: diagonalize the full circulant matrix and read the probe-node
    eigenvector weights directly."""
    first_row = np.concatenate(([c.omega_sq], c.coupling_array, c.coupling_array[::-1]))
    n = 2 * c.N + 1
    idx = np.arange(n)
    v = first_row[(idx[:, None] - idx[None, :]) % n]
    vals, vecs = np.linalg.eigh(v)
    om = np.sqrt(np.clip(vals, 0.0, None))
    w = vecs[0, :] ** 2
    nu = 1.0 / np.tanh(om / (2.0 * T))
    s11 = float(np.sum(w * nu / (2.0 * om)))
    s22 = float(np.sum(w * om * nu / 2.0))
    return s11, s22


def gapped_fig3_chain(N=100, delta=0.01, t=2.5):
    base = power_law_chain(N, 0.0, G=1.0, t=t)
    om2 = gapless_frequency_sq(N, base.couplings) + delta * delta
    return ChainSpec(N=N, omega_sq=om2, couplings=base.couplings)


def gapless_fig3_chain(N=100, t=2.5):
    base = power_law_chain(N, 0.0, G=1.0, t=t)
    om2 = gapless_frequency_sq(N, base.couplings)
    return ChainSpec(N=N, omega_sq=om2, couplings=base.couplings)


class TestChainSpectrum:
    def test_decoupled_chain_is_flat(self):
        c = ChainSpec(N=5, omega_sq=2.0, couplings=(0.0,) * 5)
        spec = chain_spectrum(c)
        assert np.allclose(spec.array, 2.0)
        assert spec.gap == pytest.approx(math.sqrt(2.0))
        assert spec.max_freq == pytest.approx(math.sqrt(2.0))

    def test_nearest_neighbor_dispersion(self):
        g = 0.3
        c = ChainSpec(N=40, omega_sq=1.0, couplings=(g,) + (0.0,) * 39)
        spec = chain_spectrum(c)
        a = np.arange(0, 41)
        expected = 1.0 + 2.0 * g * np.cos(2.0 * np.pi * a / 81)
        assert np.allclose(spec.array, expected, atol=1e-14)
        # gap^2 -> Om^2 - 2g as N grows
        big = ChainSpec(N=2000, omega_sq=1.0, couplings=(g,) + (0.0,) * 1999)
        assert chain_spectrum(big).gap**2 == pytest.approx(1.0 - 2.0 * g, abs=1e-6)

    def test_matches_dense_eigensolver(self):
        c = gapped_fig3_chain(N=60)
        spec = chain_spectrum(c)
        first_row = np.concatenate(([c.omega_sq], c.coupling_array, c.coupling_array[::-1]))
        idx = np.arange(2 * c.N + 1)
        v = first_row[(idx[:, None] - idx[None, :]) % (2 * c.N + 1)]
        dense = np.linalg.eigvalsh(v)
        mine = np.sort(np.concatenate([spec.array, spec.array[1:]]))
        assert np.max(np.abs(np.sort(dense) - mine)) < 1e-10 * spec.max_freq**2

    def test_max_frequency_identity(self):
        c = gapped_fig3_chain(N=80)
        spec = chain_spectrum(c)
        assert spec.array[0] == pytest.approx(
            c.omega_sq + 2.0 * float(np.sum(c.coupling_array)), rel=1e-14
        )

    def test_unstable_chain_rejected(self):
        with pytest.raises(UnstableChainError):
            chain_spectrum(ChainSpec(N=10, omega_sq=-5.0, couplings=(0.1,) * 10))


class TestGaplessTuning:
    def test_fig3_value_in_bracket(self):
        base = power_law_chain(100, 0.0, G=1.0, t=2.5)
        om2 = gapless_frequency_sq(100, base.couplings)
        assert 1.7342 <= om2 <= 1.7345
        assert om2 == pytest.approx(1.7342520082242414, rel=1e-12)

    def test_gapless_chain_has_zero_gap(self):
        c = gapless_fig3_chain()
        assert chain_spectrum(c).gap**2 < 1e-12

    def test_large_n_limit_is_alternating_series(self):
        # 2 sum (-1)^(n-1) n^(-2.5) = 2 (1 - 2^(-1.5)) zeta(2.5)
        limit = 2.0 * (1.0 - 2.0 ** (-1.5)) * zeta(2.5)
        base = power_law_chain(20000, 0.0, G=1.0, t=2.5)
        om2 = gapless_frequency_sq(20000, base.couplings)
        assert om2 == pytest.approx(limit, abs=1e-8)

    def test_single_coupling_limit(self):
        g = 0.4
        om2 = gapless_frequency_sq(3000, (g,) + (0.0,) * 2999)
        assert om2 == pytest.approx(2.0 * g, abs=1e-5)


class TestNodeCovariances:
    def test_decoupled_node_is_thermal(self):
        c = ChainSpec(N=8, omega_sq=1.44, couplings=(0.0,) * 8)
        cov = node_covariances(c, 0.7)
        ref = thermal_mode_covariance(1.2, 0.7)
        assert cov.s11 == pytest.approx(ref.s11, rel=1e-14)
        assert cov.s22 == pytest.approx(ref.s22, rel=1e-14)

    def test_zero_point_momentum_is_mean_frequency(self):
        c = gapped_fig3_chain(N=50)
        spec = chain_spectrum(c)
        cov = node_covariances(c, 1e-8)
        w = np.full(51, 2.0 / 101)
        w[0] = 1.0 / 101
        assert cov.s22 == pytest.approx(float(np.sum(w * spec.frequencies() / 2.0)), rel=1e-12)

    def test_matches_dense_eigensolver_oracle(self):
        c = gapped_fig3_chain(N=100)
        for t in (0.005, 0.05, 0.5):
            cov = node_covariances(c, t)
            s11_o, s22_o = dense_node_covariance(c, t)
            assert cov.s11 == pytest.approx(s11_o, rel=1e-10)
            assert cov.s22 == pytest.approx(s22_o, rel=1e-10)

    def test_zero_mode_requires_regularization(self):
        c = gapless_fig3_chain()
        with pytest.raises(ZeroModeError):
            node_covariances(c, 0.01)
        cov = node_covariances(c, 0.01, regularize_gapless=True)
        assert cov.s11 > 0.0

    def test_derivatives_match_finite_differences(self):
        c = gapped_fig3_chain(N=40)
        t, h = 0.05, 1e-6
        der = node_covariance_derivatives(c, t)
        up = node_covariances(c, t + h)
        dn = node_covariances(c, t - h)
        assert der.a1 == pytest.approx((up.s11 - dn.s11) / (2 * h), rel=1e-6)
        assert der.a2 == pytest.approx((up.s22 - dn.s22) / (2 * h), rel=1e-6)


class TestNodeQfi:
    def test_decoupled_equals_thermal_qfi(self):
        c = ChainSpec(N=6, omega_sq=1.0, couplings=(0.0,) * 6)
        ref = qfi_from_derivatives(
            thermal_mode_covariance(1.0, 0.8), thermal_mode_derivatives(1.0, 0.8)
        )
        assert node_qfi(c, 0.8) == pytest.approx(ref, rel=1e-12)

    def test_gapless_inverse_square_low_t(self):
        # fig3b recipe: log-log slope -2 over T in [1e-3, 1e-2]; the prefactor
        # matches the free-probe law F = 1/(2 T^2)
        c = gapless_fig3_chain()
        ts = np.geomspace(1e-3, 1e-2, 25)
        fs = [node_qfi(c, float(t), regularize_gapless=True) for t in ts]
        fit = fit_power_law(QfiCurve(tuple(ts), tuple(fs)))
        assert fit.exponent_or_gap == pytest.approx(-2.0, abs=0.1)
        assert 2.0 * ts[0] ** 2 * fs[0] == pytest.approx(1.0, abs=0.05)

    def test_gapped_exponential_crossover_window(self):
        # in the crossover window beta*Delta in [2, 6.5] the semilog slope
        # tracks -Delta; much deeper the decay steepens toward -2*Delta
        # because the node marginal stays full rank (see decisions ledger)
        c = gapped_fig3_chain()
        ts = np.geomspace(1.0 / 650.0, 1.0 / 200.0, 25)
        fs = [node_qfi(c, float(t)) for t in ts]
        fit = fit_exponential_gap(QfiCurve(tuple(ts), tuple(fs)))
        assert fit.exponent_or_gap == pytest.approx(0.01, rel=0.1)

    def test_gapped_deep_tail_steepens(self):
        c = gapped_fig3_chain()
        ts = np.geomspace(1.0 / 1500.0, 1.0 / 200.0, 30)
        fs = [node_qfi(c, float(t)) for t in ts]
        fit = fit_exponential_gap(QfiCurve(tuple(ts), tuple(fs)))
        assert 0.013 <= fit.exponent_or_gap <= 0.016

    def test_gapless_dominates_gapped(self):
        gapped = gapped_fig3_chain()
        gapless = gapless_fig3_chain()
        for t in np.geomspace(1e-4, 1e-2, 8):
            f_gapless = node_qfi(gapless, float(t), regularize_gapless=True)
            f_gapped = node_qfi(gapped, float(t))
            assert f_gapless >= f_gapped


class TestGapErrorScaling:
    @pytest.mark.parametrize(
        "s,lo,hi",
        [
            (3.0, -2.1, -1.9),
            (2.5, -2.1, -1.9),
            (2.0, -2.2, -1.8),
            (1.5, -1.6, -1.4),
            (1.2, -1.3, -1.1),
        ],
    )
    def test_exponent_table(self, s, lo, hi):
        fit = gap_error_scaling(s, 1.0, [50, 100, 200, 400, 800])
        assert lo <= fit.exponent_or_gap <= hi

    def test_needs_four_sizes(self):
        from qthermo import FitError

        with pytest.raises(FitError):
            gap_error_scaling(3.0, 1.0, [50, 100, 200])


class TestCouplingsCsv:
    def test_round_trip(self, tmp_path):
        c = power_law_chain(10, 1.5, G=0.7, t=2.0)
        path = tmp_path / "couplings.csv"
        write_couplings_csv(c, str(path))
        back = read_couplings_csv(str(path), omega_sq=1.5)
        assert back.couplings == c.couplings
        assert back.omega_sq == 1.5
