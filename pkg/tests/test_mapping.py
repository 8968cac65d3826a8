"""Tests for chain<->star mappings, discretized-reservoir reconstruction,
and probe delocalization."""

import math

import numpy as np
import pytest

from qthermo import (
    ChainSpec,
    DiscreteModes,
    LorentzDrude,
    StarSpec,
    chain_spectrum,
    chain_to_star,
    clm_normal_modes,
    discretize_clm,
    gapless_frequency_sq,
    power_law_chain,
    probe_delocalization,
    star_coupling_scaling,
    star_to_chain,
)


def gapless_chain(N=100, t=2.5, G=1.0):
    base = power_law_chain(N, 0.0, G=G, t=t)
    return ChainSpec(
        N=N, omega_sq=gapless_frequency_sq(N, base.couplings), couplings=base.couplings
    )


def gapped_chain(N=100, delta=0.5, t=2.5):
    base = power_law_chain(N, 0.0, G=1.0, t=t)
    om2 = gapless_frequency_sq(N, base.couplings) + delta * delta
    return ChainSpec(N=N, omega_sq=om2, couplings=base.couplings)


def random_bounded_chain(rng, max_half=100):
    # sign-mixed couplings: clear the true spectrum minimum, wherever it sits
    n = int(rng.integers(3, max_half + 1))
    g = rng.normal(0.0, 1.0, n) / np.arange(1, n + 1) ** 1.5
    k = np.arange(1, n + 1, dtype=float)
    a = np.arange(0, n + 1, dtype=float)
    base = 2.0 * (g[:, None] * np.cos(2.0 * np.pi * np.outer(k, a) / (2 * n + 1))).sum(axis=0)
    om2 = -float(np.min(base)) + float(np.abs(rng.normal(0.5, 0.5))) + 0.05
    return ChainSpec(N=n, omega_sq=om2, couplings=tuple(g))


class TestChainToStar:
    def test_decoupled_chain_decouples_everything(self):
        c = ChainSpec(N=12, omega_sq=1.0, couplings=(0.0,) * 12)
        star = chain_to_star(c)
        assert star.decoupled_count == 24
        assert len(star.coupled_modes) == 0

    def test_reflection_symmetry_count(self):
        star = chain_to_star(gapless_chain())
        assert len(star.coupled_modes) == 100
        assert star.decoupled_count == 100
        assert not star.warnings

    def test_gapless_renormalization_saturates_probe_frequency(self):
        c = gapless_chain()
        star = chain_to_star(c)
        assert star.renormalization_sq() == pytest.approx(c.omega_sq, rel=1e-6)
        # the star-picture bare probe frequency vanishes with the gap
        assert star.to_star_spec().omega0_sq <= 1e-6 * c.omega_sq

    def test_schur_bound_on_random_chains(self):
        rng = np.random.default_rng(11)
        found = 0
        while found < 25:
            c = random_bounded_chain(rng, max_half=40)
            if c is None:
                continue
            found += 1
            star = chain_to_star(c)
            assert star.renormalization_sq() <= c.omega_sq + 1e-9

    def test_gapless_lowest_mode_closes_with_size(self):
        lo_50 = chain_to_star(gapless_chain(N=50)).coupled_modes[0][0]
        lo_100 = chain_to_star(gapless_chain(N=100)).coupled_modes[0][0]
        lo_200 = chain_to_star(gapless_chain(N=200)).coupled_modes[0][0]
        assert lo_100 < lo_50 / 1.8
        assert lo_200 < lo_100 / 1.8

    def test_gapless_effective_density_is_ohmic(self):
        star = chain_to_star(gapless_chain())
        w = star.omega_array
        g = star.g_array
        dw = np.empty_like(w)
        dw[1:-1] = (w[2:] - w[:-2]) / 2.0
        dw[0] = w[1] - w[0]
        dw[-1] = w[-1] - w[-2]
        slope = np.pi * g**2 / (w * w * dw)
        window = slope[1:10]  # low-frequency window past the edge mode
        assert np.max(window) / np.min(window) < 1.15
        # the public binned estimator sees the same density
        from qthermo import evaluate

        modes = star.to_discrete()
        for i in (1, 4, 8):
            assert evaluate(modes, w[i]) == pytest.approx(slope[i] * w[i], rel=1e-12)

    def test_gapped_lowest_mode_stays_finite(self):
        star = chain_to_star(gapped_chain(delta=0.5))
        assert star.coupled_modes[0][0] > 0.4 * 0.5
        # and the effective density is not Ohmic: no weight below the gap
        assert star.coupled_modes[0][0] > 10 * chain_to_star(
            gapless_chain()
        ).coupled_modes[0][0]

    def test_cluster_couplings_stable_under_perturbation(self):
        c = gapless_chain(N=40)
        star_a = chain_to_star(c)
        nudged = ChainSpec(
            N=c.N,
            omega_sq=c.omega_sq * (1.0 + 1e-13),
            couplings=tuple(g * (1.0 + 1e-13) for g in c.couplings),
        )
        star_b = chain_to_star(nudged)
        ga = star_a.g_array**2
        gb = star_b.g_array**2
        assert ga.shape == gb.shape
        assert np.max(np.abs(ga - gb) / np.maximum(ga, 1e-300)) < 1e-8


class TestStarToChain:
    def test_round_trip_identity(self):
        rng = np.random.default_rng(5)
        done = 0
        while done < 20:
            c = random_bounded_chain(rng, max_half=60)
            if c is None:
                continue
            done += 1
            spec = chain_spectrum(c).array
            rec = star_to_chain(np.sort(spec)[::-1])
            back = chain_spectrum(rec.chain).array
            scale = float(np.max(np.abs(spec)))
            assert np.max(np.abs(np.sort(back) - np.sort(spec))) < 1e-8 * scale

    def test_validation(self):
        with pytest.raises(ValueError):
            star_to_chain([1.0, 2.0, 3.0])  # ascending
        with pytest.raises(ValueError):
            star_to_chain([3.0, 2.0, -1.0])  # negative

    def test_desk_scale_lorentz_drude_reconstruction(self):
        # frozen desk-scale variant of the published N=2000 run
        star = discretize_clm(LorentzDrude(0.1, 2.0), 400, 40.0, omega0_sq=0.04)
        freqs = clm_normal_modes(star)
        rec = star_to_chain(freqs)
        assert rec.physical
        assert rec.condition_number < 10.0
        assert math.sqrt(rec.chain.omega_sq) == pytest.approx(23.0796, abs=0.01)
        n_idx = np.arange(1, rec.chain.N + 1, dtype=float)
        g = rec.chain.coupling_array
        mask = (n_idx >= 10) & (n_idx <= 100) & (g > 0)
        from qthermo import loglog_fit

        fit = loglog_fit(n_idx[mask], g[mask])
        assert -fit.exponent_or_gap == pytest.approx(2.0, abs=0.2)


class TestClmNormalModes:
    def test_zero_coupling_returns_inputs(self):
        modes = DiscreteModes((1.0, 2.0, 3.0), (0.0, 0.0, 0.0))
        star = StarSpec(omega0_sq=6.25, omega_R_sq=0.0, sd=modes)
        ev = clm_normal_modes(star)
        assert np.allclose(np.sort(ev), np.sort([6.25, 1.0, 4.0, 9.0]))

    def test_single_mode_quadratic_oracle(self):
        w1, g, w0sq = 1.0, 0.1, 1.0
        modes = DiscreteModes((w1,), (g,))
        star = StarSpec(omega0_sq=w0sq, omega_R_sq=g * g / w1**2, sd=modes)
        ev = clm_normal_modes(star)
        a = w0sq + g * g / w1**2
        tr, det = a + w1 * w1, a * w1 * w1 - g * g
        disc = math.sqrt(tr * tr - 4.0 * det)
        oracle = [(tr + disc) / 2.0, (tr - disc) / 2.0]
        assert np.allclose(ev, oracle, rtol=1e-12)

    def test_cauchy_interlacing(self):
        rng = np.random.default_rng(2)
        w = np.sort(rng.uniform(0.5, 5.0, 12))
        g = rng.uniform(0.01, 0.3, 12)
        modes = DiscreteModes(tuple(w), tuple(g))
        star = StarSpec(
            omega0_sq=1.0, omega_R_sq=float(np.sum(g**2 / w**2)), sd=modes
        )
        ev = np.sort(clm_normal_modes(star))  # ascending, length 13
        bath = w * w
        for i in range(12):
            assert ev[i] < bath[i] < ev[i + 1]


class TestProbeDelocalization:
    def test_normalization_on_random_stars(self):
        rng = np.random.default_rng(9)
        for _ in range(5):
            n = int(rng.integers(4, 30))
            w = np.sort(rng.uniform(0.3, 4.0, n))
            w += np.arange(n) * 1e-6  # enforce distinctness
            g = rng.uniform(0.005, 0.2, n)
            modes = DiscreteModes(tuple(w), tuple(g))
            star = StarSpec(
                omega0_sq=0.7, omega_R_sq=float(np.sum(g**2 / w**2)), sd=modes
            )
            prof = probe_delocalization(star)
            assert prof.normalization == pytest.approx(1.0, abs=1e-10)
            assert len(prof.coefficients) == 2 * n + 1

    def test_discretized_reservoir_probe_spreads_over_chain(self):
        star = discretize_clm(LorentzDrude(0.1, 2.0), 150, 20.0, omega0_sq=0.04)
        prof = probe_delocalization(star)
        assert prof.normalization == pytest.approx(1.0, abs=1e-10)
        d = prof.array
        participation = 1.0 / float(np.sum(d**4))
        assert participation > 20.0  # spread over many of the 301 nodes
        assert np.sum(np.abs(d) > 1e-3 * np.max(np.abs(d))) > 150


class TestStarCouplingScaling:
    @pytest.mark.parametrize("s", [2.5, 1.0])
    def test_coupling_scaling_exponents(self, s):
        n_fit, size_fit = star_coupling_scaling(s, [50, 100, 200])
        assert n_fit.exponent_or_gap == pytest.approx(1.0, abs=0.15)
        assert size_fit.exponent_or_gap == pytest.approx(-1.5, abs=0.15)
