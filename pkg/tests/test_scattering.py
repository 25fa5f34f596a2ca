import numpy as np
import pytest

from entrate.closedforms import full_model_correlators_resonant, pair_rate_closed
from entrate.errors import UnstableSystemError
from entrate.gaussian import covariance_from_correlators, symplectic_spectrum
from entrate.models import (EffectiveModelParams, FullModelParams, drift_effective,
                            drift_full)
from entrate.scattering import (input_noise_matrix, intra_beam_correlator,
                                output_correlators, output_spectrum,
                                pair_rate_numeric, scattering_matrix,
                                scattering_matrices)
from entrate.verify import effective_scattering_oracle

KAPPA = 1.0


def full_drift(g=5.0, Gamma=1e-3, Delta=0.0, delta=0.0):
    return drift_full(FullModelParams(g=g, Gamma=Gamma, kappa=KAPPA,
                                      Delta=Delta, delta=delta))


def eff_drift(g=5.0, delta=10.0, Delta=0.0):
    return drift_effective(EffectiveModelParams(g=g, delta=delta, kappa=KAPPA,
                                                Delta=Delta))


class TestScatteringMatrix:
    def test_zero_coupling_is_pure_phase(self):
        d = eff_drift(g=0.0, Delta=0.4)
        for w in (-3.0, 0.0, 1.7):
            s = scattering_matrix(d, w).s
            np.testing.assert_allclose(np.abs(np.diag(s)), 1.0, atol=1e-12)
            np.testing.assert_allclose(s - np.diag(np.diag(s)),
                                       np.zeros((4, 4)), atol=1e-14)

    def test_identity_at_large_frequency(self):
        for d in (eff_drift(), full_drift(delta=10.0)):
            for w in (1e6, -1e6):
                s = scattering_matrix(d, w).s
                assert np.max(np.abs(s - np.eye(d.dim))) < 1e-5

    def test_matches_effective_closed_form(self):
        d = eff_drift()
        for w in (0.0, 0.37, -2.2, 11.0):
            ref = effective_scattering_oracle(5.0, KAPPA, 10.0, 0.0, w)
            sm = scattering_matrix(d, w)
            np.testing.assert_allclose(sm.s, ref, atol=1e-12)
            assert sm.flux_relation_defect() < 1e-10

    def test_flux_relation(self):
        rng = np.random.default_rng(42)
        checked = 0
        while checked < 20:
            g = rng.uniform(0.2, 6.0)
            delta = rng.uniform(-15.0, 15.0)
            big = rng.uniform(-1.0, 1.0)
            d = full_drift(g=g, Gamma=rng.uniform(1e-3, 0.2), Delta=big, delta=delta)
            from entrate.models import stability
            if not stability(d).stable:
                continue
            checked += 1
            k_sig = np.diag([1.0, -1.0] * 3)
            s = scattering_matrices(d, rng.uniform(-30, 30, size=20))
            dev = np.max(np.abs(s @ k_sig @ s.conj().transpose(0, 2, 1) - k_sig))
            assert dev < 1e-10

    def test_conjugation_pairing_between_opposite_frequencies(self):
        d = full_drift(delta=10.0, Delta=-0.2)
        perm = [1, 0, 3, 2, 5, 4]
        for w in (0.0, 1.3, -7.7):
            sp = scattering_matrix(d, w).s
            sm = scattering_matrix(d, -w).s
            np.testing.assert_allclose(sp, np.conj(sm)[np.ix_(perm, perm)],
                                       atol=1e-10)


class TestOutputCorrelators:
    def test_vacuum_at_zero_coupling(self):
        t = output_correlators(full_drift(g=0.0), 1.3, 50.0)
        assert t.n_plus == pytest.approx(0.5, abs=1e-14)
        assert t.n_minus == pytest.approx(0.5, abs=1e-14)
        assert abs(t.xi) < 1e-14

    def test_effective_occupation_equals_s14(self):
        d = eff_drift()
        for w in (0.0, 0.7, -4.0):
            s = scattering_matrix(d, w).s
            t = output_correlators(d, w)
            assert t.n_plus == pytest.approx(abs(s[0, 3]) ** 2 + 0.5, rel=1e-12)
            assert t.n_minus == pytest.approx(abs(s[0, 3]) ** 2 + 0.5, rel=1e-12)
            sm = scattering_matrix(d, -w).s
            assert t.xi == pytest.approx(s[0, 0] * sm[0, 3], rel=1e-12)

    def test_matches_resonant_closed_form(self):
        g, gamma = 5.0, 1e-3
        for delta in (-6.0, 2.0, 10.0):
            d = full_drift(g=g, Gamma=gamma, delta=delta)
            for w in (-7.0, 0.5, 3.0, 12.0):
                for n_th in (0.0, 50.0):
                    got = output_correlators(d, w, n_th)
                    ref = full_model_correlators_resonant(g, KAPPA, gamma, delta,
                                                          n_th, w)
                    assert got.n_plus == pytest.approx(ref.n_plus, rel=1e-9)
                    assert got.n_minus == pytest.approx(ref.n_minus, rel=1e-9)
                    assert got.xi == pytest.approx(ref.xi, rel=1e-9)

    def test_unstable_rejected(self):
        d = eff_drift(Delta=-0.5)
        with pytest.raises(UnstableSystemError):
            output_correlators(d, 0.0)

    def test_no_intra_beam_squeezing(self):
        rng = np.random.default_rng(9)
        d = full_drift(delta=10.0, Delta=-0.2)
        for w in rng.uniform(-20, 20, size=10):
            assert abs(intra_beam_correlator(d, float(w), 50.0, beam=1)) <= 1e-12
            assert abs(intra_beam_correlator(d, float(w), 50.0, beam=2)) <= 1e-12

    def test_output_covariance_physical(self):
        d = full_drift(delta=10.0, Delta=-0.2)
        for w in (-12.0, -1.0, 0.0, 3.3, 10.0):
            t = output_correlators(d, w, 50.0)
            nu = symplectic_spectrum(covariance_from_correlators(t))
            assert nu.min() >= 0.5 - 1e-9

    def test_effective_model_agrees_with_full_in_adiabatic_regime(self):
        # delta = 50k >> kappa, g: relative deviation of n_plus(0) <= 5%
        g, delta = 5.0, 50.0
        for big in (-0.2, -0.1, 0.0, 0.1, 0.2):
            d_full = full_drift(g=g, Gamma=1e-3, Delta=big, delta=delta)
            d_eff = eff_drift(g=g, delta=delta, Delta=big)
            n_full = output_correlators(d_full, 0.0, 0.0).n_plus
            n_eff = output_correlators(d_eff, 0.0, 0.0).n_plus
            assert abs(n_full - n_eff) / n_full <= 0.05

    def test_input_noise_matrix_layout(self):
        c = input_noise_matrix(6, 3.0)
        assert c[0, 1] == 1.0 and c[2, 3] == 1.0
        assert c[4, 5] == 4.0 and c[5, 4] == 3.0
        assert np.count_nonzero(c) == 4
        c4 = input_noise_matrix(4, 99.0)
        assert np.count_nonzero(c4) == 2


class TestOutputSpectrum:
    def test_zero_coupling_is_dark(self):
        pt = output_spectrum(full_drift(g=0.0), 0.3, 50.0)
        assert pt.total == pytest.approx(0.0, abs=1e-14)

    def test_parts_add_to_total(self):
        d = full_drift(delta=10.0)
        for w in (-3.0, 0.0, 5.0, 9.9995, 10.0):
            pt = output_spectrum(d, w, 50.0)
            assert pt.total == pytest.approx(pt.optical_part + pt.mechanical_part,
                                             rel=1e-10)
            assert pt.optical_part >= 0 and pt.mechanical_part >= 0

    def test_total_equals_n_plus(self):
        d = full_drift(delta=10.0, Delta=-0.2)
        for w in (0.0, 2.0, 10.0):
            pt = output_spectrum(d, w, 50.0)
            t = output_correlators(d, w, 50.0)
            assert pt.total == pytest.approx(t.n_plus - 0.5, rel=1e-10)

    def test_two_peak_structure_fig4a(self):
        # off-resonant mechanics: optical peak near 0, mechanical peak at delta
        delta = 10.0
        d = full_drift(delta=delta)
        near_zero = output_spectrum(d, 0.9, 50.0)
        at_delta = output_spectrum(d, delta, 50.0)
        between = output_spectrum(d, 5.0, 50.0)
        assert near_zero.total > 10 * between.total
        assert at_delta.total > 100 * between.total
        assert at_delta.mechanical_part > 1e4 * near_zero.mechanical_part

    def test_merged_peak_at_double_resonance(self):
        # delta = 0: single peak at omega = 0 with mechanical linewidth
        gamma = 1e-3
        d = full_drift(Gamma=gamma, delta=0.0)
        s0 = output_spectrum(d, 0.0, 50.0).total
        s_half = output_spectrum(d, gamma / 2, 50.0).total
        s_far = output_spectrum(d, 50 * gamma, 50.0).total
        assert s_half == pytest.approx(s0 / 2, rel=0.05)
        assert s_far < 0.02 * s0

    def test_effective_model_has_no_mechanical_part(self):
        pt = output_spectrum(eff_drift(), 0.5)
        assert pt.mechanical_part == 0.0
        assert pt.total > 0


class TestPairRate:
    def test_zero_coupling(self):
        p = EffectiveModelParams(g=0.0, delta=10.0, kappa=KAPPA)
        assert pair_rate_numeric(p) == pytest.approx(0.0, abs=1e-12)

    def test_reference_value(self):
        p = EffectiveModelParams(g=5.0, delta=10.0, kappa=KAPPA)
        assert pair_rate_numeric(p) == pytest.approx(0.78125, rel=1e-6)

    def test_matches_closed_form(self):
        for (g, delta, big) in [(5.0, 10.0, -0.2), (2.0, -8.0, 0.3), (1.0, 30.0, 0.0)]:
            p = EffectiveModelParams(g=g, delta=delta, kappa=KAPPA, Delta=big)
            assert pair_rate_numeric(p) == pytest.approx(
                pair_rate_closed(g, KAPPA, delta, big), rel=1e-6)

    def test_grows_towards_boundary(self):
        base = pair_rate_numeric(EffectiveModelParams(g=5.0, delta=10.0, kappa=KAPPA))
        near = pair_rate_numeric(EffectiveModelParams(g=5.0, delta=10.0, kappa=KAPPA,
                                                      Delta=-0.24))
        assert near > 10 * base

    def test_unstable_rejected(self):
        with pytest.raises(UnstableSystemError):
            pair_rate_numeric(EffectiveModelParams(g=5.0, delta=10.0, kappa=KAPPA,
                                                   Delta=-0.5))
