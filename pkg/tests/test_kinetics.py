import numpy as np
import pytest
from scipy.linalg import expm

from spinloop import (
    DegenerateModelError,
    InvalidInputError,
    RadiativeInputs,
    RateModel,
    build_generator,
    k45_off_resonant,
    load_preset,
    odmr_contrast,
    pl_lifetime,
    radiative_rate,
    steady_state,
    transient,
)


def pl1_model(**kw):
    return load_preset("pl1").rate_model.with_rates(**kw)


class TestRadiativeRate:
    def test_pl1(self):
        rate = radiative_rate(RadiativeInputs(2.647, 1.15, 7.36))
        assert rate == pytest.approx(35.6, rel=0.01)
        tau, _ = pl_lifetime(rate, 0.0)
        assert tau == pytest.approx(28.1, rel=0.01)

    def test_plx1(self):
        rate = radiative_rate(RadiativeInputs(2.647, 1.09, 8.44))
        assert rate == pytest.approx(40.3, rel=0.01)
        tau, _ = pl_lifetime(rate, 0.0)
        assert tau == pytest.approx(24.8, rel=0.01)

    def test_zero_dipole(self):
        assert radiative_rate(RadiativeInputs(2.647, 1.15, 0.0)) == 0.0

    def test_cubic_energy_scaling(self):
        a = radiative_rate(RadiativeInputs(2.0, 1.0, 5.0))
        b = radiative_rate(RadiativeInputs(2.0, 2.0, 5.0))
        assert b == pytest.approx(8.0 * a, rel=1e-12)


class TestK45:
    def test_pl1(self):
        assert k45_off_resonant(13.60, 6.85, 0.46) == pytest.approx(6.94)

    def test_plx1(self):
        assert k45_off_resonant(0.95, 0.03, 0.0) == pytest.approx(0.25, abs=0.01)

    def test_zero(self):
        assert k45_off_resonant(0.0, 0.0, 0.0) == 0.0


class TestGenerator:
    def test_zero_rates(self):
        model = RateModel(k31=0, k42=0, k45=0, k51=0, k52=0, p13=0, p24=0)
        assert np.array_equal(build_generator(model), np.zeros((6, 6)))

    def test_single_rate_structure(self):
        model = RateModel(k31=7.0, k42=0, k45=0, k51=0, k52=0, p13=0, p24=0)
        gen = build_generator(model)
        assert gen[0, 2] == 7.0
        assert gen[2, 2] == -7.0
        assert np.count_nonzero(gen) == 2

    def test_column_conservation(self):
        gen = build_generator(pl1_model(k_ir=0.3, k_ic=0.1))
        sums = gen.sum(axis=0)
        assert np.abs(sums).max() < 1e-12 * np.abs(gen).max()

    def test_ionization_routes_to_sink(self):
        gen = build_generator(pl1_model(k_ir=2.0))
        assert gen[5, 2] == 2.0
        assert gen[5, 3] == 2.0


class TestSteadyState:
    def test_no_pump_initial_condition(self):
        model = pl1_model(p13=0.0, p24=0.0)
        res = steady_state(model)
        np.testing.assert_allclose(res.populations[:2], [0.5, 0.5])
        assert res.populations[2:].sum() == 0.0

    def test_two_level_cycle(self):
        model = RateModel(k31=10.0, k42=0.0, k45=0.0, k51=0.0, k52=0.0,
                          p13=2.0, p24=0.0)
        res = steady_state(model)
        n1, n3 = res.populations[0], res.populations[2]
        assert n3 / n1 == pytest.approx(2.0 / 10.0, rel=1e-9)

    def test_spin_polarization_and_expm_oracle(self):
        model = pl1_model()
        res = steady_state(model)
        assert res.populations[0] > res.populations[1]
        # matrix-exponential propagation to 1 ms from an unpolarized start
        gen = build_generator(model) * 1e-3  # 1/ns
        start = np.array([0.5, 0.5, 0.0, 0.0, 0.0, 0.0])
        prop = expm(gen * 1e6) @ start
        np.testing.assert_allclose(prop, res.populations, atol=1e-6)

    def test_fixed_point(self):
        model = pl1_model()
        gen = build_generator(model)
        res = steady_state(model)
        assert np.abs(gen @ res.populations).max() < 1e-9 * np.abs(gen).max()

    def test_populations_normalized(self):
        res = steady_state(pl1_model())
        assert res.populations.sum() == pytest.approx(1.0, abs=1e-9)
        assert res.populations.min() >= 0.0

    def test_leaky_model_drains_to_sink(self):
        model = pl1_model(k_ir=1.0)
        res = steady_state(model)
        assert res.populations[5] > 0.99

    def test_degenerate_model(self):
        # two disconnected conserving cycles: 1<->3 and 2<->4
        model = RateModel(k31=5.0, k42=5.0, k45=0.0, k51=0.0, k52=0.0,
                          p13=1.0, p24=1.0)
        with pytest.raises(DegenerateModelError):
            steady_state(model, resolve_degenerate=False)
        # the default resolves the freedom from the ground-state split
        res = steady_state(model)
        n1, n3 = res.populations[0], res.populations[2]
        assert n3 / n1 == pytest.approx(1.0 / 5.0, rel=1e-9)
        assert res.populations.sum() == pytest.approx(1.0, abs=1e-9)


class TestTransient:
    def test_pure_exponential_decay(self):
        model = RateModel(k31=8.0, k42=0.0, k45=0.0, k51=0.0, k52=0.0,
                          p13=0.0, p24=0.0)
        t = np.linspace(0.0, 400.0, 41)
        res = transient(model, [0.0, 0.0, 1.0, 0.0, 0.0], t)
        want = np.exp(-8.0e-3 * t)
        np.testing.assert_allclose(res.trajectory[:, 2], want, atol=1e-8)

    def test_branch_decay_constant(self):
        # |4> decays with k42 + k45; PL1 rates give 1/42.54 MHz
        model = pl1_model(p13=0.0, p24=0.0)
        t = np.linspace(0.0, 100.0, 11)
        res = transient(model, [0.0, 0.0, 0.0, 1.0, 0.0], t)
        ktot = (35.60 + 6.94) * 1e-3
        np.testing.assert_allclose(
            res.trajectory[:, 3], np.exp(-ktot * t), atol=1e-8
        )
        assert 1.0 / (35.60 + 6.94) == pytest.approx(1.0 / 42.54, rel=1e-3)

    def test_probability_conserved_with_sink(self):
        model = pl1_model(k_ir=0.5)
        t = np.linspace(0.0, 500.0, 26)
        res = transient(model, [0.5, 0.5, 0.0, 0.0, 0.0], t)
        totals = res.trajectory.sum(axis=1)
        np.testing.assert_allclose(totals, 1.0, atol=1e-8)
        assert res.trajectory[-1, 5] > 0.0

    def test_matches_steady_state(self):
        model = pl1_model()
        rates = [model.k31, model.k42, model.k45, model.k51, model.k52,
                 model.p13, model.p24]
        t_end = 100.0 / (min(r for r in rates if r > 0) * 1e-3)
        res = transient(model, [0.5, 0.5, 0.0, 0.0, 0.0],
                        np.linspace(0.0, t_end, 51))
        ss = steady_state(model)
        np.testing.assert_allclose(
            res.populations, ss.populations, atol=1e-6
        )

    def test_pl_observable(self):
        model = pl1_model()
        t = np.linspace(0.0, 100.0, 6)
        res = transient(model, [0.0, 0.0, 1.0, 0.0, 0.0], t)
        np.testing.assert_allclose(
            res.pl_mhz,
            model.k31 * res.trajectory[:, 2] + model.k42 * res.trajectory[:, 3],
        )

    def test_bad_initial(self):
        model = pl1_model()
        with pytest.raises(InvalidInputError):
            transient(model, [0.7, 0.7, 0, 0, 0], np.linspace(0, 1, 3))


class TestLifetimeAndYield:
    def test_pl1_quantum_yield(self):
        tau, eta = pl_lifetime(35.60, 6.94)
        assert eta == pytest.approx(0.8386, abs=0.005)

    def test_plx1_quantum_yield(self):
        tau, eta = pl_lifetime(40.31, 0.25)
        assert eta == pytest.approx(0.9941, abs=0.005)

    def test_radiative_only(self):
        tau, eta = pl_lifetime(1.0, 0.0)
        assert tau == pytest.approx(1000.0)
        assert eta == 1.0

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            pl_lifetime(0.0, 1.0)


class TestContrast:
    def test_pl1(self):
        c = odmr_contrast(35.60, 35.60, 6.94)
        assert 100 * c == pytest.approx(-16.31, abs=0.05)

    def test_plx1(self):
        c = odmr_contrast(40.31, 40.31, 0.25)
        assert 100 * c == pytest.approx(-0.6, abs=0.05)

    def test_balanced_channels(self):
        assert odmr_contrast(30.0, 30.0, 0.0, k35=0.0) == 0.0

    def test_sign_under_random_rates(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            k_rad = rng.uniform(1.0, 100.0)
            k45 = rng.uniform(0.01, 50.0)
            k35 = rng.uniform(0.0, 1.0) * k45  # k35 < k45
            c = odmr_contrast(k_rad, k_rad, k45, k35=k35)
            assert c < 0.0

    def test_monotone_in_k45(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            k_rad = rng.uniform(1.0, 100.0)
            k45 = np.sort(rng.uniform(0.01, 50.0, size=5))
            values = [abs(odmr_contrast(k_rad, k_rad, k)) for k in k45]
            assert all(b > a for a, b in zip(values, values[1:]))
