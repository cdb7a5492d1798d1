import io

import numpy as np
import pytest

from spinloop import (
    CcdModel,
    HuangRhysModel,
    InvalidInputError,
    ResolutionError,
    build_lineshape,
    ccd_crossing,
    evaluate_shifted,
)
from spinloop.spectral import force_constant

from oracles import direct_two_mode_lineshape


def trapz(y, x):
    fn = getattr(np, "trapezoid", None) or np.trapz
    return float(fn(y, x))


class TestLineshape:
    def test_zero_s_single_gaussian(self):
        shape = build_lineshape(
            HuangRhysModel(modes=((0.0, 50.0),), sigma=8.0, e_max=300.0)
        )
        assert abs(trapz(shape.values, shape.energies) - 1.0) < 1e-6
        peak = shape.energies[np.argmax(shape.values)]
        assert abs(peak) <= shape.energies[1] - shape.energies[0]
        want = 1.0 / (8.0 * np.sqrt(2 * np.pi))
        assert shape.at(0.0) == pytest.approx(want, rel=1e-3)

    def test_poisson_weights_s1(self):
        # S = 1: the one-phonon line carries the same weight as the ZPL
        shape = build_lineshape(
            HuangRhysModel(modes=((1.0, 50.0),), sigma=3.0, e_max=400.0)
        )
        assert shape.at(50.0) == pytest.approx(shape.at(0.0), rel=1e-6)
        assert shape.at(100.0) == pytest.approx(0.5 * shape.at(0.0), rel=1e-4)

    def test_two_mode_against_direct_sum(self):
        model = HuangRhysModel(
            modes=((0.5, 30.0), (0.5, 60.0)), sigma=5.0, de=0.25, e_max=400.0
        )
        shape = build_lineshape(model)
        ref = direct_two_mode_lineshape(
            0.5, 30.0, 0.5, 60.0, 5.0, shape.energies
        )
        assert np.abs(shape.values - ref).max() < 1e-10

    def test_normalization_under_refinement(self):
        coarse = build_lineshape(
            HuangRhysModel(modes=((2.0, 40.0),), sigma=6.0, de=0.5)
        )
        fine = build_lineshape(
            HuangRhysModel(modes=((2.0, 40.0),), sigma=6.0, de=0.25)
        )
        assert abs(trapz(fine.values, fine.energies) - 1.0) < 1e-4
        sel = coarse.values > 1e-4
        interp = fine.at(coarse.energies[sel])
        assert np.abs(interp / coarse.values[sel] - 1.0).max() < 0.01

    def test_first_moment_identity(self):
        for s, hw in ((0.7, 35.0), (2.5, 50.0)):
            shape = build_lineshape(
                HuangRhysModel(modes=((s, hw),), sigma=7.0, e_max=800.0)
            )
            assert shape.first_moment() == pytest.approx(s * hw, rel=5e-3)

    def test_convolution_order_invariance(self):
        modes = [(0.4, 25.0), (0.8, 45.0), (0.2, 70.0)]
        shapes = []
        for order in ((0, 1, 2), (2, 0, 1), (1, 2, 0)):
            model = HuangRhysModel(
                modes=tuple(modes[k] for k in order), sigma=6.0, e_max=500.0
            )
            shapes.append(build_lineshape(model).values)
        assert np.abs(shapes[0] - shapes[1]).max() < 1e-10
        assert np.abs(shapes[0] - shapes[2]).max() < 1e-10

    def test_boundary_decay(self):
        shape = build_lineshape(
            HuangRhysModel(modes=((1.5, 40.0),), sigma=8.0, e_max=600.0)
        )
        assert shape.values[0] < 1e-8
        assert shape.values[-1] < 1e-8

    def test_resolution_error(self):
        with pytest.raises(ResolutionError):
            build_lineshape(HuangRhysModel(modes=((1.0, 40.0),), sigma=0.9))

    def test_bad_model(self):
        with pytest.raises(InvalidInputError):
            HuangRhysModel(modes=((-0.1, 40.0),), sigma=5.0)
        with pytest.raises(InvalidInputError):
            HuangRhysModel(modes=((1.0, 0.0),), sigma=5.0)

    def test_csv(self):
        shape = build_lineshape(
            HuangRhysModel(modes=((0.5, 40.0),), sigma=5.0, e_max=100.0)
        )
        buf = io.StringIO()
        shape.write_csv(buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "E_meV,density_per_meV"
        assert len(lines) == 1 + shape.energies.size


class TestEvaluateShifted:
    @pytest.fixture()
    def shape(self):
        return build_lineshape(
            HuangRhysModel(modes=((1.0, 46.21),), sigma=10.0, e_max=500.0)
        )

    def test_zero_temperature_clamp(self, shape):
        assert evaluate_shifted(shape, 30.0, 46.21) == 0.0
        assert evaluate_shifted(shape, -5.0, 0.0) == 0.0

    def test_grid_node_exact(self, shape):
        k = np.searchsorted(shape.energies, 60.0)
        node = shape.energies[k]
        assert evaluate_shifted(shape, node, 0.0) == shape.values[k]

    def test_pl1_default_positive_and_grid_stable(self):
        from spinloop import load_preset

        model = load_preset("pl1").lineshape_upper
        shape = build_lineshape(model)
        v = evaluate_shifted(shape, 160.0, 46.21)
        assert v > 0
        import dataclasses

        finer = build_lineshape(dataclasses.replace(model, de=model.de / 2))
        assert evaluate_shifted(finer, 160.0, 46.21) == pytest.approx(
            v, rel=0.01
        )


class TestCcd:
    def test_no_crossing_large_gap(self):
        model = CcdModel(
            delta_q=0.703, delta_e_ev=1.1, hw_ground=36.6, hw_excited=36.6
        )
        report = ccd_crossing(model, 3.0)
        assert report.none
        # analytic: equal curvature surfaces cross at
        # (delta_e + k dq^2 / 2) / (k dq), far outside the window
        k = force_constant(36.6)
        q_cross = (1100.0 + 0.5 * k * 0.703**2) / (k * 0.703)
        assert q_cross > 3.0
        wide = ccd_crossing(model, q_cross + 1.0)
        assert not wide.none

    def test_symmetric_intersection(self):
        model = CcdModel(
            delta_q=1.0, delta_e_ev=1e-12, hw_ground=40.0, hw_excited=40.0
        )
        report = ccd_crossing(model, 3.0)
        assert len(report.crossings) == 1
        assert report.crossings[0] == pytest.approx(0.5, abs=1e-6)

    def test_two_roots_with_unequal_curvature(self):
        # steep ground surface overtakes the shallow excited one twice
        model = CcdModel(
            delta_q=0.5, delta_e_ev=0.05, hw_ground=60.0, hw_excited=20.0
        )
        report = ccd_crossing(model, 10.0)
        assert len(report.crossings) == 2
        k_g, k_e = report.k_ground, report.k_excited
        for q in report.crossings:
            lhs = 0.5 * k_g * q**2
            rhs = 50.0 + 0.5 * k_e * (q - 0.5) ** 2
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_huang_rhys_factor(self):
        model = CcdModel(
            delta_q=0.703, delta_e_ev=1.1, hw_ground=36.6, hw_excited=36.6
        )
        report = ccd_crossing(model, 3.0)
        want = force_constant(36.6) * 0.703**2 / (2 * 36.6)
        assert report.huang_rhys == pytest.approx(want)
        assert 1.0 < report.huang_rhys < 4.0  # physically sensible

    def test_invalid_inputs(self):
        with pytest.raises(InvalidInputError):
            CcdModel(delta_q=0.7, delta_e_ev=1.0, hw_ground=0.0,
                     hw_excited=40.0)
        model = CcdModel(
            delta_q=0.7, delta_e_ev=1.0, hw_ground=40.0, hw_excited=40.0
        )
        with pytest.raises(InvalidInputError):
            ccd_crossing(model, 0.0)
