import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from clickspace.detector import DetectorArray, click_distribution, click_distribution_coherent
from clickspace.phasespace import (
    ScanRow,
    evaluate,
    make_estimate,
    quasiprob,
    quasiprob_genfn,
    reference_quasiprob,
    scan_line,
    significance_vs_s,
    stderr_exact,
    stderr_paper,
    weight,
)
from clickspace.states import Coherent, Fock, SqueezedVacuum, Thermal, photon_distribution

SATURATION = 2 / math.pi * (-11 / 9) ** 6


def clicks_of(state, N, eta, alpha=0j):
    return click_distribution(photon_distribution(state, alpha), DetectorArray(N, eta))


class TestWeight:
    def test_values(self):
        assert weight(0, 1) == -1
        assert weight(-1, 1) == 0
        assert weight(0, 0.9) == pytest.approx(-11 / 9, rel=1e-15)

    @pytest.mark.parametrize("s", [1.0, 1.2])
    def test_domain(self, s):
        with pytest.raises(ValueError):
            weight(s, 0.9)


class TestQuasiprob:
    @pytest.mark.parametrize("s", [-1, -0.3, 0, 0.6])
    @pytest.mark.parametrize("N,eta", [(2, 0.5), (6, 0.9)])
    def test_vacuum(self, s, N, eta):
        c = clicks_of(Fock(0), N, eta)
        assert quasiprob(c, s) == pytest.approx(2 / (math.pi * (1 - s)), rel=1e-15)

    def test_single_photon(self):
        assert quasiprob(clicks_of(Fock(1), 2, 1.0), 0) == pytest.approx(-2 / math.pi, abs=1e-12)

    def test_saturation_value(self):
        c = click_distribution_coherent(1e3, DetectorArray(6, 0.9))
        assert quasiprob(c, 0) == pytest.approx(SATURATION, rel=1e-14)
        assert SATURATION == pytest.approx(2 / math.pi * 1771561 / 531441, rel=1e-15)


class TestGeneratingFunction:
    def test_vacuum(self):
        pnd = photon_distribution(Fock(0), 0)
        assert quasiprob_genfn(pnd, DetectorArray(4, 0.7), -0.5) == pytest.approx(2 / (1.5 * math.pi), rel=1e-14)

    def test_single_photon(self):
        pnd = photon_distribution(Fock(1), 0)
        assert quasiprob_genfn(pnd, DetectorArray(2, 1.0), 0) == pytest.approx(-2 / math.pi, abs=1e-12)

    def test_squeezed_point(self):
        pnd = photon_distribution(SqueezedVacuum(1.0), 0.8)
        det = DetectorArray(6, 0.9)
        assert quasiprob_genfn(pnd, det, 0) == pytest.approx(quasiprob(click_distribution(pnd, det), 0), abs=1e-9)

    @pytest.mark.parametrize("state", [Fock(1), Fock(3), SqueezedVacuum(1.0), Coherent(0.5 + 0.5j), Thermal(1.0)])
    @pytest.mark.parametrize("N", [2, 4, 6, 8])
    @pytest.mark.parametrize("eta", [0.6, 0.9])
    def test_route_equivalence_grid(self, state, N, eta):
        det = DetectorArray(N, eta)
        for alpha in (0, 0.8, -1.1 + 0.4j):
            pnd = photon_distribution(state, alpha)
            c = click_distribution(pnd, det)
            for s in (-0.5, 0, 0.5):
                assert quasiprob_genfn(pnd, det, s) == pytest.approx(quasiprob(c, s), abs=1e-9)


class TestErrors:
    def test_vacuum_has_no_spread(self):
        c = clicks_of(Fock(0), 4, 0.8)
        assert stderr_paper(c, 0, 100) == 0
        assert stderr_exact(c, 0, 100) == 0

    def test_inverse_sqrt_nu(self):
        c = clicks_of(Fock(1), 4, 0.9)
        for f in (stderr_paper, stderr_exact):
            assert f(c, 0, 10**6) == pytest.approx(f(c, 0, 10**4) / 10, rel=1e-13)

    @pytest.mark.parametrize("state", [Fock(1), SqueezedVacuum(1.0), Thermal(0.5)])
    def test_exact_is_population_std(self, state):
        c = clicks_of(state, 5, 0.8, 0.3)
        s = 0.25
        u = [2 / (math.pi * (1 - s)) * weight(s, 0.8) ** k for k in range(6)]
        mean = sum(uk * ck for uk, ck in zip(u, c.c))
        var = sum(ck * (uk - mean) ** 2 for uk, ck in zip(u, c.c))
        assert stderr_exact(c, s, 1) == pytest.approx(math.sqrt(var), rel=1e-10)

    def test_nu_must_be_positive(self):
        c = clicks_of(Fock(1), 4, 0.9)
        with pytest.raises(ValueError):
            stderr_paper(c, 0, 0)

    def test_significance_definition(self):
        est = evaluate(SqueezedVacuum(1.0), DetectorArray(6, 0.9), 0.8, 0, 10**4)
        assert est.significance == est.value / est.stderr_paper

    def test_deterministic_outcome_has_no_significance(self):
        est = make_estimate(clicks_of(Fock(0), 4, 0.9), 0, 10**4)
        assert est.significance is None and est.value > 0


class TestScans:
    def test_vacuum_positive(self):
        rows = scan_line(Fock(0), DetectorArray(4, 0.8), 0, 10**4, (-2, 2, 21))
        assert all(r.p_value > 0 for r in rows)
        assert [r.re_alpha for r in rows] == pytest.approx(np.linspace(-2, 2, 21).tolist())

    def test_squeezed_negativity(self):
        rows = scan_line(SqueezedVacuum(1.0), DetectorArray(6, 0.9), 0, 10**4, (-2, 2, 81))
        assert min(r.p_value for r in rows) < 0

    def test_squeezed_saturation(self):
        # the approach to c_N -> 1 is slow: within 1% only beyond Re(alpha) ~ 6.6
        rows = scan_line(SqueezedVacuum(1.0), DetectorArray(6, 0.9), 0, 10**4, (4, 8, 21))
        values = np.array([r.p_value for r in rows])
        assert np.all(np.diff(values) > 0)
        assert np.all(values < SATURATION)
        tail = [r.p_value for r in rows if r.re_alpha >= 7]
        assert all(abs(v / SATURATION - 1) < 0.01 for v in tail)

    def test_threaded_scan_matches_serial(self):
        args = (SqueezedVacuum(0.7), DetectorArray(4, 0.8), -0.2, 10**4, (-1, 1, 17), 0.3)
        assert scan_line(*args, threads=4) == scan_line(*args, threads=1)

    def test_rows_are_complete(self):
        (row,) = scan_line(Fock(1), DetectorArray(4, 0.9), 0, 100, (0.5, 0.5, 1), -0.25)
        assert isinstance(row, ScanRow)
        assert (row.re_alpha, row.im_alpha, row.N, row.eta, row.nu) == (0.5, -0.25, 4, 0.9, 100)

    def test_significance_vs_s_fock(self):
        rows = significance_vs_s(Fock(1), DetectorArray(4, 0.9), 0, 10**4, [-1, -0.5, 0, 0.5])
        sig = [r.significance for r in rows]
        assert all(a > b for a, b in zip(sig, sig[1:]))

    def test_efficiency_helps(self):
        lo = significance_vs_s(Fock(1), DetectorArray(4, 0.6), 0, 10**4, [0])[0].significance
        hi = significance_vs_s(Fock(1), DetectorArray(4, 0.9), 0, 10**4, [0])[0].significance
        assert abs(hi) > abs(lo)

    def test_vacuum_significance_not_applicable(self):
        rows = significance_vs_s(Fock(0), DetectorArray(4, 0.9), 0, 10**4, [-0.5, 0, 0.5])
        assert all(r.significance is None and r.stderr_paper == 0 and r.p_value > 0 for r in rows)


class TestReference:
    def test_examples(self):
        assert reference_quasiprob(Fock(0), 0, 0) == pytest.approx(2 / math.pi)
        assert reference_quasiprob(Fock(1), 0, 0) == pytest.approx(-2 / math.pi)
        for s in (-1, 0, 0.7):
            assert reference_quasiprob(Coherent(0.5), 0.5, s) == pytest.approx(2 / (math.pi * (1 - s)))

    def test_fock_parity_at_origin(self):
        for n in range(6):
            assert reference_quasiprob(Fock(n), 0, 0) == pytest.approx(2 / math.pi * (-1) ** n)

    @pytest.mark.parametrize("n", [0, 1, 3])
    def test_fock_husimi_limit(self, n):
        for a in (0.3, 1.1):
            assert reference_quasiprob(Fock(n), a, -1 + 1e-7) == pytest.approx(
                reference_quasiprob(Fock(n), a, -1), rel=1e-5
            )

    @pytest.mark.parametrize(
        "state,s", [(Fock(2), 0), (Fock(1), -0.5), (SqueezedVacuum(0.8), 0), (SqueezedVacuum(0.5), -0.7)]
    )
    def test_normalised(self, state, s):
        f = lambda y, x: reference_quasiprob(state, complex(x, y), s)
        total, _ = integrate.dblquad(f, -6, 6, -6, 6, epsabs=1e-10)
        assert total == pytest.approx(1.0, abs=1e-7)

    def test_unsupported(self):
        with pytest.raises(ValueError):
            reference_quasiprob(Fock(1), 0, 0.5)
        with pytest.raises(ValueError):
            reference_quasiprob(Thermal(1.0), 0, 0)

    @pytest.mark.parametrize("alpha", [0, 0.4, 0.4j, 0.3 - 0.5j])
    def test_squeezed_axis_convention(self, alpha):
        # large arrays approach the Wigner function, fixing which axis is squeezed
        state = SqueezedVacuum(0.5)
        p = quasiprob(clicks_of(state, 256, 0.75, alpha), 0)
        assert p == pytest.approx(reference_quasiprob(state, alpha, 0), abs=5e-3)


class TestClassicalPositivity:
    @settings(max_examples=60, deadline=None)
    @given(
        st.sampled_from([2, 4, 6, 8, 10]),
        st.sampled_from([0.3, 0.6, 0.9, 1.0]),
        st.floats(-1, 0.9),
        st.one_of(
            st.builds(Coherent, st.complex_numbers(max_magnitude=2.5)),
            st.builds(Thermal, st.floats(0, 4)),
        ),
        st.complex_numbers(max_magnitude=3),
    )
    def test_even_arrays_never_negative(self, N, eta, s, state, alpha):
        assert quasiprob(clicks_of(state, N, eta, alpha), s) >= -1e-10

    def test_odd_arrays_can_go_negative(self):
        # with odd N the positivity argument fails even for the vacuum
        c = click_distribution_coherent(2.0, DetectorArray(3, 0.9))
        assert quasiprob(c, 0) < 0


def test_convergence_rate():
    ref = reference_quasiprob(Coherent(0.5), 0, 0)
    err = [abs(quasiprob(clicks_of(Coherent(0.5), N, 0.8), 0) - ref) for N in (128, 256)]
    assert 1.7 <= err[0] / err[1] <= 2.3
