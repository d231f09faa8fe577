import math

import numpy as np
import pytest
from scipy.integrate import quad

from cavity_eit import (FieldRecord, NumericalGuardError, PulseSpec, TimeGrid, delay_time,
                        energy_fractions, gaussian_response_approx, g_matrix,
                        output_centroid_delay, propagate_pulse)
from cavity_eit.constants import C
from cavity_eit.pulse import (PULSE_HEADER, convolve_gaussian_response, output_broadening)

from conftest import make_device


@pytest.fixture(scope="module")
def fig3_records():
    from cavity_eit import preset

    dev = preset("fig3")
    tau_d = delay_time(dev)
    return dev, {m: propagate_pulse(dev, PulseSpec(dev.k0, m * tau_d)) for m in (1, 2, 4, 8)}


class TestPulseSpec:
    def test_rejects_non_positive_width(self):
        with pytest.raises(ValueError):
            PulseSpec(1.0, 0.0)

    def test_energy(self):
        p = PulseSpec(1.0, 2e-9, amplitude=3.0, center=1e-9)
        val, _ = quad(lambda t: abs(p.envelope(t)) ** 2, -5e-8, 5e-8, points=[1e-9])
        np.testing.assert_allclose(p.energy, val, rtol=1e-8)

    def test_half_width(self):
        p = PulseSpec(1.0, 1.0)
        np.testing.assert_allclose(p.envelope(2.0), math.exp(-1.0), rtol=1e-15)


class TestTimeGrid:
    def test_power_of_two(self):
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 1000)

    def test_default_span(self, fig3):
        tau_d = delay_time(fig3)
        grid = TimeGrid.default_for(fig3, PulseSpec(fig3.k0, tau_d))
        np.testing.assert_allclose(grid.start, -8 * tau_d)
        np.testing.assert_allclose(grid.stop, 24 * tau_d)
        assert grid.n == 2 ** 16

    def test_span_check(self, fig3):
        tau_d = delay_time(fig3)
        with pytest.raises(ValueError, match="span"):
            propagate_pulse(fig3, PulseSpec(fig3.k0, tau_d), TimeGrid(-2 * tau_d, 2 * tau_d))

    def test_bandwidth_check(self, fig3):
        tau_d = delay_time(fig3)
        with pytest.raises(ValueError, match="bandwidth"):
            propagate_pulse(fig3, PulseSpec(fig3.k0, tau_d), TimeGrid(-8 * tau_d, 24 * tau_d, 64))

    def test_containment_check(self, fig3):
        tau_d = delay_time(fig3)
        with pytest.raises(ValueError, match="not contained"):
            propagate_pulse(fig3, PulseSpec(fig3.k0, tau_d, center=20 * tau_d),
                            TimeGrid(-8 * tau_d, 24 * tau_d))

    def test_aliasing_guard(self, fig3):
        tau_d = delay_time(fig3)
        # pulse near the end of a short window: the delayed response wraps around
        grid = TimeGrid(-4 * tau_d, 8 * tau_d, 2 ** 14)
        pulse = PulseSpec(fig3.k0, 0.4 * tau_d, center=5 * tau_d)
        with pytest.raises(NumericalGuardError) as info:
            propagate_pulse(fig3, pulse, grid)
        assert info.value.guard == "aliasing"


class TestPropagation:
    def test_identity_filter(self, fig3):
        dev = make_device(0.0, 1e-6, geometry=fig3.geometry)
        pulse = PulseSpec(dev.k0, 2e-9)
        grid = TimeGrid(-3e-8, 3e-8, 2 ** 14)
        rec = propagate_pulse(dev, pulse, grid)
        np.testing.assert_allclose(rec.a_out, rec.a_in, atol=1e-9)
        assert output_centroid_delay(rec) == pytest.approx(0.0, abs=1e-20)

    def test_long_pulse_delay_and_shape(self, fig3_records):
        dev, recs = fig3_records
        rec = recs[4]
        tau_d = delay_time(dev)
        assert abs(output_centroid_delay(rec) - tau_d) < 0.1 * tau_d
        peak_ratio = np.max(np.abs(rec.a_out)) / np.max(np.abs(rec.a_in))
        assert 0.95 < peak_ratio <= 1.0

    def test_broadening(self, fig3_records):
        dev, recs = fig3_records
        tau_d = delay_time(dev)
        np.testing.assert_allclose(output_broadening(recs[4]), tau_d ** 2, rtol=0.2)

    def test_short_pulse_reflected(self, fig3_records):
        _, recs = fig3_records
        assert recs[1].reflected > 0.1
        np.testing.assert_allclose(recs[1].reflected, 0.171, rtol=0.01)

    def test_transmission_monotone_in_width(self, fig3_records):
        _, recs = fig3_records
        t = [recs[m].transmitted for m in (1, 2, 4, 8)]
        assert all(a < b for a, b in zip(t, t[1:]))
        assert t[-1] > 0.99

    def test_matches_direct_quadrature(self, fig3_records):
        # transmitted fraction by quadrature of |g11|^2 over the pulse spectrum
        dev, recs = fig3_records
        tau = delay_time(dev)
        sigma = 0.5 / tau

        def integrand(nu):
            w = math.exp(-0.5 * (nu / sigma) ** 2) / (math.sqrt(2 * math.pi) * sigma)
            return w * abs(g_matrix(dev, dev.k0 - nu / C).g11) ** 2

        val, _ = quad(integrand, -12 * sigma, 12 * sigma, limit=400, epsabs=1e-13)
        np.testing.assert_allclose(recs[1].transmitted, val, rtol=1e-8)

    def test_rows_layout(self, fig3_records):
        _, recs = fig3_records
        rows = recs[4].rows()
        assert rows.shape == (2 ** 16, len(PULSE_HEADER))
        np.testing.assert_allclose(rows[:, 1].max(), 1.0, rtol=1e-12)
        assert PULSE_HEADER == ("t_s", "abs2_in", "abs2_out_a", "abs2_out_b", "frac_front",
                                "frac_H", "frac_V", "frac_behind")


class TestEnergyFractions:
    @pytest.mark.parametrize("m", [1, 4])
    def test_fractions_bounded_and_conserved(self, fig3_records, m):
        _, recs = fig3_records
        rec = recs[m]
        for frac in (rec.frac_front, rec.frac_h, rec.frac_v, rec.frac_behind):
            assert frac.min() >= -1e-12
            assert frac.max() <= 1 + 1e-12
        np.testing.assert_allclose(rec.frac_total, 1.0, atol=1e-6)

    def test_late_time(self, fig3_records):
        _, recs = fig3_records
        rec = recs[1]
        np.testing.assert_allclose(rec.frac_behind[-1] + rec.frac_front[-1], 1.0, atol=1e-6)
        np.testing.assert_allclose(rec.frac_behind[-1], rec.transmitted, rtol=1e-6)

    def test_horizontal_peak(self, fig3_records):
        _, recs = fig3_records
        short, long = recs[1].frac_h.max(), recs[4].frac_h.max()
        assert short > 0
        assert short > long
        np.testing.assert_allclose(short, 0.286, rtol=0.01)

    def test_energy_fractions_view(self, fig3):
        ef = energy_fractions(fig3, PulseSpec(fig3.k0, delay_time(fig3)))
        np.testing.assert_allclose(ef.intensity_in.max(), 1.0, rtol=1e-12)
        np.testing.assert_allclose(ef.front + ef.inside_h + ef.inside_v + ef.behind, 1.0,
                                   atol=1e-6)

    def test_absorber_blocks_transmission(self, fig3):
        # the resonant value only applies once the pulse spectrum is narrow
        # against the quadratic rise of |g11|^2 away from k0
        dev = fig3.with_mirror_absorption(A1=1.0)
        rec = propagate_pulse(dev, PulseSpec(dev.k0, 200 * delay_time(fig3)), segments=False)
        closed = 4 * 0.9 * 1e-6 ** 2 / 0.1 ** 2
        assert closed / 2 <= rec.transmitted <= 2 * closed

    def test_absorber_short_pulse_leaks(self, fig3):
        dev = fig3.with_mirror_absorption(A1=1.0)
        rec = propagate_pulse(dev, PulseSpec(dev.k0, 4 * delay_time(fig3)), segments=False)
        np.testing.assert_allclose(rec.transmitted, 3.636e-8, rtol=1e-3)

    def test_parseval_with_losses(self, fig3):
        dev = fig3.with_mirror_absorption(A1=1e-5, A2=1e-3, A3=3e-5, A4=1e-4)
        pulse = PulseSpec(dev.k0, delay_time(dev))
        grid = TimeGrid.default_for(dev, pulse)
        rec = propagate_pulse(dev, pulse, grid, segments=False)
        spec = np.abs(np.fft.fft(pulse.envelope(grid.t))) ** 2
        g = g_matrix(dev, dev.k0 - grid.nu / C)
        absorbed = np.sum(spec * (1 - np.abs(g.g11) ** 2 - np.abs(g.g21) ** 2)) / spec.sum()
        np.testing.assert_allclose(rec.transmitted + rec.reflected + absorbed, 1.0, atol=1e-8)


class TestGaussianKernel:
    def test_peak(self, fig3):
        tau_d = delay_time(fig3)
        np.testing.assert_allclose(gaussian_response_approx(tau_d, fig3),
                                   1 / (math.sqrt(2 * math.pi) * tau_d), rtol=1e-15)

    def test_normalised(self, fig3):
        tau_d = delay_time(fig3)
        val, _ = quad(lambda t: gaussian_response_approx(t, fig3), tau_d - 8 * tau_d,
                      tau_d + 8 * tau_d)
        np.testing.assert_allclose(val, 1.0, atol=1e-6)

    def test_convolution_matches_synthesis(self, fig3_records):
        dev, recs = fig3_records
        rec = recs[4]
        pulse = PulseSpec(dev.k0, 4 * delay_time(dev))
        grid = TimeGrid.default_for(dev, pulse)
        approx = convolve_gaussian_response(dev, pulse, grid)
        rms = np.sqrt(np.mean(np.abs(np.abs(approx) - np.abs(rec.a_out)) ** 2)
                      / np.mean(np.abs(rec.a_out) ** 2))
        assert rms < 0.02


def test_centroid_requires_output(fig3):
    t = np.linspace(0, 1, 8)
    z = np.zeros(8, complex)
    rec = FieldRecord(t, np.ones(8, complex), z, z, z, z.real, z.real, z.real, z.real, 1.0)
    with pytest.raises(ValueError):
        output_centroid_delay(rec)
