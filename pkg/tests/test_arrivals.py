import io
import unittest
import warnings

import numpy as np
import pandas as pd
from hypothesis import given, settings, strategies as st
from matplotlib import pyplot as plt
from parameterized import parameterized
from scipy.integrate import trapezoid

from toa.arrivals import (
    ArrivalPoint,
    ArrivalSeries,
    arrival_density_1p,
    arrival_series_1p,
    arrival_time_moment,
    arrival_time_spread,
    crossing_amplitude,
    crossing_amplitudes,
    find_arrival_peaks,
    flux_1p,
    flux_1p_kernel,
    mean_arrival_time,
    time_integral,
    window_covers_arrivals,
)
from toa.evolution.free import FreeEvolution, evolve_free
from toa.exceptions import GridMismatchError, NonpositiveMassError, TruncatedSupportWarning, WindowTooSmallWarning
from toa.grid import TimeGrid, WaveFunction, make_grid, normalize, symmetric_grid
from toa.states import GaussianSpec, gaussian_packet

CHI_A = GaussianSpec(x0=-3.5, p0=3, delta_x=1)
CHI_B = GaussianSpec(x0=0, p0=3, delta_x=1)
X = 3.
MASS = 1.


def _orbital_grid(n_points: int = 1024):
    return make_grid(-1, 7, n_points)


def _series(spec: GaussianSpec, times: TimeGrid, n_points: int = 1024) -> ArrivalSeries:
    return arrival_series_1p(gaussian_packet(spec, _orbital_grid(n_points)), FreeEvolution(MASS), X, MASS, times)


class TestCrossingAmplitude(unittest.TestCase):
    def test_negative_momenta_only(self):
        grid = symmetric_grid(5., 501)
        amplitudes = np.where(grid.points < 0, np.exp(-(grid.points + 2) ** 2), 0)
        state = WaveFunction(grid, amplitudes)
        self.assertEqual(0, crossing_amplitude(state, X, MASS, 1))
        self.assertNotEqual(0, crossing_amplitude(state, X, MASS, -1))

    def test_even_real_at_origin(self):
        state = gaussian_packet(GaussianSpec(x0=0, p0=0, delta_x=1), symmetric_grid(4., 513))
        a_plus, a_minus = crossing_amplitudes(state, 0., MASS)
        self.assertAlmostEqual(0, abs(a_plus - a_minus), delta=1e-12)

    def test_left_arrivals_dominate(self):
        state = gaussian_packet(CHI_B, _orbital_grid())
        a_plus, a_minus = crossing_amplitudes(state, X, MASS)
        self.assertLess(abs(a_minus) ** 2 / abs(a_plus) ** 2, 1e-6)

    def test_theta_locality(self):
        grid = symmetric_grid(8., 801)
        state = gaussian_packet(GaussianSpec(x0=0, p0=1, delta_x=.5), grid)
        modified = state.amplitudes.copy()
        modified[grid.points < 0] *= 3 - 1j
        a_plus = crossing_amplitude(state, X, MASS, 1)
        self.assertEqual(a_plus, crossing_amplitude(WaveFunction(grid, modified), X, MASS, 1))

    def test_grid_without_origin(self):
        state = gaussian_packet(CHI_B, make_grid(1, 5, 256))
        with self.assertRaises(GridMismatchError):
            crossing_amplitude(state, X, MASS, 1)

    def test_nonpositive_mass(self):
        state = gaussian_packet(CHI_B, _orbital_grid())
        with self.assertRaises(NonpositiveMassError):
            crossing_amplitude(state, X, 0, 1)
        with self.assertRaises(NonpositiveMassError):
            flux_1p(state, X, -1)


class TestArrivalDensity(unittest.TestCase):
    @parameterized.expand([
        (0., 0., 1.),
        (CHI_A.x0, CHI_A.p0, CHI_A.delta_x),
        (2., -1.5, .7),
    ])
    def test_positive_and_decomposed(self, x0, p0, delta_x):
        grid = symmetric_grid(9., 1024)
        for t in (0., .8, 2.5):
            state = evolve_free(gaussian_packet(GaussianSpec(x0, p0, delta_x), grid), MASS, t)
            point = arrival_density_1p(state, X, MASS, t)
            self.assertGreaterEqual(point.pi_plus, 0)
            self.assertGreaterEqual(point.pi_minus, 0)
            self.assertAlmostEqual(point.pi, point.pi_plus + point.pi_minus, delta=1e-12)

    @given(
        st.floats(-4, 4),
        st.floats(-1.5, 1.5),
        st.floats(.5, 2),
        st.floats(-2, 5)
    )
    @settings(max_examples=100, deadline=None)
    def test_random_packets_positive_and_decomposed(self, x0, p0, delta_x, t):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', TruncatedSupportWarning)
            packet = gaussian_packet(GaussianSpec(x0, p0, delta_x), symmetric_grid(9., 512))
        point = arrival_density_1p(evolve_free(packet, MASS, t), X, MASS, t)
        self.assertGreaterEqual(point.pi_plus, 0)
        self.assertGreaterEqual(point.pi_minus, 0)
        self.assertAlmostEqual(point.pi, point.pi_plus + point.pi_minus, delta=1e-12)

    def test_symmetric_state(self):
        state = gaussian_packet(GaussianSpec(x0=0, p0=0, delta_x=1), symmetric_grid(4., 513))
        point = arrival_density_1p(state, 0., MASS)
        self.assertAlmostEqual(point.pi_plus, point.pi_minus, delta=1e-12)
        self.assertAlmostEqual(0, point.flux, delta=1e-12)

    def test_unpacking(self):
        t, pi, pi_plus, pi_minus, flux = ArrivalPoint.from_directions(1., .25, .5, .7)
        self.assertEqual((1., .75, .25, .5, .7), (t, pi, pi_plus, pi_minus, flux))

    def test_peak_near_classical_arrival(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', WindowTooSmallWarning)
            series = _series(CHI_B, TimeGrid(0., 4., 801))
        at_classical_time = series.pi[np.argmin(np.abs(series.t - CHI_B.classical_arrival_time(X)))]
        self.assertGreater(at_classical_time, .95 * series.pi.max())

    def test_flux_close_to_density_at_peak(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', WindowTooSmallWarning)
            series = _series(CHI_B, TimeGrid(0., 8., 400))
        peak = np.argmax(series.pi)
        self.assertLess(abs(series.flux[peak] - series.pi[peak]), .02 * series.pi[peak])


class TestFlux(unittest.TestCase):
    @given(st.integers(min_value=0, max_value=2 ** 31 - 1), st.floats(min_value=-5, max_value=5))
    @settings(max_examples=20, deadline=None)
    def test_kernel_form(self, seed, x_arr):
        random_state = np.random.RandomState(seed)
        grid = symmetric_grid(6., 128)
        envelope = np.exp(-grid.points ** 2 / 4)
        state = normalize(WaveFunction(
            grid,
            envelope * (random_state.normal(size=128) + 1j * random_state.normal(size=128))
        ))
        self.assertAlmostEqual(
            flux_1p_kernel(state, x_arr, MASS),
            flux_1p(state, x_arr, MASS),
            delta=1e-10
        )

    def test_kernel_form_gaussian(self):
        state = gaussian_packet(CHI_B, make_grid(-1, 7, 400))
        self.assertAlmostEqual(flux_1p_kernel(state, X, 2.), flux_1p(state, X, 2.), delta=1e-10)


class TestArrivalSeries(unittest.TestCase):
    def setUp(self) -> None:
        self.times = TimeGrid(0., 8., 400)

    def test_single_time(self):
        state = gaussian_packet(CHI_B, _orbital_grid())
        series = arrival_series_1p(state, FreeEvolution(MASS), X, MASS, TimeGrid(0., 1., 1))
        self.assertEqual(1, len(series))
        self.assertEqual(arrival_density_1p(state, X, MASS, 0.), series.points()[0])

    def test_covariance(self):
        tau = .6
        state = gaussian_packet(CHI_A, _orbital_grid())
        shifted = arrival_series_1p(evolve_free(state, MASS, tau), FreeEvolution(MASS), X, MASS, self.times)
        original = arrival_series_1p(state, FreeEvolution(MASS), X, MASS, TimeGrid(tau, 8. + tau, 400))
        for column in ['pi', 'pi_plus', 'pi_minus', 'flux']:
            self.assertLess(np.max(np.abs(shifted.frame[column] - original.frame[column])), 1e-10)

    def test_parallel_matches_serial(self):
        state = gaussian_packet(CHI_B, _orbital_grid(256))
        times = TimeGrid(0., 2., 8)
        serial = arrival_series_1p(state, FreeEvolution(MASS), X, MASS, times)
        parallel = arrival_series_1p(state, FreeEvolution(MASS), X, MASS, times, max_workers=2)
        self.assertTrue(serial.frame.equals(parallel.frame))

    def test_normalization(self):
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', WindowTooSmallWarning)
            series = _series(CHI_B, self.times)
            self.assertAlmostEqual(1, time_integral(series), delta=.01)
            self.assertAlmostEqual(1, series.time_integral(), delta=.01)

    def test_normalization_full_window(self):
        series = _series(CHI_A, self.times)
        with warnings.catch_warnings():
            warnings.simplefilter('error', WindowTooSmallWarning)
            self.assertTrue(window_covers_arrivals(series))
            self.assertAlmostEqual(1, time_integral(series), delta=.01)

    @parameterized.expand([
        (CHI_B, 1.),
        (CHI_A, 6.5 / 3),
    ])
    def test_mean_arrival_time(self, spec, classical):
        state = gaussian_packet(spec, _orbital_grid())
        positive = state.grid.points > 0
        inverse_momentum = trapezoid(
            state.probability_density[positive] / state.grid.points[positive],
            state.grid.points[positive]
        )
        expected = MASS * (X - spec.x0) * inverse_momentum
        with warnings.catch_warnings():
            warnings.simplefilter('ignore', WindowTooSmallWarning)
            series = _series(spec, self.times)
            self.assertAlmostEqual(expected, mean_arrival_time(series), delta=.01 * expected)
            self.assertAlmostEqual(classical, mean_arrival_time(series), delta=.04 * classical)
            self.assertAlmostEqual(mean_arrival_time(series), series.mean_arrival_time())

    def test_moments(self):
        series = _series(CHI_A, self.times)
        self.assertAlmostEqual(1, arrival_time_moment(series, 0))
        spread = arrival_time_spread(series)
        self.assertGreater(spread, 0)
        self.assertAlmostEqual(
            arrival_time_moment(series, 2) - mean_arrival_time(series) ** 2,
            spread ** 2
        )

    def test_directional_integrals(self):
        series = _series(CHI_A, self.times)
        self.assertAlmostEqual(1, time_integral(series, 'pi_plus'), delta=.01)
        self.assertAlmostEqual(0, time_integral(series, 'pi_minus'), delta=1e-6)
        self.assertTrue(np.allclose(series.net_crossings, series.frame['pi_plus'] - series.frame['pi_minus']))

    def test_window_too_small(self):
        series = _series(CHI_A, TimeGrid(0., 2., 100))
        with self.assertWarns(WindowTooSmallWarning):
            self.assertFalse(window_covers_arrivals(series))
        with self.assertWarns(WindowTooSmallWarning):
            time_integral(series)

    def test_one_peak(self):
        peaks = find_arrival_peaks(_series(CHI_A, self.times))
        self.assertEqual(1, len(peaks))
        self.assertAlmostEqual(6.5 / 3, peaks[0][0], delta=.2)

    def test_peaks_of_two_humps(self):
        t = np.linspace(0, 10, 501)
        pi = np.exp(-(t - 3) ** 2) + .5 * np.exp(-(t - 7) ** 2)
        frame = pd.DataFrame({'t': t, 'pi': pi, 'pi_plus': pi, 'pi_minus': 0 * pi, 'flux': pi})
        peaks = ArrivalSeries(frame).peaks()
        self.assertEqual(2, len(peaks))
        self.assertTrue(np.all(np.isclose([3, 7], [peak[0] for peak in peaks])))
        self.assertTrue(peaks[0][0] < peaks[1][0])

    def test_metadata(self):
        series = arrival_series_1p(
            gaussian_packet(CHI_B, _orbital_grid(256)),
            FreeEvolution(MASS),
            X,
            MASS,
            TimeGrid(0., 1., 3),
            metadata={'label': 'chi_b'}
        )
        self.assertEqual('chi_b', series.label)
        self.assertEqual(X, series.metadata['x_arr'])
        self.assertEqual(MASS, series.metadata['mass'])


class TestArrivalSeriesValidation(unittest.TestCase):
    def _frame(self, **overrides):
        frame = pd.DataFrame({
            't': [0., 1., 2.],
            'pi': [.1, .3, .2],
            'pi_plus': [.1, .2, .2],
            'pi_minus': [0., .1, 0.],
            'flux': [.1, .1, .2],
        })
        for column, values in overrides.items():
            frame[column] = values
        return frame

    def test_valid(self):
        series = ArrivalSeries(self._frame())
        self.assertEqual(3, len(series))
        self.assertTrue(np.all(np.isclose([0, 1, 2], series.t)))

    def test_copy(self):
        frame = self._frame()
        series = ArrivalSeries(frame)
        frame.loc[0, 'pi'] = 5
        self.assertAlmostEqual(.1, series.pi[0])

    @parameterized.expand([
        ('t', [0., 2., 1.]),
        ('t', [0., 0., 1.]),
        ('pi', [.1, np.nan, .2]),
        ('flux', [.1, np.inf, .2]),
        ('pi_minus', [0., -.1, 0.]),
        ('pi', [.1, .4, .2]),
    ])
    def test_invalid(self, column, values):
        with self.assertRaises(ValueError):
            ArrivalSeries(self._frame(**{column: values}))

    def test_missing_column(self):
        with self.assertRaises(ValueError):
            ArrivalSeries(self._frame().drop(columns=['flux']))

    def test_empty(self):
        with self.assertRaises(ValueError):
            ArrivalSeries(self._frame().iloc[:0])


class TestArrivalSeriesPlots(unittest.TestCase):
    def setUp(self) -> None:
        self.series = _series(CHI_A, TimeGrid(0., 8., 50), n_points=256)

    def _render(self, plot, expected_lines):
        fig = plt.figure(figsize=(8, 6))
        ax = plt.gca()
        plot(ax)
        out_file = io.BytesIO()
        fig.savefig(out_file, format='raw')
        self.assertGreater(len(out_file.getvalue()), 0)
        self.assertEqual(expected_lines, len(ax.get_lines()))
        plt.close(fig)

    def test_plot_density(self):
        self._render(self.series.plot_density, 1)

    def test_plot_directions(self):
        self._render(self.series.plot_directions, 2)

    def test_plot_flux(self):
        self._render(self.series.plot_flux, 3)
