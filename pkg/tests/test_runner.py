import math
import unittest
from dataclasses import replace
from unittest import mock

import numpy as np
import pandas as pd

from toa.arrivals import ArrivalSeries
from toa.exceptions import GridTooSmallError
from toa.grid import TimeGrid
from toa.scenario.model import InternalConfig, InternalState, NumericsConfig, ScenarioConfig, ScenarioKind
from toa.scenario.runner import SummaryReport, run_scenario, summarize
from toa.states import GaussianSpec, Statistics

SMALL_NUMERICS = NumericsConfig(n_points=256, pair_points=192, source_points=512, n_max=16)

SINGLE = ScenarioConfig(
    name='single',
    kind=ScenarioKind.SINGLE,
    mass=1.,
    x_arr=3.,
    times=TimeGrid(0., 8., 200),
    orbital_a=GaussianSpec(-3.5, 3., 1.),
    numerics=SMALL_NUMERICS,
)

FREE_PAIR = ScenarioConfig(
    name='free',
    kind=ScenarioKind.PAIR_ORBITALS,
    mass=1.,
    x_arr=3.,
    times=TimeGrid(0., 8., 100),
    statistics=(Statistics.FERMION, Statistics.BOSON),
    orbital_a=GaussianSpec(-3.5, 3., 1.),
    orbital_b=GaussianSpec(0., 3., 1.),
    numerics=SMALL_NUMERICS,
)

BOUND_PAIR = ScenarioConfig(
    name='bound',
    kind=ScenarioKind.PAIR_CM_REL,
    mass=1.,
    x_arr=3.,
    times=TimeGrid(0., 20., 40),
    center_of_mass=GaussianSpec(0., 1., 1., 2.),
    internal=InternalConfig(np.sqrt(2.), InternalState.EIGENSTATE, levels=(0, 1)),
    numerics=SMALL_NUMERICS,
)

COHERENT_PAIR = replace(
    BOUND_PAIR,
    name='coherent',
    statistics=(Statistics.BOSON, Statistics.FERMION),
    internal=InternalConfig(np.sqrt(2.), InternalState.COHERENT, z=1j),
)


def _gaussian_series(scale: float = 2.) -> ArrivalSeries:
    t = np.linspace(0, 6, 601)
    pi = scale * np.exp(-(t - 3) ** 2 / (2 * .5 ** 2)) / np.sqrt(2 * np.pi * .5 ** 2)
    frame = pd.DataFrame({'t': t, 'pi': pi, 'pi_plus': pi, 'pi_minus': np.zeros_like(t), 'flux': .99 * pi})
    return ArrivalSeries(frame, {'label': 'gaussian'})


class TestSummarize(unittest.TestCase):
    def test_gaussian(self):
        summary = summarize(_gaussian_series(), runtime=1.5)
        self.assertEqual('gaussian', summary.label)
        self.assertAlmostEqual(2, summary.time_integral, delta=1e-6)
        self.assertAlmostEqual(3, summary.mean_arrival_time, delta=1e-6)
        self.assertAlmostEqual(.5, summary.arrival_time_spread, delta=1e-4)
        self.assertEqual(1, len(summary.peaks))
        self.assertAlmostEqual(3, summary.peaks[0][0])
        self.assertAlmostEqual(summary.time_integral, summary.integral_pi_plus)
        self.assertEqual(0, summary.integral_pi_minus)
        self.assertEqual(1.5, summary.runtime)
        self.assertTrue(summary.window_covered)
        self.assertIsNone(summary.converged)
        self.assertIsNone(summary.flux_density_deviation)
        self.assertFalse(summary.audit_failed)

    def test_flux_deviation(self):
        summary = summarize(_gaussian_series(), compare_flux=True)
        self.assertAlmostEqual(.01, summary.flux_density_deviation)

    def test_empty_series(self):
        summary = summarize(_gaussian_series(scale=0.))
        self.assertEqual(0, summary.time_integral)
        self.assertTrue(math.isnan(summary.mean_arrival_time))
        self.assertEqual([], summary.peaks)

    def test_cut_window(self):
        series = ArrivalSeries(_gaussian_series().frame.iloc[:301])
        summary = summarize(series)
        self.assertFalse(summary.window_covered)
        self.assertEqual({'window_coverage': False}, summary.audit_flags)
        self.assertFalse(summary.audit_failed)

    def test_as_dict(self):
        summary = summarize(_gaussian_series())
        summary.converged = False
        report = summary.as_dict()
        self.assertTrue(report['audit_failed'])
        self.assertIsInstance(report['peaks'][0], list)
        self.assertEqual(set(SummaryReport.__dataclass_fields__) | {'audit_failed'}, set(report))


class TestRunScenario(unittest.TestCase):
    def test_single(self):
        results = run_scenario(SINGLE)
        self.assertEqual(['single'], [result.label for result in results])
        self.assertAlmostEqual(1, results[0].summary.time_integral, delta=.01)
        self.assertEqual(200, len(results[0].series))
        self.assertEqual('single', results[0].series.metadata['scenario'])

    def test_free_pair(self):
        results = run_scenario(FREE_PAIR)
        self.assertEqual(['fermion', 'boson'], [result.label for result in results])
        for result in results:
            self.assertAlmostEqual(2, result.summary.time_integral, delta=.02)
            self.assertEqual(result.label, result.summary.label)

    def test_bound_pair(self):
        results = run_scenario(BOUND_PAIR)
        self.assertEqual(['n0_boson', 'n1_fermion'], [result.label for result in results])
        self.assertEqual(['boson', 'fermion'], [result.series.metadata['statistics'] for result in results])

    def test_coherent_pair(self):
        results = run_scenario(COHERENT_PAIR)
        self.assertEqual(['boson', 'fermion'], [result.label for result in results])

    def test_deterministic(self):
        first, second = run_scenario(FREE_PAIR), run_scenario(FREE_PAIR)
        for one, other in zip(first, second):
            self.assertTrue(one.series.frame.equals(other.series.frame))

    def test_workers(self):
        serial = run_scenario(replace(SINGLE, times=TimeGrid(0., 8., 6)))
        parallel = run_scenario(replace(SINGLE, times=TimeGrid(0., 8., 6)), max_workers=2)
        self.assertTrue(serial[0].series.frame.equals(parallel[0].series.frame))

    def test_convergence_check(self):
        config = replace(SINGLE, numerics=replace(SMALL_NUMERICS, convergence_check=True))
        summary = run_scenario(config)[0].summary
        self.assertTrue(summary.converged)
        self.assertTrue(summary.audit_flags['convergence'])
        self.assertAlmostEqual(summary.time_integral, summary.refined_time_integral, delta=1e-4)
        self.assertFalse(summary.audit_failed)

    def test_failed_convergence_check(self):
        config = replace(SINGLE, numerics=replace(SMALL_NUMERICS, convergence_check=True))
        with mock.patch('toa.scenario.runner.CONVERGENCE_TOLERANCE', -1.):
            summary = run_scenario(config)[0].summary
        self.assertFalse(summary.converged)
        self.assertTrue(summary.audit_failed)

    def test_errors_name_the_variant(self):
        config = replace(BOUND_PAIR, numerics=replace(SMALL_NUMERICS, source_points=16, n_max=64))
        with self.assertRaises(GridTooSmallError) as context:
            run_scenario(config)
        self.assertTrue(str(context.exception).startswith('bound/n0_boson: '))
