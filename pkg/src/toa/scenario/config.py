"""
Scenario documents: flat, sectioned key-value (INI) files describing one computation. The schema is shipped as
``schema.ini`` next to this module.

Validation is complete: besides the schema, the states of every variant are built with the configured numerics, so
a document that parses also runs.
"""
import configparser
import io
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy.stats import poisson

from toa.exceptions import SchemaError
from toa.grid import TimeGrid
from toa.scenario.model import (
    InternalConfig,
    InternalState,
    NumericsConfig,
    ScenarioConfig,
    ScenarioKind,
)
from toa.scenario.variants import resolution_violations
from toa.states import (
    COHERENT_TAIL_TOLERANCE,
    CoherentLabel,
    GaussianSpec,
    Statistics,
    coherent_combo_norm,
    gaussian_overlap,
)

SCHEMA_PATH = Path(__file__).parent / 'schema.ini'
SCHEMA_VERSION = 1
FERMION_OVERLAP_LIMIT = 1 - 1e-10
COMBO_NORM_LIMIT = 1e-6
KNOWN_KEYS = {
    'scenario': {'name', 'kind', 'mass', 'arrival_point', 'statistics'},
    'orbital_a': {'x0', 'p0', 'delta_x'},
    'orbital_b': {'x0', 'p0', 'delta_x'},
    'center_of_mass': {'x0', 'p0', 'delta_x'},
    'internal': {'omega', 'state', 'levels', 'z_real', 'z_imag'},
    'time': {'t_min', 't_max', 'n_steps'},
    'numerics': {'n_points', 'pair_points', 'source_points', 'n_max', 'flux', 'convergence_check'},
    'output': {'directory'},
}


class _Reader:
    """
    Typed access to a parsed document that records every violation instead of stopping at the first.
    """
    def __init__(
            self,
            parser: configparser.ConfigParser
    ):
        self.parser = parser
        self.violations: List[str] = []

    def has_section(self, section: str) -> bool:
        return self.parser.has_section(section)

    def get_text(
            self,
            section: str,
            key: str,
            required: bool
    ) -> Optional[str]:
        if not self.parser.has_section(section):
            if required:
                self.violations.append(f'[{section}] section is missing')
            return None
        if not self.parser.has_option(section, key):
            if required:
                self.violations.append(f'[{section}] {key} is missing')
            return None
        return self.parser.get(section, key).strip()

    def get_float(
            self,
            section: str,
            key: str,
            default: Optional[float] = None,
            positive: bool = False
    ) -> Optional[float]:
        raw = self.get_text(section, key, required=default is None)
        if raw is None:
            return default
        try:
            value = float(raw)
        except ValueError:
            self.violations.append(f'[{section}] {key} must be a number, got {raw!r}')
            return default
        if not np.isfinite(value):
            self.violations.append(f'[{section}] {key} must be finite, got {raw!r}')
            return default
        if positive and not value > 0:
            self.violations.append(f'[{section}] {key} must be positive, got {raw!r}')
            return default
        return value

    def get_int(
            self,
            section: str,
            key: str,
            default: Optional[int] = None,
            minimum: int = 0
    ) -> Optional[int]:
        raw = self.get_text(section, key, required=default is None)
        if raw is None:
            return default
        try:
            value = int(raw)
        except ValueError:
            self.violations.append(f'[{section}] {key} must be an integer, got {raw!r}')
            return default
        if value < minimum:
            self.violations.append(f'[{section}] {key} must be at least {minimum}, got {value}')
            return default
        return value

    def get_bool(
            self,
            section: str,
            key: str,
            default: bool
    ) -> bool:
        raw = self.get_text(section, key, required=False)
        if raw is None:
            return default
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            self.violations.append(f'[{section}] {key} must be a boolean, got {raw!r}')
            return default

    def get_choice(
            self,
            section: str,
            key: str,
            choices: type,
            default: Optional[Enum] = None
    ) -> Optional[Enum]:
        raw = self.get_text(section, key, required=default is None)
        if raw is None:
            return default
        try:
            return choices(raw)
        except ValueError:
            allowed = ', '.join(choice.value for choice in choices)
            self.violations.append(f'[{section}] {key} must be one of {allowed}, got {raw!r}')
            return default

    def get_list(
            self,
            section: str,
            key: str
    ) -> Optional[List[str]]:
        raw = self.get_text(section, key, required=False)
        if raw is None:
            return None
        return [item.strip() for item in raw.split(',') if item.strip()]

    def get_gaussian(
            self,
            section: str,
            mass: Optional[float]
    ) -> Optional[GaussianSpec]:
        if not self.has_section(section):
            self.violations.append(f'[{section}] section is missing')
            return None
        x0 = self.get_float(section, 'x0')
        p0 = self.get_float(section, 'p0')
        delta_x = self.get_float(section, 'delta_x', positive=True)
        if None in (x0, p0, delta_x, mass):
            return None
        return GaussianSpec(x0, p0, delta_x, mass)

    def check_known_keys(self):
        for section in self.parser.sections():
            if section not in KNOWN_KEYS:
                self.violations.append(f'[{section}] is not a known section')
                continue
            for key in self.parser.options(section):
                if key not in KNOWN_KEYS[section]:
                    self.violations.append(f'[{section}] {key} is not a known key')


def _parse_statistics(
        reader: _Reader,
        allowed: Tuple[Statistics, ...]
) -> Tuple[Statistics, ...]:
    names = reader.get_list('scenario', 'statistics')
    if names is None:
        return ()
    statistics = []
    for name in names:
        try:
            value = Statistics(name)
        except ValueError:
            reader.violations.append(f'[scenario] statistics contains unknown kind {name!r}')
            continue
        if value not in allowed:
            reader.violations.append(f'[scenario] statistics {name!r} is not available for this scenario kind')
            continue
        if value in statistics:
            reader.violations.append(f'[scenario] statistics lists {name!r} twice')
            continue
        statistics.append(value)
    return tuple(statistics)


def _parse_internal(
        reader: _Reader,
        n_max: int
) -> Optional[InternalConfig]:
    omega = reader.get_float('internal', 'omega', positive=True)
    state = reader.get_choice('internal', 'state', InternalState)
    if state is InternalState.EIGENSTATE:
        names = reader.get_list('internal', 'levels')
        levels = []
        if not names:
            reader.violations.append('[internal] levels is missing for eigenstate internal states')
        for name in names or []:
            try:
                level = int(name)
            except ValueError:
                reader.violations.append(f'[internal] levels contains {name!r}, which is not an integer')
                continue
            if not 0 <= level <= n_max:
                reader.violations.append(f'[internal] level {level} is outside 0..{n_max}')
                continue
            levels.append(level)
        if omega is None:
            return None
        return InternalConfig(omega, state, levels=tuple(levels))
    if state is InternalState.COHERENT:
        z_real = reader.get_float('internal', 'z_real', default=0.)
        z_imag = reader.get_float('internal', 'z_imag', default=0.)
        z = complex(z_real, z_imag)
        if poisson.sf(n_max, abs(z) ** 2) > COHERENT_TAIL_TOLERANCE:
            reader.violations.append(f'[numerics] n_max={n_max} truncates the coherent state z={z} too severely')
        if omega is None:
            return None
        return InternalConfig(omega, state, z=z)
    return None


def _validate_statistics_against_state(
        reader: _Reader,
        config_kind: ScenarioKind,
        statistics: Tuple[Statistics, ...],
        orbital_a: Optional[GaussianSpec],
        orbital_b: Optional[GaussianSpec],
        internal: Optional[InternalConfig],
        n_max: int
):
    if config_kind is ScenarioKind.PAIR_ORBITALS:
        if not statistics:
            reader.violations.append('[scenario] statistics is missing for an orbital pair')
        if (
                Statistics.FERMION in statistics
                and orbital_a is not None
                and orbital_b is not None
                and gaussian_overlap(orbital_a, orbital_b) >= FERMION_OVERLAP_LIMIT
        ):
            reader.violations.append(
                '[orbital_b] fermions cannot occupy the same orbital as [orbital_a] (Pauli exclusion)'
            )
    if config_kind is ScenarioKind.PAIR_CM_REL and internal is not None:
        if internal.state is InternalState.COHERENT:
            if not statistics:
                reader.violations.append('[scenario] statistics is missing for coherent internal states')
            if Statistics.FERMION in statistics and internal.z.imag == 0:
                reader.violations.append('[internal] fermionic coherent combinations need a non-real z')
            elif poisson.sf(n_max, abs(internal.z) ** 2) <= COHERENT_TAIL_TOLERANCE:
                for exchange in statistics:
                    combo_norm = coherent_combo_norm(CoherentLabel(internal.z), exchange, n_max)
                    if combo_norm < COMBO_NORM_LIMIT:
                        reader.violations.append(
                            f'[internal] the {exchange.value} combination of z={internal.z} nearly vanishes (norm '
                            f'{combo_norm:.2e}); move z further from the real axis'
                        )
        else:
            for level in internal.levels:
                expected = Statistics.from_parity(level)
                if statistics and expected not in statistics:
                    reader.violations.append(
                        f'[internal] level {level} has {expected.value} exchange symmetry, which is not listed in '
                        f'[scenario] statistics'
                    )


def parse_config(text: str) -> ScenarioConfig:
    """
    Parses and validates a scenario document. A document free of schema violations is then built variant by variant
    with its own numerics, so that whatever parses also runs.

    :param text: INI text following ``schema.ini``.
    :return: ``ScenarioConfig``
    :raises SchemaError: listing every violation found in the document, or every variant that cannot be built.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(';', '#'), interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as error:
        raise SchemaError([f'unreadable document: {error}']) from error
    reader = _Reader(parser)
    reader.check_known_keys()

    name = reader.get_text('scenario', 'name', required=True)
    kind = reader.get_choice('scenario', 'kind', ScenarioKind)
    mass = reader.get_float('scenario', 'mass', positive=True)
    x_arr = reader.get_float('scenario', 'arrival_point')

    numerics = NumericsConfig(
        n_points=reader.get_int('numerics', 'n_points', NumericsConfig.n_points, minimum=16),
        pair_points=reader.get_int('numerics', 'pair_points', NumericsConfig.pair_points, minimum=16),
        source_points=reader.get_int('numerics', 'source_points', NumericsConfig.source_points, minimum=16),
        n_max=reader.get_int('numerics', 'n_max', NumericsConfig.n_max, minimum=0),
        flux=reader.get_bool('numerics', 'flux', NumericsConfig.flux),
        convergence_check=reader.get_bool('numerics', 'convergence_check', NumericsConfig.convergence_check),
    )

    t_min = reader.get_float('time', 't_min')
    t_max = reader.get_float('time', 't_max')
    n_steps = reader.get_int('time', 'n_steps', minimum=1)
    times = None
    if None not in (t_min, t_max, n_steps):
        if t_max > t_min:
            times = TimeGrid(t_min, t_max, n_steps)
        else:
            reader.violations.append(f'[time] t_max {t_max} must be bigger than t_min {t_min}')

    statistics: Tuple[Statistics, ...] = ()
    orbital_a = orbital_b = center_of_mass = internal = None
    if kind is ScenarioKind.SINGLE:
        orbital_a = reader.get_gaussian('orbital_a', mass)
        statistics = _parse_statistics(reader, ())
    elif kind is ScenarioKind.PAIR_ORBITALS:
        orbital_a = reader.get_gaussian('orbital_a', mass)
        orbital_b = reader.get_gaussian('orbital_b', mass)
        statistics = _parse_statistics(reader, tuple(Statistics))
    elif kind is ScenarioKind.PAIR_CM_REL:
        center_of_mass = reader.get_gaussian('center_of_mass', 2 * mass if mass else None)
        statistics = _parse_statistics(reader, (Statistics.BOSON, Statistics.FERMION))
        internal = _parse_internal(reader, numerics.n_max)
    if kind is not None:
        _validate_statistics_against_state(reader, kind, statistics, orbital_a, orbital_b, internal, numerics.n_max)
    output_dir = reader.get_text('output', 'directory', required=False) or '.'

    if reader.violations:
        raise SchemaError(reader.violations)
    config = ScenarioConfig(
        name=name,
        kind=kind,
        mass=mass,
        x_arr=x_arr,
        times=times,
        statistics=statistics,
        orbital_a=orbital_a,
        orbital_b=orbital_b,
        center_of_mass=center_of_mass,
        internal=internal,
        numerics=numerics,
        output_dir=output_dir
    )
    violations = resolution_violations(config)
    if violations:
        raise SchemaError(violations)
    return config


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    """
    Reads and parses a scenario document from ``path``.

    :raises SchemaError: if the file cannot be read or violates the schema.
    """
    try:
        text = Path(path).read_text()
    except OSError as error:
        raise SchemaError([f'cannot read {path}: {error}']) from error
    return parse_config(text)


def _number(value: float) -> str:
    return repr(float(value))


def to_config_text(config: ScenarioConfig) -> str:
    """
    Renders ``config`` as a scenario document; ``parse_config`` of the result reproduces ``config``.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser['scenario'] = {
        'name': config.name,
        'kind': config.kind.value,
        'mass': _number(config.mass),
        'arrival_point': _number(config.x_arr),
    }
    if config.statistics:
        parser['scenario']['statistics'] = ', '.join(statistics.value for statistics in config.statistics)
    for section, spec in (
            ('orbital_a', config.orbital_a),
            ('orbital_b', config.orbital_b),
            ('center_of_mass', config.center_of_mass),
    ):
        if spec is not None:
            parser[section] = {'x0': _number(spec.x0), 'p0': _number(spec.p0), 'delta_x': _number(spec.delta_x)}
    if config.internal is not None:
        parser['internal'] = {'omega': _number(config.internal.omega), 'state': config.internal.state.value}
        if config.internal.state is InternalState.EIGENSTATE:
            parser['internal']['levels'] = ', '.join(str(level) for level in config.internal.levels)
        else:
            parser['internal']['z_real'] = _number(config.internal.z.real)
            parser['internal']['z_imag'] = _number(config.internal.z.imag)
    parser['time'] = {
        't_min': _number(config.times.t_min),
        't_max': _number(config.times.t_max),
        'n_steps': str(config.times.n_steps),
    }
    parser['numerics'] = {
        'n_points': str(config.numerics.n_points),
        'pair_points': str(config.numerics.pair_points),
        'source_points': str(config.numerics.source_points),
        'n_max': str(config.numerics.n_max),
        'flux': str(config.numerics.flux).lower(),
        'convergence_check': str(config.numerics.convergence_check).lower(),
    }
    parser['output'] = {'directory': config.output_dir}
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()
