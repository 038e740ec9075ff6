"""
Command-line front end::

    toa run <config> [--output-dir DIR] [--workers N] [--verbose]
    toa preset <name> [--emit-config] [--output-dir DIR] [--workers N] [--verbose]
    toa validate <config>

Exit codes: 0 success, 1 output failure, 2 invalid configuration, preset name or state, 3 insufficient numerical
resolution or failed convergence audit.
"""
import argparse
import logging
import sys
from typing import List, Optional

from toa.exceptions import NumericalAuditError, SchemaError, SinkError, ToaError
from toa.scenario.config import load_config, to_config_text
from toa.scenario.model import ScenarioConfig
from toa.scenario.output import format_summary, write_variant_outputs
from toa.scenario.presets import PRESETS, figure_preset
from toa.scenario.runner import run_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_SINK = 1
EXIT_INVALID = 2
EXIT_AUDIT = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='toa',
        description='Quantum time-of-arrival densities of one and two particles'
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    def add_run_options(subparser: argparse.ArgumentParser):
        subparser.add_argument('--output-dir', default=None, help='Directory of the CSV and summary files')
        subparser.add_argument('--workers', type=int, default=None, help='Processes evaluating time points')
        subparser.add_argument('--verbose', action='store_true', help='Log progress at debug level')

    run = subparsers.add_parser('run', help='Run a scenario document')
    run.add_argument('config', help='Path of the scenario document')
    add_run_options(run)

    preset = subparsers.add_parser('preset', help='Run or print a figure preset')
    preset.add_argument('name', help=f'One of {", ".join(sorted(PRESETS))}')
    preset.add_argument('--emit-config', action='store_true', help='Print the scenario document and exit')
    add_run_options(preset)

    validate = subparsers.add_parser('validate', help='Check a scenario document')
    validate.add_argument('config', help='Path of the scenario document')
    return parser


def _execute(
        config: ScenarioConfig,
        output_dir: Optional[str],
        workers: Optional[int]
) -> int:
    results = run_scenario(config, workers)
    write_variant_outputs(config.name, results, output_dir or config.output_dir)
    for result in results:
        print(format_summary(config.name, result.summary))
    failed = [result.label for result in results if result.summary.audit_failed]
    if failed:
        logger.error('Numerical audit failed for %s', ', '.join(failed))
        return EXIT_AUDIT
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    arguments = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(arguments, 'verbose', False) else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s'
    )
    logging.captureWarnings(True)

    try:
        if arguments.command == 'validate':
            config = load_config(arguments.config)
            print(f'{arguments.config}: valid {config.kind.value} scenario {config.name!r}')
            return EXIT_OK
        if arguments.command == 'preset':
            config = figure_preset(arguments.name)
            if arguments.emit_config:
                print(to_config_text(config), end='')
                return EXIT_OK
        else:
            config = load_config(arguments.config)
        return _execute(config, arguments.output_dir, arguments.workers)
    except SchemaError as error:
        print(f'error: {error}', file=sys.stderr)
        for violation in error.violations:
            print(f'  {violation}', file=sys.stderr)
        return EXIT_INVALID
    except NumericalAuditError as error:
        print(f'error: {error}', file=sys.stderr)
        return EXIT_AUDIT
    except SinkError as error:
        print(f'error: {error}', file=sys.stderr)
        return EXIT_SINK
    except ToaError as error:
        print(f'error: {error}', file=sys.stderr)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
