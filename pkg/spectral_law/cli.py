# cli.py - Command line entry point
"""
Command line interface tying simulation, solving and comparison together.

Every command reads one experiment configuration (a JSON file or a shipped
template) and writes its results into the output directory.
"""

import argparse
import json
import logging
import sys
from typing import List, Optional

import numpy as np

from . import __version__
from .compare import batch_compare, overlay
from .config import EXIT_CODES, LOGGING, MIN_CONVERGED_FRACTION
from .data_manager import DataManager, config_hash, list_templates, load_config, load_template
from .errors import SolverError, SpectralLawError
from .experiment import ExperimentConfig, parse_config
from .models import catalog
from .simulate import simulate_observations
from .spectra import esd_of
from .theory import solve_spec

logger = logging.getLogger(__name__)


class UsageParser(argparse.ArgumentParser):
    """Argument parser that exits with the usage exit code on bad input"""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CODES['usage'])


def seed_list(text: str) -> List[int]:
    try:
        seeds = [int(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be a comma-separated list of integers, got {text!r}")
    if not seeds:
        raise argparse.ArgumentTypeError("seed list is empty")
    return seeds


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = UsageParser(
        prog='spectral-law',
        description='Limiting spectral distributions of large sample covariance matrices',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  spectral-law list-models                         # Show the model families
  spectral-law list-models --json                  # Machine-readable catalog
  spectral-law simulate --template mp_identity     # Eigenvalues per seed
  spectral-law solve --template mar_demo --out out # Density on the z grid
  spectral-law compare --config exp.json --seeds 1,2,3
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')

    listing = commands.add_parser('list-models', help='List the model families and their parameters')
    listing.add_argument('--json', action='store_true', help='Print the catalog as JSON')
    listing.add_argument('-v', '--verbose', action='count', default=0, help='More logging (-vv for debug)')

    for name, summary in (('simulate', 'Write the ESD of each seeded simulation'),
                          ('solve', 'Solve the limiting law and write its density'),
                          ('compare', 'Compare simulated spectra with the limiting law')):
        command = commands.add_parser(name, help=summary)
        source = command.add_mutually_exclusive_group(required=True)
        source.add_argument('--config', metavar='PATH', help='Experiment configuration (JSON)')
        source.add_argument('--template', metavar='NAME', help='Shipped experiment template')
        command.add_argument('--out', metavar='DIR', help='Output directory (default: from the configuration)')
        command.add_argument('--seeds', type=seed_list, help='Comma-separated seeds overriding the configuration')
        command.add_argument('--eta', type=float, help='Imaginary offset of the z grid')
        command.add_argument('--tol', type=float, help='Solver tolerance')
        command.add_argument('--workers', type=positive_int, default=1, help='Worker threads')
        command.add_argument('-v', '--verbose', action='count', default=0, help='More logging (-vv for debug)')

    return parser


def configure_logging(verbosity: int):
    levels = {0: LOGGING['level'], 1: 'INFO'}
    logging.basicConfig(format=LOGGING['format'], level=levels.get(verbosity, 'DEBUG'))


def resolve_config(args) -> ExperimentConfig:
    """Configuration from --config or --template with the command line overrides applied"""
    config = load_config(args.config) if args.config else load_template(args.template)
    data = config.model_dump(mode='json')
    if args.seeds:
        data['seeds'] = args.seeds
    if args.eta is not None:
        data['zgrid']['eta'] = args.eta
    if args.tol is not None:
        data['solver']['tol'] = args.tol
    return parse_config(data)


def _manager(args, config: ExperimentConfig) -> DataManager:
    return DataManager(args.out or config.outputs, config_hash(config))


def cmd_simulate(args) -> int:
    """Simulate each seed and write the eigenvalues of every observation"""
    config = resolve_config(args)
    manager = _manager(args, config)
    p, n = config.dims.shape

    written = 0
    for seed in config.seeds:
        matrices = simulate_observations(config.model, p, n, seed, config.observation_times, args.workers)
        for t, X in matrices.items():
            manager.write_esd(esd_of(X).eigenvalues, seed, t)
            written += 1
    print(f"Simulated {config.model.family} ({p} x {n}): {written} eigenvalue files in {manager.output_dir}")
    return EXIT_CODES['ok']


def _check_converged(fraction: float):
    if fraction < MIN_CONVERGED_FRACTION:
        raise SolverError(f"only {fraction:.1%} of the grid converged (need {MIN_CONVERGED_FRACTION:.0%})")


def cmd_solve(args) -> int:
    """Solve the limiting law and write the density table with its sidecar"""
    config = resolve_config(args)
    manager = _manager(args, config)
    p, n = config.dims.shape
    cfg = config.solver.solver_config(workers=args.workers)

    prob, field, density = solve_spec(config.model, p, n, config.zgrid.grid(), cfg, config.solver.quad_points)
    converged = field.converged
    sidecar = density.to_dict()
    sidecar.update({
        'family': prob.family,
        'residual_max': float(np.max(field.residual[converged])),
        'grid_points': len(field.z),
        'converged_points': int(converged.sum()),
        'method': field.method,
        'problem': prob.summary()
    })
    manager.write_density(density.x, density.rho, sidecar)
    print(f"Solved {prob.family} (c = {prob.c:.4g}, {field.method}): "
          f"{converged.sum()}/{len(converged)} points converged, "
          f"atom at zero {density.atom_at_zero:.4f}, mass {density.mass():.4f}")
    _check_converged(field.converged_fraction)
    return EXIT_CODES['ok']


def cmd_compare(args) -> int:
    """Compare each seed's spectrum with the solved law; write reports, overlays and a summary"""
    config = resolve_config(args)
    manager = _manager(args, config)
    cfg = config.solver.solver_config(workers=args.workers)

    result = batch_compare(config.model, config.dims.shape, config.seeds, config.zgrid.grid(), cfg,
                           times=config.observation_times, quad_points=config.solver.quad_points,
                           workers=args.workers)
    _check_converged(result.kernel_field.converged_fraction)

    for report, e in zip(result.reports, result.spectra):
        seed, t = report.metadata['seed'], report.metadata.get('t')
        manager.write_report(report.to_dict(), seed, t)
        manager.write_overlay(overlay(e, result.density, config.bins).rows(), seed, t)
        label = f"seed {seed}" if t is None else f"seed {seed}, t={t}"
        print(f"  {label}: ks={report.ks:.4f} w1={report.w1:.4f} moment_gap={report.moment_gap:.4f}")
    manager.write_summary(result.summary_rows())

    summary = result.summary
    print(f"Compared {len(result.reports)} spectra: median ks {summary['ks_median']:.4f}, "
          f"max ks {summary['ks_max']:.4f}")
    return EXIT_CODES['ok']


def cmd_list_models(args) -> int:
    """Print the model catalog"""
    entries = catalog()
    if args.json:
        print(json.dumps(entries, indent=2, sort_keys=True))
        return EXIT_CODES['ok']

    print("Model families:")
    for entry in entries:
        optional = ', '.join(entry['optional']) or '-'
        print(f"  {entry['family']:<16} required: {', '.join(entry['required'])}; optional: {optional}")
        print(f"  {'':<16} {entry['description']}")
    print(f"Templates: {', '.join(list_templates())}")
    return EXIT_CODES['ok']


COMMANDS = {
    'simulate': cmd_simulate,
    'solve': cmd_solve,
    'compare': cmd_compare,
    'list-models': cmd_list_models
}


def main(argv: Optional[List[str]] = None) -> int:
    """Run one command and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CODES['ok'] if exc.code == 0 else EXIT_CODES['usage']

    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_CODES['usage']

    configure_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except SpectralLawError as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == '__main__':
    sys.exit(main())
