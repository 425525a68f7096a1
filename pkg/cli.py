import argparse
import sys
import os

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src import __version__
from src.controllers import (BoundsController, ReportController, SimulationController,
                             SpectrumController)
from src.utils import console, file_io
from src.utils.config import DEMOS, FORMATS, build_config, parse_config_text
from src.utils.errors import ConfigError, KacGapError, exit_code_for

FORMULA_REFERENCES = [
    "rates lambda_ij = N binom(N,2)^-1 (v_i^2 + v_j^2)^gamma",
    "restricted gap chain B(N0) prod (1 - A_k/k^2)",
    "full gap chain B(N0) prod (1 - (A_k + C_k)/k^2)",
    "kappa_{N,m}(k) = (-1)^k (m/2)_k / ((N-m)/2)_k",
    "Delta_2 = 2^{gamma+1}",
]

# flag name -> RunConfig field
FLAG_FIELDS = {
    'N': 'N', 'gamma': 'gamma', 'E': 'E', 'n0': 'n0', 'seed': 'seed', 'replicas': 'replicas',
    'degree': 'degree', 'basis_size': 'basis_size', 'horizon': 'horizon', 'samples': 'samples',
    'output': 'output_path', 'format': 'format', 'trajectory': 'trajectory_path', 'demo': 'demo',
    'order': 'order', 'm': 'm', 'threads': 'threads',
}


def _n0(value: str):
    if value == 'auto':
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError("n0 must be an integer or 'auto'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', type=str, help='key=value run configuration file')
    common.add_argument('--N', nargs='+', type=int, help='particle number(s)')
    common.add_argument('--gamma', type=float, help='rate exponent in [0, 1]')
    common.add_argument('--E', type=float, help='energy per particle')
    common.add_argument('--n0', type=_n0, help="chain start N0 (integer or 'auto')")
    common.add_argument('--seed', type=int, help='random seed')
    common.add_argument('--threads', type=int, help='worker threads (default: $KACGAP_THREADS or CPU count)')
    common.add_argument('-o', '--output', type=str, help='write the result to this path instead of stdout')
    common.add_argument('--format', choices=FORMATS, help='output format (csv only for simulate)')

    parser = argparse.ArgumentParser(description="spectral gaps of the Kac walk")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest='command', help='Available functionalities', required=True)

    commands.add_parser('bounds', parents=[common], help='rigorous lower bounds for each N')

    products_arg = commands.add_parser('products', parents=[common], help='infinite and truncated products')
    products_arg.add_argument('--demo', choices=DEMOS, help='named product to evaluate')

    spectrum_arg = commands.add_parser('spectrum', parents=[common], help='exact spectrum at gamma = 0')
    spectrum_arg.add_argument('--degree', type=int, help='maximal polynomial degree (4, 6 or 8)')

    variational_arg = commands.add_parser('variational', parents=[common], help='Rayleigh-Ritz upper bounds')
    variational_arg.add_argument('--degree', type=int, help='maximal profile degree in v')
    variational_arg.add_argument('--basis-size', dest='basis_size', type=int, help='Hermite basis size')

    simulate_arg = commands.add_parser('simulate', parents=[common], help='Monte Carlo gap estimate')
    simulate_arg.add_argument('--replicas', type=int, help='independent replicas (>= 100)')
    simulate_arg.add_argument('--horizon', type=float, help='final time of the autocorrelation grid')
    simulate_arg.add_argument('--trajectory', type=str, help='also write one trajectory as CSV here')

    correlation_arg = commands.add_parser('correlation', parents=[common], help='correlation operator spectra')
    correlation_arg.add_argument('--m', type=int, help='block size')
    correlation_arg.add_argument('--order', type=int, help='projection order (1 or 2)')
    correlation_arg.add_argument('--samples', type=int, help='Monte Carlo samples')

    report_arg = commands.add_parser('report', parents=[common], help='sandwich table for a grid of N')
    report_arg.add_argument('--degree', type=int, help='maximal profile degree in v')
    report_arg.add_argument('--basis-size', dest='basis_size', type=int, help='Hermite basis size')
    report_arg.add_argument('--replicas', type=int, help='independent replicas (>= 100)')
    report_arg.add_argument('--horizon', type=float, help='final time of the autocorrelation grid')
    return parser


def load_config(args: argparse.Namespace, environ=None):
    """Combine the config file, the flags and the environment into a RunConfig."""
    file_values = None
    if args.config:
        ok, text = file_io.read_file(args.config)
        if not ok:
            raise ConfigError(text)
        file_values = parse_config_text(text)
    overrides = {'command': args.command}
    for flag, name in FLAG_FIELDS.items():
        if hasattr(args, flag):
            overrides[name] = getattr(args, flag)
    return build_config(file_values, overrides, environ)


def dispatch(config):
    """
    Run one command.

    Returns:
        tuple: (success, payload, error, controller)
    """
    if config.command == 'bounds':
        controller = BoundsController(config.threads)
        return (*controller.compute_bounds(config.N, config.gamma, config.n0), controller)

    if config.command == 'products':
        controller = BoundsController(config.threads)
        return (*controller.run_product_demo(config.demo or 'uniform-factor', config.gamma), controller)

    if config.command == 'correlation':
        controller = BoundsController(config.threads)
        results = []
        for N in config.N:
            success, payload, error = controller.correlation_spectrum(
                N, config.m, config.order, config.samples, config.seed)
            if not success:
                return success, None, error, controller
            results.append(payload)
        return True, {'results': results}, None, controller

    if config.command == 'spectrum':
        controller = SpectrumController()
        results = []
        for N in config.N:
            success, payload, error = controller.exact_spectrum(N, config.degree)
            if not success:
                return success, None, error, controller
            results.append(payload)
        return True, {'results': results}, None, controller

    if config.command == 'variational':
        controller = SpectrumController()
        results = []
        for N in config.N:
            success, payload, error = controller.variational(N, config.gamma, config.degree, config.basis_size)
            if not success:
                return success, None, error, controller
            results.append(payload)
        return True, {'results': results}, None, controller

    if config.command == 'simulate':
        controller = SimulationController(config.threads)
        if config.format == 'csv':
            success, payload, error = controller.record(config.N[0], config.gamma, config.E, seed=config.seed)
            return success, payload, error, controller
        results = []
        for N in config.N:
            success, payload, error = controller.estimate_gap(
                N, config.gamma, config.E, config.replicas, config.horizon, config.seed)
            if not success:
                return success, None, error, controller
            results.append(payload)
        if config.trajectory_path:
            success, _, error = controller.record(config.N[0], config.gamma, config.E, seed=config.seed)
            if not success:
                return success, None, error, controller
        return True, {'results': results}, None, controller

    controller = ReportController(config.threads)
    return (*controller.build_report(config.N, config.gamma, config.n0, config.degree, config.basis_size,
                                     config.replicas, config.horizon, config.seed, config.E), controller)


def emit(config, payload, controller) -> int:
    """Write the result where the config says. Returns the exit code."""
    if config.command == 'simulate' and config.format == 'csv':
        text = file_io.trajectory_csv(controller.get_trajectory())
    else:
        document = file_io.build_document(
            config.command, config.to_dict(), payload,
            {'library_version': __version__, 'formulas': FORMULA_REFERENCES})
        text = file_io.dumps_document(document) + "\n"

    if config.command == 'simulate' and config.trajectory_path and config.format == 'json':
        ok, message = file_io.write_trajectory_csv(config.trajectory_path, controller.get_trajectory())
        if not ok:
            console.error(message)
            return 1
        if config.output_path is not None:
            console.info(f"trajectory written to {config.trajectory_path}")

    if config.output_path is None:
        sys.stdout.write(text)
        return 0
    ok, message = file_io.write_file(config.output_path, text)
    if not ok:
        console.error(message)
        return 1
    console.success(f"{config.command} result written to {config.output_path}")
    return 0


def run(config) -> int:
    """Execute a validated RunConfig and write its artifacts. Returns the exit code."""
    success, payload, error, controller = dispatch(config)
    if not success:
        console.error(error)
        return exit_code_for(controller.last_error)
    return emit(config, payload, controller)


def main(argv=None, environ=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if not argv:
        console.print_command_table()
        return 1

    args = build_parser().parse_args(argv)
    try:
        config = load_config(args, environ)
    except KacGapError as e:
        console.error(str(e))
        return exit_code_for(e)

    return run(config)


if __name__ == '__main__':
    sys.exit(main())
