import argparse
import logging
import sys
from typing import List, Optional

from api import CatStokesAPI
from config import COMMANDS, DEFAULT_SEED, FLOW_TOL, ODE_TOL, THREADS
from functions.errors import CatStokesError, InputError
from functions.report_functions import parse_float_list, parse_int_list, parse_matrix, write_report

# Set up logging
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

MATRIX_COMMANDS = {'gt', 'stokes', 'rhb', 'am', 'isoflow', 'oracle'}
LAMBDA_COMMANDS = {'crystal', 'qstokes', 'rll'}
TOL_COMMANDS = {'isoflow', 'oracle'}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='catstokes',
        description="Stokes matrices at the caterpillar point, their quantum versions and crystal limits.",
        epilog='\n'.join(f"  {name:8s} {text}" for name, text in COMMANDS.items()),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('command', choices=sorted(COMMANDS), help="Computation to run")
    parser.add_argument('--matrix', help="Hermitian matrix as JSON (entries are numbers or [re, im] pairs), or a file")
    parser.add_argument('--lambda', dest='lam', help="Dominant weight, comma separated (e.g. 2,1,0)")
    parser.add_argument('--u', help="Irregular data u_1 < ... < u_n, comma separated")
    parser.add_argument('--h', type=float, default=-1.0, help="Quantum parameter h (default: -1)")
    parser.add_argument('--q-list', dest='q_list', help="q values in (0, 1) for the WKB sweep, comma separated")
    parser.add_argument('--ratio', type=float, default=1e6, help="Caterpillar seeding ratio for isoflow")
    parser.add_argument('--tol', type=float,
                        help=f"Integration tolerance for isoflow (default: {FLOW_TOL}) and oracle (default: {ODE_TOL})")
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED, help=f"Random seed for check (default: {DEFAULT_SEED})")
    parser.add_argument('--threads', type=int, default=THREADS, help="Worker threads for check")
    parser.add_argument('--out', help="Write the report to this path instead of stdout")
    parser.add_argument('--format', choices=['json', 'csv'], default='json', help="Report format (default: json)")
    parser.add_argument('--verify', action='store_true', help="Also verify the crystal axioms")
    parser.add_argument('--quick', action='store_true', help="Reduced sample counts for check")
    return parser


def run(args: argparse.Namespace, api: Optional[CatStokesAPI] = None) -> dict:
    """Dispatch one command; raises CatStokesError subclasses on failure"""
    api = api if api is not None else CatStokesAPI()
    command = args.command
    if args.tol is not None:
        if command not in TOL_COMMANDS:
            raise InputError(f"--tol applies to {' and '.join(sorted(TOL_COMMANDS))} only")
        if args.tol <= 0:
            raise InputError(f"--tol must be positive, got {args.tol}")
    if command in MATRIX_COMMANDS and not args.matrix:
        raise InputError(f"{command} needs --matrix")
    if command in LAMBDA_COMMANDS and not args.lam:
        raise InputError(f"{command} needs --lambda")
    A = parse_matrix(args.matrix) if command in MATRIX_COMMANDS else None
    lam = parse_int_list(args.lam) if command in LAMBDA_COMMANDS else None
    u = parse_float_list(args.u) if args.u else None

    if command == 'gt':
        return api.gt(A)
    if command == 'stokes':
        return api.stokes(A, u)
    if command == 'rhb':
        return api.rhb(A)
    if command == 'am':
        return api.am(A)
    if command == 'isoflow':
        if u is None:
            raise InputError("isoflow needs --u")
        return api.isoflow(A, u, args.ratio, tol=args.tol if args.tol is not None else FLOW_TOL)
    if command == 'oracle':
        return api.oracle(A, u, tol=args.tol if args.tol is not None else ODE_TOL)
    if command == 'crystal':
        return api.crystal(lam, verify=args.verify)
    if command == 'qstokes':
        q_list = parse_float_list(args.q_list) if args.q_list else None
        return api.qstokes(lam, args.h, q_list)
    if command == 'rll':
        return api.rll(lam, args.h)
    return api.check(seed=args.seed, quick=args.quick, threads=args.threads)


def _passed(report: dict) -> bool:
    if 'passed' in report:
        return bool(report['passed'])
    if 'axioms' in report:
        return bool(report['axioms']['passed'])
    return True


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = run(args)
    except InputError as e:
        print(f"[error] {str(e)}", file=sys.stderr)
        return 2
    except CatStokesError as e:
        logger.error(f"Error in {args.command}: {str(e)}")
        report = {'command': args.command, 'passed': False, 'error': f"{type(e).__name__}: {str(e)}"}
        text = write_report(report, args.out)
        if not args.out:
            print(text, end='')
        return 1
    try:
        text = write_report(report, args.out, args.format)
    except InputError as e:
        print(f"[error] {str(e)}", file=sys.stderr)
        return 2
    if not args.out:
        print(text, end='')
    return 0 if _passed(report) else 1


if __name__ == '__main__':
    sys.exit(main())
