"""
Command line front end.

    python -m app.cli state --model f1 --beta-re 0.04 --lambda-re 0.7
    python -m app.cli qfunc --model f1 --beta-re 0.04 --grid -2:2:11 --out q.csv
    python -m app.cli verify

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

import argparse
import logging
import os
import re
import sys
from typing import List, Optional

from dotenv import load_dotenv

from app.models import Command, ModelKind, OutputFormat, OverlapKind, Parity, RunConfig
from app.services.command_service import command_service
from app.utils import dumps_csv, dumps_json, parse_grid, write_text

load_dotenv()

logger = logging.getLogger(__name__)

DEFAULT_FORMATS = {
    Command.STATE: OutputFormat.JSON,
    Command.OVERLAP: OutputFormat.JSON,
    Command.QFUNC: OutputFormat.CSV,
    Command.WAVEFUNCTION: OutputFormat.CSV,
    Command.VERIFY: OutputFormat.JSON,
}


def _complex_flag(parser: argparse.ArgumentParser, name: str, help_text: str, default: Optional[float] = 0.0) -> None:
    parser.add_argument(f"--{name}-re", type=float, default=default, help=f"Re {help_text}")
    parser.add_argument(f"--{name}-im", type=float, default=0.0, help=f"Im {help_text}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", choices=[m.value for m in ModelKind], default=ModelKind.F1.value,
                        help="f1 = a² + βa†², f2 = ab + βa†b†")
    _complex_flag(common, "beta", "β")
    _complex_flag(common, "lambda", "λ")
    common.add_argument("--dim", type=int, default=None, help="levels per mode (default 256 for f1, 48 for f2)")
    common.add_argument("--guard", type=int, default=None, help="boundary guard band (default dim/16)")
    common.add_argument("--parity", choices=[p.value for p in Parity], default=Parity.EVEN.value,
                        help="single-mode component when no weights are given")
    _complex_flag(common, "c-even", "weight of the even component", default=None)
    _complex_flag(common, "c-odd", "weight of the odd component", default=None)
    common.add_argument("--family", action="append", default=None, metavar="N_A:N_B",
                        help="pair family '0:p' or 'q:0'; repeat for superpositions")
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)

    parser = argparse.ArgumentParser(prog="eigenstates", description="Eigenstates of a² + βa†² and ab + βa†b†")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("state", parents=[common], help="coefficient table of an eigenstate")

    overlap = commands.add_parser("overlap", parents=[common], help="closed-form overlap with a probe state")
    overlap.add_argument("--kind", choices=[k.value for k in OverlapKind], default=OverlapKind.SQUEEZED.value,
                         help="squeezed (Caves-Schumaker for f2), coherent or number")
    _complex_flag(overlap, "point", "μ, α or γ")
    _complex_flag(overlap, "delta", "δ (f2 coherent)")
    overlap.add_argument("--n", type=int, default=0, help="number-state (or family diagonal) index")

    qfunc = commands.add_parser("qfunc", parents=[common], help="Q-function on a grid")
    qfunc.add_argument("--grid", required=True, help="real-axis grid 'min:max:steps'")
    qfunc.add_argument("--grid-im", default=None, help="imaginary-axis grid (default: --grid)")
    _complex_flag(qfunc, "delta", "fixed δ of the f2 slice")

    wavefunction = commands.add_parser("wavefunction", parents=[common], help="f(x)/f(x0) on an x grid (f1)")
    wavefunction.add_argument("--grid", required=True, help="x grid 'min:max:steps'")
    wavefunction.add_argument("--x0", type=float, default=0.5, help="reference point")

    verify = commands.add_parser("verify", parents=[common], help="run the acceptance suite")
    verify.add_argument("--pair-dim", type=int, default=None, help="levels per mode of the two-mode checks")
    verify.add_argument("--expect-fail", action="store_true",
                        help="run the wrong-sector negative control instead; passes when the check fails")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    def pair(name: str) -> Optional[complex]:
        re = getattr(args, f"{name}_re", None)
        return None if re is None else complex(re, getattr(args, f"{name}_im", 0.0))

    fields = {
        "command": args.command,
        "model": args.model,
        "beta": pair("beta"),
        "lambda": pair("lambda"),
        "dim": args.dim,
        "guard": args.guard,
        "parity": args.parity,
        "c_even": pair("c_even"),
        "c_odd": pair("c_odd"),
        "families": args.family or ["0:0"],
        "out": args.out,
        "format": args.format,
    }
    if args.command == "overlap":
        fields.update(kind=args.kind, point=pair("point"), delta=pair("delta"), n=args.n)
    elif args.command == "qfunc":
        fields.update(
            grid=parse_grid(args.grid),
            grid_im=parse_grid(args.grid_im) if args.grid_im else None,
            delta=pair("delta")
        )
    elif args.command == "wavefunction":
        fields.update(grid=parse_grid(args.grid), x0=args.x0)
    elif args.command == "verify":
        fields.update(pair_dim=args.pair_dim, expect_fail=args.expect_fail)
    return RunConfig(**fields)


def render(payload: dict, output_format: OutputFormat) -> str:
    if output_format == OutputFormat.JSON:
        return dumps_json(payload)
    return dumps_csv(*command_service.table(payload))


GRID_FLAGS = ("--grid", "--grid-im")
NEGATIVE_VALUE = re.compile(r"-[\d.]")


def join_grid_values(argv: List[str]) -> List[str]:
    """Glue grid flags to values such as `-2:2:11` that argparse would take for options."""
    joined: List[str] = []
    i = 0
    while i < len(argv):
        token = argv[i]
        if token in GRID_FLAGS and i + 1 < len(argv) and NEGATIVE_VALUE.match(argv[i + 1]):
            joined.append(f"{token}={argv[i + 1]}")
            i += 2
            continue
        joined.append(token)
        i += 1
    return joined


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=os.getenv("EIGEN_LOG_LEVEL", "WARNING").upper(),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(join_grid_values(sys.argv[1:] if argv is None else list(argv)))
    except SystemExit as e:
        return int(e.code or 0)

    try:
        cfg = config_from_args(args)
        payload = command_service.run(cfg)
        output_format = cfg.format or DEFAULT_FORMATS[cfg.command]
        text = render(payload, output_format)
    except ValueError as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"{parser.prog} {args.command}: error: {e}", file=sys.stderr)
        return 2

    try:
        write_text(text, cfg.out)
    except OSError as e:
        logger.error(f"{args.command} output to {cfg.out} failed: {e}")
        print(f"{parser.prog} {args.command}: error: cannot write {cfg.out}: {e.strerror or e}", file=sys.stderr)
        return 1
    if cfg.command == Command.VERIFY:
        return 0 if payload["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
