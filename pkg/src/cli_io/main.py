"""Command-line entry point: python -m src.cli_io <subcommand> [options]."""

import argparse
import json
import logging
import sys
from typing import List, Optional, Tuple

from src.cli_io.fileio import jsonable
from src.cli_io.handlers import HANDLERS
from src.common import runtime
from src.common.errors import EXIT_FAILURE, EXIT_OK, exit_code_for
from src.common.models import BIPOLAR, HADAMARD_MODES, PATTERN_KINDS
from src.recon.models import RECON_METHODS

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="RunConfig JSON file")
    common.add_argument("--seed", type=int, help="base seed; every run seed is derived from it")
    common.add_argument("--deterministic", action="store_true", help="single-threaded, bit-reproducible run")
    common.add_argument("--threads", type=int, help="FFT and frame-pool worker threads")
    common.add_argument("--dtype", choices=["f32", "f64"], help="precision of written arrays")
    common.add_argument("--out", help="output directory, stem or file, depending on the command")
    common.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="cs-pat", description="Compressed-sensing photoacoustic tomography toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common], help="phantom, forward model and perturbations")

    p = sub.add_parser("subsample", parents=[common], help="apply a sensing pattern to a plane series")
    p.add_argument("--series", required=True, help="plane series file (.json sidecar or stem)")
    p.add_argument("--pattern", required=True, choices=sorted(PATTERN_KINDS))
    p.add_argument("--m-c", dest="m_c", type=int, help="number of measurements per time step")
    p.add_argument("--m-sub", dest="m_sub", type=int, help="sub-sampling factor M / M_c")
    p.add_argument("--stride", type=int, help="gSP grid stride")
    p.add_argument("--mode", choices=sorted(HADAMARD_MODES), default=BIPOLAR)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float, default=0.0)

    p = sub.add_parser("reconstruct", parents=[common], help="reconstruct an image from sensor data")
    p.add_argument("--data", required=True, help="sensor data file (.json sidecar or stem)")
    p.add_argument("--method", required=True, choices=sorted(RECON_METHODS))
    p.add_argument("--lambda", dest="lam", help="regularization parameter or 'auto'")
    p.add_argument("--sigma", type=float, help="noise level; defaults to the one recorded with the data")
    p.add_argument("--ground-truth", dest="ground_truth", help="field to report PSNR against")
    p.add_argument(
        "--bandpass", nargs=2, type=float, metavar=("LOW_HZ", "HIGH_HZ"),
        help="band-pass the data before reconstructing",
    )

    p = sub.add_parser("evaluate", parents=[common], help="PSNR and SNR report against a ground truth")
    p.add_argument("--image", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--data", help="sensor data whose SNR to report")
    p.add_argument("--sigma", type=float)

    p = sub.add_parser("mip", parents=[common], help="maximum intensity projections as PGM (and PNG)")
    p.add_argument("--image", required=True)
    p.add_argument("--axis", action="append", choices=["x", "y", "z"])
    p.add_argument("--png", action="store_true")
    p.add_argument("--vmax", type=float, help="fixed top of the colour scale")
    p.add_argument("--scale-from", dest="scale_from", help="field whose clip value sets a shared scale")

    sub.add_parser("pipeline", parents=[common], help="run a RunConfig end to end")
    return parser


def run_command(args: argparse.Namespace) -> Tuple[dict, int]:
    """Dispatch to a handler; errors become a status dict and an exit code."""
    try:
        runtime.configure(threads=args.threads, deterministic=args.deterministic)
        return HANDLERS[args.command](args), EXIT_OK
    except Exception as e:
        code = exit_code_for(e)
        if code == EXIT_FAILURE:
            logger.exception("%s failed with an unexpected %s", args.command, type(e).__name__)
            return {"status": "error", "error": f"{type(e).__name__}: {e}", "exit_code": code}, code
        logger.error("%s failed: %s", args.command, e)
        return {"status": "error", "error": str(e), "exit_code": code}, code


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    result, code = run_command(args)
    print(json.dumps(jsonable(result), indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
