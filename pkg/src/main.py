import argparse
import asyncio
import logging
import sys

from config.settings import FTC_OUTPUT_DIR, LOG_LEVEL
from handlers import cmd_roa, cmd_simulate, cmd_synth, cmd_verify


class FtcArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with 1, like every other configuration problem"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def create_parser() -> argparse.ArgumentParser:
    parser = FtcArgumentParser(
        prog="ftc",
        description="Certified passive fault-tolerant static gains for saturated actuators"
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging (overrides LOG_LEVEL)")
    commands = parser.add_subparsers(dest="command", required=True)

    synth = commands.add_parser("synth", help="synthesize a certified controller")
    synth.add_argument("--config", required=True, help="problem file (JSON)")
    synth.add_argument("--out", default=f"{FTC_OUTPUT_DIR}/controller.json", help="controller file to write")
    synth.add_argument("--threads", type=int, help="verifier worker threads (FTC_THREADS otherwise)")
    synth.add_argument("--dump-sdp", dest="dump_sdp", help="write the first learner SDP as sparse triplets")

    verify = commands.add_parser("verify", help="re-verify a stored controller")
    verify.add_argument("--config", required=True, help="problem file (JSON)")
    verify.add_argument("--controller", required=True, help="controller file")
    verify.add_argument("--out", help="optional verification report (JSON)")
    verify.add_argument("--threads", type=int, help="verifier worker threads (FTC_THREADS otherwise)")

    simulate = commands.add_parser("simulate", help="simulate a controller on a fault scenario")
    simulate.add_argument("--config", required=True, help="problem file (JSON)")
    simulate.add_argument("--controller", required=True, help="controller file")
    simulate.add_argument("--scenario", required=True, help="scenario file (JSON)")
    simulate.add_argument("--out", default=f"{FTC_OUTPUT_DIR}/trace.csv", help="trace CSV to write")

    roa = commands.add_parser("roa", help="largest certified invariant ellipsoid of a stored gain")
    roa.add_argument("--config", required=True, help="problem file (JSON)")
    roa.add_argument("--controller", required=True, help="controller file")
    roa.add_argument("--out", default=f"{FTC_OUTPUT_DIR}/roa.json", help="ellipsoid file to write")
    roa.add_argument("--threads", type=int, help="verifier worker threads (FTC_THREADS otherwise)")
    roa.add_argument("--compare-scale", dest="compare_scale", type=float,
                     help="also compute the ellipsoid of the gain scaled by this factor")

    for sub in (synth, verify, simulate, roa):
        sub.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS,
                         help="debug logging (overrides LOG_LEVEL)")
    return parser


async def main_async(args: argparse.Namespace) -> int:
    if args.command == "synth":
        return await cmd_synth(args.config, args.out, args.threads, args.dump_sdp)
    if args.command == "verify":
        return await cmd_verify(args.config, args.controller, args.out, args.threads)
    if args.command == "simulate":
        return await cmd_simulate(args.config, args.controller, args.scenario, args.out)
    return await cmd_roa(args.config, args.controller, args.out, args.threads, args.compare_scale)


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)

    # Configure logging
    logging.basicConfig(
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        level=logging.DEBUG if args.verbose else getattr(logging, LOG_LEVEL, logging.INFO))

    return asyncio.run(main_async(args))


if __name__ == '__main__':
    sys.exit(main())
