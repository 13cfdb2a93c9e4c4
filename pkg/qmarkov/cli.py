"""Command-line front end: generate, check, reconstruct, lemmas, recovery-check.

Exit codes:
    0  success (and epsilon within --eps when given)
    1  threshold not met, or an unexpected toolkit error
    2  unreadable input file or bad arguments
    3  input marginals violate the density-operator invariants
    4  layout or size not supported by the command
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ValidationError

from qmarkov.certify import recovery_check
from qmarkov.config import config
from qmarkov.errors import FileFormatError, InvalidStateError, LayoutError, MalformedStringError, QMarkovError
from qmarkov.fileformat import read_marginal_set, read_state, write_marginal_set, write_state
from qmarkov.generators import gen
from qmarkov.marginal_model import check
from qmarkov.models import (
    ConsistencyReport,
    GlobalCheck,
    InstanceSpec,
    LemmaTable,
    MarkovReport,
    RecoveryCheckReport,
    RecoveryConfig,
    RunConfig,
)
from qmarkov.reconstruct import consistency_report, lemma_suite, reconstruct
from qmarkov.string_engine import parse_string

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_THRESHOLD = 1
EXIT_FORMAT = 2
EXIT_INVALID = 3
EXIT_UNSUPPORTED = 4

KINDS = ["classical-chain", "ghz", "cluster-state-1d", "sequential", "product"]


class UsageError(Exception):
    """Flag values that parse but cannot be combined."""


def _recovery(text: str) -> RecoveryConfig:
    try:
        return RecoveryConfig.parse(text)
    except (ValueError, ValidationError) as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _dims(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'") from e


def _run_config(args: argparse.Namespace) -> RunConfig:
    try:
        recovery = getattr(args, "map", None) or RecoveryConfig.parse(config.RECOVERY_MAP)
        cutoff = args.cutoff if args.cutoff is not None else config.SPECTRAL_CUTOFF
        return RunConfig(
            log_base=args.log_base,
            recovery=recovery,
            cutoff=cutoff,
            output=getattr(args, "out_report", None),
            workers=args.workers,
        )
    except ValidationError as e:
        raise UsageError(str(e)) from e


def _emit(report: BaseModel, fmt: str, path: Optional[str] = None):
    if path:
        Path(path).write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info(f"💾 Report written to {path}")
    if fmt == "json":
        print(report.model_dump_json(indent=2))
    else:
        print(render_text(report))


def render_text(report: BaseModel) -> str:
    """Plain-text rendering for terminal use."""
    lines: List[str] = []
    if isinstance(report, GlobalCheck):
        return render_text(report.markov) + "\n" + render_text(report.consistency)
    if isinstance(report, MarkovReport):
        lines.append(f"layout: {report.layout}")
        for gap in report.consistency_gaps:
            lines.append(f"gap {gap.clusters[0]}-{gap.clusters[1]} on {gap.overlap}: {gap.gap:.3e}")
        for value in report.cmi_values:
            lines.append(f"cmi {value.cluster} {value.cell}: {value.cmi:.3e}")
        lines.append(f"epsilon: {report.epsilon:.3e}")
    elif isinstance(report, ConsistencyReport):
        lines.append(f"layout: {report.layout}  recovery: {report.recovery}")
        for index, distance in sorted(report.per_cluster_distance.items()):
            lines.append(f"cluster {index}: {distance:.3e}")
        lines.append(f"delta: {report.delta:.3e}  epsilon: {report.epsilon:.3e}  ratio: {report.ratio:.3e}")
    elif isinstance(report, LemmaTable):
        lines.append(f"suite: {report.suite}  recovery: {report.recovery}  epsilon: {report.epsilon:.3e}")
        for row in report.rows:
            constant = "-" if row.constant is None else f"{row.constant:.3e}"
            lines.append(
                f"{row.lemma_id:<32} {row.order:<7} cases={row.cases:<4} "
                f"max_gap={row.max_gap:.3e} at {row.worst_case}  C={constant}"
            )
    elif isinstance(report, RecoveryCheckReport):
        for name, value in report.model_dump().items():
            lines.append(f"{name}: {value}")
    else:
        lines.append(report.model_dump_json(indent=2))
    return "\n".join(lines)


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        spec = InstanceSpec(
            kind=args.kind.replace("-", "_"),
            layout=args.layout,
            n=args.n,
            d=args.d,
            granularity=args.granularity,
            seed=args.seed,
            p=args.perturb,
        )
    except ValidationError as e:
        raise UsageError(str(e)) from e

    run = _run_config(args)
    global_state, ms = gen(spec)
    write_marginal_set(ms, args.out)
    if args.out_state:
        write_state(global_state, args.out_state)

    report = check(ms, workers=run.workers, base=run.log_base)
    logger.info(f"📊 Generated instance has ε = {report.epsilon:.3e}")
    _emit(report, args.report)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    run = _run_config(args)
    ms = read_marginal_set(args.file)
    report = check(ms, workers=run.workers, base=run.log_base)

    if args.global_state:
        consistency = consistency_report(read_state(args.global_state), ms, report.epsilon)
        _emit(GlobalCheck(markov=report, consistency=consistency), args.report)
    else:
        _emit(report, args.report)

    if args.eps is not None and report.epsilon > args.eps:
        logger.warning(f"⚠️ ε = {report.epsilon:.3e} exceeds the threshold {args.eps:.3e}")
        return EXIT_THRESHOLD
    return EXIT_OK


def cmd_reconstruct(args: argparse.Namespace) -> int:
    run = _run_config(args)
    ms = read_marginal_set(args.file)
    string = parse_string(args.string, ms.geometry) if args.string else None

    global_state, report = reconstruct(ms, run.recovery, string=string, workers=run.workers, base=run.log_base)
    if args.out_state:
        write_state(global_state, args.out_state)
    _emit(report, args.report, run.output)
    return EXIT_OK


def cmd_lemmas(args: argparse.Namespace) -> int:
    run = _run_config(args)
    ms = read_marginal_set(args.file)
    epsilon = check(ms, workers=run.workers, base=run.log_base).epsilon
    table = lemma_suite(ms, args.suite, run.recovery, workers=run.workers, epsilon=epsilon)
    _emit(table, args.report, run.output)
    return EXIT_OK


def cmd_recovery_check(args: argparse.Namespace) -> int:
    run = _run_config(args)
    if len(args.dims) != 3:
        raise UsageError(f"--dims needs three values (A,B,C), got {args.dims}")
    report = recovery_check(args.dims, args.trials, run.recovery, source=args.source, seed=args.seed, base=run.log_base)
    _emit(report, args.report, run.output)

    if run.recovery.kind == "averaged" and not report.bound_holds(args.tol):
        return EXIT_THRESHOLD
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmarkov", description="Markovian marginal certification and reconstruction")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", choices=["json", "text"], default="json", help="stdout report format")
    common.add_argument("--log-base", type=float, default=config.LOG_BASE, help="logarithm base for entropies")
    common.add_argument("--cutoff", type=float, default=None, help="relative spectral cutoff")
    common.add_argument("--workers", type=int, default=config.MAX_WORKERS, help="threads for independent checks")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="write a ground-truth instance")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--layout", choices=["chain", "hexgrid"], default="chain")
    p.add_argument("--n", type=int, default=8, help="vertices (chain) or cells per side (hexgrid)")
    p.add_argument("--d", type=int, default=2, help="local dimension")
    p.add_argument("--granularity", type=int, default=1, help="vertices per hexgrid cell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--perturb", type=float, default=0.0, help="depolarization of the stored marginals")
    p.add_argument("--out", default="marginals.mm")
    p.add_argument("--out-state", default=None, help="also write the global state")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("check", parents=[common], help="certify the epsilon-Markov conditions of a file")
    p.add_argument("file")
    p.add_argument("--eps", type=float, default=None, help="exit 1 when epsilon exceeds this")
    p.add_argument("--global", dest="global_state", default=None, help="a .state file to compare against")
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("reconstruct", parents=[common], help="build the proposed global state")
    p.add_argument("file")
    p.add_argument("--map", type=_recovery, default=None, help="petz | rotated:t | averaged:K,T")
    p.add_argument("--string", default=None, help="custom marginal string instead of the proposed one")
    p.add_argument("--out-report", default=None)
    p.add_argument("--out-state", default=None)
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("lemmas", parents=[common], help="measure every relation of a suite")
    p.add_argument("file")
    p.add_argument("--suite", choices=["1d", "2d"], required=True)
    p.add_argument("--map", type=_recovery, default=None)
    p.add_argument("--out-report", default=None)
    p.set_defaults(handler=cmd_lemmas)

    p = sub.add_parser("recovery-check", parents=[common], help="Monte-Carlo test of a recovery map")
    p.add_argument("--dims", type=_dims, default=[2, 2, 2], help="d_A,d_B,d_C")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--map", type=_recovery, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", choices=["random", "classical", "product"], default="random")
    p.add_argument("--tol", type=float, default=1e-6, help="allowed fidelity-bound margin")
    p.add_argument("--out-report", default=None)
    p.set_defaults(handler=cmd_recovery_check)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=config.LOG_LEVEL,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config.validate()
    except ValueError as e:
        logger.error(f"❌ {e}")
        return EXIT_FORMAT

    try:
        return args.handler(args)
    except (UsageError, MalformedStringError) as e:
        logger.error(f"❌ {e}")
        return EXIT_FORMAT
    except FileFormatError as e:
        logger.error(f"❌ Cannot parse input: {e}")
        return EXIT_FORMAT
    except InvalidStateError as e:
        logger.error(f"❌ Invalid state: {e}")
        return EXIT_INVALID
    except LayoutError as e:
        logger.error(f"❌ Unsupported: {e}")
        return EXIT_UNSUPPORTED
    except (QMarkovError, ValueError) as e:
        logger.exception(f"❌ {args.command} failed: {e}")
        return EXIT_THRESHOLD
