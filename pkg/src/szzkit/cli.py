"""Command-line front end: ``szzkit {trace,run,eval,mine}``.

Exit codes: 0 success, 1 usage error, 2 data or repository error,
3 LLM provider error, 130 interrupted.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from datetime import datetime, timezone

from . import __version__
from .config import load_config
from .errors import DataError, ProviderError, RepoError, SZZError
from .evaluation import ALGORITHMS, FIXES_TAG, KEYWORD, load_dataset, mine_fixes, predict, report_json, run_eval
from .llm import atomic_write
from .repo import Repository

logger = logging.getLogger("szzkit")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PROVIDER, EXIT_INTERRUPTED = 0, 1, 2, 3, 130
MINING_MODES = {"fixes-tag": FIXES_TAG, "keyword": KEYWORD}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Parser that reports usage errors with the full (sub)command help and no SystemExit(2)."""

    def error(self, message):
        self.print_help(sys.stderr)
        sys.stderr.write(f"\n{self.prog}: error: {message}\n")
        raise UsageError(message)


def _timestamp(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        moment = datetime.fromisoformat(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected epoch seconds or an ISO date, got {text!r}") from exc
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return int(moment.timestamp())


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _add_llm_flags(p):
    g = p.add_argument_group("configuration (flags override --config)")
    g.add_argument("--config", help="JSON configuration file")
    g.add_argument("--llm-mode", choices=["live", "record", "replay", "scripted"])
    g.add_argument("--cassette-dir")
    g.add_argument("--responder", help="scripted responder as module:function")
    g.add_argument("--top-n", type=_positive)
    g.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="szzkit", description="Identify bug-inducing commits from bug-fixing commits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="log to stderr (repeat for debug)")
    sub = parser.add_subparsers(dest="command", metavar="{trace,run,eval,mine}")
    sub.required = True

    p = sub.add_parser("trace", help="origin commit of one line")
    p.add_argument("--repo", required=True)
    p.add_argument("--rev", required=True)
    p.add_argument("--file", required=True)
    p.add_argument("--line", required=True, type=_positive)

    p = sub.add_parser("run", help="predict the inducing commits of one fix")
    p.add_argument("--repo", required=True)
    p.add_argument("--fix", required=True)
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--out", help="write the prediction here instead of stdout")
    _add_llm_flags(p)

    p = sub.add_parser("eval", help="evaluate an algorithm over a dataset")
    p.add_argument("--dataset", required=True, help="JSON-Lines dataset")
    p.add_argument("--repos-dir", help="directory holding one repository per dataset repo name")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--repeats", type=_positive, default=3)
    p.add_argument("--workers", type=_positive)
    p.add_argument("--out", help="write the report here instead of stdout")
    _add_llm_flags(p)

    p = sub.add_parser("mine", help="mine candidate fix commits")
    p.add_argument("--repo", required=True)
    p.add_argument("--mode", required=True, choices=sorted(MINING_MODES))
    p.add_argument("--since", type=_timestamp, help="epoch seconds or ISO date")
    p.add_argument("--rev", default="HEAD")
    return parser


def _config(args):
    config = load_config(args.config)
    config = config.with_overrides("llm", mode=args.llm_mode, cassette_dir=args.cassette_dir,
                                   responder=args.responder)
    config = config.with_overrides("pipeline", top_n=args.top_n, seed=args.seed,
                                   workers=getattr(args, "workers", None))
    if getattr(args, "repos_dir", None):
        config = config.with_overrides("paths", repos_dir=args.repos_dir)
    return config


def _emit(text: str, out=None):
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _trace(args) -> int:
    origin = Repository(args.repo).trace_line(args.rev, args.file, args.line)
    _emit(json.dumps(origin.to_dict(), sort_keys=True) + "\n")
    return EXIT_OK


def _run(args) -> int:
    config = _config(args)
    repo = Repository(args.repo)
    pred = predict(repo, args.fix, args.algorithm, config=config)
    _emit(pred.to_json() + "\n", args.out)
    return EXIT_OK


def _eval(args) -> int:
    config = _config(args)
    if not config.paths.repos_dir:
        raise DataError("no repositories directory: pass --repos-dir or set paths.repos_dir")
    dataset = load_dataset(args.dataset)
    report = run_eval(dataset, args.algorithm, config.paths.repos_dir, args.repeats, config=config)
    _emit(report_json(report), args.out)
    if report["interrupted"]:
        logger.warning("interrupted: the report covers finished entries only")
        return EXIT_INTERRUPTED
    return EXIT_OK


def _mine(args) -> int:
    notes: list[str] = []
    entries = mine_fixes(Repository(args.repo), MINING_MODES[args.mode], args.since, args.rev, notes)
    for n in notes:
        print(n, file=sys.stderr)
    _emit("".join(json.dumps(e, sort_keys=True) + "\n" for e in entries))
    return EXIT_OK


_COMMANDS = {"trace": _trace, "run": _run, "eval": _eval, "mine": _mine}


def dispatch(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    logging.basicConfig(level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ProviderError as exc:
        print(f"szzkit: provider error: {exc}", file=sys.stderr)
        return EXIT_PROVIDER
    except (RepoError, DataError, SZZError) as exc:
        print(f"szzkit: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        print("szzkit: interrupted", file=sys.stderr)
        return EXIT_INTERRUPTED


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == "__main__":
    sys.exit(main())
