"""Command-line surface.

Exit codes: 0 completed (verdicts live in the report, never in the exit
code), 1 invalid input, 2 resource budget exceeded.  Reports go to stdout
or the -o file; diagnostics and wall-time go to stderr so repeated runs
with identical (config, seed, input) produce byte-identical reports at any
thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction

from . import __version__
from .builders import FamilySpec, build, load_chain, save_chain
from .chain import (
    DEFAULT_DEPTH_LIMIT,
    DEFAULT_MEMORY_BUDGET,
    PRNG_ALGORITHM,
    PointApprox,
    sample_uniform,
    validate_chain,
)
from .errors import BudgetError, InvalidChainError, SchemaError
from .farber import farber_check, local_farber_check, stabilizer_count_oracle
from .holonomy import density_profile, fixed_set_report
from .lcs import witness_search
from .mealy import load_machine
from . import reports
from .words import parse_word

THREADS_ENV = "CANTORACT_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def _add_common(sp, *, depth_default=10):
    sp.add_argument("--depth", type=int, default=depth_default, help="report depth N")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=None,
                    help=f"worker threads (flag wins over ${THREADS_ENV})")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--depth-limit", type=int, default=DEFAULT_DEPTH_LIMIT)
    sp.add_argument("--memory-budget", type=int, default=DEFAULT_MEMORY_BUDGET)


def _build_parser() -> _Parser:
    p = _Parser(prog="cantoract", description="tower actions: build, validate, analyze")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="build a family chain and write a chain file")
    b.add_argument("family", choices=("odometer", "toral", "dihedral", "heisenberg",
                                      "fragmented", "fat_cantor", "mealy"))
    b.add_argument("--base", type=int, default=2)
    b.add_argument("--dim", type=int, default=2)
    b.add_argument("--machine", default=None, help="machine file for the mealy family")
    b.add_argument("--schedule", default=None,
                   help="JSON map of cylinder level to puncture level (fat_cantor)")
    _add_common(b)

    v = sub.add_parser("validate", help="check every tower invariant to a depth")
    v.add_argument("chain")
    _add_common(v, depth_default=0)  # 0 means: all levels in the file

    f = sub.add_parser("farber", help="fixed-coset ratio check per word")
    f.add_argument("chain")
    f.add_argument("--max-word-len", type=int, default=4)
    f.add_argument("--words", default=None, help="file with one word per line")
    f.add_argument("--tol", default="1/64")
    _add_common(f)

    lf = sub.add_parser("local-farber", help="fixed-coset check localized to a base level")
    lf.add_argument("chain")
    lf.add_argument("--base-level", type=int, default=1)
    lf.add_argument("--max-word-len", type=int, default=4)
    lf.add_argument("--tol", default="1/64")
    lf.add_argument("--max-schreier", type=int, default=128)
    _add_common(lf)

    h = sub.add_parser("holonomy", help="fixed set, interior bound, holonomy estimate")
    h.add_argument("chain")
    h.add_argument("--word", required=True)
    _add_common(h)

    d = sub.add_parser("density", help="fixed-set density profile around a point")
    d.add_argument("chain")
    d.add_argument("--word", required=True)
    d.add_argument("--point", required=True, help="point index at --depth, or 'sample'")
    _add_common(d)

    lw = sub.add_parser("lcs-witness", help="holonomy witness search per commutator class")
    lw.add_argument("chain")
    lw.add_argument("--class", dest="max_class", type=int, default=2)
    lw.add_argument("--max-word-len", type=int, default=4)
    lw.add_argument("--conj-len", type=int, default=2)
    lw.add_argument("--max-candidates", type=int, default=256)
    _add_common(lw)

    oracle = sub.add_parser("oracle", help="small-group oracles")
    osub = oracle.add_subparsers(dest="oracle_command", required=True)
    sc = osub.add_parser("stab-count", help="count point stabilizers in the finite image")
    sc.add_argument("chain")
    sc.add_argument("--level", type=int, required=True)
    sc.add_argument("--word", required=True)
    sc.add_argument("--max-order", type=int, default=100_000)
    _add_common(sc)

    return p


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SchemaError(f"${THREADS_ENV} must be an integer, got {env!r}")
    return 1


def _tolerance(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad tolerance {text!r}: {exc}") from exc
    if not 0 < value < 1:
        raise SchemaError(f"tolerance must lie strictly in (0, 1), got {text!r}")
    return value


def _load(args):
    return load_chain(args.chain, depth_limit=args.depth_limit,
                      memory_budget=args.memory_budget)


def _config(args, **extra) -> dict:
    # thread count is deliberately not echoed: reports are byte-identical
    # across thread counts by contract
    cfg = {
        "depth": args.depth,
        "seed": args.seed,
        "format": args.format,
        "depth_limit": args.depth_limit,
        "memory_budget": args.memory_budget,
    }
    cfg.update(extra)
    return cfg


def _envelope(command: str, args, config: dict, chain=None) -> dict:
    payload = {
        "tool": {"name": "cantoract", "version": __version__},
        "command": command,
        "prng": PRNG_ALGORITHM,
        "config": config,
    }
    if chain is not None:
        payload["chain"] = {
            "name": chain.name,
            "generators": list(chain.alphabet.names),
            "source": getattr(args, "chain", None),
        }
    return payload


def _csv_meta(envelope: dict) -> dict:
    meta = {"tool": f"cantoract {__version__}", "command": envelope["command"],
            "prng": envelope["prng"]}
    for key, value in envelope["config"].items():
        meta[f"config.{key}"] = json.dumps(value, sort_keys=True)
    if "chain" in envelope:
        meta["chain"] = envelope["chain"]["name"]
    return meta


def _emit(args, envelope: dict, csv_parts=None) -> None:
    if args.format == "csv" and csv_parts is not None:
        header, rows = csv_parts
        text = reports.render_csv(envelope["command"], header, rows, _csv_meta(envelope))
    else:
        text = reports.render_json(envelope)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_build(args) -> int:
    params: dict = {"depth_limit": args.depth_limit, "memory_budget": args.memory_budget}
    if args.family in ("odometer", "heisenberg"):
        params["base"] = args.base
    elif args.family == "toral":
        params["base"] = args.base
        params["dim"] = args.dim
    elif args.family == "fat_cantor" and args.schedule is not None:
        try:
            raw = json.loads(args.schedule)
            params["schedule"] = {int(k): int(v) for k, v in raw.items()}
        except (json.JSONDecodeError, TypeError, ValueError, AttributeError) as exc:
            raise SchemaError(f"bad --schedule value: {exc}") from exc
    elif args.family == "mealy":
        if not args.machine:
            raise SchemaError("the mealy family needs --machine FILE")
        params["machine"] = load_machine(args.machine)
    chain = build(FamilySpec(args.family, params))
    report = validate_chain(chain, args.depth)
    if not report.ok:
        v = report.violations[0]
        raise InvalidChainError(
            f"built chain failed validation: {v.invariant} at (level={v.level}, "
            f"generator={v.generator}, point={v.point})",
            report=report,
        )
    if not args.output:
        raise SchemaError("build needs -o FILE for the chain file")
    save_chain(chain, args.depth, args.output)
    return 0


def _run_validate(args) -> int:
    chain = load_chain(args.chain, validate=False, depth_limit=args.depth_limit,
                       memory_budget=args.memory_budget)
    depth = args.depth if args.depth > 0 else chain.depth_limit
    report = validate_chain(chain, depth)
    config = _config(args, depth=depth)
    envelope = _envelope("validate", args, config, chain)
    envelope["result"] = reports.validation_payload(report)
    _emit(args, envelope, reports.validation_csv(report))
    if not report.ok:
        for v in report.violations:
            print(
                f"violation: {v.invariant} at (level={v.level}, generator={v.generator}, "
                f"point={v.point}): {v.detail}",
                file=sys.stderr,
            )
        return 1
    return 0


def _run_farber(args) -> int:
    chain = _load(args)
    tol = _tolerance(args.tol)
    words = None
    if args.words:
        with open(args.words, "r", encoding="utf-8") as fh:
            words = [parse_word(line.strip(), chain.alphabet)
                     for line in fh if line.strip()]
    report = farber_check(
        chain,
        words=words,
        max_word_len=args.max_word_len,
        depth=args.depth,
        tolerance=tol,
        threads=_threads(args),
    )
    config = _config(args, tolerance=reports.frac(tol), max_word_len=args.max_word_len,
                     words_file=args.words)
    envelope = _envelope("farber", args, config, chain)
    envelope["result"] = reports.farber_payload(report, chain.alphabet)
    _emit(args, envelope, reports.farber_csv(report, chain.alphabet))
    return 0


def _run_local_farber(args) -> int:
    chain = _load(args)
    tol = _tolerance(args.tol)
    report = local_farber_check(
        chain,
        args.base_level,
        max_word_len=args.max_word_len,
        depth=args.depth,
        tolerance=tol,
        max_generators=args.max_schreier,
        threads=_threads(args),
    )
    config = _config(args, tolerance=reports.frac(tol), max_word_len=args.max_word_len,
                     base_level=args.base_level, max_schreier=args.max_schreier)
    envelope = _envelope("local-farber", args, config, chain)
    envelope["result"] = reports.farber_payload(report, chain.alphabet)
    _emit(args, envelope, reports.farber_csv(report, chain.alphabet))
    return 0


def _run_holonomy(args) -> int:
    chain = _load(args)
    word = parse_word(args.word, chain.alphabet)
    report = fixed_set_report(chain, word, args.depth)
    config = _config(args, word=args.word)
    envelope = _envelope("holonomy", args, config, chain)
    envelope["result"] = reports.fixed_set_payload(report, chain.alphabet)
    _emit(args, envelope, reports.fixed_set_csv(report, chain.alphabet))
    return 0


def _run_density(args) -> int:
    chain = _load(args)
    word = parse_word(args.word, chain.alphabet)
    if args.point == "sample":
        point = sample_uniform(chain, args.depth, args.seed)
    else:
        try:
            index = int(args.point)
        except ValueError:
            raise SchemaError(f"--point must be an integer or 'sample', got {args.point!r}")
        point = PointApprox(args.depth, index)
        if not 0 <= index < chain.size(args.depth):
            raise SchemaError(f"point {index} out of range at depth {args.depth}")
    profile = density_profile(chain, word, point)
    config = _config(args, word=args.word, point=args.point)
    envelope = _envelope("density", args, config, chain)
    envelope["result"] = reports.density_payload(profile, chain.alphabet)
    _emit(args, envelope, reports.density_csv(profile, chain.alphabet))
    return 0


def _run_lcs(args) -> int:
    chain = _load(args)
    report = witness_search(
        chain,
        args.max_class,
        max_word_len=args.max_word_len,
        conj_len=args.conj_len,
        depth=args.depth,
        max_candidates=args.max_candidates,
        threads=_threads(args),
    )
    config = _config(args, max_class=args.max_class, max_word_len=args.max_word_len,
                     conj_len=args.conj_len, max_candidates=args.max_candidates)
    envelope = _envelope("lcs-witness", args, config, chain)
    envelope["result"] = reports.lcs_payload(report, chain.alphabet)
    _emit(args, envelope, reports.lcs_csv(report, chain.alphabet))
    return 0


def _run_oracle(args) -> int:
    chain = _load(args)
    word = parse_word(args.word, chain.alphabet)
    report = stabilizer_count_oracle(chain, word, args.level, args.max_order)
    config = _config(args, word=args.word, level=args.level, max_order=args.max_order)
    envelope = _envelope("oracle-stab-count", args, config, chain)
    envelope["result"] = reports.stab_count_payload(report, chain.alphabet)
    _emit(args, envelope, reports.stab_count_csv(report, chain.alphabet))
    return 0


_RUNNERS = {
    "build": _run_build,
    "validate": _run_validate,
    "farber": _run_farber,
    "local-farber": _run_local_farber,
    "holonomy": _run_holonomy,
    "density": _run_density,
    "lcs-witness": _run_lcs,
    "oracle": _run_oracle,
}


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = _build_parser().parse_args(argv)
        return _RUNNERS[args.command](args)
    except BudgetError as exc:
        print(f"error: budget {exc.budget} exceeded: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, InvalidChainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        print(f"wall-time: {elapsed_ms:.1f} ms", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
