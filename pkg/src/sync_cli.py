#!/usr/bin/env python3
"""
Sync CLI – v1.0

Command-line front end for the synchronizing-sequence toolkit.

Usage:
    python src/sync_cli.py classify data/example_inputs/two_ergodic_sm.json
    python src/sync_cli.py sync data/example_inputs/loop_sm.json --target-place p4 --method sts
    python src/sync_cli.py gen --m 4 --q 8 --alphabet-size 3 --seed 42 --out data_outputs/net.json
    python src/sync_cli.py bench --m-max 4 --q-max 8 --trials 20 --out data_outputs/bench.csv --plot

Exit codes:
    0 success · 1 net file unreadable or malformed · 2 no SS exists · 3 method insufficient
    4 node budget / timeout · 5 invalid arguments
"""

import argparse
import sys
from enum import IntEnum
from itertools import islice

import orjson
from loguru import logger

from genbench import BenchGrid, GenParams, plot_ratio_tables, random_sm, run_benchmark, write_outputs
from net_io import NetDocument, dumps_net, load_net, save_net
from petri_net import (
    apply_sequence,
    check_determinism,
    format_marking,
    is_state_machine,
    marking_from_mapping,
    place_marking,
    require_deterministic,
    token_count,
)
from reachability import build_rg, build_rg_from, count_reachable_sm, k_token_markings
from rg_sync import SyncMethod, ss_on_rg
from settings import (
    DEFAULT_K_VALUES,
    DEFAULT_M_RANGE,
    DEFAULT_NODE_BUDGET,
    DEFAULT_Q_MAX,
    DEFAULT_SEED,
    DEFAULT_TIME_BUDGET_S,
    DEFAULT_TRIALS,
    DEFAULT_VERIFY_BUDGET,
    N_JOBS,
    OUT_DIR,
    configure_logging,
    deadline_after,
)
from sm_structure import condense, decompose, ergodic_count, ss_single_ergodic, transient_count
from sts_sync import SearchMode, ss_via_sts
from subnet_sync import SubnetDecomposition, ss_via_subnets, verify_on_subnets
from sync_errors import (
    BoundednessError,
    GenerationError,
    NetInputError,
    NetParseError,
    NetStructureError,
    ObstructionError,
    SearchTimeoutError,
    VerificationError,
)


class ExitCode(IntEnum):
    OK = 0
    PARSE_ERROR = 1
    NO_SS = 2
    METHOD_FAILED = 3
    BUDGET = 4
    INVALID_ARGS = 5


class CliError(Exception):
    def __init__(self, code, message):
        self.code = code
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; here 2 means "no SS exists"."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(ExitCode.INVALID_ARGS)


def _load(path):
    try:
        return load_net(path)
    except (NetInputError, NetStructureError) as exc:
        raise CliError(ExitCode.PARSE_ERROR, f"{path}: {exc}") from exc


# ------------------------------------------------------------
# classify
# ------------------------------------------------------------
def cmd_classify(args):
    doc = _load(args.net)
    net = doc.net
    k = args.k if args.k is not None else (token_count(doc.marking) if doc.marking is not None else 1)
    lines = [f"places: {net.net.m}  transitions: {net.net.q}  events: {len(net.alphabet)}"]
    sm = is_state_machine(net)
    lines.append(f"SM: {'yes' if sm else 'no'}")
    report = check_determinism(net)
    lines.append(f"deterministic: {'yes' if report.ok else 'no (' + str(report) + ')'}")
    if sm:
        partition = decompose(net)
        eta, mu = ergodic_count(partition), transient_count(partition)
        transient = ",".join(str(c) for c in partition.transient) or "none"
        ergodic = ",".join(str(c) for c in partition.ergodic)
        lines.append(f"components: transient: {transient}; ergodic: {ergodic}; η={eta}")
        lines.append(f"μ={mu}")
        if mu == 0 and eta == 1:
            lines.append("strongly connected: yes")
            lines.append(f"reachable markings (k={k}): {count_reachable_sm(net.net.m, k)}")
        else:
            lines.append("strongly connected: no")
            if eta == 1:
                cg = condense(net, partition)
                lines.append(f"condensed levels: l_max={cg.l_max}")
    print("\n".join(lines))
    return ExitCode.OK


# ------------------------------------------------------------
# sync
# ------------------------------------------------------------
def _parse_marking(net, text):
    try:
        raw = orjson.loads(text)
    except orjson.JSONDecodeError as exc:
        raise CliError(ExitCode.INVALID_ARGS, f"--target-marking is not JSON: {exc.msg}") from exc
    if isinstance(raw, dict):
        return marking_from_mapping(net, raw)
    if isinstance(raw, list) and len(raw) == net.net.m:
        return tuple(int(c) for c in raw)
    raise CliError(ExitCode.INVALID_ARGS, "--target-marking must be a place->count object or a full vector")


def _resolve_target(args, doc):
    """(target marking, single target place or None, k)."""
    net = doc.net
    if args.target_marking is not None:
        marking = _parse_marking(net, args.target_marking)
    elif args.target_place is not None:
        marking = None
    elif doc.target_marking is not None:
        marking = doc.target_marking
    elif doc.target_place is not None:
        marking = None
    else:
        raise CliError(ExitCode.INVALID_ARGS, "no target: pass --target-place / --target-marking or set one in the file")

    if marking is None:
        place = args.target_place or doc.target_place
        net.net.p_index(place)
        k = args.k if args.k is not None else (token_count(doc.marking) if doc.marking is not None else 1)
        return place_marking(net, place, k), place, k

    loaded = [p for p, c in zip(net.places, marking) if c]
    place = loaded[0] if len(loaded) == 1 else None
    return marking, place, token_count(marking)


def _uncertainty_rg(doc, k, budget, deadline):
    net = doc.net
    if doc.marking is not None:
        return build_rg(net, doc.marking, budget, deadline)
    if is_state_machine(net):
        return build_rg_from(net, k_token_markings(net.net.m, k), budget, deadline)
    raise CliError(ExitCode.INVALID_ARGS, "the RG method on a non-SM net needs a `marking` in the net file")


def _via_rg(doc, target, k, budget, deadline):
    require_deterministic(doc.net)
    rg = _uncertainty_rg(doc, k, budget, deadline)
    logger.info(f"📐 Uncertainty: {len(rg):,} markings")
    return ss_on_rg(doc.net, rg, target, deadline)


def _need_place(place, method):
    if place is None:
        raise CliError(ExitCode.INVALID_ARGS, f"method {method} needs a single target place")


def _decomposition(doc):
    if not doc.subnets:
        raise CliError(ExitCode.INVALID_ARGS, "method subnet needs `subnets` in the net file")
    return SubnetDecomposition.infer(doc.net, doc.subnets)


def _via_subnets(doc, target, budget, deadline):
    net = doc.net
    d = _decomposition(doc)
    idx = net.net.place_index
    targets = [tuple(target[idx[p]] for p in s.places) for s in d.subnets]
    return ss_via_subnets(net, d, targets, doc.marking, budget, deadline)


def _auto(doc, target, place, k, args, deadline):
    """STS → RG on strongly connected SMs, condensed → RG on single-ergodic SMs, subnet → RG with a decomposition."""
    net = doc.net
    if is_state_machine(net):
        partition = decompose(net)
        eta = ergodic_count(partition)
        if eta > 1:
            # η > 1 only obstructs the full token-count uncertainty
            if doc.marking is None:
                raise ObstructionError(eta)
            logger.info(f"↪️ η={eta} with a file marking, using the reachability graph of R(N, M0)")
        elif place is not None and transient_count(partition) == 0:
            result = ss_via_sts(net, place, k, SearchMode(args.search), deadline)
            if result is not None:
                return result
            logger.info("↪️ no STS, falling back to the reachability graph")
        elif place is not None and k == 1:
            result = ss_single_ergodic(net, place, args.budget, deadline)
            if result is not None:
                return result
            logger.info("↪️ condensed method failed, falling back to the reachability graph")
    elif doc.subnets:
        result = _via_subnets(doc, target, args.budget, deadline)
        if result is not None or doc.marking is None:
            return result
        logger.info("↪️ subnet method failed, falling back to the reachability graph")
    return _via_rg(doc, target, k, args.budget, deadline)


def _certify(doc, result, k, budget, deadline):
    """Re-simulate from the uncertainty before anything is printed."""
    net = doc.net
    if doc.marking is not None:
        starts = build_rg(net, doc.marking, budget, deadline).nodes
    elif result.method is SyncMethod.SUBNET:
        # token counts are fixed per subnet
        return verify_on_subnets(net, _decomposition(doc), result.sequence, result.target, DEFAULT_VERIFY_BUDGET)
    elif is_state_machine(net):
        starts = islice(k_token_markings(net.net.m, k), DEFAULT_VERIFY_BUDGET)
    else:
        return result.verified_from
    fixed = [(i, c) for i, c in enumerate(result.target) if c is not None]
    count = 0
    for start in starts:
        reached = apply_sequence(net, start, result.sequence)
        if any(reached[i] != c for i, c in fixed):
            raise VerificationError(
                f"{' '.join(result.sequence)} takes {format_marking(start)} to {format_marking(reached)}, "
                f"not {format_marking(result.target)}"
            )
        count += 1
    return count


def cmd_sync(args):
    doc = _load(args.net)
    net = doc.net
    target, place, k = _resolve_target(args, doc)
    deadline = deadline_after(args.timeout)
    method = args.method
    logger.info(f"🎯 target {format_marking(target)} via {method}")

    if method == "rg":
        result = _via_rg(doc, target, k, args.budget, deadline)
        if result is None:
            raise CliError(ExitCode.NO_SS, "no synchronizing sequence exists over the uncertainty")
    elif method == "sts":
        _need_place(place, method)
        result = ss_via_sts(net, place, k, SearchMode(args.search), deadline)
    elif method == "condensed":
        _need_place(place, method)
        if k != 1:
            raise CliError(ExitCode.INVALID_ARGS, "method condensed synchronizes a single token")
        result = ss_single_ergodic(net, place, args.budget, deadline)
    elif method == "subnet":
        result = _via_subnets(doc, target, args.budget, deadline)
    else:
        result = _auto(doc, target, place, k, args, deadline)
        if result is None and (is_state_machine(net) or doc.marking is not None):
            raise CliError(ExitCode.NO_SS, "no synchronizing sequence exists over the uncertainty")

    if result is None:
        raise CliError(ExitCode.METHOD_FAILED, f"method {method} found no sequence (a sequence may still exist)")

    checked = _certify(doc, result, k, args.budget, deadline)
    logger.success(f"✅ {result.method.value}: |w| = {result.length}, re-verified from {checked:,} markings")
    if args.json:
        sys.stdout.write(orjson.dumps(result.as_dict()).decode() + "\n")
    else:
        print(" ".join(result.sequence))
        print(f"target {format_marking(result.target)}")
    return ExitCode.OK


# ------------------------------------------------------------
# gen / bench
# ------------------------------------------------------------
def cmd_gen(args):
    params = GenParams(args.m, args.q, args.alphabet_size, args.seed)
    net = random_sm(params)
    meta = {"m": args.m, "q": args.q, "alphabet_size": len(net.alphabet), "seed": args.seed}
    doc = NetDocument(net, meta=meta)
    if args.out:
        path = save_net(doc, args.out)
        logger.success(f"✅ wrote {path}")
        print(path)
    else:
        sys.stdout.write(dumps_net(doc).decode())
    return ExitCode.OK


def cmd_bench(args):
    grid = BenchGrid.from_ranges(
        (args.m_min, args.m_max), args.q_max, tuple(args.k), args.trials, args.seed, q_min=args.q_min
    )
    records = run_benchmark(grid, args.time_budget, args.jobs, args.budget, dump_dir=args.dump_nets)
    summary, ratios = write_outputs(records, grid, args.out, args.time_budget)
    if args.plot:
        plot_ratio_tables(ratios, args.plot)
    print(ratios.to_string(index=False))
    return ExitCode.OK


# ------------------------------------------------------------
# Entry point
# ------------------------------------------------------------
def build_parser():
    parser = _Parser(description="Synchronizing sequences for synchronized Petri nets.")
    parser.add_argument("--verbose", action="store_true", help="DEBUG-level logging on stderr")
    parser.add_argument("--log-file", help="Also log to this file (e.g. logs/sync.log)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="SM status, determinism, components, η and μ")
    p.add_argument("net", help="Net document (JSON)")
    p.add_argument("--k", type=int, help="Token count for the reachable-marking formula")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("sync", help="Compute and certify a synchronizing sequence")
    p.add_argument("net", help="Net document (JSON)")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--target-place", help="Place collecting all tokens")
    target.add_argument("--target-marking", help='JSON object {"p1": 1} or full vector [1, 0]')
    p.add_argument("--method", choices=["auto", "rg", "sts", "condensed", "subnet"], default="auto")
    p.add_argument("--k", type=int, help="Tokens to synchronize on --target-place (default: file marking or 1)")
    p.add_argument("--search", choices=[m.value for m in SearchMode], default=SearchMode.DEPTH_FIRST.value)
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET, help="Reachability node budget")
    p.add_argument("--timeout", type=float, default=DEFAULT_TIME_BUDGET_S, help="Wall-clock budget in seconds")
    p.add_argument("--json", action="store_true", help="Emit {sequence, target, method, verified_from}")
    p.set_defaults(func=cmd_sync)

    p = sub.add_parser("gen", help="Random strongly connected deterministic SM")
    p.add_argument("--m", type=int, required=True, help="Places")
    p.add_argument("--q", type=int, required=True, help="Transitions")
    p.add_argument("--alphabet-size", type=int, help="Events (default: random in [ceil(q/m), q])")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", help="Output file (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="RG vs STS benchmark over a parameter grid")
    p.add_argument("--m-min", type=int, default=DEFAULT_M_RANGE[0])
    p.add_argument("--m-max", type=int, default=DEFAULT_M_RANGE[1])
    p.add_argument("--q-min", type=int, help="Smallest q (default: --m-min)")
    p.add_argument("--q-max", type=int, default=DEFAULT_Q_MAX)
    p.add_argument("--k", type=int, nargs="+", default=list(DEFAULT_K_VALUES))
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--time-budget", type=float, default=DEFAULT_TIME_BUDGET_S, help="Seconds per method per instance")
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET, help="Reachability node budget")
    p.add_argument("--jobs", type=int, default=N_JOBS)
    p.add_argument("--out", default=str(OUT_DIR / "bench.csv"))
    p.add_argument("--plot", nargs="?", const=str(OUT_DIR / "bench_ratios.png"), help="Write ratio heatmaps")
    p.add_argument("--dump-nets", help="Directory for the generated nets")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose, args.log_file)
    try:
        return int(args.func(args))
    except CliError as exc:
        level = "WARNING" if exc.code in (ExitCode.NO_SS, ExitCode.METHOD_FAILED) else "ERROR"
        logger.log(level, f"❌ {exc}")
        return int(exc.code)
    except NetParseError as exc:
        logger.error(f"❌ {exc}")
        return int(ExitCode.PARSE_ERROR)
    except ObstructionError as exc:
        logger.warning(f"🚫 {exc}")
        return int(ExitCode.NO_SS)
    except (BoundednessError, SearchTimeoutError) as exc:
        logger.error(f"⏱️ {exc}")
        return int(ExitCode.BUDGET)
    except VerificationError as exc:
        logger.error(f"❌ refusing to print an unverified sequence: {exc}")
        return int(ExitCode.METHOD_FAILED)
    except (GenerationError, NetInputError, NetStructureError, ValueError) as exc:
        logger.error(f"❌ {exc}")
        return int(ExitCode.INVALID_ARGS)


if __name__ == "__main__":
    sys.exit(main())
