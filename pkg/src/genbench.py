#!/usr/bin/env python3
"""
GenBench – v1.0

Random deterministic strongly connected synchronized state machines and the
RG-vs-STS benchmark:

 • random_sm        Hamiltonian cycle + extra arcs, labels drawn per source place
 • run_instance     both methods on one net, k tokens, one target place
 • run_benchmark    parameter grid × trials, joblib workers, tqdm progress
 • summarize        per-cell N / T̂ / L̂ indexes (pandas) and their STS/RG ratios
 • write_outputs    CSV tables + meta.json sidecar
 • plot_ratio_tables seaborn heatmaps, black cells where m > q
"""

import math
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import orjson
import pandas as pd
import seaborn as sns
from joblib import Parallel, delayed
from loguru import logger
from tqdm import tqdm

from net_io import NetDocument, save_net
from petri_net import PlaceTransitionNet, SynchronizedNet, check_determinism, place_marking
from reachability import build_rg_from, count_reachable_sm, k_token_markings
from rg_sync import ss_on_rg, verify_from
from settings import (
    DEFAULT_K_VALUES,
    DEFAULT_M_RANGE,
    DEFAULT_NODE_BUDGET,
    DEFAULT_Q_MAX,
    DEFAULT_SEED,
    DEFAULT_TIME_BUDGET_S,
    DEFAULT_TRIALS,
    DEFAULT_VERIFY_BUDGET,
    GENERATION_RETRIES,
    N_JOBS,
    deadline_after,
)
from sm_structure import decompose
from sts_sync import ss_via_sts
from sync_errors import BoundednessError, GenerationError, SearchTimeoutError, VerificationError

SUMMARY_COLUMNS = ["m", "q", "k", "trials", "seed", "N_RG", "N_STS", "That_RG_ms", "That_STS_ms", "Lhat_RG", "Lhat_STS"]
RATIO_COLUMNS = ["m", "q", "k", "feasible", "N_ratio", "T_ratio", "L_ratio"]
RECIPE = (
    "random Hamiltonian cycle over the places, then q-m extra arcs with a uniformly random target "
    "and a source drawn among places with fewer than |E| outputs; each place's outputs get distinct "
    "labels drawn without replacement; |E| uniform in [ceil(q/m), q]; target place uniform"
)
QUIET_MODULES = ("reachability", "automata_sync", "rg_sync", "sts_sync")


# ------------------------------------------------------------
# Generation
# ------------------------------------------------------------
@dataclass(frozen=True)
class GenParams:
    m: int
    q: int
    alphabet_size: int | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.m < 1:
            raise GenerationError("need at least one place")
        if self.q < self.m:
            raise GenerationError(f"q={self.q} < m={self.m}: no strongly connected state machine exists")
        a = self.alphabet_size
        if a is not None and not self.min_alphabet <= a <= self.q:
            raise GenerationError(f"alphabet size {a} outside [{self.min_alphabet}, {self.q}]")

    @property
    def min_alphabet(self):
        """⌈q/m⌉, the smallest alphabet that still admits determinism."""
        return math.ceil(self.q / self.m)


def random_sm(p):
    rng = np.random.default_rng(p.seed)
    a = p.alphabet_size if p.alphabet_size is not None else int(rng.integers(p.min_alphabet, p.q + 1))
    places = [f"p{i + 1}" for i in range(p.m)]
    transitions = [f"t{j + 1}" for j in range(p.q)]
    alphabet = [f"e{i + 1}" for i in range(a)]

    for attempt in range(1, GENERATION_RETRIES + 1):
        order = rng.permutation(p.m)
        arcs = [(int(order[i]), int(order[(i + 1) % p.m])) for i in range(p.m)]
        outdeg = np.ones(p.m, dtype=np.int64)
        for _ in range(p.q - p.m):
            src = int(rng.choice(np.flatnonzero(outdeg < a)))
            arcs.append((src, int(rng.integers(p.m))))
            outdeg[src] += 1
        arcs = [arcs[j] for j in rng.permutation(p.q)]

        labels = {}
        for place in range(p.m):
            outs = [j for j, (src, _) in enumerate(arcs) if src == place]
            for j, e in zip(outs, rng.choice(a, size=len(outs), replace=False)):
                labels[transitions[j]] = alphabet[int(e)]

        pre = {transitions[j]: {places[src]: 1} for j, (src, _) in enumerate(arcs)}
        post = {transitions[j]: {places[dst]: 1} for j, (_, dst) in enumerate(arcs)}
        net = SynchronizedNet.from_labeling(PlaceTransitionNet.from_arcs(places, transitions, pre, post), alphabet, labels)
        if len(decompose(net).components) == 1 and check_determinism(net).ok:
            return net
        logger.debug(f"🔁 generation attempt {attempt} rejected")
    raise GenerationError(f"no strongly connected deterministic SM after {GENERATION_RETRIES} retries")


# ------------------------------------------------------------
# One instance
# ------------------------------------------------------------
@dataclass(frozen=True)
class MethodOutcome:
    found: bool
    elapsed_ms: float
    length: int | None = None
    status: str = "ok"  # ok | none | timeout | budget | unsound


@dataclass(frozen=True)
class BenchRecord:
    m: int
    q: int
    k: int
    trial: int
    seed: int
    alphabet_size: int
    target: str
    rg: MethodOutcome
    sts: MethodOutcome
    rg_nodes: int | None
    expected_nodes: int

    def as_row(self):
        row = {f: getattr(self, f) for f in ("m", "q", "k", "trial", "seed", "alphabet_size", "target")}
        for name in ("rg", "sts"):
            for key, value in asdict(getattr(self, name)).items():
                row[f"{name}_{key}"] = value
        row["rg_nodes"] = self.rg_nodes
        row["expected_nodes"] = self.expected_nodes
        return row


@contextmanager
def _quiet():
    for name in QUIET_MODULES:
        logger.disable(name)
    try:
        yield
    finally:
        for name in QUIET_MODULES:
            logger.enable(name)


def _ms(t0):
    return (time.perf_counter() - t0) * 1000.0


def _sound(net, k, result):
    """Exhaustive re-check over every k-token marking before the result counts."""
    try:
        verify_from(net, k_token_markings(net.net.m, k), result.sequence, result.target)
        return True
    except VerificationError as exc:
        logger.error(f"❌ unsound {result.method.value} result: {exc}")
        return False


def _run_rg(net, target, k, time_budget, node_budget):
    """RG arm over the closure of every k-token marking, not R(N, k·target)."""
    m_target = place_marking(net, target, k)
    deadline = deadline_after(time_budget)
    nodes = None
    t0 = time.perf_counter()
    try:
        rg = build_rg_from(net, k_token_markings(net.net.m, k), node_budget, deadline)
        nodes = len(rg)
        result = ss_on_rg(net, rg, m_target, deadline)
    except SearchTimeoutError:
        return MethodOutcome(False, _ms(t0), status="timeout"), nodes
    except BoundednessError:
        return MethodOutcome(False, _ms(t0), status="budget"), nodes
    except VerificationError as exc:
        logger.error(f"❌ RG word failed its own check: {exc}")
        return MethodOutcome(False, _ms(t0), status="unsound"), nodes
    elapsed = _ms(t0)
    if result is None:
        return MethodOutcome(False, elapsed, status="none"), nodes
    if not _sound(net, k, result):
        return MethodOutcome(False, elapsed, result.length, "unsound"), nodes
    return MethodOutcome(True, elapsed, result.length), nodes


def _run_sts(net, target, k, time_budget, verify_budget):
    deadline = deadline_after(time_budget)
    t0 = time.perf_counter()
    try:
        result = ss_via_sts(net, target, k, deadline=deadline, verify_budget=verify_budget)
    except SearchTimeoutError:
        return MethodOutcome(False, _ms(t0), status="timeout")
    except VerificationError as exc:
        logger.error(f"❌ STS word failed its own check: {exc}")
        return MethodOutcome(False, _ms(t0), status="unsound")
    elapsed = _ms(t0)
    if result is None:
        return MethodOutcome(False, elapsed, status="none")
    if not _sound(net, k, result):
        return MethodOutcome(False, elapsed, result.length, "unsound")
    return MethodOutcome(True, elapsed, result.length)


def run_instance(
    net,
    target,
    k=1,
    time_budget=DEFAULT_TIME_BUDGET_S,
    node_budget=DEFAULT_NODE_BUDGET,
    verify_budget=DEFAULT_VERIFY_BUDGET,
):
    """(RG outcome, STS outcome, RG node count) for `k` tokens synchronized on `target`."""
    with _quiet():
        rg, nodes = _run_rg(net, target, k, time_budget, node_budget)
        sts = _run_sts(net, target, k, time_budget, verify_budget)
    return rg, sts, nodes


def instance_seed(seed, m, q, trial):
    """Per-instance seed; independent of k so every k sees the same nets."""
    return int(np.random.SeedSequence([seed, m, q, trial]).generate_state(1, dtype=np.uint64)[0])


def _run_trial(m, q, k, trial, seed, time_budget, node_budget, verify_budget, dump_dir):
    s = instance_seed(seed, m, q, trial)
    net = random_sm(GenParams(m, q, None, s))
    target = net.places[int(np.random.default_rng([s, 1]).integers(m))]
    if dump_dir is not None:
        meta = {"m": m, "q": q, "trial": trial, "seed": s, "recipe": RECIPE}
        save_net(NetDocument(net, target_place=target, meta=meta), Path(dump_dir) / f"m{m}_q{q}_k{k}_trial{trial}.json")
    rg, sts, nodes = run_instance(net, target, k, time_budget, node_budget, verify_budget)
    return BenchRecord(m, q, k, trial, s, len(net.alphabet), target, rg, sts, nodes, count_reachable_sm(m, k))


# ------------------------------------------------------------
# Grid
# ------------------------------------------------------------
@dataclass(frozen=True)
class BenchGrid:
    m_values: tuple
    q_values: tuple
    k_values: tuple = DEFAULT_K_VALUES
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not self.m_values or not self.q_values or not self.k_values:
            raise ValueError("benchmark grid is empty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if min(self.m_values) < 1 or min(self.k_values) < 1:
            raise ValueError("grid needs m >= 1 and k >= 1")

    @classmethod
    def from_ranges(cls, m_range=DEFAULT_M_RANGE, q_max=DEFAULT_Q_MAX, k_values=DEFAULT_K_VALUES, trials=DEFAULT_TRIALS, seed=DEFAULT_SEED, q_min=None):
        """m_range inclusive; q runs from min(m) (or q_min) to q_max."""
        m_lo, m_hi = m_range
        q_lo = m_lo if q_min is None else q_min
        return cls(tuple(range(m_lo, m_hi + 1)), tuple(range(q_lo, q_max + 1)), tuple(k_values), trials, seed)

    def cells(self):
        """(m, q, k, feasible) for every grid cell; m > q cells are infeasible."""
        for k in self.k_values:
            for m in self.m_values:
                for q in self.q_values:
                    yield m, q, k, q >= m


def run_benchmark(
    grid,
    time_budget=DEFAULT_TIME_BUDGET_S,
    n_jobs=N_JOBS,
    node_budget=DEFAULT_NODE_BUDGET,
    verify_budget=DEFAULT_VERIFY_BUDGET,
    dump_dir=None,
):
    tasks = [(m, q, k, trial) for m, q, k, ok in grid.cells() if ok for trial in range(grid.trials)]
    if not tasks:
        raise ValueError("benchmark grid has no feasible cell (every m > q)")
    if dump_dir is not None:
        Path(dump_dir).mkdir(parents=True, exist_ok=True)
    logger.info(f"🏁 {len(tasks):,} instances on {n_jobs} worker(s), {time_budget:g}s budget each")
    records = Parallel(n_jobs=n_jobs)(
        delayed(_run_trial)(m, q, k, trial, grid.seed, time_budget, node_budget, verify_budget, dump_dir)
        for m, q, k, trial in tqdm(tasks, desc="→ instances")
    )
    unsound = sum(r.rg.status == "unsound" or r.sts.status == "unsound" for r in records)
    if unsound:
        logger.error(f"❌ {unsound} instance(s) produced a sequence that failed re-verification")
    mismatched = sum(r.rg_nodes is not None and r.rg_nodes != r.expected_nodes for r in records)
    if mismatched:
        logger.error(f"❌ {mismatched} reachability graph(s) differ from C(m+k−1, m−1)")
    logger.success(f"✅ benchmark done: {len(records):,} records")
    return records


# ------------------------------------------------------------
# Tables
# ------------------------------------------------------------
def records_frame(records):
    return pd.DataFrame([r.as_row() for r in records])


def _mean(series):
    return float(pd.to_numeric(series).mean()) if len(series) else np.nan


def summarize(records, grid):
    """One row per grid cell in SUMMARY_COLUMNS; T̂ and L̂ average over successful runs."""
    df = records_frame(records)
    rows = []
    for m, q, k, feasible in grid.cells():
        if not feasible or df.empty:
            rows.append({"m": m, "q": q, "k": k, "trials": 0, "seed": grid.seed})
            continue
        cell = df[(df.m == m) & (df.q == q) & (df.k == k)]
        rg, sts = cell[cell.rg_found], cell[cell.sts_found]
        rows.append(
            {
                "m": m,
                "q": q,
                "k": k,
                "trials": len(cell),
                "seed": grid.seed,
                "N_RG": len(rg),
                "N_STS": len(sts),
                "That_RG_ms": _mean(rg.rg_elapsed_ms),
                "That_STS_ms": _mean(sts.sts_elapsed_ms),
                "Lhat_RG": _mean(rg.rg_length),
                "Lhat_STS": _mean(sts.sts_length),
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def _ratio(num, den):
    return num / den if pd.notna(num) and pd.notna(den) and den != 0 else np.nan


def ratio_table(summary):
    """STS/RG ratios per cell; NaN where a denominator is zero or the cell is infeasible."""
    out = summary[["m", "q", "k"]].copy()
    out["feasible"] = summary.q >= summary.m
    out["N_ratio"] = [_ratio(a, b) for a, b in zip(summary.N_STS, summary.N_RG)]
    out["T_ratio"] = [_ratio(a, b) for a, b in zip(summary.That_STS_ms, summary.That_RG_ms)]
    out["L_ratio"] = [_ratio(a, b) for a, b in zip(summary.Lhat_STS, summary.Lhat_RG)]
    return out[RATIO_COLUMNS]


def write_outputs(records, grid, out_csv, time_budget=DEFAULT_TIME_BUDGET_S):
    """Summary CSV, `<stem>_ratios.csv`, `<stem>_instances.csv` and `<csv>.meta.json`."""
    out_csv = Path(out_csv)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    summary = summarize(records, grid)
    ratios = ratio_table(summary)
    summary.to_csv(out_csv, index=False, encoding="utf-8")
    ratios.to_csv(out_csv.with_name(f"{out_csv.stem}_ratios.csv"), index=False, encoding="utf-8")
    records_frame(records).to_csv(out_csv.with_name(f"{out_csv.stem}_instances.csv"), index=False, encoding="utf-8")
    meta = {
        "grid": {"m": list(grid.m_values), "q": list(grid.q_values), "k": list(grid.k_values), "trials": grid.trials},
        "seed": grid.seed,
        "time_budget_s": time_budget,
        "recipe": RECIPE,
        "timing": "wall-clock per method per instance, milliseconds, averaged over successful runs",
    }
    meta_path = out_csv.with_name(out_csv.name + ".meta.json")
    meta_path.write_bytes(orjson.dumps(meta, option=orjson.OPT_INDENT_2))
    logger.info(f"💾 Saved {out_csv} (+ ratios, instances, meta)")
    return summary, ratios


def plot_ratio_tables(ratios, out_png):
    """One row of N / T̂ / L̂ ratio heatmaps per k; infeasible cells left black."""
    ks = sorted(ratios.k.unique())
    fig, axes = plt.subplots(len(ks), 3, figsize=(15, 4 * len(ks)), squeeze=False)
    for row, k in zip(axes, ks):
        sub = ratios[ratios.k == k]
        for ax, col, title in zip(row, ("N_ratio", "T_ratio", "L_ratio"), ("N_STS/N_RG", "T̂_STS/T̂_RG", "L̂_STS/L̂_RG")):
            table = sub.pivot(index="m", columns="q", values=col)
            ax.set_facecolor("black")
            sns.heatmap(table, annot=True, fmt=".2f", cmap="viridis", cbar=False, ax=ax)
            ax.set_title(f"{title} (k={k})")
    plt.tight_layout()
    out_png = Path(out_png)
    out_png.parent.mkdir(parents=True, exist_ok=True)
    plt.savefig(out_png, dpi=150)
    plt.close(fig)
    logger.info(f"🖼️ Saved {out_png}")
    return out_png
