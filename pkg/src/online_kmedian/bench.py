"""Dataset ingestion, experiment replay, offline baseline and CSV logs."""
from __future__ import annotations

import csv
import io
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError
from .ledger import OFFSET, Instance
from .local_search import (
    BEST_IMPROVEMENT,
    SearchParams,
    offline_bicriteria,
    offline_penalty_local_search,
)
from .metric import INF, MetricSpace
from .online import (
    F_EQUALS_C,
    STATIC_F,
    OnlineConfig,
    OnlineState,
    advance_z,
    init_state,
    online_insert,
    outlier_threshold,
)

LOG_COLUMNS = (
    "t", "cost_p", "p", "outliers", "recourse_step", "recourse_total",
    "swaps", "stage", "lazy_skipped", "baseline_cost", "ratio",
)


# ---- ingestion -------------------------------------------------------------

def parse_columns(text: str | None) -> list[int] | None:
    """'0-9' or '0,2,5-7' -> zero-based indices; None/'' -> all columns."""
    if text is None or text.strip() == "":
        return None
    cols: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise ValueError(f"bad column range {part!r}")
            cols.extend(range(lo, hi + 1))
        else:
            cols.append(int(part))
    if any(c < 0 for c in cols):
        raise ValueError("column indices are zero-based and non-negative")
    return cols


def _is_number(s: str) -> bool:
    try:
        return math.isfinite(float(s))
    except ValueError:
        return False


def load_points_csv(
    path: str | Path,
    columns: Sequence[int] | None = None,
    max_rows: int | None = None,
    min_rows: int = 1,
) -> np.ndarray:
    """Numeric rows of a CSV in file order, restricted to ``columns``.

    A first row with any non-numeric selected field is taken as a header.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: no such file")
    rows: list[list[float]] = []
    first = True
    with path.open(newline="") as fh:
        for lineno, rec in enumerate(csv.reader(fh), start=1):
            if not rec or all(not f.strip() for f in rec):
                continue
            is_first, first = first, False
            cols = list(range(len(rec))) if columns is None else list(columns)
            if columns is None and rows and len(cols) != len(rows[0]):
                raise DataError(f"{path}:{lineno}: expected {len(rows[0])} fields, got {len(rec)}")
            if cols and max(cols) >= len(rec):
                raise DataError(f"{path}:{lineno}: column {max(cols)} missing ({len(rec)} fields)")
            fieldvals = [rec[c].strip() for c in cols]
            bad = [c for c, v in zip(cols, fieldvals) if not _is_number(v)]
            if bad:
                if is_first:
                    continue  # header
                raise DataError(f"{path}:{lineno}: column {bad[0]}: not a number: {rec[bad[0]]!r}")
            rows.append([float(v) for v in fieldvals])
            if max_rows is not None and len(rows) >= max_rows:
                break
    if len(rows) < min_rows:
        raise DataError(f"{path}: {len(rows)} rows, need at least {min_rows}")
    return np.array(rows, dtype=float).reshape(len(rows), -1)


# ---- experiment ------------------------------------------------------------

@dataclass
class ExperimentSpec:
    input_path: str
    config: OnlineConfig
    columns: list[int] | None = None
    max_rows: int = 10_000
    baseline_restarts: int = 0  # 0: no baseline
    checkpoint_stride: int = 50
    output_path: str | None = None
    seed: int = 0
    shuffle: bool = False
    scale: float = 1.0
    facilities_path: str | None = None

    def __post_init__(self):
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint stride must be >= 1")
        if self.max_rows < self.config.k:
            raise ValueError("max_rows must be >= k")
        if self.baseline_restarts < 0:
            raise ValueError("baseline restarts must be >= 0")


@dataclass
class StepLogRow:
    t: int
    cost_p: float
    p: float
    outliers: int
    recourse_step: int
    recourse_total: int
    swaps: int
    stage: int
    lazy_skipped: bool
    baseline_cost: float | None = None
    ratio: float | None = None


def z_schedule(t: int, n: int, z_final: int) -> int:
    """Outlier budget at arrival t when z grows linearly to z_final at t = n."""
    return (t * z_final) // n


def load_experiment_points(spec: ExperimentSpec):
    """(space, facility ids or None, client ids in arrival order)."""
    k = spec.config.k
    pts = load_points_csv(spec.input_path, spec.columns, spec.max_rows,
                          min_rows=1 if spec.config.setting == STATIC_F else k)
    if spec.shuffle:
        pts = pts[np.random.default_rng(spec.seed).permutation(len(pts))]
    if spec.config.setting == STATIC_F:
        if spec.facilities_path is None:
            raise DataError("static-F runs need a facilities file")
        fac = load_points_csv(spec.facilities_path, spec.columns, None, min_rows=k)
        if fac.shape[1] != pts.shape[1]:
            raise DataError("facility and client dimensions differ")
        space = MetricSpace.euclidean(np.vstack([fac, pts]), scale=spec.scale)
        facilities = list(range(len(fac)))
        clients = list(range(len(fac), len(fac) + len(pts)))
    else:
        space = MetricSpace.euclidean(pts, scale=spec.scale)
        facilities, clients = None, list(range(len(pts)))
    if len(space) <= 5000:
        space.cache_pairwise()
    return space, facilities, clients


def run_experiment_detailed(spec: ExperimentSpec) -> tuple[list[StepLogRow], OnlineState]:
    space, facilities, clients = load_experiment_points(spec)
    cfg = spec.config
    n = len(clients)
    incremental = cfg.z_mode == "incremental"
    engine_cfg = replace(cfg, z=z_schedule(0, n, cfg.z)) if incremental else cfg
    state = init_state(engine_cfg, space, facilities)

    rows: list[StepLogRow] = []
    inlier: list[float] = []
    for t, pt in enumerate(clients, start=1):
        if incremental:
            advance_z(state, z_schedule(t, n, cfg.z))
        rep = online_insert(state, pt)
        rows.append(StepLogRow(
            t=rep.t, cost_p=rep.cost_p, p=rep.p, outliers=rep.outliers,
            recourse_step=rep.recourse, recourse_total=state.recourse.total,
            swaps=rep.swaps, stage=rep.stage_index, lazy_skipped=rep.lazy_skipped,
        ))
        inlier.append(state.ledger.inlier_cost())

    if spec.baseline_restarts > 0:
        checkpoints = list(range(spec.checkpoint_stride, n + 1, spec.checkpoint_stride))
        if not checkpoints or checkpoints[-1] != n:
            checkpoints.append(n)
        checkpoints = [c for c in checkpoints if c >= cfg.k]
        fac_ids = facilities
        values = []
        for c in checkpoints:
            z_c = z_schedule(c, n, cfg.z) if incremental else cfg.z
            values.append(estimate_baseline(
                space, clients[:c], cfg.k, z_c, spec.baseline_restarts, spec.seed,
                facilities=fac_ids, ell=cfg.ell, gamma=cfg.gamma, epsilon=cfg.epsilon,
            ))
        for row, cost in zip(rows, inlier):
            b = interpolate(checkpoints, values, row.t)
            if b is not None:
                row.baseline_cost = b
                row.ratio = cost / b

    if spec.output_path:
        emit_log_csv(rows, spec.output_path)
    return rows, state


def run_experiment(spec: ExperimentSpec) -> list[StepLogRow]:
    return run_experiment_detailed(spec)[0]


def interpolate(xs: Sequence[int], ys: Sequence[float], x: int) -> float | None:
    """Piecewise-linear value at x; None outside [xs[0], xs[-1]]."""
    if not xs or x < xs[0] or x > xs[-1]:
        return None
    i = int(np.searchsorted(xs, x))
    if xs[i] == x:
        return float(ys[i])
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return float(y0 + (y1 - y0) * (x - x0) / (x1 - x0))


# ---- baseline --------------------------------------------------------------

def discard_farthest_cost(space: MetricSpace, medians, clients, z: int,
                          offset: float = OFFSET) -> float:
    """Offset plus sum of d(j, S) over all but the z farthest clients."""
    d = space.block(list(medians), list(clients)).min(axis=0)
    keep = np.sort(d)[: max(len(d) - z, 0)]
    return offset + math.fsum(keep.tolist())


def estimate_baseline(
    space: MetricSpace,
    prefix: Sequence[int],
    k: int,
    z: int,
    restarts: int,
    seed: int,
    facilities: Sequence[int] | None = None,
    ell: int = 1,
    gamma: float = 1.0,
    epsilon: float = 0.05,
) -> float:
    """Best k-median-with-z-outliers cost found by restarted penalty local search.

    Swaps must be epsilon * cost / k efficient. The penalty comes from the
    bicriteria guess grid; restart r > 0 starts
    from the first k facilities of a seeded shuffle. Every candidate median
    set is scored by discarding exactly its z farthest clients.
    """
    prefix = list(prefix)
    fac = prefix if facilities is None else list(facilities)
    if len(prefix) < 1 or len(fac) < k:
        raise DataError(f"baseline needs at least k={k} facilities")
    inst = Instance(space, fac, prefix, k, z)
    params = SearchParams(ell=ell, strategy=BEST_IMPROVEMENT)

    def rho_rule(cost: float) -> float:
        return epsilon * cost / k

    candidates = []
    if z >= 1:
        sol = offline_bicriteria(inst, ell=ell, gamma=gamma, params=params, rho_rule=rho_rule)
        p = sol.penalty
        candidates.append(sol.medians)
    else:
        p = INF
    for r in range(restarts):
        if r == 0:
            init = None
        else:
            order = np.random.default_rng([seed, r]).permutation(len(fac))
            init = [fac[i] for i in order[:k]]
        candidates.append(offline_penalty_local_search(inst, p, params, rho_rule, init).medians)
    return min(discard_farthest_cost(space, S, prefix, z) for S in candidates)


# ---- log files -------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def format_log(rows: Sequence[StepLogRow]) -> str:
    out = io.StringIO()
    out.write(",".join(LOG_COLUMNS) + "\n")
    for r in rows:
        out.write(",".join(_fmt(getattr(r, c)) for c in LOG_COLUMNS) + "\n")
    return out.getvalue()


def emit_log_csv(rows: Sequence[StepLogRow], path: str | Path) -> None:
    if not rows:
        raise ValueError("refusing to write an empty log")
    text = format_log(rows)
    if str(path) == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write log to {path}: {exc}") from exc


def read_log_csv(path: str | Path) -> list[StepLogRow]:
    kinds = {f.name: f.type for f in fields(StepLogRow)}
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != LOG_COLUMNS:
            raise DataError(f"{path}: unexpected header {reader.fieldnames}")
        for rec in reader:
            vals = {}
            for name, raw in rec.items():
                kind = kinds[name]
                if raw == "":
                    vals[name] = None
                elif "bool" in str(kind):
                    vals[name] = raw == "1"
                elif kind in ("int", int):
                    vals[name] = int(raw)
                else:
                    vals[name] = float(raw)
            rows.append(StepLogRow(**vals))
    return rows


# ---- log invariants --------------------------------------------------------

def check_log(rows: Sequence[StepLogRow], config: OnlineConfig, n: int | None = None) -> list[str]:
    """Invariant violations visible from a step log alone (empty list = clean)."""
    problems = []
    n = n if n is not None else len(rows)
    total = 0
    prev_p, prev_stage = None, 0
    last_ls = None
    for i, r in enumerate(rows):
        if r.t != i + 1:
            problems.append(f"row {i + 1}: t={r.t}, expected {i + 1}")
        total += r.recourse_step
        if r.recourse_total != total:
            problems.append(f"t={r.t}: recourse_total {r.recourse_total} != prefix sum {total}")
        if prev_p is not None:
            if r.p < prev_p:
                problems.append(f"t={r.t}: p decreased ({prev_p} -> {r.p})")
            elif r.p > prev_p:
                ratio = r.p / prev_p
                m = round(math.log2(ratio))
                if m < 1 or r.p != prev_p * 2.0**m:
                    problems.append(f"t={r.t}: p changed by a non-doubling factor {ratio}")
                elif r.stage - prev_stage != m:
                    problems.append(f"t={r.t}: stage advanced {r.stage - prev_stage}, doublings {m}")
            elif r.stage != prev_stage:
                problems.append(f"t={r.t}: stage changed without a doubling")
        prev_p, prev_stage = r.p, r.stage
        if config.z_mode == "incremental":
            z_prime = _z_prime_at(r.t, n, config)
        else:
            z_prime = config.z
        if r.outliers > outlier_threshold(config, z_prime):
            problems.append(f"t={r.t}: {r.outliers} outliers exceed threshold")
        if not r.lazy_skipped:
            last_ls = r.cost_p
        elif config.lazy_alpha > 0 and last_ls is not None and not r.cost_p <= (1 + config.lazy_alpha) * last_ls:
            problems.append(f"t={r.t}: lazy step cost {r.cost_p} above (1+alpha) * {last_ls}")
    return problems


def _z_prime_at(t: int, n: int, config: OnlineConfig) -> int:
    zp = max(0, math.floor((1 + config.epsilon_z) * z_schedule(0, n, config.z)))
    for s in range(1, t + 1):
        z = z_schedule(s, n, config.z)
        if z > zp:
            zp = math.floor((1 + config.epsilon_z) * z)
    return zp


__all__ = [
    "ExperimentSpec", "StepLogRow", "LOG_COLUMNS", "F_EQUALS_C", "STATIC_F",
    "parse_columns", "load_points_csv", "run_experiment", "run_experiment_detailed",
    "estimate_baseline", "emit_log_csv", "read_log_csv", "format_log", "interpolate",
    "check_log", "z_schedule", "discard_farthest_cost",
]
