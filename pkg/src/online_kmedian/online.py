"""Online k-median with outliers: local search plus penalty doubling.

Each arrival is added to C, efficient swaps (rho = epsilon * cost_p / k) are
applied until none remains, and the penalty p is doubled (and the search
repeated) while more than ``outlier_threshold`` clients sit at distance >= p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .errors import DuplicatePointError, InfeasibleError, UnsupportedModeError
from .ledger import OFFSET, AssignmentLedger, RecourseLog, Solution
from .local_search import FIRST_IMPROVEMENT, SearchParams, local_search_to_optimum
from .metric import INF, MetricSpace

STATIC_F = "static_F"
F_EQUALS_C = "F_equals_C"


@dataclass(frozen=True)
class OnlineConfig:
    k: int
    z: int = 0
    epsilon: float = 0.05
    gamma: float = 1.0
    ell: int = 1
    setting: str = STATIC_F
    z_mode: str = "static"  # or "incremental"
    epsilon_z: float = 0.05
    lazy_alpha: float = 0.0  # 0 disables the lazy trigger
    strategy: str = FIRST_IMPROVEMENT

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.z < 0:
            raise ValueError("z must be non-negative")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not 1 <= self.ell <= self.k:
            raise ValueError("ell must satisfy 1 <= ell <= k")
        if self.setting not in (STATIC_F, F_EQUALS_C):
            raise ValueError(f"unknown setting {self.setting!r}")
        if self.z_mode not in ("static", "incremental"):
            raise ValueError(f"unknown z_mode {self.z_mode!r}")
        if self.z_mode == "incremental" and not self.epsilon_z > 0:
            raise ValueError("epsilon_z must be positive")
        if self.lazy_alpha < 0:
            raise ValueError("lazy_alpha must be >= 0")

    @property
    def search_params(self) -> SearchParams:
        return SearchParams(ell=self.ell, strategy=self.strategy)


@dataclass
class StepReport:
    t: int
    arrival_delta: float
    cost_p: float
    p: float
    outliers: int
    swaps: int
    recourse: int
    stage_index: int
    lazy_skipped: bool
    z_prime: int


@dataclass
class OnlineState:
    config: OnlineConfig
    ledger: AssignmentLedger
    recourse: RecourseLog = field(default_factory=RecourseLog)
    t: int = 0
    stage_index: int = 0
    z: int = 0
    z_prime: int = 0
    epoch: int = 0
    last_ls_cost: float | None = None
    median_snapshots: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def p(self) -> float:
        return self.ledger.p

    @property
    def cost_p(self) -> float:
        return self.ledger.cost_p


def initial_penalty(gamma: float, z: int) -> float:
    """min(1 / (10 gamma z), 0.1); for z = 0 this is 0.1."""
    if z == 0:
        return 0.1
    return min(1 / (10 * gamma * z), 0.1)


def outlier_threshold(config: OnlineConfig, z_prime: int) -> float:
    """Doubling fires when strictly more clients than this are at distance >= p."""
    return (1 / (1 - config.epsilon)) * (1 + 1 / config.ell) * (1 + config.gamma) * z_prime


def init_state(
    config: OnlineConfig, space: MetricSpace, facilities: Sequence[int] | None = None
) -> OnlineState:
    if config.setting == STATIC_F:
        if facilities is None:
            raise ValueError("static_F needs a facility list")
        facilities = [int(f) for f in facilities]
        if len(facilities) < config.k:
            raise InfeasibleError(f"|F|={len(facilities)} < k={config.k}")
        start = facilities[: config.k]
    else:
        if facilities is not None:
            raise ValueError("F_equals_C takes no facility list")
        facilities, start = [], []

    z = config.z
    if config.z_mode == "static":
        z_prime = z
        # no outliers allowed: d_p = d, doubling disabled
        p = initial_penalty(config.gamma, z) if z >= 1 else INF
    else:
        z_prime = max(z, math.floor((1 + config.epsilon_z) * z))
        p = initial_penalty(config.gamma, z_prime)
    ledger = AssignmentLedger(space, facilities, [], start, p, OFFSET)
    return OnlineState(config=config, ledger=ledger, z=z, z_prime=z_prime)


def online_insert(state: OnlineState, point: int) -> StepReport:
    cfg, led = state.config, state.ledger
    point = int(point)
    if led.is_client(point):
        raise DuplicatePointError(f"point {point} already arrived")
    t = state.t + 1

    if cfg.setting == F_EQUALS_C:
        led.add_facility(point)
        if led.n_clients + 1 <= cfg.k:
            led.add_median(point, state.recourse, t)
    delta = led.insert_point(point)

    k = cfg.k
    eps = cfg.epsilon

    def rho_rule(cost: float) -> float:
        return eps * cost / k

    threshold = outlier_threshold(cfg, state.z_prime)
    swaps = 0
    skipped = (
        cfg.lazy_alpha > 0
        and state.last_ls_cost is not None
        and led.cost_p < (1 + cfg.lazy_alpha) * state.last_ls_cost
        and led.count_outliers() <= threshold
    )
    if not skipped:
        params = cfg.search_params
        while True:
            swaps += local_search_to_optimum(led, params, rho_rule, state.recourse, t)
            if led.count_outliers() > threshold:
                led.raise_penalty(2 * led.p)
                state.stage_index += 1
                continue
            state.last_ls_cost = led.cost_p
            break

    state.t = t
    state.median_snapshots.append(led.medians)
    return StepReport(
        t=t,
        arrival_delta=delta,
        cost_p=led.cost_p,
        p=led.p,
        outliers=led.count_outliers(),
        swaps=swaps,
        recourse=state.recourse.at(t),
        stage_index=state.stage_index,
        lazy_skipped=skipped,
        z_prime=state.z_prime,
    )


def advance_z(state: OnlineState, new_z: int) -> tuple[int, int] | None:
    """Raise the outlier budget; returns (old z', new z') when an epoch starts."""
    cfg = state.config
    if cfg.z_mode != "incremental":
        raise UnsupportedModeError("advance_z needs z_mode='incremental'")
    if new_z < state.z:
        raise ValueError(f"z may only grow ({state.z} -> {new_z})")
    state.z = int(new_z)
    if new_z > state.z_prime:
        old = state.z_prime
        state.z_prime = math.floor((1 + cfg.epsilon_z) * new_z)
        state.epoch += 1
        return old, state.z_prime
    return None


def current_solution(state: OnlineState) -> Solution:
    led = state.ledger
    return Solution(
        medians=led.medians,
        outliers=led.outlier_ids(),
        penalty=led.p,
        cost_p=led.cost_p,
        inlier_cost=led.inlier_cost(),
    )


def run_stream(state: OnlineState, points: Iterable[int]) -> Iterator[StepReport]:
    """Feed points in order, yielding one report per arrival."""
    for pt in points:
        yield online_insert(state, pt)
