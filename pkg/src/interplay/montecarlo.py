"""Monte Carlo estimate of how often generic initial opinions keep appraisals
bounded away from zero.

Each run draws Y(0) uniformly on [-a, a]^(n x m), iterates the model up to
``window_end`` steps and sets Z = 1 when min_ij |X_ij(t)| >= threshold for
every t in [window_start, window_end]. The estimate is p_hat = sum Z / N, and
the number of runs needed for |p_hat - p| <= eps with probability 1 - xi
follows from the Chernoff/Hoeffding bound N >= ln(2 / xi) / (2 eps^2).
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .analysis import (
    NONVANISHING_THRESHOLD,
    WINDOW_END,
    WINDOW_START,
    is_socially_balanced_rows,
    modulus_sign_consensus,
)
from .core import DEFAULT_ROW_TOLERANCE, DomainViolation, Status, first_small_row, frozen
from .dynamics import step

log = logging.getLogger(__name__)

MAX_RESAMPLES = 1000


def chernoff_sample_size(epsilon: float, xi: float) -> int:
    """Smallest N with N >= ln(2/xi) / (2 epsilon^2)."""
    if not (0 < epsilon < 1) or not (0 < xi < 1):
        raise ValueError("epsilon and xi must lie in (0, 1)")
    return math.ceil(math.log(2.0 / xi) / (2.0 * epsilon**2))


def run_seed(master_seed: int, index: int) -> int:
    """64-bit seed for run ``index``, independent of execution order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def sample_generic_initial(
    n: int, m: int, a: float, seed: int, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> tuple[np.ndarray, int]:
    """Draw Y(0) ~ U[-a, a]^(n x m); return it with the number of redraws.

    A redraw happens only when some row is numerically zero, which has
    probability zero but is guarded anyway.
    """
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    if not a > 0:
        raise ValueError("support half-width must be positive")
    rng = np.random.default_rng(seed)
    for resamples in range(MAX_RESAMPLES):
        Y = rng.uniform(-a, a, size=(n, m))
        if first_small_row(Y, row_tolerance) is None:
            return frozen(Y), resamples
    raise RuntimeError("could not draw a matrix with non-zero rows")


def generic_initial(n: int, m: int, a: float, seed: int) -> np.ndarray:
    return sample_generic_initial(n, m, a, seed)[0]


@dataclass(frozen=True)
class ExperimentParams:
    n: int = 9
    m: int = 4
    a: float = 1.0
    runs: int = 27000
    master_seed: int = 0
    window_start: int = WINDOW_START
    window_end: int = WINDOW_END
    threshold: float = NONVANISHING_THRESHOLD
    epsilon: float = 0.01
    xi: float = 0.01

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be >= 1")
        if not self.a > 0:
            raise ValueError("support half-width must be positive")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0 <= self.window_start < self.window_end:
            raise ValueError("need 0 <= window_start < window_end")
        if not self.threshold > 0:
            raise ValueError("threshold must be positive")
        if not (0 < self.epsilon < 1 and 0 < self.xi < 1):
            raise ValueError("epsilon and xi must lie in (0, 1)")


@dataclass(frozen=True)
class RunRecord:
    index: int
    seed: int
    Z: int
    status: str
    steps: int
    min_abs_x: Optional[float]
    resamples: int = 0
    final_balanced: bool = False
    final_consensus: str = "none"


@dataclass
class MonteCarloReport:
    params: ExperimentParams
    N_requested: int
    N_completed: int
    successes: int
    p_hat: float
    chernoff_N_minimum: int
    records: list[RunRecord] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "params": asdict(self.params),
            "N_requested": self.N_requested,
            "N_completed": self.N_completed,
            "successes": self.successes,
            "p_hat": self.p_hat,
            "chernoff_N_minimum": self.chernoff_N_minimum,
            "records": [asdict(r) for r in self.records],
        }


def run_one(params: ExperimentParams, index: int, Y0: Optional[np.ndarray] = None) -> RunRecord:
    """Simulate run ``index`` keeping only the windowed min |X| and the last state.

    ``Y0`` overrides the generated initial condition (used to inject
    hand-built cases).
    """
    seed = run_seed(params.master_seed, index)
    resamples = 0
    if Y0 is None:
        Y0, resamples = sample_generic_initial(params.n, params.m, params.a, seed)
    Y = np.asarray(Y0, dtype=np.float64)
    X = None
    running_min = math.inf
    status = Status.MAX_STEPS_REACHED
    t = 0
    try:
        for t in range(1, params.window_end + 1):
            res = step(Y)
            X = res.X_next
            if t >= params.window_start:
                running_min = min(running_min, float(np.min(np.abs(X))))
            if np.array_equal(res.Y_next, Y):
                # Exact fixed point: every later X repeats this one.
                running_min = min(running_min, float(np.min(np.abs(X))))
                status = Status.CONVERGED
                Y = res.Y_next
                break
            Y = res.Y_next
    except DomainViolation:
        return RunRecord(index, seed, 0, Status.DOMAIN_VIOLATION.value, t, None, resamples)
    Z = int(running_min >= params.threshold)
    return RunRecord(
        index,
        seed,
        Z,
        status.value,
        t,
        running_min,
        resamples,
        bool(is_socially_balanced_rows(X)),
        modulus_sign_consensus(Y).kind.value,
    )


def _run_chunk(args: tuple[ExperimentParams, range]) -> list[RunRecord]:
    params, indices = args
    return [run_one(params, i) for i in indices]


def run_experiment(params: ExperimentParams, workers: int = 1) -> MonteCarloReport:
    """Run ``params.runs`` independent trials and aggregate the indicator.

    Per-run seeds depend only on (master_seed, run index), so the report is
    the same for any ``workers`` count.
    """
    if workers <= 1:
        records = []
        for i in range(params.runs):
            records.append(run_one(params, i))
            if (i + 1) % 1000 == 0:
                log.info("completed %d / %d runs", i + 1, params.runs)
    else:
        size = max(1, math.ceil(params.runs / (workers * 4)))
        chunks = [(params, range(s, min(s + size, params.runs))) for s in range(0, params.runs, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = [r for part in pool.map(_run_chunk, chunks) for r in part]
    return summarize(params, records)


def summarize(params: ExperimentParams, records: list[RunRecord]) -> MonteCarloReport:
    records = sorted(records, key=lambda r: r.index)
    successes = sum(r.Z for r in records)
    done = len(records)
    return MonteCarloReport(
        params=params,
        N_requested=params.runs,
        N_completed=done,
        successes=successes,
        p_hat=successes / done if done else 0.0,
        chernoff_N_minimum=chernoff_sample_size(params.epsilon, params.xi),
        records=records,
    )
