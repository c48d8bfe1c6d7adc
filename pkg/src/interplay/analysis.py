"""Predicates and classifiers over appraisal and opinion matrices."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .core import (
    DEFAULT_SIGN_TOLERANCE,
    AppraisalMatrix,
    OpinionMatrix,
    Status,
    Trajectory,
    sign_matrix,
)
from .dynamics import (
    SimulationConfig,
    equilibrium_matrix,
    predicted_limit_appraisal,
    simulate,
    step,
)

# Non-vanishing indicator defaults (window and floor on min |X_ij|).
WINDOW_START = 100
WINDOW_END = 1000
NONVANISHING_THRESHOLD = 1e-3


@dataclass(frozen=True)
class Witness:
    """Why a balance test failed.

    ``kind`` is one of ``"diagonal"`` (index = i), ``"zero"`` (index =
    (i, j)), ``"triad"`` (index = (i, j, k)) or ``"rows"`` (index = (0, i),
    a row whose sign pattern is neither equal nor opposite to row 0).
    """

    kind: str
    index: tuple


@dataclass(frozen=True)
class BalanceVerdict:
    balanced: bool
    partition: Optional[np.ndarray] = None
    witness: Optional[Witness] = None

    def __bool__(self) -> bool:
        return self.balanced


class ConsensusKind(str, Enum):
    NONE = "none"
    SIGN_CONSENSUS = "sign_consensus"
    BIPARTITE_SIGN_CONSENSUS = "bipartite_sign_consensus"
    CONSENSUS = "consensus"
    BIPARTITE_CONSENSUS = "bipartite_consensus"


@dataclass(frozen=True)
class ConsensusVerdict:
    kind: ConsensusKind
    partition: Optional[np.ndarray] = None

    def __bool__(self) -> bool:
        return self.kind is not ConsensusKind.NONE


@dataclass(frozen=True)
class EquilibriumDescription:
    rho: np.ndarray
    coefficients: np.ndarray
    residual: float

    def matrix(self) -> np.ndarray:
        return equilibrium_matrix(self.coefficients, self.rho)

    def limit_appraisal(self) -> np.ndarray:
        return predicted_limit_appraisal(self.coefficients, self.rho)


class NotAnEquilibrium(ValueError):
    def __init__(self, column: Optional[int], message: str):
        self.column = column
        super().__init__(message)


def _prefilter(X: np.ndarray, sign_tolerance: float) -> tuple[np.ndarray, Optional[BalanceVerdict]]:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"appraisal matrix must be square, got shape {X.shape}")
    diag = np.diag(X)
    low = np.flatnonzero(diag <= sign_tolerance)
    if low.size:
        return X, BalanceVerdict(False, witness=Witness("diagonal", (int(low[0]),)))
    zeros = np.argwhere(np.abs(X) <= sign_tolerance)
    if zeros.size:
        return X, BalanceVerdict(False, witness=Witness("zero", tuple(int(v) for v in zeros[0])))
    return X, None


def is_socially_balanced_triads(
    X: AppraisalMatrix, sign_tolerance: float = DEFAULT_SIGN_TOLERANCE
) -> BalanceVerdict:
    """Brute-force balance test over every ordered triad (i, j, k).

    All n^3 sign products S_ij S_jk S_ki are formed explicitly; this is the
    reference the row-pattern test is checked against.
    """
    X, early = _prefilter(X, sign_tolerance)
    if early is not None:
        return early
    S = sign_matrix(X, sign_tolerance).astype(np.int64)
    # prod[i, j, k] = S_ij * S_jk * S_ki
    prod = S[:, :, None] * S[None, :, :] * S.T[:, None, :]
    bad = np.argwhere(prod != 1)
    if bad.size:
        return BalanceVerdict(False, witness=Witness("triad", tuple(int(v) for v in bad[0])))
    return BalanceVerdict(True, partition=S[0].astype(np.int8))


def is_socially_balanced_rows(
    X: AppraisalMatrix, sign_tolerance: float = DEFAULT_SIGN_TOLERANCE
) -> BalanceVerdict:
    """Balance test via row sign patterns: every row equals +/- row 0."""
    X, early = _prefilter(X, sign_tolerance)
    if early is not None:
        return early
    S = sign_matrix(X, sign_tolerance)
    same = np.all(S == S[0], axis=1)
    opposite = np.all(S == -S[0], axis=1)
    bad = np.flatnonzero(~(same | opposite))
    if bad.size:
        return BalanceVerdict(False, witness=Witness("rows", (0, int(bad[0]))))
    return BalanceVerdict(True, partition=np.where(same, 1, -1).astype(np.int8))


is_socially_balanced = is_socially_balanced_rows


def _row_partition(same: np.ndarray, opposite: np.ndarray) -> Optional[np.ndarray]:
    if not np.all(same | opposite):
        return None
    return np.where(same, 1, -1).astype(np.int8)


def modulus_sign_consensus(
    Y: OpinionMatrix, sign_tolerance: float = DEFAULT_SIGN_TOLERANCE
) -> ConsensusVerdict:
    """Are all opinion sign patterns pairwise equal or opposite?

    Columns that are zero for every agent are left out of the comparison.
    """
    S = sign_matrix(Y, sign_tolerance)
    S = S[:, np.any(S != 0, axis=0)]
    if S.shape[1] == 0:
        return ConsensusVerdict(ConsensusKind.NONE)
    same = np.all(S == S[0], axis=1)
    opposite = np.all(S == -S[0], axis=1)
    part = _row_partition(same, opposite)
    if part is None:
        return ConsensusVerdict(ConsensusKind.NONE)
    if np.all(part == 1):
        return ConsensusVerdict(ConsensusKind.SIGN_CONSENSUS, part)
    return ConsensusVerdict(ConsensusKind.BIPARTITE_SIGN_CONSENSUS, part)


def modulus_consensus(Y: OpinionMatrix, value_tolerance: float = 1e-9) -> ConsensusVerdict:
    """Are all opinion rows equal to +/- row 0 within ``value_tolerance``?"""
    Y = np.asarray(Y, dtype=np.float64)
    same = np.max(np.abs(Y - Y[0]), axis=1) <= value_tolerance
    opposite = np.max(np.abs(Y + Y[0]), axis=1) <= value_tolerance
    part = _row_partition(same, opposite)
    if part is None:
        return ConsensusVerdict(ConsensusKind.NONE)
    if np.all(part == 1):
        return ConsensusVerdict(ConsensusKind.CONSENSUS, part)
    return ConsensusVerdict(ConsensusKind.BIPARTITE_CONSENSUS, part)


def nonvanishing_check(
    traj: Trajectory,
    window_start: int = WINDOW_START,
    window_end: int = WINDOW_END,
    threshold: float = NONVANISHING_THRESHOLD,
) -> bool:
    """Indicator that min |X_ij(t)| >= threshold for all t in the window.

    A run that converged before ``window_end`` is judged on its last
    appraisal matrix, which the frozen dynamics repeats from then on. Any
    domain violation before ``window_end`` makes the indicator false.
    """
    return window_min_abs_appraisal(traj, window_start, window_end) >= threshold


def window_min_abs_appraisal(traj: Trajectory, window_start: int, window_end: int) -> float:
    """min over recorded t in [window_start, window_end] of min_ij |X_ij(t)|.

    Returns ``-inf`` for a trajectory that left the domain before
    ``window_end``.
    """
    if window_start > window_end:
        raise ValueError("window_start must not exceed window_end")
    term = traj.termination
    if term.status is Status.DOMAIN_VIOLATION and term.step <= window_end:
        return float("-inf")
    last = traj.final.t
    if term.status is Status.MAX_STEPS_REACHED and last < window_end:
        raise ValueError(f"trajectory stops at step {last}, before window end {window_end}")
    mins = [
        float(np.min(np.abs(s.X)))
        for s in traj.snapshots
        if s.X is not None and window_start <= s.t <= window_end
    ]
    if term.status is Status.CONVERGED and last < window_end:
        mins.append(float(np.min(np.abs(traj.final.X))))
    if not mins:
        raise ValueError("no appraisal snapshots fall inside the window")
    return min(mins)


def classify_equilibrium(
    Y: OpinionMatrix, value_tolerance: float = 1e-9
) -> EquilibriumDescription:
    """Match ``Y`` against the form [a_1 rho, ..., a_m rho] with rho in {+-1}^n.

    rho is read off the first column with non-negligible magnitude and
    normalised so that agent 0 sits in the +1 faction. Columns that are
    zero within tolerance get coefficient 0. Raises
    :class:`NotAnEquilibrium` naming the first column that does not fit,
    or ``column=None`` when the one-step residual exceeds the tolerance.
    """
    Y = np.asarray(Y, dtype=np.float64)
    n, m = Y.shape
    rho = None
    coeffs = np.zeros(m)
    for k in range(m):
        col = Y[:, k]
        if np.max(np.abs(col)) <= value_tolerance:
            continue
        if rho is None:
            if np.any(np.abs(col) <= value_tolerance):
                raise NotAnEquilibrium(k, f"column {k} has zero entries but is not a zero column")
            rho = (np.sign(col) * np.sign(col[0])).astype(np.int8)
        a = float(np.mean(rho * col))
        if np.max(np.abs(col - a * rho)) > value_tolerance:
            raise NotAnEquilibrium(k, f"column {k} is not a multiple of the common sign vector")
        coeffs[k] = a
    if rho is None:
        raise NotAnEquilibrium(0, "all columns vanish")
    residual = float(np.max(np.abs(step(Y).Y_next - Y)))
    if residual > value_tolerance:
        raise NotAnEquilibrium(None, f"one-step residual {residual:.3g} exceeds tolerance")
    return EquilibriumDescription(rho, coeffs, residual)


@dataclass(frozen=True)
class StabilityReport:
    fraction_returning: float
    max_final_distance: float
    trials: int


def local_stability_probe(
    eq: EquilibriumDescription,
    perturbation_scale: float,
    trials: int,
    seed: int,
    max_steps: int = 200,
) -> StabilityReport:
    """Perturb Y* uniformly in [-s, s] entry-wise and check the runs stay close.

    A trial counts as returning when every recorded Y(t) stays within
    max-norm distance 2 s of Y*. Per-trial streams come from
    ``SeedSequence(seed, spawn_key=(trial,))``.
    """
    a = np.asarray(eq.coefficients, dtype=np.float64)
    if np.any(a == 0):
        raise ValueError("local stability needs every coefficient non-zero")
    if perturbation_scale < 0:
        raise ValueError("perturbation_scale must be non-negative")
    if perturbation_scale >= np.min(np.abs(a)):
        raise ValueError("perturbation_scale must be below min |a_k|")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    Y_star = equilibrium_matrix(a, eq.rho)
    config = SimulationConfig(max_steps=max_steps, convergence_tolerance=0.0)
    bound = 2.0 * perturbation_scale
    returned = 0
    worst = 0.0
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))
        Y0 = Y_star + rng.uniform(-perturbation_scale, perturbation_scale, Y_star.shape)
        traj = simulate(Y0, config)
        dist = np.abs(traj.opinions() - Y_star).max(axis=(1, 2))
        ok = traj.status is not Status.DOMAIN_VIOLATION and bool(np.all(dist <= bound))
        returned += ok
        worst = max(worst, float(dist[-1]))
    return StabilityReport(returned / trials, worst, trials)


@dataclass(frozen=True)
class LimitVerdicts:
    """The four properties that hold together (or fail together) on a run."""

    nonvanishing: bool
    converged_to_equilibrium: bool
    sign_consensus_frozen: bool
    balance_persistent: bool
    first_sign_consensus_step: Optional[int] = None
    first_balanced_step: Optional[int] = None

    @property
    def agree(self) -> bool:
        vals = {self.nonvanishing, self.converged_to_equilibrium,
                self.sign_consensus_frozen, self.balance_persistent}
        return len(vals) == 1


def limit_verdicts(
    traj: Trajectory,
    window_start: int = WINDOW_START,
    window_end: int = WINDOW_END,
    threshold: float = NONVANISHING_THRESHOLD,
    limit_tolerance: float = 1e-6,
    sign_tolerance: float = DEFAULT_SIGN_TOLERANCE,
) -> LimitVerdicts:
    """Evaluate non-vanishing, equilibrium convergence, frozen modulus
    sign-consensus and persistent balance on one trajectory."""
    violated = traj.status is Status.DOMAIN_VIOLATION
    nonvanishing = (not violated) and nonvanishing_check(traj, window_start, window_end, threshold)

    converged = False
    if not violated:
        try:
            eq = classify_equilibrium(traj.final.Y, limit_tolerance)
            X_star = predicted_limit_appraisal(eq.coefficients, eq.rho)
            converged = float(np.max(np.abs(traj.final.X - X_star))) <= limit_tolerance
        except NotAnEquilibrium:
            converged = False

    t_sign = None
    frozen_ok = False
    for idx, snap in enumerate(traj.snapshots):
        if modulus_sign_consensus(snap.Y, sign_tolerance):
            t_sign = snap.t
            ref = sign_matrix(snap.Y, sign_tolerance)
            frozen_ok = all(
                np.array_equal(sign_matrix(s.Y, sign_tolerance), ref)
                for s in traj.snapshots[idx + 1:]
            )
            break
    sign_ok = (not violated) and frozen_ok

    t_bal = None
    bal_ok = False
    xs = [s for s in traj.snapshots if s.X is not None]
    for idx, snap in enumerate(xs):
        if is_socially_balanced_rows(snap.X, sign_tolerance):
            t_bal = snap.t
            bal_ok = all(is_socially_balanced_rows(s.X, sign_tolerance) for s in xs[idx + 1:])
            break
    bal_ok = (not violated) and bal_ok

    return LimitVerdicts(nonvanishing, converged, sign_ok, bal_ok, t_sign, t_bal)
