"""Coupled appraisal / influence / opinion update maps and the simulation loop.

One step of the model reads

    X+ = diag(|Y| 1)^-1 Y Y^T          (homophily appraisal)
    W+ = diag(|X+| 1)^-1 X+            (signed, |W+| row-stochastic)
    Y+ = W+ Y                          (influence-based opinion update)

which collapses to ``Y+ = diag(|Y Y^T| 1)^-1 Y Y^T Y``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterator

import numpy as np

from .core import (
    DEFAULT_ROW_TOLERANCE,
    AppraisalMatrix,
    DomainViolation,
    InfluenceMatrix,
    OpinionMatrix,
    Snapshot,
    Status,
    Termination,
    Trajectory,
    first_small_row,
    frozen,
    validate_opinion_matrix,
)


@dataclass(frozen=True)
class StepResult:
    X_next: AppraisalMatrix
    W_next: InfluenceMatrix
    Y_next: OpinionMatrix


@dataclass(frozen=True)
class SimulationConfig:
    max_steps: int = 1000
    convergence_tolerance: float = 1e-9
    row_tolerance: float = DEFAULT_ROW_TOLERANCE
    record_every: int = 1

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.convergence_tolerance < 0 or self.row_tolerance < 0:
            raise ValueError("tolerances must be non-negative")

    def to_dict(self) -> dict:
        return asdict(self)


def _row_normalize(a: np.ndarray, row_tolerance: float) -> np.ndarray:
    norms = np.abs(a).sum(axis=1)
    bad = np.flatnonzero(norms <= row_tolerance)
    if bad.size:
        raise DomainViolation(bad[0])
    return a / norms[:, None]


def appraisal_update(
    Y: OpinionMatrix, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> AppraisalMatrix:
    """X_ij = <Y_i, Y_j> / ||Y_i||_1."""
    Y = np.asarray(Y, dtype=np.float64)
    norms = np.abs(Y).sum(axis=1)
    bad = np.flatnonzero(norms <= row_tolerance)
    if bad.size:
        raise DomainViolation(bad[0])
    return frozen((Y @ Y.T) / norms[:, None])


def influence_from_appraisal(
    X: AppraisalMatrix, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> InfluenceMatrix:
    """Divide each appraisal row by its 1-norm.

    A row with vanishing 1-norm raises :class:`DomainViolation`.
    """
    return frozen(_row_normalize(np.asarray(X, dtype=np.float64), row_tolerance))


def opinion_update(
    W: InfluenceMatrix, Y: OpinionMatrix, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> OpinionMatrix:
    W = np.asarray(W, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] != W.shape[1] or W.shape[1] != Y.shape[0]:
        raise ValueError(f"shape mismatch: W {W.shape}, Y {Y.shape}")
    Y_next = W @ Y
    bad = first_small_row(Y_next, row_tolerance)
    if bad is not None:
        raise DomainViolation(bad, f"opinion row {bad} vanished; the trajectory left the domain")
    return frozen(Y_next)


def step(Y: OpinionMatrix, row_tolerance: float = DEFAULT_ROW_TOLERANCE) -> StepResult:
    X = appraisal_update(Y, row_tolerance)
    W = influence_from_appraisal(X, row_tolerance)
    return StepResult(X, W, opinion_update(W, Y, row_tolerance))


def composite_map(Y: OpinionMatrix) -> np.ndarray:
    """Direct one-line evaluation of the opinion map, no domain checks."""
    Y = np.asarray(Y, dtype=np.float64)
    G = Y @ Y.T
    return (G @ Y) / np.abs(G).sum(axis=1)[:, None]


def iterate(
    Y0: OpinionMatrix, max_steps: int, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> Iterator[tuple[int, StepResult]]:
    """Yield ``(t, step result)`` for t = 1..max_steps.

    Stops silently after ``max_steps``; a :class:`DomainViolation` propagates
    to the caller at the step where it happens.
    """
    Y = Y0
    for t in range(1, max_steps + 1):
        res = step(Y, row_tolerance)
        yield t, res
        Y = res.Y_next


def simulate(Y0, config: SimulationConfig | None = None) -> Trajectory:
    """Iterate the model from ``Y0`` and record a :class:`Trajectory`.

    The loop stops when the max-norm change of Y drops below
    ``convergence_tolerance`` (an exact repeat always counts), when
    ``max_steps`` is reached, or when an update leaves the domain. The last
    case is recorded as a termination status, not raised.
    """
    config = config or SimulationConfig()
    Y0 = validate_opinion_matrix(Y0, config.row_tolerance)
    snapshots = [Snapshot(0, Y0)]
    last: Snapshot = snapshots[0]
    termination = Termination(Status.MAX_STEPS_REACHED, config.max_steps)
    Y = Y0
    t = 0
    try:
        for t, res in iterate(Y0, config.max_steps, config.row_tolerance):
            last = Snapshot(t, res.Y_next, res.X_next, res.W_next)
            if t % config.record_every == 0:
                snapshots.append(last)
            delta = float(np.max(np.abs(res.Y_next - Y)))
            Y = res.Y_next
            if delta < config.convergence_tolerance or delta == 0.0:
                termination = Termination(Status.CONVERGED, t - 1)
                break
    except DomainViolation:
        termination = Termination(Status.DOMAIN_VIOLATION, t + 1)
    if snapshots[-1].t != last.t:
        snapshots.append(last)
    return Trajectory(snapshots, termination, config.to_dict())


def single_issue_closed_form(y0) -> np.ndarray:
    """One-step limit of a single-issue run: (||y||_2^2 / ||y||_1) sgn(y)."""
    y = np.asarray(y0, dtype=np.float64).reshape(-1)
    zero = np.flatnonzero(y == 0)
    if zero.size:
        raise DomainViolation(zero[0], f"entry {zero[0]} is zero; closed form needs all non-zero")
    return (np.dot(y, y) / np.abs(y).sum()) * np.sign(y)


def predicted_limit_appraisal(a, rho) -> AppraisalMatrix:
    """Limit appraisal (sum a_k^2 / sum |a_k|) rho rho^T for an equilibrium [a_1 rho, ..., a_m rho]."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    rho = np.asarray(rho).reshape(-1)
    if not np.any(a != 0):
        raise ValueError("coefficients must not all be zero")
    if not np.all(np.isin(rho, (-1, 1))):
        raise ValueError("rho must have entries in {-1, +1}")
    r = rho.astype(np.float64)
    return frozen((np.dot(a, a) / np.abs(a).sum()) * np.outer(r, r))


def equilibrium_matrix(a, rho) -> OpinionMatrix:
    """Build Y* = [a_1 rho, ..., a_m rho]."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    r = np.asarray(rho, dtype=np.float64).reshape(-1)
    return frozen(np.outer(r, a))
