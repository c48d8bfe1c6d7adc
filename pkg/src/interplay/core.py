"""Validated matrix types, sign reading, and the trajectory container.

Matrices are plain float64 numpy arrays marked read-only once validated.
The aliases below only document intent; validation happens in the
``validate_*`` helpers and inside the update maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Optional

import numpy as np

OpinionMatrix = np.ndarray
AppraisalMatrix = np.ndarray
InfluenceMatrix = np.ndarray
SignVector = np.ndarray

DEFAULT_ROW_TOLERANCE = 1e-12
DEFAULT_SIGN_TOLERANCE = 1e-9


class DomainViolation(ValueError):
    """A matrix left the non-zero-row domain the dynamics is defined on."""

    def __init__(self, row: int, message: Optional[str] = None):
        self.row = int(row)
        super().__init__(message or f"row {self.row} has (numerically) zero 1-norm")


class NonFiniteError(ValueError):
    """A matrix contains NaN or infinite entries."""


def frozen(a: np.ndarray) -> np.ndarray:
    """Return a read-only float64 copy of ``a``."""
    out = np.array(a, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


def sign_of(value: float, tolerance: float = 0.0) -> int:
    if tolerance < 0:
        raise ValueError("tolerance must be non-negative")
    if abs(value) <= tolerance:
        return 0
    return 1 if value > 0 else -1


def sign_matrix(a: np.ndarray, tolerance: float = 0.0) -> np.ndarray:
    """Vectorised :func:`sign_of`, returning an int8 array in {-1, 0, 1}."""
    a = np.asarray(a, dtype=np.float64)
    s = np.sign(a).astype(np.int8)
    s[np.abs(a) <= tolerance] = 0
    return s


def first_small_row(a: np.ndarray, row_tolerance: float) -> Optional[int]:
    """Index of the first row whose 1-norm is <= ``row_tolerance``, else None."""
    norms = np.abs(a).sum(axis=1)
    bad = np.flatnonzero(norms <= row_tolerance)
    return int(bad[0]) if bad.size else None


def validate_opinion_matrix(
    entries, row_tolerance: float = DEFAULT_ROW_TOLERANCE
) -> OpinionMatrix:
    """Check an n x m opinion matrix and return a read-only copy.

    Raises :class:`NonFiniteError` for NaN/inf entries and
    :class:`DomainViolation` for a row whose 1-norm is at most
    ``row_tolerance``.
    """
    y = np.array(entries, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
        raise ValueError(f"opinion matrix must be a non-empty 2-D array, got shape {y.shape}")
    if not np.all(np.isfinite(y)):
        raise NonFiniteError("opinion matrix contains non-finite entries")
    bad = first_small_row(y, row_tolerance)
    if bad is not None:
        raise DomainViolation(bad)
    y.flags.writeable = False
    return y


class Status(str, Enum):
    CONVERGED = "converged"
    MAX_STEPS_REACHED = "max_steps_reached"
    DOMAIN_VIOLATION = "domain_violation"


@dataclass(frozen=True)
class Termination:
    """Why a simulation stopped.

    For ``converged`` runs ``step`` is the first step whose opinions were
    already (numerically) fixed; one more step is computed and stored so
    the limit appraisal is available. For ``domain_violation`` it is the
    step whose update could not be formed.
    """

    status: Status
    step: int


@dataclass(frozen=True)
class Snapshot:
    t: int
    Y: OpinionMatrix
    X: Optional[AppraisalMatrix] = None
    W: Optional[InfluenceMatrix] = None


@dataclass(frozen=True)
class Trajectory:
    snapshots: list[Snapshot]
    termination: Termination
    config: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    @property
    def initial(self) -> Snapshot:
        return self.snapshots[0]

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    @property
    def steps(self) -> list[int]:
        return [s.t for s in self.snapshots]

    @property
    def status(self) -> Status:
        return self.termination.status

    def at(self, t: int) -> Snapshot:
        if 0 <= t < len(self.snapshots) and self.snapshots[t].t == t:
            return self.snapshots[t]
        for s in self.snapshots:
            if s.t == t:
                return s
        raise KeyError(f"step {t} was not recorded")

    def opinions(self) -> np.ndarray:
        """Stack of recorded opinion matrices, shape (len, n, m)."""
        return np.stack([s.Y for s in self.snapshots])

    def appraisals(self) -> np.ndarray:
        """Stack of recorded appraisal matrices (t >= 1 only)."""
        return np.stack([s.X for s in self.snapshots if s.X is not None])
