"""Eigen-analysis of fitted one-step operators.

Modes are classified against the unit circle (discrete time): unstable when
``|lambda| > 1 + tol``, decaying when ``|lambda| < 1 - tol``, neutral otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._linalg import ridge_map
from .errors import ConfigurationError, ConfinementError, NumericError, ShapeError
from .lifting import MonomialBasis, lift_matrix

DEFAULT_TOL_NEUTRAL = 1e-3
CONDITION_LIMIT = 1e12


class ModeClass(str, Enum):
    UNSTABLE = "Unstable"
    DECAYING = "Decaying"
    NEUTRAL = "Neutral"


@dataclass(frozen=True, eq=False)
class SpectralReport:
    eigenvalues: np.ndarray
    classes: tuple[ModeClass, ...]
    tol_neutral: float

    @property
    def counts(self) -> tuple[int, int, int]:
        """``(n_unstable, n_decaying, n_neutral)``."""
        return (sum(c is ModeClass.UNSTABLE for c in self.classes),
                sum(c is ModeClass.DECAYING for c in self.classes),
                sum(c is ModeClass.NEUTRAL for c in self.classes))

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "magnitudes": [float(abs(z)) for z in self.eigenvalues],
            "classes": [c.value for c in self.classes],
            "tol_neutral": self.tol_neutral,
            "counts": dict(zip(("unstable", "decaying", "neutral"), self.counts)),
        }


def _check_square(operator) -> np.ndarray:
    a = np.asarray(operator)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"operator must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NumericError("operator has non-finite entries")
    return a


def report_from_eigenvalues(eigenvalues, tol_neutral: float = DEFAULT_TOL_NEUTRAL) -> SpectralReport:
    """Sort by descending magnitude (ties: descending imaginary part) and classify."""
    if not tol_neutral > 0:
        raise ConfigurationError("tol_neutral must be positive")
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    order = np.lexsort((-lam.imag, -np.abs(lam)))
    lam = lam[order]
    classes = []
    for mag in np.abs(lam):
        if mag > 1 + tol_neutral:
            classes.append(ModeClass.UNSTABLE)
        elif mag < 1 - tol_neutral:
            classes.append(ModeClass.DECAYING)
        else:
            classes.append(ModeClass.NEUTRAL)
    return SpectralReport(lam, tuple(classes), tol_neutral)


def classify(operator, tol_neutral: float = DEFAULT_TOL_NEUTRAL) -> SpectralReport:
    a = _check_square(operator)
    try:
        lam = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue solver failed: {exc}") from exc
    return report_from_eigenvalues(lam, tol_neutral)


def confine(operator) -> np.ndarray:
    """Project every nonzero eigenvalue onto the unit circle, keeping eigenvectors.

    Returns ``V diag(lambda/|lambda|) V^-1`` built from the eigenvectors ``V`` of
    ``operator``; zero eigenvalues stay at zero. Raises ConfinementError when
    ``V`` is numerically defective (condition number above 1e12).
    """
    a = _check_square(operator)
    if a.size == 0:
        return a.astype(float)
    try:
        lam, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConfinementError(f"eigen-decomposition failed: {exc}") from exc
    cond = np.linalg.cond(vecs)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise ConfinementError(f"eigenvector matrix ill-conditioned (condition {cond:.3g})")
    mag = np.abs(lam)
    zero = mag <= 1e-14 * max(1.0, np.abs(a).max())
    unit = np.where(zero, 0.0, lam / np.where(zero, 1.0, mag))
    confined = np.linalg.solve(vecs.T, (vecs * unit).T).T
    if np.isrealobj(a):
        residue = np.abs(confined.imag).max()
        if residue > 1e-10 * max(1.0, np.abs(confined.real).max()):
            raise ConfinementError(f"reassembled operator not real (imaginary residue {residue:.3g})")
        return confined.real.copy()
    return confined


def lifted_mode_report(matrix, basis: MonomialBasis, n_modes: int,
                       tol: float = DEFAULT_TOL_NEUTRAL, ridge: float = 1e-8) -> SpectralReport:
    """Classify the ``n_modes`` largest-magnitude modes of the full lifted one-step map.

    The lift of every delay vector is regressed one step ahead by ridge least
    squares; the resulting ``len(basis)``-square operator is eigen-decomposed.
    """
    if not 1 <= n_modes <= len(basis):
        raise ConfigurationError(f"n_modes={n_modes} outside 1..{len(basis)} (basis dimension)")
    features = lift_matrix(basis, matrix)
    if features.shape[1] < 2:
        raise NumericError("need at least two columns for a one-step regression")
    f0, f1 = features[:, :-1], features[:, 1:]
    spread = np.ptp(f0, axis=1)
    if not np.any(spread > 1e-12 * max(1.0, np.abs(f0).max())):
        raise NumericError("lifted features are constant; one-step regression is singular")
    try:
        op = ridge_map(f0, f1, ridge)
    except NumericError as exc:
        raise NumericError(f"lifted regression singular: {exc}") from exc
    lam = np.linalg.eigvals(op)
    top = lam[np.argsort(-np.abs(lam), kind="stable")[:n_modes]]
    return report_from_eigenvalues(top, tol)
