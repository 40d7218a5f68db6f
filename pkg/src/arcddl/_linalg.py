"""Ridge least squares with column-equilibrated Tikhonov weights."""

from __future__ import annotations

import numpy as np

from .errors import SingularFitError


def solve_normal(gram: np.ndarray, rhs: np.ndarray, ridge: float, weights: np.ndarray | None = None,
                 *, allow_singular: bool = False) -> np.ndarray:
    """Solve ``(gram + ridge*diag(weights)) z = rhs``.

    ``weights`` defaults to ``diag(gram)``, i.e. each unknown is penalised in
    proportion to its own normal-equation diagonal. The system is equilibrated
    by that diagonal before solving. With ``allow_singular`` a rank-deficient
    system returns its minimum-norm solution instead of raising.
    """
    w = np.diag(gram).copy() if weights is None else np.asarray(weights, dtype=float)
    a = gram + ridge * np.diag(w)
    scale = np.sqrt(np.abs(np.diag(a)))
    scale[scale == 0] = 1.0
    a_s = a / np.outer(scale, scale)
    b_s = rhs / (scale[:, None] if rhs.ndim == 2 else scale)
    cond = np.linalg.cond(a_s) if a_s.size else 1.0
    if not np.isfinite(cond) or cond > 1e14:
        if not allow_singular:
            raise SingularFitError(f"normal equations singular (condition {cond:.3g})")
        z = np.linalg.lstsq(a_s, b_s, rcond=1e-13)[0]
    else:
        z = np.linalg.solve(a_s, b_s)
    return z / (scale[:, None] if z.ndim == 2 else scale)


def ridge_map(x: np.ndarray, y: np.ndarray, ridge: float, weights: np.ndarray | None = None,
              *, allow_singular: bool = False) -> np.ndarray:
    """Coefficient matrix ``C`` minimising ``||y - C x||^2 + ridge * sum_j w_j ||C[:, j]||^2``.

    ``x`` is ``(p, N)`` regressors, ``y`` is ``(q, N)`` targets; returns ``(q, p)``.
    """
    gram = x @ x.T
    return solve_normal(gram, x @ y.T, ridge, weights, allow_singular=allow_singular).T
