"""Monomial bases and polynomial feature lifts.

Bases are ordered graded-lexicographically: total degree ascending, and within
one degree the exponent tuples descend lexicographically, so for two variables
the order is ``x1, x2, x1^2, x1*x2, x2^2, x1^3, ...``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import comb

import numpy as np

from .errors import ConfigurationError, NumericInputError, ShapeError


@dataclass(frozen=True)
class MonomialBasis:
    n_vars: int
    min_degree: int
    max_degree: int
    exponents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for e in self.exponents:
            if len(e) != self.n_vars:
                raise ConfigurationError(f"exponent {e} has wrong length for {self.n_vars} variables")
            if not self.min_degree <= sum(e) <= self.max_degree:
                raise ConfigurationError(f"exponent {e} outside degrees {self.min_degree}..{self.max_degree}")
        if len(set(self.exponents)) != len(self.exponents):
            raise ConfigurationError("duplicate exponents in basis")

    def __len__(self) -> int:
        return len(self.exponents)

    @cached_property
    def exponent_array(self) -> np.ndarray:
        """``(count, n_vars)`` integer array of exponents."""
        arr = np.array(self.exponents, dtype=np.int64).reshape(len(self.exponents), self.n_vars)
        arr.setflags(write=False)
        return arr

    def to_json(self) -> list[list[int]]:
        return [list(e) for e in self.exponents]

    @classmethod
    def from_json(cls, n_vars: int, min_degree: int, max_degree: int, exponents) -> "MonomialBasis":
        return cls(int(n_vars), int(min_degree), int(max_degree),
                   tuple(tuple(int(v) for v in e) for e in exponents))


def basis_size(n_vars: int, min_degree: int, max_degree: int) -> int:
    """Number of monomials in ``n_vars`` variables with degree in ``[min_degree, max_degree]``."""
    return comb(n_vars + max_degree, max_degree) - comb(n_vars + min_degree - 1, min_degree - 1)


def enumerate_monomials(n_vars: int, min_degree: int, max_degree: int) -> MonomialBasis:
    """Enumerate every monomial of total degree ``min_degree..max_degree``.

    Examples
    --------
    >>> enumerate_monomials(2, 1, 2).exponents
    ((1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    >>> len(enumerate_monomials(8, 1, 3))
    164
    """
    if n_vars < 1:
        raise ConfigurationError("n_vars must be positive")
    if not 1 <= min_degree <= max_degree:
        raise ConfigurationError("need 1 <= min_degree <= max_degree")
    exponents = []
    for degree in range(min_degree, max_degree + 1):
        # combinations_with_replacement yields descending-lex exponent tuples
        for combo in itertools.combinations_with_replacement(range(n_vars), degree):
            e = [0] * n_vars
            for i in combo:
                e[i] += 1
            exponents.append(tuple(e))
    return MonomialBasis(n_vars, min_degree, max_degree, tuple(exponents))


def lift(basis: MonomialBasis, point) -> np.ndarray:
    """Evaluate every monomial of ``basis`` at a single point."""
    x = np.asarray(point, dtype=float)
    if x.shape != (basis.n_vars,):
        raise ShapeError(f"point has shape {x.shape}, expected ({basis.n_vars},)")
    return lift_matrix(basis, x[:, None])[:, 0]


def lift_matrix(basis: MonomialBasis, points) -> np.ndarray:
    """Column-wise lift of an ``(n_vars, M)`` array (or a DelayMatrix).

    Returns an array of shape ``(len(basis), M)``.
    """
    values = getattr(points, "values", points)
    x = np.asarray(values, dtype=float)
    if x.ndim != 2 or x.shape[0] != basis.n_vars:
        raise ShapeError(f"points have shape {x.shape}, expected ({basis.n_vars}, M)")
    if not np.all(np.isfinite(x)):
        raise NumericInputError("non-finite entries in lift input")
    exps = basis.exponent_array
    out = np.ones((len(basis), x.shape[1]))
    # integer powers per variable, reused across monomials
    max_deg = basis.max_degree
    powers = [np.ones_like(x)]
    for _ in range(max_deg):
        powers.append(powers[-1] * x)
    for j, e in enumerate(exps):
        for i in np.flatnonzero(e):
            out[j] *= powers[e[i]][i]
    return out
