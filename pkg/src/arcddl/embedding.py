"""Delay-coordinate (Hankel) embedding of scalar waveforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InsufficientDataError
from .waveform import WaveformSeries


@dataclass(frozen=True)
class EmbeddingConfig:
    """Target manifold dimension, over-embedding and observable count.

    The default (2, 3, 1) yields 8 delay coordinates.
    """

    imdim: int = 2
    over_embedding: int = 3
    n_observables: int = 1

    def __post_init__(self):
        if int(self.imdim) != self.imdim or self.imdim < 1:
            raise ConfigurationError("imdim must be a positive integer")
        if int(self.over_embedding) != self.over_embedding or self.over_embedding < 0:
            raise ConfigurationError("over_embedding must be a non-negative integer")
        if int(self.n_observables) != self.n_observables or self.n_observables < 1:
            raise ConfigurationError("n_observables must be a positive integer")


def delay_dimension(config: EmbeddingConfig) -> int:
    """``ceil((2*imdim + 1) / n_observables) + over_embedding``."""
    return -(-(2 * config.imdim + 1) // config.n_observables) + config.over_embedding


@dataclass(frozen=True, eq=False)
class DelayMatrix:
    """Hankel matrix whose column ``k`` is ``[x_k, ..., x_{k+n_n-1}]``.

    ``values`` has shape ``(n_n, M)``. ``source_t0`` is the time of the first
    source sample, so column ``k`` starts at ``source_t0 + k*source_dt``.
    """

    values: np.ndarray
    source_dt: float
    source_t0: float = 0.0

    @property
    def n_n(self) -> int:
        return self.values.shape[0]

    @property
    def n_columns(self) -> int:
        return self.values.shape[1]

    @property
    def columns(self) -> np.ndarray:
        """Delay vectors as rows, shape ``(M, n_n)``."""
        return self.values.T

    @property
    def source_length(self) -> int:
        return self.n_columns + self.n_n - 1

    def to_csv(self, path) -> None:
        """Write one delay vector per line (column-major order of the matrix)."""
        np.savetxt(path, self.values.T, delimiter=",", fmt="%.17g")


def embed(series: WaveformSeries, config: EmbeddingConfig | int = EmbeddingConfig()) -> DelayMatrix:
    """Forward-delay embedding with stride 1.

    ``config`` may be an EmbeddingConfig or the delay count ``n_n`` directly.
    """
    n_n = config if isinstance(config, int) else delay_dimension(config)
    if n_n < 1:
        raise ConfigurationError("delay dimension must be positive")
    x = series.samples
    if len(x) < n_n + 1:
        raise InsufficientDataError(
            f"series of length {len(x)} too short: need at least {n_n + 1} samples for n_n={n_n}"
        )
    values = np.lib.stride_tricks.sliding_window_view(x, n_n).T.copy()
    values.setflags(write=False)
    return DelayMatrix(values, series.dt, series.t0)


def head_observable(matrix: DelayMatrix) -> np.ndarray:
    """First entry of each delay vector, i.e. the source samples ``0..M-1``."""
    return matrix.values[0].copy()
