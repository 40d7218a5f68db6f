import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcddl.embedding import EmbeddingConfig, delay_dimension, embed, head_observable
from arcddl.errors import ConfigurationError, InsufficientDataError
from arcddl.waveform import WaveformSeries


def test_delay_dimension_examples():
    assert delay_dimension(EmbeddingConfig(2, 3, 1)) == 8
    assert delay_dimension(EmbeddingConfig(3, 2, 2)) == 6
    assert delay_dimension(EmbeddingConfig(1, 0, 1)) == 3


@given(st.integers(1, 20), st.integers(0, 10), st.integers(1, 10))
def test_delay_dimension_covers_whitney_bound(imdim, over, n_obs):
    n_n = delay_dimension(EmbeddingConfig(imdim, over, n_obs))
    assert n_n * n_obs >= 2 * imdim + 1
    assert (n_n - over - 1) * n_obs < 2 * imdim + 1


def test_invalid_config():
    for args in [(0, 3, 1), (2, -1, 1), (2, 3, 0), (1.5, 3, 1)]:
        with pytest.raises(ConfigurationError):
            EmbeddingConfig(*args)


def test_hankel_layout():
    series = WaveformSeries(np.arange(10.0), 0.5, 1.0)
    m = embed(series, EmbeddingConfig(1, 1, 1))
    assert m.n_n == 4 and m.n_columns == 7
    np.testing.assert_array_equal(m.values[:, 0], [0, 1, 2, 3])
    np.testing.assert_array_equal(m.values[:, 6], [6, 7, 8, 9])
    np.testing.assert_array_equal(head_observable(m), np.arange(7.0))
    assert m.source_t0 == 1.0 and m.source_dt == 0.5 and m.source_length == 10


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=60), st.integers(1, 3))
def test_hankel_property(samples, n_n):
    m = embed(WaveformSeries(samples, 1.0), n_n)
    assert m.n_columns == len(samples) - n_n + 1
    for i in range(m.n_n):
        for k in range(m.n_columns):
            assert m.values[i, k] == samples[i + k]


def test_too_short():
    with pytest.raises(InsufficientDataError):
        embed(WaveformSeries(np.arange(8.0), 1.0), EmbeddingConfig())
    assert embed(WaveformSeries(np.arange(9.0), 1.0)).n_columns == 2


def test_csv_export(tmp_path):
    m = embed(WaveformSeries(np.linspace(0, 1, 12), 0.1), 3)
    path = tmp_path / "h.csv"
    m.to_csv(path)
    np.testing.assert_array_equal(np.loadtxt(path, delimiter=","), m.columns)
