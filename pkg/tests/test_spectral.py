import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from arcddl.embedding import embed
from arcddl.errors import ConfigurationError, ConfinementError, ShapeError
from arcddl.lifting import enumerate_monomials
from arcddl.spectral import ModeClass, classify, confine, lifted_mode_report
from arcddl.waveform import ArcFaultScenario, generate, slice_series


def rotation(mag, angle):
    c, s = np.cos(angle), np.sin(angle)
    return mag * np.array([[c, -s], [s, c]])


def test_classify_buckets():
    rep = classify(np.diag([1.1, 0.5, 1.0005]))
    assert rep.classes == (ModeClass.UNSTABLE, ModeClass.NEUTRAL, ModeClass.DECAYING)
    assert rep.counts == (1, 1, 1)
    d = rep.to_dict()
    assert d["counts"] == {"unstable": 1, "decaying": 1, "neutral": 1}
    assert d["eigenvalues"][0] == [1.1, 0.0]


def test_classify_sorted_by_magnitude():
    rep = classify(np.diag([0.2, 0.9, 0.5]))
    np.testing.assert_allclose(np.abs(rep.eigenvalues), [0.9, 0.5, 0.2])


def test_confine_reference_value():
    # 1.044 + 0.079j over its modulus 1.0469847...
    lam = 1.044 + 0.079j
    op = rotation(abs(lam), np.angle(lam))
    eig = np.linalg.eigvals(confine(op))
    top = eig[np.argmax(eig.imag)]
    assert top.real == pytest.approx(0.9971492, abs=1e-6)
    assert top.imag == pytest.approx(0.0754548, abs=1e-6)


def test_confine_keeps_zero_and_real():
    out = confine(np.diag([0.0, 2.0, -0.5]))
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(out).real), [-1, 0, 1], atol=1e-14)
    assert out.dtype == float


def test_confine_rejects_defective():
    with pytest.raises(ConfinementError):
        confine(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(ShapeError):
        confine(np.ones((2, 3)))


@settings(max_examples=60, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.01, 3.0))
def test_confine_rotation_property(mag, angle):
    out = confine(rotation(mag, angle))
    np.testing.assert_allclose(out, rotation(1.0, angle), atol=1e-12)


def test_lifted_report_on_surrogate():
    w = slice_series(generate(ArcFaultScenario()), 0.10, 0.18)
    m = embed(w)
    basis = enumerate_monomials(8, 1, 3)
    rep = lifted_mode_report(m, basis, 50)
    assert len(rep.eigenvalues) == 50 and sum(rep.counts) == 50
    assert np.all(np.diff(np.abs(rep.eigenvalues)) <= 1e-12)
    with pytest.raises(ConfigurationError):
        lifted_mode_report(m, basis, 200)
    with pytest.raises(ConfigurationError):
        lifted_mode_report(m, basis, 0)
