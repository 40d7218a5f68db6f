import numpy as np
import pytest

from arcddl.errors import ConfigurationError, EmptyInputError, ParseError, RangeError, SamplingError
from arcddl.waveform import (
    ArcFaultScenario,
    WaveformSeries,
    distortion_strength,
    generate,
    load_csv,
    slice_series,
    write_csv,
)


def test_default_scenario_shape():
    w = generate(ArcFaultScenario())
    assert len(w) == 10000
    assert w.dt == pytest.approx(5e-5, rel=1e-15)
    assert w.t0 == 0.0


def test_generation_is_deterministic():
    a, b = generate(ArcFaultScenario(seed=3)), generate(ArcFaultScenario(seed=3))
    assert np.array_equal(a.samples, b.samples)
    assert not np.array_equal(a.samples, generate(ArcFaultScenario(seed=4)).samples)


def test_fault_free_twin_matches_before_onset():
    sc = ArcFaultScenario()
    fault, healthy = generate(sc), generate(sc.fault_free())
    onset = round(sc.distortion_onset / fault.dt)
    assert np.array_equal(fault.samples[:onset + 1], healthy.samples[:onset + 1])
    assert not np.array_equal(fault.samples[onset + 2:], healthy.samples[onset + 2:])
    # the healthy twin is a noisy sinusoid everywhere
    clean = 100 * np.sin(2 * np.pi * 50 * healthy.times)
    assert np.std(healthy.samples - clean) == pytest.approx(0.1, rel=0.05)


def test_distortion_strength_profile():
    sc = ArcFaultScenario()
    t = np.array([0.1, 0.185, 0.1925, 0.2, 0.25, 0.3, 0.4])
    np.testing.assert_allclose(distortion_strength(sc, t), [0, 0, 0.5, 1, 1, 0, 0], atol=1e-12)
    assert not distortion_strength(sc.fault_free(), t).any()


def test_fault_shape():
    # no shoulder means no burst either, leaving only the asymmetry
    sc = ArcFaultScenario(noise_std=0.0, shoulder_width=0.0)
    w = generate(sc)
    during = w.samples[round(0.21 / w.dt):round(0.29 / w.dt)]
    # negative half-cycles shrink by the asymmetry factor
    assert during.min() == pytest.approx(-70, abs=1e-9)
    assert during.max() == pytest.approx(100, abs=1e-9)


def test_scenario_validation():
    for kwargs in [dict(amplitude=0), dict(fault_start=0.4, fault_end=0.3), dict(asymmetry=1.0),
                   dict(precursor_lead=0.3), dict(noise_std=-1), dict(seed=1.5)]:
        with pytest.raises(ConfigurationError):
            ArcFaultScenario(**kwargs)
    with pytest.raises(ConfigurationError):
        ArcFaultScenario.from_dict({"bogus": 1})


def test_csv_round_trip(tmp_path):
    w = generate(ArcFaultScenario(duration=0.05, fault_start=0.03, fault_end=0.04, precursor_lead=0.01))
    path = tmp_path / "w.csv"
    write_csv(w, path)
    back = load_csv(path)
    assert np.array_equal(back.samples, w.samples)
    assert back.dt == pytest.approx(w.dt, rel=1e-12)
    assert back.t0 == 0.0


def test_csv_variants(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("0,1\n0.5,2\n1.0,3\n")
    w = load_csv(p)
    assert w.dt == 0.5 and list(w.samples) == [1, 2, 3]
    p.write_text("current\n1\n2\n")
    assert load_csv(p, dt=0.25).dt == 0.25
    with pytest.raises(SamplingError):
        load_csv(p)
    p.write_text("current,time\n5,0\n6,1\n")
    assert list(load_csv(p).samples) == [5, 6]


def test_csv_errors(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("time,current\n0,1\n1,x\n")
    with pytest.raises(ParseError, match="line 3"):
        load_csv(p)
    p.write_text("time,current\n0,1\n1,2\n3,3\n")
    with pytest.raises(SamplingError):
        load_csv(p)
    p.write_text("time,current\n0,1\n1,2\n1,3\n")
    with pytest.raises(SamplingError):
        load_csv(p)
    p.write_text("time,current\n0,1\n1,2\n")
    with pytest.raises(SamplingError):
        load_csv(p, dt=0.5)
    p.write_text("time,current\n")
    with pytest.raises(EmptyInputError):
        load_csv(p)
    p.write_text("")
    with pytest.raises(EmptyInputError):
        load_csv(p)


def test_slice_series():
    w = WaveformSeries(np.arange(100.0), 0.01)
    s = slice_series(w, 0.1, 0.2)
    assert len(s) == 10 and s.samples[0] == 10 and s.t0 == pytest.approx(0.1)
    with pytest.raises(RangeError):
        slice_series(w, 2.0, 3.0)
    with pytest.raises(RangeError):
        slice_series(w, 0.5, 0.5)


def test_series_validation():
    with pytest.raises(EmptyInputError):
        WaveformSeries([], 1.0)
    with pytest.raises(ConfigurationError):
        WaveformSeries([1.0], 0.0)
    with pytest.raises(ConfigurationError):
        WaveformSeries([np.inf], 1.0)
