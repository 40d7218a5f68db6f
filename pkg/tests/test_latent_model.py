import numpy as np
import pytest

from arcddl.embedding import embed
from arcddl.errors import (
    ConfigurationError,
    InsufficientDataError,
    ParseError,
    ShapeError,
    SingularFitError,
)
from arcddl.latent_model import (
    FitConfig,
    _correction_step,
    check_nonresonance,
    check_rank,
    decode,
    encode,
    estimate_initial_state,
    fit,
    invariance_loss,
    load_model,
    predict_latent,
    predict_observable,
    save_model,
)
from arcddl.waveform import ArcFaultScenario, WaveformSeries, generate, slice_series

DT = 5e-5


def sinusoid(t0, n, amp=100.0, f=50.0):
    t = t0 + np.arange(n) * DT
    return WaveformSeries(amp * np.sin(2 * np.pi * f * t), DT, t0)


def scalar_oracle(y, n_alt, ridge_b, ridge_w):
    """Loop-based fit for n_n x M data, d=1, r=2, mean centring, no decorrelation."""
    n_n, m = y.shape
    ybar = [sum(y[i, k] for k in range(m)) / m for i in range(n_n)]
    c = np.array([[y[i, k] - ybar[i] for k in range(m)] for i in range(n_n)])
    u = np.linalg.svd(c)[0][:, 0]
    if u[np.argmax(np.abs(u))] < 0:
        u = -u
    g = [sum(u[i] * c[i, k] for i in range(n_n)) for k in range(m)]
    kk = [v * v for v in g]
    s_b = sum(g[k] ** 2 for k in range(m - 1))
    s_w = sum((kk[k + 1] - kk[k]) ** 2 for k in range(m - 1))

    def b_step(w):
        phi = [g[k] + w * kk[k] for k in range(m)]
        num = sum(phi[k + 1] * phi[k] for k in range(m - 1))
        return num / (sum(phi[k] ** 2 for k in range(m - 1)) + ridge_b * s_b)

    w = 0.0
    for _ in range(n_alt):
        b = b_step(w)
        # residual g_{k+1} - b g_k + w (K_{k+1} - b K_k)
        a = [kk[k + 1] - b * kk[k] for k in range(m - 1)]
        r0 = [g[k + 1] - b * g[k] for k in range(m - 1)]
        w = -sum(ai * ri for ai, ri in zip(a, r0)) / (sum(ai * ai for ai in a) + ridge_w * s_w)
    return b_step(w), w


@pytest.mark.parametrize("ridges", [(0.0, 0.0), (1e-8, 1.0), (1e-3, 1e-2)])
def test_scalar_fit_matches_oracle(ridges):
    rng = np.random.default_rng(7)
    x = np.sin(0.3 * np.arange(22)) + 0.2 * np.sin(0.3 * np.arange(22)) ** 2 + 0.05 * rng.normal(size=22)
    m = embed(WaveformSeries(x, 1.0), 3)
    cfg = FitConfig(latent_dim=1, lift_degree=2, ridge=ridges[0], correction_ridge=ridges[1],
                    centering="mean", decorrelate_correction=False, confine_spectrum=False)
    model, _ = fit(m, cfg)
    b, w = scalar_oracle(m.values, cfg.n_alternations, *ridges)
    assert model.raw_operator[0, 0] == pytest.approx(b, abs=1e-8)
    assert model.correction[0, 0] == pytest.approx(w, abs=1e-8)


def test_correction_step_matches_dense_design_matrix():
    # brute-force the design matrix column by column through unit perturbations
    rng = np.random.default_rng(3)
    d, q, n = 2, 4, 30
    gamma, kn = rng.normal(size=(d, n)), rng.normal(size=(q, n))
    b = rng.normal(size=(d, d))
    weights = rng.uniform(0.5, 2.0, size=q)

    def residual(z):
        phi = gamma + z @ kn
        return (phi[:, 1:] - b @ phi[:, :-1]).ravel()

    base = residual(np.zeros((d, q)))
    cols = []
    for j in range(q):
        for i in range(d):
            unit = np.zeros((d, q))
            unit[i, j] = 1.0
            cols.append(residual(unit) - base)
    a = np.array(cols).T
    ridge = 0.1
    pen = ridge * np.repeat(weights, d)
    expected = np.linalg.solve(a.T @ a + np.diag(pen), -a.T @ base)
    got = _correction_step(gamma, kn, b, ridge, weights)
    np.testing.assert_allclose(got.reshape(-1, order="F"), expected, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("decorrelate", [True, False])
def test_loss_history_non_increasing(decorrelate):
    rng = np.random.default_rng(11)
    for _ in range(25):
        x = np.cumsum(rng.normal(size=40)) + np.sin(rng.uniform(0.1, 1.0) * np.arange(40))
        cfg = FitConfig(latent_dim=2, lift_degree=3, decorrelate_correction=decorrelate,
                        correction_ridge=rng.uniform(0, 1), n_alternations=6)
        _, diag = fit(embed(WaveformSeries(x, 1.0), 4), cfg)
        h = np.array(diag.loss_history)
        assert len(h) == 6
        assert np.all(np.diff(h) <= 1e-12 * max(1.0, h[0]))


def test_sinusoid_identification():
    model, diag = fit(embed(sinusoid(0.1, 1600)), FitConfig())
    lam = np.linalg.eigvals(model.raw_operator)
    assert np.sort(np.angle(lam)) == pytest.approx([-2 * np.pi / 400, 2 * np.pi / 400], abs=1e-4)
    assert np.abs(lam) == pytest.approx([1, 1], abs=1e-3)
    assert diag.rank_ok
    # a neutral pair is always resonant: lam1 * (lam1 * lam2) == lam1 when |lam| == 1
    assert not diag.nonresonance_ok
    assert diag.reconstruction_rms < 1e-6


def test_encode_decode_shapes_and_round_trip():
    model, _ = fit(embed(sinusoid(0.0, 1000)), FitConfig())
    y = embed(sinusoid(0.0, 50)).values
    phi = encode(model, y)
    assert phi.shape == (2, y.shape[1])
    assert encode(model, y[:, 3]).shape == (2,)
    np.testing.assert_allclose(decode(model, phi), y, atol=1e-6)
    with pytest.raises(ShapeError):
        encode(model, np.ones(5))
    with pytest.raises(ShapeError):
        decode(model, np.ones(3))


def test_predict_latent_and_loss():
    model, diag = fit(embed(sinusoid(0.0, 1000)), FitConfig(confine_spectrum=False))
    traj = predict_latent(model, np.array([1.0, 0.0]), 3)
    assert traj.shape == (4, 2)
    np.testing.assert_allclose(traj[3], np.linalg.matrix_power(model.operator, 3) @ [1, 0])
    m = embed(sinusoid(0.0, 1000))
    assert invariance_loss(model, m) == pytest.approx(diag.final_loss, rel=1e-9, abs=1e-18)


def test_prediction_starts_at_seed_end():
    seed = sinusoid(0.1, 1600)
    model, _ = fit(embed(seed), FitConfig())
    pred = predict_observable(model, seed, 0.01)
    assert pred.t0 == pytest.approx(seed.t_end) and len(pred) == 200
    truth = sinusoid(seed.t_end, 200)
    np.testing.assert_allclose(pred.samples, truth.samples, atol=1e-3)


def test_initial_state_single_column_is_encode():
    model, _ = fit(embed(sinusoid(0.0, 1000)), FitConfig())
    y = embed(sinusoid(0.0, 20)).values
    np.testing.assert_array_equal(estimate_initial_state(model, y[:, -1:]), encode(model, y[:, -1]))
    # noiseless data: every window agrees with the last one
    np.testing.assert_allclose(estimate_initial_state(model, y), encode(model, y[:, -1]), atol=1e-7)


def test_save_load_bit_exact(tmp_path):
    w = generate(ArcFaultScenario())
    seed = slice_series(w, 0.1, 0.18)
    model, _ = fit(embed(seed), FitConfig())
    path = tmp_path / "m.json"
    save_model(model, path)
    again = load_model(path)
    for name in ("mean", "projection", "correction", "operator", "raw_operator",
                 "decoder_linear", "decoder_nonlinear"):
        assert np.array_equal(getattr(model, name), getattr(again, name))
    a = predict_observable(model, seed, 0.05).samples
    b = predict_observable(again, seed, 0.05).samples
    assert np.array_equal(a, b)
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_model(path)
    path.write_text('{"latent_dim": 2}')
    with pytest.raises(ParseError):
        load_model(path)


def test_fit_preconditions():
    with pytest.raises(InsufficientDataError):
        fit(embed(sinusoid(0.0, 20)), FitConfig())
    with pytest.raises(SingularFitError):
        fit(embed(WaveformSeries(np.full(200, 3.0), DT)), FitConfig())
    with pytest.raises(ConfigurationError):
        fit(embed(sinusoid(0.0, 200), 1), FitConfig())
    for kwargs in [dict(latent_dim=0), dict(lift_degree=1), dict(ridge=-1.0),
                   dict(centering="median"), dict(seed_columns=0), dict(n_alternations=0)]:
        with pytest.raises(ConfigurationError):
            FitConfig(**kwargs)


def test_confinement_puts_spectrum_on_circle():
    model, diag = fit(embed(slice_series(generate(ArcFaultScenario()), 0.1, 0.18)), FitConfig())
    assert np.abs(np.linalg.eigvals(model.operator)) == pytest.approx([1, 1], abs=1e-12)
    assert np.array_equal(np.linalg.eigvals(model.raw_operator), np.array(diag.raw_eigenvalues))


def test_nonresonance():
    assert check_nonresonance([0.9, 0.5], 3).ok
    # 0.25 == 0.5**2
    rep = check_nonresonance([0.25, 0.5], 2)
    assert not rep.ok and (0, (0, 2)) in rep.offending
    with pytest.raises(ConfigurationError):
        check_nonresonance([0.5], 1)


def test_rank_check():
    model, _ = fit(embed(sinusoid(0.0, 1000)), FitConfig())
    assert check_rank(model)
