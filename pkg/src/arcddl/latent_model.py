"""Data-driven linearization of delay-embedded waveforms.

A fitted model realizes three maps on delay vectors ``y`` of length ``n_n``:

* encode: ``gamma = P (y - ybar)`` and ``phi = gamma + W K(gamma)``, where
  ``K`` collects the latent monomials of degree ``2..r``;
* advance: ``phi_next = B phi``;
* decode: ``y_hat = ybar + D1 phi + D2 K(phi)`` (truncated inverse series).

``W`` and ``B`` are fitted by alternating ridge least squares on the one-step
invariance residual ``phi_{k+1} - B phi_k``.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from ._linalg import ridge_map, solve_normal
from .embedding import DelayMatrix, embed
from .errors import (
    ConfigurationError,
    ConfinementError,
    InsufficientDataError,
    ParseError,
    ShapeError,
    SingularFitError,
)
from .lifting import MonomialBasis, enumerate_monomials, lift_matrix
from .spectral import confine
from .waveform import WaveformSeries

CENTERING_MODES = ("equilibrium", "mean")


@dataclass(frozen=True)
class FitConfig:
    """Fit settings.

    ``ridge`` weights the Tikhonov penalty on ``B`` and the decoder,
    ``correction_ridge`` the penalty on ``W``; both are relative to each
    unknown's own normal-equation diagonal. ``seed_columns`` is the number of
    trailing delay vectors used to estimate the rollout's initial latent state
    (``None``: one period of the dominant latent rotation).
    """

    latent_dim: int = 2
    lift_degree: int = 3
    ridge: float = 1e-8
    correction_ridge: float = 1.0
    n_alternations: int = 5
    confine_spectrum: bool = True
    decorrelate_correction: bool = True
    centering: str = "equilibrium"
    seed_columns: int | None = None

    def __post_init__(self):
        if int(self.latent_dim) != self.latent_dim or self.latent_dim < 1:
            raise ConfigurationError("latent_dim must be a positive integer")
        if int(self.lift_degree) != self.lift_degree or self.lift_degree < 2:
            raise ConfigurationError("lift_degree must be an integer >= 2")
        if not self.ridge >= 0 or not self.correction_ridge >= 0:
            raise ConfigurationError("ridge weights must be non-negative")
        if int(self.n_alternations) != self.n_alternations or self.n_alternations < 1:
            raise ConfigurationError("n_alternations must be a positive integer")
        if self.centering not in CENTERING_MODES:
            raise ConfigurationError(f"centering must be one of {CENTERING_MODES}")
        if self.seed_columns is not None and (int(self.seed_columns) != self.seed_columns
                                              or self.seed_columns < 1):
            raise ConfigurationError("seed_columns must be a positive integer or null")

    @classmethod
    def from_dict(cls, data: dict, path: str = "fit") -> "FitConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigurationError(f"unknown key '{path}.{key}'")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class LatentModel:
    mean: np.ndarray               # (n_n,)
    projection: np.ndarray         # (d, n_n), orthonormal rows
    correction: np.ndarray         # W, (d, m)
    operator: np.ndarray           # B used for rollout, (d, d)
    decoder_linear: np.ndarray     # D1, (n_n, d)
    decoder_nonlinear: np.ndarray  # D2, (n_n, m)
    correction_basis: MonomialBasis
    decoder_basis: MonomialBasis
    dt: float
    raw_operator: np.ndarray       # B before confinement
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        arrays = ("mean", "projection", "correction", "operator", "decoder_linear",
                  "decoder_nonlinear", "raw_operator")
        for name in arrays:
            # fixed C layout keeps BLAS summation order, hence rounding, identical after a reload
            a = np.array(getattr(self, name), dtype=float, order="C")
            if not np.all(np.isfinite(a)):
                raise ConfigurationError(f"model matrix '{name}' has non-finite entries")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        d, n_n = self.projection.shape
        m = len(self.correction_basis)
        expected = {
            "mean": (n_n,), "correction": (d, m), "operator": (d, d), "raw_operator": (d, d),
            "decoder_linear": (n_n, d), "decoder_nonlinear": (n_n, len(self.decoder_basis)),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeError(f"model matrix '{name}' has shape {getattr(self, name).shape}, expected {shape}")
        if self.correction_basis.n_vars != d or self.decoder_basis.n_vars != d:
            raise ShapeError("bases must be over the latent dimension")

    @property
    def n_n(self) -> int:
        return self.projection.shape[1]

    @property
    def latent_dim(self) -> int:
        return self.projection.shape[0]

    # serialization ---------------------------------------------------------
    def to_dict(self) -> dict:
        def basis(b: MonomialBasis) -> dict:
            return {"n_vars": b.n_vars, "min_degree": b.min_degree,
                    "max_degree": b.max_degree, "exponents": b.to_json()}
        return {
            "format": "arcddl-latent-model",
            "version": __version__,
            "n_n": self.n_n,
            "latent_dim": self.latent_dim,
            "dt": self.dt,
            "mean": self.mean.tolist(),
            "projection": self.projection.tolist(),
            "correction": self.correction.tolist(),
            "operator": self.operator.tolist(),
            "raw_operator": self.raw_operator.tolist(),
            "decoder_linear": self.decoder_linear.tolist(),
            "decoder_nonlinear": self.decoder_nonlinear.tolist(),
            "correction_basis": basis(self.correction_basis),
            "decoder_basis": basis(self.decoder_basis),
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LatentModel":
        try:
            d = int(data["latent_dim"])
            n_n = int(data["n_n"])

            def matrix(name, shape):
                return np.array(data[name], dtype=float).reshape(shape)

            cb = MonomialBasis.from_json(**data["correction_basis"])
            db = MonomialBasis.from_json(**data["decoder_basis"])
            return cls(
                mean=matrix("mean", (n_n,)),
                projection=matrix("projection", (d, n_n)),
                correction=matrix("correction", (d, len(cb))),
                operator=matrix("operator", (d, d)),
                decoder_linear=matrix("decoder_linear", (n_n, d)),
                decoder_nonlinear=matrix("decoder_nonlinear", (n_n, len(db))),
                correction_basis=cb,
                decoder_basis=db,
                dt=float(data["dt"]),
                raw_operator=matrix("raw_operator", (d, d)),
                metadata=data.get("metadata", {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed model document: {exc}") from exc


def save_model(model: LatentModel, path) -> None:
    # json emits shortest round-trip reprs, so loading is bit-exact
    Path(path).write_text(json.dumps(model.to_dict(), indent=1), encoding="utf-8")


def load_model(path) -> LatentModel:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from exc
    return LatentModel.from_dict(data)


@dataclass(frozen=True)
class NonresonanceReport:
    ok: bool
    offending: tuple[tuple[int, tuple[int, ...]], ...]


@dataclass(frozen=True)
class FitDiagnostics:
    loss_history: tuple[float, ...]
    final_loss: float
    reconstruction_rms: float
    nonresonance_ok: bool
    rank_ok: bool
    raw_eigenvalues: tuple[complex, ...] = ()
    eigenvalues: tuple[complex, ...] = ()
    confinement_note: str | None = None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["raw_eigenvalues"] = [[z.real, z.imag] for z in self.raw_eigenvalues]
        out["eigenvalues"] = [[z.real, z.imag] for z in self.eigenvalues]
        out["loss_history"] = list(self.loss_history)
        return out


# encode / decode ------------------------------------------------------------

def _as_columns(model: LatentModel, y) -> tuple[np.ndarray, bool]:
    a = np.asarray(y, dtype=float)
    single = a.ndim == 1
    cols = a[:, None] if single else a
    if cols.ndim != 2 or cols.shape[0] != model.n_n:
        raise ShapeError(f"delay vectors must have length {model.n_n}, got shape {a.shape}")
    return cols, single


def encode(model: LatentModel, y) -> np.ndarray:
    """Latent coordinates of one delay vector ``(n_n,)`` or many ``(n_n, M)``."""
    cols, single = _as_columns(model, y)
    gamma = model.projection @ (cols - model.mean[:, None])
    phi = gamma + model.correction @ lift_matrix(model.correction_basis, gamma)
    return phi[:, 0] if single else phi


def decode(model: LatentModel, phi) -> np.ndarray:
    """Delay-vector estimate ``ybar + D1 phi + D2 K(phi)``; row 0 is the observable."""
    p = np.asarray(phi, dtype=float)
    single = p.ndim == 1
    cols = p[:, None] if single else p
    if cols.shape[0] != model.latent_dim:
        raise ShapeError(f"latent vectors must have length {model.latent_dim}, got shape {p.shape}")
    y = (model.mean[:, None] + model.decoder_linear @ cols
         + model.decoder_nonlinear @ lift_matrix(model.decoder_basis, cols))
    return y[:, 0] if single else y


def predict_latent(model: LatentModel, phi0, n_steps: int) -> np.ndarray:
    """Trajectory ``[phi0, B phi0, ..., B^n phi0]`` of shape ``(n_steps + 1, d)``."""
    p = np.asarray(phi0, dtype=float)
    if p.shape != (model.latent_dim,):
        raise ShapeError(f"phi0 must have shape ({model.latent_dim},)")
    b = model.operator
    out = np.empty((n_steps + 1, p.size))
    out[0] = p
    for k in range(n_steps):
        out[k + 1] = b @ out[k]
    return out


def invariance_loss(model: LatentModel, matrix: DelayMatrix, operator=None) -> float:
    """Mean over ``k`` of ``||phi_{k+1} - B phi_k||^2`` on the columns of ``matrix``."""
    if matrix.n_columns < 2:
        raise InsufficientDataError("need at least 2 columns for a one-step residual")
    b = model.operator if operator is None else np.asarray(operator)
    phi = encode(model, matrix.values)
    res = phi[:, 1:] - b @ phi[:, :-1]
    return float(np.mean(np.sum(res ** 2, axis=0)))


# diagnostics ------------------------------------------------------------------

def check_nonresonance(eigenvalues, q_max: int, tol: float = 1e-6) -> NonresonanceReport:
    """Flag ``(k, m)`` with ``|lambda_k - prod_j lambda_j^m_j| < tol`` for ``2 <= |m| <= q_max``."""
    if q_max < 2:
        raise ConfigurationError("q_max must be at least 2")
    lam = np.asarray(eigenvalues, dtype=complex).ravel()
    n = lam.size
    offending = []
    for degree in range(2, q_max + 1):
        for combo in itertools.combinations_with_replacement(range(n), degree):
            powers = [0] * n
            for j in combo:
                powers[j] += 1
            product = np.prod(lam ** np.array(powers))
            for k in range(n):
                if abs(lam[k] - product) < tol:
                    offending.append((k, tuple(powers)))
    return NonresonanceReport(not offending, tuple(offending))


def check_rank(model: LatentModel) -> bool:
    """Whether the Jacobian of ``gamma -> gamma + W K(gamma)`` at 0 has full rank.

    Only degree-1 monomials contribute at the origin.
    """
    d = model.latent_dim
    jac = np.eye(d)
    for j, e in enumerate(model.correction_basis.exponents):
        if sum(e) == 1:
            jac[:, e.index(1)] += model.correction[:, j]
    return int(np.linalg.matrix_rank(jac)) == d


# fitting ------------------------------------------------------------------------

def _principal_rows(centered: np.ndarray, d: int) -> np.ndarray:
    u = np.linalg.svd(centered, full_matrices=False)[0]
    p = u[:, :d].T.copy()
    for row in p:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1
    return p


def _equilibrium_mean(y: np.ndarray, d: int, ridge: float, iterations: int = 2) -> np.ndarray:
    """Shift the column mean to the fixed point of an affine latent fit.

    Over a non-integer number of periods the column mean of an oscillation is
    offset from the orbit centre; a linear map can only rotate about the origin.
    """
    ybar = y.mean(axis=1)
    for _ in range(iterations):
        centered = y - ybar[:, None]
        p = _principal_rows(centered, d)
        gamma = p @ centered
        x = np.vstack([gamma[:, :-1], np.ones(gamma.shape[1] - 1)])
        try:
            coef = ridge_map(x, gamma[:, 1:], ridge)
        except SingularFitError:
            break
        b, offset = coef[:, :d], coef[:, d]
        shift = np.linalg.lstsq(np.eye(d) - b, offset, rcond=None)[0]
        if not np.all(np.isfinite(shift)) or np.linalg.norm(shift) > np.abs(gamma).max():
            break
        ybar = ybar + p.T @ shift
    return ybar


def _decorrelating_rows(k: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Rows spanning coefficient vectors ``w`` with ``sum_k (w . K_k) gamma_k = 0``."""
    cross = k @ gamma.T  # (m, d)
    u, s, _ = np.linalg.svd(cross, full_matrices=True)
    rank = int(np.sum(s > s.max() * max(cross.shape) * np.finfo(float).eps)) if s.size and s.max() > 0 else 0
    return u[:, rank:].T.copy()


def _operator_step(phi: np.ndarray, ridge: float, weights: np.ndarray) -> np.ndarray:
    return ridge_map(phi[:, :-1], phi[:, 1:], ridge, weights)


def _correction_step(gamma: np.ndarray, kn: np.ndarray, b: np.ndarray, ridge: float,
                     weights: np.ndarray) -> np.ndarray:
    """Minimise ``sum_k ||g_k + Z kn_{k+1} - B Z kn_k||^2 + ridge * penalty`` over ``Z``.

    Uses ``vec(Z X) = (X^T kron I) vec(Z)`` with column-major ``vec``.
    """
    d = gamma.shape[0]
    q = kn.shape[0]
    if q == 0:
        return np.zeros((d, 0))
    g = gamma[:, 1:] - b @ gamma[:, :-1]
    k1, k0 = kn[:, 1:], kn[:, :-1]
    eye = np.eye(d)
    gram = (np.kron(k1 @ k1.T, eye) - np.kron(k1 @ k0.T, b) - np.kron(k0 @ k1.T, b.T)
            + np.kron(k0 @ k0.T, b.T @ b))
    rhs = -(g @ k1.T - b.T @ g @ k0.T).reshape(-1, order="F")
    z = solve_normal(gram, rhs, ridge, np.repeat(weights, d), allow_singular=True)
    return z.reshape(d, q, order="F")


def _objective(gamma, kn, z, b, ridge, correction_ridge, w_b, w_z) -> float:
    phi = gamma + z @ kn
    res = phi[:, 1:] - b @ phi[:, :-1]
    penalty = ridge * np.sum(b ** 2 * w_b[None, :]) + correction_ridge * np.sum(z ** 2 * w_z[None, :])
    return float((np.sum(res ** 2) + penalty) / res.shape[1])


def min_columns(config: FitConfig) -> int:
    m = len(enumerate_monomials(config.latent_dim, 2, config.lift_degree))
    return max(10 * config.latent_dim, m + config.latent_dim)


def fit(matrix: DelayMatrix, config: FitConfig = FitConfig()) -> tuple[LatentModel, FitDiagnostics]:
    """Fit the coordinate change, linear operator and decoder on a delay matrix.

    The alternation minimises ``J(B, W) = sum_k ||phi_{k+1} - B phi_k||^2`` plus
    fixed-weight ridge penalties, so ``loss_history`` (J per sample pair after
    each alternation) is non-increasing. ``final_loss`` is the unpenalised
    invariance loss of the stored ``W`` and unconfined ``B``.
    """
    y = np.asarray(matrix.values, dtype=float)
    n_n, n_cols = y.shape
    d, r = config.latent_dim, config.lift_degree
    if d > n_n:
        raise ConfigurationError(f"latent_dim {d} exceeds delay dimension {n_n}")
    basis = enumerate_monomials(d, 2, r)
    need = min_columns(config)
    if n_cols < need:
        raise InsufficientDataError(f"{n_cols} delay columns; need at least {need}")

    centered = y - y.mean(axis=1)[:, None]
    if np.abs(centered).max() <= 1e-12 * max(1.0, np.abs(y).max()):
        raise SingularFitError("training data are constant; no dynamics to fit")
    if config.centering == "equilibrium":
        ybar = _equilibrium_mean(y, d, config.ridge)
    else:
        ybar = y.mean(axis=1)
    centered = y - ybar[:, None]
    p = _principal_rows(centered, d)
    gamma = p @ centered
    k = lift_matrix(basis, gamma)
    if config.decorrelate_correction:
        null_rows = _decorrelating_rows(k, gamma)
    else:
        null_rows = np.eye(len(basis))
    kn = null_rows @ k
    # penalty weights fixed up front so the alternation objective is a single function
    w_b = np.sum(gamma[:, :-1] ** 2, axis=1)
    w_z = np.sum(np.diff(kn, axis=1) ** 2, axis=1)

    z = np.zeros((d, kn.shape[0]))
    history = []
    for _ in range(config.n_alternations):
        b = _operator_step(gamma + z @ kn, config.ridge, w_b)
        z = _correction_step(gamma, kn, b, config.correction_ridge, w_z)
        history.append(_objective(gamma, kn, z, b, config.ridge, config.correction_ridge, w_b, w_z))
    phi = gamma + z @ kn
    b = _operator_step(phi, config.ridge, w_b)
    w = z @ null_rows

    features = np.vstack([phi, lift_matrix(basis, phi)])
    dec = ridge_map(features, centered, config.ridge)
    res = phi[:, 1:] - b @ phi[:, :-1]
    final_loss = float(np.mean(np.sum(res ** 2, axis=0)))

    raw_b = b
    note = None
    if config.confine_spectrum:
        try:
            b = confine(raw_b)
        except ConfinementError as exc:
            note = f"confinement failed, using unconfined operator: {exc}"
            warnings.warn(note, RuntimeWarning, stacklevel=2)

    train_start = matrix.source_t0
    metadata = {
        "config": asdict(config),
        "loss_history": history,
        "train_start": train_start,
        "train_end": train_start + matrix.source_length * matrix.source_dt,
        "n_columns": n_cols,
    }
    model = LatentModel(mean=ybar, projection=p, correction=w, operator=b,
                        decoder_linear=dec[:, :d], decoder_nonlinear=dec[:, d:],
                        correction_basis=basis, decoder_basis=basis, dt=matrix.source_dt,
                        raw_operator=raw_b, metadata=metadata)

    recon = decode(model, encode(model, y))
    raw_eigs = np.linalg.eigvals(raw_b)
    diagnostics = FitDiagnostics(
        loss_history=tuple(history),
        final_loss=final_loss,
        reconstruction_rms=float(np.sqrt(np.mean((recon - y) ** 2))),
        nonresonance_ok=check_nonresonance(raw_eigs, max(r, 2)).ok,
        rank_ok=check_rank(model),
        raw_eigenvalues=tuple(complex(z_) for z_ in raw_eigs),
        eigenvalues=tuple(complex(z_) for z_ in np.linalg.eigvals(b)),
        confinement_note=note,
    )
    return model, diagnostics


# forward prediction ----------------------------------------------------------------

def rotation_period(model: LatentModel) -> int | None:
    """Samples per turn of the fastest latent rotation, or None without oscillation."""
    angles = np.abs(np.angle(np.linalg.eigvals(model.operator)))
    angle = angles.max() if angles.size else 0.0
    if angle < 1e-9:
        return None
    return int(math.ceil(2 * math.pi / angle))


def estimate_initial_state(model: LatentModel, columns: np.ndarray) -> np.ndarray:
    """Latent state at the last of ``columns`` (``(n_n, J)``), fitted to all of them.

    Solves ``min_s sum_j ||encode(y_j) - B^j s||^2`` and returns ``B^(J-1) s``;
    with a single column this is just ``encode``.
    """
    phi = encode(model, columns)
    n_cols = phi.shape[1]
    if n_cols == 1:
        return phi[:, 0]
    d = model.latent_dim
    powers = np.empty((n_cols, d, d))
    powers[0] = np.eye(d)
    for j in range(1, n_cols):
        powers[j] = model.operator @ powers[j - 1]
    start = np.linalg.lstsq(powers.reshape(-1, d), phi.T.reshape(-1), rcond=None)[0]
    return powers[-1] @ start


def predict_observable(model: LatentModel, seed_window: WaveformSeries, horizon: float,
                       seed_columns: int | None = None) -> WaveformSeries:
    """Extrapolate the observable past the end of ``seed_window``.

    The returned series starts at ``seed_window.t_end`` and has
    ``floor(horizon/dt)`` samples.
    """
    n_n = model.n_n
    if len(seed_window) < n_n:
        raise InsufficientDataError(f"seed window needs at least {n_n} samples")
    if not horizon > 0:
        raise ConfigurationError("horizon must be positive")
    n_steps = int(math.floor(horizon / model.dt + 1e-9))
    if n_steps < 1:
        raise ConfigurationError(f"horizon {horizon} shorter than one sample ({model.dt})")
    x = seed_window.samples
    available = len(x) - n_n + 1
    if seed_columns is None:
        seed_columns = model.metadata.get("config", {}).get("seed_columns")
    if seed_columns is None:
        seed_columns = rotation_period(model) or available
    n_seed = max(1, min(int(seed_columns), available))
    cols = np.lib.stride_tricks.sliding_window_view(x, n_n)[-n_seed:].T
    phi = estimate_initial_state(model, cols)
    # state j describes the window starting j samples after the last seed window
    traj = predict_latent(model, phi, n_n - 1 + n_steps)[n_n:]
    head = model.mean[0] + model.decoder_linear[0] @ traj.T \
        + model.decoder_nonlinear[0] @ lift_matrix(model.decoder_basis, traj.T)
    return WaveformSeries(head, model.dt, seed_window.t_end)


def fit_series(series: WaveformSeries, embedding, config: FitConfig = FitConfig()):
    """Embed ``series`` and fit; convenience for scripts."""
    return fit(embed(series, embedding), config)
