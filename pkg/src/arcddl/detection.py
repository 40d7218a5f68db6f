"""Prediction-error traces, threshold calibration, alarm logic and window sweeps."""

from __future__ import annotations

import csv
import enum
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .embedding import EmbeddingConfig, embed
from .errors import (
    ArcDDLError,
    ConfigurationError,
    InsufficientDataError,
    RangeError,
    SamplingError,
)
from .latent_model import FitConfig, FitDiagnostics, LatentModel, fit, predict_observable
from .waveform import WaveformSeries, slice_series

DT_RTOL = 1e-9


class CombineMode(str, enum.Enum):
    ERROR_AND_GROWTH = "ErrorAndGrowth"
    ERROR_OR_GROWTH = "ErrorOrGrowth"


@dataclass(frozen=True)
class ThresholdPolicy:
    calibration_window: int = 30
    sigma_multiplier: float = 3.0
    smoothing_span: int = 10
    persistence: int = 5
    combine_mode: CombineMode = CombineMode.ERROR_AND_GROWTH

    def __post_init__(self):
        for name, low in (("calibration_window", 2), ("smoothing_span", 1), ("persistence", 1)):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < low:
                raise ConfigurationError(f"{name} must be an integer >= {low}")
        if not (math.isfinite(self.sigma_multiplier) and self.sigma_multiplier > 0):
            raise ConfigurationError("sigma_multiplier must be positive")
        try:
            object.__setattr__(self, "combine_mode", CombineMode(self.combine_mode))
        except ValueError:
            raise ConfigurationError(
                f"combine_mode must be one of {[m.value for m in CombineMode]}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["combine_mode"] = self.combine_mode.value
        return out

    @classmethod
    def from_dict(cls, data: dict, path: str = "policy") -> "ThresholdPolicy":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigurationError(f"unknown key '{path}.{key}'")
        return cls(**data)


@dataclass(frozen=True, eq=False)
class ErrorTrace:
    times: np.ndarray
    raw_error: np.ndarray
    smoothed_error: np.ndarray
    growth_rate: np.ndarray

    def __post_init__(self):
        n = len(self.times)
        for f in fields(self):
            a = np.array(getattr(self, f.name), dtype=float)
            if a.shape != (n,):
                raise ConfigurationError("trace sequences must share one length")
            a.setflags(write=False)
            object.__setattr__(self, f.name, a)

    def __len__(self) -> int:
        return self.times.size

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["time", "raw_error", "smoothed_error", "growth_rate"])
            for row in zip(self.times, self.raw_error, self.smoothed_error, self.growth_rate):
                writer.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class DetectionReport:
    theta: float
    delta: float
    alarm: bool
    alarm_time: float | None
    first_error_crossing: float | None
    first_growth_crossing: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _trailing_mean(x: np.ndarray, span: int) -> np.ndarray:
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(1, x.size + 1)
    lo = np.maximum(idx - span, 0)
    return (c[idx] - c[lo]) / (idx - lo)


def trace_from_errors(times, raw_error, dt: float, policy: ThresholdPolicy = ThresholdPolicy()) -> ErrorTrace:
    """Smooth an already computed squared-error series and differentiate it."""
    raw = np.asarray(raw_error, dtype=float)
    smoothed = _trailing_mean(raw, policy.smoothing_span)
    growth = np.zeros_like(smoothed)
    growth[1:] = np.diff(smoothed) / dt
    return ErrorTrace(np.asarray(times, dtype=float), raw, smoothed, growth)


def error_trace(truth: WaveformSeries, predicted: WaveformSeries,
                policy: ThresholdPolicy = ThresholdPolicy()) -> ErrorTrace:
    """Squared error on the common time span, smoothed and differentiated.

    The two grids must share ``dt``; their offsets are matched to the nearest
    whole sample.
    """
    dt = truth.dt
    if abs(predicted.dt - dt) > DT_RTOL * dt:
        raise SamplingError(f"dt mismatch: truth {dt!r}, prediction {predicted.dt!r}")
    shift = round((predicted.t0 - truth.t0) / dt)
    i0 = max(0, shift)               # first truth index in the overlap
    j0 = max(0, -shift)              # first prediction index in the overlap
    n = min(len(truth) - i0, len(predicted) - j0)
    if n <= 0:
        raise RangeError("truth and prediction do not overlap in time")
    diff = truth.samples[i0:i0 + n] - predicted.samples[j0:j0 + n]
    times = truth.t0 + (i0 + np.arange(n)) * dt
    return trace_from_errors(times, diff ** 2, dt, policy)


def calibrate(trace: ErrorTrace, policy: ThresholdPolicy = ThresholdPolicy()) -> tuple[float, float]:
    """``(theta, delta)`` as mean + k * population std over the first W samples."""
    w = policy.calibration_window
    if len(trace) < w:
        raise InsufficientDataError(f"trace has {len(trace)} samples; calibration needs {w}")
    e = trace.smoothed_error[:w]
    g = trace.growth_rate[:w]
    k = policy.sigma_multiplier
    return float(e.mean() + k * e.std()), float(g.mean() + k * g.std())


def _runs(flags: np.ndarray, m: int) -> np.ndarray:
    """``out[k]`` is True when ``flags[k-m+1..k]`` are all True."""
    c = np.concatenate([[0], np.cumsum(flags.astype(np.int64))])
    out = np.zeros(flags.size, dtype=bool)
    if flags.size >= m:
        out[m - 1:] = (c[m:] - c[:-m]) == m
    return out


def _any_in_window(flags: np.ndarray, m: int) -> np.ndarray:
    c = np.concatenate([[0], np.cumsum(flags.astype(np.int64))])
    idx = np.arange(1, flags.size + 1)
    return (c[idx] - c[np.maximum(idx - m, 0)]) > 0


def detect(trace: ErrorTrace, theta: float, delta: float,
           policy: ThresholdPolicy = ThresholdPolicy()) -> DetectionReport:
    """Apply the persistence alarm rule after the calibration window.

    A sample ``k`` is eligible once its whole persistence run
    ``k-m+1..k`` lies after the first ``W`` samples. The alarm time is the
    last sample of the run. First crossings are searched over the same
    post-calibration region.
    """
    if not (math.isfinite(theta) and math.isfinite(delta)):
        raise ConfigurationError("thresholds must be finite")
    w, m = policy.calibration_window, policy.persistence
    err = trace.smoothed_error > theta
    grow = trace.growth_rate > delta
    if policy.combine_mode is CombineMode.ERROR_AND_GROWTH:
        hit = _runs(err, m) & _any_in_window(grow, m)
    else:
        hit = _runs(err, m) | _runs(grow, m)
    start = w + m - 1
    hit[:start] = False
    err[:w] = False
    grow[:w] = False

    def first(mask):
        idx = np.flatnonzero(mask)
        return float(trace.times[idx[0]]) if idx.size else None

    alarm_time = first(hit)
    return DetectionReport(float(theta), float(delta), alarm_time is not None, alarm_time,
                           first(err), first(grow))


@dataclass(frozen=True, eq=False)
class PipelineResult:
    model: LatentModel
    trace: ErrorTrace
    report: DetectionReport
    diagnostics: FitDiagnostics
    prediction: WaveformSeries

    def __iter__(self):
        # unpacks as (model, trace, report)
        return iter((self.model, self.trace, self.report))


def detect_with_model(model: LatentModel, series: WaveformSeries, train_start: float,
                      train_end: float, policy: ThresholdPolicy = ThresholdPolicy()):
    """Predict from ``train_end`` to the series end and run calibration + detection.

    Returns ``(prediction, trace, report)``.
    """
    if abs(model.dt - series.dt) > DT_RTOL * series.dt:
        raise SamplingError(f"model dt {model.dt!r} does not match waveform dt {series.dt!r}")
    seed = slice_series(series, train_start, train_end)
    split = round((seed.t_end - series.t0) / series.dt)
    need = policy.calibration_window + policy.persistence
    if len(series) - split < need:
        raise InsufficientDataError(
            f"{len(series) - split} samples after training end; need at least {need}")
    truth = WaveformSeries(series.samples[split:], series.dt, seed.t_end)
    prediction = predict_observable(model, seed, len(truth) * series.dt)
    trace = error_trace(truth, prediction, policy)
    theta, delta = calibrate(trace, policy)
    return prediction, trace, detect(trace, theta, delta, policy)


def run_pipeline(series: WaveformSeries, train_start: float, train_end: float,
                 embedding: EmbeddingConfig = EmbeddingConfig(),
                 fit_config: FitConfig = FitConfig(),
                 policy: ThresholdPolicy = ThresholdPolicy()) -> PipelineResult:
    """Fit on ``[train_start, train_end)``, predict the remainder and detect."""
    if not (series.t0 - 1e-9 * series.dt <= train_start < train_end <= series.t_end + 1e-9 * series.dt):
        raise RangeError(f"training range [{train_start}, {train_end}) outside the series "
                         f"[{series.t0}, {series.t_end})")
    training = slice_series(series, train_start, train_end)
    split = round((training.t_end - series.t0) / series.dt)
    need = policy.calibration_window + policy.persistence
    if len(series) - split < need:
        raise InsufficientDataError(
            f"{len(series) - split} samples after training end; need at least {need}")
    model, diagnostics = fit(embed(training, embedding), fit_config)
    prediction, trace, report = detect_with_model(model, series, train_start, train_end, policy)
    return PipelineResult(model, trace, report, diagnostics, prediction)


@dataclass(frozen=True)
class SweepRow:
    training_end: float
    healthy_duration: float
    predicted_fault: float | None
    error: str | None = None


@dataclass(frozen=True)
class SweepReport:
    train_start: float
    rows: tuple[SweepRow, ...]

    def __post_init__(self):
        ends = [r.training_end for r in self.rows]
        if any(b <= a for a, b in zip(ends, ends[1:])):
            raise ConfigurationError("training_end must be strictly increasing across rows")

    def to_dict(self) -> dict:
        return {"train_start": self.train_start, "rows": [asdict(r) for r in self.rows]}

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["training_end", "healthy_duration", "predicted_fault"])
            for r in self.rows:
                fault = "" if r.predicted_fault is None else repr(r.predicted_fault)
                writer.writerow([repr(r.training_end), repr(r.healthy_duration), fault])


def sweep_training_window(series: WaveformSeries, train_start: float, endpoints,
                          embedding: EmbeddingConfig = EmbeddingConfig(),
                          fit_config: FitConfig = FitConfig(),
                          policy: ThresholdPolicy = ThresholdPolicy(),
                          threads: int | None = None) -> SweepReport:
    """Run the pipeline once per training endpoint; failures stay in their row."""
    ends = [float(e) for e in endpoints]
    if not ends:
        raise ConfigurationError("no sweep endpoints")
    if any(b <= a for a, b in zip(ends, ends[1:])):
        raise ConfigurationError("sweep endpoints must be strictly ascending")

    def row(end: float) -> SweepRow:
        try:
            result = run_pipeline(series, train_start, end, embedding, fit_config, policy)
        except ArcDDLError as exc:
            return SweepRow(end, end - train_start, None, f"{type(exc).__name__}: {exc}")
        return SweepRow(end, end - train_start, result.report.alarm_time)

    if threads is not None and threads < 1:
        raise ConfigurationError("threads must be at least 1")
    if threads == 1 or len(ends) == 1:
        rows = [row(e) for e in ends]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, ends))  # map keeps endpoint order
    return SweepReport(float(train_start), tuple(rows))


def dump_json(document: dict, path) -> None:
    Path(path).write_text(json.dumps(document, indent=1) + "\n", encoding="utf-8")


def provenance() -> dict:
    return {"artifact": "arcddl", "version": __version__}
