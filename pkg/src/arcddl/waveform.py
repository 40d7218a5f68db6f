"""Current waveforms: CSV ingest/export and the surrogate arc-fault generator.

Surrogate noise is drawn from ``numpy.random.Generator(PCG64(seed))``: first
``N`` standard normals for the measurement noise, then ``N + 4`` standard
normals for the burst stream. Both streams are always drawn, so a scenario and
its fault-free twin share identical measurement noise.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyInputError,
    ParseError,
    RangeError,
    SamplingError,
)

DEFAULT_SAMPLE_RATE = 20_000.0
UNIFORMITY_RTOL = 1e-6
# boxcar length of the band-limited burst noise (~4 kHz first null at 20 kHz)
BURST_TAPS = 5


@dataclass(frozen=True, eq=False)
class WaveformSeries:
    """Uniformly sampled current trace in amperes; sample ``k`` is at ``t0 + k*dt``."""

    samples: np.ndarray
    dt: float
    t0: float = 0.0

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 1 or x.size == 0:
            raise EmptyInputError("waveform needs a non-empty 1-D sample array")
        if not np.all(np.isfinite(x)):
            raise ConfigurationError("waveform samples must be finite")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "t0", float(self.t0))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return self.t0 + np.arange(self.samples.size) * self.dt

    @property
    def t_end(self) -> float:
        """Exclusive end time, ``t0 + N*dt``."""
        return self.t0 + self.samples.size * self.dt

    def index_at(self, t: float) -> int:
        """Smallest index whose time is ``>= t`` (tolerant to float rounding)."""
        return math.ceil((t - self.t0) / self.dt - 1e-9)


@dataclass(frozen=True)
class ArcFaultScenario:
    """Parameters of the surrogate medium-voltage current with an arc fault.

    Distortion strength ramps linearly from 0 at ``fault_start - precursor_lead``
    to 1 at ``fault_start``, stays at 1 until ``fault_end`` and is 0 elsewhere.
    An empty fault window (``fault_end == fault_start``) disables all distortion.
    """

    amplitude: float = 100.0
    frequency: float = 50.0
    duration: float = 0.5
    fault_start: float = 0.2
    fault_end: float = 0.3
    precursor_lead: float = 0.015
    shoulder_width: float = 20.0
    asymmetry: float = 0.3
    noise_std: float = 0.1
    seed: int = 0
    sample_rate: float = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if not self.amplitude > 0:
            raise ConfigurationError("amplitude must be positive")
        if not self.frequency > 0:
            raise ConfigurationError("frequency must be positive")
        if not self.duration > 0:
            raise ConfigurationError("duration must be positive")
        if not 0 <= self.fault_start <= self.fault_end <= self.duration:
            raise ConfigurationError("need 0 <= fault_start <= fault_end <= duration")
        if not 0 <= self.precursor_lead <= self.fault_start:
            raise ConfigurationError("need 0 <= precursor_lead <= fault_start")
        if self.shoulder_width < 0:
            raise ConfigurationError("shoulder_width must be non-negative")
        if not 0 <= self.asymmetry < 1:
            raise ConfigurationError("asymmetry must lie in [0, 1)")
        if self.noise_std < 0:
            raise ConfigurationError("noise_std must be non-negative")
        if int(self.seed) != self.seed:
            raise ConfigurationError("seed must be an integer")
        if not self.sample_rate > 0:
            raise ConfigurationError("sample_rate must be positive")

    @property
    def distortion_onset(self) -> float:
        return self.fault_start - self.precursor_lead

    def fault_free(self) -> "ArcFaultScenario":
        """Same scenario and seed with the fault (and its precursor) removed."""
        return replace(self, fault_end=self.fault_start, precursor_lead=0.0)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict, path: str = "scenario") -> "ArcFaultScenario":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigurationError(f"unknown key '{path}.{key}'")
        return cls(**data)


def distortion_strength(scenario: ArcFaultScenario, t: np.ndarray) -> np.ndarray:
    """Per-sample distortion strength in ``[0, 1]``."""
    s = np.zeros_like(t, dtype=float)
    if scenario.fault_end <= scenario.fault_start:
        return s
    s[(t >= scenario.fault_start) & (t < scenario.fault_end)] = 1.0
    if scenario.precursor_lead > 0:
        pre = (t >= scenario.distortion_onset) & (t < scenario.fault_start)
        s[pre] = (t[pre] - scenario.distortion_onset) / scenario.precursor_lead
    return s


def generate(scenario: ArcFaultScenario) -> WaveformSeries:
    """Synthesize the surrogate waveform for ``scenario`` (pure in ``scenario``).

    Distortions, scaled by the strength ``s`` of :func:`distortion_strength`:

    * shoulder clamp: samples with ``|i| < shoulder_width`` are pulled toward
      zero, ``i * (1 - s*(1 - |i|/shoulder_width))``;
    * half-cycle asymmetry: negative half-cycles scaled by ``1 - asymmetry*s``;
    * burst: band-limited unit-variance noise times ``s * shoulder_width / 4``.
    """
    dt = 1.0 / scenario.sample_rate
    n = int(round(scenario.duration * scenario.sample_rate))
    t = np.arange(n) * dt
    rng = np.random.Generator(np.random.PCG64(int(scenario.seed)))
    noise = rng.standard_normal(n) * scenario.noise_std
    burst = np.convolve(rng.standard_normal(n + BURST_TAPS - 1), np.ones(BURST_TAPS), "valid")
    burst /= math.sqrt(BURST_TAPS)

    x = scenario.amplitude * np.sin(2 * np.pi * scenario.frequency * t)
    s = distortion_strength(scenario, t)
    w = scenario.shoulder_width
    if w > 0:
        near_zero = np.abs(x) < w
        x = np.where(near_zero, x * (1 - s * (1 - np.abs(x) / w)), x)
    x = np.where(x < 0, x * (1 - scenario.asymmetry * s), x)
    x = x + s * (w / 4) * burst + noise
    return WaveformSeries(x, dt, 0.0)


def slice_series(series: WaveformSeries, t_start: float, t_end: float) -> WaveformSeries:
    """Samples whose time lies in ``[t_start, t_end)``."""
    if not t_start < t_end:
        raise RangeError(f"empty range [{t_start}, {t_end})")
    i0 = max(series.index_at(t_start), 0)
    i1 = min(series.index_at(t_end), len(series))
    if i1 <= i0:
        raise RangeError(f"range [{t_start}, {t_end}) selects no samples of the series "
                         f"[{series.t0}, {series.t_end})")
    return WaveformSeries(series.samples[i0:i1], series.dt, series.t0 + i0 * series.dt)


def _resolve_column(column, header: list[str] | None, width: int, path) -> int:
    if isinstance(column, int):
        index = column
    elif header is not None and column in header:
        index = header.index(column)
    else:
        raise ParseError(f"{path}: column {column!r} not found (header {header})")
    if not 0 <= index < width:
        raise ParseError(f"{path}: column index {index} out of range for {width} columns")
    return index


def _is_float(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path, time_column=None, current_column=None, dt: float | None = None) -> WaveformSeries:
    """Read a waveform from CSV.

    The header row is optional. Columns may be given by name or 0-based index;
    by default ``time``/``current`` are used when a header names them,
    otherwise a two-column file is read as ``time,current`` and a one-column
    file as current only (which then requires ``dt``).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(lineno, row) for lineno, row in enumerate(csv.reader(fh), start=1)
                if row and any(cell.strip() for cell in row)]
    if not rows:
        raise EmptyInputError(f"{path}: no data")
    header = None
    if not all(_is_float(c) for c in rows[0][1]):
        header = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    if not rows:
        raise EmptyInputError(f"{path}: header only, no data rows")
    width = len(rows[0][1])
    if time_column is None:
        if header is not None and "time" in header:
            time_column = "time"
        elif width >= 2 and (header is None or "current" not in header or header.index("current") != 0):
            time_column = 0
    if current_column is None:
        if header is not None and "current" in header:
            current_column = "current"
        else:
            current_column = 1 if time_column is not None and width >= 2 else 0
    tcol = None if time_column is None else _resolve_column(time_column, header, width, path)
    ccol = _resolve_column(current_column, header, width, path)

    times, currents = [], []
    for lineno, row in rows:
        try:
            currents.append(float(row[ccol]))
            if tcol is not None:
                times.append(float(row[tcol]))
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path}: line {lineno}: malformed row {row!r}") from exc
    samples = np.array(currents)
    if not np.all(np.isfinite(samples)):
        raise ParseError(f"{path}: non-finite current value")

    if tcol is None:
        if dt is None:
            raise SamplingError(f"{path}: no time column; an explicit dt is required")
        return WaveformSeries(samples, dt, 0.0)

    t = np.array(times)
    if t.size == 1:
        if dt is None:
            raise SamplingError(f"{path}: a single sample needs an explicit dt")
        return WaveformSeries(samples, dt, t[0])
    diffs = np.diff(t)
    if np.any(diffs <= 0):
        bad = int(np.flatnonzero(diffs <= 0)[0])
        raise SamplingError(f"{path}: timestamps not strictly increasing at row {bad + 2}")
    step = float(np.median(diffs))
    if np.any(np.abs(diffs - step) > UNIFORMITY_RTOL * step):
        bad = int(np.flatnonzero(np.abs(diffs - step) > UNIFORMITY_RTOL * step)[0])
        raise SamplingError(f"{path}: non-uniform sampling near row {bad + 2} "
                            f"(dt {diffs[bad]!r} vs median {step!r})")
    # the endpoint span pins dt far tighter than any single difference
    inferred = (t[-1] - t[0]) / (t.size - 1)
    if dt is not None and abs(dt - inferred) > UNIFORMITY_RTOL * inferred:
        raise SamplingError(f"{path}: explicit dt {dt} disagrees with time column ({inferred})")
    return WaveformSeries(samples, inferred, t[0])


def write_csv(series: WaveformSeries, path) -> None:
    """Write ``time,current`` with round-trip exact float formatting."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["time", "current"])
        for t, x in zip(series.times, series.samples):
            writer.writerow([repr(float(t)), repr(float(x))])
