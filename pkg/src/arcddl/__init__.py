"""Data-driven linearization of current waveforms for early arc-fault warning."""

__version__ = "0.1.0"

from .embedding import DelayMatrix, EmbeddingConfig, delay_dimension, embed
from .lifting import MonomialBasis, enumerate_monomials, lift, lift_matrix
from .waveform import ArcFaultScenario, WaveformSeries, generate, load_csv, slice_series, write_csv
from .spectral import SpectralReport, classify, confine, lifted_mode_report
from .latent_model import (
    FitConfig,
    FitDiagnostics,
    LatentModel,
    decode,
    encode,
    fit,
    load_model,
    predict_latent,
    predict_observable,
    save_model,
)
from .detection import (
    CombineMode,
    DetectionReport,
    ErrorTrace,
    SweepReport,
    ThresholdPolicy,
    calibrate,
    detect,
    error_trace,
    run_pipeline,
    sweep_training_window,
)
