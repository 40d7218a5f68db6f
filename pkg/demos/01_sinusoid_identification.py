"""
Identifying a clean sinusoid
============================

A pure 50 Hz tone sampled at 20 kHz advances by 2*pi*50/20000 rad per sample.
The latent operator fitted to it should rotate by exactly that angle.
"""

import numpy as np

from arcddl import EmbeddingConfig, FitConfig, WaveformSeries, embed, fit, predict_observable

# -
fs = 20_000.0
t = 0.10 + np.arange(1600) / fs
seed = WaveformSeries(100 * np.sin(2 * np.pi * 50 * t), 1 / fs, t[0])

matrix = embed(seed, EmbeddingConfig(imdim=2, over_embedding=3))
print("delay vectors:", matrix.values.shape)

# -
model, diag = fit(matrix, FitConfig())
lam = np.linalg.eigvals(model.raw_operator)
print("eigenvalues      ", np.round(lam, 6))
print("rotation / sample", np.abs(np.angle(lam[0])), "expected", 2 * np.pi * 50 / fs)
print("reconstruction rms", diag.reconstruction_rms)

# -
# roll the model forward 0.3 s and compare with the analytic tone
pred = predict_observable(model, seed, 0.3)
truth = 100 * np.sin(2 * np.pi * 50 * pred.times)
rel = np.sqrt(np.mean((pred.samples - truth) ** 2)) / np.sqrt(np.mean(truth ** 2))
print(f"relative rms over {len(pred)} samples: {rel:.2e}")
