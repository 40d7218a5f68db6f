"""Command-line front end.

Exit codes: 0 success (no alarm), 10 alarm raised, 2 usage or I/O error,
3 fit failure, 4 model/waveform incompatibility, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .detection import DT_RTOL, detect_with_model, dump_json, sweep_training_window
from .embedding import embed
from .errors import ArcDDLError, ConfigurationError, NumericError, InsufficientDataError
from .latent_model import fit, load_model, save_model
from .lifting import enumerate_monomials
from .spectral import classify, confine, lifted_mode_report
from .waveform import generate, load_csv, slice_series, write_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FIT = 3
EXIT_COMPAT = 4
EXIT_NUMERIC = 5
EXIT_ALARM = 10


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Exit(EXIT_USAGE, f"usage error: {message}")


def _document(config: RunConfig, **body) -> dict:
    return {"artifact": "arcddl", "version": __version__, "config": config.to_dict(), **body}


def _write_json(path, document: dict) -> None:
    try:
        dump_json(document, path)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write {path}: {exc}") from None


def _read_wave(path, dt=None):
    try:
        return load_csv(path, dt=dt)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot read {path}: {exc}") from None


def _read_model(path):
    try:
        return load_model(path)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot read {path}: {exc}") from None


def _fit_window(wave, config: RunConfig, start: float, end: float):
    try:
        training = slice_series(wave, start, end)
        return fit(embed(training, config.embedding), config.fit)
    except (InsufficientDataError, NumericError) as exc:
        raise _Exit(EXIT_FIT, f"fit failed: {exc}") from None


def parse_ends(text: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop``; a bare number is one endpoint."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigurationError(f"--ends: cannot parse {text!r}") from None
    if len(values) == 1:
        return values
    if len(values) != 3:
        raise ConfigurationError("--ends expects start:stop:step")
    start, stop, step = values
    if not step > 0 or stop < start:
        raise ConfigurationError("--ends needs step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    # rounding to 12 digits keeps 0.11 + 3*0.01 from printing as 0.13999999999999999
    return [round(start + i * step, 12) for i in range(count)]


def cmd_gen(args, config: RunConfig) -> int:
    wave = generate(config.scenario)
    try:
        write_csv(wave, args.out)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write {args.out}: {exc}") from None
    return EXIT_OK


def cmd_train(args, config: RunConfig) -> int:
    wave = _read_wave(args.wave, args.dt)
    model, diagnostics = _fit_window(wave, config, args.train_start, args.train_end)
    notes = []
    if diagnostics.confinement_note:
        notes.append(diagnostics.confinement_note)
    onset = config.scenario.distortion_onset
    if config.scenario.fault_end > config.scenario.fault_start and args.train_end > onset:
        notes.append(f"training window ends at {args.train_end} s, after the configured "
                     f"scenario's precursor onset at {onset:.6g} s; the model has seen distorted data")
    if not diagnostics.nonresonance_ok:
        notes.append("latent eigenvalues are near-resonant up to the lift degree")
    if not diagnostics.rank_ok:
        notes.append("coordinate change is rank deficient at the origin")
    try:
        save_model(model, args.out)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write {args.out}: {exc}") from None
    diag_path = args.diagnostics or str(Path(args.out).with_suffix("")) + ".diagnostics.json"
    _write_json(diag_path, _document(
        config, train_start=args.train_start, train_end=args.train_end,
        diagnostics=diagnostics.to_dict(), notes=notes))
    return EXIT_OK


def cmd_detect(args, config: RunConfig) -> int:
    wave = _read_wave(args.wave, args.dt)
    model = _read_model(args.model)
    if abs(model.dt - wave.dt) > DT_RTOL * wave.dt:
        raise _Exit(EXIT_COMPAT, f"model dt {model.dt!r} does not match waveform dt {wave.dt!r}")
    start, end = model.metadata.get("train_start"), model.metadata.get("train_end")
    if start is None or end is None:
        raise _Exit(EXIT_USAGE, "model has no training window metadata")
    _, trace, report = detect_with_model(model, wave, start, end, config.policy)
    _write_json(args.out, _document(config, train_start=start, train_end=end, report=report.to_dict()))
    trace_path = args.trace or str(Path(args.out).with_suffix("")) + ".trace.csv"
    try:
        trace.to_csv(trace_path)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write {trace_path}: {exc}") from None
    return EXIT_ALARM if report.alarm else EXIT_OK


def cmd_spectrum(args, config: RunConfig) -> int:
    if (args.model is None) == (args.wave is None):
        raise _Exit(EXIT_USAGE, "give exactly one of --model or --wave")
    if args.lifted and args.wave is None:
        raise _Exit(EXIT_USAGE, "--lifted needs --wave (the lifted map is fitted to data)")
    if args.model is not None:
        raw = _read_model(args.model).raw_operator
    else:
        wave = _read_wave(args.wave, args.dt)
        raw = _fit_window(wave, config, args.train_start, args.train_end)[0].raw_operator
    try:
        confined = confine(raw)
    except NumericError as exc:
        raise _Exit(EXIT_NUMERIC, f"confinement failed: {exc}") from None
    body = {"raw": classify(raw, args.tol).to_dict(), "confined": classify(confined, args.tol).to_dict()}
    if args.lifted:
        training = slice_series(wave, args.train_start, args.train_end)
        matrix = embed(training, config.embedding)
        basis = enumerate_monomials(matrix.n_n, 1, config.fit.lift_degree)
        if not 1 <= args.modes <= len(basis):
            raise _Exit(EXIT_USAGE, f"--modes {args.modes} outside 1..{len(basis)} (lifted basis size)")
        body["lifted"] = lifted_mode_report(matrix, basis, args.modes, args.tol, config.fit.ridge).to_dict()
        body["lifted"]["basis_size"] = len(basis)
    document = _document(config, **body)
    if args.out:
        _write_json(args.out, document)
    print(json.dumps(document, indent=1))
    return EXIT_OK


def cmd_sweep(args, config: RunConfig) -> int:
    wave = _read_wave(args.wave, args.dt)
    ends = parse_ends(args.ends)
    report = sweep_training_window(wave, args.train_start, ends, config.embedding,
                                   config.fit, config.policy, threads=args.threads)
    _write_json(args.out, _document(config, sweep=report.to_dict()))
    table = args.csv or str(Path(args.out).with_suffix("")) + ".csv"
    try:
        report.to_csv(table)
    except OSError as exc:
        raise _Exit(EXIT_USAGE, f"cannot write {table}: {exc}") from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arcddl", description=__doc__.splitlines()[0],
                     epilog="exit codes: 0 ok, 10 alarm, 2 usage/io, 3 fit, 4 compatibility, 5 numeric")
    parser.add_argument("--version", action="version", version=f"arcddl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, wave=True, wave_required=True):
        p.add_argument("--config", help="JSON run configuration")
        if wave:
            p.add_argument("--wave", required=wave_required, help="waveform CSV")
            p.add_argument("--dt", type=float, help="sample interval for files without a time column")

    def window(p):
        p.add_argument("--train-start", type=float, default=0.10)
        p.add_argument("--train-end", type=float, default=0.18)

    p = sub.add_parser("gen", help="write the surrogate waveform")
    common(p, wave=False)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="fit a model on a training window")
    common(p)
    window(p)
    p.add_argument("--out", required=True, help="model JSON")
    p.add_argument("--diagnostics", help="diagnostics JSON (default <out>.diagnostics.json)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("detect", help="predict past the training window and raise alarms")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--trace", help="error trace CSV (default <out>.trace.csv)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("spectrum", help="classify latent (and lifted) eigenvalues")
    common(p, wave_required=False)
    window(p)
    p.add_argument("--model")
    p.add_argument("--lifted", action="store_true")
    p.add_argument("--modes", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-3, help="neutral band half-width")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("sweep", help="sweep the training-window end")
    common(p)
    p.add_argument("--train-start", type=float, default=0.10)
    p.add_argument("--ends", default="0.11:0.19:0.01", help="start:stop:step, inclusive")
    p.add_argument("--threads", type=int)
    p.add_argument("--out", required=True, help="report JSON")
    p.add_argument("--csv", help="table CSV (default <out>.csv)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        try:
            config = load_config(args.config)
        except OSError as exc:
            raise _Exit(EXIT_USAGE, f"cannot read {args.config}: {exc}") from None
        return args.func(args, config)
    except _Exit as exc:
        print(f"arcddl: {exc}", file=sys.stderr)
        return exc.code
    except NumericError as exc:
        print(f"arcddl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ArcDDLError as exc:
        print(f"arcddl: {exc}", file=sys.stderr)
        return EXIT_USAGE
