"""Command-line front end: ``fit``, ``eval``, ``compare``, ``bench list|emit``.

Exit codes: 0 success, 1 input/output, 2 numerical failure, 3 configuration.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .data import PartitionConfig, dump_samples, load_samples, partition
from .errors import ConfigError, DataFormatError, LoewnerFitError, NumericalError
from .loewner import build_quadruple, reduce
from .polyaa import coefficients, fit_poly_aa
from .polyfit import fit_poly_loewner
from .report import compare as compare_models, evaluate
from .serialize import ChannelModel, model_from_json, model_to_json
from .synthetic import BENCHMARKS, get_benchmark, parse_grid, sample_system, truth_document

EXIT_IO, EXIT_NUMERICAL, EXIT_CONFIG = 1, 2, 3


def write_atomic(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt_of(path):
    return "csv" if str(path).lower().endswith(".csv") else "json"


def read_samples(path):
    with open(path, "rb") as fh:
        return load_samples(fh, _fmt_of(path))


def _window(spec):
    try:
        a, b, n = spec.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise ConfigError(f"window must look like a:b:N, got {spec!r}") from None


def _partition_config(args, default_stride=2):
    stride = args.stride if args.stride is not None else default_stride
    return PartitionConfig(scheme=args.partition, direction_rule=args.directions,
                           conjugate_closure=args.conjugate_closure, stride=stride,
                           seed=args.seed if args.directions == "random" else None)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dump(doc):
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def cmd_fit(args):
    out = Path(args.out_dir)
    samples = read_samples(args.input)
    method = args.method
    manifest = {"command": "fit", "method": method, "input": str(args.input),
                "seed": args.seed, "version": __version__}
    diagnostics = {}
    band = samples
    if method == "loewner":
        tol = 1e-10 if args.tol is None else args.tol
        cfg = _partition_config(args)
        model, rep = reduce(build_quadruple(partition(samples, cfg)), tol=tol)
        write_atomic(out / "singular_values.csv", rep.to_csv())
        diagnostics.update(rank=rep.rank, tol=tol)
    elif method == "poly_loewner":
        tol = 1e-10 if args.tol is None else args.tol
        cfg = _partition_config(args)
        lo, hi = _split_bands(samples, args)
        band = lo + hi
        model, rep, coeffs = fit_poly_loewner(lo, hi, cfg, tol=tol)
        if rep is not None:
            write_atomic(out / "singular_values.csv", rep.to_csv())
        diagnostics.update(rank=0 if rep is None else rep.rank, tol=tol,
                           n_low=len(lo), n_high=len(hi), P0=coeffs.P0, P1=coeffs.P1,
                           P1_imag_dropped=coeffs.imag_residual)
    elif method == "poly_aa":
        tol = 1e-13 if args.tol is None else args.tol
        cfg = _partition_config(args, default_stride=5)
        fits = fit_poly_aa(samples, cfg, tol=tol)
        model = ChannelModel([[f.model for f in row] for row in fits])
        chans = []
        for a, row in enumerate(fits):
            for c, f in enumerate(row):
                chans.append({"channel": [a, c], "sigma_min": f.null.sigma_min,
                              "sigma_max": f.null.sigma_max, "sigma_ratio": f.null.ratio,
                              "nullity": f.null.nullity, "max_left_residual": f.residual,
                              "unstable_poles": f.unstable_poles,
                              "P0": None if f.coeffs is None else f.coeffs.P0[0, 0],
                              "P1": None if f.coeffs is None else f.coeffs.P1[0, 0]})
        diagnostics.update(tol=tol, channels=chans,
                           null_vector="right singular vector of the smallest singular value")
        try:
            pc = coefficients(fits)
            diagnostics.update(P0=pc.P0, P1=pc.P1)
        except AttributeError:
            pass
    else:  # argparse restricts choices
        raise ConfigError(f"unknown method {method!r}")
    if args.grid:
        write_atomic(out / "response.csv", _response_csv(model, _probe_grid(args, samples)))
    omega = [abs(s.point.imag) for s in band if s.point.imag != 0]
    if omega:
        manifest["band"] = [min(omega), max(omega)]
    manifest["config"] = {k: v for k, v in vars(args).items() if k != "func"}
    manifest["timestamp"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    write_atomic(out / "model.json", model_to_json(model) + "\n")
    write_atomic(out / "diagnostics.json", _dump(diagnostics))
    write_atomic(out / "manifest.json", _dump(manifest))
    print(f"wrote {out / 'model.json'}")
    return 0


def _split_bands(samples, args):
    if args.hi_in:
        return samples, read_samples(args.hi_in)
    a, b, n = _window(args.hi_window)
    w = np.array([abs(s.point.imag) for s in samples])
    inside = (w >= a * (1 - 1e-12)) & (w <= b * (1 + 1e-12))
    hi = [s for s, f in zip(samples, inside) if f]
    lo = [s for s, f in zip(samples, inside) if not f]
    if len(hi) < 2 * max(samples[0].shape) and len(hi) < 4:
        raise ConfigError(f"only {len(hi)} samples in the high-frequency window {a:g}:{b:g}")
    if n and len(hi) != n:
        print(f"note: {len(hi)} samples in window, {n} requested", file=sys.stderr)
    return lo, hi


def _probe_grid(args, samples):
    pts = _grid(args)
    if not args.allow_overlap:
        data = {s.point for s in samples}
        hit = [s for s in pts if complex(s) in data]
        if hit:
            raise ConfigError(f"probe grid contains {len(hit)} interpolation points "
                              f"(first {hit[0]}); pass --allow-overlap to permit this")
    return pts


def _grid(args):
    if not args.grid:
        raise ConfigError("--grid a:b:N is required")
    return np.concatenate([parse_grid(g) for g in args.grid])


def cmd_eval(args):
    with open(args.model) as fh:
        model = model_from_json(fh.read())
    pts = _grid(args)
    H = evaluate(model, pts)
    if args.format == "json":
        rows = []
        for s, h in zip(pts, H):
            ok = bool(np.all(np.isfinite(h)))
            rows.append({"omega": s.imag, "ok": ok,
                         "re": h.real.tolist() if ok else None, "im": h.imag.tolist() if ok else None})
        text = _dump({"p": model.p, "m": model.m, "points": rows})
    else:
        text = _response_csv(model, pts, H)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _response_csv(model, pts, H=None):
    """Plot-ready CSV: omega, then abs/re/im per channel, then an error flag."""
    H = evaluate(model, pts) if H is None else H
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    chans = [(a, c) for a in range(model.p) for c in range(model.m)]
    siso = len(chans) == 1
    head = ["omega"]
    for a, c in chans:
        suf = "" if siso else f"_{a + 1}{c + 1}"
        head += [f"abs{suf}", f"re{suf}", f"im{suf}"]
    wr.writerow(head + ["error"])
    for s, h in zip(pts, H):
        ok = bool(np.all(np.isfinite(h)))
        row = [repr(float(s.imag))]
        for a, c in chans:
            z = h[a, c]
            row += [repr(float(abs(z))), repr(float(z.real)), repr(float(z.imag))] if ok else ["", "", ""]
        wr.writerow(row + [0 if ok else 1])
    return buf.getvalue()


class _Tabulated:
    """Truth given as samples: only evaluable at its own points."""

    def __init__(self, samples):
        self.table = {s.point: s.value for s in samples}
        self.p, self.m = samples[0].shape

    def __call__(self, s):
        return self.table[complex(s)]


def _is_sample_file(spec):
    if spec.startswith("bench:"):
        return False
    if spec.lower().endswith(".csv"):
        return True
    try:
        doc = json.loads(Path(spec).read_text())
    except (OSError, ValueError):
        return False
    return isinstance(doc, dict) and "samples" in doc


def _truth(spec, args, pts=None):
    grid = (lambda: pts) if pts is not None else (lambda: _grid(args))
    if spec.startswith("bench:"):
        return get_benchmark(spec[6:]), grid()
    text = Path(spec).read_text()
    try:
        doc = json.loads(text) if not spec.lower().endswith(".csv") else None
    except json.JSONDecodeError:
        doc = None
    if isinstance(doc, dict) and "samples" in doc or spec.lower().endswith(".csv"):
        samples = load_samples(text, _fmt_of(spec))
        pts = np.array([s.point for s in samples])
        return _Tabulated(samples), pts
    return model_from_json(text), grid()


DEFAULT_COMPARE_POINTS = 200


def _fitted_band_grid(model_paths):
    """200 log-spaced points over the union of the bands recorded by ``fit``.

    Each model's band is read from ``manifest.json`` next to the model file.
    """
    lo, hi = np.inf, 0.0
    for path in model_paths:
        man = Path(path).with_name("manifest.json")
        try:
            band = json.loads(man.read_text())["band"]
        except (OSError, ValueError, KeyError, TypeError):
            continue
        lo, hi = min(lo, float(band[0])), max(hi, float(band[1]))
    if not 0 < lo < hi:
        raise ConfigError("--grid a:b:N is required (no fitted band found in the model manifests)")
    return 1j * np.logspace(np.log10(lo), np.log10(hi), DEFAULT_COMPARE_POINTS)


def cmd_compare(args):
    default = None
    if not args.grid and not _is_sample_file(args.truth):
        default = _fitted_band_grid(args.model)
    truth, pts = _truth(args.truth, args, default)
    labels = args.label or []
    if labels and len(labels) != len(args.model):
        raise ConfigError("give one --label per --model or none")
    models = {}
    for t, path in enumerate(args.model):
        with open(path) as fh:
            label = labels[t] if labels else Path(path).stem if Path(path).stem != "model" else Path(path).parent.name
            if label in models:
                label = f"{label}_{t}"
            models[label] = model_from_json(fh.read())
    reports = compare_models(truth, models, pts)
    out = Path(args.out_dir)
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["omega"] + [f"err_{k}" for k in reports])
    omega = np.abs(pts.imag)
    for t in range(pts.size):
        wr.writerow([repr(float(omega[t]))] + [repr(float(r.errors[t])) for r in reports.values()])
    write_atomic(out / "errors.csv", buf.getvalue())
    summary = {k: r.summary() for k, r in reports.items()}
    write_atomic(out / "summary.json", _dump(summary))
    for k, r in reports.items():
        sl = "undefined" if r.slope is None else f"{r.slope:+.3f}"
        print(f"{k}: max={r.max:.3e} median={r.median:.3e} slope={sl}")
    return 0


def cmd_bench(args):
    if args.bench_cmd == "list":
        for name, opts in BENCHMARKS.items():
            print(f"{name:12s} {opts['help']}")
        return 0
    sysm = get_benchmark(args.name)
    pts = _grid(args)
    samples = sample_system(sysm, pts)
    fmt = args.format or _fmt_of(args.out)
    write_atomic(args.out, dump_samples(samples, fmt) + ("" if fmt == "csv" else "\n"))
    truth_path = args.truth_out or Path(args.out).with_name("truth.json")
    write_atomic(truth_path, _dump(truth_document(sysm, args.name)))
    print(f"wrote {args.out} and {truth_path}")
    return 0


class _Parser(argparse.ArgumentParser):
    """Usage errors are configuration errors (exit 3), not numerical ones."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="relative truncation tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out-dir", default=".")
    common.add_argument("--format", choices=("csv", "json"), default=None)

    part = argparse.ArgumentParser(add_help=False)
    part.add_argument("--partition", choices=("alternating", "half_split"), default="alternating")
    part.add_argument("--stride", type=int, default=None)
    part.add_argument("--conjugate-closure", action="store_true")
    part.add_argument("--directions", choices=("siso_ones", "cyclic_identity", "random"), default=None)

    ap = _Parser(prog="loewnerfit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)

    f = sub.add_parser("fit", parents=[common, part], help="fit a model to samples")
    f.add_argument("--method", choices=("loewner", "poly_loewner", "poly_aa"), required=True)
    f.add_argument("--in", dest="input", required=True)
    f.add_argument("--hi-in", default=None, help="separate high-frequency sample file")
    f.add_argument("--hi-window", default="1e7:1e9:10", help="a:b:N band of high-frequency samples")
    f.add_argument("--grid", action="append", help="probe grid a:b:N; writes response.csv")
    f.add_argument("--allow-overlap", action="store_true",
                   help="allow probe points that coincide with interpolation data")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", parents=[common], help="evaluate a model on a grid")
    e.add_argument("--model", required=True)
    e.add_argument("--grid", action="append", required=True)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("compare", parents=[common], help="error tables against a truth")
    c.add_argument("--truth", required=True, help="sample file, model file or bench:<name>")
    c.add_argument("--model", action="append", required=True)
    c.add_argument("--label", action="append")
    c.add_argument("--grid", action="append",
                   help="probe grid a:b:N; default is 200 log-spaced points over the fitted bands")
    c.set_defaults(func=cmd_compare)

    b = sub.add_parser("bench", help="synthetic benchmark systems")
    bsub = b.add_subparsers(dest="bench_cmd", required=True)
    bsub.add_parser("list", parents=[common])
    be = bsub.add_parser("emit", parents=[common])
    be.add_argument("--name", required=True)
    be.add_argument("--grid", action="append", required=True)
    be.add_argument("--out", required=True)
    be.add_argument("--truth-out", default=None)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.cmd == "fit" and args.format is None:
        args.format = "json"
    if args.cmd == "eval" and args.format is None:
        args.format = "csv"
    try:
        return args.func(args)
    except (OSError, DataFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except LoewnerFitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
