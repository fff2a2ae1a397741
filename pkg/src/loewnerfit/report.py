"""Error tables and high-band slope estimates for fitted models."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EvaluationError

ERROR_FLOOR = 1e-13
MIN_SLOPE_PROBES = 5


def evaluate(model, points):
    """``(N, p, m)`` values; NaN where evaluation fails (e.g. at a pole)."""
    points = np.asarray(points, dtype=complex).ravel()
    out = np.empty((points.size, model.p, model.m), dtype=complex)
    for t, s in enumerate(points):
        try:
            out[t] = model(s)
        except EvaluationError:
            out[t] = np.nan
    return out


def relative_errors(H, Hhat):
    """Pointwise ``||H - Hhat||_F / ||H||_F``."""
    H, Hhat = np.asarray(H), np.asarray(Hhat)
    num = np.linalg.norm((H - Hhat).reshape(H.shape[0], -1), axis=1)
    den = np.linalg.norm(H.reshape(H.shape[0], -1), axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(den > 0, num / den, num)


def high_band_slope(omega, err, floor=ERROR_FLOOR):
    """Least-squares slope of ``log10(err)`` vs ``log10(omega)`` over the top decade.

    Errors below ``floor`` are clipped to it: they are rounding noise and
    would otherwise produce a meaningless slope. Returns ``None`` when fewer
    than five finite probes fall in the top decade.
    """
    omega, err = np.abs(np.asarray(omega, float)), np.asarray(err, float)
    if omega.size == 0:
        return None
    top = (omega >= omega.max() / 10) & np.isfinite(err)
    if np.count_nonzero(top) < MIN_SLOPE_PROBES:
        return None
    x = np.log10(omega[top])
    y = np.log10(np.maximum(err[top], floor))
    return float(np.polyfit(x, y, 1)[0])


@dataclass(frozen=True)
class ErrorReport:
    omega: np.ndarray
    errors: np.ndarray
    max: float
    median: float
    slope: float | None
    failed: int
    at_floor: bool = False

    def summary(self):
        return {"max": self.max, "median": self.median, "high_band_slope": self.slope,
                "slope_defined": self.slope is not None, "slope_at_floor": self.at_floor,
                "failed_points": self.failed}


def error_report(H, Hhat, points, floor=ERROR_FLOOR) -> ErrorReport:
    err = relative_errors(H, Hhat)
    finite = np.isfinite(err)
    omega = np.abs(np.asarray(points).imag)
    mx = float(np.max(err[finite])) if finite.any() else float("nan")
    med = float(np.median(err[finite])) if finite.any() else float("nan")
    top = (omega >= omega.max() / 10) & finite if omega.size else finite
    at_floor = bool(top.any() and np.all(err[top] <= floor))
    return ErrorReport(omega, err, mx, med, high_band_slope(omega, err, floor),
                       int(np.count_nonzero(~finite)), at_floor)


def compare(truth, models, points, floor=ERROR_FLOOR):
    """Error reports for each model against ``truth`` on a shared grid.

    ``truth`` is a callable or an ``(N, p, m)`` array of reference values.
    ``models`` maps labels to callables; the result keeps that order.
    """
    points = np.asarray(points, dtype=complex).ravel()
    H = np.asarray(truth) if not callable(truth) else evaluate(truth, points)
    if H.shape[0] != points.size:
        raise ConfigError("truth values do not match the grid")
    out = {}
    for label, model in models.items():
        if (model.p, model.m) != H.shape[1:]:
            raise ConfigError(f"model {label!r} is {model.p}x{model.m}, truth is {H.shape[1]}x{H.shape[2]}")
        out[label] = error_report(H, evaluate(model, points), points, floor)
    return out
