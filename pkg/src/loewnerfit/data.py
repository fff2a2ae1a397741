"""Frequency-response samples, tangential datasets and sample files."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataFormatError, PartitionError


def _frozen(a, dtype=np.complex128, ndim=None):
    a = np.array(a, dtype=dtype)
    if ndim is not None and a.ndim != ndim:
        raise ConfigError(f"expected a {ndim}-d array, got shape {a.shape}")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FrequencySample:
    """One evaluation ``H(point)`` of a p x m transfer function."""

    point: complex
    value: np.ndarray

    def __post_init__(self):
        value = np.array(self.value, dtype=np.complex128)
        if value.ndim == 0:
            value = value.reshape(1, 1)
        if value.ndim != 2:
            raise ConfigError(f"sample value must be a matrix, got shape {value.shape}")
        value.setflags(write=False)
        object.__setattr__(self, "point", complex(self.point))
        object.__setattr__(self, "value", value)

    @property
    def shape(self):
        return self.value.shape

    def conj(self) -> FrequencySample:
        return FrequencySample(self.point.conjugate(), self.value.conj())


def check_samples(samples: Sequence[FrequencySample]):
    """Validate uniform shape and distinct points; return ``(p, m)``."""
    if not samples:
        return None
    shape = samples[0].shape
    seen = {}
    for idx, smp in enumerate(samples):
        if smp.shape != shape:
            raise DataFormatError(
                f"sample {idx}: inconsistent dimensions {smp.shape}, expected {shape}")
        if smp.point in seen:
            raise DataFormatError(
                f"sample {idx}: duplicate sample point {smp.point} (first seen at {seen[smp.point]})")
        seen[smp.point] = idx
    return shape


@dataclass(frozen=True)
class TangentialDataset:
    """Left/right tangential interpolation data.

    ``left_directions`` stacks the left directions as rows (q x p) and
    ``left_responses`` the left responses as rows (q x m).
    ``right_directions`` (m x k) and ``right_responses`` (p x k) hold the
    right data column-wise.
    """

    left_points: np.ndarray
    left_directions: np.ndarray
    left_responses: np.ndarray
    right_points: np.ndarray
    right_directions: np.ndarray
    right_responses: np.ndarray
    raw_left: tuple = field(default=(), compare=False, repr=False)
    raw_right: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        for name, nd in (("left_points", 1), ("left_directions", 2), ("left_responses", 2),
                         ("right_points", 1), ("right_directions", 2), ("right_responses", 2)):
            object.__setattr__(self, name, _frozen(getattr(self, name), ndim=nd))
        q, k = self.q, self.k
        if self.left_directions.shape[0] != q or self.left_responses.shape[0] != q:
            raise ConfigError("left data lengths disagree")
        if self.right_directions.shape[1] != k or self.right_responses.shape[1] != k:
            raise ConfigError("right data lengths disagree")
        if self.left_responses.shape[1] != self.right_directions.shape[0]:
            raise ConfigError("input dimension m disagrees between sides")
        if self.left_directions.shape[1] != self.right_responses.shape[0]:
            raise ConfigError("output dimension p disagrees between sides")
        common = set(self.left_points.tolist()) & set(self.right_points.tolist())
        if common:
            raise PartitionError(f"left and right points intersect: {sorted(common, key=abs)}")
        if q and np.any(np.all(self.left_directions == 0, axis=1)):
            raise ConfigError("zero left tangential direction")
        if k and np.any(np.all(self.right_directions == 0, axis=0)):
            raise ConfigError("zero right tangential direction")

    @property
    def q(self):
        return self.left_points.shape[0]

    @property
    def k(self):
        return self.right_points.shape[0]

    @property
    def p(self):
        return self.left_directions.shape[1]

    @property
    def m(self):
        return self.right_directions.shape[0]

    @property
    def M(self):
        return np.diag(self.left_points)

    @property
    def Lambda(self):
        return np.diag(self.right_points)

    def consistency_error(self):
        """Max deviation of the responses from the retained raw samples."""
        err = 0.0
        for j, smp in enumerate(self.raw_left):
            v = self.left_directions[j] @ smp.value
            err = max(err, float(np.max(np.abs(v - self.left_responses[j]))))
        for i, smp in enumerate(self.raw_right):
            w = smp.value @ self.right_directions[:, i]
            err = max(err, float(np.max(np.abs(w - self.right_responses[:, i]))))
        return err

    def is_conjugate_closed(self, rtol=1e-12):
        """True if every point appears with its conjugate (and conjugate data) on its side."""
        return (_closed(self.left_points, self.left_responses, rtol)
                and _closed(self.right_points, self.right_responses.T, rtol))


def _closed(points, rows, rtol):
    index = {complex(z): t for t, z in enumerate(points)}
    scale = max(1.0, float(np.max(np.abs(rows)))) if rows.size else 1.0
    for t, z in enumerate(points):
        u = index.get(complex(z).conjugate())
        if u is None:
            return False
        if np.max(np.abs(rows[u] - rows[t].conj()), initial=0.0) > rtol * scale:
            return False
    return True


def tangentialize(H_value, direction, side):
    """Project a response matrix along a tangential direction.

    ``side="left"`` returns the row ``l^T H``; ``side="right"`` returns
    the column ``H r``.
    """
    H = np.atleast_2d(np.asarray(H_value, dtype=np.complex128))
    d = np.atleast_1d(np.asarray(direction, dtype=np.complex128))
    if side == "left":
        if d.shape != (H.shape[0],):
            raise ConfigError(f"left direction has length {d.size}, expected p={H.shape[0]}")
        return d @ H
    if side == "right":
        if d.shape != (H.shape[1],):
            raise ConfigError(f"right direction has length {d.size}, expected m={H.shape[1]}")
        return H @ d
    raise ConfigError(f"side must be 'left' or 'right', got {side!r}")


# --------------------------------------------------------------------------
# partitioning
# --------------------------------------------------------------------------

SCHEMES = ("alternating", "half_split", "custom")
DIRECTION_RULES = ("siso_ones", "cyclic_identity", "random", "given")


@dataclass(frozen=True)
class PartitionConfig:
    """How samples are split into left/right data and which directions are used.

    ``alternating`` orders the samples by ``|Im(point)|`` and sends every
    ``stride``-th one to the right side, the others to the left
    (``stride=2``: first, third, ... go left). ``half_split`` sends the
    lower half to the left. ``custom`` uses ``left_indices`` and
    ``right_indices`` verbatim.
    """

    scheme: str = "alternating"
    direction_rule: str | None = None
    conjugate_closure: bool = False
    stride: int = 2
    left_indices: tuple | None = None
    right_indices: tuple | None = None
    left_directions: np.ndarray | None = None
    right_directions: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown partition scheme {self.scheme!r}")
        if self.direction_rule is not None and self.direction_rule not in DIRECTION_RULES:
            raise ConfigError(f"unknown direction rule {self.direction_rule!r}")
        if self.stride < 2:
            raise ConfigError("stride must be at least 2")
        if self.scheme == "custom":
            if self.left_indices is None or self.right_indices is None:
                raise ConfigError("custom scheme needs left_indices and right_indices")
            left, right = set(self.left_indices), set(self.right_indices)
            if left & right:
                raise ConfigError(f"custom index lists overlap: {sorted(left & right)}")
        if self.direction_rule == "random" and self.seed is None:
            raise ConfigError("random directions require an explicit seed")


def _units(samples, closure):
    """Group samples into units that must stay on one side."""
    if not closure:
        return [[s] for s in samples]
    by_point = {s.point: s for s in samples}
    used = set()
    units = []
    for s in samples:
        if s.point in used:
            continue
        used.add(s.point)
        unit = [s]
        c = s.point.conjugate()
        if c != s.point:
            partner = by_point.get(c)
            unit.append(partner if partner is not None else s.conj())
            used.add(c)
        units.append(unit)
    return units


def _split(samples, config):
    n = len(samples)
    if config.scheme == "custom":
        cover = set(config.left_indices) | set(config.right_indices)
        if cover != set(range(n)):
            raise PartitionError("custom index lists must cover every sample exactly once")
        left = [[samples[t]] for t in config.left_indices]
        right = [[samples[t]] for t in config.right_indices]
        if config.conjugate_closure:
            left = _units([s[0] for s in left], True)
            right = _units([s[0] for s in right], True)
        return left, right
    units = _units(samples, config.conjugate_closure)
    units = sorted(units, key=lambda u: abs(u[0].point.imag))
    if config.scheme == "alternating":
        left = [u for t, u in enumerate(units, 1) if t % config.stride]
        right = [u for t, u in enumerate(units, 1) if not t % config.stride]
    else:
        half = (len(units) + 1) // 2
        left, right = units[:half], units[half:]
    return left, right


def _directions(rule, count, dim, side, config, rng):
    if rule == "siso_ones":
        if dim != 1:
            raise ConfigError("siso_ones directions need a SISO dataset")
        return np.ones((count, 1), dtype=complex)
    if rule == "cyclic_identity":
        eye = np.eye(dim, dtype=complex)
        return np.array([eye[t % dim] for t in range(count)]).reshape(count, dim)
    if rule == "random":
        d = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
        return d / np.linalg.norm(d, axis=1, keepdims=True)
    given = config.left_directions if side == "left" else config.right_directions
    if given is None:
        raise PartitionError(f"direction_rule='given' but no {side} directions supplied")
    given = np.asarray(given, dtype=complex)
    if side == "right":
        given = given.T
    if given.shape != (count, dim):
        raise PartitionError(
            f"given {side} directions have shape {given.shape}, expected {(count, dim)}")
    return given


def partition(samples: Sequence[FrequencySample], config: PartitionConfig | None = None):
    """Split samples into a :class:`TangentialDataset`."""
    config = config or PartitionConfig()
    samples = list(samples)
    shape = check_samples(samples)
    if len(samples) < 2:
        raise PartitionError("need at least 2 samples to partition")
    p, m = shape
    rule = config.direction_rule or ("siso_ones" if (p, m) == (1, 1) else "cyclic_identity")
    left_units, right_units = _split(samples, config)
    if not left_units or not right_units:
        raise PartitionError(
            f"fewer than 1 sample per side (left={len(left_units)}, right={len(right_units)})")
    rng = np.random.default_rng(config.seed)

    def expand(units, dim, side):
        base = _directions(rule, len(units), dim, side, config, rng)
        pts, dirs, raw = [], [], []
        for d, unit in zip(base, units):
            pts.append(unit[0].point)
            dirs.append(d)
            raw.append(unit[0])
            for extra in unit[1:]:
                pts.append(extra.point)
                dirs.append(d.conj())
                raw.append(extra)
        return np.array(pts, dtype=complex), np.array(dirs).reshape(len(pts), dim), raw

    mu, Ldir, raw_l = expand(left_units, p, "left")
    lam, Rt, raw_r = expand(right_units, m, "right")
    V = np.array([Ldir[j] @ s.value for j, s in enumerate(raw_l)]).reshape(len(raw_l), m)
    W = np.array([s.value @ Rt[i] for i, s in enumerate(raw_r)]).reshape(len(raw_r), p).T
    return TangentialDataset(mu, Ldir, V, lam, Rt.T, W, tuple(raw_l), tuple(raw_r))


# --------------------------------------------------------------------------
# sample files
# --------------------------------------------------------------------------

def _text(source):
    if isinstance(source, (bytes, bytearray)):
        return source.decode("utf-8")
    if isinstance(source, str):
        return source
    data = source.read()
    return data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data


def load_samples(source, format="json") -> list[FrequencySample]:
    """Parse samples from bytes, text or a file object.

    CSV (SISO) uses the header ``omega,re,im`` and maps a row to
    ``point = i*omega``, ``H = re + i*im``. JSON is
    ``{"p":, "m":, "samples": [{"point": [re, im], "value_re": ..., "value_im": ...}]}``.
    """
    text = _text(source)
    if format == "csv":
        samples = _load_csv(text)
    elif format == "json":
        samples = _load_json(text)
    else:
        raise DataFormatError(f"unknown sample format {format!r}")
    check_samples(samples)
    return samples


def _load_csv(text):
    if not text.strip():
        return []
    reader = csv.reader(io.StringIO(text))
    header = [h.strip().lower() for h in next(reader)]
    if header != ["omega", "re", "im"]:
        raise DataFormatError(f"CSV header must be 'omega,re,im', got {','.join(header)!r}")
    out = []
    for lineno, row in enumerate(reader, 2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DataFormatError(f"line {lineno}: expected 3 columns, got {len(row)}")
        try:
            omega, re, im = (float(c) for c in row)
        except ValueError as exc:
            raise DataFormatError(f"line {lineno}: {exc}") from None
        out.append(FrequencySample(1j * omega, [[complex(re, im)]]))
    return out


def _load_json(text):
    if not text.strip():
        return []
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON: {exc}") from None
    try:
        p, m = int(doc["p"]), int(doc["m"])
        records = doc["samples"]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"sample file missing field: {exc}") from None
    out = []
    for idx, rec in enumerate(records):
        try:
            if "point" in rec:
                re, im = rec["point"]
                point = complex(re, im)
            else:
                point = 1j * float(rec["omega"])
            value = np.array(rec["value_re"], dtype=float) + 1j * np.array(rec["value_im"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"sample {idx}: malformed record ({exc})") from None
        if value.shape != (p, m):
            raise DataFormatError(
                f"sample {idx}: inconsistent dimensions {value.shape}, header says {(p, m)}")
        out.append(FrequencySample(point, value))
    return out


def dump_samples(samples: Iterable[FrequencySample], format="json") -> str:
    """Serialize samples; inverse of :func:`load_samples`."""
    samples = list(samples)
    if format == "csv":
        buf = io.StringIO()
        buf.write("omega,re,im\n")
        for s in samples:
            if s.shape != (1, 1) or s.point.real != 0:
                raise DataFormatError("CSV format holds SISO samples on the imaginary axis only")
            h = s.value[0, 0]
            buf.write(f"{float(s.point.imag)!r},{float(h.real)!r},{float(h.imag)!r}\n")
        return buf.getvalue()
    if format != "json":
        raise DataFormatError(f"unknown sample format {format!r}")
    p, m = samples[0].shape if samples else (1, 1)
    doc = {
        "p": p,
        "m": m,
        "samples": [
            {"point": [s.point.real, s.point.imag],
             "value_re": s.value.real.tolist(),
             "value_im": s.value.imag.tolist()}
            for s in samples
        ],
    }
    return json.dumps(doc)
