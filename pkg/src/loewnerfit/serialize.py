"""Model files (JSON) for descriptor realizations and barycentric fits."""
from __future__ import annotations

import json

import numpy as np

from .errors import DataFormatError
from .loewner import DescriptorRealization
from .polyaa import BarycentricModel, eval_barycentric, to_realization, fits_to_realization

FORMAT_TAG = "loewnerfit-model/1"


def _mat_out(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def _mat_in(doc, shape, name):
    try:
        arr = np.array(doc, dtype=float)
        if arr.size == 0:
            return np.zeros(shape, dtype=complex)
        M = arr[..., 0] + 1j * arr[..., 1]
    except (TypeError, ValueError, IndexError) as exc:
        raise DataFormatError(f"matrix {name}: {exc}") from None
    if M.shape != shape:
        raise DataFormatError(f"matrix {name} has shape {M.shape}, expected {shape}")
    return M


class ChannelModel:
    """p x m grid of SISO barycentric models evaluated entrywise."""

    def __init__(self, channels):
        self.channels = [list(row) for row in channels]
        self.p, self.m = len(self.channels), len(self.channels[0])

    def __call__(self, s):
        return np.array([[eval_barycentric(c, s) for c in row] for row in self.channels])

    def to_realization(self):
        if (self.p, self.m) == (1, 1):
            return to_realization(self.channels[0][0])
        return fits_to_realization([[_Wrap(c) for c in row] for row in self.channels])


class _Wrap:
    def __init__(self, model):
        self.model = model


def realization_to_dict(real: DescriptorRealization):
    doc = {"format": FORMAT_TAG, "kind": "descriptor", "order": real.order,
           "p": real.p, "m": real.m,
           "E": _mat_out(real.E), "A": _mat_out(real.A),
           "B": _mat_out(real.B), "C": _mat_out(real.C)}
    if real.poly is not None:
        doc["poly"] = {"P0": _mat_out(real.poly[0]), "P1": _mat_out(real.poly[1])}
    return doc


def realization_from_dict(doc):
    try:
        r, p, m = int(doc["order"]), int(doc["p"]), int(doc["m"])
        E = _mat_in(doc["E"], (r, r), "E")
        A = _mat_in(doc["A"], (r, r), "A")
        B = _mat_in(doc["B"], (r, m), "B")
        C = _mat_in(doc["C"], (p, r), "C")
    except KeyError as exc:
        raise DataFormatError(f"model file missing field {exc}") from None
    poly = None
    if "poly" in doc:
        poly = (_mat_in(doc["poly"]["P0"], (p, m), "P0"), _mat_in(doc["poly"]["P1"], (p, m), "P1"))
    return DescriptorRealization(E, A, B, C, poly)


def barycentric_to_dict(channels):
    if isinstance(channels, BarycentricModel):
        doc = channels.to_dict()
        doc["kind"] = "barycentric"
        return doc
    rows = [[c.to_dict() for c in row] for row in channels]
    return {"format": FORMAT_TAG, "kind": "barycentric", "p": len(rows), "m": len(rows[0]),
            "channels": rows}


def model_to_json(model) -> str:
    if isinstance(model, DescriptorRealization):
        return json.dumps(realization_to_dict(model))
    if isinstance(model, ChannelModel):
        if (model.p, model.m) == (1, 1):
            return json.dumps(barycentric_to_dict(model.channels[0][0]))
        return json.dumps(barycentric_to_dict(model.channels))
    return json.dumps(barycentric_to_dict(model))


def model_from_json(text):
    """Load a model file; barycentric files come back as :class:`ChannelModel`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid model JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise DataFormatError("model file must hold a JSON object")
    kind = doc.get("kind")
    if kind == "descriptor" or (kind is None and "E" in doc):
        return realization_from_dict(doc)
    if "channels" in doc:
        return ChannelModel([[BarycentricModel.from_dict(c) for c in row] for row in doc["channels"]])
    if "nodes" in doc:
        return ChannelModel([[BarycentricModel.from_dict(doc)]])
    raise DataFormatError("unrecognized model file")
