"""``GMIV1`` model files.

Layout (all integers and floats little-endian)::

    b"GMIV1"                      magic
    u32  section count
    per section:
        4-byte ASCII tag
        u64  payload length in bytes
        payload

Sections: ``META`` (UTF-8 JSON: mode, kind, n, p, degree, chart kind, ...),
``CHRT`` (chart arrays), ``HESS`` (H), ``COEF`` (A), ``NODE`` (nodes and the
node map ``[center, halfwidth, start]``). Array payloads are a sequence of
arrays, each ``u8 dtype code ('f' = f64, 'i' = i64)``, ``u8 ndim``, ``u64``
dims, then the raw data in C order.
"""
from __future__ import annotations

import io
import json
import struct

import numpy as np

from ..interpolant import GrassmannInterpolant
from ..manifold import MvChart
from ..polybasis import ArnoldiModel, NodeMap

MAGIC = b"GMIV1"
FORMAT_VERSION = 1

__all__ = ["MAGIC", "save_model", "load_model", "dumps_model", "loads_model"]


def _pack_arrays(*arrays) -> bytes:
    buf = io.BytesIO()
    for a in arrays:
        a = np.asarray(a)
        if a.dtype.kind == "f":
            code, data = b"f", np.ascontiguousarray(a, dtype="<f8")
        elif a.dtype.kind in "iu":
            code, data = b"i", np.ascontiguousarray(a, dtype="<i8")
        else:
            raise TypeError(f"unsupported dtype {a.dtype}")
        buf.write(code + struct.pack("<B", a.ndim))
        buf.write(struct.pack(f"<{a.ndim}Q", *a.shape))
        buf.write(data.tobytes())
    return buf.getvalue()


def _unpack_arrays(payload: bytes) -> list:
    out, pos = [], 0
    while pos < len(payload):
        code = payload[pos : pos + 1]
        (ndim,) = struct.unpack_from("<B", payload, pos + 1)
        pos += 2
        shape = struct.unpack_from(f"<{ndim}Q", payload, pos)
        pos += 8 * ndim
        dtype = {b"f": "<f8", b"i": "<i8"}[code]
        count = int(np.prod(shape)) if ndim else 1
        a = np.frombuffer(payload, dtype=dtype, count=count, offset=pos).reshape(shape)
        pos += 8 * count
        out.append(a.astype(np.float64 if code == b"f" else np.int64))
    return out


def dumps_model(interp: GrassmannInterpolant) -> bytes:
    chart, model = interp.chart, interp.model
    meta = {
        "format": FORMAT_VERSION,
        "mode": interp.mode,
        "kind": model.kind,
        "n": interp.n,
        "p": interp.p,
        "degree": model.degree,
        "chart": chart.kind,
        "ref_index": chart.ref_index,
        "ill_conditioned": model.ill_conditioned,
    }
    if chart.kind == "householder":
        chrt = _pack_arrays(chart.reflectors, chart.betas)
    elif chart.kind == "permutation":
        chrt = _pack_arrays(chart.perm)
    else:
        chrt = b""
    nm = model.node_map
    sections = [
        (b"META", json.dumps(meta, sort_keys=True).encode()),
        (b"CHRT", chrt),
        (b"HESS", _pack_arrays(model.H)),
        (b"COEF", _pack_arrays(model.A)),
        (b"NODE", _pack_arrays(model.nodes, np.array([nm.center, nm.halfwidth, model.start]))),
    ]
    buf = io.BytesIO()
    buf.write(MAGIC + struct.pack("<I", len(sections)))
    for tag, payload in sections:
        buf.write(tag + struct.pack("<Q", len(payload)) + payload)
    return buf.getvalue()


def loads_model(data: bytes) -> GrassmannInterpolant:
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError("not a GMIV1 model file")
    pos = len(MAGIC)
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    sec = {}
    for _ in range(count):
        tag = data[pos : pos + 4].decode("ascii")
        (length,) = struct.unpack_from("<Q", data, pos + 4)
        pos += 12
        sec[tag] = data[pos : pos + length]
        pos += length
    meta = json.loads(sec["META"].decode())
    n, p = meta["n"], meta["p"]
    if meta["chart"] == "householder":
        V, betas = _unpack_arrays(sec["CHRT"])
        chart = MvChart(n=n, p=p, kind="householder", ref_index=meta["ref_index"], reflectors=V, betas=betas)
    elif meta["chart"] == "permutation":
        (perm,) = _unpack_arrays(sec["CHRT"])
        chart = MvChart(n=n, p=p, kind="permutation", perm=perm)
    else:
        chart = MvChart(n=n, p=p, kind="identity")
    (H,) = _unpack_arrays(sec["HESS"])
    (A,) = _unpack_arrays(sec["COEF"])
    nodes, extra = _unpack_arrays(sec["NODE"])
    model = ArnoldiModel(
        H=H, Q=np.empty((0, H.shape[0])), A=A, kind=meta["kind"], nodes=nodes, degree=meta["degree"],
        node_map=NodeMap(float(extra[0]), float(extra[1])), start=float(extra[2]),
        ill_conditioned=bool(meta.get("ill_conditioned", False)),
    )
    return GrassmannInterpolant(chart=chart, model=model, mode=meta["mode"], n=n, p=p, nodes=nodes)


def save_model(interp: GrassmannInterpolant, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_model(interp))


def load_model(path) -> GrassmannInterpolant:
    with open(path, "rb") as fh:
        return loads_model(fh.read())
