"""Signature (de)serialization: a small binary container and a JSON form.

Binary layout: the magic ``BMH1``, a little-endian u32 header length, a
JSON header (sorted keys, utf-8) describing kind/algorithm/m/grid/config,
then a fixed-size payload:

* real signatures: m little-endian float64 values
* b-bit signatures: m values of ceil(b/8) bytes each, little-endian
* icws signatures: m u64 element keys followed by m i64 levels

The JSON form carries real values as float hex strings so round-trips are
exact and the document stays valid JSON even for +inf components.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import IncompleteSignatureError
from .signatures import BbitSignature, IcwsSignature, RealSignature

MAGIC = b"BMH1"

_Writable = Union[str, Path, BinaryIO]


def _header_of(sig) -> dict:
    if isinstance(sig, RealSignature):
        return {
            "kind": "real",
            "algorithm": sig.algorithm,
            "m": sig.m,
            "grid": sig.grid,
            "config": sig.config_tag,
        }
    if isinstance(sig, BbitSignature):
        return {
            "kind": "bbit",
            "algorithm": sig.algorithm,
            "m": sig.m,
            "b": sig.b,
            "grid": sig.grid,
            "config": sig.config_tag,
        }
    if isinstance(sig, IcwsSignature):
        return {
            "kind": "icws",
            "algorithm": sig.algorithm,
            "m": sig.m,
            "grid": None,
            "config": sig.config_tag,
        }
    raise TypeError(f"not a signature: {type(sig).__name__}")


def _pack_bbit(values: np.ndarray, b: int) -> bytes:
    nbytes = (b + 7) // 8
    shifts = (8 * np.arange(nbytes, dtype=np.uint64))[None, :]
    split = (values.astype("<u8")[:, None] >> shifts) & np.uint64(0xFF)
    return split.astype(np.uint8).tobytes()


def _unpack_bbit(payload: bytes, m: int, b: int) -> np.ndarray:
    nbytes = (b + 7) // 8
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(m, nbytes).astype(np.uint64)
    shifts = (8 * np.arange(nbytes, dtype=np.uint64))[None, :]
    return np.bitwise_or.reduce(raw << shifts, axis=1)


def signature_to_bytes(sig) -> bytes:
    header = json.dumps(_header_of(sig), sort_keys=True, separators=(",", ":")).encode()
    if isinstance(sig, RealSignature):
        payload = sig.values.astype("<f8").tobytes()
    elif isinstance(sig, BbitSignature):
        payload = _pack_bbit(sig.values, sig.b)
    else:
        payload = sig.keys.astype("<u8").tobytes() + sig.levels.astype("<i8").tobytes()
    return MAGIC + struct.pack("<I", len(header)) + header + payload


def signature_from_bytes(data: bytes):
    if len(data) < 8 or data[:4] != MAGIC:
        raise IncompleteSignatureError("not a signature: bad magic")
    (hlen,) = struct.unpack_from("<I", data, 4)
    if len(data) < 8 + hlen:
        raise IncompleteSignatureError("truncated signature header")
    try:
        header = json.loads(data[8 : 8 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IncompleteSignatureError(f"unreadable signature header: {exc}") from exc
    payload = data[8 + hlen :]
    return _from_parts(header, payload)


def _require_fields(header: dict, *names: str) -> None:
    for name in names:
        if name not in header:
            raise IncompleteSignatureError(f"signature header lacks {name!r}")


def _from_parts(header: dict, payload: bytes):
    if not isinstance(header, dict):
        raise IncompleteSignatureError("signature header is not an object")
    _require_fields(header, "kind", "algorithm", "m", "config")
    kind = header["kind"]
    m = int(header["m"])
    if m < 1:
        raise IncompleteSignatureError(f"bad signature size {m}")
    if kind == "real":
        if len(payload) != 8 * m:
            raise IncompleteSignatureError(
                f"real payload is {len(payload)} bytes, expected {8 * m}"
            )
        values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
        return RealSignature(
            values=values,
            grid=header.get("grid"),
            config_tag=header["config"],
            algorithm=header["algorithm"],
        )
    if kind == "bbit":
        _require_fields(header, "b")
        b = int(header["b"])
        if not 1 <= b <= 64:
            raise IncompleteSignatureError(f"bad bit width {b}")
        nbytes = (b + 7) // 8
        if len(payload) != nbytes * m:
            raise IncompleteSignatureError(
                f"bbit payload is {len(payload)} bytes, expected {nbytes * m}"
            )
        return BbitSignature(
            values=_unpack_bbit(payload, m, b),
            b=b,
            grid=header.get("grid"),
            config_tag=header["config"],
            algorithm=header["algorithm"],
        )
    if kind == "icws":
        if len(payload) != 16 * m:
            raise IncompleteSignatureError(
                f"icws payload is {len(payload)} bytes, expected {16 * m}"
            )
        keys = np.frombuffer(payload[: 8 * m], dtype="<u8").astype(np.uint64)
        levels = np.frombuffer(payload[8 * m :], dtype="<i8").astype(np.int64)
        return IcwsSignature(keys=keys, levels=levels, config_tag=header["config"])
    raise IncompleteSignatureError(f"unknown signature kind {kind!r}")


def dump_signature(sig, dest: _Writable) -> None:
    data = signature_to_bytes(sig)
    if hasattr(dest, "write"):
        dest.write(data)
    else:
        Path(dest).write_bytes(data)


def load_signature(src: _Writable):
    if hasattr(src, "read"):
        data = src.read()
    else:
        data = Path(src).read_bytes()
    return signature_from_bytes(data)


def signature_to_json(sig) -> dict:
    doc = _header_of(sig)
    if isinstance(sig, RealSignature):
        doc["values"] = [float(v).hex() for v in sig.values]
    elif isinstance(sig, BbitSignature):
        doc["values"] = [int(v) for v in sig.values]
    else:
        doc["keys"] = [int(k) for k in sig.keys]
        doc["levels"] = [int(t) for t in sig.levels]
    return doc


def signature_from_json(doc: dict):
    if not isinstance(doc, dict):
        raise IncompleteSignatureError("signature document is not an object")
    _require_fields(doc, "kind", "algorithm", "m", "config")
    kind = doc.get("kind")
    m = int(doc["m"])
    if kind == "real":
        _require_fields(doc, "values")
        if len(doc["values"]) != m:
            raise IncompleteSignatureError("value count does not match m")
        values = np.array([float.fromhex(v) for v in doc["values"]], dtype=np.float64)
        return RealSignature(
            values=values,
            grid=doc.get("grid"),
            config_tag=doc["config"],
            algorithm=doc["algorithm"],
        )
    if kind == "bbit":
        _require_fields(doc, "b", "values")
        if len(doc["values"]) != m:
            raise IncompleteSignatureError("value count does not match m")
        return BbitSignature(
            values=np.array(doc["values"], dtype=np.uint64),
            b=int(doc["b"]),
            grid=doc.get("grid"),
            config_tag=doc["config"],
            algorithm=doc["algorithm"],
        )
    if kind == "icws":
        _require_fields(doc, "keys", "levels")
        if len(doc["keys"]) != m or len(doc["levels"]) != m:
            raise IncompleteSignatureError("key/level count does not match m")
        return IcwsSignature(
            keys=np.array(doc["keys"], dtype=np.uint64),
            levels=np.array(doc["levels"], dtype=np.int64),
            config_tag=doc["config"],
        )
    raise IncompleteSignatureError(f"unknown signature kind {kind!r}")
