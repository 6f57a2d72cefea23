"""Self-describing binary weight files (magic ``USDS``, version 1).

Layout, all integers little-endian:

    magic        4 bytes  b"USDS"
    version      u16      1
    in_c         u32      input channels (3)
    in_h, in_w   u32, u32 input grid rows and columns
    layer_count  u16      total layers (encoder + both branches)
    enc_count    u16      leading layers forming the shared encoder; the
                          remainder splits evenly into the vx branch then
                          the vy branch, in that order
    descriptors  per layer:
      kind       u8       1 = conv, 2 = fc, 3 = transposed conv
      conv/tconv u32 x 8  in_ch, out_ch, kh, kw, sh, sw, ph, pw
      fc         u32 x 5  in_dim, out_dim, out_c, out_h, out_w
    payload      per layer: weight then bias, float32 little-endian,
                          weights row-major [out][in][kh][kw] (fc: [out][in])
    crc          u32      CRC32 of the payload bytes

Decoding validates magic, version, the declared shape chain (both branches
must end at 1 x in_h x in_w), payload length, and the checksum; a truncated
file surfaces as a checksum error and never yields a partial model.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from ..errors import (WeightChecksumError, WeightFormatError, WeightMagicError,
                      WeightShapeError, WeightVersionError)
from .cnn import CnnModel, ConvSpec, FcSpec, Layer, TransposedConvSpec

__all__ = ["save_model", "load_model", "inspect_weights", "MAGIC", "VERSION"]

MAGIC = b"USDS"
VERSION = 1

_KIND_CODES = {"conv": 1, "fc": 2, "tconv": 3}


def _descriptor(spec) -> bytes:
    if spec.kind == "fc":
        return struct.pack("<B5I", _KIND_CODES["fc"], spec.in_dim, spec.out_dim,
                           spec.out_c, spec.out_h, spec.out_w)
    return struct.pack("<B8I", _KIND_CODES[spec.kind], spec.in_ch, spec.out_ch,
                       spec.kh, spec.kw, spec.sh, spec.sw, spec.ph, spec.pw)


def save_model(path: str, model: CnnModel) -> None:
    """Serialize ``model`` (see module docstring for the layout)."""
    layers = model.layers()
    if len(model.branch_x) != len(model.branch_y):
        raise WeightShapeError("branches must hold the same layer count")
    head = [MAGIC, struct.pack("<H", VERSION),
            struct.pack("<3I", *model.input_shape),
            struct.pack("<2H", len(layers), len(model.encoder))]
    head.extend(_descriptor(layer.spec) for layer in layers)
    payload = bytearray()
    for layer in layers:
        payload += np.ascontiguousarray(layer.weight, dtype="<f4").tobytes()
        payload += np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(b"".join(head))
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(bytes(payload))))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.blob):
            raise WeightChecksumError(f"file truncated while reading {what}")
        out = self.blob[self.pos:self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))


def _read_specs(rd: _Reader):
    version, = rd.unpack("<H", "version")
    if version != VERSION:
        raise WeightVersionError(f"unsupported format version {version}")
    in_c, in_h, in_w = rd.unpack("<3I", "input dims")
    layer_count, enc_count = rd.unpack("<2H", "layer counts")
    if enc_count < 1 or enc_count >= layer_count:
        raise WeightShapeError(
            f"encoder count {enc_count} incompatible with {layer_count} layers")
    if (layer_count - enc_count) % 2:
        raise WeightShapeError("branch layers do not split evenly")
    specs = []
    for k in range(layer_count):
        kind, = rd.unpack("<B", f"layer {k} kind")
        if kind == _KIND_CODES["fc"]:
            dims = rd.unpack("<5I", f"layer {k} dims")
            try:
                specs.append(FcSpec(*dims))
            except Exception as exc:
                raise WeightShapeError(f"layer {k}: {exc}") from exc
        elif kind == _KIND_CODES["conv"]:
            specs.append(ConvSpec(*rd.unpack("<8I", f"layer {k} dims")))
        elif kind == _KIND_CODES["tconv"]:
            specs.append(TransposedConvSpec(*rd.unpack("<8I", f"layer {k} dims")))
        else:
            raise WeightFormatError(f"unknown layer kind {kind}")
    return (in_c, in_h, in_w), enc_count, specs


def load_model(path: str) -> CnnModel:
    """Decode a weight file into a ready :class:`CnnModel`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    rd = _Reader(blob)
    if rd.take(4, "magic") != MAGIC:
        raise WeightMagicError(f"{path} is not a weight file (bad magic)")
    input_shape, enc_count, specs = _read_specs(rd)

    payload_len = 0
    for spec in specs:
        nout = spec.out_dim if spec.kind == "fc" else spec.out_ch
        payload_len += 4 * (int(np.prod(spec.weight_shape())) + nout)
    payload = rd.take(payload_len, "payload")
    crc, = rd.unpack("<I", "checksum")
    if zlib.crc32(payload) != crc:
        raise WeightChecksumError(f"{path} fails its payload checksum")

    layers, pos = [], 0
    for spec in specs:
        wshape = spec.weight_shape()
        wn = 4 * int(np.prod(wshape))
        nout = spec.out_dim if spec.kind == "fc" else spec.out_ch
        weight = np.frombuffer(payload, "<f4", int(np.prod(wshape)),
                               offset=pos).reshape(wshape)
        pos += wn
        bias = np.frombuffer(payload, "<f4", nout, offset=pos)
        pos += 4 * nout
        layers.append(Layer(spec, weight.copy(), bias.copy()))

    half = (len(specs) - enc_count) // 2
    try:
        return CnnModel(tuple(input_shape), layers[:enc_count],
                        layers[enc_count:enc_count + half],
                        layers[enc_count + half:])
    except Exception as exc:
        raise WeightShapeError(f"inconsistent layer chain in {path}: {exc}") from exc


def inspect_weights(path: str) -> dict:
    """Header summary and checksum status without building layers.

    Returns a dict with the input shape, the per-layer descriptor strings,
    parameter count, and ``checksum_ok``.  Magic and version failures still
    raise; shape-chain problems are reported, not raised.
    """
    with open(path, "rb") as fh:
        blob = fh.read()
    rd = _Reader(blob)
    if rd.take(4, "magic") != MAGIC:
        raise WeightMagicError(f"{path} is not a weight file (bad magic)")
    input_shape, enc_count, specs = _read_specs(rd)

    params = 0
    rows = []
    for k, spec in enumerate(specs):
        nout = spec.out_dim if spec.kind == "fc" else spec.out_ch
        n = int(np.prod(spec.weight_shape())) + nout
        params += n
        if spec.kind == "fc":
            desc = (f"fc {spec.in_dim} -> {spec.out_dim} "
                    f"(reshape {spec.out_c}x{spec.out_h}x{spec.out_w})")
        else:
            desc = (f"{spec.kind} {spec.in_ch} -> {spec.out_ch} "
                    f"k{spec.kh}x{spec.kw} s{spec.sh}x{spec.sw} "
                    f"p{spec.ph}x{spec.pw}")
        section = ("encoder" if k < enc_count else
                   "branch_x" if k < enc_count + (len(specs) - enc_count) // 2
                   else "branch_y")
        rows.append(f"[{section}] {desc} ({n} params)")

    checksum_ok = True
    chain_ok, chain_msg = True, ""
    try:
        payload = rd.take(4 * params, "payload")
        crc, = rd.unpack("<I", "checksum")
        checksum_ok = zlib.crc32(payload) == crc
    except WeightChecksumError:
        checksum_ok = False
    try:
        shape = tuple(input_shape)
        for spec in specs[:enc_count]:
            shape = spec.out_shape(shape)
        half = (len(specs) - enc_count) // 2
        for branch in (specs[enc_count:enc_count + half],
                       specs[enc_count + half:]):
            bshape = shape
            for spec in branch:
                bshape = spec.out_shape(bshape)
            if bshape != (1, input_shape[1], input_shape[2]):
                chain_ok, chain_msg = False, f"branch ends at {bshape}"
    except Exception as exc:  # descriptor-level inconsistency
        chain_ok, chain_msg = False, str(exc)

    return {
        "input_shape": tuple(input_shape),
        "layer_count": len(specs),
        "encoder_count": enc_count,
        "layers": rows,
        "parameters": params,
        "checksum_ok": checksum_ok,
        "chain_ok": chain_ok,
        "chain_message": chain_msg,
    }
