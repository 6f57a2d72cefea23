"""Binary weight files (magic ``USDS``, version 1).

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

Export is atomic: the file is assembled under a temporary name in the
destination directory and moved into place in one rename, so a crashed
run never leaves a half-written weight file behind.
"""

from __future__ import annotations

import math
import os
import struct
import tempfile
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import TrainerError, WeightChecksumError, WeightFormatError
from .specs import Architecture, ConvSpec, FcSpec, TransposedConvSpec

__all__ = ["MAGIC", "VERSION", "ExportLayer", "LoadedModel",
           "save_weights", "load_weights"]

MAGIC = b"USDS"
VERSION = 1

_KIND_CODES = {"conv": 1, "fc": 2, "tconv": 3}
_KIND_BY_CODE = {1: "conv", 2: "fc", 3: "tconv"}


@dataclass
class ExportLayer:
    """One serializable layer: descriptor plus float32 weight and bias."""

    spec: object
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        self.weight = np.ascontiguousarray(self.weight, dtype=np.float32)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float32)
        if self.weight.shape != self.spec.weight_shape():
            raise WeightFormatError(
                f"weight shape {self.weight.shape} != {self.spec.weight_shape()}")
        if self.bias.shape != (self.spec.out_count(),):
            raise WeightFormatError(
                f"bias shape {self.bias.shape} != ({self.spec.out_count()},)")


@dataclass
class LoadedModel:
    """Decoded weight file: architecture plus one ExportLayer per layer."""

    arch: Architecture
    encoder: list
    branch_x: list
    branch_y: list

    def layers(self) -> list:
        return list(self.encoder) + list(self.branch_x) + list(self.branch_y)


def _descriptor(spec) -> bytes:
    if spec.kind == "fc":
        return struct.pack("<B5I", _KIND_CODES["fc"], spec.in_dim, spec.out_dim,
                           spec.out_c, spec.out_h, spec.out_w)
    return struct.pack("<B8I", _KIND_CODES[spec.kind], spec.in_ch, spec.out_ch,
                       spec.kh, spec.kw, spec.sh, spec.sw, spec.ph, spec.pw)


def save_weights(path: str, arch: Architecture, layers: list) -> None:
    """Serialize ``layers`` (ExportLayer, flat serialization order).

    ``layers`` must follow the flat order of ``arch`` (encoder, vx branch,
    vy branch) and match its descriptors.
    """
    specs = arch.layers()
    if len(layers) != len(specs):
        raise WeightFormatError(
            f"{len(layers)} layers for {len(specs)} descriptors")
    for layer, spec in zip(layers, specs):
        if layer.spec != spec:
            raise WeightFormatError(
                f"layer descriptor {layer.spec} does not match {spec}")
    head = [MAGIC, struct.pack("<H", VERSION),
            struct.pack("<3I", *arch.input_shape),
            struct.pack("<2H", len(specs), len(arch.encoder))]
    head.extend(_descriptor(spec) for spec in specs)
    payload = bytearray()
    for layer in layers:
        payload += np.ascontiguousarray(layer.weight, dtype="<f4").tobytes()
        payload += np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()

    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".usds.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(b"".join(head))
            fh.write(payload)
            fh.write(struct.pack("<I", zlib.crc32(bytes(payload))))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


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


def load_weights(path: str) -> LoadedModel:
    """Decode a weight file, validating header, shape chain, and checksum."""
    with open(path, "rb") as fh:
        blob = fh.read()
    rd = _Reader(blob)
    if rd.take(4, "magic") != MAGIC:
        raise WeightFormatError(f"{path} is not a weight file (bad magic)")
    version, = rd.unpack("<H", "version")
    if version != VERSION:
        raise WeightFormatError(f"unsupported format version {version}")
    input_shape = rd.unpack("<3I", "input dims")
    layer_count, enc_count = rd.unpack("<2H", "layer counts")
    if enc_count < 1 or enc_count >= layer_count:
        raise WeightFormatError(
            f"encoder count {enc_count} incompatible with {layer_count} layers")
    if (layer_count - enc_count) % 2:
        raise WeightFormatError("branch layers do not split evenly")

    specs = []
    for k in range(layer_count):
        kind_code, = rd.unpack("<B", f"layer {k} kind")
        kind = _KIND_BY_CODE.get(kind_code)
        if kind == "fc":
            specs.append(FcSpec(*rd.unpack("<5I", f"layer {k} dims")))
        elif kind == "conv":
            specs.append(ConvSpec(*rd.unpack("<8I", f"layer {k} dims")))
        elif kind == "tconv":
            specs.append(TransposedConvSpec(*rd.unpack("<8I", f"layer {k} dims")))
        else:
            raise WeightFormatError(f"unknown layer kind {kind_code}")

    half = (layer_count - enc_count) // 2
    try:
        arch = Architecture(tuple(input_shape), tuple(specs[:enc_count]),
                            tuple(specs[enc_count:enc_count + half]),
                            tuple(specs[enc_count + half:]))
    except TrainerError as exc:
        raise WeightFormatError(
            f"inconsistent layer chain in {path}: {exc}") from exc

    payload_len = sum(
        4 * (math.prod(s.weight_shape()) + s.out_count()) for s in specs)
    payload = rd.take(payload_len, "payload")
    crc, = rd.unpack("<I", "checksum")
    if zlib.crc32(payload) != crc:
        raise WeightChecksumError(f"{path} fails its payload checksum")

    layers, pos = [], 0
    for spec in specs:
        wshape = spec.weight_shape()
        wn = math.prod(wshape)
        weight = np.frombuffer(payload, "<f4", wn, offset=pos).reshape(wshape)
        pos += 4 * wn
        bias = np.frombuffer(payload, "<f4", spec.out_count(), offset=pos)
        pos += 4 * spec.out_count()
        layers.append(ExportLayer(spec, weight.copy(), bias.copy()))

    return LoadedModel(arch, layers[:enc_count],
                       layers[enc_count:enc_count + half],
                       layers[enc_count + half:])
