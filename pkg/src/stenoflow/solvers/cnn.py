"""Convolutional encoder/decoder inference without a deep-learning runtime.

The network is data: an ordered chain of convolution, fully-connected, and
transposed-convolution layers, split into a shared encoder and two decoder
branches (vx and vy).  Inputs are three channels (normalized SDF, band vx,
band vy); each branch ends on one channel at the input resolution.  A
rectifier follows every layer except the final layer of each branch.

Arithmetic is pinned for reproducibility: layer inputs and weights are cast
to float32, products of those float32 values are accumulated in float64 per
output pixel, and the float64 result feeds the next layer.  Identical input
and weights give bit-identical output on one platform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ModelError, NumericError
from ..fields import VelocityField
from .base import SolverInput, SubdomainSolver

__all__ = [
    "ConvSpec",
    "TransposedConvSpec",
    "FcSpec",
    "Layer",
    "CnnModel",
    "cnn_forward",
    "CnnSolver",
    "default_architecture",
    "init_weights",
]


@dataclass(frozen=True)
class ConvSpec:
    in_ch: int
    out_ch: int
    kh: int
    kw: int
    sh: int = 1
    sw: int = 1
    ph: int = 0
    pw: int = 0

    kind = "conv"

    def out_shape(self, shape: tuple[int, int, int]) -> tuple[int, int, int]:
        c, h, w = shape
        if c != self.in_ch:
            raise ModelError(f"conv expects {self.in_ch} channels, got {c}")
        ho = (h + 2 * self.ph - self.kh) // self.sh + 1
        wo = (w + 2 * self.pw - self.kw) // self.sw + 1
        if ho < 1 or wo < 1:
            raise ModelError(f"conv output collapses on input {shape}")
        return (self.out_ch, ho, wo)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_ch, self.in_ch, self.kh, self.kw)


@dataclass(frozen=True)
class TransposedConvSpec:
    in_ch: int
    out_ch: int
    kh: int
    kw: int
    sh: int = 1
    sw: int = 1
    ph: int = 0
    pw: int = 0

    kind = "tconv"

    def out_shape(self, shape: tuple[int, int, int]) -> tuple[int, int, int]:
        c, h, w = shape
        if c != self.in_ch:
            raise ModelError(f"tconv expects {self.in_ch} channels, got {c}")
        ho = (h - 1) * self.sh + self.kh - 2 * self.ph
        wo = (w - 1) * self.sw + self.kw - 2 * self.pw
        if ho < 1 or wo < 1:
            raise ModelError(f"tconv output collapses on input {shape}")
        return (self.out_ch, ho, wo)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_ch, self.in_ch, self.kh, self.kw)


@dataclass(frozen=True)
class FcSpec:
    """Dense layer; ``out_c/out_h/out_w`` declare the spatial reshape of the
    output vector (their product must equal ``out_dim``)."""

    in_dim: int
    out_dim: int
    out_c: int
    out_h: int
    out_w: int

    kind = "fc"

    def __post_init__(self) -> None:
        if self.out_c * self.out_h * self.out_w != self.out_dim:
            raise ModelError(
                f"fc reshape {self.out_c}x{self.out_h}x{self.out_w} "
                f"!= out_dim {self.out_dim}")

    def out_shape(self, shape: tuple[int, int, int]) -> tuple[int, int, int]:
        c, h, w = shape
        if c * h * w != self.in_dim:
            raise ModelError(f"fc expects {self.in_dim} inputs, got {c * h * w}")
        return (self.out_c, self.out_h, self.out_w)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_dim, self.in_dim)


@dataclass
class Layer:
    """One parameterized layer: spec plus float32 weight and bias."""

    spec: object
    weight: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        self.weight = np.ascontiguousarray(self.weight, dtype=np.float32)
        self.bias = np.ascontiguousarray(self.bias, dtype=np.float32)
        if self.weight.shape != self.spec.weight_shape():
            raise ModelError(
                f"weight shape {self.weight.shape} != {self.spec.weight_shape()}")
        out_ch = self.spec.out_dim if self.spec.kind == "fc" else self.spec.out_ch
        if self.bias.shape != (out_ch,):
            raise ModelError(f"bias shape {self.bias.shape} != ({out_ch},)")

    def forward(self, x: np.ndarray) -> np.ndarray:
        s = self.spec
        x32 = x.astype(np.float32)
        if s.kind == "conv":
            return _conv(x32, self.weight, self.bias, s)
        if s.kind == "tconv":
            return _tconv(x32, self.weight, self.bias, s)
        flat = x32.ravel().astype(np.float64)
        out = self.weight.astype(np.float64) @ flat + self.bias.astype(np.float64)
        return out.reshape(s.out_c, s.out_h, s.out_w)


def _conv(x32: np.ndarray, weight: np.ndarray, bias: np.ndarray,
          s: ConvSpec) -> np.ndarray:
    c, h, w = x32.shape
    _, ho, wo = s.out_shape(x32.shape)
    xp = np.zeros((c, h + 2 * s.ph, w + 2 * s.pw), dtype=np.float32)
    xp[:, s.ph:s.ph + h, s.pw:s.pw + w] = x32
    w64 = weight.astype(np.float64)
    out = np.zeros((s.out_ch, ho, wo))
    for ky in range(s.kh):
        for kx in range(s.kw):
            sl = xp[:, ky:ky + ho * s.sh:s.sh, kx:kx + wo * s.sw:s.sw]
            out += np.tensordot(w64[:, :, ky, kx], sl.astype(np.float64),
                                axes=(1, 0))
    return out + bias.astype(np.float64)[:, None, None]


def _tconv(x32: np.ndarray, weight: np.ndarray, bias: np.ndarray,
           s: TransposedConvSpec) -> np.ndarray:
    c, h, w = x32.shape
    _, ho, wo = s.out_shape(x32.shape)
    x64 = x32.astype(np.float64)
    w64 = weight.astype(np.float64)
    buf = np.zeros((s.out_ch, (h - 1) * s.sh + s.kh, (w - 1) * s.sw + s.kw))
    for ky in range(s.kh):
        for kx in range(s.kw):
            contrib = np.tensordot(w64[:, :, ky, kx], x64, axes=(1, 0))
            buf[:, ky:ky + h * s.sh:s.sh, kx:kx + w * s.sw:s.sw] += contrib
    out = buf[:, s.ph:s.ph + ho, s.pw:s.pw + wo]
    return out + bias.astype(np.float64)[:, None, None]


@dataclass
class CnnModel:
    """Shared encoder feeding two decoder branches.

    ``input_shape`` is (3, height, width); both branches must end on
    (1, height, width).  The flat layer order for serialization is encoder,
    then the vx branch, then the vy branch.
    """

    input_shape: tuple[int, int, int]
    encoder: list
    branch_x: list
    branch_y: list

    def __post_init__(self) -> None:
        self.validate()

    def validate(self) -> None:
        if len(self.input_shape) != 3 or self.input_shape[0] != 3:
            raise ModelError(f"input shape must be (3, H, W), got {self.input_shape}")
        if not self.encoder or not self.branch_x or not self.branch_y:
            raise ModelError("encoder and both branches must be non-empty")
        shape = tuple(self.input_shape)
        for layer in self.encoder:
            shape = layer.spec.out_shape(shape)
        target = (1, self.input_shape[1], self.input_shape[2])
        for name, branch in (("vx", self.branch_x), ("vy", self.branch_y)):
            bshape = shape
            for layer in branch:
                bshape = layer.spec.out_shape(bshape)
            if bshape != target:
                raise ModelError(
                    f"{name} branch ends at {bshape}, expected {target}")

    def layers(self) -> list:
        return list(self.encoder) + list(self.branch_x) + list(self.branch_y)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Run the network on a (3, H, W) array; returns (vx, vy) float64."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != tuple(self.input_shape):
            raise ModelError(f"input shape {x.shape} != {self.input_shape}")
        idx = 0
        for layer in self.encoder:
            x = np.maximum(layer.forward(x), 0.0)
            _check_finite(x, idx)
            idx += 1
        outs = []
        for branch in (self.branch_x, self.branch_y):
            z = x
            for k, layer in enumerate(branch):
                z = layer.forward(z)
                if k + 1 < len(branch):
                    z = np.maximum(z, 0.0)
                _check_finite(z, idx)
                idx += 1
            outs.append(z[0])
        return outs[0], outs[1]


def _check_finite(x: np.ndarray, idx: int) -> None:
    if not np.isfinite(x).all():
        raise NumericError(f"non-finite activation after layer {idx}")


def cnn_forward(model: CnnModel, inp: SolverInput) -> VelocityField:
    """Raw network prediction for a solver input (no post-processing).

    The input channels are, in order, the normalized SDF and the two
    boundary-band velocity components.
    """
    grid = inp.sdf.grid
    x = np.stack([inp.sdf.values, inp.v_boundary.vx, inp.v_boundary.vy])
    vx, vy = model.forward(x)
    return VelocityField(grid, vx, vy)


class CnnSolver(SubdomainSolver):
    """Subdomain backend wrapping a :class:`CnnModel`.

    ``constrained`` (default True) enables the exact per-column flow-rate
    correction after masking and band overwrite.
    """

    def __init__(self, model: CnnModel, constrained: bool = True):
        self.model = model
        self.constrained = constrained

    def _predict(self, inp: SolverInput) -> VelocityField:
        if (inp.sdf.grid.height, inp.sdf.grid.width) != self.model.input_shape[1:]:
            raise ModelError(
                f"model expects {self.model.input_shape[1:]}, "
                f"got {inp.sdf.grid.shape}")
        return cnn_forward(self.model, inp)


def default_architecture(height: int = 128, width: int = 256) -> list:
    """Layer spec chain of the documented default network.

    Encoder: three stride-2 convolutions 3 -> 64 -> 128 -> 256, a stride-1
    channel-squeeze convolution, and a dense latent of height*width/32
    units.  Each branch: four transposed convolutions back to one channel at
    the input resolution (the last one linear).
    """
    if height % 32 or width % 32 or height < 32 or width < 32:
        raise ModelError("default architecture needs dimensions divisible by 32")
    latent = height * width // 32
    encoder = [
        ConvSpec(3, 64, 4, 4, 2, 2, 1, 1),
        ConvSpec(64, 128, 4, 4, 2, 2, 1, 1),
        ConvSpec(128, 256, 4, 4, 2, 2, 1, 1),
        ConvSpec(256, 32, 3, 3, 1, 1, 1, 1),
        FcSpec(32 * (height // 8) * (width // 8), latent,
               32, height // 32, width // 32),
    ]
    branch = [
        TransposedConvSpec(32, 128, 8, 8, 4, 4, 2, 2),
        TransposedConvSpec(128, 64, 4, 4, 2, 2, 1, 1),
        TransposedConvSpec(64, 32, 4, 4, 2, 2, 1, 1),
        TransposedConvSpec(32, 1, 4, 4, 2, 2, 1, 1),
    ]
    return [encoder, list(branch), list(branch)]


def init_weights(arch: list, seed, height: int, width: int) -> CnnModel:
    """Random float32 weights for an architecture (fixtures and smoke tests).

    Draws from the counter-based Philox generator; weights use a scaled
    normal (sqrt(2 / fan_in)), biases a small normal.
    """
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.Generator(np.random.Philox(seed))

    def build(spec):
        wshape = spec.weight_shape()
        fan_in = int(np.prod(wshape[1:]))
        weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), wshape)
        nout = spec.out_dim if spec.kind == "fc" else spec.out_ch
        bias = rng.normal(0.0, 0.01, nout)
        return Layer(spec, weight.astype(np.float32), bias.astype(np.float32))

    encoder, bx, by = arch
    return CnnModel((3, height, width),
                    [build(s) for s in encoder],
                    [build(s) for s in bx],
                    [build(s) for s in by])
