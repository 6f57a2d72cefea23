"""Layer descriptors and architecture presets.

A network is described as data: an ordered chain of convolution,
fully-connected, and transposed-convolution descriptors, split into a
shared encoder and two decoder branches (one per velocity component).
The descriptors carry exactly the fields the binary weight-file header
stores, so a described network and a serialized one are the same thing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, WeightFormatError

__all__ = [
    "ConvSpec",
    "TransposedConvSpec",
    "FcSpec",
    "Architecture",
    "chain_shapes",
    "parameter_count",
    "default_architecture",
    "tiny_architecture",
    "PRESETS",
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
            raise WeightFormatError(f"conv expects {self.in_ch} channels, got {c}")
        ho = (h + 2 * self.ph - self.kh) // self.sh + 1
        wo = (w + 2 * self.pw - self.kw) // self.sw + 1
        if ho < 1 or wo < 1:
            raise WeightFormatError(f"conv output collapses on input {shape}")
        return (self.out_ch, ho, wo)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_ch, self.in_ch, self.kh, self.kw)

    def out_count(self) -> int:
        return self.out_ch


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
            raise WeightFormatError(f"tconv expects {self.in_ch} channels, got {c}")
        ho = (h - 1) * self.sh + self.kh - 2 * self.ph
        wo = (w - 1) * self.sw + self.kw - 2 * self.pw
        if ho < 1 or wo < 1:
            raise WeightFormatError(f"tconv output collapses on input {shape}")
        return (self.out_ch, ho, wo)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_ch, self.in_ch, self.kh, self.kw)

    def out_count(self) -> int:
        return self.out_ch


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
            raise WeightFormatError(
                f"fc reshape {self.out_c}x{self.out_h}x{self.out_w} "
                f"!= out_dim {self.out_dim}")

    def out_shape(self, shape: tuple[int, int, int]) -> tuple[int, int, int]:
        c, h, w = shape
        if c * h * w != self.in_dim:
            raise WeightFormatError(
                f"fc expects {self.in_dim} inputs, got {c * h * w}")
        return (self.out_c, self.out_h, self.out_w)

    def weight_shape(self) -> tuple[int, ...]:
        return (self.out_dim, self.in_dim)

    def out_count(self) -> int:
        return self.out_dim


@dataclass(frozen=True)
class Architecture:
    """Spec chain with its input resolution.

    The flat layer order (encoder, then the vx branch, then the vy branch)
    is the serialization order of the weight file.
    """

    input_shape: tuple[int, int, int]
    encoder: tuple
    branch_x: tuple
    branch_y: tuple

    def __post_init__(self) -> None:
        if len(self.input_shape) != 3 or self.input_shape[0] != 3:
            raise ConfigError(
                f"input shape must be (3, H, W), got {self.input_shape}")
        if not self.encoder or not self.branch_x or not self.branch_y:
            raise ConfigError("encoder and both branches must be non-empty")
        if len(self.branch_x) != len(self.branch_y):
            raise ConfigError("branches must hold the same layer count")
        target = (1, self.input_shape[1], self.input_shape[2])
        shared = chain_shapes(self.input_shape, self.encoder)[-1]
        for name, branch in (("vx", self.branch_x), ("vy", self.branch_y)):
            end = chain_shapes(shared, branch)[-1]
            if end != target:
                raise ConfigError(f"{name} branch ends at {end}, expected {target}")

    def layers(self) -> tuple:
        return tuple(self.encoder) + tuple(self.branch_x) + tuple(self.branch_y)


def chain_shapes(shape: tuple[int, int, int], specs) -> list[tuple[int, int, int]]:
    """Shapes after each layer of ``specs``, starting from ``shape``."""
    out = [tuple(shape)]
    for spec in specs:
        out.append(spec.out_shape(out[-1]))
    return out


def parameter_count(specs) -> int:
    total = 0
    for spec in specs:
        total += math.prod(spec.weight_shape()) + spec.out_count()
    return total


def default_architecture(height: int = 128, width: int = 256) -> Architecture:
    """The documented default network.

    Encoder: three stride-2 convolutions 3 -> 64 -> 128 -> 256, a stride-1
    channel-squeeze convolution, and a dense latent of height*width/32
    units.  Each branch: four transposed convolutions back to one channel
    at the input resolution (the last one linear).
    """
    if height % 32 or width % 32 or height < 32 or width < 32:
        raise ConfigError("default architecture needs dimensions divisible by 32")
    latent = height * width // 32
    encoder = (
        ConvSpec(3, 64, 4, 4, 2, 2, 1, 1),
        ConvSpec(64, 128, 4, 4, 2, 2, 1, 1),
        ConvSpec(128, 256, 4, 4, 2, 2, 1, 1),
        ConvSpec(256, 32, 3, 3, 1, 1, 1, 1),
        FcSpec(32 * (height // 8) * (width // 8), latent,
               32, height // 32, width // 32),
    )
    branch = (
        TransposedConvSpec(32, 128, 8, 8, 4, 4, 2, 2),
        TransposedConvSpec(128, 64, 4, 4, 2, 2, 1, 1),
        TransposedConvSpec(64, 32, 4, 4, 2, 2, 1, 1),
        TransposedConvSpec(32, 1, 4, 4, 2, 2, 1, 1),
    )
    return Architecture((3, height, width), encoder, branch, branch)


def tiny_architecture(height: int = 8, width: int = 8) -> Architecture:
    """A few-hundred-parameter network for gradient checks and smoke tests."""
    if height % 4 or width % 4 or height < 4 or width < 4:
        raise ConfigError("tiny architecture needs dimensions divisible by 4")
    encoder = (
        ConvSpec(3, 2, 3, 3, 2, 2, 1, 1),
        FcSpec(2 * (height // 2) * (width // 2),
               2 * (height // 4) * (width // 4),
               2, height // 4, width // 4),
    )
    branch = (
        TransposedConvSpec(2, 2, 4, 4, 2, 2, 1, 1),
        TransposedConvSpec(2, 1, 4, 4, 2, 2, 1, 1),
    )
    return Architecture((3, height, width), encoder, branch, branch)


PRESETS = {
    "default": default_architecture,
    "tiny": tiny_architecture,
}
