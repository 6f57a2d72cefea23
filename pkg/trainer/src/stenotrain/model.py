"""Torch network for subdomain velocity prediction, plus the hard
flow-rate constraint head.

The raw network is a shared convolutional encoder (rectified after every
layer, including the dense latent) feeding two transposed-convolution
branches, one per velocity component, each rectified after every layer
except the last.  Input channels: normalized SDF, band vx, band vy.

The constrained head replays, differentiably, the same output contract
the inference engine applies: multiply by the interior mask, overwrite
the first/last xi columns with the input band values, then rescale the
x-component column-wise so every cross-section carries the inlet flow
rate.  Columns whose raw flow rate is below a small guard fraction of
the inlet flow rate are left unscaled (their factor would be
numerically meaningless), so their gradient is the unscaled gradient.
"""

from __future__ import annotations

import torch
from torch import nn

from .errors import ConfigError
from .specs import Architecture, ConvSpec, FcSpec, TransposedConvSpec
from .usds import ExportLayer, LoadedModel

__all__ = [
    "FLOW_RATE_GUARD",
    "SubdomainNet",
    "flow_rates",
    "constrain_flow_rate",
    "constrained_output",
    "predict",
    "mse_loss",
    "export_layers",
    "load_into_network",
]

# Columns whose unconstrained flow rate is below this fraction of q_inlet
# are left unscaled.
FLOW_RATE_GUARD = 1e-6

CONSTRAINT_MODES = ("data-driven", "flow-rate-conserving")


def _torch_layer(spec) -> nn.Module:
    if isinstance(spec, ConvSpec):
        return nn.Conv2d(spec.in_ch, spec.out_ch, (spec.kh, spec.kw),
                         (spec.sh, spec.sw), (spec.ph, spec.pw))
    if isinstance(spec, TransposedConvSpec):
        return nn.ConvTranspose2d(spec.in_ch, spec.out_ch, (spec.kh, spec.kw),
                                  (spec.sh, spec.sw), (spec.ph, spec.pw))
    if isinstance(spec, FcSpec):
        return nn.Linear(spec.in_dim, spec.out_dim)
    raise ConfigError(f"unsupported layer descriptor {spec!r}")


class SubdomainNet(nn.Module):
    """Encoder/decoder network built from an :class:`Architecture`."""

    def __init__(self, arch: Architecture):
        super().__init__()
        self.arch = arch
        self.enc = nn.ModuleList(_torch_layer(s) for s in arch.encoder)
        self.dec_x = nn.ModuleList(_torch_layer(s) for s in arch.branch_x)
        self.dec_y = nn.ModuleList(_torch_layer(s) for s in arch.branch_y)

    def _apply_layer(self, module: nn.Module, spec, x: torch.Tensor
                     ) -> torch.Tensor:
        if spec.kind == "fc":
            out = module(x.flatten(1))
            return out.view(-1, spec.out_c, spec.out_h, spec.out_w)
        return module(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        if x.shape[1:] != self.arch.input_shape:
            raise ConfigError(
                f"input shape {tuple(x.shape[1:])} != {self.arch.input_shape}")
        for module, spec in zip(self.enc, self.arch.encoder):
            x = torch.relu(self._apply_layer(module, spec, x))
        outs = []
        for modules, specs in ((self.dec_x, self.arch.branch_x),
                               (self.dec_y, self.arch.branch_y)):
            z = x
            for k, (module, spec) in enumerate(zip(modules, specs)):
                z = self._apply_layer(module, spec, z)
                if k + 1 < len(specs):
                    z = torch.relu(z)
            outs.append(z[:, 0])
        return torch.stack(outs, dim=1)


def flow_rates(vx: torch.Tensor, dy: torch.Tensor) -> torch.Tensor:
    """Column flow rates of a (B, H, W) x-velocity: sum over rows times dy."""
    return vx.sum(dim=1) * dy[:, None]


def constrain_flow_rate(out: torch.Tensor, q_inlet: torch.Tensor,
                        dy: torch.Tensor) -> torch.Tensor:
    """Rescale channel 0 of (B, 2, H, W) so every column carries q_inlet."""
    q = flow_rates(out[:, 0], dy)
    flagged = q.abs() < FLOW_RATE_GUARD * q_inlet[:, None]
    one = torch.ones((), dtype=out.dtype, device=out.device)
    safe = torch.where(flagged, one, q)
    scale = torch.where(flagged, one, q_inlet[:, None] / safe)
    vx = out[:, 0] * scale[:, None, :]
    return torch.stack([vx, out[:, 1]], dim=1)


def constrained_output(raw: torch.Tensor, x: torch.Tensor, mask: torch.Tensor,
                       q_inlet: torch.Tensor, dy: torch.Tensor,
                       xi: int) -> torch.Tensor:
    """Mask, band overwrite, then flow-rate constraint, all differentiable.

    ``raw`` is the network output (B, 2, H, W); ``x`` the network input,
    whose channels 1 and 2 hold the band velocities; ``mask`` the interior
    mask (B, 1, H, W).
    """
    width = raw.shape[-1]
    cols = torch.arange(width, device=raw.device)
    band = (cols < xi) | (cols >= width - xi)
    out = raw * mask
    out = torch.where(band[None, None, None, :], x[:, 1:3], out)
    return constrain_flow_rate(out, q_inlet, dy)


def predict(net: SubdomainNet, batch: dict, mode: str) -> torch.Tensor:
    """Model output under a constraint mode for one collated batch."""
    raw = net(batch["x"])
    if mode == "data-driven":
        return raw
    if mode == "flow-rate-conserving":
        return constrained_output(raw, batch["x"], batch["mask"],
                                  batch["q_inlet"], batch["dy"],
                                  int(batch["xi"][0]))
    raise ConfigError(f"unknown constraint mode {mode!r}")


def mse_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean over images of the per-image mean squared velocity error.

    Per pixel, the squared error sums both velocity components; per image
    it is averaged over pixels, then averaged over the batch.
    """
    if pred.shape != target.shape:
        raise ConfigError(f"prediction {tuple(pred.shape)} does not match "
                          f"target {tuple(target.shape)}")
    per_pixel = (pred - target).pow(2).sum(dim=1)
    return per_pixel.flatten(1).mean(dim=1).mean()


def export_layers(net: SubdomainNet) -> list[ExportLayer]:
    """Network parameters in the serialization layout.

    Convolution weights are stored [out][in][kh][kw]; torch keeps
    transposed-convolution weights [in][out][kh][kw], so those are
    permuted on the way out.
    """
    layers = []
    modules = list(net.enc) + list(net.dec_x) + list(net.dec_y)
    for module, spec in zip(modules, net.arch.layers()):
        weight = module.weight.detach().cpu()
        if spec.kind == "tconv":
            weight = weight.permute(1, 0, 2, 3)
        layers.append(ExportLayer(spec, weight.contiguous().numpy(),
                                  module.bias.detach().cpu().numpy()))
    return layers


def load_into_network(net: SubdomainNet, loaded: LoadedModel) -> None:
    """Copy decoded weight-file parameters into a matching network."""
    if loaded.arch != net.arch:
        raise ConfigError("weight file architecture does not match the network")
    modules = list(net.enc) + list(net.dec_x) + list(net.dec_y)
    with torch.no_grad():
        for module, layer in zip(modules, loaded.layers()):
            weight = torch.from_numpy(layer.weight)
            if layer.spec.kind == "tconv":
                weight = weight.permute(1, 0, 2, 3)
            module.weight.copy_(weight)
            module.bias.copy_(torch.from_numpy(layer.bias))
