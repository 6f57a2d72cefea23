"""Central-difference validation of automatic gradients.

Exhaustively perturbs every parameter element of a small module and
compares the finite-difference slope of a scalar loss against the
automatic gradient.  Quadratic in cost, so the module is capped at a
thousand parameters; the intended target is a tiny network including the
flow-rate constraint head, whose piecewise definition (guarded columns
pass through unscaled) is exactly the kind of code a gradient check is
for.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .errors import ConfigError
from .model import SubdomainNet, constrained_output, mse_loss
from .specs import parameter_count, tiny_architecture

__all__ = ["grad_check", "synthetic_batch", "tiny_constrained_check",
           "MAX_CHECK_PARAMETERS", "GRADIENT_BOUND"]

MAX_CHECK_PARAMETERS = 1000

# Acceptance bound on the max relative error between automatic and
# central-difference gradients.
GRADIENT_BOUND = 1e-4


# Elements whose first measurement disagrees by more than this are
# re-measured with a 64-fold smaller step before being scored.
_REFINE_THRESHOLD = 1e-5
_REFINE_SHRINK = 64.0

# Denominator floor, as a multiple of the central difference's intrinsic
# uncertainty eps^(2/3) * max(1, |loss|) at the cube-root step.
_NOISE_FLOOR_FACTOR = 1e5


def grad_check(module: nn.Module, loss_fn, step: float | None = None) -> float:
    """Max relative error between autograd and central differences.

    ``loss_fn`` must be a deterministic scalar function of the module's
    parameters (typically a closure over fixed inputs).  The relative
    error of one element is |g_fd - g_ad| / max(|g_fd|, |g_ad|).

    Two properties of the measurement itself are accounted for, so that
    only genuine gradient defects score badly:

    * A central difference of a loss of magnitude L carries an absolute
      uncertainty of order eps^(2/3) * max(1, L) at the cube-root step.
      Gradient elements within a few decades of that floor cannot be
      resolved relatively, so the denominator is floored at 1e5 times the
      uncertainty; a defect larger than the floor still registers, while
      one below it is invisible to any finite-difference probe.
    * The loss of a rectifier network is piecewise smooth, so a step that
      straddles a rectifier switch measures the wrong slope even though
      the automatic gradient is correct.  Any element whose first
      measurement disagrees is re-measured with a 64-fold smaller step
      and scored by the better of the two: a straddle clears once the
      step no longer reaches the switch, while a genuine defect persists
      at every step size.
    """
    n_params = sum(p.numel() for p in module.parameters())
    if n_params > MAX_CHECK_PARAMETERS:
        raise ConfigError(
            f"gradient check is exhaustive; {n_params} parameters exceed "
            f"the {MAX_CHECK_PARAMETERS}-parameter cap")
    if n_params == 0:
        raise ConfigError("module has no parameters to check")

    module.zero_grad()
    loss = loss_fn()
    loss.backward()
    grads = [p.grad.detach().clone() if p.grad is not None
             else torch.zeros_like(p) for p in module.parameters()]

    def measure(flat, i: int, orig: float, h: float, g_ad: float,
                floor: float) -> float:
        flat[i] = orig + h
        plus = float(loss_fn())
        flat[i] = orig - h
        minus = float(loss_fn())
        flat[i] = orig
        g_fd = (plus - minus) / (2.0 * h)
        return abs(g_fd - g_ad) / max(abs(g_fd), abs(g_ad), floor)

    worst = 0.0
    with torch.no_grad():
        loss_scale = max(1.0, abs(float(loss.detach())))
        for param, grad in zip(module.parameters(), grads):
            flat = param.view(-1)
            gflat = grad.view(-1)
            eps = torch.finfo(param.dtype).eps
            floor = _NOISE_FLOOR_FACTOR * eps ** (2.0 / 3.0) * loss_scale
            for i in range(flat.numel()):
                orig = flat[i].item()
                h = step if step is not None else (
                    eps ** (1.0 / 3.0) * max(1.0, abs(orig)))
                rel = measure(flat, i, orig, h, float(gflat[i]), floor)
                if rel > _REFINE_THRESHOLD:
                    rel = min(rel, measure(flat, i, orig,
                                           h / _REFINE_SHRINK,
                                           float(gflat[i]), floor))
                worst = max(worst, rel)
    return worst


def synthetic_batch(seed: int, height: int = 8, width: int = 8, xi: int = 2,
                    batch: int = 2, dtype=torch.float64) -> dict:
    """Random solver-style batch: banded inputs, walled mask, targets.

    Channel 0 imitates a normalized SDF (zero on the outermost rows, as at
    channel walls); channels 1 and 2 carry velocities only on the
    first/last ``xi`` columns.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    sdf = rng.uniform(0.1, 1.0, (batch, height, width))
    sdf[:, 0, :] = 0.0
    sdf[:, -1, :] = 0.0
    mask = (sdf > 0.0).astype(np.float64)
    band = np.zeros(width, dtype=bool)
    band[:xi] = band[width - xi:] = True
    vx = rng.normal(0.0, 0.3, (batch, height, width)) * band
    vy = rng.normal(0.0, 0.05, (batch, height, width)) * band
    x = np.stack([sdf, vx, vy], axis=1)
    y = np.stack([rng.normal(0.0, 0.3, (batch, height, width)),
                  rng.normal(0.0, 0.05, (batch, height, width))],
                 axis=1) * mask[:, None]
    return {
        "x": torch.tensor(x, dtype=dtype),
        "y": torch.tensor(y, dtype=dtype),
        "mask": torch.tensor(mask[:, None], dtype=dtype),
        "q_inlet": torch.tensor(rng.uniform(1e-4, 3e-4, batch), dtype=dtype),
        "dy": torch.full((batch,), 1e-3 / height, dtype=dtype),
        "xi": torch.full((batch,), xi, dtype=torch.int64),
    }


def tiny_constrained_check(seed: int = 0, mode: str = "flow-rate-conserving"
                           ) -> dict:
    """Gradient-check a tiny network through the constraint head.

    Returns the parameter count and the max relative gradient error of
    the full loss (mask, band overwrite, flow-rate scaling included when
    ``mode`` is flow-rate-conserving).
    """
    arch = tiny_architecture(8, 8)
    torch.manual_seed(seed)
    net = SubdomainNet(arch).double()
    batch = synthetic_batch(seed, 8, 8, xi=2)

    def loss_fn():
        raw = net(batch["x"])
        if mode == "flow-rate-conserving":
            out = constrained_output(raw, batch["x"], batch["mask"],
                                     batch["q_inlet"], batch["dy"], 2)
        else:
            out = raw
        return mse_loss(out, batch["y"])

    error = grad_check(net, loss_fn)
    return {
        "parameters": parameter_count(arch.layers()),
        "max_rel_error": error,
        "mode": mode,
    }
