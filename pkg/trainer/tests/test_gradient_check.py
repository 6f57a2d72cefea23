"""Finite-difference validation of the training gradients."""

from __future__ import annotations

import pytest

torch = pytest.importorskip("torch")
stenotrain = pytest.importorskip("stenotrain")

from torch import nn

from stenotrain import (ConfigError, GRADIENT_BOUND, MAX_CHECK_PARAMETERS,
                        grad_check, synthetic_batch, tiny_constrained_check)


def test_quadratic_loss_checks_to_rounding_error():
    torch.manual_seed(0)
    layer = nn.Linear(3, 2).double()
    x = torch.randn(4, 3, dtype=torch.float64)
    y = torch.randn(4, 2, dtype=torch.float64)
    # quadratic in the parameters: central differences are exact up to
    # floating-point rounding
    error = grad_check(layer, lambda: (layer(x) - y).pow(2).mean())
    assert error < 1e-8


def test_tiny_network_with_constraint_head_meets_the_bound():
    result = tiny_constrained_check(seed=0, mode="flow-rate-conserving")
    assert result["parameters"] <= MAX_CHECK_PARAMETERS
    assert result["mode"] == "flow-rate-conserving"
    assert result["max_rel_error"] <= GRADIENT_BOUND


def test_tiny_network_data_driven_meets_the_bound():
    result = tiny_constrained_check(seed=0, mode="data-driven")
    assert result["max_rel_error"] <= GRADIENT_BOUND


def test_guarded_column_gradients_survive_the_check():
    torch.manual_seed(2)
    layer = nn.Linear(4, 8).double()
    batch = synthetic_batch(seed=2, height=8, width=8, xi=2, batch=1)
    from stenotrain import constrain_flow_rate

    base = torch.randn(4, dtype=torch.float64)

    def loss_fn():
        p = layer(base)  # (8,) -> one velocity profile per column
        cols = p[:, None].expand(8, 8)
        # column 3 is antisymmetric, so its flow rate cancels and the
        # guard keeps it unscaled no matter how the parameters move
        anti = p - p.flip(0)
        vx = torch.cat([cols[:, :3], anti[:, None], cols[:, 4:]], dim=1)
        out = torch.stack([vx, torch.zeros_like(vx)])[None]
        fixed = constrain_flow_rate(out, batch["q_inlet"][:1],
                                    batch["dy"][:1])
        return fixed.pow(2).mean()

    assert grad_check(layer, loss_fn) <= GRADIENT_BOUND


def test_a_detached_scale_factor_is_caught():
    from stenotrain import (FLOW_RATE_GUARD, SubdomainNet, flow_rates,
                            mse_loss, tiny_architecture)

    torch.manual_seed(0)
    net = SubdomainNet(tiny_architecture(8, 8)).double()
    batch = synthetic_batch(seed=0, height=8, width=8, xi=2)

    def loss_fn():
        out = net(batch["x"]) * batch["mask"]
        q = flow_rates(out[:, 0], batch["dy"])
        flagged = q.abs() < FLOW_RATE_GUARD * batch["q_inlet"][:, None]
        one = torch.ones((), dtype=out.dtype)
        safe = torch.where(flagged, one, q)
        # classic defect: the scale is cut out of the autograd graph
        scale = torch.where(flagged, one,
                            batch["q_inlet"][:, None] / safe).detach()
        vx = out[:, 0] * scale[:, None, :]
        return mse_loss(torch.stack([vx, out[:, 1]], dim=1), batch["y"])

    assert grad_check(net, loss_fn) > 100 * GRADIENT_BOUND


def test_oversized_modules_are_rejected():
    big = nn.Linear(64, 64)
    assert sum(p.numel() for p in big.parameters()) > MAX_CHECK_PARAMETERS
    with pytest.raises(ConfigError, match="cap"):
        grad_check(big, lambda: big.weight.sum())


def test_parameterless_modules_are_rejected():
    with pytest.raises(ConfigError, match="no parameters"):
        grad_check(nn.ReLU(), lambda: torch.zeros(()))
