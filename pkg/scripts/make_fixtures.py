#!/usr/bin/env python3
"""Generate the committed test fixtures: trained heat-equation candidates.

Trains a two-hidden-layer repu(3) network on the residual + initial-data
least squares for the scenario d=2, kappa=1/pi^2, T=1, g(x)=sin(pi*x), and
writes checkpoint weight files at several stages of training, plus a seeded
untrained network.  Run once; the outputs under tests/fixtures/ are committed
so the test suite never needs torch.

Usage: python scripts/make_fixtures.py
"""

import json
import math
import pathlib

import numpy as np
import torch

OUT_DIR = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"
KAPPA = 1.0 / math.pi**2
WIDTH = 48
ADAM_EPOCHS = 1500
CHECKPOINT_EPOCHS = (10, 100)
SEED = 7

torch.manual_seed(SEED)
torch.set_default_dtype(torch.float64)


class RePU3Net(torch.nn.Module):
    def __init__(self, width):
        super().__init__()
        self.l1 = torch.nn.Linear(2, width)
        self.l2 = torch.nn.Linear(width, width)
        self.l3 = torch.nn.Linear(width, 1)
        # cubic activations blow up under default init scales
        for lin, gain in ((self.l1, 1.0), (self.l2, 0.5), (self.l3, 0.5)):
            torch.nn.init.normal_(lin.weight, 0, gain / lin.weight.shape[1] ** 0.5)
            torch.nn.init.uniform_(lin.bias, -0.3, 0.3)

    def forward(self, x):
        a = torch.relu(self.l1(x)) ** 3
        a = torch.relu(self.l2(a)) ** 3
        return self.l3(a)


def losses(net, interior, face):
    x = interior.clone().requires_grad_(True)
    v = (1.0 - x[:, :1] ** 2) * net(x)
    g1 = torch.autograd.grad(v.sum(), x, create_graph=True)[0]
    v_t = g1[:, 1:2]
    v_xx = torch.autograd.grad(g1[:, 0].sum(), x, create_graph=True)[0][:, 0:1]
    residual = v_t - KAPPA * v_xx
    ic = (1.0 - face**2) * net(torch.cat([face, torch.zeros_like(face)], dim=1))
    ic = ic - torch.sin(math.pi * face)
    return (residual**2).mean(), (ic**2).mean()


def export(net, path):
    layers = [
        {"weight": lin.weight.detach().numpy().tolist(), "bias": lin.bias.detach().numpy().tolist()}
        for lin in (net.l1, net.l2, net.l3)
    ]
    doc = {"input_dim": 2, "activation": {"kind": "repu", "order": 3}, "layers": layers}
    path.write_text(json.dumps(doc))
    print(f"wrote {path}")


def export_random_net(rng, widths, scale, path):
    dims = [2, *widths, 1]
    layers = []
    for a, b in zip(dims[:-1], dims[1:]):
        layers.append(
            {
                "weight": rng.normal(0, scale / math.sqrt(a), (b, a)).tolist(),
                "bias": rng.normal(0, 0.3, b).tolist(),
            }
        )
    doc = {"input_dim": 2, "activation": {"kind": "repu", "order": 3}, "layers": layers}
    path.write_text(json.dumps(doc))
    print(f"wrote {path}")


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(3)
    interior = torch.tensor(
        np.column_stack([rng.uniform(-1, 1, 10000), rng.uniform(0, 1, 10000)])
    )
    face = torch.tensor(rng.uniform(-1, 1, (2000, 1)))

    net = RePU3Net(WIDTH)
    opt = torch.optim.Adam(net.parameters(), lr=2e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, T_max=ADAM_EPOCHS, eta_min=1e-4)
    for epoch in range(1, ADAM_EPOCHS + 1):
        opt.zero_grad()
        lp, li = losses(net, interior, face)
        loss = lp + li
        loss.backward()
        opt.step()
        sched.step()
        if epoch in CHECKPOINT_EPOCHS:
            export(net, OUT_DIR / f"pinn_epoch{epoch:04d}.json")
        if epoch % 300 == 0:
            print(f"epoch {epoch}: loss={loss.item():.3e}")

    lbfgs = torch.optim.LBFGS(
        net.parameters(),
        max_iter=400,
        history_size=50,
        tolerance_grad=1e-12,
        tolerance_change=1e-14,
        line_search_fn="strong_wolfe",
    )

    def closure():
        lbfgs.zero_grad()
        lp, li = losses(net, interior, face)
        total = lp + li
        total.backward()
        return total

    for _ in range(3):
        lbfgs.step(closure)
    lp, li = losses(net, interior, face)
    print(f"final: pde={lp.item():.3e} ic={li.item():.3e}")
    export(net, OUT_DIR / "pinn_final.json")

    export_random_net(np.random.default_rng(11), [8, 8], 0.6, OUT_DIR / "random_8x8.json")


if __name__ == "__main__":
    main()
