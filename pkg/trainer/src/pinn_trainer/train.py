"""Collocation least-squares training of heat-equation candidate networks.

Trains a two-hidden-layer repu(n) network f so that v = chi * f solves the
heat equation on [-1,1]^(d-1) x [0,T] with product-of-sines initial data:
the loss is the mean squared PDE residual (d_t - kappa*Lap)(chi f) over
interior collocation points plus the mean squared initial-data mismatch
(chi f)(., 0) - g over face points.  The boundary condition is enforced by
the chi factor on the consumer side, so no boundary term is needed and the
trained object is f alone.

Checkpoints are exported as portable weight JSON (input -> output layer list
of row-major weight/bias pairs) readable by the verification tooling, plus a
manifest listing the checkpoint files and their losses in training order.
Everything runs in double precision so exported weights reproduce the
training-side forward pass bit-for-bit through the JSON round trip.

The repu activation is exactly max(0, t)^n (no smooth surrogate), so the
consumer's closed-form derivative machinery applies to the exported nets.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np
import torch


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the offending epoch in the message."""


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training run needs; the seed fixes all sampling."""

    widths: tuple = (100, 100)
    repu_order: int = 3
    kappa: float = 1.0 / math.pi**2
    T: float = 1.0
    d: int = 2
    amplitude: float = 1.0
    frequencies: tuple = (1,)
    n_interior: int = 10_000
    n_initial: int = 2_000
    epochs: int = 2000
    learning_rate: float = 2e-3
    checkpoint_epochs: tuple = (10, 100, 2000)
    seed: int = 7
    output_dir: str = "checkpoints"

    def __post_init__(self):
        if len(self.widths) != 2 or any(w < 1 for w in self.widths):
            raise ValueError("widths must be two positive integers")
        if self.repu_order < 3:
            raise ValueError("repu order must be at least 3")
        if self.d < 2 or len(self.frequencies) != self.d - 1:
            raise ValueError("frequencies must cover the d-1 spatial axes")
        if any(m < 1 for m in self.frequencies):
            raise ValueError("frequencies must be positive integers")
        if self.kappa <= 0 or self.T <= 0:
            raise ValueError("kappa and T must be positive")
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        object.__setattr__(self, "frequencies", tuple(int(m) for m in self.frequencies))
        object.__setattr__(
            self, "checkpoint_epochs", tuple(sorted(set(int(e) for e in self.checkpoint_epochs)))
        )

    @classmethod
    def from_dict(cls, raw: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**raw)

    @classmethod
    def load(cls, path) -> "TrainConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


class CandidateNet(torch.nn.Module):
    """Two hidden layers with exact repu activation max(0, t)^n."""

    def __init__(self, d, widths, order, generator=None):
        super().__init__()
        self.order = order
        self.l1 = torch.nn.Linear(d, widths[0])
        self.l2 = torch.nn.Linear(widths[0], widths[1])
        self.l3 = torch.nn.Linear(widths[1], 1)
        # cubic activations blow up under default init scales
        for lin, gain in ((self.l1, 1.0), (self.l2, 0.5), (self.l3, 0.5)):
            with torch.no_grad():
                lin.weight.normal_(0.0, gain / lin.weight.shape[1] ** 0.5, generator=generator)
                lin.bias.uniform_(-0.3, 0.3, generator=generator)

    def _repu(self, z):
        a = torch.relu(z)
        out = a
        # repeated multiplication keeps the activation bit-identical to the
        # consumer's max(0,t)^n evaluation (libm pow rounds differently)
        for _ in range(self.order - 1):
            out = out * a
        return out

    def forward(self, x):
        a = self._repu(self.l1(x))
        a = self._repu(self.l2(a))
        return self.l3(a)

    def to_weight_dict(self) -> dict:
        layers = [
            {
                "weight": lin.weight.detach().numpy().tolist(),
                "bias": lin.bias.detach().numpy().tolist(),
            }
            for lin in (self.l1, self.l2, self.l3)
        ]
        return {
            "input_dim": self.l1.in_features,
            "activation": {"kind": "repu", "order": self.order},
            "layers": layers,
        }


def _initial_values(config: TrainConfig, x_space: torch.Tensor) -> torch.Tensor:
    out = torch.full((x_space.shape[0], 1), config.amplitude, dtype=x_space.dtype)
    for i, m in enumerate(config.frequencies):
        out = out * torch.sin(m * math.pi * x_space[:, i : i + 1])
    return out


def _chi(x_space: torch.Tensor) -> torch.Tensor:
    return torch.prod(1.0 - x_space**2, dim=1, keepdim=True)


def sample_collocation(config: TrainConfig):
    """Interior points of U x (0, T] and spatial face points, fixed by the seed."""
    rng = np.random.default_rng(config.seed)
    sd = config.d - 1
    interior = np.column_stack(
        [rng.uniform(-1.0, 1.0, (config.n_interior, sd)), rng.uniform(0.0, config.T, config.n_interior)]
    )
    face = rng.uniform(-1.0, 1.0, (config.n_initial, sd))
    return torch.tensor(interior), torch.tensor(face)


def losses(net: CandidateNet, config: TrainConfig, interior: torch.Tensor, face: torch.Tensor):
    """(pde residual MSE, initial-data MSE) with exact autograd derivatives."""
    x = interior.clone().requires_grad_(True)
    v = _chi(x[:, :-1]) * net(x)
    grad = torch.autograd.grad(v.sum(), x, create_graph=True)[0]
    v_t = grad[:, -1:]
    laplacian = torch.zeros_like(v_t)
    for axis in range(config.d - 1):
        second = torch.autograd.grad(grad[:, axis].sum(), x, create_graph=True)[0][:, axis : axis + 1]
        laplacian = laplacian + second
    residual = v_t - config.kappa * laplacian
    ic = _chi(face) * net(torch.cat([face, torch.zeros(face.shape[0], 1, dtype=face.dtype)], dim=1))
    ic = ic - _initial_values(config, face)
    return (residual**2).mean(), (ic**2).mean()


@dataclass
class TrainResult:
    checkpoint_paths: list
    manifest_path: str
    final_loss: float
    net: "CandidateNet"
    smoothed_losses: list = field(default_factory=list)


def _export(net: CandidateNet, path) -> None:
    with open(path, "w") as fh:
        json.dump(net.to_weight_dict(), fh)


def train(config: TrainConfig, log=None) -> TrainResult:
    """Run the collocation least-squares fit and export checkpoints.

    Writes one weight JSON per checkpoint epoch (the final epoch is always a
    checkpoint; epoch 0 is the seeded initialization) and a manifest
    ``{"checkpoints": [...], "losses": [...]}`` in training order, where each
    loss is the window-10 trailing mean of the total loss at that epoch.
    Raises TrainingDiverged as soon as the loss stops being finite.
    """
    torch.set_default_dtype(torch.float64)
    gen = torch.Generator().manual_seed(config.seed)
    net = CandidateNet(config.d, config.widths, config.repu_order, generator=gen)
    interior, face = sample_collocation(config)

    os.makedirs(config.output_dir, exist_ok=True)
    marks = set(config.checkpoint_epochs) | {config.epochs}
    history = []
    paths, manifest_losses = [], []

    def smoothed(epoch_loss_history):
        window = epoch_loss_history[-10:]
        return float(sum(window) / len(window))

    def checkpoint(epoch):
        path = os.path.join(config.output_dir, f"checkpoint_epoch{epoch:05d}.json")
        _export(net, path)
        paths.append(path)
        manifest_losses.append(smoothed(history) if history else float("nan"))
        if log:
            log(f"checkpoint epoch {epoch}: loss={manifest_losses[-1]:.6e} -> {path}")

    opt = torch.optim.Adam(net.parameters(), lr=config.learning_rate)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(
        opt, T_max=max(config.epochs, 1), eta_min=config.learning_rate / 20.0
    )

    lp, li = losses(net, config, interior, face)
    history.append(float((lp + li).detach()))
    if 0 in marks or config.epochs == 0:
        checkpoint(0)
    for epoch in range(1, config.epochs + 1):
        opt.zero_grad()
        lp, li = losses(net, config, interior, face)
        total = lp + li
        if not torch.isfinite(total):
            raise TrainingDiverged(
                f"loss became non-finite at epoch {epoch} "
                f"(pde={float(lp.detach())!r}, initial={float(li.detach())!r}); "
                "lower the learning rate"
            )
        total.backward()
        opt.step()
        sched.step()
        history.append(float(total.detach()))
        if epoch in marks:
            checkpoint(epoch)
        if log and epoch % 200 == 0:
            log(f"epoch {epoch}: loss={history[-1]:.6e}")

    manifest_path = os.path.join(config.output_dir, "manifest.json")
    with open(manifest_path, "w") as fh:
        json.dump({"checkpoints": paths, "losses": manifest_losses}, fh, indent=2)
    return TrainResult(
        checkpoint_paths=paths,
        manifest_path=manifest_path,
        final_loss=history[-1],
        net=net,
        smoothed_losses=manifest_losses,
    )


def forward_values(net: CandidateNet, points: np.ndarray) -> np.ndarray:
    """Training-side forward pass on a numpy batch (for round-trip checks)."""
    with torch.no_grad():
        return net(torch.tensor(np.asarray(points, dtype=float))).numpy()[:, 0]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pinn-train",
        description="Train a heat-equation candidate network and export weight JSON checkpoints.",
    )
    parser.add_argument("--config", required=True, help="TrainConfig JSON file")
    parser.add_argument("--output-dir", default=None, help="override the config output directory")
    args = parser.parse_args(argv)
    try:
        config = TrainConfig.load(args.config)
        if args.output_dir is not None:
            config = replace(config, output_dir=args.output_dir)
        result = train(config, log=lambda msg: print(msg, flush=True))
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TrainingDiverged as exc:
        print(f"training diverged: {exc}", file=sys.stderr)
        return 1
    print(f"final loss: {result.final_loss:.6e}")
    print(f"manifest: {result.manifest_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
