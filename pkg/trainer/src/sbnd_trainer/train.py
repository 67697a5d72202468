"""Training loop: AdamW with decoupled weight decay, plateau-driven LR
reduction, best-validation checkpointing, and a CSV training log."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import torch

from .data import Batches
from .loss import bipolar_bce
from .models import ModelSpec, build_model

log = logging.getLogger("sbnd_trainer")


@dataclass
class TrainConfig:
    epochs: int = 256
    batch: int = 4096
    lr: float | None = None            # None: 1e-3 for n<=31, 5e-4 for n=63
    weight_decay: float | None = None  # None: 0.02 gru / 0.0 ecct
    seed: int = 0
    max_steps: int | None = None       # cap on optimizer steps (step-matched runs)
    plateau_patience: int = 8
    plateau_factor: float = 0.5
    log_path: str | None = None
    checkpoint_path: str | None = None

    def resolve(self, spec: ModelSpec) -> "TrainConfig":
        out = TrainConfig(**asdict(self))
        if out.lr is None:
            out.lr = 0.0005 if spec.n >= 63 else 0.001
        if out.weight_decay is None:
            out.weight_decay = 0.02 if spec.arch == "gru" else 0.0
        return out


@dataclass
class TrainResult:
    spec: ModelSpec
    config: TrainConfig
    model: torch.nn.Module
    best_val_loss: float
    best_state: dict
    steps: int
    samples_seen: int
    history: list = field(default_factory=list)

    def load_best(self):
        self.model.load_state_dict(self.best_state)
        return self.model


def _val_loss(model, val_x, val_y):
    model.eval()
    with torch.no_grad():
        out = model(torch.from_numpy(val_x))
        return float(bipolar_bce(torch.from_numpy(val_y), out))


def train(spec: ModelSpec, config: TrainConfig, source) -> TrainResult:
    """Fit the model on a FixedSource or OnDemandSource."""
    config = config.resolve(spec)
    log.info("training %s: %s", spec.label,
             " ".join(f"{k}={v}" for k, v in sorted(asdict(config).items())))
    torch.manual_seed(config.seed)
    batches: Batches = source.batches(config.batch)
    model = build_model(spec, batches.code.H)
    opt = torch.optim.AdamW(model.parameters(), lr=config.lr,
                            weight_decay=config.weight_decay)
    sched = torch.optim.lr_scheduler.ReduceLROnPlateau(
        opt, factor=config.plateau_factor, patience=config.plateau_patience)

    shuffle_rng = np.random.default_rng(config.seed + 1)
    steps = 0
    samples = 0
    best_val = math.inf
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    history = []
    stop = False
    for epoch in range(config.epochs):
        model.train()
        losses = []
        if batches.on_demand:
            spans = range(batches.steps_per_epoch)
            fetch = lambda _: batches.sample_generator(config.batch)
        else:
            order = shuffle_rng.permutation(len(batches.train_x))
            spans = [order[i:i + config.batch]
                     for i in range(0, len(order), config.batch)]
            spans = [s for s in spans if len(s) == config.batch] or \
                    [order[:len(order)]]
            fetch = lambda idx: (batches.train_x[idx], batches.train_y[idx])
        for span in spans:
            x, t = fetch(span)
            opt.zero_grad()
            out = model(torch.from_numpy(x))
            loss = bipolar_bce(torch.from_numpy(t), out)
            loss_val = loss.item()
            if not math.isfinite(loss_val):
                raise RuntimeError(
                    f"non-finite loss {loss_val} at step {steps} "
                    f"(epoch {epoch}, lr {opt.param_groups[0]['lr']:g})")
            loss.backward()
            opt.step()
            losses.append(loss_val)
            steps += 1
            samples += len(x)
            if config.max_steps is not None and steps >= config.max_steps:
                stop = True
                break
        val = _val_loss(model, batches.val_x, batches.val_y)
        sched.step(val)
        if val < best_val:
            best_val = val
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
        history.append({"epoch": epoch, "step": steps,
                        "train_loss": float(np.mean(losses)),
                        "val_loss": val, "lr": opt.param_groups[0]["lr"]})
        if stop:
            break
    result = TrainResult(spec=spec, config=config, model=model,
                         best_val_loss=best_val, best_state=best_state,
                         steps=steps, samples_seen=samples, history=history)
    if config.log_path:
        _write_log(config.log_path, history)
    if config.checkpoint_path:
        save_checkpoint(result, batches.code.H, config.checkpoint_path)
    return result


def _write_log(path, history):
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=["epoch", "step", "train_loss",
                                             "val_loss", "lr"])
        out.writeheader()
        out.writerows(history)


def save_checkpoint(result: TrainResult, H: np.ndarray, path) -> None:
    torch.save({"spec": asdict(result.spec), "H": np.asarray(H),
                "state": result.best_state}, path)


def load_checkpoint(path):
    blob = torch.load(path, weights_only=False)
    spec = ModelSpec(**blob["spec"])
    model = build_model(spec, blob["H"])
    model.load_state_dict(blob["state"])
    model.eval()
    return model, spec, blob["H"]
