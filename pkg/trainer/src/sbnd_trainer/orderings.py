"""Desk-scale reproduction of the training-strategy orderings: ML-labeled
targets beat true-error targets at equal dataset size, and a fixed dataset
matches an on-demand stream that consumes many times more fresh samples."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .codefile import Code
from .data import FixedSource, OnDemandSource
from .evalfer import fer
from .models import ModelSpec
from .train import TrainConfig, train


@dataclass
class ArmResult:
    name: str
    fers: list
    frames: list
    steps: list
    samples: list

    @property
    def mean_fer(self) -> float:
        return float(np.mean(self.fers))

    @property
    def eval_se(self) -> float:
        """Monte Carlo standard error of the mean FER (eval noise only)."""
        var = sum(p * (1 - p) / f for p, f in zip(self.fers, self.frames))
        return float(np.sqrt(var)) / len(self.fers)

    def describe(self) -> str:
        per_seed = ", ".join(f"{f:.4f}" for f in self.fers)
        return f"{self.name}: mean FER {self.mean_fer:.4f} [{per_seed}]"


def run_arm(name, spec, config, make_source, code, snr_db, seeds,
            eval_min_errors=1000, eval_max_frames=60_000) -> ArmResult:
    """Train one configuration across seeds and measure its test FER."""
    fers, frames, steps, samples = [], [], [], []
    for seed in seeds:
        cfg = replace(config, seed=seed)
        result = train(spec, cfg, make_source(seed))
        model = result.load_best()
        r = fer(model, code, snr_db, min_errors=eval_min_errors,
                max_frames=eval_max_frames, seed=10_000 + seed)
        fers.append(r["fer"])
        frames.append(r["frames"])
        steps.append(result.steps)
        samples.append(result.samples_seen)
    return ArmResult(name=name, fers=fers, frames=frames, steps=steps,
                     samples=samples)


def reproduce_orderings(code: Code, dataset_path, spec: ModelSpec,
                        config: TrainConfig, snr_db: float, seeds=(0,),
                        eval_min_errors=150, eval_max_frames=60_000) -> dict:
    """Three matched arms on one dual-target dataset: ML targets, true-error
    targets, and an on-demand stream with the same total sample budget (it
    sees each fresh word once, so it gets far fewer optimizer steps).

    Expected mean-FER ordering: ml <= chan <= on_demand, judged within
    Monte Carlo noise (3 standard errors of each difference).
    """
    run = lambda name, sp, cfg, mk: run_arm(
        name, sp, cfg, mk, code, snr_db, seeds, eval_min_errors,
        eval_max_frames)
    ml = run("ml_targets", spec, config,
             lambda s: FixedSource(dataset_path, code, "ml", seed=s))
    chan = run("chan_targets", spec, config,
               lambda s: FixedSource(dataset_path, code, "chan", seed=s))
    from .records import load_dataset
    budget = load_dataset(dataset_path).header.record_count
    od_cfg = replace(config, max_steps=max(1, budget // config.batch),
                     epochs=10 ** 6)
    on_demand = run("on_demand", replace(spec, dropout=0.0), od_cfg,
                    lambda s: OnDemandSource(code, snr_db, seed=s))

    def holds(a, b):
        noise = 3.0 * (a.eval_se ** 2 + b.eval_se ** 2) ** 0.5
        return a.mean_fer <= b.mean_fer + noise

    return {"ml": ml, "chan": chan, "on_demand": on_demand,
            "ml_beats_chan": holds(ml, chan),
            "chan_beats_on_demand": holds(chan, on_demand)}
