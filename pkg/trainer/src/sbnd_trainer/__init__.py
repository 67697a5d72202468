"""Train and evaluate syndrome-based neural decoders on curated datasets."""

from .codefile import Code, load_code
from .data import FixedSource, OnDemandSource
from .evalfer import fer
from .loss import bipolar_bce
from .models import (EcctDecoder, GruDecoder, ModelSpec, attention_mask,
                     build_model, infer_bits, make_inputs, param_count)
from .records import load_dataset
from .train import TrainConfig, TrainResult, load_checkpoint, save_checkpoint, train

__version__ = "0.1.0"
