"""Curated dataset construction and Monte Carlo evaluation for
syndrome-based neural decoders."""

from .channel import (ChannelParams, NoiseWeightDistribution, ReceivedWord,
                      channel_weight_pmf, hard_error_prob, on_demand_stream,
                      stream_rng, transmit, transmit_biased)
from .codes import (CodeError, Gf2m, LinearCode, bch_code,
                    coset_representative, load_code_file,
                    min_distance_exhaustive, save_code_file)
from .dataset import (BuildSpec, DatasetError, DatasetHeader, DatasetRecord,
                      StarvationError, build_dataset, dataset_stats,
                      read_dataset, validate_dataset)
from .gf2 import Gf2Matrix
from .harness import (FerResult, MldDecoder, OsdDecoder, PipeBridgeDecoder,
                      RunStop, TcpBridgeDecoder, fer_csv_export, run_fer)
from .mld import (ErrorPattern, MldDecision, default_order, mld_exhaustive,
                  osd_decode)

__version__ = "0.1.0"
