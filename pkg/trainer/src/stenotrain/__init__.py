"""Offline trainer for subdomain flow networks.

Consumes directories of comma-delimited training pairs, trains an
encoder/decoder network (optionally through a hard flow-rate-conserving
output head), and exports the result in the self-describing binary
weight format the inference engine loads.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (ConfigError, DatasetError, TrainerError, TrainingError,
                     WeightChecksumError, WeightFormatError)
from .specs import (Architecture, ConvSpec, FcSpec, TransposedConvSpec,
                    chain_shapes, default_architecture, parameter_count,
                    tiny_architecture, PRESETS)
from .usds import ExportLayer, LoadedModel, load_weights, save_weights
from .dataset import (SDF_NORMALIZER, PairSample, discover_pairs, load_dataset,
                      load_pair, sample_tensors, split_indices)
from .model import (FLOW_RATE_GUARD, SubdomainNet, constrain_flow_rate,
                    constrained_output, export_layers, flow_rates,
                    load_into_network, mse_loss, predict)
from .train import TrainConfig, TrainResult, train
from .gradcheck import (GRADIENT_BOUND, MAX_CHECK_PARAMETERS, grad_check,
                        synthetic_batch, tiny_constrained_check)

__all__ = [
    "__version__",
    # errors
    "TrainerError", "ConfigError", "DatasetError", "TrainingError",
    "WeightFormatError", "WeightChecksumError",
    # architecture descriptors
    "Architecture", "ConvSpec", "TransposedConvSpec", "FcSpec",
    "chain_shapes", "parameter_count", "default_architecture",
    "tiny_architecture", "PRESETS",
    # weight files
    "ExportLayer", "LoadedModel", "save_weights", "load_weights",
    # dataset
    "SDF_NORMALIZER", "PairSample", "discover_pairs", "load_pair",
    "load_dataset", "split_indices", "sample_tensors",
    # model
    "FLOW_RATE_GUARD", "SubdomainNet", "flow_rates", "constrain_flow_rate",
    "constrained_output", "predict", "mse_loss", "export_layers",
    "load_into_network",
    # training
    "TrainConfig", "TrainResult", "train",
    # gradient checking
    "grad_check", "synthetic_batch", "tiny_constrained_check",
    "MAX_CHECK_PARAMETERS", "GRADIENT_BOUND",
]
