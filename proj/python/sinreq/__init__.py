"""SinReQ quantization-aware training toolkit."""

import json
import os

from . import _sinreq
from ._sinreq import (
    ParseError,
    SinReQError,
    dorefa_quantize,
    frac_near_level,
    histogram,
    lambda_at,
    level_geometry,
    load_idx,
    quant_error,
    quantize,
    sinreq_loss,
    snap_to_levels,
    weight_decay_loss,
    wrpn_quantize,
    write_idx,
)

__all__ = [
    "ParseError",
    "SinReQError",
    "dorefa_quantize",
    "evaluate",
    "frac_near_level",
    "histogram",
    "lambda_at",
    "level_geometry",
    "load_config",
    "load_idx",
    "paired",
    "quant_error",
    "quantize",
    "sinreq_loss",
    "snap_to_levels",
    "train",
    "weight_decay_loss",
    "wrpn_quantize",
    "write_idx",
]


def _config_text(config):
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return str(config)


def load_config(config):
    """Validated config as a dict with every field explicit."""
    return json.loads(_sinreq.normalize_config(_config_text(config)))


def train(config, output_dir=None):
    """Runs an experiment. `config` is a dict, a JSON string or a path."""
    return _sinreq.train(_config_text(config), None if output_dir is None else str(output_dir))


def evaluate(checkpoint, config):
    return json.loads(_sinreq.evaluate(str(checkpoint), _config_text(config)))


def paired(config, output_dir=None):
    return json.loads(_sinreq.paired(_config_text(config), None if output_dir is None else str(output_dir)))
