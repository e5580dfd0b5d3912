"""Per-dataset step-size scale presets.

The scale constant c in the step size 1/(c*sqrt(t)) was grid-searched
once per benchmark dataset over {1, 10, 50, 100, 150}; the winning values
ship as a data file. Unknown datasets fall back to c = 1.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def step_preset_table() -> dict:
    text = resources.files("fesl").joinpath("data/step_presets.json").read_text()
    return {name: float(value) for name, value in json.loads(text).items()}


def step_scale_for(dataset_name: str, default: float = 1.0) -> float:
    return step_preset_table().get(dataset_name, default)
