"""Shared pipeline configuration file.

One JSON file can drive every subcommand; command-line flags override
individual values. Referenced paths are checked at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .losskernel import LossWeights
from .patchsel import SelectionThresholds


@dataclass
class CampaignSettings:
    annotators: int = 6
    per_group: int = 3
    seed: int = 0


@dataclass
class PipelineConfig:
    originals: str | None = None
    enhanced: list[str] = field(default_factory=list)
    workdir: str | None = None
    profile: str = "single-stage-moderate"
    thresholds: SelectionThresholds = field(default_factory=SelectionThresholds)
    campaign: CampaignSettings = field(default_factory=CampaignSettings)
    loss_weights: LossWeights = field(default_factory=LossWeights)
    exponent_a: float = 0.75

    def validate(self) -> None:
        for label, p in (("originals", self.originals), ("workdir", self.workdir)):
            if p is not None and not Path(p).exists():
                raise FileNotFoundError(f"configured {label} path does not exist: {p}")
        for p in self.enhanced:
            if not Path(p).exists():
                raise FileNotFoundError(f"configured enhanced path does not exist: {p}")
        if self.enhanced and len(self.enhanced) != 4:
            raise ValueError(f"expected 4 enhanced directories, got {len(self.enhanced)}")
        self.loss_weights.validate()
        if not 0 < self.exponent_a:
            raise ValueError(f"exponent_a must be positive, got {self.exponent_a}")


def load_pipeline_config(path: str | Path) -> PipelineConfig:
    raw = json.loads(Path(path).read_text())
    paths = raw.get("paths", {})
    thresholds = raw.get("thresholds", {})
    campaign = raw.get("campaign", {})
    weights = raw.get("loss_weights")
    config = PipelineConfig(
        originals=paths.get("originals"),
        enhanced=list(paths.get("enhanced", [])),
        workdir=paths.get("workdir"),
        profile=raw.get("profile", "single-stage-moderate"),
        thresholds=SelectionThresholds(**thresholds),
        campaign=CampaignSettings(**campaign),
        loss_weights=LossWeights(*weights) if weights else LossWeights(),
        exponent_a=float(raw.get("exponent_a", 0.75)),
    )
    config.validate()
    return config
