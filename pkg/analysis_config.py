"""
Analysis configuration for pgaut.

Caps and knobs live in one pydantic model. Values are layered: model
defaults, then an optional JSON file, then PGAUT_* environment variables,
then whatever the CLI passes explicitly.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_FILE = "pgaut_config.json"
ENV_PREFIX = "PGAUT_"


class AnalysisConfig(BaseModel):
    """Caps and knobs for one analysis run."""

    max_order: int = Field(default=4096, ge=1, description="Full-analysis order cap")
    hard_order_limit: int = Field(default=20000, ge=1, description="Element-table hard limit")
    rank_exponent_cap: int = Field(default=5, ge=1, description="Exact rank only for |H| <= p^cap")
    brute_force_full_max_order: int = Field(default=1024, ge=1)
    brute_force_full_max_d: int = Field(default=4, ge=1)
    max_search_candidates: int = Field(default=200000, ge=1)
    exhaustive_pair_max_order: int = Field(default=4096, ge=1)
    identity_sample_size: int = Field(default=10000, ge=1)
    identity_exhaustive_max_order: int = Field(default=81, ge=1)
    random_seed: int = 20240521
    oracle_max_module_order: int = Field(default=27, ge=1)
    oracle_max_d: int = Field(default=3, ge=1)
    workers: int = Field(default=4, ge=1, le=64)

    def caps(self) -> Dict[str, int]:
        """Caps recorded in certificate transcripts."""
        return {
            "max_order": self.max_order,
            "hard_order_limit": self.hard_order_limit,
            "rank_exponent_cap": self.rank_exponent_cap,
            "brute_force_full_max_order": self.brute_force_full_max_order,
            "brute_force_full_max_d": self.brute_force_full_max_d,
            "max_search_candidates": self.max_search_candidates,
            "exhaustive_pair_max_order": self.exhaustive_pair_max_order,
        }


def _env_overrides() -> Dict[str, Any]:
    overrides: Dict[str, Any] = {}
    for name in AnalysisConfig.model_fields:
        raw = os.getenv(f"{ENV_PREFIX}{name.upper()}")
        if raw is not None:
            overrides[name] = int(raw)
    return overrides


def load_config(path: Optional[str] = None, **explicit: Any) -> AnalysisConfig:
    """Build the effective configuration.

    Args:
        path: JSON file to read; defaults to pgaut_config.json when present.
        **explicit: CLI values; None entries are ignored.

    Returns:
        Validated AnalysisConfig.
    """
    data: Dict[str, Any] = {}

    config_path = Path(path) if path else Path(DEFAULT_CONFIG_FILE)
    if config_path.exists():
        with open(config_path, "r", encoding="utf-8") as f:
            file_data = json.load(f)
        data.update(file_data.get("analysis", file_data))
        logger.debug("Loaded configuration from %s", config_path)
    elif path:
        raise FileNotFoundError(f"Configuration file not found: {path}")

    data.update(_env_overrides())
    data.update({k: v for k, v in explicit.items() if v is not None})
    return AnalysisConfig(**data)
