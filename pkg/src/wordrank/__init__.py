"""Word-similarity relevance ranking over per-field positional indexes."""

from .bridge import RankedList, RankMethodConfig, default_config, load_config, loads_config, rank
from .idset import IdSet

__version__ = "0.1.0"

__all__ = [
    "IdSet",
    "RankMethodConfig",
    "RankedList",
    "default_config",
    "load_config",
    "loads_config",
    "rank",
]
