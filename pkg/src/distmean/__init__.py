"""One-sample mean-vector tests in a simulated distributed (k-machine) setting."""

from .cluster import CommLedger, ShardedDataset, ShardPolicy, comm_cost, run_protocol, shard
from .decision import Method, TestDecision
from .errors import DistMeanError

__version__ = "0.1.0"

__all__ = [
    "CommLedger",
    "DistMeanError",
    "Method",
    "ShardPolicy",
    "ShardedDataset",
    "TestDecision",
    "comm_cost",
    "run_protocol",
    "shard",
]
