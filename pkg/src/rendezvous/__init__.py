"""Consistent channel hopping for the multichannel rendezvous problem.

Channel selectors, permutation schedules, a K-user synchronous/asynchronous
rendezvous simulator, closed-form ETTR/MTTR oracles and a Monte Carlo
experiment harness.
"""

from rendezvous.errors import (
    DegenerateChain,
    InvalidInput,
    InvalidScenario,
    InvalidScore,
    RendezvousError,
    ResourceLimit,
    Unsupported,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateChain",
    "InvalidInput",
    "InvalidScenario",
    "InvalidScore",
    "RendezvousError",
    "ResourceLimit",
    "Unsupported",
]
