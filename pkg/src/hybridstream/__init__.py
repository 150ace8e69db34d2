"""Jointly trained deep hybrid semi-supervised models over evolving data
streams: Boltzmann (DHBM) and denoising-autoencoder (DHDA) variants with a
shared recognition network, three gradient estimators, stream generators
with concept drift, and prequential evaluation.
"""

from .dhbm import HybridParams, MeanFieldState
from .evaluation import PrequentialState
from .streams import StreamConfig, make_stream
from .trainer import Trainer, TrainerConfig

__version__ = "0.1.0"

__all__ = [
    "HybridParams",
    "MeanFieldState",
    "PrequentialState",
    "StreamConfig",
    "make_stream",
    "Trainer",
    "TrainerConfig",
    "__version__",
]
