"""Heat-equation candidate trainer exporting portable weight JSON checkpoints."""

from .train import CandidateNet, TrainConfig, TrainingDiverged, TrainResult, forward_values, train

__version__ = "0.1.0"
