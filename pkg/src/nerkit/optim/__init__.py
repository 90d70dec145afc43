from .adamw import AdamWHyper, OptimizerState, adamw_step
from .backprop import backward, eval_loss, finite_diff_grad
from .checkpoint import Checkpoint, checkpoint_bytes, load_checkpoint, save_checkpoint
from .train import EpochRecord, TrainConfig, TrainResult, evaluate, history_log, train

__all__ = [
    "AdamWHyper",
    "Checkpoint",
    "EpochRecord",
    "OptimizerState",
    "TrainConfig",
    "TrainResult",
    "adamw_step",
    "backward",
    "checkpoint_bytes",
    "eval_loss",
    "evaluate",
    "finite_diff_grad",
    "history_log",
    "load_checkpoint",
    "save_checkpoint",
    "train",
]
