from __future__ import annotations

import numpy as np

from .vocab import IGNORE


def log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(-1, keepdims=True))


def softmax_cross_entropy(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean token cross-entropy over positions whose label is not IGNORE.

    Returns ``(loss, probs)`` where ``probs`` is the softmax over the last
    axis at every position, ignored ones included.
    """
    valid = labels != IGNORE
    n = int(valid.sum())
    if n == 0:
        raise ValueError("every position is IGNORE; loss undefined")
    logp = log_softmax(logits)
    picked = np.take_along_axis(logp[valid], labels[valid][:, None], axis=-1)
    return float(-picked.sum() / n), np.exp(logp)
