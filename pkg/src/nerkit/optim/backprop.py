"""Reverse-mode gradients of the token-classification loss, and a
finite-difference checker for them."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..errors import NumericError
from ..model.encoder import ModelConfig, ModelParams, forward, gelu_grad
from ..model.loss import softmax_cross_entropy
from ..model.vocab import IGNORE, EncodedSentence


def _layer_norm_backward(dy, gain, cache):
    xhat, rstd = cache
    dgain = (dy * xhat).reshape(-1, xhat.shape[-1]).sum(0)
    dbias = dy.reshape(-1, dy.shape[-1]).sum(0)
    dxhat = dy * gain
    dx = rstd * (
        dxhat - dxhat.mean(-1, keepdims=True) - xhat * (dxhat * xhat).mean(-1, keepdims=True)
    )
    return dx, dgain, dbias


def _linear_backward(dy, x, w, grads, wname, bname):
    D_in = x.shape[-1]
    grads[wname] += x.reshape(-1, D_in).T @ dy.reshape(-1, dy.shape[-1])
    grads[bname] += dy.reshape(-1, dy.shape[-1]).sum(0)
    return dy @ w.T


def _layer_backward(dout, cache, params, prefix, config, grads):
    P = lambda k: params[prefix + k]  # noqa: E731
    G = prefix

    # out = LN2(h1 + f)
    dr2, dg, db = _layer_norm_backward(dout, P("ln2_g"), cache["ln2"])
    grads[G + "ln2_g"] += dg
    grads[G + "ln2_b"] += db
    dh1 = dr2.copy()
    df = dr2 if cache["drop_f"] is None else dr2 * cache["drop_f"]

    # f = gelu(h1 W1 + b1) W2 + b2
    dgl = _linear_backward(df, cache["g"], P("w2"), grads, G + "w2", G + "b2")
    du = dgl * gelu_grad(cache["u"])
    dh1 += _linear_backward(du, cache["h1"], P("w1"), grads, G + "w1", G + "b1")

    # h1 = LN1(x + a)
    dr1, dg, db = _layer_norm_backward(dh1, P("ln1_g"), cache["ln1"])
    grads[G + "ln1_g"] += dg
    grads[G + "ln1_b"] += db
    dx = dr1.copy()
    da = dr1 if cache["drop_a"] is None else dr1 * cache["drop_a"]

    # a = merge(attn v) Wo + bo
    dctx = _linear_backward(da, cache["ctx"], P("wo"), grads, G + "wo", G + "bo")
    B, T, D = dctx.shape
    H = config.n_heads
    dctx = dctx.reshape(B, T, H, D // H).transpose(0, 2, 1, 3)
    attn, q, k, v, scale = cache["attn"], cache["q"], cache["k"], cache["v"], cache["scale"]
    dattn = dctx @ v.transpose(0, 1, 3, 2)
    dv = attn.transpose(0, 1, 3, 2) @ dctx
    dscores = attn * (dattn - (dattn * attn).sum(-1, keepdims=True)) * scale
    dq = dscores @ k
    dk = dscores.transpose(0, 1, 3, 2) @ q

    x = cache["x"]
    for dproj, name in ((dq, "q"), (dk, "k"), (dv, "v")):
        dproj = dproj.transpose(0, 2, 1, 3).reshape(B, T, D)
        dx += _linear_backward(dproj, x, P("w" + name), grads, G + "w" + name, G + "b" + name)
    return dx


def backward(
    params: ModelParams,
    batch: Sequence[EncodedSentence],
    config: ModelConfig,
    train_mode: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[dict[str, np.ndarray], float]:
    """Gradients of the mean token cross-entropy for every parameter.

    With ``train_mode`` the dropout masks are drawn from ``rng``; otherwise
    the pass is deterministic.

    Raises:
        NumericError: if the loss is not finite.
    """
    logits, cache = forward(params, batch, config, train_mode, rng, return_cache=True)
    labels = cache["labels"]
    loss, probs = softmax_cross_entropy(logits, labels)
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")

    valid = labels != IGNORE
    n = valid.sum()
    dlogits = probs
    dlogits[valid, labels[valid]] -= 1.0
    dlogits[~valid] = 0.0
    dlogits /= dlogits.dtype.type(n)

    grads = {name: np.zeros_like(p) for name, p in params.items()}
    dhidden = _linear_backward(dlogits, cache["hidden"], params["head.w"], grads, "head.w", "head.b")
    if cache["drop"] is not None:
        dhidden = dhidden * cache["drop"]

    dx = dhidden
    for layer in reversed(range(config.n_layers)):
        dx = _layer_backward(dx, cache["layers"][layer], params, f"layers.{layer}.", config, grads)

    ids = cache["ids"]
    T = ids.shape[1]
    np.add.at(grads["tok_emb"], ids.reshape(-1), dx.reshape(-1, dx.shape[-1]))
    grads["pos_emb"][:T] += dx.sum(0)
    return grads, loss


def eval_loss(params: ModelParams, batch: Sequence[EncodedSentence], config: ModelConfig) -> float:
    logits, cache = forward(params, batch, config, return_cache=True)
    return softmax_cross_entropy(logits, cache["labels"])[0]


def finite_diff_grad(
    loss_fn: Callable[[ModelParams], float],
    params: ModelParams,
    h: float = 1e-3,
    coords: dict[str, Sequence[tuple[int, ...]]] | None = None,
) -> dict[str, dict[tuple[int, ...], float]]:
    """Central differences ``(f(p + h e_i) - f(p - h e_i)) / 2h``.

    ``coords`` picks, per tensor name, which flat-index tuples to probe;
    by default every coordinate of every tensor. Parameters are perturbed
    in place and restored afterwards.
    """
    if coords is None:
        coords = {name: list(np.ndindex(p.shape)) for name, p in params.items()}
    out: dict[str, dict[tuple[int, ...], float]] = {}
    for name, idxs in coords.items():
        tensor = params[name]
        out[name] = {}
        for idx in idxs:
            orig = tensor[idx]
            tensor[idx] = orig + h
            f_plus = loss_fn(params)
            tensor[idx] = orig - h
            f_minus = loss_fn(params)
            tensor[idx] = orig
            out[name][tuple(idx)] = (f_plus - f_minus) / (2 * h)
    return out
