"""Finite-difference validation of the hand-rolled backward pass."""
from __future__ import annotations

import numpy as np

from .model import StreamModel, backward_batch, forward_batch

# relative-error denominator floor: below this scale the finite-difference
# estimate itself is dominated by truncation noise
_DENOM_FLOOR = 1e-6


def _consensus_loss(model: StreamModel, x: np.ndarray, label: int) -> float:
    probs = forward_batch(model, x)
    consensus = probs.mean(axis=0)
    return float(-np.log(max(consensus[label], 1e-300)))


def _analytic_grads(model: StreamModel, x: np.ndarray, label: int):
    from .train import consensus_logit_grad

    probs, cache = forward_batch(model, x, want_cache=True)
    return backward_batch(model, cache, consensus_logit_grad(probs, label))


def gradient_check(
    model: StreamModel,
    x: np.ndarray,
    label: int,
    n_coords: int = 120,
    h: float = 1e-4,
    rng: np.random.Generator | None = None,
    grad_override: dict[str, np.ndarray] | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients
    over ``n_coords`` randomly sampled parameter coordinates.

    ``grad_override`` substitutes a (deliberately wrong) analytic gradient;
    used by the negative-control test.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if x.ndim == 3:
        x = x[None]
    analytic = grad_override or _analytic_grads(model, x, label)
    params = model.params()
    names = list(params)
    sizes = np.array([params[n].size for n in names])
    total = sizes.sum()
    coords = rng.choice(total, size=min(n_coords, total), replace=False)

    worst = 0.0
    for coord in coords:
        which = int(np.searchsorted(np.cumsum(sizes), coord, side="right"))
        name = names[which]
        flat_idx = coord - (np.cumsum(sizes)[which] - sizes[which])
        p = params[name].reshape(-1)
        orig = p[flat_idx]
        p[flat_idx] = orig + h
        loss_plus = _consensus_loss(model, x, label)
        p[flat_idx] = orig - h
        loss_minus = _consensus_loss(model, x, label)
        p[flat_idx] = orig
        numeric = (loss_plus - loss_minus) / (2.0 * h)
        ana = analytic[name].reshape(-1)[flat_idx]
        denom = max(abs(ana), abs(numeric), _DENOM_FLOOR)
        worst = max(worst, abs(ana - numeric) / denom)
    return worst
