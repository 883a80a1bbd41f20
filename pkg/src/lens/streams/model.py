"""Tiny trainable stream classifier: conv -> tanh -> global average pool ->
affine -> tanh -> affine -> softmax over the four action classes.

Weights live in plain float64 arrays and the backward pass is hand-rolled;
`gradcheck` validates it against finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

N_CLASSES = 4

# fixed gain applied after the global average pool: scenes are sparse (a few
# bright actors on a dark field), so raw pooled responses have a dynamic
# range of ~1/50 of the activation range; without batch normalization the
# affine layers need O(1) inputs to train in a reasonable number of epochs
POOL_GAIN = 128.0


class StreamKind(str, Enum):
    SPATIAL = "spatial"
    TEMPORAL = "temporal"


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def he_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=shape)


@dataclass
class StreamModel:
    kind: StreamKind
    input_channels: int
    conv_w: np.ndarray  # [F, C, k, k]
    conv_b: np.ndarray  # [F]
    fc1_w: np.ndarray   # [H, F]
    fc1_b: np.ndarray   # [H]
    fc2_w: np.ndarray   # [4, H]
    fc2_b: np.ndarray   # [4]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.conv_w.shape[1] != self.input_channels:
            raise ValueError("conv input channels do not match input_channels")
        if self.fc2_w.shape[0] != N_CLASSES:
            raise ValueError("output dimension must be 4")

    @property
    def kernel_size(self) -> int:
        return self.conv_w.shape[2]

    @property
    def n_filters(self) -> int:
        return self.conv_w.shape[0]

    def params(self) -> dict[str, np.ndarray]:
        return {
            "conv_w": self.conv_w,
            "conv_b": self.conv_b,
            "fc1_w": self.fc1_w,
            "fc1_b": self.fc1_b,
            "fc2_w": self.fc2_w,
            "fc2_b": self.fc2_b,
        }

    def n_params(self) -> int:
        return sum(p.size for p in self.params().values())


def new_model(
    kind: StreamKind,
    input_channels: int,
    n_filters: int = 16,
    hidden: int = 16,
    kernel_size: int = 3,
    seed: int = 0,
    conv_bias: float = 0.0,
) -> StreamModel:
    """Gaussian-initialized model, std = sqrt(2 / fan_in) per layer.

    Conv filters are made zero-mean (DC-free) so pooled responses ignore
    the global background level of the dark scenes. A nonzero ``conv_bias``
    puts the activations on a saturation shoulder, letting pooled features
    encode response magnitude (useful when cue signs vary per clip, as for
    motion direction).
    """
    rng = np.random.default_rng(seed)
    k = kernel_size
    conv_w = he_init(rng, (n_filters, input_channels, k, k), input_channels * k * k)
    conv_w -= conv_w.mean(axis=(2, 3), keepdims=True)
    return StreamModel(
        kind=kind,
        input_channels=input_channels,
        conv_w=conv_w,
        conv_b=np.full(n_filters, float(conv_bias)),
        fc1_w=he_init(rng, (hidden, n_filters), n_filters),
        fc1_b=np.zeros(hidden),
        fc2_w=he_init(rng, (N_CLASSES, hidden), hidden),
        fc2_b=np.zeros(N_CLASSES),
    )


def zero_model(kind: StreamKind, input_channels: int, n_filters: int = 8,
               hidden: int = 16, kernel_size: int = 3) -> StreamModel:
    m = new_model(kind, input_channels, n_filters, hidden, kernel_size)
    for p in m.params().values():
        p[...] = 0.0
    return m


def _im2col(x: np.ndarray, k: int) -> np.ndarray:
    """[N, C, H, W] -> [N, P, C*k*k] patch matrix (valid convolution)."""
    windows = np.lib.stride_tricks.sliding_window_view(x, (k, k), axis=(2, 3))
    n, c, oh, ow, _, _ = windows.shape
    return (
        windows.transpose(0, 2, 3, 1, 4, 5).reshape(n, oh * ow, c * k * k),
        (oh, ow),
    )


def forward_batch(model: StreamModel, x: np.ndarray, want_cache: bool = False):
    """Softmax class probabilities for a [N, C, H, W] input batch."""
    if x.ndim != 4:
        raise ValueError("expected a [N, C, H, W] batch")
    if x.shape[1] != model.input_channels:
        raise ValueError(
            f"{model.kind.value} stream expects {model.input_channels} channels, "
            f"got {x.shape[1]}"
        )
    k = model.kernel_size
    cols, (oh, ow) = _im2col(np.asarray(x, dtype=np.float64), k)
    w_mat = model.conv_w.reshape(model.n_filters, -1)
    conv = cols @ w_mat.T + model.conv_b  # [N, P, F]
    a1 = np.tanh(conv)
    g = a1.mean(axis=1) * POOL_GAIN  # global average pool -> [N, F]
    # the head is linear: a bounded activation here saturates on the common
    # background component of the pooled features and freezes training
    a2 = g @ model.fc1_w.T + model.fc1_b
    z2 = a2 @ model.fc2_w.T + model.fc2_b
    probs = softmax(z2)
    if not np.isfinite(probs).all():
        raise FloatingPointError("non-finite activations in stream forward pass")
    if want_cache:
        return probs, {"cols": cols, "a1": a1, "g": g, "a2": a2, "n_pos": oh * ow}
    return probs


def forward(model: StreamModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a single [C, H, W] input."""
    return forward_batch(model, x[None])[0]


def backward_batch(
    model: StreamModel, cache: dict, dprobs_dz2: np.ndarray
) -> dict[str, np.ndarray]:
    """Gradients of a scalar loss given dL/dz2 (softmax logits) per sample."""
    dz2 = dprobs_dz2  # [N, 4]
    grads = {}
    grads["fc2_w"] = dz2.T @ cache["a2"]
    grads["fc2_b"] = dz2.sum(axis=0)
    dz1 = dz2 @ model.fc2_w
    grads["fc1_w"] = dz1.T @ cache["g"]
    grads["fc1_b"] = dz1.sum(axis=0)
    dg = dz1 @ model.fc1_w  # [N, F]
    dconv = (dg[:, None, :] * (POOL_GAIN / cache["n_pos"])) * (1.0 - cache["a1"] ** 2)
    grads["conv_w"] = np.einsum("npf,npc->fc", dconv, cache["cols"]).reshape(
        model.conv_w.shape
    )
    grads["conv_b"] = dconv.sum(axis=(0, 1))
    return grads


def softmax_backward(probs: np.ndarray, dprobs: np.ndarray) -> np.ndarray:
    """dL/dz given dL/dp for a softmax layer (rows are samples)."""
    dot = (probs * dprobs).sum(axis=-1, keepdims=True)
    return probs * (dprobs - dot)
