"""Multi-layer perceptrons with hand-written backpropagation, plus Adam."""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np


@dataclass
class MlpCache:
    inputs: List[np.ndarray]
    hidden: List[np.ndarray]


class Mlp:
    """tanh hidden layers and a linear output layer.

    Weights are stored (fan_in, fan_out) so a batch forward pass is x @ W + b.
    """

    def __init__(self, sizes: Sequence[int], weights: List[np.ndarray] | None = None, biases: List[np.ndarray] | None = None):
        if len(sizes) < 2:
            raise ValueError(f"an MLP needs input and output sizes, got {list(sizes)}")
        self.sizes = [int(s) for s in sizes]
        self.weights = weights if weights is not None else [np.zeros((a, b)) for a, b in zip(self.sizes[:-1], self.sizes[1:])]
        self.biases = biases if biases is not None else [np.zeros(b) for b in self.sizes[1:]]

    @classmethod
    def initialized(cls, sizes: Sequence[int], rng: np.random.Generator, output_gain: float = 1.0) -> "Mlp":
        """Variance-scaled normal init (std 1/sqrt(fan_in)), output layer scaled by output_gain."""
        net = cls(sizes)
        last = len(net.weights) - 1
        for i, (fan_in, fan_out) in enumerate(zip(net.sizes[:-1], net.sizes[1:])):
            gain = output_gain if i == last else 1.0
            net.weights[i] = gain * rng.standard_normal((fan_in, fan_out)) / np.sqrt(fan_in)
        return net

    @property
    def input_dim(self) -> int:
        return self.sizes[0]

    @property
    def output_dim(self) -> int:
        return self.sizes[-1]

    def parameters(self) -> List[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend([w, b])
        return out

    def copy(self) -> "Mlp":
        return Mlp(self.sizes, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, MlpCache]:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cache = MlpCache(inputs=[], hidden=[])
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            cache.inputs.append(x)
            z = x @ w + b
            if i == last:
                x = z
            else:
                x = np.tanh(z)
                cache.hidden.append(x)
        return x, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache: MlpCache, grad_out: np.ndarray) -> List[np.ndarray]:
        """Gradients of the loss w.r.t. parameters(), given dLoss/dOutput of the batch."""
        grads: List[np.ndarray] = []
        delta = np.atleast_2d(grad_out)
        for i in reversed(range(len(self.weights))):
            x = cache.inputs[i]
            grads.append(delta.sum(axis=0))
            grads.append(x.T @ delta)
            if i > 0:
                delta = (delta @ self.weights[i].T) * (1.0 - cache.hidden[i - 1] ** 2)
        # appended as (b, W) from the output layer down
        grads.reverse()
        return grads


def global_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def clip_by_global_norm(grads: Sequence[np.ndarray], max_norm: float) -> Tuple[List[np.ndarray], float]:
    norm = global_norm(grads)
    if max_norm <= 0.0 or norm <= max_norm:
        return list(grads), norm
    scale = max_norm / (norm + 1e-12)
    return [g * scale for g in grads], norm


class Adam:
    """Adam over a fixed, ordered list of parameter arrays (updated in place)."""

    def __init__(self, learning_rate: float = 3e-4, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m: List[np.ndarray] = []
        self.v: List[np.ndarray] = []

    def step(self, params: Sequence[np.ndarray], grads: Sequence[np.ndarray]) -> None:
        if not self.m:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        correction1 = 1.0 - self.beta1 ** self.t
        correction2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + self.eps)
