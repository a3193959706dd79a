"""Feed-forward networks with manual backpropagation.

Rectified-linear hidden layers, linear output, Glorot-uniform
initialization. Forward passes return a cache that the backward pass
consumes, yielding exact analytic gradients for every weight and bias and
the gradient with respect to the input (needed because the AR input is
itself a function of the local component parameters).
"""

from __future__ import annotations

import numpy as np

from ..errors import ModelError


def glorot_uniform(fan_in: int, fan_out: int, rng: np.random.Generator) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


class MLP:
    """Layers sizes[0] -> sizes[1] -> ... -> sizes[-1]."""

    def __init__(self, sizes: tuple[int, ...], rng: np.random.Generator | None = None):
        if len(sizes) < 2:
            raise ModelError("an MLP needs at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            if rng is None:
                self.weights.append(np.zeros((fan_in, fan_out)))
            else:
                self.weights.append(glorot_uniform(fan_in, fan_out, rng))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        """Return (output, cache); x has shape (batch, sizes[0])."""
        if x.shape[-1] != self.sizes[0]:
            raise ModelError(f"expected input width {self.sizes[0]}, got {x.shape[-1]}")
        cache = [x]
        h = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == self.n_layers - 1 else np.maximum(z, 0.0)
            cache.append(h)
        return h, cache

    def backward(
        self, cache: list[np.ndarray], dout: np.ndarray
    ) -> tuple[np.ndarray, list[np.ndarray], list[np.ndarray]]:
        """Return (dx, dweights, dbiases) for the batch in ``cache``."""
        d_weights = [np.empty(0)] * self.n_layers
        d_biases = [np.empty(0)] * self.n_layers
        grad = dout
        for i in range(self.n_layers - 1, -1, -1):
            if i != self.n_layers - 1:
                grad = grad * (cache[i + 1] > 0)  # ReLU mask on this layer's output
            d_weights[i] = cache[i].T @ grad
            d_biases[i] = grad.sum(axis=0)
            grad = grad @ self.weights[i].T
        return grad, d_weights, d_biases

    def parameters(self) -> list[np.ndarray]:
        return self.weights + self.biases

    def copy(self) -> "MLP":
        clone = MLP(self.sizes)
        clone.weights = [w.copy() for w in self.weights]
        clone.biases = [b.copy() for b in self.biases]
        return clone

    def to_dict(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MLP":
        net = cls(tuple(d["sizes"]))
        net.weights = [np.asarray(w, dtype=np.float64) for w in d["weights"]]
        net.biases = [np.asarray(b, dtype=np.float64) for b in d["biases"]]
        return net
