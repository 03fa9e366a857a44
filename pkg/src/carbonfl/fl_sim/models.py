"""Flat-parameter classifiers with analytic cross-entropy gradients."""

from __future__ import annotations

import numpy as np


def _log_softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def cross_entropy(logits: np.ndarray, y: np.ndarray) -> float:
    return float(-_log_softmax(logits)[np.arange(y.size), y].mean())


def _dlogits(logits: np.ndarray, y: np.ndarray) -> np.ndarray:
    p = np.exp(_log_softmax(logits))
    p[np.arange(y.size), y] -= 1.0
    return p / y.size


class SoftmaxRegression:
    """Multinomial logistic regression; theta = [W (d x C) row-major, b (C)]."""

    arch = "softmax_regression"

    def __init__(self, feature_dim: int, num_classes: int):
        self.feature_dim = feature_dim
        self.num_classes = num_classes

    @property
    def num_params(self) -> int:
        return self.feature_dim * self.num_classes + self.num_classes

    def init(self, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(self.num_params)

    def _unpack(self, theta):
        d, C = self.feature_dim, self.num_classes
        return theta[: d * C].reshape(d, C), theta[d * C:]

    def logits(self, theta, X):
        W, b = self._unpack(theta)
        return X @ W + b

    def loss(self, theta, X, y) -> float:
        return cross_entropy(self.logits(theta, X), y)

    def loss_and_grad(self, theta, X, y):
        logits = self.logits(theta, X)
        d = _dlogits(logits, y)
        return cross_entropy(logits, y), np.concatenate([(X.T @ d).ravel(), d.sum(axis=0)])


class MLP1:
    """One hidden ReLU layer; theta = [W1 (d x H), b1 (H), W2 (H x C), b2 (C)]."""

    arch = "mlp1"

    def __init__(self, feature_dim: int, num_classes: int, hidden: int = 128):
        self.feature_dim = feature_dim
        self.num_classes = num_classes
        self.hidden = hidden

    @property
    def num_params(self) -> int:
        d, H, C = self.feature_dim, self.hidden, self.num_classes
        return d * H + H + H * C + C

    def init(self, rng: np.random.Generator) -> np.ndarray:
        d, H, C = self.feature_dim, self.hidden, self.num_classes
        W1 = rng.normal(0.0, np.sqrt(2.0 / d), size=(d, H))
        W2 = rng.normal(0.0, np.sqrt(1.0 / H), size=(H, C))
        return np.concatenate([W1.ravel(), np.zeros(H), W2.ravel(), np.zeros(C)])

    def _unpack(self, theta):
        d, H, C = self.feature_dim, self.hidden, self.num_classes
        i = 0
        W1 = theta[i:i + d * H].reshape(d, H); i += d * H
        b1 = theta[i:i + H]; i += H
        W2 = theta[i:i + H * C].reshape(H, C); i += H * C
        return W1, b1, W2, theta[i:]

    def _forward(self, theta, X):
        W1, b1, W2, b2 = self._unpack(theta)
        pre = X @ W1 + b1
        hid = np.maximum(pre, 0.0)
        return pre, hid, hid @ W2 + b2

    def logits(self, theta, X):
        return self._forward(theta, X)[2]

    def loss(self, theta, X, y) -> float:
        return cross_entropy(self.logits(theta, X), y)

    def loss_and_grad(self, theta, X, y):
        _, _, W2, _ = self._unpack(theta)
        pre, hid, logits = self._forward(theta, X)
        d_out = _dlogits(logits, y)
        d_hid = (d_out @ W2.T) * (pre > 0)
        grad = np.concatenate([
            (X.T @ d_hid).ravel(), d_hid.sum(axis=0), (hid.T @ d_out).ravel(), d_out.sum(axis=0),
        ])
        return cross_entropy(logits, y), grad


ARCHITECTURES = {"softmax_regression": SoftmaxRegression, "mlp1": MLP1}


def make_model(arch: str, feature_dim: int, num_classes: int):
    try:
        return ARCHITECTURES[arch](feature_dim, num_classes)
    except KeyError:
        raise ValueError(f"unknown architecture {arch!r}; choose from {sorted(ARCHITECTURES)}") from None
