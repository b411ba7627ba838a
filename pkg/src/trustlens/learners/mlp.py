"""Feed-forward network with softmax output and cross-entropy loss,
trained by mini-batch gradient descent."""

from __future__ import annotations

import numpy as np

from trustlens.learners.base import Classifier, as_matrix, check_training_set

ACTIVATIONS = ("tanh", "relu", "logistic")


def _act(name, z):
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(0.0, z)
    if name == "logistic":
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    raise ValueError(f"unknown activation {name!r}")


def _act_grad(name, a):
    # derivative expressed through the activation value
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (a > 0).astype(a.dtype)
    if name == "logistic":
        return a * (1.0 - a)
    raise ValueError(f"unknown activation {name!r}")


def _softmax(logits):
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


class MultilayerPerceptron(Classifier):
    kind = "mlp"

    def __init__(self, hidden=(50,), activation="tanh", epochs=200, lr=0.05,
                 batch_size=32, seed=0):
        hidden = tuple(int(h) for h in hidden)
        if any(h < 1 for h in hidden):
            raise ValueError("hidden layer widths must be positive")
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.hidden = hidden
        self.activation = activation
        self.epochs = epochs
        self.lr = lr
        self.batch_size = batch_size
        self.seed = seed
        self.weights = []  # [(W, b)] per layer, output last

    def _init_weights(self, d, rng):
        sizes = (d,) + self.hidden + (2,)
        self.weights = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            W = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            b = np.zeros(fan_out)
            self.weights.append((W, b))

    def _forward(self, X):
        """All layer activations, input first, softmax last."""
        acts = [X]
        a = X
        for W, b in self.weights[:-1]:
            a = _act(self.activation, a @ W + b)
            acts.append(a)
        W, b = self.weights[-1]
        acts.append(_softmax(a @ W + b))
        return acts

    def loss_gradients(self, X, y):
        """(mean cross-entropy, per-layer (dW, db)) at the current weights."""
        X = as_matrix(X)
        y = np.asarray(y, dtype=int)
        n = X.shape[0]
        acts = self._forward(X)
        probs = acts[-1]
        eps = 1e-12
        loss = float(-np.mean(np.log(probs[np.arange(n), y] + eps)))

        grads = [None] * len(self.weights)
        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        for layer in range(len(self.weights) - 1, -1, -1):
            a_prev = acts[layer]
            grads[layer] = (a_prev.T @ delta, delta.sum(axis=0))
            if layer > 0:
                W, _ = self.weights[layer]
                delta = (delta @ W.T) * _act_grad(self.activation, acts[layer])
        return loss, grads

    def loss(self, X, y):
        X = as_matrix(X)
        y = np.asarray(y, dtype=int)
        probs = self._forward(X)[-1]
        return float(-np.mean(np.log(probs[np.arange(len(y)), y] + 1e-12)))

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        rng = np.random.default_rng(self.seed)
        self._init_weights(X.shape[1], rng)
        n = X.shape[0]
        for _ in range(self.epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.batch_size):
                batch = order[start:start + self.batch_size]
                loss, grads = self.loss_gradients(X[batch], y[batch])
                if not np.isfinite(loss):
                    raise ValueError("diverged; lower lr")
                self.weights = [
                    (W - self.lr * dW, b - self.lr * db)
                    for (W, b), (dW, db) in zip(self.weights, grads)
                ]
        return self

    def predict_proba(self, X):
        if not self.weights:
            raise ValueError("model not fitted")
        return self._forward(as_matrix(X))[-1]

    def get_params(self):
        return {"hidden": list(self.hidden), "activation": self.activation,
                "epochs": self.epochs, "lr": self.lr,
                "batch_size": self.batch_size, "seed": self.seed}

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": self.get_params(),
            "weights": [[W.tolist(), b.tolist()] for W, b in self.weights],
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(**d["params"])
        model.weights = [
            (np.array(W, dtype=float), np.array(b, dtype=float))
            for W, b in d["weights"]
        ]
        return model


def train_mlp(X, y, hidden=(50,), activation="tanh", epochs=200, lr=0.05,
              batch_size=32, seed=0):
    # epochs = 0 yields a valid, merely uninformative classifier
    return MultilayerPerceptron(hidden=hidden, activation=activation,
                                epochs=epochs, lr=lr, batch_size=batch_size,
                                seed=seed).fit(X, y)
