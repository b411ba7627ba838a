"""Soft-margin SVM trained by sequential minimal optimization.

The dual problem is solved with maximal-violating-pair working-set
selection on a precomputed kernel matrix. Class probabilities come from a
sigmoid fitted to the decision values afterwards, because the sampling
formulas need calibrated probabilities and a margin is not one.
"""

from __future__ import annotations

import numpy as np

from trustlens.errors import ConvergenceError
from trustlens.learners.base import Classifier, as_matrix, check_training_set

_TAU = 1e-12


def _kernel(kind, gamma, A, B):
    if kind == "linear":
        return A @ B.T
    if kind == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            + np.sum(B * B, axis=1)[None, :]
            - 2.0 * (A @ B.T)
        )
        np.maximum(sq, 0.0, out=sq)
        return np.exp(-gamma * sq)
    raise ValueError(f"unknown kernel {kind!r}")


def _fit_sigmoid(decision, y, max_iter=100, min_step=1e-10, sigma=1e-12):
    """Newton fit of p = 1/(1+exp(A*f+B)) with smoothed 0/1 targets."""
    prior1 = float(np.sum(y == 1))
    prior0 = float(len(y) - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y == 1, hi, lo)
    A = 0.0
    B = np.log((prior0 + 1.0) / (prior1 + 1.0))

    def objective(a, b):
        fApB = decision * a + b
        pos = fApB >= 0
        vals = np.empty_like(fApB)
        vals[pos] = t[pos] * fApB[pos] + np.log1p(np.exp(-fApB[pos]))
        vals[~pos] = (t[~pos] - 1.0) * fApB[~pos] + np.log1p(np.exp(fApB[~pos]))
        return float(np.sum(vals))

    fval = objective(A, B)
    for _ in range(max_iter):
        fApB = decision * A + B
        pos = fApB >= 0
        p = np.empty_like(fApB)
        q = np.empty_like(fApB)
        ez = np.exp(-fApB[pos])
        p[pos] = ez / (1.0 + ez)
        q[pos] = 1.0 / (1.0 + ez)
        ez = np.exp(fApB[~pos])
        p[~pos] = 1.0 / (1.0 + ez)
        q[~pos] = ez / (1.0 + ez)
        d2 = p * q
        h11 = sigma + float(np.sum(decision * decision * d2))
        h22 = sigma + float(np.sum(d2))
        h21 = float(np.sum(decision * d2))
        d1 = t - p
        g1 = float(np.sum(decision * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * dA + g2 * dB
        step = 1.0
        while step >= min_step:
            newA, newB = A + step * dA, B + step * dB
            newf = objective(newA, newB)
            if newf < fval + 1e-4 * step * gd:
                A, B, fval = newA, newB, newf
                break
            step /= 2.0
        else:
            break  # line search failed; current point is good enough
    return float(A), float(B)


class SupportVectorMachine(Classifier):
    kind = "svm"

    def __init__(self, C=1.0, kernel="rbf", gamma="scale", tol=1e-3,
                 max_iter=200_000, seed=0):
        if C <= 0:
            raise ValueError("C must be positive")
        self.C = C
        self.kernel = kernel
        self.gamma = gamma
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        # fitted state
        self.sv_X = None
        self.sv_coef = None  # alpha_i * s_i for support vectors
        self.b = 0.0
        self.platt_a = 0.0
        self.platt_b = 0.0
        self.gamma_value = None
        self.duality_gap_ = None
        self.kkt_violation_ = None
        self.objective_ = None

    def _resolve_gamma(self, X):
        if self.kernel == "linear":
            return 0.0
        if self.gamma == "scale":
            var = float(X.var())
            return 1.0 / (X.shape[1] * var) if var > 0 else 1.0
        return float(self.gamma)

    def fit(self, X, y):
        X, y = check_training_set(X, y)
        n = X.shape[0]
        s = np.where(y == 1, 1.0, -1.0)
        self.gamma_value = self._resolve_gamma(X)
        K = _kernel(self.kernel, self.gamma_value, X, X)
        diag = np.diag(K).copy()

        alpha = np.zeros(n)
        grad = -np.ones(n)  # gradient of 1/2 aQa - sum(a) at a = 0
        C = self.C

        def q_col(i):
            return s * K[:, i] * s[i]

        converged = False
        for _ in range(self.max_iter):
            up = ((s > 0) & (alpha < C - _TAU)) | ((s < 0) & (alpha > _TAU))
            low = ((s < 0) & (alpha < C - _TAU)) | ((s > 0) & (alpha > _TAU))
            score = -s * grad
            m_up = np.where(up, score, -np.inf)
            m_low = np.where(low, score, np.inf)
            i = int(np.argmax(m_up))
            j = int(np.argmin(m_low))
            violation = m_up[i] - m_low[j]
            if violation <= self.tol:
                converged = True
                break

            old_i, old_j = alpha[i], alpha[j]
            # pair curvature ||phi_i - phi_j||^2, same in both sign branches
            if s[i] != s[j]:
                quad = diag[i] + diag[j] - 2.0 * K[i, j]
                if quad <= 0:
                    quad = _TAU
                delta = (-grad[i] - grad[j]) / quad
                diff = old_i - old_j
                ai, aj = old_i + delta, old_j + delta
                if diff > 0 and aj < 0:
                    aj, ai = 0.0, diff
                elif diff <= 0 and ai < 0:
                    ai, aj = 0.0, -diff
                if diff > 0 and ai > C:
                    ai, aj = C, C - diff
                elif diff <= 0 and aj > C:
                    aj, ai = C, C + diff
            else:
                quad = diag[i] + diag[j] - 2.0 * K[i, j]
                if quad <= 0:
                    quad = _TAU
                delta = (grad[i] - grad[j]) / quad
                total = old_i + old_j
                ai, aj = old_i - delta, old_j + delta
                if total > C and ai > C:
                    ai, aj = C, total - C
                elif total <= C and aj < 0:
                    aj, ai = 0.0, total
                if total > C and aj > C:
                    aj, ai = C, total - C
                elif total <= C and ai < 0:
                    ai, aj = 0.0, total

            d_i, d_j = ai - old_i, aj - old_j
            alpha[i], alpha[j] = ai, aj
            grad += q_col(i) * d_i + q_col(j) * d_j

        # offset from free support vectors, else the violating-pair midpoint
        score = -s * grad
        free = (alpha > _TAU) & (alpha < C - _TAU)
        if free.any():
            self.b = float(np.mean(score[free]))
        else:
            up = ((s > 0) & (alpha < C - _TAU)) | ((s < 0) & (alpha > _TAU))
            low = ((s < 0) & (alpha < C - _TAU)) | ((s > 0) & (alpha > _TAU))
            hi = np.max(np.where(up, score, -np.inf))
            lo = np.min(np.where(low, score, np.inf))
            self.b = float((hi + lo) / 2.0)

        coef = alpha * s
        decision_all = K @ coef + self.b
        quad_term = float(alpha @ (grad + 1.0))  # grad + 1 = Q @ alpha
        dual = float(alpha.sum()) - 0.5 * quad_term
        hinge = np.maximum(0.0, 1.0 - s * decision_all)
        primal = 0.5 * quad_term + C * float(hinge.sum())
        self.objective_ = dual
        self.duality_gap_ = primal - dual
        up = ((s > 0) & (alpha < C - _TAU)) | ((s < 0) & (alpha > _TAU))
        low = ((s < 0) & (alpha < C - _TAU)) | ((s > 0) & (alpha > _TAU))
        score = -s * grad
        if up.any() and low.any():
            self.kkt_violation_ = float(
                np.max(np.where(up, score, -np.inf))
                - np.min(np.where(low, score, np.inf)))
        else:
            self.kkt_violation_ = 0.0

        if not converged:
            raise ConvergenceError(
                f"no convergence within {self.max_iter} iterations "
                f"(duality gap {self.duality_gap_:.3e})",
                duality_gap=self.duality_gap_,
            )

        keep = alpha > _TAU
        self.sv_X = X[keep].copy()
        self.sv_coef = coef[keep].copy()
        self.platt_a, self.platt_b = _fit_sigmoid(decision_all, y)
        return self

    def decision_function(self, X):
        if self.sv_X is None:
            raise ValueError("model not fitted")
        X = as_matrix(X)
        if len(self.sv_coef) == 0:
            return np.full(X.shape[0], self.b)
        K = _kernel(self.kernel, self.gamma_value, X, self.sv_X)
        return K @ self.sv_coef + self.b

    def predict_proba(self, X):
        f = self.decision_function(X)
        z = self.platt_a * f + self.platt_b
        p1 = np.empty_like(z)
        pos = z >= 0
        ez = np.exp(-z[pos])
        p1[pos] = ez / (1.0 + ez)
        p1[~pos] = 1.0 / (1.0 + np.exp(z[~pos]))
        return np.column_stack([1.0 - p1, p1])

    def get_params(self):
        return {"C": self.C, "kernel": self.kernel, "gamma": self.gamma,
                "tol": self.tol, "max_iter": self.max_iter, "seed": self.seed}

    def to_dict(self):
        return {
            "kind": self.kind,
            "params": self.get_params(),
            "state": {
                "sv_X": self.sv_X.tolist() if self.sv_X is not None else None,
                "sv_coef": self.sv_coef.tolist() if self.sv_coef is not None else None,
                "b": self.b,
                "platt_a": self.platt_a,
                "platt_b": self.platt_b,
                "gamma_value": self.gamma_value,
            },
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(**d["params"])
        st = d["state"]
        if st["sv_X"] is not None:
            model.sv_X = np.array(st["sv_X"], dtype=float).reshape(
                len(st["sv_X"]), -1)
            model.sv_coef = np.array(st["sv_coef"], dtype=float)
        model.b = st["b"]
        model.platt_a = st["platt_a"]
        model.platt_b = st["platt_b"]
        model.gamma_value = st["gamma_value"]
        return model


def train_svm(X, y, C=1.0, kernel="rbf", gamma="scale", tol=1e-3,
              max_iter=200_000, seed=0):
    return SupportVectorMachine(C=C, kernel=kernel, gamma=gamma, tol=tol,
                                max_iter=max_iter, seed=seed).fit(X, y)
