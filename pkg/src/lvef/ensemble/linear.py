"""Standardized linear members (Lasso, Ridge) and the k-nearest-neighbour regressor."""
from __future__ import annotations

import numpy as np

from ..errors import SingularDesign


class Standardizer:
    """Per-feature z-scoring; zero-variance features get scale 1."""

    def __init__(self, mean, scale):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.scale = np.asarray(scale, dtype=np.float64)

    @classmethod
    def fit(cls, X):
        X = np.asarray(X, dtype=np.float64)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        return cls(X.mean(axis=0), scale)

    def transform(self, X):
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["mean"], doc["scale"])


class LinearModel:
    """``y = intercept + z @ coef`` with ``z`` the standardized features."""

    def __init__(self, kind, coef, intercept, standardizer, lam, objective_trace=()):
        self.kind = kind
        self.coef = np.asarray(coef, dtype=np.float64)
        self.intercept = float(intercept)
        self.standardizer = standardizer
        self.lam = float(lam)
        self.objective_trace = list(objective_trace)

    def predict(self, X):
        return self.standardizer.transform(X) @ self.coef + self.intercept

    def raw_coefficients(self):
        """Slope and intercept expressed on the original feature scale."""
        slope = self.coef / self.standardizer.scale
        return slope, self.intercept - float(slope @ self.standardizer.mean)

    def to_dict(self):
        return {"kind": self.kind, "coef": self.coef.tolist(), "intercept": self.intercept,
                "lambda": self.lam, "standardizer": self.standardizer.to_dict()}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["kind"], doc["coef"], doc["intercept"], Standardizer.from_dict(doc["standardizer"]),
                   doc["lambda"])


def _soft(v, t):
    if v > t:
        return v - t
    if v < -t:
        return v + t
    return 0.0


def lasso_objective(Z, yc, beta, lam):
    r = yc - Z @ beta
    return 0.5 * float(r @ r) + lam * float(np.abs(beta).sum())


def fit_lasso(X, y, lam, standardizer=None, tol=1e-6, max_sweeps=10_000):
    """Cyclic coordinate descent on 0.5*||y - Zb||^2 + lam*||b||_1 (centred y, standardized Z).

    Coordinate updates use the Gram matrix ``Z.T @ Z`` and ``Z.T @ y`` (covariance
    updates), so a sweep costs O(p^2) regardless of the sample count. Stops when
    the largest coefficient change in a sweep drops below ``tol``.
    """
    std = standardizer or Standardizer.fit(X)
    Z = std.transform(X)
    y = np.asarray(y, dtype=np.float64)
    ybar = float(y.mean())
    yc = y - ybar
    p = Z.shape[1]
    G = (Z.T @ Z).tolist()
    c = (Z.T @ yc).tolist()
    beta = [0.0] * p
    trace = [lasso_objective(Z, yc, np.zeros(p), lam)]
    for _ in range(max_sweeps):
        max_step = 0.0
        for j in range(p):
            gjj = G[j][j]
            if gjj == 0:
                continue
            old = beta[j]
            rho = c[j] - sum(G[j][k] * beta[k] for k in range(p) if k != j)
            new = _soft(rho, lam) / gjj
            if new != old:
                beta[j] = new
                max_step = max(max_step, abs(new - old))
        trace.append(lasso_objective(Z, yc, np.array(beta), lam))
        if max_step < tol:
            break
    return LinearModel("LASSO", beta, ybar, std, lam, trace)


def fit_ridge(X, y, lam, standardizer=None):
    """Closed-form ridge on standardized features; the intercept is not penalized."""
    std = standardizer or Standardizer.fit(X)
    Z = std.transform(X)
    y = np.asarray(y, dtype=np.float64)
    ybar = float(y.mean())
    A = Z.T @ Z + lam * np.eye(Z.shape[1])
    if np.linalg.matrix_rank(A) < A.shape[0]:
        raise SingularDesign(f"ridge normal equations are singular (lambda={lam})")
    beta = np.linalg.solve(A, Z.T @ (y - ybar))
    return LinearModel("RIDGE", beta, ybar, std, lam)


class KNNRegressor:
    kind = "KNN"

    def __init__(self, Z, y, k, standardizer):
        self.Z = np.asarray(Z, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.k = int(k)
        self.standardizer = standardizer

    @classmethod
    def fit(cls, X, y, k=5, standardizer=None):
        std = standardizer or Standardizer.fit(X)
        return cls(std.transform(X), y, k, std)

    def predict(self, X):
        Q = self.standardizer.transform(X)
        k = min(self.k, self.y.size)
        out = np.empty(Q.shape[0])
        for i, q in enumerate(Q):
            d = ((self.Z - q) ** 2).sum(axis=1)
            nearest = np.argsort(d, kind="stable")[:k]
            out[i] = self.y[nearest].mean()
        return out

    def to_dict(self):
        return {"kind": self.kind, "k": self.k, "points": self.Z.tolist(), "targets": self.y.tolist(),
                "standardizer": self.standardizer.to_dict()}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc["points"], doc["targets"], doc["k"], Standardizer.from_dict(doc["standardizer"]))
