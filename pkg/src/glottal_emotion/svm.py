"""Binary soft-margin SVM with a polynomial kernel, trained by SMO.

The dual is solved with pairwise updates on the maximal violating pair.
Ties in pair selection go to the lowest index, so training is fully
deterministic for a given row order.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError

_TAU = 1e-12


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    degree: int = 1
    coef0: float = 0.0
    tol: float = 1e-3
    max_passes: int = 200

    def __post_init__(self):
        if not self.c > 0:
            raise ParameterError(f"SVM c must be > 0, got {self.c}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ParameterError(f"SVM degree must be a positive integer, got {self.degree}")
        if not self.tol > 0:
            raise ParameterError(f"SVM tol must be > 0, got {self.tol}")
        if self.max_passes < 1:
            raise ParameterError(f"SVM max_passes must be >= 1, got {self.max_passes}")


def poly_kernel(u: np.ndarray, v: np.ndarray, degree: int = 1, coef0: float = 0.0) -> np.ndarray:
    """``(u . v + coef0) ** degree`` for row sets ``u`` and ``v``."""
    return (np.atleast_2d(u) @ np.atleast_2d(v).T + coef0) ** degree


@dataclass
class SvmModel:
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i per support vector
    bias: float
    labels: tuple  # (negative label, positive label)
    degree: int = 1
    coef0: float = 0.0
    c: float = 1.0
    converged: bool = True
    kkt_residual: float = 0.0
    n_iter: int = 0
    alphas: np.ndarray | None = None  # full dual vector over the training rows
    dual_objective: float = 0.0

    @property
    def n_features(self) -> int:
        return self.support_vectors.shape[1]

    def decision_function(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.n_features:
            raise ParameterError(
                f"input has {x.shape[1]} features, model was trained on {self.n_features}"
            )
        if self.support_vectors.shape[0] == 0:
            return np.full(x.shape[0], self.bias)
        k = poly_kernel(x, self.support_vectors, self.degree, self.coef0)
        return k @ self.dual_coef + self.bias

    def predict(self, x) -> list:
        d = self.decision_function(x)
        return [self.labels[1] if v >= 0 else self.labels[0] for v in d]

    def to_text(self) -> str:
        """CSV blocks: a ``[params]`` key/value block then ``[support_vectors]``."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["[params]"])
        for key, val in (("bias", repr(float(self.bias))), ("degree", self.degree),
                         ("coef0", repr(float(self.coef0))), ("c", repr(float(self.c))),
                         ("label_neg", self.labels[0]), ("label_pos", self.labels[1]),
                         ("converged", int(self.converged)), ("kkt_residual", repr(float(self.kkt_residual))),
                         ("n_iter", self.n_iter), ("n_features", self.n_features)):
            w.writerow([key, val])
        w.writerow(["[support_vectors]"])
        w.writerow(["coef"] + [f"x{j}" for j in range(self.n_features)])
        for coef, row in zip(self.dual_coef, self.support_vectors):
            w.writerow([repr(float(coef))] + [repr(float(v)) for v in row])
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "SvmModel":
        rows = list(csv.reader(io.StringIO(text)))
        try:
            split = rows.index(["[support_vectors]"])
            params = dict(rows[1:split])
            body = rows[split + 2:]
            n_feat = int(params["n_features"])
        except (ValueError, KeyError) as exc:
            raise ParameterError(f"malformed SVM model text: {exc}") from exc
        coef = np.array([float(r[0]) for r in body])
        sv = np.array([[float(v) for v in r[1:]] for r in body]).reshape(len(body), n_feat)
        return cls(sv, coef, float(params["bias"]), (params["label_neg"], params["label_pos"]),
                   int(params["degree"]), float(params["coef0"]), float(params["c"]),
                   bool(int(params["converged"])), float(params["kkt_residual"]), int(params["n_iter"]))


def _signed_labels(y) -> tuple[np.ndarray, tuple]:
    y = np.asarray(y)
    uniq = list(dict.fromkeys(y.tolist()))
    if len(uniq) != 2:
        raise DegenerateInputError(f"SVM training needs exactly two classes, got {len(uniq)}", code="single_class")
    if set(uniq) <= {-1, 1}:
        return y.astype(float), (-1, 1)
    neg, pos = sorted(uniq, key=str)
    return np.where(y == pos, 1.0, -1.0), (neg, pos)


def dual_objective(alpha: np.ndarray, y: np.ndarray, k: np.ndarray) -> float:
    """``sum(alpha) - 0.5 * sum_ij alpha_i alpha_j y_i y_j K_ij``."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ k @ ay)


def svm_train(x, y, cfg: SvmConfig | None = None) -> SvmModel:
    """Train on rows ``x`` with two-valued labels ``y``.

    Labels already in {-1, +1} are used as given; otherwise the label that
    sorts second (as a string) becomes the positive class. The model is
    returned with ``converged=False`` if ``max_passes * n`` pair updates
    leave a KKT violation above ``tol``.
    """
    cfg = cfg or SvmConfig()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    ys, labels = _signed_labels(y)
    if x.shape[0] != ys.size:
        raise ParameterError(f"x has {x.shape[0]} rows but y has {ys.size} labels")
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError("SVM input contains NaN or Inf", code="non_finite")
    n = ys.size
    c = cfg.c
    k = poly_kernel(x, x, cfg.degree, cfg.coef0)
    q = k * np.outer(ys, ys)
    diag = np.diag(k)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = ys > 0
    max_iter = cfg.max_passes * max(n, 1)
    it = 0
    gap = np.inf
    while it < max_iter:
        v = -ys * grad
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        gap = v[i] - v[j]
        if gap < cfg.tol:
            break
        eta = diag[i] + diag[j] - 2.0 * k[i, j]
        step = gap / max(eta, _TAU)
        # alpha_i += y_i t, alpha_j -= y_j t keeps sum(alpha y) fixed
        ub_i = c - alpha[i] if ys[i] > 0 else alpha[i]
        ub_j = alpha[j] if ys[j] > 0 else c - alpha[j]
        t = min(step, ub_i, ub_j)
        alpha[i] = min(max(alpha[i] + ys[i] * t, 0.0), c)
        alpha[j] = min(max(alpha[j] - ys[j] * t, 0.0), c)
        grad += q[:, i] * (ys[i] * t) - q[:, j] * (ys[j] * t)
        it += 1
    v = -ys * grad
    free = (alpha > 0) & (alpha < c)
    if free.any():
        bias = float(np.mean(v[free]))
    else:
        up = (pos & (alpha < c)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < c))
        hi = v[up].max() if up.any() else 0.0
        lo = v[low].min() if low.any() else 0.0
        bias = float(0.5 * (hi + lo))
    resid = float(np.max(kkt_violations(alpha, ys, grad, bias, c)))
    sv = alpha > 0
    return SvmModel(
        support_vectors=x[sv].copy(),
        dual_coef=(alpha * ys)[sv],
        bias=bias,
        labels=labels,
        degree=cfg.degree,
        coef0=cfg.coef0,
        c=c,
        converged=bool(gap < cfg.tol),
        kkt_residual=resid,
        n_iter=it,
        alphas=alpha.copy(),
        dual_objective=dual_objective(alpha, ys, k),
    )


def kkt_violations(alpha: np.ndarray, y: np.ndarray, grad: np.ndarray, bias: float, c: float) -> np.ndarray:
    """Per-point violation of the optimality conditions given the bias.

    With ``v = -y * grad`` a point that may still move up (``alpha`` can grow
    along ``y``) needs ``v <= b``; one that may move down needs ``v >= b``.
    """
    v = -y * grad
    pos = y > 0
    up = (pos & (alpha < c)) | (~pos & (alpha > 0))
    low = (pos & (alpha > 0)) | (~pos & (alpha < c))
    viol = np.zeros(alpha.size)
    viol = np.where(up, np.maximum(viol, v - bias), viol)
    viol = np.where(low, np.maximum(viol, bias - v), viol)
    return viol


def svm_predict(model: SvmModel, x):
    """Label of a single feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ParameterError("svm_predict takes one feature vector; use SvmModel.predict for batches")
    return model.predict(x[None, :])[0]


def decision_function(model: SvmModel, x) -> np.ndarray:
    return model.decision_function(x)
