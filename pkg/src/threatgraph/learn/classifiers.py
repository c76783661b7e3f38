"""From-scratch binary classifiers behind a single train() entry point.

Each model exposes predict_score (higher means class 1) and predict_label
(score thresholded at tau: 0.5 for probability-like scores, 0 for margins).
All training is deterministic under (spec.seed, data). Defaults are named
constants and can be overridden per spec through the hyperparameters map.

Models serialize to a versioned JSON document via save_model / load_model.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateData, DimensionMismatch
from ..kernels import best_gini_split, hinge_sgd_epochs, logistic_sgd_epochs

# Conceptual defaults of a standard classifier toolkit, pinned here.
KNN_K = 5
RF_TREES = 100
RF_BOOTSTRAP = True
SGD_LEARNING_RATE = 1e-3
SGD_EPOCHS = 1000
SGD_L2 = 1e-4
SVM_LEARNING_RATE = 1e-3
SVM_EPOCHS = 1000
SVM_LAMBDA = 1e-4
MLP_HIDDEN_UNITS = 100
MLP_EPOCHS = 200
MLP_LEARNING_RATE = 1e-2
NB_ALPHA = 1.0  # add-one smoothing

MODEL_FORMAT = "threatgraph-model"
MODEL_VERSION = 1


class ClassifierKind(enum.Enum):
    NAIVE_BAYES = "NAIVE_BAYES"
    KNN = "KNN"
    LOGISTIC_SGD = "SGD"
    LINEAR_SVM = "SVM"
    RANDOM_FOREST = "RANDOM_FOREST"
    MLP = "MLP"

    @property
    def token(self) -> str:
        """Token used in experiment names and serialized models."""
        return self.value

    @classmethod
    def from_token(cls, token: str) -> "ClassifierKind":
        for kind in cls:
            if kind.value == token:
                return kind
        raise ValueError(f"unknown classifier token: {token!r}")


@dataclass(frozen=True)
class ClassifierSpec:
    kind: ClassifierKind
    hyperparameters: dict = field(default_factory=dict)
    seed: int = 0

    def param(self, name, default):
        return self.hyperparameters.get(name, default)


def _validate_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"X {X.shape} does not align with y {y.shape}")
    if not np.all(np.isfinite(X)):
        raise DegenerateData("X contains non-finite values")
    if len(np.unique(y)) < 2:
        raise DegenerateData("training data contains a single class")
    return X, y


def _check_dim(X, d):
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != d:
        raise DimensionMismatch(f"expected {d} features, got {X.shape[1]}")
    return X


class Model:
    """Base class: thresholding and the serialization envelope."""

    kind: ClassifierKind
    tau: float
    n_features: int

    def predict_score(self, X):
        raise NotImplementedError

    def predict_label(self, X):
        return (self.predict_score(X) >= self.tau).astype(np.int64)

    def _params(self) -> dict:
        raise NotImplementedError

    def to_doc(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kind": self.kind.token,
            "tau": self.tau,
            "n_features": self.n_features,
            "params": self._params(),
        }


# -- Naive Bayes -----------------------------------------------------------


class NaiveBayesModel(Model):
    """Multinomial (add-one smoothed) for count features, Gaussian per
    feature for dense embeddings. Score is the class-1 posterior."""

    kind = ClassifierKind.NAIVE_BAYES
    tau = 0.5

    def __init__(self, mode, log_prior, params, n_features):
        self.mode = mode
        self.log_prior = np.asarray(log_prior, dtype=np.float64)  # [class0, class1]
        self.params = params
        self.n_features = n_features

    @classmethod
    def fit(cls, spec, X, y):
        n, d = X.shape
        mode = spec.param("mode", "auto")
        if mode == "auto":
            is_counts = np.all(X >= 0) and np.all(X == np.round(X))
            mode = "multinomial" if is_counts else "gaussian"
        alpha = float(spec.param("alpha", NB_ALPHA))

        log_prior = np.array(
            [np.log(np.mean(y == c)) for c in (0, 1)], dtype=np.float64
        )
        if mode == "multinomial":
            log_theta = np.empty((2, d))
            for c in (0, 1):
                counts = X[y == c].sum(axis=0)
                log_theta[c] = np.log(counts + alpha) - np.log(counts.sum() + alpha * d)
            params = {"log_theta": log_theta}
        elif mode == "gaussian":
            mean = np.empty((2, d))
            var = np.empty((2, d))
            for c in (0, 1):
                rows = X[y == c]
                mean[c] = rows.mean(axis=0)
                var[c] = rows.var(axis=0) + 1e-9
            params = {"mean": mean, "var": var}
        else:
            raise ValueError(f"unknown naive bayes mode: {mode!r}")
        return cls(mode, log_prior, params, d)

    def _log_joint(self, X):
        if self.mode == "multinomial":
            return self.log_prior[None, :] + X @ self.params["log_theta"].T
        mean, var = self.params["mean"], self.params["var"]
        lj = np.empty((X.shape[0], 2))
        for c in (0, 1):
            lj[:, c] = self.log_prior[c] - 0.5 * np.sum(
                np.log(2 * np.pi * var[c]) + (X - mean[c]) ** 2 / var[c], axis=1
            )
        return lj

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        lj = self._log_joint(X)
        # Posterior of class 1 via a stable softmax over the two classes.
        m = lj.max(axis=1, keepdims=True)
        e = np.exp(lj - m)
        return e[:, 1] / e.sum(axis=1)

    def _params(self):
        out = {"mode": self.mode, "log_prior": self.log_prior.tolist()}
        for key, val in self.params.items():
            out[key] = np.asarray(val).tolist()
        return out

    @classmethod
    def from_params(cls, doc):
        p = doc["params"]
        mode = p["mode"]
        keys = ("log_theta",) if mode == "multinomial" else ("mean", "var")
        params = {k: np.asarray(p[k], dtype=np.float64) for k in keys}
        return cls(mode, p["log_prior"], params, doc["n_features"])


# -- k nearest neighbors ---------------------------------------------------


class KNNModel(Model):
    """Euclidean k-NN; score is the fraction of positive neighbors.
    Distance ties break toward the lower training-row index."""

    kind = ClassifierKind.KNN
    tau = 0.5

    def __init__(self, X, y, k):
        self.X = X
        self.y = y
        self.k = k
        self.n_features = X.shape[1]

    @classmethod
    def fit(cls, spec, X, y):
        k = int(spec.param("k", KNN_K))
        if k < 1:
            raise ValueError("k must be >= 1")
        return cls(X, y, min(k, X.shape[0]))

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            - 2.0 * X @ self.X.T
            + np.sum(self.X**2, axis=1)[None, :]
        )
        scores = np.empty(X.shape[0])
        for i in range(X.shape[0]):
            nearest = np.argsort(d2[i], kind="stable")[: self.k]
            scores[i] = float(self.y[nearest].mean())
        return scores

    def _params(self):
        return {"k": self.k, "X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_params(cls, doc):
        p = doc["params"]
        return cls(
            np.asarray(p["X"], dtype=np.float64),
            np.asarray(p["y"], dtype=np.int64),
            p["k"],
        )


# -- linear models trained by per-sample (sub)gradient descent -------------


def _epoch_orders(rng, n, epochs):
    return np.stack([rng.permutation(n) for _ in range(epochs)]).astype(np.int64)


class LogisticSGDModel(Model):
    """Logistic regression trained with per-sample SGD on log-loss + L2."""

    kind = ClassifierKind.LOGISTIC_SGD
    tau = 0.5

    def __init__(self, w, b):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)
        self.n_features = len(self.w)

    @classmethod
    def fit(cls, spec, X, y):
        lr = float(spec.param("learning_rate", SGD_LEARNING_RATE))
        epochs = int(spec.param("epochs", SGD_EPOCHS))
        l2 = float(spec.param("l2", SGD_L2))
        if lr <= 0:
            raise ValueError("learning rate must be > 0")
        rng = np.random.default_rng(spec.seed)
        orders = _epoch_orders(rng, X.shape[0], epochs)
        w, b = logistic_sgd_epochs(X, y.astype(np.float64), orders, lr, l2)
        return cls(w, b)

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        z = np.clip(X @ self.w + self.b, -30.0, 30.0)
        return 1.0 / (1.0 + np.exp(-z))

    def _params(self):
        return {"w": self.w.tolist(), "b": self.b}

    @classmethod
    def from_params(cls, doc):
        return cls(doc["params"]["w"], doc["params"]["b"])


class LinearSVMModel(Model):
    """Linear SVM trained in the primal: hinge loss + L2, sub-gradient steps.
    Score is the signed margin."""

    kind = ClassifierKind.LINEAR_SVM
    tau = 0.0

    def __init__(self, w, b):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)
        self.n_features = len(self.w)

    @classmethod
    def fit(cls, spec, X, y):
        lr = float(spec.param("learning_rate", SVM_LEARNING_RATE))
        epochs = int(spec.param("epochs", SVM_EPOCHS))
        lam = float(spec.param("l2", SVM_LAMBDA))
        if lr <= 0:
            raise ValueError("learning rate must be > 0")
        rng = np.random.default_rng(spec.seed)
        orders = _epoch_orders(rng, X.shape[0], epochs)
        ypm = np.where(y == 1, 1.0, -1.0)
        w, b = hinge_sgd_epochs(X, ypm, orders, lr, lam)
        return cls(w, b)

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        return X @ self.w + self.b

    def _params(self):
        return {"w": self.w.tolist(), "b": self.b}

    @classmethod
    def from_params(cls, doc):
        return cls(doc["params"]["w"], doc["params"]["b"])


# -- decision tree and random forest ---------------------------------------


class DecisionTree:
    """Gini-impurity tree grown to purity. Split ties break toward the lower
    feature index, then the lower threshold."""

    def __init__(self, max_features=None):
        self.max_features = max_features
        self.root = None

    def fit(self, X, y, rng):
        d = X.shape[1]
        if self.max_features is None:
            n_feats = d
        else:
            n_feats = max(1, min(self.max_features, d))
        all_feats = np.arange(d, dtype=np.int64)

        def grow(rows):
            labs = y[rows]
            n1 = int(labs.sum())
            leaf_frac = n1 / len(rows)
            if n1 == 0 or n1 == len(rows) or len(rows) < 2:
                return {"leaf": leaf_frac}
            if n_feats == d:
                feats = all_feats
            else:
                feats = np.sort(rng.choice(d, size=n_feats, replace=False)).astype(
                    np.int64
                )
            feat, thr, gini = best_gini_split(X, y, rows, feats)
            if feat < 0:
                return {"leaf": leaf_frac}
            mask = X[rows, feat] <= thr
            return {
                "feat": int(feat),
                "thr": float(thr),
                "left": grow(rows[mask]),
                "right": grow(rows[~mask]),
            }

        self.root = grow(np.arange(X.shape[0], dtype=np.int64))
        return self

    def _leaf_frac(self, x):
        node = self.root
        while "leaf" not in node:
            node = node["left"] if x[node["feat"]] <= node["thr"] else node["right"]
        return node["leaf"]

    def predict_label(self, X):
        # A tie at a leaf (equal class counts) votes 0.
        return np.array(
            [1 if self._leaf_frac(x) > 0.5 else 0 for x in X], dtype=np.int64
        )


class RandomForestModel(Model):
    """Bagged Gini trees with per-split feature subsampling (sqrt of the
    feature count by default). Score is the fraction of trees voting 1."""

    kind = ClassifierKind.RANDOM_FOREST
    tau = 0.5

    def __init__(self, trees, n_features):
        self.trees = trees
        self.n_features = n_features

    @classmethod
    def fit(cls, spec, X, y):
        n_trees = int(spec.param("n_trees", RF_TREES))
        if n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        bootstrap = bool(spec.param("bootstrap", RF_BOOTSTRAP))
        max_features = spec.param("max_features", "sqrt")
        d = X.shape[1]
        if max_features == "sqrt":
            max_features = max(1, int(np.sqrt(d)))
        elif max_features is None:
            max_features = d

        n = X.shape[0]
        trees = []
        seeds = np.random.SeedSequence(spec.seed).spawn(n_trees)
        for seq in seeds:
            rng = np.random.default_rng(seq)
            if bootstrap:
                rows = rng.integers(0, n, size=n)
                Xb = np.ascontiguousarray(X[rows])
                yb = y[rows]
                if len(np.unique(yb)) < 2:
                    # Degenerate bootstrap sample: the tree is a single leaf.
                    trees.append(
                        DecisionTree(max_features).fit(
                            Xb[:2], np.array([yb[0], yb[0]], dtype=np.int64), rng
                        )
                    )
                    continue
            else:
                Xb, yb = X, y
            trees.append(DecisionTree(max_features).fit(Xb, yb, rng))
        return cls(trees, d)

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict_label(X)
        return votes / len(self.trees)

    def _params(self):
        return {"trees": [tree.root for tree in self.trees]}

    @classmethod
    def from_params(cls, doc):
        trees = []
        for root in doc["params"]["trees"]:
            tree = DecisionTree()
            tree.root = root
            trees.append(tree)
        return cls(trees, doc["n_features"])


# -- multi-layer perceptron ------------------------------------------------


class MLPModel(Model):
    """One hidden ReLU layer with a logistic output, trained full-batch with
    Adam on log-loss. Weights use seeded uniform initialization."""

    kind = ClassifierKind.MLP
    tau = 0.5

    def __init__(self, W1, b1, W2, b2):
        self.W1 = np.asarray(W1, dtype=np.float64)
        self.b1 = np.asarray(b1, dtype=np.float64)
        self.W2 = np.asarray(W2, dtype=np.float64)
        self.b2 = float(b2)
        self.n_features = self.W1.shape[0]

    @classmethod
    def fit(cls, spec, X, y):
        hidden = int(spec.param("hidden_units", MLP_HIDDEN_UNITS))
        epochs = int(spec.param("epochs", MLP_EPOCHS))
        lr = float(spec.param("learning_rate", MLP_LEARNING_RATE))
        if hidden < 1:
            raise ValueError("hidden_units must be >= 1")
        if lr <= 0:
            raise ValueError("learning rate must be > 0")
        rng = np.random.default_rng(spec.seed)
        n, d = X.shape
        limit1 = np.sqrt(6.0 / (d + hidden))
        limit2 = np.sqrt(6.0 / (hidden + 1))
        W1 = rng.uniform(-limit1, limit1, size=(d, hidden))
        b1 = np.zeros(hidden)
        W2 = rng.uniform(-limit2, limit2, size=hidden)
        b2 = 0.0
        yf = y.astype(np.float64)

        beta1, beta2, eps = 0.9, 0.999, 1e-8
        moments = [
            [np.zeros_like(p), np.zeros_like(p)] for p in (W1, b1, W2)
        ] + [[0.0, 0.0]]

        for t in range(1, epochs + 1):
            H = np.maximum(X @ W1 + b1, 0.0)
            z = np.clip(H @ W2 + b2, -30.0, 30.0)
            p = 1.0 / (1.0 + np.exp(-z))
            g = (p - yf) / n
            gW2 = H.T @ g
            gb2 = float(g.sum())
            gH = np.outer(g, W2)
            gH[H <= 0.0] = 0.0
            gW1 = X.T @ gH
            gb1 = gH.sum(axis=0)

            params = [W1, b1, W2]
            grads = [gW1, gb1, gW2]
            for idx, (param, grad) in enumerate(zip(params, grads)):
                m, v = moments[idx]
                m = beta1 * m + (1 - beta1) * grad
                v = beta2 * v + (1 - beta2) * grad**2
                moments[idx] = [m, v]
                mhat = m / (1 - beta1**t)
                vhat = v / (1 - beta2**t)
                param -= lr * mhat / (np.sqrt(vhat) + eps)
            m, v = moments[3]
            m = beta1 * m + (1 - beta1) * gb2
            v = beta2 * v + (1 - beta2) * gb2**2
            moments[3] = [m, v]
            b2 -= lr * (m / (1 - beta1**t)) / (np.sqrt(v / (1 - beta2**t)) + eps)

        return cls(W1, b1, W2, b2)

    def predict_score(self, X):
        X = _check_dim(X, self.n_features)
        H = np.maximum(X @ self.W1 + self.b1, 0.0)
        z = np.clip(H @ self.W2 + self.b2, -30.0, 30.0)
        return 1.0 / (1.0 + np.exp(-z))

    def _params(self):
        return {
            "W1": self.W1.tolist(),
            "b1": self.b1.tolist(),
            "W2": self.W2.tolist(),
            "b2": self.b2,
        }

    @classmethod
    def from_params(cls, doc):
        p = doc["params"]
        return cls(p["W1"], p["b1"], p["W2"], p["b2"])


# -- entry points ----------------------------------------------------------

_MODEL_CLASSES = {
    ClassifierKind.NAIVE_BAYES: NaiveBayesModel,
    ClassifierKind.KNN: KNNModel,
    ClassifierKind.LOGISTIC_SGD: LogisticSGDModel,
    ClassifierKind.LINEAR_SVM: LinearSVMModel,
    ClassifierKind.RANDOM_FOREST: RandomForestModel,
    ClassifierKind.MLP: MLPModel,
}


def train(spec: ClassifierSpec, X, y) -> Model:
    """Train the classifier named by spec on (X, y)."""
    X, y = _validate_xy(X, y)
    return _MODEL_CLASSES[spec.kind].fit(spec, X, y)


def save_model(model: Model, path):
    with open(path, "w") as fh:
        json.dump(model.to_doc(), fh)


def load_model(path) -> Model:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model document: {path}")
    kind = ClassifierKind.from_token(doc["kind"])
    return _MODEL_CLASSES[kind].from_params(doc)
