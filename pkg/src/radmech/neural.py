"""Dense scalar-output networks with manual backpropagation.

Covers the three model families used by the predictors: a logistic
reactive-site classifier, a Siamese plausibility ranker (shared weights over
plausible/implausible reaction pairs), and a contrastive pair scorer (two
networks whose scalar outputs multiply into a pair score).

Training is adaptive-moment descent with gradient clipping, seeded
initialization, inverted dropout, optional L2, and early stopping on a
held-out slice.  Everything is deterministic given the seed.
"""

from __future__ import annotations

import io
import json
import logging
import zipfile
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import erf

log = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class NetworkSpec:
    layer_dims: tuple  # hidden sizes then the final scalar, e.g. (512, 256, 1)
    activation: str = "gelu"
    dropout_rate: float = 0.0
    l2_coefficient: float = 0.0

    def __post_init__(self):
        if not self.layer_dims or self.layer_dims[-1] != 1:
            raise ModelError("network output must be a scalar (final dim 1)")
        if any(d <= 0 for d in self.layer_dims):
            raise ModelError("layer dims must be positive")
        if self.activation not in ("gelu", "relu"):
            raise ModelError(f"unknown activation {self.activation!r}")
        if not (0.0 <= self.dropout_rate < 1.0):
            raise ModelError("dropout rate must be in [0, 1)")
        if self.l2_coefficient < 0:
            raise ModelError("negative L2 coefficient")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 32
    max_epochs: int = 60
    patience: int = 5
    seed: int = 0
    clip_norm: float = 5.0
    holdout_fraction: float = 0.1
    standardize: bool = True


@dataclass
class TrainedModel:
    spec: NetworkSpec
    weights: list  # [(W out x in, b out)] per layer
    metadata: dict = field(default_factory=dict)
    mean: Optional[np.ndarray] = None
    std: Optional[np.ndarray] = None

    @property
    def input_dim(self) -> int:
        return self.weights[0][0].shape[1]

    def copy_weights(self) -> list:
        return [(W.copy(), b.copy()) for W, b in self.weights]


@dataclass
class ContrastiveModel:
    f: TrainedModel
    g: TrainedModel
    metadata: dict = field(default_factory=dict)


def init_model(input_dim: int, spec: NetworkSpec, seed: int,
               metadata: Optional[dict] = None) -> TrainedModel:
    """Fan-in scaled uniform initialization, seeded."""
    rng = np.random.default_rng(seed)
    weights = []
    fan_in = input_dim
    for dim in spec.layer_dims:
        bound = 1.0 / np.sqrt(fan_in)
        W = rng.uniform(-bound, bound, size=(dim, fan_in))
        b = np.zeros(dim)
        weights.append((W, b))
        fan_in = dim
    return TrainedModel(spec, weights, dict(metadata or {}, seed=seed))


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    return 0.5 * z * (1.0 + erf(z / _SQRT2))


def _dact(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    return 0.5 * (1.0 + erf(z / _SQRT2)) + z * _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def _standardized(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    if model.mean is None:
        return X
    return (X - model.mean) / model.std


def _forward_full(model: TrainedModel, X: np.ndarray, train_mode: bool,
                  rng: Optional[np.random.Generator]) -> tuple:
    """Returns (outputs (n,), caches) keeping pre-activations and masks."""
    spec = model.spec
    a = _standardized(model, np.atleast_2d(X))
    caches = []
    n_layers = len(model.weights)
    for li, (W, b) in enumerate(model.weights):
        z = a @ W.T + b
        last = li == n_layers - 1
        if last:
            caches.append((a, z, None))
            a = z
        else:
            h = _act(z, spec.activation)
            mask = None
            if train_mode and spec.dropout_rate > 0.0:
                keep = 1.0 - spec.dropout_rate
                mask = (rng.random(h.shape) < keep) / keep
                h = h * mask
            caches.append((a, z, mask))
            a = h
    return a[:, 0], caches


def forward(model: TrainedModel, x: np.ndarray, train_mode: bool = False,
            rng_seed: int = 0) -> float:
    """Scalar output for one input vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != model.input_dim:
        raise ModelError(
            f"input dimension {x.shape} does not match model {model.input_dim}"
        )
    rng = np.random.default_rng(rng_seed) if train_mode else None
    out, _ = _forward_full(model, x[None, :], train_mode, rng)
    return float(out[0])


def forward_batch(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.input_dim:
        raise ModelError(
            f"input dimension {X.shape[1]} does not match model {model.input_dim}"
        )
    out, _ = _forward_full(model, X, False, None)
    return out


def _backward(model: TrainedModel, caches: list, dy: np.ndarray) -> list:
    """Gradients of sum(dy * outputs) with respect to each weight."""
    spec = model.spec
    grads = [None] * len(model.weights)
    delta = dy[:, None]  # (n, 1) at the linear output
    for li in reversed(range(len(model.weights))):
        a_in, z, mask = caches[li]
        W, _ = model.weights[li]
        grads[li] = (delta.T @ a_in, delta.sum(axis=0))
        if li > 0:
            delta = delta @ W
            _, z_prev, mask_prev = caches[li - 1]
            if mask_prev is not None:
                delta = delta * mask_prev
            delta = delta * _dact(z_prev, spec.activation)
    return grads


def _add_l2(model: TrainedModel, grads: list) -> list:
    lam = model.spec.l2_coefficient
    if lam == 0.0:
        return grads
    return [(dW + lam * W, db) for (dW, db), (W, _) in zip(grads, model.weights)]


def l2_penalty(model: TrainedModel) -> float:
    lam = model.spec.l2_coefficient
    if lam == 0.0:
        return 0.0
    return 0.5 * lam * sum(float((W * W).sum()) for W, _ in model.weights)


# -- losses -----------------------------------------------------------------


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


class LogisticLoss:
    """Binary cross-entropy over the logit output."""

    def value(self, out: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean(np.logaddexp(0.0, out) - y * out))

    def grad(self, out: np.ndarray, y: np.ndarray) -> np.ndarray:
        return (sigmoid(out) - y) / out.shape[0]


class SquaredLoss:
    def value(self, out: np.ndarray, y: np.ndarray) -> float:
        return float(np.mean((out - y) ** 2))

    def grad(self, out: np.ndarray, y: np.ndarray) -> np.ndarray:
        return 2.0 * (out - y) / out.shape[0]


def gradients(model: TrainedModel, loss_fn, batch: tuple) -> list:
    """Per-weight gradients of loss(outputs, targets) plus the L2 penalty."""
    X, y = batch
    out, caches = _forward_full(model, np.atleast_2d(X), False, None)
    dy = loss_fn.grad(out, np.asarray(y, dtype=np.float64))
    return _add_l2(model, _backward(model, caches, dy))


def batch_loss(model: TrainedModel, loss_fn, batch: tuple) -> float:
    X, y = batch
    out = forward_batch(model, X)
    return loss_fn.value(out, np.asarray(y, dtype=np.float64)) + l2_penalty(model)


# -- optimizer ---------------------------------------------------------------


class Adam:
    def __init__(self, model: TrainedModel, lr: float, clip_norm: float):
        self.lr = lr
        self.clip = clip_norm
        self.beta1, self.beta2, self.eps = 0.9, 0.999, 1e-8
        self.t = 0
        self.m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in model.weights]
        self.v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in model.weights]

    def step(self, model: TrainedModel, grads: list):
        norm = np.sqrt(sum(
            float((dW * dW).sum()) + float((db * db).sum()) for dW, db in grads
        ))
        if self.clip and norm > self.clip:
            scale = self.clip / norm
            grads = [(dW * scale, db * scale) for dW, db in grads]
        self.t += 1
        corr1 = 1.0 - self.beta1 ** self.t
        corr2 = 1.0 - self.beta2 ** self.t
        new_weights = []
        for li, ((W, b), (dW, db)) in enumerate(zip(model.weights, grads)):
            mW, mb = self.m[li]
            vW, vb = self.v[li]
            mW = self.beta1 * mW + (1 - self.beta1) * dW
            mb = self.beta1 * mb + (1 - self.beta1) * db
            vW = self.beta2 * vW + (1 - self.beta2) * dW * dW
            vb = self.beta2 * vb + (1 - self.beta2) * db * db
            self.m[li] = (mW, mb)
            self.v[li] = (vW, vb)
            W = W - self.lr * (mW / corr1) / (np.sqrt(vW / corr2) + self.eps)
            b = b - self.lr * (mb / corr1) / (np.sqrt(vb / corr2) + self.eps)
            new_weights.append((W, b))
        model.weights = new_weights


# -- training loops ----------------------------------------------------------


def _fit_standardization(model: TrainedModel, X: np.ndarray, enabled: bool):
    if not enabled:
        return
    model.mean = X.mean(axis=0)
    model.std = np.maximum(X.std(axis=0), 1e-8)


def _holdout_split(n: int, fraction: float, rng: np.random.Generator) -> tuple:
    idx = rng.permutation(n)
    n_val = max(1, int(n * fraction)) if n > 4 else 0
    return idx[n_val:], idx[:n_val]


def _epoch_batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start:start + batch_size]


def _train_loop(model: TrainedModel, config: TrainConfig, n_train: int,
                step_fn: Callable, val_fn: Callable) -> list:
    """Shared descent loop with early stopping; returns the learning curve."""
    opt = Adam(model, config.learning_rate, config.clip_norm)
    rng = np.random.default_rng(config.seed + 1)
    best_val = np.inf
    best_weights = model.copy_weights()
    stale = 0
    curve = []
    for epoch in range(config.max_epochs):
        drop_rng = np.random.default_rng(config.seed + 1000 * (epoch + 1))
        losses = []
        for batch_idx in _epoch_batches(n_train, config.batch_size, rng):
            loss, grads = step_fn(batch_idx, drop_rng)
            losses.append(loss)
            opt.step(model, grads)
        train_loss = float(np.mean(losses)) if losses else 0.0
        val_loss = val_fn()
        curve.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss})
        if val_loss < best_val - 1e-9:
            best_val = val_loss
            best_weights = model.copy_weights()
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break
    model.weights = best_weights
    return curve


def train_classifier(X: np.ndarray, y: np.ndarray, spec: NetworkSpec,
                     config: TrainConfig = TrainConfig(),
                     metadata: Optional[dict] = None) -> TrainedModel:
    """Binary classifier over descriptor vectors with logistic loss."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.size == 0:
        raise ModelError("empty training data")
    if len(np.unique(y)) < 2:
        log.warning("degenerate single-class training data")
    model = init_model(X.shape[1], spec, config.seed, metadata)
    _fit_standardization(model, X, config.standardize)
    loss_fn = LogisticLoss()
    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = _holdout_split(len(X), config.holdout_fraction, rng)
    Xt, yt = X[train_idx], y[train_idx]
    Xv, yv = (X[val_idx], y[val_idx]) if len(val_idx) else (Xt, yt)

    def step(batch_idx, drop_rng):
        xb, yb = Xt[batch_idx], yt[batch_idx]
        out, caches = _forward_full(model, xb, True, drop_rng)
        loss = loss_fn.value(out, yb) + l2_penalty(model)
        grads = _add_l2(model, _backward(model, caches, loss_fn.grad(out, yb)))
        return loss, grads

    def val():
        return batch_loss(model, loss_fn, (Xv, yv))

    curve = _train_loop(model, config, len(Xt), step, val)
    model.metadata.update({"curve": curve, "task": "classifier"})
    return model


def _siamese_grads(model: TrainedModel, Xp: np.ndarray, Xm: np.ndarray,
                   train_mode: bool, drop_rng) -> tuple:
    """Loss mean(sigmoid(f(implausible) - f(plausible))) and its gradients.

    Written so that descent raises plausible scores above implausible ones;
    both branches share the weights.
    """
    out_p, caches_p = _forward_full(model, Xp, train_mode, drop_rng)
    out_m, caches_m = _forward_full(model, Xm, train_mode, drop_rng)
    margin = out_m - out_p
    s = sigmoid(margin)
    loss = float(np.mean(s)) + l2_penalty(model)
    d = s * (1.0 - s) / margin.shape[0]
    grads_m = _backward(model, caches_m, d)
    grads_p = _backward(model, caches_p, -d)
    grads = [(aW + bW, ab + bb) for (aW, ab), (bW, bb) in zip(grads_m, grads_p)]
    return loss, _add_l2(model, grads)


def siamese_margins(model: TrainedModel, Xp: np.ndarray, Xm: np.ndarray) -> np.ndarray:
    """Pre-sigmoid margins f(plausible) - f(implausible)."""
    return forward_batch(model, Xp) - forward_batch(model, Xm)


def train_siamese(Xp: np.ndarray, Xm: np.ndarray, spec: NetworkSpec,
                  config: TrainConfig = TrainConfig(),
                  metadata: Optional[dict] = None) -> TrainedModel:
    """Pairwise ranker: rows of Xp and Xm are plausible/implausible reaction
    representations with identical reactants."""
    Xp = np.asarray(Xp, dtype=np.float64)
    Xm = np.asarray(Xm, dtype=np.float64)
    if Xp.shape != Xm.shape or Xp.size == 0:
        raise ModelError("siamese training needs matched, nonempty pair arrays")
    model = init_model(Xp.shape[1], spec, config.seed, metadata)
    _fit_standardization(model, np.vstack([Xp, Xm]), config.standardize)
    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = _holdout_split(len(Xp), config.holdout_fraction, rng)
    Xpt, Xmt = Xp[train_idx], Xm[train_idx]
    Xpv, Xmv = (Xp[val_idx], Xm[val_idx]) if len(val_idx) else (Xpt, Xmt)

    def step(batch_idx, drop_rng):
        return _siamese_grads(model, Xpt[batch_idx], Xmt[batch_idx], True, drop_rng)

    def val():
        margin = forward_batch(model, Xmv) - forward_batch(model, Xpv)
        return float(np.mean(sigmoid(margin))) + l2_penalty(model)

    curve = _train_loop(model, config, len(Xpt), step, val)
    model.metadata.update({"curve": curve, "task": "siamese"})
    return model


def contrastive_score(cm: ContrastiveModel, x1: np.ndarray, x2: np.ndarray) -> float:
    """sigmoid(f(x1) * g(x2)), the reactivity of an ordered atom pair."""
    return float(sigmoid(forward(cm.f, x1) * forward(cm.g, x2)))


def contrastive_score_batch(cm: ContrastiveModel, X1: np.ndarray,
                            X2: np.ndarray) -> np.ndarray:
    return sigmoid(forward_batch(cm.f, X1) * forward_batch(cm.g, X2))


def _contrastive_grads(cm: ContrastiveModel, P1, P2, N1, N2, train_mode, drop_rng):
    """Loss mean(1 - sigmoid([f(p1) g(p2)] - [f(n1) g(n2)])) and gradients."""
    fp, cfp = _forward_full(cm.f, P1, train_mode, drop_rng)
    gp, cgp = _forward_full(cm.g, P2, train_mode, drop_rng)
    fn, cfn = _forward_full(cm.f, N1, train_mode, drop_rng)
    gn, cgn = _forward_full(cm.g, N2, train_mode, drop_rng)
    margin = fp * gp - fn * gn
    s = sigmoid(margin)
    loss = float(np.mean(1.0 - s)) + l2_penalty(cm.f) + l2_penalty(cm.g)
    d = -s * (1.0 - s) / margin.shape[0]
    f_grads = _backward(cm.f, cfp, d * gp)
    f_grads_n = _backward(cm.f, cfn, -d * gn)
    g_grads = _backward(cm.g, cgp, d * fp)
    g_grads_n = _backward(cm.g, cgn, -d * fn)
    fsum = [(aW + bW, ab + bb) for (aW, ab), (bW, bb) in zip(f_grads, f_grads_n)]
    gsum = [(aW + bW, ab + bb) for (aW, ab), (bW, bb) in zip(g_grads, g_grads_n)]
    return loss, _add_l2(cm.f, fsum), _add_l2(cm.g, gsum)


def train_contrastive(P1, P2, N1, N2,
                      spec: NetworkSpec = NetworkSpec((128, 64, 1), "gelu", 0.5),
                      config: TrainConfig = TrainConfig(),
                      metadata: Optional[dict] = None) -> ContrastiveModel:
    """Contrastive pair scorer: rows hold the productive pair's first/second
    atom descriptors (P1, P2) and an unproductive pair's (N1, N2).  First
    atoms go through f, second atoms through g."""
    arrays = [np.asarray(a, dtype=np.float64) for a in (P1, P2, N1, N2)]
    P1, P2, N1, N2 = arrays
    if not all(a.shape == P1.shape for a in arrays) or P1.size == 0:
        raise ModelError("contrastive training needs matched, nonempty arrays")
    f = init_model(P1.shape[1], spec, config.seed, metadata)
    g = init_model(P1.shape[1], spec, config.seed + 1, metadata)
    stacked = np.vstack(arrays)
    _fit_standardization(f, stacked, config.standardize)
    _fit_standardization(g, stacked, config.standardize)
    cm = ContrastiveModel(f, g, dict(metadata or {}))
    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = _holdout_split(len(P1), config.holdout_fraction, rng)
    T = [a[train_idx] for a in arrays]
    V = [a[val_idx] for a in arrays] if len(val_idx) else T

    opt_f = Adam(f, config.learning_rate, config.clip_norm)
    opt_g = Adam(g, config.learning_rate, config.clip_norm)
    rng_epochs = np.random.default_rng(config.seed + 1)
    best_val = np.inf
    best = (f.copy_weights(), g.copy_weights())
    stale = 0
    curve = []
    for epoch in range(config.max_epochs):
        drop_rng = np.random.default_rng(config.seed + 1000 * (epoch + 1))
        losses = []
        for batch_idx in _epoch_batches(len(T[0]), config.batch_size, rng_epochs):
            loss, gf, gg = _contrastive_grads(
                cm, *[a[batch_idx] for a in T], True, drop_rng
            )
            losses.append(loss)
            opt_f.step(f, gf)
            opt_g.step(g, gg)
        margin = (forward_batch(f, V[0]) * forward_batch(g, V[1])
                  - forward_batch(f, V[2]) * forward_batch(g, V[3]))
        val_loss = float(np.mean(1.0 - sigmoid(margin)))
        curve.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)) if losses else 0.0,
            "val_loss": val_loss,
        })
        if val_loss < best_val - 1e-9:
            best_val = val_loss
            best = (f.copy_weights(), g.copy_weights())
            stale = 0
        else:
            stale += 1
            if stale > config.patience:
                break
    f.weights, g.weights = best
    cm.metadata.update({"curve": curve, "task": "contrastive"})
    return cm


# -- persistence --------------------------------------------------------------


def _pack(model: TrainedModel, prefix: str, arrays: dict, header: dict):
    header[f"{prefix}spec"] = {
        "layer_dims": list(model.spec.layer_dims),
        "activation": model.spec.activation,
        "dropout_rate": model.spec.dropout_rate,
        "l2_coefficient": model.spec.l2_coefficient,
    }
    header[f"{prefix}metadata"] = _json_safe(model.metadata)
    for li, (W, b) in enumerate(model.weights):
        arrays[f"{prefix}W{li}"] = W
        arrays[f"{prefix}b{li}"] = b
    if model.mean is not None:
        arrays[f"{prefix}mean"] = model.mean
        arrays[f"{prefix}std"] = model.std


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _unpack(data, header: dict, prefix: str) -> TrainedModel:
    spec_d = header[f"{prefix}spec"]
    spec = NetworkSpec(
        tuple(spec_d["layer_dims"]), spec_d["activation"],
        spec_d["dropout_rate"], spec_d["l2_coefficient"],
    )
    weights = []
    li = 0
    while f"{prefix}W{li}" in data:
        weights.append((data[f"{prefix}W{li}"], data[f"{prefix}b{li}"]))
        li += 1
    mean = data[f"{prefix}mean"] if f"{prefix}mean" in data else None
    std = data[f"{prefix}std"] if f"{prefix}std" in data else None
    return TrainedModel(spec, weights, header[f"{prefix}metadata"], mean, std)


def save_model(model, path):
    """Versioned binary model file; round trips bit-exactly."""
    arrays = {}
    header = {"format_version": MODEL_FORMAT_VERSION}
    if isinstance(model, ContrastiveModel):
        header["kind"] = "contrastive"
        header["pair_metadata"] = _json_safe(model.metadata)
        _pack(model.f, "f_", arrays, header)
        _pack(model.g, "g_", arrays, header)
    else:
        header["kind"] = "single"
        _pack(model, "", arrays, header)
    arrays["__header__"] = np.frombuffer(
        json.dumps(header).encode("utf8"), dtype=np.uint8
    )
    np.savez(path, **arrays)


def load_model(path):
    try:
        data = np.load(path, allow_pickle=False)
        header = json.loads(bytes(data["__header__"]).decode("utf8"))
    except (OSError, KeyError, ValueError, zipfile.BadZipFile) as exc:
        raise ModelError(f"corrupt model file {path}: {exc}") from exc
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelError(
            f"model format version {header.get('format_version')} not supported"
        )
    if header["kind"] == "contrastive":
        return ContrastiveModel(
            _unpack(data, header, "f_"),
            _unpack(data, header, "g_"),
            header.get("pair_metadata", {}),
        )
    return _unpack(data, header, "")


def write_curve_csv(model_metadata: dict, path):
    rows = model_metadata.get("curve", [])
    with open(path, "w") as fh:
        fh.write("epoch,train_loss,val_loss\n")
        for row in rows:
            fh.write(f"{row['epoch']},{row['train_loss']},{row['val_loss']}\n")
