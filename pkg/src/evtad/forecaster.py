"""Trainable recurrent forecaster.

A small stack of LSTM layers reads the last ``look_back`` values of a
series and a linear dense head emits the next ``look_ahead`` values.
Training minimizes mean squared error with Adam, inverted dropout on each
recurrent layer's output activations, and early stopping on a hold-out
validation stream; values are min-max scaled to [0, 1] with statistics
from the training windows and predictions are mapped back before error
computation.

Detectors can also be fed from a plain (index, error) CSV through
:func:`load_external_errors`, bypassing the model entirely.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._lstm import lstm_layer_backward, lstm_layer_forward
from .errors import DataError, NumericalError
from .series import ErrorSeries, TimeSeries, WindowSet, make_windows

CHECKPOINT_FORMAT = "evtad-model-v1"
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
_PREDICT_CHUNK = 1024


@dataclass(frozen=True)
class ForecasterConfig:
    recurrent_layer_sizes: tuple[int, ...] = (20,)
    dropout_rate: float = 0.2
    learning_rate: float = 1e-3
    look_back: int = 1
    look_ahead: int = 1
    max_epochs: int = 100
    batch_size: int = 64
    early_stopping_patience: int = 10
    seed: int = 0
    horizon_index: int = 0      # which of the look_ahead steps feeds detection
    train_stride: int = 1       # subsample training windows to cap their count

    def __post_init__(self):
        object.__setattr__(self, "recurrent_layer_sizes",
                           tuple(int(s) for s in self.recurrent_layer_sizes))
        if not self.recurrent_layer_sizes or min(self.recurrent_layer_sizes) < 1:
            raise DataError("need at least one recurrent layer of positive size")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise DataError("dropout rate must lie in [0, 1)")
        if self.learning_rate < 0:
            raise DataError("learning rate must be non-negative")
        if min(self.look_back, self.look_ahead, self.max_epochs,
               self.batch_size, self.early_stopping_patience, self.train_stride) < 1:
            raise DataError("structural config fields must be positive")
        if not 0 <= self.horizon_index < self.look_ahead:
            raise DataError("horizon_index must lie in [0, look_ahead)")

    def to_dict(self) -> dict:
        return {
            "recurrent_layer_sizes": list(self.recurrent_layer_sizes),
            "dropout_rate": self.dropout_rate,
            "learning_rate": self.learning_rate,
            "look_back": self.look_back,
            "look_ahead": self.look_ahead,
            "max_epochs": self.max_epochs,
            "batch_size": self.batch_size,
            "early_stopping_patience": self.early_stopping_patience,
            "seed": self.seed,
            "horizon_index": self.horizon_index,
            "train_stride": self.train_stride,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForecasterConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown forecaster config fields: {sorted(unknown)}")
        d = dict(d)
        if "recurrent_layer_sizes" in d:
            d["recurrent_layer_sizes"] = tuple(d["recurrent_layer_sizes"])
        return cls(**d)


@dataclass
class LayerParams:
    """Stacked gate parameters for one layer; rows ordered input, forget,
    candidate, output. ``weights[k]`` multiplies ``(x_t, h_{t-1})``."""

    weights: np.ndarray  # (4H, D+H)
    bias: np.ndarray     # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.weights.shape[0] // 4

    def _gate(self, k: int) -> np.ndarray:
        h = self.hidden_size
        return self.weights[k * h:(k + 1) * h]

    @property
    def w_input(self):
        return self._gate(0)

    @property
    def w_forget(self):
        return self._gate(1)

    @property
    def w_candidate(self):
        return self._gate(2)

    @property
    def w_output(self):
        return self._gate(3)

    def bias_gate(self, name: str) -> np.ndarray:
        h = self.hidden_size
        k = ("input", "forget", "candidate", "output").index(name)
        return self.bias[k * h:(k + 1) * h]


@dataclass
class ModelParams:
    layers: list[LayerParams]
    dense_weights: np.ndarray  # (look_ahead, H_last)
    dense_bias: np.ndarray     # (look_ahead,)
    value_min: float = 0.0     # training-window scaling statistics
    value_max: float = 1.0

    def __post_init__(self):
        for arr in self.arrays():
            if not np.all(np.isfinite(arr)):
                raise NumericalError("model parameters must be finite")

    def arrays(self) -> list[np.ndarray]:
        out = []
        for layer in self.layers:
            out.append(layer.weights)
            out.append(layer.bias)
        out.append(self.dense_weights)
        out.append(self.dense_bias)
        return out

    def copy(self) -> "ModelParams":
        return ModelParams(
            [LayerParams(l.weights.copy(), l.bias.copy()) for l in self.layers],
            self.dense_weights.copy(), self.dense_bias.copy(),
            self.value_min, self.value_max,
        )

    @property
    def look_ahead(self) -> int:
        return self.dense_weights.shape[0]

    def scale(self, x: np.ndarray) -> np.ndarray:
        span = self.value_max - self.value_min
        if span <= 0:
            span = 1.0
        return (x - self.value_min) / span

    def unscale(self, x: np.ndarray) -> np.ndarray:
        span = self.value_max - self.value_min
        if span <= 0:
            span = 1.0
        return x * span + self.value_min


@dataclass(frozen=True)
class TrainReport:
    epochs_run: int
    train_mse_per_epoch: tuple[float, ...]
    validation_mse_per_epoch: tuple[float, ...]
    stopped_early: bool
    best_epoch: int

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "train_mse_per_epoch": list(self.train_mse_per_epoch),
            "validation_mse_per_epoch": list(self.validation_mse_per_epoch),
            "stopped_early": self.stopped_early,
            "best_epoch": self.best_epoch,
        }


def init_params(config: ForecasterConfig, input_dim: int = 1) -> ModelParams:
    """Scaled-uniform (Glorot) weights, zero biases except the forget gate
    bias at 1; deterministic in the config seed."""
    rng = np.random.default_rng(config.seed)
    layers = []
    d = input_dim
    for h in config.recurrent_layer_sizes:
        s = math.sqrt(6.0 / ((d + h) + h))
        weights = rng.uniform(-s, s, size=(4 * h, d + h))
        bias = np.zeros(4 * h)
        bias[h:2 * h] = 1.0
        layers.append(LayerParams(weights, bias))
        d = h
    s = math.sqrt(6.0 / (d + config.look_ahead))
    dense_w = rng.uniform(-s, s, size=(config.look_ahead, d))
    dense_b = np.zeros(config.look_ahead)
    return ModelParams(layers, dense_w, dense_b)


def _forward_cached(params: ModelParams, x: np.ndarray, masks=None):
    """Run the stack on a (B, T) batch; returns predictions and the caches
    the backward pass needs. ``masks`` holds one inverted-dropout mask per
    layer (already scaled) or None for inference."""
    inp = np.ascontiguousarray(x, dtype=np.float64)[:, :, None]
    caches = []
    for li, layer in enumerate(params.layers):
        xh_seq, c_seq, gates, h_seq = lstm_layer_forward(
            np.ascontiguousarray(inp), layer.weights, layer.bias)
        out = h_seq[:, 1:, :]
        mask = None if masks is None else masks[li]
        if mask is not None:
            out = out * mask
        caches.append((xh_seq, c_seq, gates, mask))
        inp = out
    h_last = np.ascontiguousarray(inp[:, -1, :])
    pred = h_last @ params.dense_weights.T + params.dense_bias
    return pred, h_last, caches


def forward(params: ModelParams, window) -> np.ndarray:
    """Prediction for one input window (pure network, no value scaling)."""
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1:
        raise DataError("window must be one-dimensional")
    pred, _, _ = _forward_cached(params, w[None, :])
    return pred[0]


def forward_batch(params: ModelParams, windows) -> np.ndarray:
    x = np.asarray(windows, dtype=np.float64)
    pred, _, _ = _forward_cached(params, x)
    return pred


def _loss_and_grads(params: ModelParams, x: np.ndarray, y: np.ndarray, masks=None):
    """MSE loss and gradients in the order of ``params.arrays()``."""
    pred, h_last, caches = _forward_cached(params, x, masks)
    b, la = pred.shape
    diff = pred - y
    loss = float(np.mean(diff * diff))
    dpred = (2.0 / (b * la)) * diff

    d_dense_w = dpred.T @ h_last
    d_dense_b = dpred.sum(axis=0)
    dh_top = dpred @ params.dense_weights

    t_steps = x.shape[1]
    grads_layers = [None] * len(params.layers)
    dout_seq = np.zeros((b, t_steps, params.layers[-1].hidden_size))
    dout_seq[:, -1, :] = dh_top
    for li in range(len(params.layers) - 1, -1, -1):
        xh_seq, c_seq, gates, mask = caches[li]
        if mask is not None:
            dout_seq = dout_seq * mask
        dx_seq, d_w, d_b = lstm_layer_backward(
            params.layers[li].weights, xh_seq, c_seq, gates,
            np.ascontiguousarray(dout_seq))
        grads_layers[li] = (d_w, d_b)
        dout_seq = dx_seq

    grads = []
    for d_w, d_b in grads_layers:
        grads.append(d_w)
        grads.append(d_b)
    grads.append(d_dense_w)
    grads.append(d_dense_b)
    return loss, grads


def _batch_mse(params: ModelParams, x: np.ndarray, y: np.ndarray) -> float:
    total, count = 0.0, 0
    for lo in range(0, len(x), _PREDICT_CHUNK):
        pred, _, _ = _forward_cached(params, x[lo:lo + _PREDICT_CHUNK])
        diff = pred - y[lo:lo + _PREDICT_CHUNK]
        total += float(np.sum(diff * diff))
        count += diff.size
    return total / count


def _window_scaler(windows: WindowSet) -> tuple[float, float]:
    lo = min(float(windows.inputs.min()), float(windows.targets.min()))
    hi = max(float(windows.inputs.max()), float(windows.targets.max()))
    return lo, hi


def train(config: ForecasterConfig, train_windows: WindowSet,
          val_windows: WindowSet) -> tuple[ModelParams, TrainReport]:
    """Adam/MSE training with early stopping.

    Returns the parameters of the best validation epoch. Dropout is active
    only here; validation scoring runs the plain network. A non-finite loss
    aborts with a diagnostic rather than silently continuing.
    """
    if len(train_windows) == 0 or len(val_windows) == 0:
        raise DataError("training and validation window sets must be non-empty")
    stride = config.train_stride
    tr_x, tr_y = train_windows.inputs[::stride], train_windows.targets[::stride]

    rng = np.random.default_rng(config.seed)
    params = init_params(config)
    lo, hi = _window_scaler(train_windows)
    params.value_min, params.value_max = lo, hi

    tr_x = params.scale(tr_x)
    tr_y = params.scale(tr_y)
    va_x = params.scale(val_windows.inputs)
    va_y = params.scale(val_windows.targets)

    arrays = params.arrays()
    adam_m = [np.zeros_like(a) for a in arrays]
    adam_v = [np.zeros_like(a) for a in arrays]
    step = 0

    drop = config.dropout_rate
    layer_sizes = config.recurrent_layer_sizes
    t_steps = config.look_back

    best_mse = math.inf
    best_params = params.copy()
    best_epoch = 0
    bad_epochs = 0
    train_curve: list[float] = []
    val_curve: list[float] = []
    stopped_early = False

    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(len(tr_x))
        sq_sum, n_terms = 0.0, 0
        for start in range(0, len(perm), config.batch_size):
            sel = perm[start:start + config.batch_size]
            xb, yb = tr_x[sel], tr_y[sel]
            masks = None
            if drop > 0.0:
                masks = [
                    (rng.random((len(sel), t_steps, h)) >= drop) / (1.0 - drop)
                    for h in layer_sizes
                ]
            loss, grads = _loss_and_grads(params, xb, yb, masks)
            if not math.isfinite(loss):
                raise NumericalError(
                    f"training diverged: non-finite loss at epoch {epoch}, "
                    f"batch {start // config.batch_size} "
                    f"(learning_rate={config.learning_rate})"
                )
            sq_sum += loss * len(sel)
            n_terms += len(sel)
            step += 1
            bc1 = 1.0 - ADAM_BETA1 ** step
            bc2 = 1.0 - ADAM_BETA2 ** step
            for a, g, m, v in zip(arrays, grads, adam_m, adam_v):
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * g * g
                a -= config.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + ADAM_EPS)

        train_curve.append(sq_sum / n_terms)
        val_mse = _batch_mse(params, va_x, va_y)
        val_curve.append(val_mse)

        if val_mse < best_mse:
            best_mse = val_mse
            best_params = params.copy()
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.early_stopping_patience:
                stopped_early = True
                break

    report = TrainReport(len(train_curve), tuple(train_curve), tuple(val_curve),
                         stopped_early, best_epoch)
    return best_params, report


def gradient_check(params: ModelParams, window, target, epsilon: float = 1e-5,
                   n_samples: int = 150, seed: int = 0) -> float:
    """Max relative deviation between analytic and central-difference
    gradients over a random subsample of parameters."""
    if not 1e-7 <= epsilon <= 1e-3:
        raise DataError("epsilon must lie in [1e-7, 1e-3]")
    x = np.asarray(window, dtype=np.float64)[None, :]
    y = np.asarray(target, dtype=np.float64)[None, :]
    _, grads = _loss_and_grads(params, x, y)

    arrays = params.arrays()
    sizes = [a.size for a in arrays]
    total = sum(sizes)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(total, size=min(n_samples, total), replace=False)

    bounds = np.cumsum([0] + sizes)
    worst = 0.0
    for flat_idx in chosen:
        ai = int(np.searchsorted(bounds, flat_idx, side="right") - 1)
        offset = int(flat_idx - bounds[ai])
        arr = arrays[ai]
        idx = np.unravel_index(offset, arr.shape)
        orig = arr[idx]
        arr[idx] = orig + epsilon
        up, _, _ = _forward_cached(params, x)
        loss_up = float(np.mean((up - y) ** 2))
        arr[idx] = orig - epsilon
        dn, _, _ = _forward_cached(params, x)
        loss_dn = float(np.mean((dn - y) ** 2))
        arr[idx] = orig
        numeric = (loss_up - loss_dn) / (2.0 * epsilon)
        analytic = float(grads[ai][idx])
        dev = abs(analytic - numeric) / (abs(analytic) + abs(numeric) + 1e-12)
        worst = max(worst, dev)
    return worst


def predict_errors(params: ModelParams, series: TimeSeries,
                   config: ForecasterConfig) -> ErrorSeries:
    """Absolute prediction errors over every window of the series, at the
    configured horizon, in original units."""
    windows = make_windows(series, config.look_back, config.look_ahead)
    h = config.horizon_index
    preds = np.empty(len(windows))
    x = params.scale(windows.inputs)
    for lo in range(0, len(windows), _PREDICT_CHUNK):
        out, _, _ = _forward_cached(params, x[lo:lo + _PREDICT_CHUNK])
        preds[lo:lo + _PREDICT_CHUNK] = params.unscale(out[:, h])
    actual = windows.targets[:, h]
    indices = windows.origin_indices + h
    return ErrorSeries(indices, np.abs(actual - preds))


def load_external_errors(path) -> ErrorSeries:
    """Read a two-column (index, error) CSV, with or without a header."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"errors file not found: {path}")
    indices: list[int] = []
    errors: list[float] = []
    with open(path, newline="") as fh:
        for ln, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if ln == 0:
                try:
                    float(row[1])
                except (ValueError, IndexError):
                    continue  # header row
            if len(row) < 2:
                raise DataError(f"{path}:{ln + 1}: expected 'index,error'")
            idx, err = int(row[0]), float(row[1])
            if err < 0:
                raise DataError(f"{path}:{ln + 1}: negative error {err}")
            indices.append(idx)
            errors.append(err)
    if not errors:
        raise DataError(f"{path}: no error rows")
    return ErrorSeries(np.array(indices), np.array(errors))


def save_checkpoint(path, params: ModelParams, config: ForecasterConfig) -> None:
    """JSON checkpoint; float round-trip is exact."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "config": config.to_dict(),
        "scaler": {"value_min": params.value_min, "value_max": params.value_max},
        "layers": [
            {"weights": layer.weights.tolist(), "bias": layer.bias.tolist()}
            for layer in params.layers
        ],
        "dense_weights": params.dense_weights.tolist(),
        "dense_bias": params.dense_bias.tolist(),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def load_checkpoint(path) -> tuple[ModelParams, ForecasterConfig]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    d = json.loads(path.read_text())
    if d.get("format") != CHECKPOINT_FORMAT:
        raise DataError(f"{path}: unsupported checkpoint format {d.get('format')!r}")
    config = ForecasterConfig.from_dict(d["config"])
    layers = [LayerParams(np.array(l["weights"]), np.array(l["bias"]))
              for l in d["layers"]]
    params = ModelParams(layers, np.array(d["dense_weights"]),
                         np.array(d["dense_bias"]),
                         d["scaler"]["value_min"], d["scaler"]["value_max"])
    return params, config
