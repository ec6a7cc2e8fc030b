"""Hybrid quantum-classical beam prediction at desk scale.

A dense statevector simulator (up to 12 qubits) drives a small variational
model: amplitude embedding of the classical features, one or more entangling
layers (per-qubit RY rotations followed by a ring of CNOTs), and per-qubit
Pauli-Z expectations.  Those expectations are concatenated with the raw
features and fed to a linear softmax head; everything trains by full-batch
gradient descent, with circuit gradients from the exact parameter-shift
rule.  A synthetic position-to-beam dataset stands in for field data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidInput, LengthMismatch, TooLong, ZeroVector

MAX_QUBITS = 12
NORM_TOL = 1e-12


@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitudes of a q-qubit register."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amp)
        size = amp.shape[0]
        q = int(np.log2(size)) if size > 0 else -1
        if amp.ndim != 1 or size != 2**q or q < 1:
            raise DimensionMismatch(f"amplitude vector of length {size} is not a qubit register")
        if q > MAX_QUBITS:
            raise InvalidInput(f"{q} qubits exceed the dense-simulation cap of {MAX_QUBITS}")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidInput(f"state norm {norm!r} deviates from 1 beyond {NORM_TOL:g}")

    @property
    def num_qubits(self) -> int:
        return int(np.log2(self.amplitudes.shape[0]))


@dataclass(frozen=True)
class CircuitParams:
    """Trainable rotation angles, one per (layer, qubit)."""

    angles: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        object.__setattr__(self, "angles", a)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise DimensionMismatch("angles must be a (layers, qubits) matrix")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("angles must be finite")

    @property
    def num_layers(self) -> int:
        return self.angles.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.angles.shape[1]


@dataclass(frozen=True)
class HybridModel:
    """Circuit parameters plus the linear softmax head on [z, features]."""

    circuit: CircuitParams
    head_weights: np.ndarray  # (num_beams, num_qubits + feature_dim)
    head_bias: np.ndarray     # (num_beams,)

    def __post_init__(self):
        w = np.asarray(self.head_weights, dtype=float)
        b = np.asarray(self.head_bias, dtype=float)
        object.__setattr__(self, "head_weights", w)
        object.__setattr__(self, "head_bias", b)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise DimensionMismatch("head weights and bias disagree")
        if w.shape[1] <= self.circuit.num_qubits:
            raise DimensionMismatch("head must also see the classical features")

    @property
    def num_beams(self) -> int:
        return self.head_weights.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.head_weights.shape[1] - self.circuit.num_qubits


@dataclass(frozen=True)
class SyntheticBeamDataset:
    features: np.ndarray  # (n, d)
    labels: np.ndarray    # (n,)
    num_beams: int

    def __post_init__(self):
        f = np.asarray(self.features, dtype=float)
        l = np.asarray(self.labels, dtype=int)
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "labels", l)
        if f.ndim != 2 or l.ndim != 1 or f.shape[0] != l.shape[0]:
            raise DimensionMismatch("features and labels disagree")
        if l.size and (l.min() < 0 or l.max() >= self.num_beams):
            raise InvalidInput("labels must lie in [0, num_beams)")

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_beams)


# ---------------------------------------------------------------------------
# statevector primitives (batched over samples; single states are batch 1)

def _embed_batch(x: np.ndarray, num_qubits: int) -> np.ndarray:
    """Zero-pad feature rows to 2^q and normalize each to unit norm."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    dim = 2**num_qubits
    if x.shape[1] > dim:
        raise TooLong(f"{x.shape[1]} features exceed the state dimension {dim}")
    if x.shape[1] < 1:
        raise ZeroVector("need at least one feature")
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0.0):
        raise ZeroVector("cannot amplitude-embed a zero vector")
    states = np.zeros((x.shape[0], dim), dtype=complex)
    states[:, : x.shape[1]] = x / norms[:, None]
    return states


def _apply_ry_batch(states: np.ndarray, angle: float, qubit: int, num_qubits: int) -> np.ndarray:
    shaped = states.reshape(states.shape[0], 2**qubit, 2, -1)
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    top = c * shaped[:, :, 0, :] - s * shaped[:, :, 1, :]
    bottom = s * shaped[:, :, 0, :] + c * shaped[:, :, 1, :]
    return np.stack([top, bottom], axis=2).reshape(states.shape)


def _apply_cnot_batch(states: np.ndarray, control: int, target: int, num_qubits: int) -> np.ndarray:
    shaped = states.reshape(states.shape[0], *([2] * num_qubits))
    out = shaped.copy()
    index_one = [slice(None)] * (num_qubits + 1)
    index_one[1 + control] = 1
    block = out[tuple(index_one)]
    out[tuple(index_one)] = np.flip(block, axis=1 + target - (1 if target > control else 0))
    return out.reshape(states.shape)


def _layer_batch(states: np.ndarray, layer_angles: np.ndarray, num_qubits: int) -> np.ndarray:
    for k in range(num_qubits):
        states = _apply_ry_batch(states, float(layer_angles[k]), k, num_qubits)
    if num_qubits > 1:
        for k in range(num_qubits):
            states = _apply_cnot_batch(states, k, (k + 1) % num_qubits, num_qubits)
    return states


def _measure_z_batch(states: np.ndarray, num_qubits: int) -> np.ndarray:
    probs = np.abs(states) ** 2
    shaped = probs.reshape(probs.shape[0], *([2] * num_qubits))
    out = np.empty((probs.shape[0], num_qubits))
    for k in range(num_qubits):
        axes = tuple(i + 1 for i in range(num_qubits) if i != k)
        marginal = shaped.sum(axis=axes)
        out[:, k] = marginal[:, 0] - marginal[:, 1]
    return out


def _forward_batch(angles: np.ndarray, x: np.ndarray, num_qubits: int) -> np.ndarray:
    states = _embed_batch(x, num_qubits)
    for layer in angles:
        states = _layer_batch(states, layer, num_qubits)
    return _measure_z_batch(states, num_qubits)


# ---------------------------------------------------------------------------
# public single-state operations

def amplitude_embed(x: np.ndarray, num_qubits: int) -> StateVector:
    """Encode a feature vector as normalized amplitudes (zero-padded)."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise InvalidInput(f"qubit count must be in [1, {MAX_QUBITS}]")
    return StateVector(_embed_batch(np.asarray(x, float).reshape(1, -1), num_qubits)[0])


def entangling_layer(state: StateVector, layer_angles: np.ndarray) -> StateVector:
    """RY on every qubit, then CNOTs in a ring (control k, target k+1 mod q)."""
    angles = np.asarray(layer_angles, dtype=float).reshape(-1)
    q = state.num_qubits
    if angles.shape[0] != q:
        raise DimensionMismatch(f"{angles.shape[0]} angles for {q} qubits")
    out = _layer_batch(state.amplitudes[None, :], angles, q)[0]
    return StateVector(out)


def measure_z(state: StateVector) -> np.ndarray:
    """Exact per-qubit Pauli-Z expectations."""
    return _measure_z_batch(state.amplitudes[None, :], state.num_qubits)[0]


def circuit_outputs(params: CircuitParams, x: np.ndarray) -> np.ndarray:
    """Z-expectations of the full circuit on one feature vector."""
    return _forward_batch(params.angles, np.asarray(x, float).reshape(1, -1), params.num_qubits)[0]


def parameter_shift_grad(params: CircuitParams, x: np.ndarray, loss_grad_z) -> np.ndarray:
    """Gradient of a loss over all angles by the exact parameter-shift rule.

    ``loss_grad_z`` maps the circuit outputs z to dloss/dz; the angle
    gradient composes it with dz/dtheta = [z(theta + pi/2) - z(theta -
    pi/2)] / 2, which is exact for RY generators.
    """
    x = np.asarray(x, float).reshape(1, -1)
    z = _forward_batch(params.angles, x, params.num_qubits)[0]
    dl_dz = np.asarray(loss_grad_z(z), dtype=float).reshape(-1)
    if dl_dz.shape[0] != params.num_qubits:
        raise DimensionMismatch("loss gradient length must equal the qubit count")
    grad = np.zeros_like(params.angles)
    for l in range(params.num_layers):
        for k in range(params.num_qubits):
            plus = params.angles.copy()
            plus[l, k] += np.pi / 2.0
            minus = params.angles.copy()
            minus[l, k] -= np.pi / 2.0
            dz = (
                _forward_batch(plus, x, params.num_qubits)[0]
                - _forward_batch(minus, x, params.num_qubits)[0]
            ) / 2.0
            grad[l, k] = float(dl_dz @ dz)
    return grad


# ---------------------------------------------------------------------------
# metrics

def cross_entropy(logits: np.ndarray, labels: np.ndarray) -> float:
    """Mean softmax cross-entropy in nats (log-sum-exp form)."""
    logits = np.atleast_2d(logits)
    shifted = logits - np.max(logits, axis=1, keepdims=True)
    lse = np.log(np.sum(np.exp(shifted), axis=1)) + np.max(logits, axis=1)
    return float(np.mean(lse - logits[np.arange(len(labels)), labels]))


def distance_accuracy(predictions, labels, delta: int) -> float:
    """Fraction of predictions within ``delta`` beam indices of the truth."""
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if predictions.shape != labels.shape:
        raise LengthMismatch("predictions and labels differ in length")
    return float(np.mean(np.abs(predictions - labels) <= delta))


def confusion_matrix(predictions, labels, num_beams: int) -> np.ndarray:
    """Counts[i, j] = samples with true beam i predicted as beam j."""
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if predictions.shape != labels.shape:
        raise LengthMismatch("predictions and labels differ in length")
    if labels.size and (labels.max() >= num_beams or predictions.max() >= num_beams):
        raise InvalidInput("indices must be below num_beams")
    counts = np.zeros((num_beams, num_beams), dtype=int)
    np.add.at(counts, (labels, predictions), 1)
    return counts


# ---------------------------------------------------------------------------
# synthetic data and training

def generate_synthetic_dataset(
    n: int, num_beams: int, noise_sigma: float, rng: np.random.Generator
) -> SyntheticBeamDataset:
    """Positions uniform in the unit square, beams = angle sectors.

    The label quantizes the angle to the square's center into ``num_beams``
    equal sectors (for eight beams each sector carries exactly 1/8 of the
    mass by symmetry); features are the positions plus Gaussian noise.
    """
    if n < num_beams:
        raise InvalidInput("need at least one sample per beam")
    positions = rng.uniform(0.0, 1.0, (n, 2))
    angles = np.arctan2(positions[:, 1] - 0.5, positions[:, 0] - 0.5)
    labels = np.floor((angles + np.pi) / (2.0 * np.pi) * num_beams).astype(int)
    labels = np.clip(labels, 0, num_beams - 1)
    features = positions + noise_sigma * rng.standard_normal((n, 2))
    return SyntheticBeamDataset(features, labels, num_beams)


def init_hybrid_model(
    num_qubits: int, num_layers: int, feature_dim: int, num_beams: int, rng: np.random.Generator
) -> HybridModel:
    angles = rng.uniform(-np.pi, np.pi, (num_layers, num_qubits))
    weights = 0.01 * rng.standard_normal((num_beams, num_qubits + feature_dim))
    bias = np.zeros(num_beams)
    return HybridModel(CircuitParams(angles), weights, bias)


def hybrid_logits(model: HybridModel, features: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(features, dtype=float))
    z = _forward_batch(model.circuit.angles, x, model.circuit.num_qubits)
    joint = np.concatenate([z, x], axis=1)
    return joint @ model.head_weights.T + model.head_bias


def hybrid_predictions(model: HybridModel, features: np.ndarray) -> np.ndarray:
    return np.argmax(hybrid_logits(model, features), axis=1)


def _split_metrics(model, features, labels) -> dict:
    logits = hybrid_logits(model, features)
    preds = np.argmax(logits, axis=1)
    return {
        "cross_entropy": cross_entropy(logits, labels),
        "acc_delta0": distance_accuracy(preds, labels, 0),
        "acc_delta1": distance_accuracy(preds, labels, 1),
        "acc_delta2": distance_accuracy(preds, labels, 2),
    }


def train_hybrid(
    dataset: SyntheticBeamDataset,
    model: HybridModel,
    epochs: int,
    learning_rate: float,
    rng: np.random.Generator,
) -> tuple[HybridModel, list[dict]]:
    """Full-batch gradient descent on softmax cross-entropy.

    The dataset splits 80/20 into train/validation by a seeded permutation.
    Head gradients are analytic; angle gradients use the parameter-shift
    rule batched over the training split.  Returns the trained model and one
    trace row per (epoch, split) with loss and distance accuracies.
    """
    if epochs < 1:
        raise InvalidInput("epochs must be >= 1")
    n = dataset.features.shape[0]
    order = rng.permutation(n)
    cut = max(1, int(round(0.8 * n)))
    train_idx, val_idx = order[:cut], order[cut:]
    x_train, y_train = dataset.features[train_idx], dataset.labels[train_idx]
    x_val, y_val = dataset.features[val_idx], dataset.labels[val_idx]
    q = model.circuit.num_qubits
    layers = model.circuit.num_layers
    angles = model.circuit.angles.copy()
    weights = model.head_weights.copy()
    bias = model.head_bias.copy()
    trace: list[dict] = []
    n_train = len(train_idx)
    for epoch in range(1, epochs + 1):
        z = _forward_batch(angles, x_train, q)
        joint = np.concatenate([z, x_train], axis=1)
        logits = joint @ weights.T + bias
        shifted = logits - np.max(logits, axis=1, keepdims=True)
        exp = np.exp(shifted)
        probs = exp / exp.sum(axis=1, keepdims=True)
        dlogits = probs.copy()
        dlogits[np.arange(n_train), y_train] -= 1.0
        dlogits /= n_train
        grad_w = dlogits.T @ joint
        grad_b = dlogits.sum(axis=0)
        dz = dlogits @ weights[:, :q]  # (n, q)
        grad_angles = np.zeros_like(angles)
        for l in range(layers):
            for k in range(q):
                plus = angles.copy()
                plus[l, k] += np.pi / 2.0
                minus = angles.copy()
                minus[l, k] -= np.pi / 2.0
                dz_dtheta = (_forward_batch(plus, x_train, q) - _forward_batch(minus, x_train, q)) / 2.0
                grad_angles[l, k] = float(np.sum(dz * dz_dtheta))
        weights -= learning_rate * grad_w
        bias -= learning_rate * grad_b
        angles -= learning_rate * grad_angles
        current = HybridModel(CircuitParams(angles.copy()), weights.copy(), bias.copy())
        trace.append({"epoch": epoch, "split": "train", **_split_metrics(current, x_train, y_train)})
        trace.append({"epoch": epoch, "split": "val", **_split_metrics(current, x_val, y_val)})
    return HybridModel(CircuitParams(angles), weights, bias), trace


TRACE_COLUMNS = ("epoch", "split", "cross_entropy", "acc_delta0", "acc_delta1", "acc_delta2")


def trace_csv_rows(trace: list[dict]) -> list[str]:
    rows = [",".join(TRACE_COLUMNS)]
    for entry in trace:
        rows.append(
            f"{entry['epoch']},{entry['split']},{entry['cross_entropy']:.17g},"
            f"{entry['acc_delta0']:.17g},{entry['acc_delta1']:.17g},{entry['acc_delta2']:.17g}"
        )
    return rows


def confusion_csv_rows(counts: np.ndarray) -> list[str]:
    return [",".join(str(int(v)) for v in row) for row in counts]


def dataset_csv_rows(dataset: SyntheticBeamDataset) -> list[str]:
    width = dataset.features.shape[1]
    rows = [",".join(f"feature_{i}" for i in range(width)) + ",label"]
    for feat, label in zip(dataset.features, dataset.labels):
        rows.append(",".join(f"{v:.17g}" for v in feat) + f",{int(label)}")
    return rows


def load_dataset_csv(lines, num_beams: int) -> SyntheticBeamDataset:
    body = [line for line in lines[1:] if line.strip()]
    features = np.array([[float(v) for v in line.split(",")[:-1]] for line in body])
    labels = np.array([int(line.split(",")[-1]) for line in body])
    return SyntheticBeamDataset(features, labels, num_beams)
