"""From-scratch two-layer dense network holding the Q-function.

Architecture: input -> 1013 ReLU units -> 4 linear outputs, one raw
Q-value per compass action. Training is plain SGD on the squared error of
the taken action's output; gradients are computed analytically and the
test suite cross-checks them against central finite differences.

Q-values stay linear (unbounded) so they can regress onto reward-scale
targets; ``softmax_policy_view`` offers a probability view of the same
values for reporting, and it never feeds back into training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HIDDEN_UNITS = 1013
N_ACTIONS = 4

# Largest SGD step that stays comfortably inside the stable region for
# reward-scale (~10^2) targets on these bounded 0/1 inputs: 5e-4 already
# diverges after an episode of training, so keep a 2.5x margin.
DEFAULT_LEARNING_RATE = 0.0002

RELU = "relu"
LINEAR = "linear"


class ShapeError(ValueError):
    """Input vector length does not match the network."""


class NumericalError(ArithmeticError):
    """A gradient came out non-finite."""


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    biases: np.ndarray  # (out_dim,)
    activation: str  # RELU or LINEAR

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]


@dataclass
class QNetwork:
    layer1: DenseLayer
    layer2: DenseLayer
    learning_rate: float = DEFAULT_LEARNING_RATE

    @property
    def input_size(self) -> int:
        return self.layer1.in_dim

    def copy(self) -> "QNetwork":
        return QNetwork(
            layer1=DenseLayer(
                self.layer1.weights.copy(), self.layer1.biases.copy(), self.layer1.activation
            ),
            layer2=DenseLayer(
                self.layer2.weights.copy(), self.layer2.biases.copy(), self.layer2.activation
            ),
            learning_rate=self.learning_rate,
        )


def _init_layer(in_dim: int, out_dim: int, activation: str, rng: np.random.Generator) -> DenseLayer:
    # Symmetric uniform init scaled by 1/sqrt(fan-in); biases start at zero.
    scale = (1.0 / in_dim) ** 0.5
    weights = rng.uniform(-scale, scale, size=(out_dim, in_dim))
    return DenseLayer(weights=weights, biases=np.zeros(out_dim), activation=activation)


def init_network(
    rows: int,
    cols: int,
    rng: np.random.Generator,
    learning_rate: float = DEFAULT_LEARNING_RATE,
) -> QNetwork:
    """Build the network for a rows x cols map (input 3 * rows * cols).

    The same seed always produces the same parameters.
    """
    if rows < 2 or cols < 2:
        raise ValueError("maps are at least 2x2")
    input_size = 3 * rows * cols
    return QNetwork(
        layer1=_init_layer(input_size, HIDDEN_UNITS, RELU, rng),
        layer2=_init_layer(HIDDEN_UNITS, N_ACTIONS, LINEAR, rng),
        learning_rate=learning_rate,
    )


def _apply(layer: DenseLayer, x: np.ndarray) -> np.ndarray:
    z = layer.weights @ x + layer.biases
    if layer.activation == RELU:
        return np.maximum(z, 0.0)
    return z


def forward(net: QNetwork, observation: np.ndarray) -> np.ndarray:
    """Q-values for all actions: layer2(relu(layer1(observation)))."""
    observation = np.asarray(observation, dtype=float)
    if observation.shape != (net.input_size,):
        raise ShapeError(
            f"observation has shape {observation.shape}, expected ({net.input_size},)"
        )
    return _apply(net.layer2, _apply(net.layer1, observation))


def softmax_policy_view(qvalues: np.ndarray) -> np.ndarray:
    """Probability view of the Q-values (read-only; training never uses it).

    Max-subtraction keeps the exponentials finite for any input scale, and
    the argmax is the same as on the raw Q-values.
    """
    qvalues = np.asarray(qvalues, dtype=float)
    shifted = qvalues - qvalues.max()
    exp = np.exp(shifted)
    return exp / exp.sum()


def train_step(
    net: QNetwork, observation: np.ndarray, action: int, target: float
) -> tuple[QNetwork, float]:
    """One SGD step on the squared error of the taken action's Q-value.

    Only that output's error drives the update, so layer-2 rows for the
    other actions never move. Parameters are updated in place; the loss
    at the post-update parameters is returned for logging.
    """
    observation = np.asarray(observation, dtype=float)
    if observation.shape != (net.input_size,):
        raise ShapeError(
            f"observation has shape {observation.shape}, expected ({net.input_size},)"
        )
    action = int(action)

    w1, b1 = net.layer1.weights, net.layer1.biases
    w2, b2 = net.layer2.weights, net.layer2.biases

    # Overflow here shows up as non-finite gradients, reported below as
    # NumericalError rather than as numpy warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        z1 = w1 @ observation + b1
        hidden = np.maximum(z1, 0.0)
        q_action = w2[action] @ hidden + b2[action]

        grad_q = 2.0 * (q_action - target)
        if not np.isfinite(grad_q):
            raise NumericalError("non-finite gradient in train_step")

        # Backprop through the taken action's output only.
        grad_hidden = grad_q * w2[action]
        grad_z1 = np.where(z1 > 0.0, grad_hidden, 0.0)
        if not np.isfinite(grad_z1).all():
            raise NumericalError("non-finite gradient in train_step")

        lr = net.learning_rate
        w2[action] -= lr * grad_q * hidden
        b2[action] -= lr * grad_q
        w1 -= np.outer(lr * grad_z1, observation)
        b1 -= lr * grad_z1

        # Post-update loss, without a second full forward pass: the layer-1
        # update shifts each pre-activation by exactly
        # -lr * grad_z1 * (x.x + 1), since dW1 = outer(grad_z1, x), db1 = grad_z1.
        z1_after = z1 - (lr * (observation @ observation + 1.0)) * grad_z1
        q_after = w2[action] @ np.maximum(z1_after, 0.0) + b2[action]
        residual = q_after - target
    return net, float(residual * residual)


# Parameter snapshot file: a small text format so runs can be resumed or
# inspected without pickle. Layout:
#   line 1: "swarmcover-qnet 1"
#   line 2: "learning_rate <repr float>"
#   per layer: "layer <out_dim> <in_dim> <activation>" followed by
#   out_dim*in_dim weight lines then out_dim bias lines, row-major, one
#   repr float per line (repr round-trips exactly).

SNAPSHOT_MAGIC = "swarmcover-qnet 1"


def save_network(net: QNetwork, path: str) -> None:
    lines = [SNAPSHOT_MAGIC, f"learning_rate {net.learning_rate!r}"]
    for layer in (net.layer1, net.layer2):
        lines.append(f"layer {layer.out_dim} {layer.in_dim} {layer.activation}")
        lines.extend(repr(v) for v in layer.weights.ravel().tolist())
        lines.extend(repr(v) for v in layer.biases.tolist())
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


def load_network(path: str) -> QNetwork:
    with open(path, encoding="utf-8") as handle:
        lines = handle.read().splitlines()
    if not lines or lines[0] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path} is not a network snapshot")
    key, value = lines[1].split(maxsplit=1)
    if key != "learning_rate":
        raise ValueError("snapshot missing learning_rate line")
    learning_rate = float(value)
    layers = []
    pos = 2
    for _ in range(2):
        tag, out_dim, in_dim, activation = lines[pos].split()
        if tag != "layer":
            raise ValueError(f"expected layer header at line {pos + 1}")
        out_dim, in_dim = int(out_dim), int(in_dim)
        pos += 1
        n_weights = out_dim * in_dim
        weights = np.array([float(v) for v in lines[pos : pos + n_weights]])
        pos += n_weights
        biases = np.array([float(v) for v in lines[pos : pos + out_dim]])
        pos += out_dim
        layers.append(
            DenseLayer(weights.reshape(out_dim, in_dim), biases, activation)
        )
    return QNetwork(layer1=layers[0], layer2=layers[1], learning_rate=learning_rate)
