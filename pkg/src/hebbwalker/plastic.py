"""Hebbian-plastic feedforward network.

A layered tanh network whose weights are rewritten online: after every forward
pass each synapse (i, j) receives

    delta_w = eta * (A * o_i * o_j + B * o_i + C * o_j + D)

with o_i the activation entering the synapse and o_j the activation it
produced, and per-synapse coefficients (A, B, C, D, eta) supplied by the
evolved genome. The update is followed by exactly one layer-wise
normalization (max or std) to keep the weights bounded.

Weight matrices use the (output, input) convention: layer output is
tanh(W @ x). All math is float64.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ConfigError, InputError, InternalError
from .rng import uniform_open

WEIGHT_INIT_LOW = -0.01
WEIGHT_INIT_HIGH = 0.01


@dataclass(frozen=True)
class LayerShape:
    input_size: int
    output_size: int

    def __post_init__(self):
        if self.input_size < 1 or self.output_size < 1:
            raise ConfigError(f"layer sizes must be >= 1, got {self}")

    @property
    def synapses(self):
        return self.input_size * self.output_size


def shape_chain(sizes):
    """Chain of LayerShapes from consecutive widths, e.g. (27, 64, 32, 18)."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) < 2:
        raise ConfigError("need at least two widths to form a layer chain")
    return tuple(LayerShape(a, b) for a, b in zip(sizes, sizes[1:]))


def validate_chain(shapes):
    if not shapes:
        raise ConfigError("empty shape chain")
    for a, b in zip(shapes, shapes[1:]):
        if a.output_size != b.input_size:
            raise ConfigError(f"incompatible consecutive shapes {a} -> {b}")


def synapse_count(shapes):
    return sum(s.synapses for s in shapes)


def init_weights(shapes, rng_seed):
    """Fresh weight matrices, i.i.d. uniform in the open (-0.01, 0.01)."""
    validate_chain(shapes)
    rng = np.random.default_rng(int(rng_seed))
    return [
        uniform_open(rng, WEIGHT_INIT_LOW, WEIGHT_INIT_HIGH, (s.output_size, s.input_size))
        for s in shapes
    ]


def forward(weights, observation):
    """Evaluate the network; returns (action, trace).

    The trace is a list of (pre, post) activation pairs per layer, where pre
    is the layer input and post the tanh output, as consumed by
    hebbian_step. Pure: no state is modified.
    """
    x = np.asarray(observation, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != weights[0].shape[1]:
        raise InputError(
            f"observation length {x.shape} does not match input size {weights[0].shape[1]}"
        )
    trace = []
    for w in weights:
        y = np.tanh(w @ x)
        trace.append((x, y))
        x = y
    return x, trace


def hebbian_step(weights, rules, trace):
    """Apply one ABCD update to every layer; returns new weight matrices.

    Normalization is deliberately not applied here; callers follow up with
    normalize_max or normalize_std.
    """
    if len(weights) != len(rules.a) or len(weights) != len(trace):
        raise InternalError("weights / rules / trace layer counts differ")
    out = []
    for k, w in enumerate(weights):
        pre, post = trace[k]
        if w.shape != rules.a[k].shape or pre.shape[0] != w.shape[1] or post.shape[0] != w.shape[0]:
            raise InternalError(f"shape mismatch in layer {k}")
        corr = post[:, None] * pre[None, :]
        delta = rules.eta[k] * (
            rules.a[k] * corr + rules.b[k] * pre[None, :] + rules.c[k] * post[:, None] + rules.d[k]
        )
        out.append(w + delta)
    return out


def normalize_max(weights):
    """Divide each layer by its largest absolute weight (all-zero layers pass through)."""
    out = []
    for w in weights:
        m = np.abs(w).max()
        out.append(w / m if m > 0.0 else w.copy())
    return out


def normalize_std(weights):
    """Center and scale each layer to mean 0, population std 1.

    Layers with zero variance collapse to all zeros rather than dividing by
    zero.
    """
    out = []
    for w in weights:
        if w.size < 2:
            raise InputError("std normalization needs at least 2 weights per layer")
        sd = w.std()
        out.append((w - w.mean()) / sd if sd > 0.0 else np.zeros_like(w))
    return out


NORMALIZERS = {"max": normalize_max, "std": normalize_std}


@dataclass
class HebbianRules:
    """Per-synapse coefficient arrays, one (output, input) matrix per layer."""

    a: list
    b: list
    c: list
    d: list
    eta: list


def rule_genome_size(shapes):
    return 5 * synapse_count(shapes)


def genome_to_rules(genome, shapes):
    """Unpack a flat genome into per-layer coefficient matrices.

    Layout: for each layer in chain order, the blocks A, B, C, D, eta, each
    raveled row-major over the (output, input) matrix. Inverse of
    rules_to_genome.
    """
    validate_chain(shapes)
    genome = np.asarray(genome, dtype=np.float64)
    expected = rule_genome_size(shapes)
    if genome.ndim != 1 or genome.shape[0] != expected:
        raise ConfigError(f"rule genome length {genome.shape} != expected {expected}")
    rules = HebbianRules([], [], [], [], [])
    offset = 0
    for s in shapes:
        n = s.synapses
        for field in (rules.a, rules.b, rules.c, rules.d, rules.eta):
            block = genome[offset : offset + n].reshape(s.output_size, s.input_size)
            field.append(block)
            offset += n
    return rules


def rules_to_genome(rules):
    blocks = []
    for k in range(len(rules.a)):
        for field in (rules.a, rules.b, rules.c, rules.d, rules.eta):
            blocks.append(field[k].ravel())
    return np.concatenate(blocks)


class HebbianPolicy:
    """Plastic controller: forward pass, ABCD update, then one normalization.

    The evolved genome holds the rule coefficients; the weights themselves are
    re-initialized randomly at every episode via reset(), which is what makes
    the controller's behavior an attractor of the learning rules rather than
    of any particular weight values.
    """

    kind = "hebbian"

    def __init__(self, shapes, rules, normalization="max"):
        validate_chain(shapes)
        if normalization not in NORMALIZERS:
            raise ConfigError(f"unknown normalization {normalization!r}")
        self.shapes = tuple(shapes)
        self.rules = rules
        self.normalization = normalization
        self._normalize = NORMALIZERS[normalization]
        self.weights = None

    @classmethod
    def from_genome(cls, genome, shapes, normalization="max"):
        return cls(shapes, genome_to_rules(genome, shapes), normalization)

    @property
    def obs_size(self):
        return self.shapes[0].input_size

    @property
    def action_size(self):
        return self.shapes[-1].output_size

    @property
    def genome_size(self):
        return rule_genome_size(self.shapes)

    @property
    def plastic_size(self):
        return synapse_count(self.shapes)

    def reset(self, seed):
        self.weights = init_weights(self.shapes, seed)

    def act(self, observation):
        if self.weights is None:
            raise InternalError("policy used before reset()")
        action, trace = forward(self.weights, observation)
        if _kernels.HAVE_NUMBA:
            # in-place jitted twin of hebbian_step + normalize_*
            update = _kernels.hebbian_update_inplace
            norm = (
                _kernels.normalize_max_inplace
                if self.normalization == "max"
                else _kernels.normalize_std_inplace
            )
            rules = self.rules
            for k, w in enumerate(self.weights):
                pre, post = trace[k]
                update(w, rules.a[k], rules.b[k], rules.c[k], rules.d[k], rules.eta[k], pre, post)
                norm(w)
        else:
            self.weights = self._normalize(hebbian_step(self.weights, self.rules, trace))
        return action

    def plastic_snapshot(self):
        return np.concatenate([w.ravel() for w in self.weights])
