"""Static baseline policies: a plain feedforward network and an LSTM.

Both share the evolved-genome interface of the plastic controller but keep
their weights fixed within an episode. The LSTM's hidden and cell states are
its only plastic values (2 x hidden = 120 for the default size 60).

LSTM parameter layout
---------------------
The cell is the standard four-gate LSTM (input, forget, candidate, output)
over [x_t, h_{t-1}] with one bias vector per gate. The action readout maps
the concatenation [h_t, x_t] to the outputs with no bias and a tanh squash.
For sizes 27 -> 60 -> 18 this gives

    4 * (60*27 + 60*60 + 60) + 18 * (60 + 27) = 21,120 + 1,566 = 22,686

evolved parameters, this controller's target budget. (A readout over
h_t alone, with or without bias, cannot reach that count.)
"""

import numpy as np

from .errors import ConfigError, InputError, InternalError
from .plastic import forward, shape_chain, synapse_count, validate_chain
from .rng import uniform_open

FF_INIT_LOW = -0.1
FF_INIT_HIGH = 0.1
LSTM_STATE_INIT_LOW = -0.01
LSTM_STATE_INIT_HIGH = 0.01


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


class FFPolicy:
    """Non-plastic tanh feedforward controller; genome is the flat weights."""

    kind = "ff"

    def __init__(self, genome, shapes):
        validate_chain(shapes)
        genome = np.asarray(genome, dtype=np.float64)
        expected = synapse_count(shapes)
        if genome.ndim != 1 or genome.shape[0] != expected:
            raise ConfigError(f"FF genome length {genome.shape} != expected {expected}")
        self.shapes = tuple(shapes)
        self.weights = []
        offset = 0
        for s in shapes:
            n = s.synapses
            self.weights.append(genome[offset : offset + n].reshape(s.output_size, s.input_size))
            offset += n

    @property
    def obs_size(self):
        return self.shapes[0].input_size

    @property
    def action_size(self):
        return self.shapes[-1].output_size

    @property
    def genome_size(self):
        return synapse_count(self.shapes)

    @property
    def plastic_size(self):
        return 0

    def reset(self, seed):
        # Nothing plastic to re-draw; weights are fixed for the whole run.
        pass

    def act(self, observation):
        action, _ = forward(self.weights, observation)
        return action

    def plastic_snapshot(self):
        return np.empty(0, dtype=np.float64)


def lstm_param_count(input_size, hidden_size, output_size):
    gates = 4 * (hidden_size * input_size + hidden_size * hidden_size + hidden_size)
    readout = output_size * (hidden_size + input_size)
    return gates + readout


def init_lstm_states(rng_seed, hidden_size=60):
    """Fresh (hidden, cell) vectors, uniform in the open (-0.01, 0.01)."""
    rng = np.random.default_rng(int(rng_seed))
    both = uniform_open(rng, LSTM_STATE_INIT_LOW, LSTM_STATE_INIT_HIGH, (2, hidden_size))
    return both[0], both[1]


class LSTMPolicy:
    """Single-cell LSTM controller with tanh action readout over [h, x]."""

    kind = "lstm"

    def __init__(self, genome, input_size, hidden_size, output_size):
        genome = np.asarray(genome, dtype=np.float64)
        expected = lstm_param_count(input_size, hidden_size, output_size)
        if genome.ndim != 1 or genome.shape[0] != expected:
            raise ConfigError(f"LSTM genome length {genome.shape} != expected {expected}")
        self.input_size = input_size
        self.hidden_size = hidden_size
        self.output_size = output_size

        h, i, o = hidden_size, input_size, output_size
        cur = 0
        self.w_x = genome[cur : cur + 4 * h * i].reshape(4 * h, i)
        cur += 4 * h * i
        self.w_h = genome[cur : cur + 4 * h * h].reshape(4 * h, h)
        cur += 4 * h * h
        self.bias = genome[cur : cur + 4 * h]
        cur += 4 * h
        self.w_out = genome[cur : cur + o * (h + i)].reshape(o, h + i)
        cur += o * (h + i)
        assert cur == expected

        self.hidden = None
        self.cell = None

    @property
    def obs_size(self):
        return self.input_size

    @property
    def action_size(self):
        return self.output_size

    @property
    def genome_size(self):
        return lstm_param_count(self.input_size, self.hidden_size, self.output_size)

    @property
    def plastic_size(self):
        return 2 * self.hidden_size

    def reset(self, seed):
        self.hidden, self.cell = init_lstm_states(seed, self.hidden_size)

    def act(self, observation):
        if self.hidden is None:
            raise InternalError("policy used before reset()")
        x = np.asarray(observation, dtype=np.float64)
        if x.ndim != 1 or x.shape[0] != self.input_size:
            raise InputError(f"observation length {x.shape} != input size {self.input_size}")
        h = self.hidden_size
        z = self.w_x @ x + self.w_h @ self.hidden + self.bias
        gate_in = _sigmoid(z[0:h])
        gate_forget = _sigmoid(z[h : 2 * h])
        candidate = np.tanh(z[2 * h : 3 * h])
        gate_out = _sigmoid(z[3 * h : 4 * h])
        self.cell = gate_forget * self.cell + gate_in * candidate
        self.hidden = gate_out * np.tanh(self.cell)
        return np.tanh(self.w_out @ np.concatenate([self.hidden, x]))

    def plastic_snapshot(self):
        return np.concatenate([self.hidden, self.cell])


def ff_genome_size(topology):
    return synapse_count(shape_chain(topology.ff_sizes))


def lstm_genome_size(topology):
    return lstm_param_count(topology.obs_size, topology.lstm_hidden, topology.action_size)
