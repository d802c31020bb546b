"""Policy factory: maps a (kind, topology, normalization) triple to genome
sizes, initial genome distributions, and fresh policy instances.

Initial distributions follow the hand-tuned ranges used for training:
FF and LSTM weights uniform in (-0.1, 0.1), Hebbian rule coefficients
normal with mean 0 and std 0.01.
"""

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .baselines import FFPolicy, LSTMPolicy, ff_genome_size, lstm_genome_size
from .errors import ConfigError
from .plastic import HebbianPolicy, rule_genome_size, shape_chain, synapse_count
from .topology import Topology

POLICY_KINDS = ("ff", "hebbian", "lstm")

HEBBIAN_COEFF_INIT_STD = 0.01


@dataclass(frozen=True)
class PolicySpec:
    """Picklable recipe for building one policy family on one topology."""

    kind: str
    topology: Topology
    normalization: str = "max"

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")

    @property
    def shapes(self):
        return shape_chain(self.topology.ff_sizes)

    @property
    def genome_size(self):
        if self.kind == "ff":
            return ff_genome_size(self.topology)
        if self.kind == "hebbian":
            return rule_genome_size(self.shapes)
        return lstm_genome_size(self.topology)

    @property
    def plastic_size(self):
        if self.kind == "ff":
            return 0
        if self.kind == "hebbian":
            return synapse_count(self.shapes)
        return 2 * self.topology.lstm_hidden

    def initial_genome(self, master_seed):
        """Starting point for evolution, drawn from the init stream."""
        rng = rngmod.stream(master_seed, rngmod.STREAM_INIT)
        n = self.genome_size
        if self.kind == "hebbian":
            return rng.normal(0.0, HEBBIAN_COEFF_INIT_STD, n)
        return rngmod.uniform_open(rng, -0.1, 0.1, n)

    def build(self, genome):
        if self.kind == "ff":
            return FFPolicy(genome, self.shapes)
        if self.kind == "hebbian":
            return HebbianPolicy.from_genome(genome, self.shapes, self.normalization)
        t = self.topology
        return LSTMPolicy(genome, t.obs_size, t.lstm_hidden, t.action_size)
