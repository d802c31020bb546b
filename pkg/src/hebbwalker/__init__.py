"""Plastic locomotion controllers trained by evolution strategies.

Core pieces: a Hebbian-plastic feedforward controller with layer-wise weight
normalization, static FF/LSTM baselines with matched parameter budgets, a
deterministic kinematic walker environment, a mirrored-sampling ES optimizer,
and PCA-based weight-dynamics analysis.
"""

__version__ = "0.1.0"

from .analysis import PCAResult, attractor_class, oscillation_gate_test, pc_spread, pca
from .baselines import FFPolicy, LSTMPolicy, init_lstm_states, lstm_param_count
from .es import ESConfig, GenerationRecord, TrainRun, centered_ranks, es_update, sample_noise, train
from .plastic import (
    HebbianPolicy,
    HebbianRules,
    LayerShape,
    forward,
    genome_to_rules,
    hebbian_step,
    init_weights,
    normalize_max,
    normalize_std,
    rules_to_genome,
    shape_chain,
)
from .policies import PolicySpec
from .topology import BEETLE, GECKO, Topology, get_topology
from .traces import EpisodeTrace
from .walker import (
    DamageSpec,
    Terrain,
    WalkerConfig,
    WalkerState,
    beetle_config,
    gecko_config,
    make_terrain,
    observe,
    reset,
    run_episode,
    step,
    step_reward,
)
