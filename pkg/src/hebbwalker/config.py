"""Run configuration: a single JSON file describing one training run.

Required keys: policy, topology, master_seed. Everything else has desk-scale
defaults (population 256, 150 generations); full-scale values (population
1024, 500 generations) are plain overrides in the es section.

Example
-------
{
  "policy": "hebbian",            // ff | hebbian | lstm
  "normalization": "max",         // max | std (hebbian only)
  "topology": "beetle",           // beetle | gecko
  "master_seed": 1,
  "out_dir": "runs/demo",
  "es": {"population_size": 256, "generations": 150, "workers": 1},
  "walker": {"episode_steps": 500},
  "terrain": {"kind": "flat", "h_max": 0.04, "seed": 0},
  "damage": {"preset": "none"},
  "checkpoint_interval": 25
}

The config hash covers every field that shapes the training trajectory;
worker count and output paths are deliberately excluded, since the trajectory
is independent of both.
"""

import hashlib
import json
from dataclasses import dataclass

from .errors import ConfigError
from .es import ESConfig
from .policies import PolicySpec
from .topology import get_topology
from .walker import (
    DamageSpec,
    config_for_topology,
    make_terrain,
)

DESK_POPULATION = 256
DESK_GENERATIONS = 150
DEFAULT_CHECKPOINT_INTERVAL = 25

_ES_KEYS = ("population_size", "generations", "alpha", "sigma", "decay", "episodes_per_eval")
_WALKER_KEYS = (
    "episode_steps",
    "max_joint_rate",
    "contact_tolerance",
    "gravity_drop",
    "leg_length_scale",
    "joint_rate_scale",
)
_TERRAIN_KEYS = ("kind", "h_max", "seed", "extent", "block_size")


@dataclass
class RunConfig:
    policy: str
    topology_name: str
    normalization: str
    master_seed: int
    out_dir: str
    es_section: dict
    walker_section: dict
    terrain_section: dict
    damage_section: dict
    checkpoint_interval: int

    # ---- resolved objects -------------------------------------------------

    @property
    def topology(self):
        return get_topology(self.topology_name)

    @property
    def policy_spec(self):
        return PolicySpec(self.policy, self.topology, self.normalization)

    def es_config(self, workers=None):
        section = dict(self.es_section)
        if workers is not None:
            section["workers"] = int(workers)
        section.setdefault("workers", 1)
        return ESConfig(master_seed=self.master_seed, **section)

    def walker_config(self):
        overrides = dict(self.walker_section)
        for key in ("leg_length_scale", "joint_rate_scale"):
            if key in overrides:
                overrides[key] = tuple(overrides[key])
        return config_for_topology(self.topology, **overrides)

    def terrain(self):
        return make_terrain(**self.terrain_section)

    def damage(self):
        section = self.damage_section
        config = self.walker_config()
        if "preset" in section:
            return DamageSpec.from_preset(section["preset"], config)
        labels = section.get("frozen_legs", [])
        return DamageSpec(frozen_legs=tuple(sorted(config.leg_index(l) for l in labels)))

    # ---- identity ---------------------------------------------------------

    def semantic_dict(self):
        """Everything that shapes the training trajectory, defaults resolved."""
        return {
            "policy": self.policy,
            "topology": self.topology_name,
            "normalization": self.normalization,
            "master_seed": self.master_seed,
            "es": {k: self.es_section.get(k) for k in _ES_KEYS},
            "walker": {k: self.walker_section.get(k) for k in _WALKER_KEYS if k in self.walker_section},
            "terrain": dict(self.terrain_section),
            "damage": dict(self.damage_section),
        }

    def config_hash(self):
        blob = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _require(raw, key, path):
    if key not in raw:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return raw[key]


def run_config_from_dict(raw, path="<config>", default_out=None):
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config root must be a JSON object")
    policy = _require(raw, "policy", path)
    if policy not in ("ff", "hebbian", "lstm"):
        raise ConfigError(f"{path}: unknown policy kind '{policy}'")
    topology = _require(raw, "topology", path)
    master_seed = _require(raw, "master_seed", path)
    if not isinstance(master_seed, int) or master_seed < 0:
        raise ConfigError(f"{path}: 'master_seed' must be a non-negative integer")

    normalization = raw.get("normalization", "max")
    if normalization not in ("max", "std"):
        raise ConfigError(f"{path}: 'normalization' must be max or std, got {normalization!r}")

    es_section = dict(raw.get("es", {}))
    es_section.setdefault("population_size", DESK_POPULATION)
    es_section.setdefault("generations", DESK_GENERATIONS)
    for key, default in (
        ("alpha", ESConfig.alpha),
        ("sigma", ESConfig.sigma),
        ("decay", ESConfig.decay),
        ("episodes_per_eval", ESConfig.episodes_per_eval),
    ):
        es_section.setdefault(key, default)
    unknown = set(es_section) - set(_ES_KEYS) - {"workers"}
    if unknown:
        raise ConfigError(f"{path}: unknown es keys {sorted(unknown)}")

    walker_section = dict(raw.get("walker", {}))
    unknown = set(walker_section) - set(_WALKER_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown walker keys {sorted(unknown)}")

    terrain_section = dict(raw.get("terrain", {"kind": "flat"}))
    terrain_section.setdefault("kind", "flat")
    unknown = set(terrain_section) - set(_TERRAIN_KEYS)
    if unknown:
        raise ConfigError(f"{path}: unknown terrain keys {sorted(unknown)}")

    damage_section = dict(raw.get("damage", {"preset": "none"}))
    unknown = set(damage_section) - {"preset", "frozen_legs"}
    if unknown:
        raise ConfigError(f"{path}: unknown damage keys {sorted(unknown)}")

    rc = RunConfig(
        policy=policy,
        topology_name=topology,
        normalization=normalization,
        master_seed=master_seed,
        out_dir=raw.get("out_dir", default_out or "runs/run"),
        es_section=es_section,
        walker_section=walker_section,
        terrain_section=terrain_section,
        damage_section=damage_section,
        checkpoint_interval=int(raw.get("checkpoint_interval", DEFAULT_CHECKPOINT_INTERVAL)),
    )
    # fail fast on bad sections
    rc.topology
    rc.es_config()
    rc.walker_config()
    rc.terrain()
    rc.damage()
    return rc


def load_run_config(path, default_out=None):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return run_config_from_dict(raw, path=str(path), default_out=default_out)
