"""Episode traces: per-step observations, actions, rewards, and plastic
parameter snapshots, with a simple binary file format.

File layout: one UTF-8 JSON header line terminated by a newline, followed by
steps * (obs + action + 1 + snapshot) float64 values, little-endian, row per
step, columns ordered observation | action | reward | snapshot. A CSV export
exists for small traces.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError

FORMAT = "hebbwalker-trace-v1"


@dataclass
class EpisodeTrace:
    observations: np.ndarray   # (steps, obs)
    actions: np.ndarray        # (steps, act)
    rewards: np.ndarray        # (steps,)
    snapshots: np.ndarray      # (steps, plastic); second dim may be 0
    meta: dict = field(default_factory=dict)

    @property
    def steps(self):
        return self.observations.shape[0]

    @property
    def snapshot_length(self):
        return self.snapshots.shape[1]

    @property
    def fitness(self):
        return float(self.rewards.sum())

    def _header(self):
        header = {
            "format": FORMAT,
            "steps": int(self.steps),
            "obs_size": int(self.observations.shape[1]),
            "action_size": int(self.actions.shape[1]),
            "snapshot_size": int(self.snapshot_length),
        }
        header.update(self.meta)
        return header

    def save(self, path):
        row = np.hstack([
            self.observations,
            self.actions,
            self.rewards[:, None],
            self.snapshots,
        ]).astype("<f8")
        with open(path, "wb") as fh:
            fh.write(json.dumps(self._header(), sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            fh.write(row.tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            header_line = fh.readline()
            payload = fh.read()
        try:
            header = json.loads(header_line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InputError(f"{path}: not a trace file ({exc})") from None
        if header.get("format") != FORMAT:
            raise InputError(f"{path}: unknown trace format {header.get('format')!r}")
        steps = header["steps"]
        no, na, ns = header["obs_size"], header["action_size"], header["snapshot_size"]
        width = no + na + 1 + ns
        data = np.frombuffer(payload, dtype="<f8")
        if data.size != steps * width:
            raise InputError(
                f"{path}: payload holds {data.size} values, expected {steps * width}"
            )
        data = data.reshape(steps, width).astype(np.float64)
        meta = {
            k: v
            for k, v in header.items()
            if k not in ("format", "steps", "obs_size", "action_size", "snapshot_size")
        }
        return cls(
            observations=data[:, :no],
            actions=data[:, no : no + na],
            rewards=data[:, no + na],
            snapshots=data[:, no + na + 1 :],
            meta=meta,
        )

    def to_csv(self, path):
        no = self.observations.shape[1]
        na = self.actions.shape[1]
        ns = self.snapshot_length
        names = (
            [f"obs_{i}" for i in range(no)]
            + [f"act_{i}" for i in range(na)]
            + ["reward"]
            + [f"w_{i}" for i in range(ns)]
        )
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(names) + "\n")
            for t in range(self.steps):
                row = np.hstack([
                    self.observations[t],
                    self.actions[t],
                    [self.rewards[t]],
                    self.snapshots[t],
                ])
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
