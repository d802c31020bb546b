"""Deterministic kinematic legged-walker environment.

The walker is a no-slip crawler: feet that were on the ground at the start of
a control step act as anchors, and the body moves opposite to the mean
body-frame displacement of those anchored feet. There are no rigid-body
dynamics, torques, or friction; gait generation still requires coordinated
stance switching, because a foot cycle that never lifts nets zero
displacement per period.

Legs are standard insect-style chains: joint 1 yaws the whole leg about the
vertical axis at the hip, the remaining joints pitch successive segments in
the vertical plane of the leg's azimuth. The default posture (all joint
angles zero) is built so that every foot touches flat ground exactly when the
body sits at its nominal clearance height.

Reward per step is k_v * V_x + k_u * U + k_yaw * Yaw with k = (2.0, 0.5,
0.5): forward velocity, an upright term that is 0 while
cos(roll)*cos(pitch) > 0.93 and -0.5 otherwise, and a heading term that is 0
while |yaw| < 0.45 rad and -0.5 otherwise. An episode is 500 steps by
default and its fitness is the summed step reward.
"""

import functools
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from . import rng as rngmod
from .errors import ConfigError, InputError, SimulationFault
from .traces import EpisodeTrace

# Reward shape.
K_V = 2.0
K_U = 0.5
K_YAW = 0.5
UPRIGHT_MIN = 0.93
YAW_LIMIT = 0.45
STEP_DT = 1.0

# Pose relaxation per step toward the stance-plane attitude / nominal height.
RELAX = 0.2

ORIENT_CLIP = 3.14


def step_reward(dx, roll, pitch, yaw):
    """Per-step reward from the world-frame x displacement and attitude."""
    upright = 0.0 if np.cos(roll) * np.cos(pitch) > UPRIGHT_MIN else -0.5
    heading = 0.0 if abs(yaw) < YAW_LIMIT else -0.5
    return K_V * (dx / STEP_DT) + K_U * upright + K_YAW * heading


def wrap_angle(a):
    """Wrap to (-pi, pi] then clip to the advertised [-3.14, 3.14] range."""
    return np.clip(np.remainder(np.asarray(a) + np.pi, 2.0 * np.pi) - np.pi,
                   -ORIENT_CLIP, ORIENT_CLIP)


# ---------------------------------------------------------------------------
# terrain


@dataclass(frozen=True)
class Terrain:
    """Flat ground or a grid of fixed-size blocks with per-cell heights."""

    kind: str = "flat"
    block_size: float = 0.10
    h_max: float = 0.0
    seed: int = 0
    origin: tuple = (0.0, 0.0)
    rows: int = 0
    cells: tuple = ()  # row-major (rows, cols) heights; empty for flat

    def _grid(self):
        # lazy array view of the tuple payload; rebuilt after unpickling
        grid = getattr(self, "_grid_cache", None)
        if grid is None and self.cells:
            grid = np.asarray(self.cells, dtype=np.float64).reshape(self.rows, -1)
            object.__setattr__(self, "_grid_cache", grid)
        return grid

    def heights(self, x, y):
        """Terrain height under world coordinates; 0 outside any grid."""
        x = np.asarray(x, dtype=np.float64)
        grid = self._grid()
        if grid is None:
            return np.zeros_like(x)
        ix = np.floor((x - self.origin[0]) / self.block_size).astype(int)
        iy = np.floor((np.asarray(y, dtype=np.float64) - self.origin[1]) / self.block_size).astype(int)
        inside = (ix >= 0) & (ix < grid.shape[0]) & (iy >= 0) & (iy < grid.shape[1])
        out = np.zeros_like(x)
        out[inside] = grid[ix[inside], iy[inside]]
        return out

    def height_at(self, x, y):
        return float(self.heights(np.array([x]), np.array([y]))[0])


def make_terrain(kind, h_max=0.04, seed=0, extent=8.0, block_size=0.10):
    """Build a terrain: 'flat', or 'blocks' with i.i.d. uniform cell heights.

    Blocks cover [-extent, extent) in x and y; queries outside fall back to
    height 0.
    """
    if h_max < 0:
        raise ConfigError("h_max must be >= 0")
    if kind == "flat":
        return Terrain(kind="flat")
    if kind != "blocks":
        raise ConfigError(f"unknown terrain kind {kind!r}")
    n = int(round(2.0 * extent / block_size))
    heights = rngmod.stream(seed, rngmod.STREAM_TERRAIN).uniform(0.0, h_max, (n, n))
    return Terrain(
        kind="blocks",
        block_size=block_size,
        h_max=float(h_max),
        seed=int(seed),
        origin=(-extent, -extent),
        rows=n,
        cells=tuple(heights.ravel().tolist()),
    )


def export_terrain_csv(terrain, path):
    """Write the height map as a CSV grid with a reconstruction header."""
    grid = terrain._grid()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(
            "# kind=%s block_size=%r h_max=%r seed=%d origin=%r,%r\n"
            % (terrain.kind, terrain.block_size, terrain.h_max, terrain.seed,
               terrain.origin[0], terrain.origin[1])
        )
        if grid is not None:
            for row in grid:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def import_terrain_csv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("# kind="):
            raise InputError(f"{path}: missing terrain header")
        meta = dict(item.split("=", 1) for item in header[2:].split() if "=" in item)
        rows = [line.strip() for line in fh if line.strip()]
    origin = tuple(float(v) for v in meta["origin"].split(","))
    cells = ()
    nrows = 0
    if rows:
        grid = np.array([[float(v) for v in row.split(",")] for row in rows])
        cells = tuple(grid.ravel().tolist())
        nrows = grid.shape[0]
    return Terrain(
        kind=meta["kind"],
        block_size=float(meta["block_size"]),
        h_max=float(meta["h_max"]),
        seed=int(meta["seed"]),
        origin=origin,
        rows=nrows,
        cells=cells,
    )


# ---------------------------------------------------------------------------
# walker configuration and damage


@dataclass(frozen=True)
class WalkerConfig:
    """Geometry and step limits of one walker.

    segment_lengths has one entry per joint: the first is the horizontal coxa
    segment swung by the yaw joint, the rest are the pitch-chain segments.
    leg_length_scale / joint_rate_scale / contact_tolerance are the dynamics
    perturbation hooks used for out-of-distribution evaluation.
    """

    num_legs: int = 6
    joints_per_leg: int = 3
    segment_lengths: tuple = (0.10, 0.20, 0.24)
    hip_positions: tuple = (
        (0.20, 0.12), (0.20, -0.12),
        (0.0, 0.13), (0.0, -0.13),
        (-0.20, 0.12), (-0.20, -0.12),
    )
    leg_labels: tuple = ("lf", "rf", "lm", "rm", "lh", "rh")
    max_joint_rate: float = 0.1
    episode_steps: int = 500
    contact_tolerance: float = 0.01
    gravity_drop: float = 0.05
    leg_length_scale: tuple = ()
    joint_rate_scale: tuple = ()

    def __post_init__(self):
        if len(self.segment_lengths) != self.joints_per_leg:
            raise ConfigError("segment_lengths must have one entry per joint")
        if len(self.hip_positions) != self.num_legs or len(self.leg_labels) != self.num_legs:
            raise ConfigError("hip_positions and leg_labels must have one entry per leg")
        if any(s <= 0 for s in self.segment_lengths):
            raise ConfigError("segment lengths must be positive")
        if any(hx == 0 and hy == 0 for hx, hy in self.hip_positions):
            raise ConfigError("hips cannot sit at the body origin (azimuth undefined)")
        if self.leg_length_scale and len(self.leg_length_scale) != self.num_legs:
            raise ConfigError("leg_length_scale must have one entry per leg")
        if self.joint_rate_scale and len(self.joint_rate_scale) != self.joints_per_leg:
            raise ConfigError("joint_rate_scale must have one entry per joint")

    @property
    def joint_count(self):
        return self.num_legs * self.joints_per_leg

    @property
    def observation_size(self):
        return self.joint_count + self.num_legs + 3

    def leg_index(self, label):
        try:
            return self.leg_labels.index(label)
        except ValueError:
            raise ConfigError(
                f"unknown leg label {label!r}; available: {self.leg_labels}"
            ) from None


@dataclass(frozen=True)
class _Geometry:
    hips: np.ndarray
    azimuths: np.ndarray
    yaw_signs: np.ndarray      # mirrored servo convention: +q1 protracts every leg
    segments: np.ndarray       # (legs, joints), per-leg scaled
    gamma_base: np.ndarray     # default cumulative pitch per chain segment
    rates: np.ndarray          # per-joint rate limits
    clearance: float           # nominal default-posture body height


@functools.lru_cache(maxsize=64)
def _geometry(config):
    hips = np.asarray(config.hip_positions, dtype=np.float64)
    # sprawled posture: legs extend laterally from the body, so every yaw
    # joint's stride is aligned with the walking axis; hips on the centerline
    # fall back to pointing along the body axis
    azimuths = np.where(
        hips[:, 1] != 0.0,
        np.copysign(np.pi / 2.0, hips[:, 1]),
        np.arctan2(hips[:, 1], hips[:, 0]),
    )
    # left/right legs are mirror images, so the yaw joint's positive
    # direction mirrors too: +q1 always sweeps the foot toward +x
    yaw_signs = np.where(hips[:, 1] >= 0, -1.0, 1.0)
    base = np.asarray(config.segment_lengths, dtype=np.float64)
    scale = (
        np.asarray(config.leg_length_scale, dtype=np.float64)
        if config.leg_length_scale
        else np.ones(config.num_legs)
    )
    segments = scale[:, None] * base[None, :]
    m = config.joints_per_leg - 1
    gamma_base = (
        np.arange(1, m + 1, dtype=np.float64) * (np.pi / 2.0) / (m + 1)
        if m > 0
        else np.zeros(0)
    )
    rate_scale = (
        np.asarray(config.joint_rate_scale, dtype=np.float64)
        if config.joint_rate_scale
        else np.ones(config.joints_per_leg)
    )
    rates = config.max_joint_rate * rate_scale
    clearance = float(np.sum(base[1:] * np.sin(gamma_base)))
    return _Geometry(hips, azimuths, yaw_signs, segments, gamma_base, rates, clearance)


def nominal_clearance(config):
    return _geometry(config).clearance


def foot_positions(config, joint_angles):
    """Body-frame foot positions (num_legs, 3) for the given joint angles."""
    geo = _geometry(config)
    q = np.asarray(joint_angles, dtype=np.float64).reshape(config.num_legs, config.joints_per_leg)
    az = geo.azimuths + geo.yaw_signs * q[:, 0]
    if config.joints_per_leg > 1:
        gamma = geo.gamma_base[None, :] + np.cumsum(q[:, 1:], axis=1)
        reach = geo.segments[:, 0] + np.sum(geo.segments[:, 1:] * np.cos(gamma), axis=1)
        drop = np.sum(geo.segments[:, 1:] * np.sin(gamma), axis=1)
    else:
        reach = geo.segments[:, 0]
        drop = np.zeros(config.num_legs)
    feet = np.empty((config.num_legs, 3))
    feet[:, 0] = geo.hips[:, 0] + reach * np.cos(az)
    feet[:, 1] = geo.hips[:, 1] + reach * np.sin(az)
    feet[:, 2] = -drop
    return feet


def beetle_config(**overrides):
    return replace(WalkerConfig(), **overrides) if overrides else WalkerConfig()


def gecko_config(**overrides):
    base = WalkerConfig(
        num_legs=4,
        joints_per_leg=4,
        segment_lengths=(0.06, 0.11, 0.12, 0.12),
        hip_positions=((0.16, 0.10), (0.16, -0.10), (-0.16, 0.10), (-0.16, -0.10)),
        leg_labels=("lf", "rf", "lh", "rh"),
    )
    return replace(base, **overrides) if overrides else base


def config_for_topology(topology, **overrides):
    if topology.name == "beetle":
        return beetle_config(**overrides)
    if topology.name == "gecko":
        return gecko_config(**overrides)
    raise ConfigError(f"no walker preset for topology {topology.name!r}")


def perturbed_config(config, leg_length_scale=None, joint_rate_scale=None, tolerance_scale=1.0):
    """Asymmetric dynamics modifiers for sim-to-real-style OOD evaluation."""
    kwargs = {}
    if leg_length_scale is not None:
        kwargs["leg_length_scale"] = tuple(float(s) for s in leg_length_scale)
    if joint_rate_scale is not None:
        kwargs["joint_rate_scale"] = tuple(float(s) for s in joint_rate_scale)
    if tolerance_scale != 1.0:
        kwargs["contact_tolerance"] = config.contact_tolerance * float(tolerance_scale)
    return replace(config, **kwargs)


def dynamics_perturbation(config):
    """Fixed asymmetric preset: longer left legs, shorter right, lazier distal joints."""
    hips = np.asarray(config.hip_positions)
    leg_scale = tuple(1.06 if hy > 0 else 0.94 for _, hy in hips)
    rate_scale = tuple(1.0 if j < config.joints_per_leg - 1 else 0.85
                       for j in range(config.joints_per_leg))
    return perturbed_config(config, leg_scale, rate_scale, tolerance_scale=1.5)


@dataclass(frozen=True)
class DamageSpec:
    """Legs whose joints are locked at the default posture for the episode."""

    frozen_legs: tuple = ()

    @classmethod
    def from_preset(cls, name, config):
        if not name or name == "none":
            return cls()
        labels = name.split("_")
        return cls(frozen_legs=tuple(sorted(config.leg_index(lbl) for lbl in labels)))


NO_DAMAGE = DamageSpec()


# ---------------------------------------------------------------------------
# state and dynamics


@dataclass
class WalkerState:
    position: np.ndarray       # world (x, y, z)
    orientation: np.ndarray    # (roll, pitch, yaw), wrapped to [-3.14, 3.14]
    joint_angles: np.ndarray   # (num_legs, joints_per_leg), clamped to [-1, 1]
    contacts: np.ndarray       # (num_legs,) uint8 flags
    step_index: int = 0


def rotation_matrix(roll, pitch, yaw):
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    return np.array([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])


def _world_feet(config, state, feet_body=None):
    if feet_body is None:
        feet_body = foot_positions(config, state.joint_angles)
    r = rotation_matrix(*state.orientation)
    return state.position[None, :] + feet_body @ r.T


def _contact_flags(config, terrain, state, feet_body=None):
    feet_w = _world_feet(config, state, feet_body)
    ground = terrain.heights(feet_w[:, 0], feet_w[:, 1])
    return (feet_w[:, 2] <= ground + config.contact_tolerance).astype(np.uint8)


def reset(config, terrain, damage=NO_DAMAGE, seed=0):
    """Initial state: body at the origin at nominal clearance, default posture.

    Deterministic; the seed parameter is part of the interface for future
    randomized starts but currently unused.
    """
    del seed
    q = np.zeros((config.num_legs, config.joints_per_leg))
    state = WalkerState(
        position=np.array([0.0, 0.0, nominal_clearance(config)]),
        orientation=np.zeros(3),
        joint_angles=q,
        contacts=np.zeros(config.num_legs, dtype=np.uint8),
        step_index=0,
    )
    state.contacts = _contact_flags(config, terrain, state)
    return state


def observe(state):
    """Observation vector: [joint angles | contact flags | roll, pitch, yaw]."""
    nj = state.joint_angles.size
    nl = state.contacts.size
    out = np.empty(nj + nl + 3)
    out[:nj] = state.joint_angles.ravel()
    out[nj : nj + nl] = state.contacts
    out[nj + nl :] = wrap_angle(state.orientation)
    return out


def _plane_slopes(xs, ys, hs):
    """Slopes (a, b) of the least-squares plane z = a*x + b*y + c.

    Solved via the 3x3 normal equations (Cramer), matching the jitted step
    kernel. Level when the points are too few, equal-height, or degenerate.
    """
    if len(hs) < 3 or np.ptp(hs) == 0.0:
        return 0.0, 0.0
    sxx, sxy, sx = float(np.sum(xs * xs)), float(np.sum(xs * ys)), float(np.sum(xs))
    syy, sy = float(np.sum(ys * ys)), float(np.sum(ys))
    sn = float(len(hs))
    sxh, syh, sh = float(np.sum(xs * hs)), float(np.sum(ys * hs)), float(np.sum(hs))
    det = (sxx * (syy * sn - sy * sy)
           - sxy * (sxy * sn - sy * sx)
           + sx * (sxy * sy - syy * sx))
    if abs(det) <= 1e-18:
        return 0.0, 0.0
    slope_a = (sxh * (syy * sn - sy * sy)
               - sxy * (syh * sn - sy * sh)
               + sx * (syh * sy - syy * sh)) / det
    slope_b = (sxx * (syh * sn - sy * sh)
               - sxh * (sxy * sn - sy * sx)
               + sx * (sxy * sh - syh * sx)) / det
    return slope_a, slope_b


def _step_core_py(q, targets, geo, frozen, position, orientation, terrain, config):
    """Numpy twin of _kernels.walker_step_core; used when numba is absent."""
    q_new = q + np.clip(targets - q, -geo.rates, geo.rates)
    np.clip(q_new, -1.0, 1.0, out=q_new)
    if frozen:
        idx = list(frozen)
        q_new[idx] = q[idx]

    feet_old = foot_positions(config, q)
    feet_new = foot_positions(config, q_new)
    r_old = rotation_matrix(*orientation)
    feet_old_world = position[None, :] + feet_old @ r_old.T
    ground = terrain.heights(feet_old_world[:, 0], feet_old_world[:, 1])
    stance = feet_old_world[:, 2] <= ground + config.contact_tolerance

    pos = position.copy()
    roll, pitch, yaw = (float(v) for v in orientation)

    if stance.any():
        dfoot = (feet_new - feet_old)[stance]
        pos = pos - r_old @ dfoot.mean(axis=0)
        xy_old = feet_old[stance, :2]
        xy_new = feet_new[stance, :2]
        cross = xy_old[:, 0] * xy_new[:, 1] - xy_old[:, 1] * xy_new[:, 0]
        dot = np.sum(xy_old * xy_new, axis=1)
        yaw = yaw + float(np.arctan2(cross, dot).mean())
        slope_a, slope_b = _plane_slopes(
            feet_old_world[stance, 0], feet_old_world[stance, 1], ground[stance]
        )
    else:
        pos[2] -= config.gravity_drop
        slope_a = slope_b = 0.0

    # attitude targets aligning the body z-axis with the stance plane normal
    cy, sy = np.cos(yaw), np.sin(yaw)
    pitch_target = -np.arctan(slope_a * cy + slope_b * sy)
    roll_target = np.arctan(-slope_a * sy + slope_b * cy)
    roll += RELAX * (roll_target - roll)
    pitch += RELAX * (pitch_target - pitch)

    if stance.any():
        z_target = float(ground[stance].mean()) + geo.clearance
        pos[2] += RELAX * (z_target - pos[2])

    new_orient = wrap_angle(np.array([roll, pitch, yaw]))
    r_new = rotation_matrix(*new_orient)
    feet_new_world = pos[None, :] + feet_new @ r_new.T
    ground_new = terrain.heights(feet_new_world[:, 0], feet_new_world[:, 1])
    contacts = (feet_new_world[:, 2] <= ground_new + config.contact_tolerance).astype(np.uint8)
    return q_new, pos, new_orient, contacts


def _step_core_jit(q, targets, geo, frozen, position, orientation, terrain, config):
    grid = terrain._grid()
    has_grid = grid is not None
    if not has_grid:
        grid = _EMPTY_GRID
    frozen_mask = np.zeros(config.num_legs, dtype=np.bool_)
    for l in frozen:
        frozen_mask[l] = True
    q_new = np.empty_like(q)
    pos = np.empty(3)
    orient = np.empty(3)
    contacts = np.empty(config.num_legs, dtype=np.uint8)
    _kernels.walker_step_core(
        q, targets, geo.rates, frozen_mask, position, orientation,
        geo.hips, geo.azimuths, geo.yaw_signs, geo.segments, geo.gamma_base,
        grid, terrain.origin[0], terrain.origin[1], terrain.block_size, has_grid,
        config.contact_tolerance, config.gravity_drop, geo.clearance, RELAX,
        q_new, pos, orient, contacts,
    )
    return q_new, pos, orient, contacts


_EMPTY_GRID = np.zeros((1, 1))
_step_core = _step_core_jit if _kernels.HAVE_NUMBA else _step_core_py


def step(state, action, config, terrain, damage=NO_DAMAGE):
    """Advance one control step; returns (next_state, reward).

    Order of operations: rate-limited joint motion toward the (clamped)
    action targets, stance determination from pre-motion foot positions,
    anchored-foot body translation and yaw, then attitude/height relaxation
    toward the stance plane.
    """
    action = np.asarray(action, dtype=np.float64)
    if action.ndim != 1 or action.shape[0] != config.joint_count:
        raise InputError(
            f"action length {action.shape} != joint count {config.joint_count}"
        )
    geo = _geometry(config)
    targets = np.clip(action, -1.0, 1.0).reshape(config.num_legs, config.joints_per_leg)
    q_new, pos, orientation, contacts = _step_core(
        state.joint_angles, targets, geo, damage.frozen_legs,
        state.position, state.orientation, terrain, config,
    )
    if not (np.isfinite(pos).all() and np.isfinite(orientation).all() and np.isfinite(q_new).all()):
        raise SimulationFault(state.step_index)
    new_state = WalkerState(
        position=pos,
        orientation=orientation,
        joint_angles=q_new,
        contacts=contacts,
        step_index=state.step_index + 1,
    )
    reward = step_reward(pos[0] - state.position[0], *orientation)
    return new_state, reward


def contact_slice(config):
    """Index slice of the contact flags inside the observation vector."""
    return slice(config.joint_count, config.joint_count + config.num_legs)


def zero_contact_filter(config):
    """Observation filter simulating a lifted robot: contact inputs forced to 0."""
    sl = contact_slice(config)

    def _filter(obs):
        out = obs.copy()
        out[sl] = 0.0
        return out

    return _filter


def run_episode(policy, config, terrain, damage=NO_DAMAGE, seed=0, capture=True,
                obs_filter=None, meta=None):
    """Run one full episode; returns (fitness, trace).

    The policy's plastic state is freshly initialized from the episode seed.
    A simulation fault truncates the episode: the fitness accumulated so far
    is returned and the trace is flagged. With capture=False (the training
    fast path) the per-step arrays are left empty but the trace metadata
    (truncation, displacement) is still filled in; the step arithmetic is
    identical in both modes.
    """
    if policy.obs_size != config.observation_size or policy.action_size != config.joint_count:
        raise ConfigError(
            f"policy I/O ({policy.obs_size}/{policy.action_size}) does not match "
            f"walker ({config.observation_size}/{config.joint_count})"
        )
    policy.reset(seed)
    state = reset(config, terrain, damage, seed)
    start_x = float(state.position[0])
    steps = config.episode_steps
    total = 0.0
    truncated = False
    fault_step = -1
    if capture:
        obs_rows = np.empty((steps, config.observation_size))
        act_rows = np.empty((steps, config.joint_count))
        rew_rows = np.empty(steps)
        snap_rows = np.empty((steps, policy.plastic_size))
    executed = 0
    for t in range(steps):
        obs = observe(state)
        if obs_filter is not None:
            obs = obs_filter(obs)
        action = policy.act(obs)
        try:
            state, reward = step(state, action, config, terrain, damage)
        except SimulationFault as fault:
            truncated = True
            fault_step = fault.step_index
            break
        total += float(reward)
        if capture:
            obs_rows[t] = obs
            act_rows[t] = action
            rew_rows[t] = reward
            snap_rows[t] = policy.plastic_snapshot()
        executed = t + 1
    header = {
        "policy": policy.kind,
        "normalization": getattr(policy, "normalization", None),
        "terrain": terrain.kind,
        "damage": list(damage.frozen_legs),
        "seed": int(seed),
        "truncated": truncated,
        "fault_step": fault_step,
        "displacement": float(state.position[0]) - start_x,
    }
    if meta:
        header.update(meta)
    if not capture:
        executed = 0
        obs_rows = np.empty((0, config.observation_size))
        act_rows = np.empty((0, config.joint_count))
        rew_rows = np.empty(0)
        snap_rows = np.empty((0, policy.plastic_size))
    trace = EpisodeTrace(
        observations=obs_rows[:executed],
        actions=act_rows[:executed],
        rewards=rew_rows[:executed],
        snapshots=snap_rows[:executed],
        meta=header,
    )
    return total, trace
