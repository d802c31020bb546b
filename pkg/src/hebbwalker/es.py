"""Evolution-strategies optimizer over flat genomes.

Mirrored (antithetic) sampling with centered-rank fitness shaping and the
update

    theta' = theta + alpha_t / (n * sigma_t) * sum_i F~_i * eps_i

where eps_i is reconstructed deterministically from (master_seed, generation,
pair index) rather than stored, F~ are the raw fitnesses mapped to average
ranks in [-0.5, 0.5], and alpha_t = alpha * decay^t, sigma_t = sigma *
decay^t. With average ranks a constant fitness landscape leaves theta exactly
unchanged against mirrored noise.

Evaluation of the population is embarrassingly parallel; results are reduced
in index order, and every per-index quantity (noise, episode seeds) depends
only on (master_seed, generation, index), so the full training trajectory is
a pure function of the configuration, independent of worker count.
"""

import multiprocessing
import time
from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .errors import ConfigError, EvaluationError


@dataclass(frozen=True)
class ESConfig:
    population_size: int = 1024
    generations: int = 500
    alpha: float = 0.1
    sigma: float = 0.1
    decay: float = 0.999
    master_seed: int = 0
    episodes_per_eval: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2 != 0:
            raise ConfigError("population_size must be even and >= 2 (mirrored sampling)")
        if not (0.0 < self.decay <= 1.0):
            raise ConfigError("decay must be in (0, 1]")
        if self.alpha <= 0 or self.sigma <= 0:
            raise ConfigError("alpha and sigma must be positive")
        if self.episodes_per_eval < 1:
            raise ConfigError("episodes_per_eval must be >= 1")

    def alpha_at(self, generation):
        return self.alpha * self.decay**generation

    def sigma_at(self, generation):
        return self.sigma * self.decay**generation


@dataclass
class GenerationRecord:
    generation: int            # 1-based
    fitnesses: np.ndarray
    best: float
    mean: float
    std: float
    alpha: float               # value after this generation's decay
    sigma: float
    wall_ms: float
    center_fitness: float      # post-update theta under the fixed eval seed
    faults: tuple = ()


@dataclass
class TrainRun:
    config: ESConfig
    records: list = field(default_factory=list)
    theta: np.ndarray = None
    eval_center_seed: int = 0

    @property
    def best_fitness(self):
        return max(r.best for r in self.records) if self.records else float("nan")


def centered_ranks(values):
    """Map fitnesses to average ranks scaled into [-0.5, 0.5].

    Ties share the mean of their rank positions, so identical fitnesses get
    identical shaped values (and an all-equal vector maps to exactly zero).
    """
    f = np.asarray(values, dtype=np.float64)
    n = f.size
    if n < 2:
        raise ConfigError("need at least two fitnesses to rank")
    order = np.argsort(f, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    ranks[order] = np.arange(n, dtype=np.float64)
    _, inverse, counts = np.unique(f, return_inverse=True, return_counts=True)
    mean_rank = np.bincount(inverse, weights=ranks) / counts
    return mean_rank[inverse] / (n - 1) - 0.5


def sample_noise(config, generation, index, dim):
    """Standard-normal perturbation for one individual, mirrored in pairs.

    Deterministic in (master_seed, generation, index); index 2m+1 is the
    negation of index 2m.
    """
    if index >= config.population_size:
        raise ConfigError(f"index {index} >= population size {config.population_size}")
    pair = index // 2
    eps = rngmod.stream(config.master_seed, rngmod.STREAM_NOISE, generation, pair).standard_normal(dim)
    return -eps if index % 2 else eps


def perturbed_genome(theta, config, generation, index):
    return theta + config.sigma_at(generation) * sample_noise(config, generation, index, theta.size)


def es_update(theta, fitnesses, config, generation):
    """One ES step from the population fitnesses; returns the new genome."""
    theta = np.asarray(theta, dtype=np.float64)
    f = np.asarray(fitnesses, dtype=np.float64)
    n = config.population_size
    if f.shape != (n,):
        raise ConfigError(f"fitness vector shape {f.shape} != population ({n},)")
    bad = np.flatnonzero(~np.isfinite(f))
    if bad.size:
        raise EvaluationError(
            f"non-finite fitness for individual {int(bad[0])}", index=int(bad[0])
        )
    shaped = centered_ranks(f)
    grad = np.zeros_like(theta)
    for pair in range(n // 2):
        eps = sample_noise(config, generation, 2 * pair, theta.size)
        grad += (shaped[2 * pair] - shaped[2 * pair + 1]) * eps
    scale = config.alpha_at(generation) / (n * config.sigma_at(generation))
    return theta + scale * grad


def es_update_literal_form(theta, fitnesses, config, generation):
    """The update exactly as printed in the source formula, for comparison
    experiments only: theta + alpha/(n*sigma) * sum_i F_i * (theta + sigma*eps_i).

    This rescales theta by the total raw fitness instead of estimating a
    search direction; it makes no correctness claims and is not used by
    train(). The standard estimator es_update() is the production update.
    """
    theta = np.asarray(theta, dtype=np.float64)
    f = np.asarray(fitnesses, dtype=np.float64)
    n = config.population_size
    if f.shape != (n,):
        raise ConfigError(f"fitness vector shape {f.shape} != population ({n},)")
    sigma_t = config.sigma_at(generation)
    acc = np.zeros_like(theta)
    for i in range(n):
        acc += f[i] * (theta + sigma_t * sample_noise(config, generation, i, theta.size))
    return theta + config.alpha_at(generation) / (n * sigma_t) * acc


def episode_seed(config, generation, index, episode):
    """Seed for one evaluation episode of one individual.

    Mirrored twins (indices 2m and 2m+1) share the seed, so their episodes
    differ only in the sign of the parameter noise; the plastic-state init is
    a common random number and cancels out of the antithetic difference.
    """
    return rngmod.stream_seed(
        config.master_seed, rngmod.STREAM_EVAL, generation, index // 2, episode
    )


def _evaluate_index(task, theta, config, generation, index):
    genome = perturbed_genome(theta, config, generation, index)
    total = 0.0
    fault = False
    for e in range(config.episodes_per_eval):
        fitness, bad = task.evaluate(genome, episode_seed(config, generation, index, e))
        total += fitness
        fault = fault or bad
    return total / config.episodes_per_eval, fault


# Worker-side globals, set once per pool process.
_WORKER = {}


def _pool_init(task, config):
    _WORKER["task"] = task
    _WORKER["config"] = config


def _pool_slice(args):
    theta, generation, lo, hi = args
    task = _WORKER["task"]
    config = _WORKER["config"]
    fits = np.empty(hi - lo)
    faults = []
    for index in range(lo, hi):
        fits[index - lo], bad = _evaluate_index(task, theta, config, generation, index)
        if bad:
            faults.append(index)
    return lo, fits, faults


def _slices(n, pieces):
    bounds = np.linspace(0, n, pieces + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds, bounds[1:]) if b > a]


def train(task, config, start_generation=0, theta0=None, on_generation=None):
    """Run the generational loop; returns a TrainRun.

    task must provide genome_size, initial_genome(master_seed), and
    evaluate(genome, seed) -> (fitness, fault). Per generation: perturb and
    evaluate the population, rank-shape, update theta, decay alpha/sigma, and
    record statistics plus a center evaluation of the updated theta under a
    fixed seed. on_generation(record, theta) fires after each generation
    (checkpointing hook).
    """
    theta = (
        np.asarray(theta0, dtype=np.float64).copy()
        if theta0 is not None
        else np.asarray(task.initial_genome(config.master_seed), dtype=np.float64)
    )
    if theta.shape != (task.genome_size,):
        raise ConfigError(
            f"genome length {theta.shape} does not match task genome_size {task.genome_size}"
        )
    run = TrainRun(config=config)
    run.eval_center_seed = rngmod.stream_seed(config.master_seed, rngmod.STREAM_EVAL_CENTER)
    n = config.population_size

    pool = None
    try:
        if config.workers > 1:
            pool = multiprocessing.get_context("fork").Pool(
                config.workers, initializer=_pool_init, initargs=(task, config)
            )
        for g in range(start_generation, config.generations):
            t0 = time.perf_counter()
            fitnesses = np.empty(n)
            faults = []
            if pool is None:
                for index in range(n):
                    fitnesses[index], bad = _evaluate_index(task, theta, config, g, index)
                    if bad:
                        faults.append(index)
            else:
                jobs = [(theta, g, lo, hi) for lo, hi in _slices(n, 4 * config.workers)]
                for lo, fits, slice_faults in pool.map(_pool_slice, jobs):
                    fitnesses[lo : lo + fits.size] = fits
                    faults.extend(slice_faults)
            theta = es_update(theta, fitnesses, config, g)
            center_fitness, _ = task.evaluate(theta, run.eval_center_seed)
            record = GenerationRecord(
                generation=g + 1,
                fitnesses=fitnesses,
                best=float(fitnesses.max()),
                mean=float(fitnesses.mean()),
                std=float(fitnesses.std()),
                alpha=config.alpha_at(g + 1),
                sigma=config.sigma_at(g + 1),
                wall_ms=(time.perf_counter() - t0) * 1000.0,
                center_fitness=float(center_fitness),
                faults=tuple(sorted(faults)),
            )
            run.records.append(record)
            if on_generation is not None:
                on_generation(record, theta)
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    run.theta = theta
    return run


# ---------------------------------------------------------------------------
# simple tasks used by tests and benchmarks


@dataclass(frozen=True)
class SphereTask:
    """f(h) = -||h||^2; the optimum is the origin."""

    dim: int = 10
    start_norm: float = 5.0

    @property
    def genome_size(self):
        return self.dim

    def initial_genome(self, master_seed):
        v = rngmod.stream(master_seed, rngmod.STREAM_INIT).standard_normal(self.dim)
        return v * (self.start_norm / np.linalg.norm(v))

    def evaluate(self, genome, seed):
        del seed
        return -float(np.dot(genome, genome)), False


@dataclass(frozen=True)
class ConstantTask:
    """Flat landscape; useful for exactness checks."""

    dim: int = 4
    value: float = 1.0

    @property
    def genome_size(self):
        return self.dim

    def initial_genome(self, master_seed):
        return rngmod.stream(master_seed, rngmod.STREAM_INIT).standard_normal(self.dim)

    def evaluate(self, genome, seed):
        del genome, seed
        return self.value, False
