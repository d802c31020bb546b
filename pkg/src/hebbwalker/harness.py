"""Experiment orchestration: training runs, checkpoints, evaluation batteries,
and trace analysis, all reproducible from a config file and master seed.

Checkpoint format: one JSON header line followed by the genome as raw
little-endian float64 bytes. The header stores the resolved run config and
its hash so a resume against a drifted config fails loudly.

The generation log is a CSV with header
``generation,best,mean,std,alpha,sigma,wall_ms``. Everything in it except
wall_ms is a pure function of the config and master seed;
canonical_log_bytes() strips that one timing column so determinism checks
can compare the rest byte for byte.
"""

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from . import es as esmod
from . import figures
from . import rng as rngmod
from .analysis import attractor_class, pc_spread, pca
from .config import load_run_config, run_config_from_dict
from .errors import ConfigError, InputError
from .traces import EpisodeTrace
from .walker import (
    DamageSpec,
    NO_DAMAGE,
    dynamics_perturbation,
    make_terrain,
    run_episode,
)

CKPT_FORMAT = "hebbwalker-ckpt-v1"
LOG_HEADER = ("generation", "best", "mean", "std", "alpha", "sigma", "wall_ms")


# ---------------------------------------------------------------------------
# evaluation task


@dataclass(frozen=True)
class WalkerEvalTask:
    """Picklable bundle: policy family + environment; evaluates genomes."""

    spec: object
    walker_config: object
    terrain: object
    damage: object

    @property
    def genome_size(self):
        return self.spec.genome_size

    def initial_genome(self, master_seed):
        return self.spec.initial_genome(master_seed)

    def evaluate(self, genome, seed):
        policy = self.spec.build(genome)
        fitness, trace = run_episode(
            policy, self.walker_config, self.terrain, self.damage, seed=seed, capture=False
        )
        return fitness, bool(trace.meta.get("truncated", False))


def task_for(rc):
    return WalkerEvalTask(
        spec=rc.policy_spec,
        walker_config=rc.walker_config(),
        terrain=rc.terrain(),
        damage=rc.damage(),
    )


# ---------------------------------------------------------------------------
# checkpoints


@dataclass
class Checkpoint:
    theta: np.ndarray
    generation: int
    alpha: float
    sigma: float
    config_hash: str
    run_config: dict
    master_seed: int
    eval_center_seed: int
    version: int = 1


def save_checkpoint(path, theta, generation, rc, eval_center_seed):
    es_config = rc.es_config()
    header = {
        "format": CKPT_FORMAT,
        "version": 1,
        "generation": int(generation),
        "alpha": es_config.alpha_at(generation),
        "sigma": es_config.sigma_at(generation),
        "genome_size": int(theta.size),
        "config_hash": rc.config_hash(),
        "master_seed": int(rc.master_seed),
        "eval_center_seed": int(eval_center_seed),
        "run_config": _portable_config_dict(rc),
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")
        fh.write(np.asarray(theta, dtype="<f8").tobytes())


def _portable_config_dict(rc):
    return {
        "policy": rc.policy,
        "topology": rc.topology_name,
        "normalization": rc.normalization,
        "master_seed": rc.master_seed,
        "es": dict(rc.es_section),
        "walker": dict(rc.walker_section),
        "terrain": dict(rc.terrain_section),
        "damage": dict(rc.damage_section),
        "checkpoint_interval": rc.checkpoint_interval,
    }


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header_line = fh.readline()
        payload = fh.read()
    try:
        header = json.loads(header_line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: not a checkpoint file ({exc})") from None
    if header.get("format") != CKPT_FORMAT:
        raise InputError(f"{path}: unknown checkpoint format {header.get('format')!r}")
    theta = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    if theta.size != header["genome_size"]:
        raise InputError(
            f"{path}: genome payload {theta.size} != header genome_size {header['genome_size']}"
        )
    return Checkpoint(
        theta=theta,
        generation=header["generation"],
        alpha=header["alpha"],
        sigma=header["sigma"],
        config_hash=header["config_hash"],
        run_config=header["run_config"],
        master_seed=header["master_seed"],
        eval_center_seed=header["eval_center_seed"],
        version=header["version"],
    )


def checkpoint_run_config(ckpt):
    return run_config_from_dict(ckpt.run_config, path="<checkpoint>")


# ---------------------------------------------------------------------------
# generation log


def format_log_row(record):
    return "%d,%r,%r,%r,%r,%r,%r\n" % (
        record.generation,
        record.best,
        record.mean,
        record.std,
        record.alpha,
        record.sigma,
        record.wall_ms,
    )


def canonical_log_bytes(path):
    """Log bytes with the wall_ms column stripped.

    wall_ms is real elapsed time and therefore the one column that cannot be
    reproduced bit-for-bit; everything else must be.
    """
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            out.append(",".join(line.rstrip("\n").split(",")[:-1]))
    return ("\n".join(out) + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# commands


def cmd_train(config_path, out=None, workers=None, resume=None, render_figures=True,
              progress=print):
    """Train per the config; writes gen_log.csv, checkpoints, metrics, figure."""
    rc = load_run_config(config_path)
    if out is not None:
        rc.out_dir = str(out)
    os.makedirs(rc.out_dir, exist_ok=True)
    es_config = rc.es_config(workers=workers)
    task = task_for(rc)

    start_generation = 0
    theta0 = None
    log_path = os.path.join(rc.out_dir, "gen_log.csv")
    center_path = os.path.join(rc.out_dir, "center_log.csv")
    if resume is not None:
        ckpt = load_checkpoint(resume)
        if ckpt.config_hash != rc.config_hash():
            raise ConfigError(
                "checkpoint was produced by a different config "
                f"(hash {ckpt.config_hash[:12]}.. != {rc.config_hash()[:12]}..)"
            )
        start_generation = ckpt.generation
        theta0 = ckpt.theta
        log_fh = open(log_path, "a", encoding="utf-8", newline="")
        center_fh = open(center_path, "a", encoding="utf-8", newline="")
    else:
        log_fh = open(log_path, "w", encoding="utf-8", newline="")
        log_fh.write(",".join(LOG_HEADER) + "\n")
        center_fh = open(center_path, "w", encoding="utf-8", newline="")
        center_fh.write("generation,center_fitness\n")

    records = []
    interval = rc.checkpoint_interval
    eval_center_seed = rngmod.stream_seed(rc.master_seed, rngmod.STREAM_EVAL_CENTER)

    def on_generation(record, theta):
        records.append(record)
        log_fh.write(format_log_row(record))
        log_fh.flush()
        center_fh.write("%d,%r\n" % (record.generation, record.center_fitness))
        center_fh.flush()
        if progress is not None:
            progress(
                "gen %d/%d best=%.4f mean=%.4f center=%.4f"
                % (record.generation, es_config.generations, record.best,
                   record.mean, record.center_fitness)
            )
        if interval > 0 and record.generation % interval == 0:
            save_checkpoint(
                os.path.join(rc.out_dir, f"ckpt_{record.generation:06d}.ckpt"),
                theta, record.generation, rc, eval_center_seed,
            )

    try:
        run = esmod.train(
            task, es_config,
            start_generation=start_generation,
            theta0=theta0,
            on_generation=on_generation,
        )
    finally:
        log_fh.close()
        center_fh.close()

    final_path = os.path.join(rc.out_dir, "final.ckpt")
    save_checkpoint(final_path, run.theta, es_config.generations, rc, run.eval_center_seed)
    metrics = {
        "generations": es_config.generations,
        "best_fitness": run.best_fitness,
        "final_center_fitness": run.records[-1].center_fitness if run.records else None,
        "eval_center_seed": run.eval_center_seed,
        "config_hash": rc.config_hash(),
    }
    with open(os.path.join(rc.out_dir, "metrics.json"), "w", encoding="utf-8") as fh:
        json.dump(metrics, fh, indent=2, sort_keys=True)
    if render_figures and records:
        figures.training_curves(
            records, os.path.join(rc.out_dir, "training_curves.png"),
            title=f"{rc.policy}/{rc.topology_name} ({rc.normalization})",
        )
    return run, final_path


def parse_terrain_arg(terrain_arg):
    """CLI terrain shorthand: 'flat' or 'blocks[:h_max[:seed]]'."""
    if terrain_arg is None:
        return None
    parts = str(terrain_arg).split(":")
    kind = parts[0]
    kwargs = {}
    if len(parts) > 1 and parts[1]:
        kwargs["h_max"] = float(parts[1])
    if len(parts) > 2 and parts[2]:
        kwargs["seed"] = int(parts[2])
    return make_terrain(kind, **kwargs)


def cmd_eval(checkpoint_path, terrain=None, damage="none", seeds=(0,), save_traces=False,
             out=None, render_figures=True, progress=print):
    """Evaluate a checkpointed policy; returns the per-seed metric rows."""
    ckpt = load_checkpoint(checkpoint_path)
    rc = checkpoint_run_config(ckpt)
    spec = rc.policy_spec
    if ckpt.theta.size != spec.genome_size:
        raise ConfigError(
            f"checkpoint genome ({ckpt.theta.size}) does not match topology "
            f"{rc.topology_name} / policy {rc.policy} ({spec.genome_size})"
        )
    walker_config = rc.walker_config()
    terrain_obj = parse_terrain_arg(terrain) or rc.terrain()
    damage_obj = DamageSpec.from_preset(damage, walker_config)
    out_dir = out or os.path.dirname(os.path.abspath(checkpoint_path))
    os.makedirs(out_dir, exist_ok=True)
    if not seeds:
        raise InputError("eval needs at least one seed")

    policy = spec.build(ckpt.theta)
    rows = []
    for seed in seeds:
        fitness, trace = run_episode(
            policy, walker_config, terrain_obj, damage_obj, seed=int(seed), capture=True,
            meta={"topology": rc.topology_name, "generation": ckpt.generation},
        )
        orient = trace.observations[:, -3:]
        upright = np.cos(orient[:, 0]) * np.cos(orient[:, 1])
        rows.append({
            "seed": int(seed),
            "fitness": fitness,
            "displacement": trace.meta["displacement"],
            "upright_violations": int(np.sum(upright <= 0.93)),
            "yaw_violations": int(np.sum(np.abs(orient[:, 2]) >= 0.45)),
            "truncated": trace.meta["truncated"],
        })
        if save_traces:
            trace.save(os.path.join(out_dir, f"eval_trace_seed{int(seed)}.trace"))
        if progress is not None:
            progress(
                "seed %d fitness=%.4f displacement=%.4f" % (seed, fitness, trace.meta["displacement"])
            )
    csv_path = os.path.join(out_dir, "eval_metrics.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
    if render_figures:
        fig_rows = [("policy", "eval", r["seed"], r["fitness"]) for r in rows]
        figures.compare_matrix(fig_rows, os.path.join(out_dir, "eval_fitness.png"))
    return rows


def cmd_analyze(trace_paths, q=3, skip=100, out=None, render_figures=True, progress=print):
    """PCA + attractor + spread reports for one or more trace files."""
    if not trace_paths:
        raise InputError("no trace files given")
    traces = [(str(p), EpisodeTrace.load(p)) for p in trace_paths]
    lengths = {path: tr.snapshot_length for path, tr in traces}
    if len(set(lengths.values())) > 1:
        detail = ", ".join(f"{os.path.basename(p)}:{n}" for p, n in lengths.items())
        raise InputError(f"traces have mixed snapshot lengths: {detail}")
    out_dir = out or "."
    os.makedirs(out_dir, exist_ok=True)

    summary = []
    for path, trace in traces:
        stem = os.path.splitext(os.path.basename(path))[0]
        result = pca(trace, q)
        scores_path = os.path.join(out_dir, f"{stem}_scores.csv")
        with open(scores_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(f"pc{i + 1}" for i in range(q)) + "\n")
            for row in result.scores:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        with open(os.path.join(out_dir, f"{stem}_variance.json"), "w", encoding="utf-8") as fh:
            json.dump(
                {
                    "variance_ratios": result.variance_ratios.tolist(),
                    "degenerate": result.degenerate,
                    "total_variance": result.total_variance,
                    "meta": trace.meta,
                },
                fh, indent=2, sort_keys=True,
            )
        label = attractor_class(result)
        spreads = {
            f"pc{i + 1}": (pc_spread(result, i, skip) if skip < trace.steps else float("nan"))
            for i in range(q)
        }
        summary.append({"trace": stem, "attractor": label, **spreads})
        if render_figures:
            figures.pca_trajectory(result.scores, os.path.join(out_dir, f"{stem}_trajectory.png"),
                                   title=stem)
            figures.variance_ratio_bar(result.variance_ratios,
                                       os.path.join(out_dir, f"{stem}_variance.png"))
        if progress is not None:
            progress(f"{stem}: attractor={label} spreads={spreads}")

    summary_path = os.path.join(out_dir, "analyze_summary.csv")
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0].keys()))
        writer.writeheader()
        writer.writerows(summary)
    return summary


def evaluation_battery(walker_config):
    """The shared OOD evaluation conditions: terrains, damage, perturbation."""
    uneven = make_terrain("blocks", h_max=0.04, seed=1234)
    battery = [
        ("flat", make_terrain("flat"), NO_DAMAGE, walker_config),
        ("uneven", uneven, NO_DAMAGE, walker_config),
    ]
    for preset in ("lf", "rh", "lf_rf"):
        battery.append(
            (f"damage_{preset}", make_terrain("flat"),
             DamageSpec.from_preset(preset, walker_config), walker_config)
        )
    battery.append(("perturbed", make_terrain("flat"), NO_DAMAGE,
                    dynamics_perturbation(walker_config)))
    return battery


def cmd_compare(config_paths, seeds=(0, 1, 2), out=None, workers=None,
                render_figures=True, progress=print):
    """Train-or-load each config, evaluate all on the shared battery."""
    if len(config_paths) < 2:
        raise ConfigError("compare needs at least two configs")
    out_dir = out or "compare_out"
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for config_path in config_paths:
        rc = load_run_config(config_path)
        label = os.path.splitext(os.path.basename(str(config_path)))[0]
        final_path = os.path.join(rc.out_dir, "final.ckpt")
        try:
            if not os.path.exists(final_path):
                if progress is not None:
                    progress(f"[{label}] no checkpoint, training...")
                _, final_path = cmd_train(
                    config_path, workers=workers, render_figures=render_figures,
                    progress=progress,
                )
            ckpt = load_checkpoint(final_path)
            ckpt_rc = checkpoint_run_config(ckpt)
            policy = ckpt_rc.policy_spec.build(ckpt.theta)
            walker_config = ckpt_rc.walker_config()
        except Exception as exc:  # noqa: BLE001 - partial table on sub-run failure
            for condition in ("flat", "uneven", "damage_lf", "damage_rh",
                              "damage_lf_rf", "perturbed"):
                for seed in seeds:
                    rows.append((label, condition, int(seed), float("nan"), f"error:{exc}"))
            continue

        for condition, terrain_obj, damage_obj, cond_config in evaluation_battery(walker_config):
            for seed in seeds:
                try:
                    fitness, trace = run_episode(
                        policy, cond_config, terrain_obj, damage_obj,
                        seed=int(seed), capture=False,
                    )
                    rows.append((label, condition, int(seed), fitness, "ok"))
                except Exception as exc:  # noqa: BLE001
                    rows.append((label, condition, int(seed), float("nan"), f"error:{exc}"))
            if progress is not None:
                vals = [r[3] for r in rows if r[0] == label and r[1] == condition]
                progress(f"[{label}] {condition}: mean={np.nanmean(vals):.4f}")

    csv_path = os.path.join(out_dir, "compare.csv")
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("policy,condition,seed,fitness,status\n")
        for label, condition, seed, fitness, status in rows:
            fh.write(f"{label},{condition},{seed},{float(fitness)!r},{status}\n")
    if render_figures:
        figures.compare_matrix(rows, os.path.join(out_dir, "compare.png"))
    return rows
