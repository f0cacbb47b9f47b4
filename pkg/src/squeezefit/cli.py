"""Command-line front end and experiment orchestration.

Subcommands: ``solve`` and ``certify`` for single instances, ``recover`` for
planted-model sweeps, ``compare`` for baseline comparison tables, ``statdim``
for Monte Carlo statistical-dimension estimates, and ``gen`` to emit the
synthetic datasets as CSV. Every command is deterministic given ``--seed``
(wall-clock timing aside), writes a ResultRecord to ``<out>/results.json``,
and exits 0 on success, 1 on verification failure, 2 on infeasibility, and 3
on input errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import ConeSpec, estimate_stat_dim, recovery_report
from .baselines import knn_fit, knn_predict, lda, pca
from .constraints import build_constraints_full, build_constraints_nn
from .data import (
    LabeledDataset,
    downsample_images,
    load_csv,
    load_idx,
    save_csv,
)
from .duality import certify
from .errors import FormatError, Infeasible, InvalidInput, SqueezeFitError
from .records import (
    ResultRecord,
    aggregate_metrics,
    load_matrix_json,
    save_matrix_json,
    to_native,
)
from .solver import SqueezeConfig, solve, solve_hard, solve_hinge
from .spectral import psd_sqrt, rank_round
from .synth import PlantedModel, generate_demo3d, generate_planted, generate_simplex_base

SCHEMA_VERSION = 1
SUCCESS_FROBENIUS = 0.05
EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INFEASIBLE = 2
EXIT_INPUT = 3

MNIST_FILES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def data_dir() -> Path:
    """Dataset cache location, overridable through ``SQZ_DATA_DIR``."""
    root = os.environ.get("SQZ_DATA_DIR")
    if root:
        return Path(root)
    return Path.home() / ".cache" / "squeezefit"


# ---------------------------------------------------------------------------
# configuration plumbing: defaults < config file < explicit CLI flags


def _csv_ints(value) -> list[int]:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    return [int(part) for part in str(value).split(",") if part.strip()]


def _csv_floats(value) -> list[float]:
    if isinstance(value, (list, tuple)):
        return [float(v) for v in value]
    return [float(part) for part in str(value).split(",") if part.strip()]


def _csv_strs(value) -> list[str]:
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [part.strip() for part in str(value).split(",") if part.strip()]


def _opt(caster):
    def cast(value):
        return None if value is None else caster(value)

    return cast


_SCHEMAS: dict[str, dict] = {
    "solve": {
        "dataset": _opt(str),
        "label_column": int,
        "skip_header": bool,
        "delta": float,
        "mode": str,
        "lam": float,
        "s": _opt(int),
        "max_iters": int,
        "tol_obj": float,
        "tol_feas": float,
        "step": str,
        "certify": bool,
    },
    "certify": {
        "dataset": _opt(str),
        "matrix": _opt(str),
        "label_column": int,
        "skip_header": bool,
        "delta": float,
        "tol_feas": float,
        "tight_tol": _opt(float),
    },
    "recover": {
        "dim": int,
        "rank": int,
        "n_base": int,
        "n_reps": int,
        "sigma": _opt(float),
        "snr": _opt(float),
        "delta": float,
        "trials": int,
        "sweep_sigma": _opt(_csv_floats),
        "sweep_reps": _opt(_csv_ints),
    },
    "compare": {
        "train": _opt(str),
        "test": _opt(str),
        "preset": _opt(str),
        "label_column": int,
        "skip_header": bool,
        "methods": _csv_strs,
        "n": int,
        "k_list": _csv_ints,
        "rank": _opt(int),
        "s": int,
        "lam": float,
        "downsample": int,
    },
    "statdim": {
        "cone": str,
        "n": _csv_ints,
        "c1": float,
        "trials": int,
    },
    "gen": {
        "what": _opt(str),
        "r": int,
        "d": int,
        "dim": int,
        "rank": int,
        "n_base": int,
        "n_reps": int,
        "sigma": float,
        "delta": float,
        "n": int,
        "margin": float,
        "spread": float,
        "noise": float,
    },
}

_DEFAULTS: dict[str, dict] = {
    "solve": {
        "dataset": None,
        "label_column": 0,
        "skip_header": False,
        "delta": 1.0,
        "mode": "hard",
        "lam": 1.0,
        "s": None,
        "max_iters": 20000,
        "tol_obj": 1e-6,
        "tol_feas": 1e-6,
        "step": "polyak",
        "certify": False,
    },
    "certify": {
        "dataset": None,
        "matrix": None,
        "label_column": 0,
        "skip_header": False,
        "delta": 1.0,
        "tol_feas": 1e-6,
        "tight_tol": None,
    },
    "recover": {
        "dim": 20,
        "rank": 3,
        "n_base": 8,
        "n_reps": 60,
        "sigma": None,
        "snr": None,
        "delta": 1.0,
        "trials": 20,
        "sweep_sigma": None,
        "sweep_reps": None,
    },
    "compare": {
        "train": None,
        "test": None,
        "preset": None,
        "label_column": 0,
        "skip_header": False,
        "methods": ["id", "pca", "lda", "squeezefit"],
        "n": 50,
        "k_list": [1, 5],
        "rank": None,
        "s": 5,
        "lam": 1.0,
        "downsample": 10,
    },
    "statdim": {
        "cone": "orthant",
        "n": [32],
        "c1": 50.0,
        "trials": 10000,
    },
    "gen": {
        "what": None,
        "r": 4,
        "d": 8,
        "dim": 20,
        "rank": 3,
        "n_base": 8,
        "n_reps": 60,
        "sigma": 0.1,
        "delta": 1.0,
        "n": 60,
        "margin": 1.0,
        "spread": 0.5,
        "noise": 1.25,
    },
}


def _merged_config(args: argparse.Namespace, command: str) -> tuple[dict, set]:
    """Merge defaults, the ``--config`` file, and explicit CLI flags.

    Returns ``(config, explicit)`` where explicit names the keys set by the
    file or the command line (not resting at their defaults).
    """
    schema = _SCHEMAS[command]
    merged = dict(_DEFAULTS[command])
    explicit: set[str] = set()
    if args.config is not None:
        try:
            blob = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise FormatError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(blob, dict):
            raise FormatError("config file must hold a JSON object")
        version = blob.pop("schema", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise FormatError(
                f"config schema {version!r} unsupported (expected {SCHEMA_VERSION})"
            )
        unknown = sorted(set(blob) - set(schema))
        if unknown:
            raise FormatError(f"unknown config keys for {command}: {unknown}")
        for key, value in blob.items():
            merged[key] = schema[key](value)
            explicit.add(key)
    for key in schema:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = schema[key](value)
            explicit.add(key)
    return merged, explicit


def _outdir(args: argparse.Namespace) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _record(command, cfg, seed, per_trial, aggregates, wall) -> ResultRecord:
    return ResultRecord(
        command=command,
        config=to_native(cfg),
        seed=int(seed),
        artifact_version=__version__,
        per_trial=to_native(per_trial),
        aggregates=to_native(aggregates),
        wall_clock_s=float(wall),
    )


def _child_seeds(seed: int, count: int) -> list[int]:
    """Independent per-trial seeds from one splittable root."""
    return [int(ss.generate_state(1)[0]) for ss in np.random.SeedSequence(seed).spawn(count)]


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _plot_lines(path: Path, x, series: dict[str, list], xlabel: str, ylabel: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for name, values in series.items():
        ax.plot(x, values, marker="o", label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args: argparse.Namespace) -> int:
    cfg, explicit = _merged_config(args, "solve")
    if cfg["dataset"] is None:
        raise InvalidInput("solve needs a dataset path")
    out = _outdir(args)
    started = time.perf_counter()
    ds = load_csv(cfg["dataset"], cfg["label_column"], cfg["skip_header"])
    if cfg["mode"] == "zero_plus" and "delta" in explicit:
        print(
            "warning: --mode zero_plus fixes the margin at 1; --delta is ignored",
            file=sys.stderr,
        )
    if cfg["s"] is None:
        constraints = build_constraints_full(ds)
    else:
        constraints = build_constraints_nn(ds, cfg["s"])
    solver_config = SqueezeConfig(
        delta=cfg["delta"],
        mode=cfg["mode"],
        lam=cfg["lam"],
        max_iters=cfg["max_iters"],
        tol_obj=cfg["tol_obj"],
        tol_feas=cfg["tol_feas"],
        step=cfg["step"],
        seed=args.seed,
    )
    result = solve(constraints, solver_config)
    rank, _ = rank_round(result.matrix, 0.5)
    save_matrix_json(out / "matrix.json", result.matrix)
    report = None
    if cfg["certify"]:
        effective_delta = 1.0 if cfg["mode"] == "zero_plus" else cfg["delta"]
        report = certify(
            ds,
            result.matrix,
            effective_delta,
            constraints=constraints,
            tol_feas=cfg["tol_feas"],
        )
        (out / "certificate.json").write_text(report.to_json() + "\n")
    trial = {
        "objective": result.objective,
        "worst_violation": result.worst_violation,
        "hinge_value": result.hinge_value,
        "iterations": result.iterations,
        "converged": bool(result.converged),
        "rank": rank,
    }
    if report is not None:
        trial["verdict"] = report.verdict
        trial["gap"] = report.gap
    wall = time.perf_counter() - started
    record = _record("solve", cfg, args.seed, [trial], aggregate_metrics([trial]), wall)
    record.save(out / "results.json")
    print(
        f"solve: n={ds.n} d={ds.dim} constraints={len(constraints)} "
        f"mode={cfg['mode']} trace={result.objective:.9f} rank={rank} "
        f"converged={result.converged}"
    )
    if report is not None:
        print(
            f"certify: verdict={report.verdict} gap={report.gap:.3e} "
            f"tight={report.tight_set_size}"
        )
        if not report.certified:
            return EXIT_VERIFY
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    cfg, _ = _merged_config(args, "certify")
    if cfg["dataset"] is None or cfg["matrix"] is None:
        raise InvalidInput("certify needs a dataset path and a matrix path")
    out = _outdir(args)
    started = time.perf_counter()
    ds = load_csv(cfg["dataset"], cfg["label_column"], cfg["skip_header"])
    matrix = load_matrix_json(cfg["matrix"])
    report = certify(
        ds,
        matrix,
        cfg["delta"],
        tol_feas=cfg["tol_feas"],
        tight_tol=cfg["tight_tol"],
    )
    (out / "certificate.json").write_text(report.to_json() + "\n")
    print(
        f"verdict={report.verdict} primal={report.primal_value:.9f} "
        f"dual={report.dual_value:.9f} gap={report.gap:.3e} "
        f"tight={report.tight_set_size}"
    )
    if report.violating_pair is not None:
        print(f"violating pair: {report.violating_pair}")
    for name, value in sorted(report.residuals.items()):
        print(f"  residual {name}: {value:.3e}")
    trial = {
        "verdict": report.verdict,
        "primal": report.primal_value,
        "dual": report.dual_value,
        "gap": report.gap,
        "tight_set_size": report.tight_set_size,
    }
    wall = time.perf_counter() - started
    record = _record("certify", cfg, args.seed, [trial], {}, wall)
    record.save(out / "results.json")
    return EXIT_OK if report.certified else EXIT_VERIFY


def _recover_sigma(cfg: dict) -> float:
    """The noise scale, from --sigma or from --snr via SNR = delta^2/(r sigma^2).

    The default planted base is the augmented simplex, whose contact Gram has
    smallest nonzero eigenvalue 2 delta^2, so SNR = lambda/(2 r sigma^2)
    reduces to delta^2 / (r sigma^2).
    """
    if (cfg["sigma"] is None) == (cfg["snr"] is None):
        raise InvalidInput("recover needs exactly one of sigma or snr")
    if cfg["sigma"] is not None:
        if cfg["sigma"] < 0:
            raise InvalidInput("sigma must be nonnegative")
        return float(cfg["sigma"])
    if cfg["snr"] <= 0:
        raise InvalidInput("snr must be positive")
    return float(cfg["delta"] / np.sqrt(cfg["rank"] * cfg["snr"]))


def _recover_trial(model: PlantedModel, child_seed: int) -> dict:
    ds, pi_true = generate_planted(model, seed=child_seed)
    constraints = build_constraints_full(ds)
    result = solve_hard(
        constraints, SqueezeConfig(delta=model.delta, seed=child_seed)
    )
    rep = recovery_report(result.matrix, pi_true)
    return {
        "seed": child_seed,
        "frobenius": rep.frobenius,
        "angle": rep.angle,
        "rank_match": bool(rep.rank_match),
        "success": bool(rep.frobenius <= SUCCESS_FROBENIUS),
        "trace": float(np.trace(result.matrix)),
        "iterations": result.iterations,
    }


def cmd_recover(args: argparse.Namespace) -> int:
    cfg, _ = _merged_config(args, "recover")
    out = _outdir(args)
    started = time.perf_counter()
    if cfg["sweep_sigma"] is not None and cfg["sweep_reps"] is not None:
        raise InvalidInput("sweep over sigma or reps, not both")
    sweep_key = None
    if cfg["sweep_sigma"] is not None:
        sweep_key, sweep_values = "sigma", [float(v) for v in cfg["sweep_sigma"]]
    elif cfg["sweep_reps"] is not None:
        sweep_key, sweep_values = "n_reps", [int(v) for v in cfg["sweep_reps"]]
    else:
        sweep_values = [None]

    base_sigma: float | None = None
    per_trial: list[dict] = []
    rows: list[list] = []
    for value in sweep_values:
        model_kwargs = {
            "dim": cfg["dim"],
            "rank": cfg["rank"],
            "n_base": cfg["n_base"],
            "n_reps": cfg["n_reps"],
            "delta": cfg["delta"],
        }
        if sweep_key == "sigma":
            model_kwargs["sigma"] = float(value)
        else:
            if sweep_key == "n_reps":
                model_kwargs["n_reps"] = int(value)
            if base_sigma is None:
                base_sigma = _recover_sigma(cfg)
            model_kwargs["sigma"] = base_sigma
        model = PlantedModel(**model_kwargs)
        seeds = _child_seeds(args.seed, cfg["trials"])
        with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
            futures = [pool.submit(_recover_trial, model, s) for s in seeds]
            trials = [f.result() for f in futures]
        if sweep_key is not None:
            for t in trials:
                t[sweep_key] = value
        per_trial.extend(trials)
        successes = sum(t["success"] for t in trials)
        rate = successes / len(trials)
        mean_frob = float(np.mean([t["frobenius"] for t in trials]))
        rows.append([value if value is not None else "-", rate, mean_frob])
        label = f"{sweep_key}={value} " if sweep_key else ""
        print(
            f"recover: {label}trials={len(trials)} success={successes}/{len(trials)} "
            f"mean_frobenius={mean_frob:.4f}"
        )

    aggregates = aggregate_metrics(per_trial)
    total = len(per_trial)
    aggregates["success_rate"] = sum(t["success"] for t in per_trial) / total
    aggregates["n_success"] = int(sum(t["success"] for t in per_trial))
    if sweep_key is not None:
        _write_csv(
            out / "table.csv",
            [sweep_key, "success_rate", "mean_frobenius"],
            rows,
        )
        _plot_lines(
            out / "recovery.svg",
            [row[0] for row in rows],
            {"success rate": [row[1] for row in rows]},
            sweep_key,
            "success rate",
        )
    wall = time.perf_counter() - started
    record = _record("recover", cfg, args.seed, per_trial, aggregates, wall)
    record.save(out / "results.json")
    return EXIT_OK


def _find_idx_file(stem: str) -> Path | None:
    for suffix in (".gz", ""):
        candidate = data_dir() / f"{stem}{suffix}"
        if candidate.exists():
            return candidate
    return None


def _load_mnist49(downsample: int) -> tuple[LabeledDataset, LabeledDataset]:
    paths = {}
    missing = []
    for key, stem in MNIST_FILES.items():
        found = _find_idx_file(stem)
        if found is None:
            missing.append(stem)
        paths[key] = found
    if missing:
        location = data_dir()
        raise FormatError(
            "MNIST files not found in "
            f"{location} (set SQZ_DATA_DIR to override). Download "
            + ", ".join(f"{stem}.gz" for stem in missing)
            + " from an MNIST mirror (e.g. ossci-datasets.s3.amazonaws.com/mnist/) "
            "into that directory."
        )
    train = load_idx(paths["train_images"], paths["train_labels"], keep_labels=(4, 9))
    test = load_idx(paths["test_images"], paths["test_labels"], keep_labels=(4, 9))
    if downsample and downsample < 28:
        train = downsample_images(train, 28, downsample)
        test = downsample_images(test, 28, downsample)
    return train, test


def _stratified_subsample(ds: LabeledDataset, n: int, seed: int) -> LabeledDataset:
    """About-proportional per-class draw of ``n`` points, every class present."""
    if not 1 <= n <= ds.n:
        raise InvalidInput(f"subsample size must be in [1, {ds.n}], got {n}")
    rng = np.random.default_rng(seed)
    classes = ds.classes
    quota = {int(c): max(1, int(round(n * ds.class_indices(c).size / ds.n))) for c in classes}
    while sum(quota.values()) > n:
        quota[max(quota, key=lambda c: quota[c])] -= 1
    while sum(quota.values()) < n:
        largest = max(classes.tolist(), key=lambda c: ds.class_indices(c).size - quota[int(c)])
        quota[int(largest)] += 1
    chosen: list[np.ndarray] = []
    for label in classes:
        members = ds.class_indices(label)
        take = min(quota[int(label)], members.size)
        chosen.append(rng.choice(members, size=take, replace=False))
    return ds.subset(np.sort(np.concatenate(chosen)))


def cmd_compare(args: argparse.Namespace) -> int:
    cfg, _ = _merged_config(args, "compare")
    out = _outdir(args)
    started = time.perf_counter()
    methods = cfg["methods"]
    unknown = sorted(set(methods) - {"id", "pca", "lda", "squeezefit"})
    if unknown:
        raise InvalidInput(f"unknown methods: {unknown}")
    if cfg["preset"] is not None:
        if cfg["preset"] != "mnist49":
            raise InvalidInput(f"unknown preset {cfg['preset']!r}")
        train, test = _load_mnist49(cfg["downsample"])
    else:
        if cfg["train"] is None or cfg["test"] is None:
            raise InvalidInput("compare needs --train and --test (or --preset)")
        train = load_csv(cfg["train"], cfg["label_column"], cfg["skip_header"])
        test = load_csv(cfg["test"], cfg["label_column"], cfg["skip_header"])
    if train.dim != test.dim:
        raise InvalidInput(
            f"train dimension {train.dim} != test dimension {test.dim}"
        )

    subsample = _stratified_subsample(train, min(cfg["n"], train.n), args.seed)
    factors: dict[str, tuple[np.ndarray, int]] = {}  # method -> (m_sqrt, rank)
    sf_rank = None
    if "squeezefit" in methods:
        constraints = build_constraints_nn(subsample, cfg["s"])
        result = solve_hinge(
            constraints,
            SqueezeConfig(delta=1.0, mode="hinge", lam=cfg["lam"], seed=args.seed),
            cone="psd",
        )
        sf_rank, _ = rank_round(result.matrix, 0.5)
        factors["squeezefit"] = (psd_sqrt(result.matrix), sf_rank)
    if "id" in methods:
        factors["id"] = (np.eye(train.dim), train.dim)
    if "pca" in methods:
        pca_rank = cfg["rank"] if cfg["rank"] is not None else sf_rank
        if pca_rank is None:
            raise InvalidInput("pca needs --rank when squeezefit is not run")
        pca_rank = max(1, min(int(pca_rank), subsample.dim))
        projection = pca(subsample, pca_rank)
        factors["pca"] = (projection, int(round(float(np.trace(projection)))))
    if "lda" in methods:
        projection = lda(subsample)
        factors["lda"] = (projection, int(round(float(np.trace(projection)))))

    rows = []
    for method in methods:
        m_sqrt, rank = factors[method]
        for k in cfg["k_list"]:
            clf = knn_fit(train, m_sqrt, min(int(k), train.n))
            _, error = knn_predict(clf, test.points @ m_sqrt, test.labels)
            rows.append(
                {"method": method, "rank": rank, "k": int(k), "error_pct": 100.0 * error}
            )
            print(
                f"compare: method={method:<10} rank={rank:<4} K={k:<3} "
                f"error={100.0 * error:.2f}%"
            )
    _write_csv(
        out / "table.csv",
        ["method", "rank", "k", "error_pct"],
        [[r["method"], r["rank"], r["k"], f"{r['error_pct']:.6f}"] for r in rows],
    )
    wall = time.perf_counter() - started
    record = _record("compare", cfg, args.seed, rows, {}, wall)
    record.save(out / "results.json")
    return EXIT_OK


def _statdim_entry(cfg: dict, n: int, child_seed: int) -> dict:
    cone = ConeSpec(cfg["cone"], n, cfg["c1"])
    estimate = estimate_stat_dim(cone, cfg["trials"], seed=child_seed)
    return {
        "n": int(n),
        "estimate": estimate.estimate,
        "stderr": estimate.stderr,
        "ratio": estimate.estimate / n,
        "reliable": bool(estimate.reliable),
    }


def cmd_statdim(args: argparse.Namespace) -> int:
    cfg, _ = _merged_config(args, "statdim")
    out = _outdir(args)
    started = time.perf_counter()
    sizes = cfg["n"]
    seeds = _child_seeds(args.seed, len(sizes))
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        futures = [
            pool.submit(_statdim_entry, cfg, n, s) for n, s in zip(sizes, seeds)
        ]
        entries = [f.result() for f in futures]
    for entry in entries:
        print(
            f"statdim: cone={cfg['cone']} n={entry['n']} "
            f"estimate={entry['estimate']:.4f} +- {entry['stderr']:.4f} "
            f"ratio={entry['ratio']:.4f} reliable={entry['reliable']}"
        )
    _write_csv(
        out / "table.csv",
        ["n", "estimate", "stderr", "ratio", "reliable"],
        [
            [e["n"], e["estimate"], e["stderr"], e["ratio"], e["reliable"]]
            for e in entries
        ],
    )
    if len(entries) > 1:
        _plot_lines(
            out / "statdim.svg",
            [e["n"] for e in entries],
            {"estimate / n": [e["ratio"] for e in entries]},
            "n",
            "statistical dimension / n",
        )
    wall = time.perf_counter() - started
    record = _record("statdim", cfg, args.seed, entries, {}, wall)
    record.save(out / "results.json")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    cfg, _ = _merged_config(args, "gen")
    out = _outdir(args)
    started = time.perf_counter()
    what = cfg["what"]
    projection = None
    if what == "simplex":
        ds = generate_simplex_base(cfg["r"], cfg["d"])
    elif what == "planted":
        model = PlantedModel(
            dim=cfg["dim"],
            rank=cfg["rank"],
            n_base=cfg["n_base"],
            n_reps=cfg["n_reps"],
            sigma=cfg["sigma"],
            delta=cfg["delta"],
        )
        ds, projection = generate_planted(model, seed=args.seed)
    elif what == "demo3d":
        ds, projection = generate_demo3d(
            seed=args.seed,
            n=cfg["n"],
            margin=cfg["margin"],
            spread=cfg["spread"],
            sigma=cfg["noise"],
        )
    else:
        raise InvalidInput("gen needs --what simplex | planted | demo3d")
    save_csv(ds, out / "dataset.csv")
    if projection is not None:
        save_matrix_json(out / "projection.json", projection)
    trial = {"what": what, "n": ds.n, "dim": ds.dim, "classes": len(ds.classes)}
    wall = time.perf_counter() - started
    record = _record("gen", cfg, args.seed, [trial], {}, wall)
    record.save(out / "results.json")
    print(f"gen: wrote {ds.n} points of dimension {ds.dim} to {out / 'dataset.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _add_shared(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="root random seed")
    sub.add_argument("--out", default=".", help="output directory")
    sub.add_argument("--config", default=None, help="JSON config file")
    sub.add_argument("--threads", type=int, default=1, help="worker pool size")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="squeezefit",
        description="Low-rank metric learning with a provable separation margin.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = commands.add_parser("solve", help="solve a margin program on a CSV dataset")
    p.add_argument("dataset", nargs="?", default=None, help="CSV dataset path")
    p.add_argument("--label-column", type=int, dest="label_column")
    p.add_argument("--skip-header", action="store_const", const=True, dest="skip_header")
    p.add_argument("--delta", type=float)
    p.add_argument("--mode", choices=("hard", "hinge", "zero_plus"))
    p.add_argument("--lam", type=float)
    p.add_argument("--s", type=int, help="prune to s nearest cross-class neighbours")
    p.add_argument("--max-iters", type=int, dest="max_iters")
    p.add_argument("--tol-obj", type=float, dest="tol_obj")
    p.add_argument("--tol-feas", type=float, dest="tol_feas")
    p.add_argument("--step", choices=("polyak", "diminishing"))
    p.add_argument("--certify", action="store_const", const=True)
    p.set_defaults(func=cmd_solve)
    _add_shared(p)

    p = commands.add_parser("certify", help="verify a solved matrix against a dataset")
    p.add_argument("dataset", nargs="?", default=None)
    p.add_argument("matrix", nargs="?", default=None, help="matrix JSON path")
    p.add_argument("--label-column", type=int, dest="label_column")
    p.add_argument("--skip-header", action="store_const", const=True, dest="skip_header")
    p.add_argument("--delta", type=float)
    p.add_argument("--tol-feas", type=float, dest="tol_feas")
    p.add_argument("--tight-tol", type=float, dest="tight_tol")
    p.set_defaults(func=cmd_certify)
    _add_shared(p)

    p = commands.add_parser("recover", help="planted-model recovery experiment")
    p.add_argument("--dim", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--n-base", type=int, dest="n_base")
    p.add_argument("--n-reps", type=int, dest="n_reps")
    p.add_argument("--sigma", type=float)
    p.add_argument("--snr", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--sweep-sigma", dest="sweep_sigma", help="comma-separated sigmas")
    p.add_argument("--sweep-reps", dest="sweep_reps", help="comma-separated rep counts")
    p.set_defaults(func=cmd_recover)
    _add_shared(p)

    p = commands.add_parser("compare", help="baseline comparison table")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--preset", choices=("mnist49",))
    p.add_argument("--label-column", type=int, dest="label_column")
    p.add_argument("--skip-header", action="store_const", const=True, dest="skip_header")
    p.add_argument("--methods", help="comma-separated: id,pca,lda,squeezefit")
    p.add_argument("--n", type=int, help="operator-fitting subsample size")
    p.add_argument("--k-list", dest="k_list", help="comma-separated neighbour counts")
    p.add_argument("--rank", type=int, help="pca rank (default: squeezefit's)")
    p.add_argument("--s", type=int, help="constraint pruning neighbours")
    p.add_argument("--lam", type=float)
    p.add_argument("--downsample", type=int, help="mnist49 target side length")
    p.set_defaults(func=cmd_compare)
    _add_shared(p)

    p = commands.add_parser("statdim", help="Monte Carlo statistical dimension")
    p.add_argument("--cone", choices=("orthant", "capped_orthant"))
    p.add_argument("--n", help="comma-separated ambient dimensions")
    p.add_argument("--c1", type=float)
    p.add_argument("--trials", type=int)
    p.set_defaults(func=cmd_statdim)
    _add_shared(p)

    p = commands.add_parser("gen", help="emit a synthetic dataset as CSV")
    p.add_argument("--what", choices=("simplex", "planted", "demo3d"))
    p.add_argument("--r", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--rank", type=int)
    p.add_argument("--n-base", type=int, dest="n_base")
    p.add_argument("--n-reps", type=int, dest="n_reps")
    p.add_argument("--sigma", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--margin", type=float)
    p.add_argument("--spread", type=float)
    p.add_argument("--noise", type=float)
    p.set_defaults(func=cmd_gen)
    _add_shared(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except Infeasible as exc:
        print(f"error: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SqueezeFitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
