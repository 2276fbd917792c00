"""Benchmark harness: experiment configs, seeded grids, and result emission.

A grid cell is one (seed, method) pair; cells own independent random streams
(see rng.stream), so reruns and harness parallelism are bit-reproducible.
Records are emitted as JSON lines plus a CSV summary table; the record file
carries a content hash over the payload (timestamp excluded).
"""

import csv
import hashlib
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .graphs import GraphModelSpec, assign_edge_weights, sample_er_dag, sample_sf_dag
from .metrics import evaluate, noise_error, posthoc_noise
from .rng import stream
from .sem import Dataset, NoiseSpec, draw_node_variances, sample_noise, simulate_sem, standardize
from .solver import (
    DEFAULT_LAMBDA,
    DEFAULT_LR,
    DEFAULT_THRESHOLD,
    METHODS,
    FitError,
    StageSchedule,
    default_schedule,
    fit,
)

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "read_config",
    "run_grid",
    "noise_study",
    "run_sachs",
    "generate_instance",
    "load_dataset_csv",
    "save_dataset_csv",
    "emit_results",
    "payload_bytes",
]

METRIC_KEYS = ("shd", "shd_normalized", "shd_c", "sid", "tpr", "fdr",
               "noise_rel_error", "edge_count_est")


@dataclass
class ExperimentConfig:
    graph: GraphModelSpec
    noise: NoiseSpec
    n: int = 1000
    methods: tuple = ("colide_ev",)
    lam: float = DEFAULT_LAMBDA
    lr: float = DEFAULT_LR
    threshold: float = DEFAULT_THRESHOLD
    schedule: StageSchedule | None = None
    seeds: tuple = (0,)
    master_seed: int = 0
    standardize: bool = False
    jobs: int = 1
    n_sweep: tuple = ()
    out_path: str | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be nonempty and distinct")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")

    def flat(self) -> dict:
        """Flattened, JSON-ready view of the resolved configuration."""
        sched = self.schedule or default_schedule()
        return {
            "graph.model": self.graph.model,
            "graph.d": self.graph.d,
            "graph.k": self.graph.k,
            "graph.weight_ranges": [list(r) for r in self.graph.weight_ranges],
            "noise.family": self.noise.family,
            "noise.profile": self.noise.profile,
            "noise.variance": self.noise.variance,
            "noise.variance_range": list(self.noise.variance_range),
            "data.n": self.n,
            "data.standardize": self.standardize,
            "fit.methods": list(self.methods),
            "fit.lambda": self.lam,
            "fit.lr": self.lr,
            "fit.threshold": self.threshold,
            "fit.schedule": [list(st) for st in sched.stages],
            "run.seeds": list(self.seeds),
            "run.master_seed": self.master_seed,
            "run.n_sweep": list(self.n_sweep),
        }


# ---------------------------------------------------------------------------
# Config file: line-oriented "dotted.key = value" text, unknown keys rejected.
# ---------------------------------------------------------------------------

def _parse_intervals(text: str):
    out = []
    for part in text.split(","):
        lo, _, hi = part.strip().partition(":")
        out.append((float(lo), float(hi)))
    return tuple(out)


def _parse_stages(text: str):
    out = []
    for part in text.split(","):
        mu, s, t = part.strip().split(":")
        out.append((float(mu), float(s), int(t)))
    return StageSchedule(stages=tuple(out))


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"expected boolean, got {text!r}")


_CONFIG_KEYS = {
    "graph.model": str,
    "graph.d": int,
    "graph.k": float,
    "graph.weight_ranges": _parse_intervals,
    "noise.family": str,
    "noise.profile": str,
    "noise.variance": float,
    "noise.variance_range": lambda t: _parse_intervals(t)[0],
    "data.n": int,
    "data.standardize": _parse_bool,
    "data.n_sweep": lambda t: tuple(int(x) for x in t.split(",")),
    "fit.methods": lambda t: tuple(x.strip() for x in t.split(",")),
    "fit.lambda": float,
    "fit.lr": float,
    "fit.threshold": float,
    "fit.schedule": _parse_stages,
    "run.seeds": lambda t: tuple(int(x) for x in t.split(",")),
    "run.master_seed": int,
    "run.jobs": int,
    "out.path": str,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse the line-oriented key = value experiment config format."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        if key in values:
            raise ValueError(f"line {lineno}: duplicate config key {key!r}")
        values[key] = _CONFIG_KEYS[key](val)

    graph_kw = {"model": values.get("graph.model", "ER"),
                "d": values.get("graph.d", 20),
                "k": values.get("graph.k", 2.0)}
    if "graph.weight_ranges" in values:
        graph_kw["weight_ranges"] = values["graph.weight_ranges"]
    noise_kw = {"family": values.get("noise.family", "gaussian"),
                "profile": values.get("noise.profile", "ev")}
    if "noise.variance" in values:
        noise_kw["variance"] = values["noise.variance"]
    if "noise.variance_range" in values:
        noise_kw["variance_range"] = values["noise.variance_range"]
    return ExperimentConfig(
        graph=GraphModelSpec(**graph_kw),
        noise=NoiseSpec(**noise_kw),
        n=values.get("data.n", 1000),
        methods=values.get("fit.methods", ("colide_ev",)),
        lam=values.get("fit.lambda", DEFAULT_LAMBDA),
        lr=values.get("fit.lr", DEFAULT_LR),
        threshold=values.get("fit.threshold", DEFAULT_THRESHOLD),
        schedule=values.get("fit.schedule"),
        seeds=values.get("run.seeds", (0,)),
        master_seed=values.get("run.master_seed", 0),
        standardize=values.get("data.standardize", False),
        jobs=values.get("run.jobs", 1),
        n_sweep=values.get("data.n_sweep", ()),
        out_path=values.get("out.path"),
    )


def read_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Instance generation and grid execution.
# ---------------------------------------------------------------------------

def generate_instance(cfg: ExperimentConfig, seed: int, n: int | None = None):
    """Sample (true W, true noise scales, dataset) for one seed.

    Graph sampling, weight assignment, variance draws, and noise draws use
    four independent named streams, so e.g. changing n never changes the graph.
    """
    n = n or cfg.n
    sampler = sample_er_dag if cfg.graph.model == "ER" else sample_sf_dag
    support = sampler(cfg.graph, stream(cfg.master_seed, seed, "graph"))
    W_true = assign_edge_weights(support, cfg.graph.weight_ranges,
                                 stream(cfg.master_seed, seed, "weights"))
    if cfg.noise.profile == "nv":
        variances = draw_node_variances(cfg.noise, cfg.graph.d,
                                        stream(cfg.master_seed, seed, "variances"))
    else:
        variances = np.full(cfg.graph.d, cfg.noise.variance)
    Z = sample_noise(cfg.noise.family, variances, n,
                     stream(cfg.master_seed, seed, "noise"))
    ds = simulate_sem(W_true, Z, meta={"seed": seed, "n": n})
    if cfg.standardize:
        ds = standardize(ds)
    return W_true, np.sqrt(variances), ds


def _true_scale_for(method: str, true_sigmas: np.ndarray):
    if method == "colide_nv":
        return true_sigmas
    # scalar reference: root-mean-square of per-node standard deviations
    return float(np.sqrt(np.mean(true_sigmas ** 2)))


def _run_cell(cfg: ExperimentConfig, seed: int, method: str, n: int | None = None):
    W_true, true_sigmas, ds = generate_instance(cfg, seed, n=n)
    record = dict(cfg.flat())
    record.update({"seed": seed, "method": method, "n": n or cfg.n})
    t0 = time.perf_counter()
    try:
        res = fit(ds, method=method, schedule=cfg.schedule, lam=cfg.lam,
                  lr=cfg.lr, tau=cfg.threshold)
    except FitError as exc:
        record["error"] = str(exc)
        return record
    record["wall_time_ms"] = (time.perf_counter() - t0) * 1e3
    record["iterations"] = res.iters_per_stage

    if method == "ls_baseline":
        est_scale = posthoc_noise(ds, res.W, profile=cfg.noise.profile)
        record["sigma_posthoc"] = np.atleast_1d(est_scale).tolist()
    else:
        est_scale = res.sigma if method == "colide_ev" else res.sigmas
        record["sigma_estimate"] = np.atleast_1d(est_scale).tolist()

    # compare scalar estimates to the RMS true sigma, vectors per node
    if np.ndim(est_scale) == 0:
        true_scale = _true_scale_for("colide_ev", true_sigmas)
    else:
        true_scale = true_sigmas
    report = evaluate(res.W_thresholded, W_true,
                      est_scale=est_scale, true_scale=true_scale,
                      sid_ceiling=max(cfg.graph.d, 200))
    record.update(asdict(report))
    return record


def _cell_args(cfg):
    for seed in sorted(cfg.seeds):
        for method in cfg.methods:
            yield seed, method


def run_grid(cfg: ExperimentConfig):
    """Run the seed x method grid; returns per-cell records plus aggregates.

    Fit failures are recorded in the affected row, never fatal to the grid.
    Cells may run in parallel (cfg.jobs); output order is deterministic
    (sorted by seed, then method order).
    """
    args = list(_cell_args(cfg))
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_cell, *zip(*[(cfg, s, m) for s, m in args])))
    else:
        records = [_run_cell(cfg, s, m) for s, m in args]
    records.extend(aggregate(records, cfg.methods))
    return records


def aggregate(records, methods):
    """One mean +/- std row per method over the non-failed records."""
    rows = []
    for method in methods:
        cells = [r for r in records if r.get("method") == method
                 and "error" not in r and not r.get("aggregate")]
        row = {"aggregate": True, "method": method, "runs": len(cells)}
        for key in METRIC_KEYS:
            vals = [r[key] for r in cells if r.get(key) is not None]
            if vals:
                row[f"{key}_mean"] = float(np.mean(vals))
                row[f"{key}_std"] = float(np.std(vals))
        rows.append(row)
    return rows


def noise_study(cfg: ExperimentConfig):
    """Sample-size sweep of noise-estimation error.

    For each n in cfg.n_sweep, fits every configured method and records the
    relative noise error (concomitant estimate, or post-hoc residual formula
    for the LS baseline). Emits per-n aggregates after the cell records.
    """
    if not cfg.n_sweep:
        raise ValueError("noise_study requires data.n_sweep")
    records = []
    for n in cfg.n_sweep:
        batch = [_run_cell(cfg, seed, method, n=n)
                 for seed, method in _cell_args(cfg)]
        records.extend(batch)
        for row in aggregate(batch, cfg.methods):
            row["n"] = n
            records.append(row)
    return records


# ---------------------------------------------------------------------------
# Dataset CSV ingestion (rows = samples, columns = variables).
# ---------------------------------------------------------------------------

def load_dataset_csv(path, has_header: bool = False) -> Dataset:
    with open(path) as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise ValueError(f"empty dataset file: {path}")
    names = None
    if has_header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise ValueError(f"dataset file has a header but no samples: {path}")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"ragged rows in dataset file: {path}")
    try:
        data = np.array(rows, dtype=float)
    except ValueError as exc:
        raise ValueError(f"non-numeric cell in dataset file {path}: {exc}") from None
    meta = {"path": str(path)}
    if names:
        meta["variables"] = names
    return Dataset(X=data.T, meta=meta)


def save_dataset_csv(ds: Dataset, path, header: bool = False) -> None:
    names = ds.meta.get("variables")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header and names:
            writer.writerow(names)
        for col in ds.X.T:
            writer.writerow([f"{v:.17g}" for v in col])


def run_sachs(data_path, truth_path, methods=("colide_ev", "colide_nv"),
              lam: float = DEFAULT_LAMBDA, threshold: float = DEFAULT_THRESHOLD,
              schedule: StageSchedule | None = None):
    """Fit real flow-cytometry data and score against the consensus network."""
    from .graphs import load_adjacency_csv

    ds = load_dataset_csv(data_path, has_header=True)
    W_true = load_adjacency_csv(truth_path)
    if W_true.shape[0] != ds.d:
        raise ValueError("ground-truth node count does not match the dataset")
    records = []
    for method in methods:
        t0 = time.perf_counter()
        res = fit(ds, method=method, lam=lam, tau=threshold, schedule=schedule)
        report = evaluate(res.W_thresholded, W_true)
        record = {"dataset": str(data_path), "method": method,
                  "wall_time_ms": (time.perf_counter() - t0) * 1e3,
                  "iterations": res.iters_per_stage}
        record.update(asdict(report))
        records.append(record)
    return records


# ---------------------------------------------------------------------------
# Result emission: JSON lines + CSV summary, content-hashed payload.
# ---------------------------------------------------------------------------

def payload_bytes(records) -> bytes:
    """Canonical byte representation of the records for hashing/comparison.

    Timing fields (wall_time_ms) stay in the emitted records but live outside
    the hashed payload, like the written_at timestamp: reruns with identical
    seeds produce identical payloads.
    """
    stripped = [{k: v for k, v in r.items() if k != "wall_time_ms"}
                for r in records]
    return json.dumps(stripped, sort_keys=True).encode("utf-8")


def _payload_hash(records) -> str:
    return hashlib.sha256(payload_bytes(records)).hexdigest()


def emit_results(records, path, summary_path=None) -> str:
    """Write one JSON object per record, a trailing meta line, and a CSV summary.

    The meta line carries a sha256 over the record payload; the timestamp
    lives only in the meta line and is excluded from the hash. Returns the hash.
    """
    content_hash = _payload_hash(records)
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
        fh.write(json.dumps({"meta": True, "content_hash": content_hash,
                             "written_at": time.strftime("%Y-%m-%dT%H:%M:%S")}) + "\n")
    aggregates = [r for r in records if r.get("aggregate")]
    if summary_path is None:
        summary_path = str(path) + ".summary.csv"
    if aggregates:
        _write_summary_csv(aggregates, summary_path)
    return content_hash


def _write_summary_csv(aggregates, path) -> None:
    methods = sorted({r["method"] for r in aggregates})
    has_n = any("n" in r for r in aggregates)
    groups = {}
    for r in aggregates:
        groups.setdefault(r.get("n"), []).append(r)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow((["n"] if has_n else []) + ["metric"] + methods)
        for n, rows in groups.items():
            by_method = {r["method"]: r for r in rows}
            for key in METRIC_KEYS:
                if not any(f"{key}_mean" in r for r in rows):
                    continue
                line = ([n] if has_n else []) + [key]
                for m in methods:
                    r = by_method.get(m, {})
                    if f"{key}_mean" in r:
                        line.append(f"{r[f'{key}_mean']:.4g}±{r[f'{key}_std']:.4g}")
                    else:
                        line.append("")
                writer.writerow(line)
