"""Greedy-vs-random sign sampling experiment: config, runner, report and CSV output.

Every stochastic draw comes from numpy's PCG64 seeded through
``SeedSequence(master_seed, spawn_key=(purpose, strategy, rate_index, set_index, init_index))``,
so a cell's result does not depend on which worker computes it or in which order.
"""

from __future__ import annotations

import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from signcone.errors import ConfigInvalid, EmptyReport, SignconeError
from signcone.graph import Graph, gen_sensor_graph, laplacian, load_graph
from signcone.pocs import PocsConfig, pocs_batch
from signcone.sampling import SignOracle, SignSampleSet, greedy_sample, random_sample, sign_sample
from signcone.spectral import Band, BandBasis, band_basis, eigendecompose, random_bandlimited_signal

log = logging.getLogger(__name__)

STRATEGIES = ("greedy", "random", "full")
STRATEGY_CODE = {name: i for i, name in enumerate(STRATEGIES)}
PURPOSE_SAMPLES = 0
PURPOSE_INIT = 1
ROW_HEADER = "strategy,rate,M,set,init,delta_deg,iterations,converged,collapsed"
AGG_HEADER = "strategy,rate,M,mean_delta_deg,std_delta_deg,runs,collapsed"


@dataclass(frozen=True)
class GraphSpec:
    n: int | None = None
    target_edges: int | None = None
    seed: int | None = None
    load: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec = field(default_factory=lambda: GraphSpec(n=40, target_edges=153, seed=1))
    band: tuple[int, int] = (29, 35)
    signal_seed: int = 1
    rates: tuple[float, ...] = (0.30, 0.40, 0.50)
    random_sets: int = 50
    inits: int = 50
    pocs: PocsConfig = field(default_factory=lambda: PocsConfig(max_iters=10000, rel_tol=0.0, trace_stride=10))
    master_seed: int = 1
    include_full_sampling: bool = True
    trace_rate: float = 0.40


def config_from_dict(obj: dict, base_dir: Path | None = None) -> ExperimentConfig:
    try:
        g = obj.get("graph", {})
        if "load" in g:
            path = Path(g["load"])
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            graph = GraphSpec(load=str(path))
        else:
            gen = g.get("generate", g)
            graph = GraphSpec(n=int(gen["n"]), target_edges=int(gen["target_edges"]), seed=int(gen["seed"]))
        pocs = obj.get("pocs", {})
        defaults = ExperimentConfig()
        return ExperimentConfig(
            graph=graph,
            band=tuple(int(v) for v in obj.get("band", defaults.band)),
            signal_seed=int(obj.get("signal_seed", defaults.signal_seed)),
            rates=tuple(float(r) for r in obj.get("rates", defaults.rates)),
            random_sets=int(obj.get("random_sets", defaults.random_sets)),
            inits=int(obj.get("inits", defaults.inits)),
            pocs=PocsConfig(
                max_iters=int(pocs.get("max_iters", defaults.pocs.max_iters)),
                rel_tol=float(pocs.get("rel_tol", defaults.pocs.rel_tol)),
                trace_stride=int(pocs.get("trace_stride", defaults.pocs.trace_stride)),
            ),
            master_seed=int(obj.get("master_seed", defaults.master_seed)),
            include_full_sampling=bool(obj.get("include_full_sampling", defaults.include_full_sampling)),
            trace_rate=float(obj.get("trace_rate", defaults.trace_rate)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad experiment config: {exc}") from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return config_from_dict(obj, base_dir=path.parent)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    graph = {"load": cfg.graph.load} if cfg.graph.load else {
        "generate": {"n": cfg.graph.n, "target_edges": cfg.graph.target_edges, "seed": cfg.graph.seed}
    }
    return {
        "graph": graph,
        "band": list(cfg.band),
        "signal_seed": cfg.signal_seed,
        "rates": list(cfg.rates),
        "random_sets": cfg.random_sets,
        "inits": cfg.inits,
        "pocs": asdict(cfg.pocs),
        "master_seed": cfg.master_seed,
        "include_full_sampling": cfg.include_full_sampling,
        "trace_rate": cfg.trace_rate,
    }


@dataclass(frozen=True)
class Row:
    strategy: str
    rate: float
    M: int
    set: int
    init: int
    delta_deg: float  # nan when the run collapsed to zero
    iterations: int
    converged: bool
    collapsed: bool
    final_step: float

    def csv(self) -> str:
        return (
            f"{self.strategy},{self.rate!r},{self.M},{self.set},{self.init},{self.delta_deg!r},"
            f"{self.iterations},{int(self.converged)},{int(self.collapsed)}"
        )


@dataclass(frozen=True)
class Aggregate:
    strategy: str
    rate: float
    M: int
    mean_delta_deg: float
    std_delta_deg: float
    runs: int
    collapsed: int


@dataclass(frozen=True)
class Trace:
    strategy: str
    rate: float
    iterations: tuple[int, ...]
    mean_angle_deg: tuple[float, ...]  # mean over the non-collapsed inits at each recorded iteration
    mean_step: tuple[float, ...]


@dataclass
class RunReport:
    config: ExperimentConfig
    n: int
    num_edges: int
    B: int
    rows: list[Row]
    aggregates: list[Aggregate]
    traces: list[Trace]
    sample_sets: dict[tuple[str, float, int], SignSampleSet]

    def aggregate(self, strategy: str, rate: float) -> Aggregate:
        for a in self.aggregates:
            if a.strategy == strategy and math.isclose(a.rate, rate):
                return a
        raise KeyError((strategy, rate))

    def mean_delta(self, strategy: str, rate: float) -> float:
        return self.aggregate(strategy, rate).mean_delta_deg


def derive_rng(master_seed: int, purpose: int, strategy: str, rate_idx: int, set_idx: int, init_idx: int = 0):
    key = (purpose, STRATEGY_CODE[strategy], rate_idx, set_idx, init_idx)
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=key))


def initial_signals(master_seed: int, strategy: str, rate_idx: int, set_idx: int, n: int, K: int) -> np.ndarray:
    """``n x K`` block of unit-norm standard normal starting points."""
    cols = []
    for k in range(K):
        rng = derive_rng(master_seed, PURPOSE_INIT, strategy, rate_idx, set_idx, k)
        v = rng.standard_normal(n)
        cols.append(v / np.linalg.norm(v))
    return np.column_stack(cols)


def build_instance(cfg: ExperimentConfig) -> tuple[Graph, BandBasis, np.ndarray]:
    if cfg.graph.load:
        g = load_graph(cfg.graph.load)
    else:
        g = gen_sensor_graph(cfg.graph.n, cfg.graph.target_edges, cfg.graph.seed)
    validate_config(cfg, g.n)
    basis = band_basis(eigendecompose(laplacian(g)), Band(*cfg.band))
    x = random_bandlimited_signal(basis, cfg.signal_seed)
    return g, basis, x


def validate_config(cfg: ExperimentConfig, n: int) -> None:
    f_lo, f_hi = cfg.band
    if not 1 <= f_lo <= f_hi <= n:
        raise ConfigInvalid(f"band {cfg.band} outside [1, {n}]")
    B = f_hi - f_lo + 1
    if not cfg.rates:
        raise ConfigInvalid("need at least one sampling rate")
    for r in cfg.rates:
        if not 0 < r <= 1:
            raise ConfigInvalid(f"rate {r} outside (0, 1]")
        if math.floor(r * n) < B:
            raise ConfigInvalid(f"rate {r} gives {math.floor(r * n)} samples, below bandwidth {B}")
    if cfg.random_sets < 0 or cfg.inits < 1:
        raise ConfigInvalid("random_sets must be >= 0 and inits >= 1")


def budget(rate: float, n: int) -> int:
    # floor(rate * n) with a guard against 0.3 * 40 = 11.999...
    return int(math.floor(rate * n + 1e-9))


@dataclass(frozen=True)
class _Cell:
    strategy: str
    rate: float
    rate_idx: int
    set_idx: int
    samples: SignSampleSet


def _run_cell(cell: _Cell, basis: BandBasis, x: np.ndarray, cfg: ExperimentConfig, want_trace: bool):
    X0 = initial_signals(cfg.master_seed, cell.strategy, cell.rate_idx, cell.set_idx, basis.n, cfg.inits)
    res = pocs_batch(cell.samples, basis, X0, cfg.pocs, reference=x)
    norms = np.linalg.norm(res.X, axis=0)
    rows = []
    for k in range(cfg.inits):
        if res.collapsed[k] or norms[k] == 0:
            delta = float("nan")
        else:
            cos = float(np.clip(x @ res.X[:, k] / (np.linalg.norm(x) * norms[k]), -1.0, 1.0))
            delta = float(np.degrees(np.arccos(cos)))
        rows.append(
            Row(
                strategy=cell.strategy,
                rate=cell.rate,
                M=len(cell.samples),
                set=cell.set_idx,
                init=k,
                delta_deg=delta,
                iterations=int(res.iterations[k]),
                converged=bool(res.converged[k]),
                collapsed=bool(res.collapsed[k]),
                final_step=float(res.final_step[k]),
            )
        )
    trace = None
    if want_trace:
        with np.errstate(all="ignore"):
            angles = np.nanmean(np.where(res.collapsed[None, :], np.nan, res.trace_angles), axis=1)
        trace = Trace(
            strategy=cell.strategy,
            rate=cell.rate,
            iterations=tuple(res.trace_iters),
            mean_angle_deg=tuple(float(a) for a in angles),
            mean_step=tuple(float(v) for v in np.nanmean(res.trace_steps, axis=1)),
        )
    return rows, trace


def _cell_job(args):
    cell, basis, x, cfg, want_trace = args
    try:
        return _run_cell(cell, basis, x, cfg, want_trace)
    except SignconeError as exc:
        raise type(exc)(f"[{cell.strategy} rate={cell.rate} set={cell.set_idx}] {exc}") from exc


def worker_count() -> int:
    raw = os.environ.get("SIGNCONE_THREADS", "1")
    try:
        k = int(raw)
    except ValueError as exc:
        raise ConfigInvalid(f"SIGNCONE_THREADS must be an integer, got {raw!r}") from exc
    if k < 0:
        raise ConfigInvalid("SIGNCONE_THREADS must be >= 0")
    return k or (os.cpu_count() or 1)


def make_cells(cfg: ExperimentConfig, basis: BandBasis, x: np.ndarray) -> list[_Cell]:
    n = basis.n
    cells = []
    for ri, rate in enumerate(cfg.rates):
        M = budget(rate, n)
        try:
            greedy, _ = greedy_sample(basis, M, SignOracle(x))
        except SignconeError as exc:
            raise type(exc)(f"[greedy rate={rate}] {exc}") from exc
        cells.append(_Cell("greedy", rate, ri, 0, greedy))
        for si in range(cfg.random_sets):
            rng = derive_rng(cfg.master_seed, PURPOSE_SAMPLES, "random", ri, si)
            seed = int(rng.integers(2**63))
            cells.append(_Cell("random", rate, ri, si, sign_sample(x, random_sample(n, M, seed))))
    if cfg.include_full_sampling:
        cells.append(_Cell("full", 1.0, 0, 0, sign_sample(x, range(n))))
    return cells


def aggregate_rows(rows: list[Row]) -> list[Aggregate]:
    groups: dict[tuple[str, float], list[Row]] = {}
    for r in rows:
        groups.setdefault((r.strategy, r.rate), []).append(r)
    out = []
    for (strategy, rate), rs in groups.items():
        deltas = np.array([r.delta_deg for r in rs if not r.collapsed])
        mean = float(np.mean(deltas)) if len(deltas) else float("nan")
        std = float(np.std(deltas)) if len(deltas) else float("nan")
        out.append(Aggregate(strategy, rate, rs[0].M, mean, std, len(rs), sum(r.collapsed for r in rs)))
    out.sort(key=lambda a: (STRATEGY_CODE[a.strategy], a.rate))
    return out


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> RunReport:
    """Run the full sweep: greedy once and ``random_sets`` random sets per rate, ``inits`` POCS runs each."""
    g, basis, x = build_instance(cfg)
    cells = make_cells(cfg, basis, x)
    trace_rate = min(cfg.rates, key=lambda r: abs(r - cfg.trace_rate))
    jobs = [
        (c, basis, x, cfg, c.rate == trace_rate and c.strategy in ("greedy", "random") and c.set_idx == 0)
        for c in cells
    ]
    workers = worker_count() if workers is None else workers
    log.info("running %d cells x %d inits on %d worker(s)", len(cells), cfg.inits, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs, chunksize=1))
    else:
        results = [_cell_job(j) for j in jobs]

    rows = [r for cell_rows, _ in results for r in cell_rows]
    rows.sort(key=lambda r: (STRATEGY_CODE[r.strategy], r.rate, r.set, r.init))
    traces = [t for _, t in results if t is not None]
    traces.sort(key=lambda t: STRATEGY_CODE[t.strategy])
    return RunReport(
        config=cfg,
        n=g.n,
        num_edges=g.num_edges,
        B=basis.B,
        rows=rows,
        aggregates=aggregate_rows(rows),
        traces=traces,
        sample_sets={(c.strategy, c.rate, c.set_idx): c.samples for c in cells},
    )


def rows_csv(report: RunReport) -> str:
    if not report.rows:
        raise EmptyReport("report has no rows")
    return "\n".join([ROW_HEADER] + [r.csv() for r in report.rows]) + "\n"


def aggregates_csv(report: RunReport) -> str:
    if not report.aggregates:
        raise EmptyReport("report has no aggregates")
    lines = [AGG_HEADER]
    for a in report.aggregates:
        lines.append(
            f"{a.strategy},{a.rate!r},{a.M},{a.mean_delta_deg!r},{a.std_delta_deg!r},{a.runs},{a.collapsed}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(report: RunReport, path) -> None:
    Path(path).write_text(rows_csv(report))


def emit_aggregates_csv(report: RunReport, path) -> None:
    Path(path).write_text(aggregates_csv(report))


def write_outputs(report: RunReport, out_dir) -> dict[str, Path]:
    from signcone.plots import emit_svg_rate_plot, emit_svg_trace_plot

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "rows": out / "rows.csv",
        "aggregates": out / "aggregates.csv",
        "rate_plot": out / "rate_plot.svg",
        "trace_plot": out / "trace_plot.svg",
    }
    emit_csv(report, paths["rows"])
    emit_aggregates_csv(report, paths["aggregates"])
    emit_svg_rate_plot(report, paths["rate_plot"])
    emit_svg_trace_plot(report.traces, paths["trace_plot"], report.config.pocs.max_iters)
    return paths


def bundled_config_path() -> Path:
    """Path of the shipped 40-vertex, band 29..35 configuration."""
    return Path(__file__).parent / "data" / "sensor40.json"


def seed_variant(cfg: ExperimentConfig, seed: int) -> ExperimentConfig:
    """Same protocol on an independent instance: graph, signal and master seeds all set to ``seed``."""
    graph = cfg.graph if cfg.graph.load else replace(cfg.graph, seed=seed)
    return replace(cfg, graph=graph, signal_seed=seed, master_seed=seed)
