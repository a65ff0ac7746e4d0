"""Seeded experiment campaigns over the simulated link, with CSV output.

Every trial's randomness is a pure function of (base seed, format, grid
index, trial index), so campaigns are reproducible byte-for-byte, can run
in parallel without changing results, and any single trial can be re-run
in isolation.
"""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from mfikit.cluster import best_k
from mfikit.dbscan import calibrated_params, dbscan_mfi
from mfikit.frontend import bps_4qam, compensate_cd, power_normalize, to_symbol_rate
from mfikit.histokey import build_histogram, select_key_blocks
from mfikit.mfi import (
    DecisionTable,
    PipelineConfig,
    REJECT_LABEL,
    default_decision_table,
    identify_streams,
)
from mfikit.sim import (
    DEFAULT_LINEWIDTH_HZ,
    DEFAULT_SYMBOL_RATE_HZ,
    ImpairmentSpec,
    ModFormat,
    simulate_link,
)

FORMAT_ORDER = [ModFormat.QPSK, ModFormat.PSK8, ModFormat.QAM16, ModFormat.QAM32, ModFormat.QAM64]
OPERATING_OSNR_DB = {
    ModFormat.QPSK: 13.0,
    ModFormat.PSK8: 16.0,
    ModFormat.QAM16: 19.0,
    ModFormat.QAM32: 22.0,
    ModFormat.QAM64: 25.0,
}
# a representative uncompensated span: 80 km at 16.9 ps/(nm km)
DEFAULT_LINE_CD_PS_NM = 1352.0


@dataclass
class ExperimentConfig:
    """Settings shared by all experiment campaigns.

    ``osnr_grid_db`` drives the k-sweep and accuracy campaigns;
    ``cd_grid_ps_nm`` lists residual dispersions for the CD-tolerance
    campaign, which fixes each format's OSNR at its operating point.
    """

    formats: list[ModFormat] = field(default_factory=lambda: list(FORMAT_ORDER))
    osnr_grid_db: list[float] = field(default_factory=lambda: [float(v) for v in range(4, 31)])
    cd_grid_ps_nm: list[float] = field(default_factory=lambda: [float(v) for v in range(-1000, 1001, 50)])
    trials: int = 100
    n_symbols: int = 65536
    seed: int = 0
    samples_per_symbol: int = 2
    rolloff: float = 0.1
    symbol_rate_hz: float = DEFAULT_SYMBOL_RATE_HZ
    linewidth_hz: float = DEFAULT_LINEWIDTH_HZ
    line_cd_ps_nm: float = DEFAULT_LINE_CD_PS_NM
    operating_osnr_db: dict = field(default_factory=lambda: dict(OPERATING_OSNR_DB))
    tributaries: int = 1
    jobs: int = 1
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    decision_table_path: str | None = None
    complexity_repetitions: int = 5

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.formats or not self.osnr_grid_db or not self.cd_grid_ps_nm:
            raise ValueError("formats and grids must be non-empty")
        if self.tributaries not in (1, 2):
            raise ValueError("tributaries must be 1 or 2")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if self.complexity_repetitions < 1:
            raise ValueError("complexity_repetitions must be >= 1")

    def decision_table(self) -> DecisionTable:
        if self.decision_table_path is not None:
            return DecisionTable.load(self.decision_table_path)
        return default_decision_table()

    def to_json(self) -> str:
        payload = {
            "formats": [f.value for f in self.formats],
            "osnr_grid_db": self.osnr_grid_db,
            "cd_grid_ps_nm": self.cd_grid_ps_nm,
            "trials": self.trials,
            "n_symbols": self.n_symbols,
            "seed": self.seed,
            "samples_per_symbol": self.samples_per_symbol,
            "rolloff": self.rolloff,
            "symbol_rate_hz": self.symbol_rate_hz,
            "linewidth_hz": self.linewidth_hz,
            "line_cd_ps_nm": self.line_cd_ps_nm,
            "operating_osnr_db": {f.value: v for f, v in self.operating_osnr_db.items()},
            "tributaries": self.tributaries,
            "jobs": self.jobs,
            "decision_table_path": self.decision_table_path,
            "complexity_repetitions": self.complexity_repetitions,
            "pipeline": {
                "grid_size": self.pipeline.grid_size,
                "extent": self.pipeline.extent,
                "key_count": self.pipeline.key_count,
                "max_k": self.pipeline.max_k,
                "weighted": self.pipeline.weighted,
                "silhouette_mode": self.pipeline.silhouette_mode,
                "num_test_phases": self.pipeline.bps.num_test_phases,
                "window_half": self.pipeline.bps.window_half,
            },
        }
        return json.dumps(payload, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        kwargs = {}
        simple = [
            "osnr_grid_db",
            "cd_grid_ps_nm",
            "trials",
            "n_symbols",
            "seed",
            "samples_per_symbol",
            "rolloff",
            "symbol_rate_hz",
            "linewidth_hz",
            "line_cd_ps_nm",
            "tributaries",
            "jobs",
            "decision_table_path",
            "complexity_repetitions",
        ]
        for key in simple:
            if key in data:
                kwargs[key] = data[key]
        if "formats" in data:
            kwargs["formats"] = [ModFormat.from_label(v) for v in data["formats"]]
        if "operating_osnr_db" in data:
            kwargs["operating_osnr_db"] = {
                ModFormat.from_label(k): float(v) for k, v in data["operating_osnr_db"].items()
            }
        if "pipeline" in data:
            p = data["pipeline"]
            from mfikit.frontend import BpsConfig

            bps = BpsConfig(
                num_test_phases=p.get("num_test_phases", 32),
                window_half=p.get("window_half", 32),
            )
            kwargs["pipeline"] = PipelineConfig(
                bps=bps,
                grid_size=p.get("grid_size", 80),
                extent=p.get("extent", 1.6),
                key_count=p.get("key_count", 640),
                max_k=p.get("max_k", 100),
                weighted=p.get("weighted", True),
                silhouette_mode=p.get("silhouette_mode", "classical"),
            )
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def format_ordinal(fmt: ModFormat) -> int:
    return FORMAT_ORDER.index(fmt)


def trial_seed(base_seed: int, fmt: ModFormat, grid_idx: int, trial: int, stream: int) -> int:
    """64-bit seed for one trial substream, independent of execution order."""
    ss = np.random.SeedSequence(
        entropy=base_seed, spawn_key=(format_ordinal(fmt), grid_idx, trial, stream)
    )
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class _Trial:
    fmt: ModFormat
    osnr_db: float
    applied_cd_ps_nm: float
    compensated_cd_ps_nm: float
    n_symbols: int
    sim_seeds: tuple
    cluster_seed: int
    samples_per_symbol: int
    rolloff: float
    symbol_rate_hz: float
    linewidth_hz: float
    pipeline: PipelineConfig
    table: DecisionTable


@dataclass(frozen=True)
class TrialOutcome:
    """What one pipeline run concluded."""

    k_star: int
    f_star: float
    label: str
    key_blocks: int


def _receive_streams(trial: _Trial) -> list[np.ndarray]:
    streams = []
    for seed in trial.sim_seeds:
        spec = ImpairmentSpec(
            osnr_db=trial.osnr_db,
            linewidth_hz=trial.linewidth_hz,
            applied_cd_ps_nm=trial.applied_cd_ps_nm,
            seed=seed,
        )
        frame = simulate_link(
            trial.fmt,
            trial.n_symbols,
            spec,
            samples_per_symbol=trial.samples_per_symbol,
            rolloff=trial.rolloff,
            symbol_rate=trial.symbol_rate_hz,
        )
        frame = compensate_cd(frame, trial.compensated_cd_ps_nm)
        streams.append(to_symbol_rate(frame, trial.rolloff))
    return streams


def _run_trial(trial: _Trial) -> TrialOutcome:
    streams = _receive_streams(trial)
    decision = identify_streams(
        streams, config=trial.pipeline, table=trial.table, seed=trial.cluster_seed
    )
    return TrialOutcome(
        k_star=decision.k_star,
        f_star=decision.f_star,
        label=decision.label,
        key_blocks=len(decision.key_blocks),
    )


def _execute(tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [_run_trial(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order, so parallel output equals sequential
        return list(pool.map(_run_trial, tasks, chunksize=4))


def _make_trial(cfg: ExperimentConfig, fmt: ModFormat, grid_idx: int, trial: int,
                osnr_db: float, applied_cd: float, compensated_cd: float,
                table: DecisionTable) -> _Trial:
    sim_seeds = tuple(
        trial_seed(cfg.seed, fmt, grid_idx, trial, stream) for stream in range(cfg.tributaries)
    )
    return _Trial(
        fmt=fmt,
        osnr_db=osnr_db,
        applied_cd_ps_nm=applied_cd,
        compensated_cd_ps_nm=compensated_cd,
        n_symbols=cfg.n_symbols,
        sim_seeds=sim_seeds,
        cluster_seed=trial_seed(cfg.seed, fmt, grid_idx, trial, 7),
        samples_per_symbol=cfg.samples_per_symbol,
        rolloff=cfg.rolloff,
        symbol_rate_hz=cfg.symbol_rate_hz,
        linewidth_hz=cfg.linewidth_hz,
        pipeline=cfg.pipeline,
        table=table,
    )


def _fmt_num(value: float) -> str:
    return f"{value:g}"


def run_ksweep(cfg: ExperimentConfig) -> str:
    """k* for every (format, OSNR, trial); CSV format,osnr_db,trial,k_star,f_max."""
    table = cfg.decision_table()
    tasks = []
    meta = []
    for fmt in cfg.formats:
        for gi, osnr in enumerate(cfg.osnr_grid_db):
            for t in range(cfg.trials):
                tasks.append(_make_trial(cfg, fmt, gi, t, osnr, 0.0, 0.0, table))
                meta.append((fmt, osnr, t))
    outcomes = _execute(tasks, cfg.jobs)
    lines = ["format,osnr_db,trial,k_star,f_max"]
    for (fmt, osnr, t), out in zip(meta, outcomes):
        lines.append(f"{fmt.value},{_fmt_num(osnr)},{t},{out.k_star},{out.f_star:.9f}")
    return "\n".join(lines) + "\n"


def run_accuracy(cfg: ExperimentConfig) -> str:
    """Identification accuracy per (format, OSNR); CSV format,osnr_db,accuracy."""
    table = cfg.decision_table()
    tasks = []
    for fmt in cfg.formats:
        for gi, osnr in enumerate(cfg.osnr_grid_db):
            for t in range(cfg.trials):
                tasks.append(_make_trial(cfg, fmt, gi, t, osnr, 0.0, 0.0, table))
    outcomes = _execute(tasks, cfg.jobs)
    lines = ["format,osnr_db,accuracy"]
    i = 0
    for fmt in cfg.formats:
        for osnr in cfg.osnr_grid_db:
            hits = sum(
                1 for out in outcomes[i : i + cfg.trials] if out.label == fmt.value
            )
            i += cfg.trials
            lines.append(f"{fmt.value},{_fmt_num(osnr)},{hits / cfg.trials:.4f}")
    return "\n".join(lines) + "\n"


def run_cd_tolerance(cfg: ExperimentConfig) -> str:
    """Accuracy vs residual CD at per-format operating OSNR.

    The channel applies the configured line dispersion; the receiver
    compensates ``line - residual``, leaving exactly the residual grid
    value uncompensated. CSV format,residual_cd_ps_nm,accuracy.
    """
    table = cfg.decision_table()
    tasks = []
    for fmt in cfg.formats:
        osnr = float(cfg.operating_osnr_db[fmt])
        for gi, residual in enumerate(cfg.cd_grid_ps_nm):
            for t in range(cfg.trials):
                tasks.append(
                    _make_trial(
                        cfg, fmt, gi, t, osnr, cfg.line_cd_ps_nm, cfg.line_cd_ps_nm - residual, table
                    )
                )
    outcomes = _execute(tasks, cfg.jobs)
    lines = ["format,residual_cd_ps_nm,accuracy"]
    i = 0
    for fmt in cfg.formats:
        for residual in cfg.cd_grid_ps_nm:
            hits = sum(1 for out in outcomes[i : i + cfg.trials] if out.label == fmt.value)
            i += cfg.trials
            lines.append(f"{fmt.value},{_fmt_num(residual)},{hits / cfg.trials:.4f}")
    return "\n".join(lines) + "\n"


@dataclass
class ComplexityRecord:
    """Timing of one classification run."""

    fmt: ModFormat
    method: str
    trial: int
    seconds: float
    stage2_seconds: float | None
    key_blocks: int | None
    label: str


@dataclass
class ComplexityResult:
    """All complexity-campaign timings plus the derived relative runtimes."""

    records: list
    n_symbols: int

    def mean_seconds(self, fmt: ModFormat, method: str) -> float:
        vals = [r.seconds for r in self.records if r.fmt is fmt and r.method == method]
        return sum(vals) / len(vals)

    def median_stage2_seconds(self, fmt: ModFormat) -> float:
        vals = [r.stage2_seconds for r in self.records if r.fmt is fmt and r.method == "proposed"]
        return statistics.median(vals)

    def relative_runtimes(self) -> dict:
        means = {}
        for r in self.records:
            means.setdefault((r.fmt, r.method), []).append(r.seconds)
        means = {k: sum(v) / len(v) for k, v in means.items()}
        slowest = max(means.values())
        return {k: v / slowest for k, v in means.items()}

    def summary_csv(self) -> str:
        rel = self.relative_runtimes()
        lines = ["format,method,relative_runtime"]
        for fmt in FORMAT_ORDER:
            for method in ("proposed", "dbscan"):
                if (fmt, method) in rel:
                    lines.append(f"{fmt.value},{method},{rel[(fmt, method)]:.6f}")
        return "\n".join(lines) + "\n"

    def detail_csv(self) -> str:
        lines = ["format,method,trial,seconds,stage2_seconds,key_blocks,label"]
        for r in self.records:
            s2 = f"{r.stage2_seconds:.6f}" if r.stage2_seconds is not None else ""
            kb = str(r.key_blocks) if r.key_blocks is not None else ""
            lines.append(f"{r.fmt.value},{r.method},{r.trial},{r.seconds:.6f},{s2},{kb},{r.label}")
        return "\n".join(lines) + "\n"


def _timed_proposed(symbols: np.ndarray, pipeline: PipelineConfig, table: DecisionTable, seed: int):
    t0 = time.perf_counter()
    recovered = bps_4qam(power_normalize(symbols), pipeline.bps)
    hist = build_histogram(recovered, pipeline.grid_size, pipeline.extent)
    blocks = select_key_blocks(hist, pipeline.key_count)
    t1 = time.perf_counter()
    sweep = best_k(
        blocks if pipeline.weighted else blocks.points,
        m=pipeline.max_k,
        seed=seed,
        mode=pipeline.silhouette_mode,
    )
    t2 = time.perf_counter()
    fmt = table.decide(sweep.k_star)
    label = fmt.value if fmt is not None else REJECT_LABEL
    return t2 - t0, t2 - t1, len(blocks), label


def run_complexity(cfg: ExperimentConfig, dbscan_overrides: dict | None = None) -> ComplexityResult:
    """Time the proposed pipeline against the DBSCAN baseline per format.

    Each method gets one untimed warmup, then ``complexity_repetitions``
    timed runs on freshly seeded captures. Runs are strictly sequential
    (never parallel) so the wall-clock comparison is fair; the stage-2
    (key-block sweep) time is recorded separately for growth analysis.
    """
    table = cfg.decision_table()
    records: list[ComplexityRecord] = []
    reps = cfg.complexity_repetitions
    for fmt in cfg.formats:
        osnr = float(cfg.operating_osnr_db[fmt])
        if dbscan_overrides and fmt in dbscan_overrides:
            params = dbscan_overrides[fmt]
        else:
            params = calibrated_params(fmt, cfg.n_symbols)
        for method in ("proposed", "dbscan"):
            for rep in range(reps + 1):  # rep 0 is the warmup
                sim_seed = trial_seed(cfg.seed, fmt, 0, rep, 3)
                spec = ImpairmentSpec(
                    osnr_db=osnr,
                    linewidth_hz=cfg.linewidth_hz,
                    applied_cd_ps_nm=0.0,
                    seed=sim_seed,
                )
                frame = simulate_link(
                    fmt,
                    cfg.n_symbols,
                    spec,
                    samples_per_symbol=cfg.samples_per_symbol,
                    rolloff=cfg.rolloff,
                    symbol_rate=cfg.symbol_rate_hz,
                )
                symbols = to_symbol_rate(frame, cfg.rolloff)
                if method == "proposed":
                    cluster_seed = trial_seed(cfg.seed, fmt, 0, rep, 7)
                    seconds, stage2, kb, label = _timed_proposed(
                        symbols, cfg.pipeline, table, cluster_seed
                    )
                    record = ComplexityRecord(fmt, method, rep, seconds, stage2, kb, label)
                else:
                    t0 = time.perf_counter()
                    decided = dbscan_mfi(symbols, params, table=table, bps=cfg.pipeline.bps)
                    seconds = time.perf_counter() - t0
                    label = decided.value if decided is not None else REJECT_LABEL
                    record = ComplexityRecord(fmt, method, rep, seconds, None, None, label)
                if rep > 0:
                    records.append(record)
    return ComplexityResult(records=records, n_symbols=cfg.n_symbols)
