"""Blind modulation format identification for desk-scale coherent optical links.

The package is organized bottom-up:

- :mod:`mfikit.sim` -- constellation mapping, pulse shaping, channel impairments
- :mod:`mfikit.frontend` -- receiver-side CD compensation, matched filtering, blind phase search
- :mod:`mfikit.histokey` -- 2D constellation histogram and key-block selection
- :mod:`mfikit.cluster` -- weighted k-partitioning, silhouette scoring, k-sweep
- :mod:`mfikit.mfi` -- decision table and the end-to-end identification pipeline
- :mod:`mfikit.dbscan` -- density-based baseline classifier for runtime comparison
- :mod:`mfikit.frameio` -- binary sample-frame file format
- :mod:`mfikit.harness` -- seeded experiment campaigns with CSV output
- :mod:`mfikit.cli` -- command-line entry points
"""

from mfikit.sim import (
    ModFormat,
    SampleFrame,
    ImpairmentSpec,
    constellation_points,
    generate_symbols,
    upsample_shape,
    apply_awgn,
    apply_phase_noise,
    apply_cd,
    simulate_link,
)
from mfikit.frontend import BpsConfig, compensate_cd, to_symbol_rate, bps_4qam, power_normalize
from mfikit.histokey import Histogram2D, KeyBlockSet, build_histogram, select_key_blocks
from mfikit.cluster import Partition, KsweepResult, partition_k, silhouette_f, best_k
from mfikit.mfi import (
    DecisionTable,
    PipelineConfig,
    MfiDecision,
    decide_format,
    default_decision_table,
    identify,
    identify_streams,
)
from mfikit.dbscan import DbscanParams, dbscan, dbscan_mfi
from mfikit.frameio import FrameFormatError, read_frame, write_frame
from mfikit.harness import ExperimentConfig, run_ksweep, run_accuracy, run_cd_tolerance, run_complexity

__version__ = "0.1.0"

__all__ = [
    "ModFormat",
    "SampleFrame",
    "ImpairmentSpec",
    "constellation_points",
    "generate_symbols",
    "upsample_shape",
    "apply_awgn",
    "apply_phase_noise",
    "apply_cd",
    "simulate_link",
    "BpsConfig",
    "compensate_cd",
    "to_symbol_rate",
    "bps_4qam",
    "power_normalize",
    "Histogram2D",
    "KeyBlockSet",
    "build_histogram",
    "select_key_blocks",
    "Partition",
    "KsweepResult",
    "partition_k",
    "silhouette_f",
    "best_k",
    "DecisionTable",
    "PipelineConfig",
    "MfiDecision",
    "decide_format",
    "default_decision_table",
    "identify",
    "identify_streams",
    "DbscanParams",
    "dbscan",
    "dbscan_mfi",
    "FrameFormatError",
    "read_frame",
    "write_frame",
    "ExperimentConfig",
    "run_ksweep",
    "run_accuracy",
    "run_cd_tolerance",
    "run_complexity",
]
