"""Generalized-bicycle code memories on reconfigurable atom arrays.

Pipeline: build a GB code from its polynomial spec, place its atoms on a
grid, synthesize the movement-based parity-check schedule, compile a
noisy memory circuit, estimate logical error rates with BP-OSD decoding,
and compile Clifford+T programs onto the hierarchical memory+compute
architecture with spacetime cost accounting.
"""

from .codes import (
    CssCode,
    PolySpec,
    PolyTerm,
    SpecParseError,
    build_code,
    build_surface_code,
    catalog,
    estimate_distance,
    load_spec,
    parse_spec_text,
)
# `gbmem.layout` stays the submodule; its builder function of the same
# name is exported as build_layout.
from .layout import LayoutMap, relative_positions
from .layout import layout as build_layout
from .scheduler import (
    CostModel,
    MovementSchedule,
    cycle_time,
    schedule_round,
    verify_schedule,
)
from .circuits import NoiseParams, NoisyCircuit, build_memory_circuit
from .detectors import DetectorModel, build_detector_model, outcome_map
from .decoder import (
    BpOsd,
    DecodeResult,
    DecoderConfig,
    SplitDecoder,
    bp_decode,
    decode_split,
    osd_postprocess,
)
from .sampler import (
    LerResult,
    ShotBatch,
    adaptive_run,
    per_round_ler,
    rate_chi_square,
    sample,
    wilson_interval,
)
from .arch import (
    ArchConfig,
    CalibrationTable,
    FactorySpec,
    FidelityModel,
    Footprint,
    ProgramCounts,
    arch_from_catalog,
    footprint,
    load_arch_config,
    program_fidelity,
    select_resources,
    t_supply,
)
from .compiler import (
    CompiledProgram,
    CostReport,
    Op,
    Program,
    compile_baseline,
    compile_hierarchical,
    cost_report,
    map_qubits,
    parse_program,
    profile,
    program_to_text,
    schedule,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "ArchConfig", "BpOsd", "CalibrationTable", "CompiledProgram",
    "CostModel", "CostReport", "CssCode", "DecodeResult", "DecoderConfig",
    "DetectorModel", "FactorySpec", "FidelityModel", "Footprint",
    "LayoutMap", "LerResult", "MovementSchedule", "NoiseParams",
    "NoisyCircuit", "Op", "PolySpec", "PolyTerm", "Program",
    "ProgramCounts", "ShotBatch", "SpecParseError", "SplitDecoder",
    "adaptive_run", "arch_from_catalog", "bp_decode", "build_code",
    "build_detector_model", "build_memory_circuit", "build_surface_code",
    "catalog", "compile_baseline", "compile_hierarchical", "cost_report",
    "build_layout", "cycle_time", "decode_split", "estimate_distance",
    "footprint", "load_arch_config", "load_spec", "map_qubits",
    "osd_postprocess", "outcome_map", "parse_program", "parse_spec_text",
    "per_round_ler", "profile", "program_fidelity", "program_to_text",
    "rate_chi_square", "relative_positions", "sample", "schedule",
    "schedule_round", "select_resources", "sweep", "t_supply",
    "verify_schedule", "wilson_interval",
]
