"""Aging-aware approximate circuit synthesis."""

from ._agx import (
    AgxError,
    Netlist,
    TimingModel,
    Stimuli,
    benchmark,
    parse_netlist,
    read_netlist,
    emit_netlist,
    critical_path_delay,
    generate_stimuli,
    simulate,
    timing_simulate,
    nmed,
    optimize,
)

__all__ = [
    "AgxError",
    "Netlist",
    "TimingModel",
    "Stimuli",
    "benchmark",
    "parse_netlist",
    "read_netlist",
    "emit_netlist",
    "critical_path_delay",
    "generate_stimuli",
    "simulate",
    "timing_simulate",
    "nmed",
    "optimize",
]
