"""Gate-level pipeline: external synthesis, netlist graphs, payload tracing."""

from .graph import Cell, NetlistGraph, parse_netlist
from .synth import DEFAULT_SYNTH_COMMAND, SynthConfig, synthesize, tool_available
from .trace import NetlistEvidence, trace_any_width, trace_watermark

__all__ = [
    "Cell", "NetlistGraph", "parse_netlist",
    "SynthConfig", "synthesize", "tool_available", "DEFAULT_SYNTH_COMMAND",
    "NetlistEvidence", "trace_watermark", "trace_any_width",
]
