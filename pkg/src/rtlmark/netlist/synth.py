"""External logic-synthesis invocation.

Synthesis is always an external, user-configured command; this repo never
embeds a synthesizer. The command template takes {input}, {output} and
{top} placeholders and must produce structural gate-level Verilog at the
output path. The RTLMARK_SYNTH environment variable overrides the template.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import tempfile
from dataclasses import dataclass

from ..ast_nodes import SourceText
from ..errors import ToolFailed, ToolMissing, ToolTimeout

DEFAULT_SYNTH_COMMAND = (
    'yosys -q -p "read_verilog {input}; hierarchy -top {top}; proc; opt; '
    'techmap; opt; write_verilog -noattr {output}"'
)

_MODULE_RE = re.compile(r"\bmodule\s+([A-Za-z_][A-Za-z0-9_$]*)")


@dataclass(frozen=True)
class SynthConfig:
    command: str = DEFAULT_SYNTH_COMMAND
    timeout: float = 120.0
    keep_workdir: bool = False

    @classmethod
    def from_environment(cls, base: "SynthConfig | None" = None) -> "SynthConfig":
        cfg = base or cls()
        override = os.environ.get("RTLMARK_SYNTH")
        if override:
            return SynthConfig(override, cfg.timeout, cfg.keep_workdir)
        return cfg


def tool_available(cfg: SynthConfig) -> bool:
    argv = shlex.split(cfg.command.format(input="i", output="o", top="t"))
    return bool(argv) and shutil.which(argv[0]) is not None


def synthesize(source: SourceText, cfg: SynthConfig | None = None,
               top: str | None = None,
               log_path: str | None = None) -> SourceText:
    """Run the configured tool; returns the structural netlist text."""
    cfg = cfg or SynthConfig.from_environment()
    if top is None:
        m = _MODULE_RE.search(source.content)
        if m is None:
            raise ToolFailed(-1, "input has no module declaration")
        top = m.group(1)

    workdir = tempfile.mkdtemp(prefix="rtlmark-synth-")
    in_path = os.path.join(workdir, "input.v")
    out_path = os.path.join(workdir, "netlist.v")
    with open(in_path, "w") as f:
        f.write(source.content)

    command = cfg.command.format(input=in_path, output=out_path, top=top)
    argv = shlex.split(command)
    if not argv or shutil.which(argv[0]) is None:
        raise ToolMissing(f"synthesis tool '{argv[0] if argv else ''}' "
                          "not found on PATH")
    try:
        proc = subprocess.run(argv, capture_output=True, text=True,
                              timeout=cfg.timeout)
    except subprocess.TimeoutExpired as exc:
        raise ToolTimeout(f"synthesis exceeded {cfg.timeout}s") from exc

    logs = f"$ {command}\n--- stdout ---\n{proc.stdout}\n--- stderr ---\n{proc.stderr}"
    if log_path:
        with open(log_path, "w") as f:
            f.write(logs)
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout).strip().splitlines()[-5:]
        raise ToolFailed(proc.returncode, " | ".join(tail))
    if not os.path.exists(out_path):
        raise ToolFailed(proc.returncode, "tool exited 0 but wrote no netlist")
    with open(out_path) as f:
        netlist = f.read()
    if not cfg.keep_workdir:
        shutil.rmtree(workdir, ignore_errors=True)
    return SourceText(netlist, origin=f"{source.origin}:netlist")
