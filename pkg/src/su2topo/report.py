"""Structured run reports.

A report is a key-value tree rendered as indented UTF-8 text, one artifact
per run.  Given the same inputs, configuration and seed the rendered bytes
are identical across runs; wall-clock timings are collected but only
rendered on request so the default artifact stays deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__version__ = "0.1.0"


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_value(v) for v in value) + "]"
    return str(value)


@dataclass
class Check:
    """One named consistency check with its PASS/FAIL state."""

    name: str
    passed: bool
    detail: str

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"


@dataclass
class ChargeReport:
    """Aggregated results of one CLI run."""

    command: str
    config: dict = field(default_factory=dict)
    results: dict = field(default_factory=dict)
    zeros: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def add_check(self, name: str, passed: bool, detail: str) -> Check:
        check = Check(name, bool(passed), detail)
        self.checks.append(check)
        return check

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self, include_timings: bool = False) -> str:
        lines = ["su2topo-report:"]
        lines.append(f"  version: {self.version}")
        lines.append(f"  command: {self.command}")
        lines.append("  config:")
        _render_tree(lines, self.config, indent=4)
        lines.append("  results:")
        _render_tree(lines, self.results, indent=4)
        if self.zeros:
            lines.append("  zeros:")
            for zero in self.zeros:
                lines.append("    - zero:")
                _render_tree(lines, zero, indent=8)
        lines.append("  checks:")
        if not self.checks:
            lines.append("    (none)")
        for check in self.checks:
            lines.append(f"    - name: {check.name}")
            lines.append(f"      status: {check.status}")
            lines.append(f"      detail: {check.detail}")
        if include_timings and self.timings:
            lines.append("  timings:")
            _render_tree(lines, self.timings, indent=4)
        lines.append(f"  overall: {'PASS' if self.all_passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _render_tree(lines: list, tree: dict, indent: int) -> None:
    pad = " " * indent
    if not tree:
        lines.append(pad + "(none)")
        return
    for key, value in tree.items():
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            _render_tree(lines, value, indent + 2)
        else:
            lines.append(f"{pad}{key}: {_format_value(value)}")
