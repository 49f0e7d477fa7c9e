"""Run an external SMT-LIB solver process and decode its model.

The solver is any command that accepts a single SMT-LIB v2 file argument and
prints ``sat``/``unsat``/``unknown`` plus a (get-model) response with
define-fun entries. The default command runs the bundled solver in a
subprocess; override with the DLSYNTH_SOLVER environment variable or the
``command`` argument (whitespace-split).
"""
from __future__ import annotations

import os
import re
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from typing import Optional, Sequence

from ..datalog import Atom, Const, DatalogError, Program
from .formula import split_step

DEFAULT_SOLVER_ENV = "DLSYNTH_SOLVER"


class SolverError(DatalogError):
    pass


@dataclass(frozen=True)
class SolverVerdict:
    status: str  # 'sat' | 'unsat' | 'unknown' | 'timeout'
    model: Optional[frozenset]  # true ground atoms; present iff status == 'sat'
    diagnostics: str = ""

    def __post_init__(self) -> None:
        if (self.model is not None) != (self.status == "sat"):
            raise SolverError("model must be present exactly when status is sat")


def default_command() -> list[str]:
    env = os.environ.get(DEFAULT_SOLVER_ENV)
    if env:
        return env.split()
    return [sys.executable, "-m", "dlsynth.smt.minisolver"]


_ATOM_NAME_RE = re.compile(r"^([^(]+)\(([^)]*)\)$")


def _parse_atom_name(name: str) -> Atom:
    if name.startswith("|") and name.endswith("|"):
        name = name[1:-1]
    m = _ATOM_NAME_RE.match(name)
    if m is None:
        return Atom(name, ())
    args = [a for a in m.group(2).split(",")] if m.group(2) else []
    return Atom(m.group(1), tuple(
        Const(int(a)) if re.fullmatch(r"-?\d+", a) else Const(a) for a in args))


def _parse_model(text: str) -> frozenset:
    """Pull (define-fun <name> () Bool true|false) entries out of solver output."""
    atoms = set()
    for m in re.finditer(
            r"\(\s*define-fun\s+(\|[^|]*\||\S+)\s+\(\s*\)\s+Bool\s+(true|false)\s*\)",
            text):
        if m.group(2) == "true":
            atoms.add(_parse_atom_name(m.group(1)))
    return frozenset(atoms)


def solve(text: str, timeout: Optional[float] = None,
          command: Optional[Sequence[str]] = None) -> SolverVerdict:
    """One-shot solver invocation over a temporary file."""
    cmd = list(command) if command else default_command()
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False,
                                     encoding="utf-8") as fh:
        fh.write(text)
        path = fh.name
    try:
        try:
            proc = subprocess.run(cmd + [path], capture_output=True, text=True,
                                  timeout=timeout)
        except subprocess.TimeoutExpired:
            return SolverVerdict("timeout", None, "solver timed out")
        except FileNotFoundError as exc:
            raise SolverError(f"solver command not found: {cmd[0]}") from exc
        out = proc.stdout
        first = next((ln.strip() for ln in out.splitlines() if ln.strip()), "")
        if first == "unsat":
            return SolverVerdict("unsat", None, proc.stderr)
        if first == "unknown":
            return SolverVerdict("unknown", None, proc.stderr)
        if first == "sat":
            return SolverVerdict("sat", _parse_model(out), proc.stderr)
        raise SolverError(
            f"solver produced no verdict (exit {proc.returncode}): "
            f"{proc.stderr.strip() or out.strip() or 'no output'}")
    finally:
        os.unlink(path)


def model_to_interpretation(verdict: SolverVerdict, program: Program) -> frozenset:
    """All true atoms whose base predicate the program declares; step-indexed
    atoms are kept (callers exclude them via project_edb)."""
    if verdict.status != "sat":
        raise SolverError("model_to_interpretation requires a sat verdict")
    out = set()
    for atom in verdict.model:
        base, _ = split_step(atom.pred)
        if base in program.signatures:
            out.add(atom)
    return frozenset(out)
