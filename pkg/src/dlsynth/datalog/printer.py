"""Pretty-printer producing source that round-trips through the parser."""
from __future__ import annotations

from .ast import EnumSort, IntSort, Program


def program_to_text(program: Program) -> str:
    lines = []
    for sort in program.sorts.values():
        if isinstance(sort, EnumSort):
            lines.append(f".sort {sort.name} {{{','.join(sort.values)}}}")
        else:
            assert isinstance(sort, IntSort)
            lines.append(f".int {sort.name} [{sort.lo},{sort.hi}]")
    for sig in program.signatures.values():
        lines.append(f".decl {sig.name}({','.join(sig.arg_sorts)}) {sig.role}")
    for rule in program.rules:
        lines.append(str(rule))
    return "\n".join(lines) + "\n"
