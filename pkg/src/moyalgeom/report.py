"""Report assembly: series as coefficient strings, verdicts, provenance."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from . import expr as ex
from .matalg import MoyalMatrix
from .moyal import MoyalElement

# expressions whose printed tree exceeds this many nodes are summarised
MAX_NODES = 400


@dataclass
class GeometryReport:
    meta: dict
    objects: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "objects": self.objects,
            "verdicts": [_clean_verdict(v.to_dict()) for v in self.verdicts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [f"# {k}: {self.meta[k]}" for k in sorted(self.meta)]
        for name, obj in self.objects.items():
            lines.append("")
            lines.append(f"[{name}]")
            lines.extend(_text_lines(obj, ""))
        if self.verdicts:
            lines.append("")
            lines.append("[verdicts]")
            for v in self.verdicts:
                line = v.line()
                if v.detail:
                    line += f" [{v.detail}]"
                lines.append(line)
            npass = sum(v.passed and v.applicable for v in self.verdicts)
            nfail = sum(not v.passed for v in self.verdicts)
            lines.append(f"{npass} passed, {nfail} failed, "
                         f"{sum(not v.applicable for v in self.verdicts)} not applicable")
        return "\n".join(lines) + "\n"


def _clean_verdict(d: dict) -> dict:
    dev = d["max_deviation"]
    # json has no NaN/inf; keep the file strictly valid
    if not math.isfinite(dev):
        d["max_deviation"] = str(dev)
    else:
        d["max_deviation"] = float(f"{dev:.6g}")
    return d


def _text_lines(obj, prefix):
    if isinstance(obj, dict):
        out = []
        for k, v in obj.items():
            if isinstance(v, list) and v and all(isinstance(s, str) for s in v):
                out.append(f"{prefix}{k}:")
                out.extend(f"{prefix}  hbar^{p}: {s}" for p, s in enumerate(v))
            elif isinstance(v, (dict, list)):
                out.append(f"{prefix}{k}:")
                out.extend(_text_lines(v, prefix + "  "))
            else:
                out.append(f"{prefix}{k}: {v}")
        return out
    if isinstance(obj, list):
        return [f"{prefix}{s}" for s in obj]
    return [f"{prefix}{obj}"]


def tree_size(f: ex.Expr, memo=None) -> int:
    """Node count of the expression with shared subtrees expanded."""
    memo = {} if memo is None else memo
    stack = [f]
    while stack:
        e = stack[-1]
        if e in memo:
            stack.pop()
            continue
        kids = [c for c in ex.children(e) if c not in memo]
        if kids:
            stack.extend(kids)
            continue
        stack.pop()
        memo[e] = 1 + sum(memo[c] for c in ex.children(e))
    return memo[f]


def expr_string(f: ex.Expr, evaluator=None) -> str:
    size = tree_size(f)
    if size <= MAX_NODES or evaluator is None:
        return ex.to_string(f)
    try:
        v = float(evaluator(f).flat[0])
        shown = f"{v:.12g}"
    except ex.ExprError:
        shown = "undefined"
    return f"<{size}-node expression; value at first sample point = {shown}>"


def series_strings(f: MoyalElement) -> list:
    ev = f.ctx.evaluator
    return [expr_string(c, ev) for c in f.coeffs]


def matrix_entries(A: MoyalMatrix, one_based: bool = True) -> dict:
    """Entries keyed ``"i,j"`` (1-based by default) as lists of coefficient strings."""
    off = 1 if one_based else 0
    return {f"{i + off},{j + off}": series_strings(A[i, j])
            for i in range(A.rows) for j in range(A.cols)}


def index_key(idx) -> str:
    return ",".join(str(i + 1) for i in idx)
