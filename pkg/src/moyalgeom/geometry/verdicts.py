"""Pass/fail bookkeeping for identity checks."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .. import expr as ex
from .. import matalg, moyal
from ..matalg import MoyalMatrix
from ..moyal import MoyalElement


@dataclass(frozen=True)
class Verdict:
    name: str
    identity: str
    passed: bool
    max_deviation: float
    seed: int
    applicable: bool = True
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        status = "PASS" if self.passed else ("N/A " if not self.applicable else "FAIL")
        return f"{status} {self.name}: {self.identity} (max dev {self.max_deviation:.3g})"


class Check:
    """Accumulates comparisons for one named identity."""

    def __init__(self, name: str, identity: str, seed: int = 0):
        self.name = name
        self.identity = identity
        self.seed = seed
        self.passed = True
        self.max_dev = 0.0
        self.count = 0
        self.detail = ""

    def _record(self, c: ex.Comparison, where: str = ""):
        self.count += 1
        self.max_dev = max(self.max_dev, c.max_abs)
        if not c.passed:
            if self.passed and where:
                self.detail = f"first failure at {where}"
            self.passed = False
        return c.passed

    def series(self, a: MoyalElement, b: MoyalElement, where: str = "") -> bool:
        return self._record(moyal.compare(a, b), where)

    def matrix(self, A: MoyalMatrix, B: MoyalMatrix, where: str = "") -> bool:
        return self._record(matalg.compare(A, B), where)

    def zero_matrix(self, A: MoyalMatrix, where: str = "") -> bool:
        return self.matrix(A, MoyalMatrix.zeros(A.ctx, A.rows, A.cols), where)

    def values(self, a, b, tol: float, where: str = "") -> bool:
        return self._record(ex.compare_values(a, b, tol), where)

    def fail(self, detail: str):
        self.passed = False
        self.detail = detail

    def verdict(self) -> Verdict:
        return Verdict(self.name, self.identity, self.passed, self.max_dev, self.seed,
                       detail=self.detail)


def not_applicable(name: str, identity: str, reason: str, seed: int = 0) -> Verdict:
    return Verdict(name, identity, True, 0.0, seed, applicable=False, detail=reason)
