"""A small DPLL solver: unit propagation, pure literals, MOMS branching.

Meant for hermetic tests and tiny instances, not for the large formulas
(those go to an external CDCL solver).  Search is chronological and fully
deterministic.
"""

from __future__ import annotations

import time
from typing import Optional, Sequence


class Budget(Exception):
    """Raised internally when the decision or time limit runs out."""


class DPLL:
    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]]):
        self.num_vars = num_vars
        self.clauses = [list(dict.fromkeys(c)) for c in clauses]
        self.empty = any(not c for c in self.clauses)
        self.occ: dict[int, list[int]] = {}
        for ci, c in enumerate(self.clauses):
            for lit in c:
                self.occ.setdefault(lit, []).append(ci)
        self.val = [0] * (num_vars + 1)
        self.n_true = [0] * len(self.clauses)
        self.n_false = [0] * len(self.clauses)
        self.n_sat = 0
        self.trail: list[int] = []
        self.decisions = 0

    def _assign(self, lit: int, queue: list[int]) -> bool:
        """Make ``lit`` true; returns False on conflict."""
        self.val[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)
        for ci in self.occ.get(lit, ()):
            if self.n_true[ci] == 0:
                self.n_sat += 1
            self.n_true[ci] += 1
        ok = True
        for ci in self.occ.get(-lit, ()):
            self.n_false[ci] += 1
            if self.n_true[ci] or not ok:
                continue
            free = len(self.clauses[ci]) - self.n_false[ci]
            if free == 0:
                ok = False
            elif free == 1:
                queue.append(ci)
        return ok

    def _undo_to(self, size: int) -> None:
        while len(self.trail) > size:
            lit = self.trail.pop()
            self.val[abs(lit)] = 0
            for ci in self.occ.get(lit, ()):
                self.n_true[ci] -= 1
                if self.n_true[ci] == 0:
                    self.n_sat -= 1
            for ci in self.occ.get(-lit, ()):
                self.n_false[ci] -= 1

    def _lit_value(self, lit: int) -> int:
        v = self.val[abs(lit)]
        return v if lit > 0 else -v

    def _propagate(self, queue: list[int]) -> bool:
        while queue:
            ci = queue.pop()
            if self.n_true[ci]:
                continue
            unit = None
            for lit in self.clauses[ci]:
                if self._lit_value(lit) == 0:
                    unit = lit
                    break
            if unit is None:
                return False
            if not self._assign(unit, queue):
                return False
        return True

    def _scan(self) -> tuple[list[int], Optional[int]]:
        """Pure literals and the MOMS branching literal among open clauses."""
        polarity: dict[int, int] = {}
        best_len = None
        counts: dict[int, int] = {}
        for ci, c in enumerate(self.clauses):
            if self.n_true[ci]:
                continue
            open_lits = [lit for lit in c if self.val[abs(lit)] == 0]
            for lit in open_lits:
                polarity[abs(lit)] = polarity.get(abs(lit), 0) | (1 if lit > 0 else 2)
            size = len(open_lits)
            if best_len is None or size < best_len:
                best_len = size
                counts = {}
            if size == best_len:
                for lit in open_lits:
                    counts[lit] = counts.get(lit, 0) + 1
        pure = [v if mask == 1 else -v for v, mask in sorted(polarity.items()) if mask != 3]
        if not counts:
            return pure, None
        score: dict[int, int] = {}
        for lit, k in counts.items():
            score[abs(lit)] = score.get(abs(lit), 0) + k
        var = min(score, key=lambda v: (-score[v], v))
        pos, neg = counts.get(var, 0), counts.get(-var, 0)
        return pure, var if pos >= neg else -var

    def solve(self, max_decisions: Optional[int] = None, deadline: Optional[float] = None) -> Optional[bool]:
        """True/False for SAT/UNSAT, None if a limit was hit."""
        if self.empty:
            return False
        queue = [ci for ci, c in enumerate(self.clauses) if len(c) == 1]
        if not self._propagate(queue):
            return False
        # each entry: (trail size before the decision, decision literal, flipped)
        stack: list[tuple[int, int, bool]] = []
        while True:
            conflict = False
            if self.n_sat < len(self.clauses):
                pure, lit = self._scan()
                if pure:
                    for p in pure:
                        self._assign(p, [])
                    continue
                if lit is None:
                    conflict = True
                else:
                    self.decisions += 1
                    if max_decisions is not None and self.decisions > max_decisions:
                        return None
                    if deadline is not None and time.monotonic() > deadline:
                        return None
                    stack.append((len(self.trail), lit, False))
                    q: list[int] = []
                    conflict = not (self._assign(lit, q) and self._propagate(q))
            else:
                return True
            while conflict:
                while stack and stack[-1][2]:
                    stack.pop()
                if not stack:
                    return False
                size, lit, _ = stack.pop()
                self._undo_to(size)
                stack.append((size, -lit, True))
                q = []
                conflict = not (self._assign(-lit, q) and self._propagate(q))

    def model(self) -> list[bool]:
        """Index ``v`` holds the value of variable ``v``; unassigned read as False."""
        return [False] + [self.val[v] > 0 for v in range(1, self.num_vars + 1)]


def brute_force(num_vars: int, clauses: Sequence[Sequence[int]]) -> Optional[list[bool]]:
    """Truth-table search; returns a model or None.  Test oracle for small formulas."""
    for bits in range(1 << num_vars):
        ok = True
        for c in clauses:
            if not any(((bits >> (abs(l) - 1)) & 1) == (l > 0) for l in c):
                ok = False
                break
        if ok:
            return [False] + [bool((bits >> i) & 1) for i in range(num_vars)]
    return None
