"""A small DPLL solver and an assignment checker for ``Cnf`` clause sets."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .grounding import Cnf


class AssignmentError(ValueError):
    pass


@dataclass
class SolveResult:
    status: str  # "sat", "unsat" or "unknown"
    assignment: dict[int, bool] = field(default_factory=dict)
    decisions: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "sat"


def satisfies(clauses, asg: Mapping[int, bool]) -> bool:
    return all(any(asg.get(abs(l)) == (l > 0) for l in c) for c in clauses)


class _Dpll:
    """Two-watched-literal DPLL with chronological backtracking."""

    def __init__(self, num_vars: int, clauses: list[list[int]], order: list[int]):
        self.n = num_vars
        self.clauses = clauses
        self.val = [0] * (num_vars + 1)
        self.trail: list[int] = []
        self.watches: dict[int, list[int]] = {}
        self.order = order
        self.units: list[int] = []
        self.empty = False
        for i, c in enumerate(clauses):
            if not c:
                self.empty = True
            elif len(c) == 1:
                self.units.append(c[0])
            else:
                self.watches.setdefault(c[0], []).append(i)
                self.watches.setdefault(c[1], []).append(i)

    def value(self, lit: int) -> int:
        v = self.val[abs(lit)]
        return v if lit > 0 else -v

    def assign(self, lit: int) -> None:
        self.val[abs(lit)] = 1 if lit > 0 else -1
        self.trail.append(lit)

    def propagate(self, start: int) -> bool:
        """Unit propagation from trail position ``start``; False on conflict."""
        i = start
        while i < len(self.trail):
            falsified = -self.trail[i]
            i += 1
            watching = self.watches.get(falsified, [])
            keep = []
            conflict = False
            for j, ci in enumerate(watching):
                if conflict:
                    keep.append(ci)
                    continue
                c = self.clauses[ci]
                if c[0] == falsified:
                    c[0], c[1] = c[1], c[0]
                if self.value(c[0]) == 1:
                    keep.append(ci)
                    continue
                for k in range(2, len(c)):
                    if self.value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(ci)
                        break
                else:
                    keep.append(ci)
                    if self.value(c[0]) == -1:
                        conflict = True
                    else:
                        self.assign(c[0])
            self.watches[falsified] = keep
            if conflict:
                return False
        return True

    def undo(self, size: int) -> None:
        while len(self.trail) > size:
            self.val[abs(self.trail.pop())] = 0

    def solve(self, budget: int | None) -> tuple[str, int]:
        if self.empty:
            return "unsat", 0
        for lit in self.units:
            if self.value(lit) == -1:
                return "unsat", 0
            if self.value(lit) == 0:
                self.assign(lit)
        if not self.propagate(0):
            return "unsat", 0
        stack: list[tuple[int, int, bool]] = []  # (trail size, literal, flipped)
        decisions = 0
        pos = 0
        while True:
            while pos < len(self.order) and self.val[self.order[pos]] != 0:
                pos += 1
            if pos == len(self.order):
                return "sat", decisions
            if budget is not None and decisions >= budget:
                return "unknown", decisions
            decisions += 1
            lit = self.order[pos]
            size = len(self.trail)
            stack.append((size, lit, False))
            self.assign(lit)
            ok = self.propagate(size)
            while not ok:
                while stack and stack[-1][2]:
                    stack.pop()
                if not stack:
                    return "unsat", decisions
                size, lit, _ = stack.pop()
                self.undo(size)
                stack.append((size, -lit, True))
                self.assign(-lit)
                ok = self.propagate(size)
            pos = 0


def solve_cnf(cnf: Cnf, budget: int | None = None) -> SolveResult:
    """Complete DPLL search; ``budget`` caps the number of decisions.

    Ground atoms are branched on first, auxiliaries afterwards, so on a
    Tseitin encoding the search is effectively over the atoms alone.
    """
    clauses = [list(dict.fromkeys(c)) for c in cnf.clauses()]
    clauses = [c for c in clauses if not any(-l in c for l in c)]
    atoms = sorted(cnf.var_map.values())
    seen = set(atoms)
    order = atoms + [v for v in range(1, cnf.num_vars + 1) if v not in seen]
    solver = _Dpll(cnf.num_vars, [list(c) for c in clauses], order)
    status, decisions = solver.solve(budget)
    if status != "sat":
        return SolveResult(status, {}, decisions)
    asg = {v: solver.val[v] == 1 for v in range(1, cnf.num_vars + 1)}
    if not satisfies(cnf.clauses(), asg):
        raise AssertionError("solver produced an assignment that violates a clause")
    return SolveResult("sat", asg, decisions)


def _clause_ids(cnf: Cnf) -> np.ndarray:
    return np.repeat(np.arange(cnf.num_clauses), np.diff(cnf.offsets))


def _any_per_clause(cnf: Cnf, clause_of: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.bincount(clause_of[mask], minlength=cnf.num_clauses) > 0


def _complete_by_levels(cnf: Cnf, val: np.ndarray, clause_of: np.ndarray) -> np.ndarray:
    """Fix every gate variable from its inputs, one gate depth at a time."""
    lits, off = cnf.lits, cnf.offsets
    lit_level = cnf.levels[np.abs(lits)]
    lengths = np.diff(off)
    nonempty = lengths > 0
    clause_level = np.zeros(cnf.num_clauses, dtype=np.int64)
    if nonempty.any():
        clause_level[nonempty] = np.maximum.reduceat(lit_level, off[:-1][nonempty])
    clause_level[lengths < 2] = 0  # unit clauses are assertions, not gate definitions
    key = clause_level[clause_of]
    order = np.argsort(key, kind="stable")
    bounds = np.searchsorted(key[order], np.arange(int(key.max(initial=0)) + 2))
    for level in range(1, len(bounds) - 1):
        sel = order[bounds[level]:bounds[level + 1]]
        if not len(sel):
            continue
        l, cid = lits[sel], clause_of[sel]
        head = lit_level[sel] == level
        # a gate clause is unit on its head literal when every input literal is false
        input_true = (val[np.abs(l)] * np.sign(l) == 1) & ~head
        sat_by_inputs = _any_per_clause(cnf, cid, input_true)
        fl = l[head & ~sat_by_inputs[cid]]
        v = np.abs(fl)
        pos = np.zeros(len(val), dtype=bool)
        neg = np.zeros(len(val), dtype=bool)
        pos[v[fl > 0]] = True
        neg[v[fl < 0]] = True
        # both polarities forced at once means the inputs are contradictory
        val[pos & ~neg] = 1
        val[neg & ~pos] = -1
    return val


def _propagate_generic(cnf: Cnf, val: np.ndarray, clause_of: np.ndarray) -> np.ndarray:
    """Plain unit propagation to a fixpoint, vectorized over all clauses."""
    lits = cnf.lits
    while True:
        lv = val[np.abs(lits)] * np.sign(lits)
        sat = _any_per_clause(cnf, clause_of, lv == 1)
        free = np.bincount(clause_of[lv == 0], minlength=cnf.num_clauses)
        unit = (~sat) & (free == 1)
        if not unit.any():
            return val
        fl = lits[unit[clause_of] & (lv == 0)]
        v = np.abs(fl)
        pos = np.zeros(len(val), dtype=bool)
        neg = np.zeros(len(val), dtype=bool)
        pos[v[fl > 0]] = True
        neg[v[fl < 0]] = True
        if (pos & neg).any():
            return val  # conflict; the final clause check will fail
        val[pos] = 1
        val[neg] = -1


def check_assignment(cnf: Cnf, asg: Mapping[int, bool], budget: int | None = 100_000) -> bool:
    """Whether ``asg`` on the atom variables extends to a model of ``cnf``.

    Auxiliaries are completed by propagation; anything propagation leaves
    open is settled by a bounded DPLL run on the residual clauses.
    """
    missing = [v for v in cnf.var_map.values() if v not in asg]
    if missing:
        raise AssignmentError(f"assignment leaves {len(missing)} atom variable(s) unset, e.g. v{missing[0]}")
    if cnf.num_clauses == 0:
        return True
    val = np.zeros(cnf.num_vars + 1, dtype=np.int8)
    for v, b in asg.items():
        if not 1 <= v <= cnf.num_vars:
            raise AssignmentError(f"variable v{v} out of range")
        val[v] = 1 if b else -1
    clause_of = _clause_ids(cnf)
    if cnf.levels is not None and len(cnf.levels) == cnf.num_vars + 1:
        val = _complete_by_levels(cnf, val, clause_of)
    val = _propagate_generic(cnf, val, clause_of)
    lv = val[np.abs(cnf.lits)] * np.sign(cnf.lits)
    sat = _any_per_clause(cnf, clause_of, lv == 1)
    if sat.all():
        return True
    open_ = _any_per_clause(cnf, clause_of, lv == 0)
    if (~sat & ~open_).any():
        return False
    # residual search over whatever propagation could not fix
    residual = []
    for i in np.flatnonzero(~sat):
        c = cnf.lits[cnf.offsets[i]:cnf.offsets[i + 1]]
        residual.append([int(l) for l in c if val[abs(l)] == 0])
    result = solve_cnf(Cnf.from_clauses(residual, cnf.num_vars), budget)
    if result.status == "unknown":
        raise AssignmentError("could not complete the assignment within budget")
    return result.sat
