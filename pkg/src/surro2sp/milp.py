"""Branch-and-bound over binary variables on top of the simplex engine.

Node selection is best-bound (ties by insertion order), branching picks the
binary whose relaxation value is closest to one half (ties by lowest index),
so a solve is a pure function of the model and options.  Child nodes warm
start from the parent's optimal basis.  Two cheap rounding heuristics plus
an optional caller-supplied one propose incumbents at every node; proposals
are only accepted after a full feasibility check against the root model.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .simplex import (
    EQ,
    GE,
    LE,
    LinearProgram,
    LpOutcome,
    LpStatus,
    SimplexStart,
    solve_lp,
)


class MilpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    GAP_LIMIT = "gap_limit"
    NODE_LIMIT = "node_limit"


class UnboundedModelError(Exception):
    """The LP relaxation is unbounded, so the integer model is ill-posed."""


@dataclass
class MilpModel:
    """A bounded LP plus a set of binary variable indices and a name map."""

    lp: LinearProgram
    binary_idx: np.ndarray
    names: Dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.binary_idx = np.asarray(sorted(set(np.asarray(self.binary_idx, dtype=int).tolist())), dtype=int)
        if self.binary_idx.size:
            if self.binary_idx.min() < 0 or self.binary_idx.max() >= self.lp.n_vars:
                raise ValueError("binary index out of range")
            lo = self.lp.lower[self.binary_idx]
            hi = self.lp.upper[self.binary_idx]
            if np.any(lo < -1e-12) or np.any(hi > 1.0 + 1e-12):
                raise ValueError("binary variables must have bounds within [0, 1]")
        if len(set(self.names.values())) != len(self.names):
            raise ValueError("variable name map must be injective")
        for idx in self.names:
            if not 0 <= idx < self.lp.n_vars:
                raise ValueError(f"name map index {idx} out of range")

    @property
    def n_vars(self) -> int:
        return self.lp.n_vars


@dataclass
class MilpOptions:
    gap_tol: float = 1e-6
    int_tol: float = 1e-6
    node_limit: int = 200_000
    time_limit: Optional[float] = None
    feas_tol: float = 1e-7
    # Optional incumbent proposal hook: called with the node relaxation
    # solution, returns a full candidate vector or None.
    heuristic: Optional[Callable[["MilpModel", np.ndarray], Optional[np.ndarray]]] = None
    warm_start_nodes: bool = True
    root_start: Optional[SimplexStart] = None


@dataclass
class MilpOutcome:
    status: MilpStatus
    objective: Optional[float]
    bound: float
    x: Optional[np.ndarray]
    nodes: int
    wall_time: float

    @property
    def is_optimal(self) -> bool:
        return self.status == MilpStatus.OPTIMAL


def fix_binaries(model: MilpModel, assignment: Dict[int, int]) -> MilpModel:
    """Pin a subset of the binaries to fixed 0/1 values."""
    binaries = set(model.binary_idx.tolist())
    lower = model.lp.lower.copy()
    upper = model.lp.upper.copy()
    for idx, val in assignment.items():
        if idx not in binaries:
            raise KeyError(f"index {idx} is not a binary variable")
        if val not in (0, 1):
            raise ValueError(f"binary assignment must be 0 or 1, got {val}")
        lower[idx] = float(val)
        upper[idx] = float(val)
    lp = LinearProgram(
        model.lp.objective.copy(),
        lower,
        upper,
        model.lp.a_matrix,
        model.lp.relations,
        model.lp.rhs,
        model.lp.offset,
    )
    return MilpModel(lp, model.binary_idx.copy(), dict(model.names))


def check_feasible(model: MilpModel, x: np.ndarray, tol: float) -> bool:
    """Row and bound feasibility of ``x`` for the model's LP, within ``tol``."""
    lp = model.lp
    if x.shape != (lp.n_vars,) or not np.all(np.isfinite(x)):
        return False
    if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
        return False
    lhs = lp.a_matrix @ x
    scale = 1.0 + np.abs(lp.rhs)
    resid = lhs - lp.rhs
    le_rows = lp.relations == LE
    ge_rows = lp.relations == GE
    eq_rows = lp.relations == EQ
    if np.any(resid[le_rows] > tol * scale[le_rows]):
        return False
    if np.any(resid[ge_rows] < -tol * scale[ge_rows]):
        return False
    if np.any(np.abs(resid[eq_rows]) > tol * scale[eq_rows]):
        return False
    return True


def solve_milp(model: MilpModel, opts: Optional[MilpOptions] = None) -> MilpOutcome:
    """Best-bound branch and bound on the binary variables of ``model``."""
    if opts is None:
        opts = MilpOptions()
    t0 = time.perf_counter()
    bins = model.binary_idx
    lp = model.lp

    incumbent_obj: Optional[float] = None
    incumbent_x: Optional[np.ndarray] = None
    nodes_solved = 0

    def cutoff() -> float:
        if incumbent_obj is None:
            return np.inf
        return incumbent_obj - opts.gap_tol * max(1.0, abs(incumbent_obj)) + 1e-12

    def try_incumbent(x: np.ndarray, obj: float):
        nonlocal incumbent_obj, incumbent_x
        if incumbent_obj is None or obj < incumbent_obj - 1e-12:
            incumbent_obj = obj
            incumbent_x = x.copy()

    def propose_rounded(x_rel: np.ndarray):
        """Try the two generic roundings of the fractional binaries."""
        sigma = x_rel[bins]
        frac = np.abs(sigma - np.round(sigma))
        if not np.any(frac > opts.int_tol):
            return
        for mode in ("nearest", "up"):
            cand = x_rel.copy()
            if mode == "nearest":
                cand[bins] = np.round(sigma)
            else:
                cand[bins] = (sigma > opts.int_tol).astype(float)
            if check_feasible(model, cand, opts.feas_tol):
                try_incumbent(cand, float(lp.objective @ cand) + lp.offset)

    def propose_callback(x_rel: np.ndarray):
        if opts.heuristic is None:
            return
        cand = opts.heuristic(model, x_rel)
        if cand is None:
            return
        cand = np.asarray(cand, dtype=float)
        sigma = cand[bins]
        if np.any(np.abs(sigma - np.round(sigma)) > opts.int_tol):
            return
        if check_feasible(model, cand, opts.feas_tol):
            try_incumbent(cand, float(lp.objective @ cand) + lp.offset)

    # Heap entries: (parent bound, insertion counter, bound patches, warm basis).
    counter = 0
    heap: List[Tuple[float, int, Dict[int, float], Optional[SimplexStart]]] = []
    heapq.heappush(heap, (-np.inf, counter, {}, opts.root_start))
    proven_bound: Optional[float] = None
    hit_node_limit = False
    hit_time_limit = False

    lower_base = lp.lower
    upper_base = lp.upper

    while heap:
        parent_bound, _, patches, warm = heapq.heappop(heap)
        if parent_bound >= cutoff():
            # Best-bound order: every remaining node is at least as bad, so
            # the incumbent is optimal within the gap tolerance.
            proven_bound = parent_bound
            heap.clear()
            break
        if nodes_solved >= opts.node_limit:
            hit_node_limit = True
            heapq.heappush(heap, (parent_bound, counter + 1, patches, warm))
            break
        if opts.time_limit is not None and time.perf_counter() - t0 > opts.time_limit:
            hit_time_limit = True
            heapq.heappush(heap, (parent_bound, counter + 1, patches, warm))
            break

        lower = lower_base.copy()
        upper = upper_base.copy()
        for idx, val in patches.items():
            lower[idx] = val
            upper[idx] = val
        node_lp = LinearProgram(
            lp.objective, lower, upper, lp.a_matrix, lp.relations, lp.rhs, lp.offset
        )
        start = warm if opts.warm_start_nodes else None
        outcome = solve_lp(node_lp, tol=opts.feas_tol, start=start)
        nodes_solved += 1

        if outcome.status == LpStatus.INFEASIBLE:
            continue
        if outcome.status == LpStatus.UNBOUNDED:
            raise UnboundedModelError(
                "LP relaxation is unbounded; bound the variables"
            )
        bound = outcome.objective
        if bound >= cutoff():
            continue

        x_rel = outcome.x
        sigma = x_rel[bins] if bins.size else np.empty(0)
        frac = np.abs(sigma - np.round(sigma))
        if not bins.size or not np.any(frac > opts.int_tol):
            try_incumbent(x_rel, bound)
            continue

        propose_callback(x_rel)
        propose_rounded(x_rel)
        if bound >= cutoff():
            continue

        # Most fractional binary, ties broken by lowest variable index.
        dist = np.abs(sigma - 0.5)
        dist[frac <= opts.int_tol] = np.inf
        branch_pos = int(np.argmin(dist))
        branch_var = int(bins[branch_pos])
        child_start = outcome.start if opts.warm_start_nodes else None
        for val in (0.0, 1.0):
            counter += 1
            child = dict(patches)
            child[branch_var] = val
            heapq.heappush(heap, (bound, counter, child, child_start))

    wall = time.perf_counter() - t0
    stopped_early = hit_node_limit or hit_time_limit

    if stopped_early:
        open_bound = min(entry[0] for entry in heap) if heap else np.inf
        bound = open_bound if incumbent_obj is None else min(open_bound, incumbent_obj)
        status = MilpStatus.NODE_LIMIT if hit_node_limit else MilpStatus.GAP_LIMIT
        return MilpOutcome(status, incumbent_obj, bound, incumbent_x, nodes_solved, wall)

    if incumbent_obj is None:
        return MilpOutcome(
            MilpStatus.INFEASIBLE, None, np.inf, None, nodes_solved, wall
        )
    bound = incumbent_obj if proven_bound is None else min(proven_bound, incumbent_obj)
    return MilpOutcome(
        MilpStatus.OPTIMAL, incumbent_obj, bound, incumbent_x, nodes_solved, wall
    )


class MilpBuilder:
    """Row-by-row accumulator for :class:`MilpModel` instances."""

    def __init__(self):
        self._lower: List[float] = []
        self._upper: List[float] = []
        self._objective: List[float] = []
        self._names: Dict[int, str] = {}
        self._rows: List[Tuple[List[int], List[float]]] = []
        self._relations: List[int] = []
        self._rhs: List[float] = []
        self._binaries: List[int] = []
        self._offset = 0.0

    @property
    def n_vars(self) -> int:
        return len(self._lower)

    def add_var(
        self,
        name: str,
        lower: float = 0.0,
        upper: float = np.inf,
        objective: float = 0.0,
    ) -> int:
        idx = len(self._lower)
        self._lower.append(float(lower))
        self._upper.append(float(upper))
        self._objective.append(float(objective))
        self._names[idx] = name
        return idx

    def add_binary(self, name: str, objective: float = 0.0) -> int:
        idx = self.add_var(name, 0.0, 1.0, objective)
        self._binaries.append(idx)
        return idx

    def add_row(self, coeffs: Iterable[Tuple[int, float]], relation: int, rhs: float):
        idx: List[int] = []
        val: List[float] = []
        for i, v in coeffs:
            if v != 0.0:
                idx.append(int(i))
                val.append(float(v))
        self._rows.append((idx, val))
        self._relations.append(int(relation))
        self._rhs.append(float(rhs))

    def add_offset(self, value: float):
        self._offset += float(value)

    def set_objective(self, idx: int, coefficient: float):
        self._objective[idx] = float(coefficient)

    def build(self) -> MilpModel:
        n = self.n_vars
        m = len(self._rows)
        a = np.zeros((m, n))
        for r, (idx, val) in enumerate(self._rows):
            a[r, idx] = val
        lp = LinearProgram(
            np.array(self._objective),
            np.array(self._lower),
            np.array(self._upper),
            a,
            np.array(self._relations, dtype=np.int8),
            np.array(self._rhs),
            self._offset,
        )
        return MilpModel(lp, np.array(self._binaries, dtype=int), dict(self._names))


def write_lp_text(model: MilpModel) -> str:
    """Render the model in an LP-style text format for external cross-checks.

    Floats are written with ``repr`` so the file round-trips exactly.
    """
    lp = model.lp
    names = {i: model.names.get(i, f"x{i}") for i in range(lp.n_vars)}

    def term(coef: float, idx: int) -> str:
        sign = "+" if coef >= 0 else "-"
        return f"{sign} {repr(abs(coef))} {names[idx]}"

    lines = ["Minimize", " obj:"]
    obj_terms = [term(c, i) for i, c in enumerate(lp.objective) if c != 0.0]
    if lp.offset != 0.0:
        obj_terms.append(f"+ {repr(lp.offset)} CONST")
    lines.append("  " + (" ".join(obj_terms) if obj_terms else "0"))
    lines.append("Subject To")
    rel_text = {LE: "<=", EQ: "=", GE: ">="}
    for r in range(lp.n_rows):
        row = lp.a_matrix[r]
        terms = [term(row[i], i) for i in np.nonzero(row)[0]]
        body = " ".join(terms) if terms else "0"
        lines.append(f" c{r}: {body} {rel_text[int(lp.relations[r])]} {repr(float(lp.rhs[r]))}")
    lines.append("Bounds")
    for i in range(lp.n_vars):
        lo, hi = lp.lower[i], lp.upper[i]
        lo_s = "-inf" if not np.isfinite(lo) else repr(float(lo))
        hi_s = "+inf" if not np.isfinite(hi) else repr(float(hi))
        lines.append(f" {lo_s} <= {names[i]} <= {hi_s}")
    if model.binary_idx.size:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[int(i)] for i in model.binary_idx))
    lines.append("End")
    return "\n".join(lines) + "\n"
