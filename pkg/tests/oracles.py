"""Brute-force reference solvers used to validate the production code paths.

Everything here is deliberately naive: vertex enumeration for LPs, full
binary enumeration for MILPs.  Slow, obviously correct, and independent of
the simplex/branch-and-bound implementations they check.
"""

import itertools

import numpy as np

from surro2sp.milp import MilpModel, fix_binaries
from surro2sp.simplex import EQ, GE, LE, LinearProgram, LpStatus, solve_lp


def lp_optimum_by_vertex_enumeration(lp: LinearProgram, feas_tol=1e-9):
    """Minimum of a bounded LP by enumerating basic points.

    Requires finite bounds on every variable so the feasible set is a
    polytope.  Returns (objective, x) or (None, None) when infeasible.
    """
    n = lp.n_vars
    if not (np.all(np.isfinite(lp.lower)) and np.all(np.isfinite(lp.upper))):
        raise ValueError("vertex enumeration needs finite boxes")

    normals = [lp.a_matrix[r] for r in range(lp.n_rows)]
    offsets = [lp.rhs[r] for r in range(lp.n_rows)]
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        normals.append(e.copy())
        offsets.append(lp.lower[i])
        normals.append(e)
        offsets.append(lp.upper[i])

    best_obj, best_x = None, None
    for active in itertools.combinations(range(len(normals)), n):
        mat = np.array([normals[i] for i in active])
        vec = np.array([offsets[i] for i in active])
        try:
            x = np.linalg.solve(mat, vec)
        except np.linalg.LinAlgError:
            continue
        if not _feasible(lp, x, feas_tol):
            continue
        obj = float(lp.objective @ x) + lp.offset
        if best_obj is None or obj < best_obj:
            best_obj, best_x = obj, x
    return best_obj, best_x


def _feasible(lp: LinearProgram, x, tol):
    if np.any(x < lp.lower - tol) or np.any(x > lp.upper + tol):
        return False
    lhs = lp.a_matrix @ x
    for r in range(lp.n_rows):
        resid = lhs[r] - lp.rhs[r]
        rel = int(lp.relations[r])
        scale = 1.0 + abs(lp.rhs[r])
        if rel == LE and resid > tol * scale:
            return False
        if rel == GE and resid < -tol * scale:
            return False
        if rel == EQ and abs(resid) > tol * scale:
            return False
    return True


def milp_optimum_by_enumeration(model: MilpModel, lp_tol=1e-7):
    """Minimum of a binary MILP by trying every 0/1 assignment."""
    bins = model.binary_idx
    best_obj, best_x = None, None
    for bits in itertools.product((0, 1), repeat=len(bins)):
        pinned = fix_binaries(model, dict(zip(bins.tolist(), bits)))
        outcome = solve_lp(pinned.lp, tol=lp_tol)
        if outcome.status != LpStatus.OPTIMAL:
            continue
        if best_obj is None or outcome.objective < best_obj:
            best_obj, best_x = outcome.objective, outcome.x
    return best_obj, best_x


def random_lp(rng, n_vars=5, n_rows=8, eq_fraction=0.2):
    """A random LP that is feasible by construction, with finite boxes."""
    lo = rng.uniform(-2.0, 0.0, n_vars)
    hi = rng.uniform(0.5, 3.0, n_vars)
    a = rng.normal(size=(n_rows, n_vars))
    x0 = rng.uniform(lo, hi)
    relations = np.where(rng.random(n_rows) < eq_fraction, EQ, LE).astype(np.int8)
    flip = rng.random(n_rows) < 0.5
    relations[(relations == LE) & flip] = GE
    rhs = a @ x0
    margin = rng.uniform(0.1, 1.0, n_rows)
    rhs[relations == LE] += margin[relations == LE]
    rhs[relations == GE] -= margin[relations == GE]
    c = rng.normal(size=n_vars)
    return LinearProgram(c, lo, hi, a, relations, rhs)


def random_milp(rng, n_cont=6, n_bin=8, n_rows=10):
    """A random mixed model, feasible by construction."""
    n = n_cont + n_bin
    lo = np.concatenate([rng.uniform(-2.0, 0.0, n_cont), np.zeros(n_bin)])
    hi = np.concatenate([rng.uniform(0.5, 3.0, n_cont), np.ones(n_bin)])
    a = rng.normal(size=(n_rows, n))
    x0 = rng.uniform(lo[:n_cont], hi[:n_cont])
    bits = (rng.random(n_bin) < 0.5).astype(float)
    x0 = np.concatenate([x0, bits])
    relations = np.where(rng.random(n_rows) < 0.15, EQ, LE).astype(np.int8)
    flip = rng.random(n_rows) < 0.5
    relations[(relations == LE) & flip] = GE
    rhs = a @ x0
    margin = rng.uniform(0.1, 1.5, n_rows)
    rhs[relations == LE] += margin[relations == LE]
    rhs[relations == GE] -= margin[relations == GE]
    c = rng.normal(size=n)
    lp = LinearProgram(c, lo, hi, a, relations, rhs)
    return MilpModel(lp, np.arange(n_cont, n), {})
