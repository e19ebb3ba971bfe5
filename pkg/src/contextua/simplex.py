"""Exact-rational phase-one simplex for feasibility of {A x = b, x >= 0}.

Rows are kept sparse (dicts column -> Fraction). Bland's rule picks both the
entering and the leaving variable, so the method terminates without cycling.
When the system is infeasible, a Farkas certificate ``y`` is returned with
``A^T y <= 0`` componentwise and ``b . y > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)


@dataclass(frozen=True)
class Feasible:
    x: tuple[Fraction, ...]


@dataclass(frozen=True)
class Infeasible:
    y: tuple[Fraction, ...]
    gap: Fraction  # b . y, strictly positive


def check_certificate(A: Sequence[Sequence], b: Sequence, y: Sequence) -> bool:
    m = len(A)
    n = len(A[0]) if m else 0
    if sum((b[i] * y[i] for i in range(m)), ZERO) <= 0:
        return False
    return all(sum((A[i][j] * y[i] for i in range(m)), ZERO) <= 0 for j in range(n))


def phase_one(A: Sequence[Sequence], b: Sequence, max_pivots: int = 100_000) -> Feasible | Infeasible:
    m = len(A)
    n = len(A[0]) if m else 0
    flip = [Fraction(b[i]) < 0 for i in range(m)]
    rows: list[dict] = []
    rhs: list[Fraction] = []
    for i in range(m):
        sign = -1 if flip[i] else 1
        row = {j: sign * Fraction(A[i][j]) for j in range(n) if A[i][j] != 0}
        row[n + i] = Fraction(1)  # artificial
        rows.append(row)
        rhs.append(sign * Fraction(b[i]))
    basis = [n + i for i in range(m)]

    # reduced costs of phase one: artificials cost 1, originals 0
    cost = {}
    for i in range(m):
        for j, v in rows[i].items():
            if j < n:
                cost[j] = cost.get(j, ZERO) - v
    cost = {j: v for j, v in cost.items() if v != 0}
    objective = -sum(rhs, ZERO)  # minus current phase-one value

    for _ in range(max_pivots):
        entering = min((j for j, v in cost.items() if v < 0), default=None)
        if entering is None:
            break
        best = None
        for i in range(m):
            a = rows[i].get(entering)
            if a is not None and a > 0:
                key = (rhs[i] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:  # cannot happen: the phase-one objective is bounded below
            raise RuntimeError("unbounded phase-one problem")
        r = best[1]
        piv = rows[r][entering]
        prow = {j: v / piv for j, v in rows[r].items()}
        prhs = rhs[r] / piv
        rows[r], rhs[r] = prow, prhs
        for i in range(m):
            if i == r:
                continue
            f = rows[i].get(entering)
            if f is None:
                continue
            row = rows[i]
            for j, v in prow.items():
                nv = row.get(j, ZERO) - f * v
                if nv == 0:
                    row.pop(j, None)
                else:
                    row[j] = nv
            rhs[i] -= f * prhs
        f = cost.get(entering)
        if f is not None:
            for j, v in prow.items():
                nv = cost.get(j, ZERO) - f * v
                if nv == 0:
                    cost.pop(j, None)
                else:
                    cost[j] = nv
            objective -= f * prhs
        basis[r] = entering
    else:
        raise RuntimeError("pivot limit reached")

    value = -objective
    if value == 0:
        x = [ZERO] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = rhs[i]
        return Feasible(tuple(x))
    # multipliers: reduced cost of artificial n+i equals 1 - y_i
    y = [Fraction(1) - cost.get(n + i, ZERO) for i in range(m)]
    y = [-v if flip[i] else v for i, v in enumerate(y)]
    return Infeasible(tuple(y), value)


def solve_nonneg(A, b) -> Feasible | Infeasible:
    return phase_one(A, b)


def solve_free(A, b) -> Feasible | Infeasible:
    """Feasibility of A x = b with x unrestricted in sign (x = x+ - x-)."""
    n = len(A[0]) if A else 0
    doubled = [list(row) + [-v for v in row] for row in A]
    res = phase_one(doubled, b)
    if isinstance(res, Feasible):
        return Feasible(tuple(res.x[j] - res.x[n + j] for j in range(n)))
    return res
