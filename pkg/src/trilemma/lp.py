"""Exact rational linear programming.

Solves ``max c.x`` subject to ``A x <= b`` with ``x`` unrestricted in sign,
using a dictionary-form simplex over :class:`~fractions.Fraction` with
Bland's anti-cycling rule. Free variables are pivoted into the basis first
and never leave it; infeasible starts go through the usual auxiliary
variable phase.

The pivoting kernel runs on ``gmpy2.mpq`` when available (same exact
rationals, C speed); inputs and outputs are always ``Fraction``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .network import DimensionError, dot, to_fraction, vec

try:
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

ZERO = Fraction(0)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


_QZERO = _Q(0)
_QONE = _Q(1)


@dataclass(frozen=True)
class ConstraintSystem:
    """Rows ``(a, b)`` each meaning ``a.x <= b``."""

    dimension: int
    rows: tuple = ()

    def __post_init__(self):
        if self.dimension < 1:
            raise DimensionError("dimension must be positive")
        rows = tuple((vec(a), to_fraction(b)) for a, b in self.rows)
        for a, _ in rows:
            if len(a) != self.dimension:
                raise DimensionError(f"row of length {len(a)} in a {self.dimension}-d system")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    def extend(self, rows) -> ConstraintSystem:
        return ConstraintSystem(self.dimension, self.rows + tuple(rows))

    def satisfied_by(self, x: Sequence[Fraction]) -> bool:
        return all(dot(a, x) <= b for a, b in self.rows)

    def slacks(self, x) -> list[Fraction]:
        return [b - dot(a, x) for a, b in self.rows]


@dataclass(frozen=True)
class Optimal:
    value: Fraction
    point: tuple


@dataclass(frozen=True)
class Unbounded:
    ray: tuple
    base_point: tuple


@dataclass(frozen=True)
class Infeasible:
    pass


class CertificateError(AssertionError):
    """An LP answer failed exact re-checking. Indicates a solver bug."""


def check_outcome(objective, cs: ConstraintSystem, outcome) -> None:
    """Re-verify a solver answer by exact substitution."""
    if isinstance(outcome, Optimal):
        if not cs.satisfied_by(outcome.point):
            raise CertificateError("optimal point violates a constraint")
        if dot(objective, outcome.point) != outcome.value:
            raise CertificateError("optimal value does not match the point")
    elif isinstance(outcome, Unbounded):
        if not cs.satisfied_by(outcome.base_point):
            raise CertificateError("base point of the ray is infeasible")
        if any(dot(a, outcome.ray) > 0 for a, _ in cs.rows):
            raise CertificateError("ray leaves the feasible set")
        if dot(objective, outcome.ray) <= 0:
            raise CertificateError("ray does not improve the objective")


def _axpy(target, f, row, col):
    """``target += f * row`` except ``target[col] = f * row[col]``."""
    for j, v in enumerate(row):
        if j == col:
            target[j] = f * v
        elif v:
            target[j] += f * v


class _Dictionary:
    """Basic variables written as ``const + sum(coef * nonbasic)``.

    Variable ids: ``0..n-1`` are the free x's, ``n..n+m-1`` the slacks,
    ``n+m`` the auxiliary phase-one variable.
    """

    def __init__(self, n, rows):
        self.n = n
        self.m = len(rows)
        self.nonbasic = list(range(n))
        self.basic = [n + i for i in range(self.m)]
        self.consts = [_Q(b) for _, b in rows]
        self.coefs = [[-_Q(v) for v in a] for a, _ in rows]
        self.pivots = 0

    def is_free(self, var):
        return var < self.n

    def pivot(self, r, col, obj=None):
        """Swap basic var of row ``r`` with nonbasic var in column ``col``."""
        self.pivots += 1
        row = self.coefs[r]
        p = row[col]
        inv = 1 / p
        const = -self.consts[r] * inv
        new_row = [-v * inv for v in row]
        new_row[col] = inv
        self.consts[r] = const
        self.coefs[r] = new_row
        targets = [(self.coefs[i], i) for i in range(self.m) if i != r]
        for target, i in targets:
            f = target[col]
            if f == 0:
                continue
            self.consts[i] += f * const
            _axpy(target, f, new_row, col)
        if obj is not None:
            f = obj[1][col]
            if f != 0:
                obj[0] += f * const
                _axpy(obj[1], f, new_row, col)
        self.basic[r], self.nonbasic[col] = self.nonbasic[col], self.basic[r]

    def constrained_rows(self):
        return [i for i in range(self.m) if not self.is_free(self.basic[i])]

    def solve(self, obj):
        """Bland's-rule simplex on ``obj = [const, coefs]``.

        Returns ``None`` at optimality, or ``(col, sign)`` describing an
        unbounded improving direction.
        """
        while True:
            # a free nonbasic variable with nonzero cost is an unbounded direction
            # (its column is zero in every constrained row)
            for j, var in enumerate(self.nonbasic):
                if self.is_free(var) and obj[1][j] != 0:
                    return j, (1 if obj[1][j] > 0 else -1)
            candidates = [
                (var, j)
                for j, var in enumerate(self.nonbasic)
                if not self.is_free(var) and obj[1][j] > 0
            ]
            if not candidates:
                return None
            _, col = min(candidates)
            best = None
            for i in self.constrained_rows():
                a = self.coefs[i][col]
                if a < 0:
                    key = (self.consts[i] / -a, self.basic[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return col, 1
            self.pivot(best[1], col, obj)

    def value_of(self, var):
        if var in self.nonbasic:
            return _QZERO
        return self.consts[self.basic.index(var)]

    def rate_of(self, var, col, sign):
        """d var / d t when the nonbasic in ``col`` moves by ``sign * t``."""
        if self.nonbasic[col] == var:
            return _Q(sign)
        if var in self.nonbasic:
            return _QZERO
        return sign * self.coefs[self.basic.index(var)][col]


def solve_max(objective, cs: ConstraintSystem):
    """Maximize ``objective . x`` over ``cs``.

    Returns :class:`Optimal`, :class:`Unbounded` (with an improving ray) or
    :class:`Infeasible`. Every answer is re-checked exactly before it is
    returned.
    """
    objective = vec(objective)
    n = cs.dimension
    if len(objective) != n:
        raise DimensionError(f"objective has length {len(objective)}, system has dimension {n}")
    d = _Dictionary(n, cs.rows)

    # pivot the free variables into the basis
    for var in range(n):
        col = d.nonbasic.index(var)
        for i in d.constrained_rows():
            if d.coefs[i][col] != 0:
                d.pivot(i, col)
                break

    rows = d.constrained_rows()
    if any(d.consts[i] < 0 for i in rows):
        aux = n + d.m
        for i in range(d.m):
            d.coefs[i].append(_QONE if i in rows else _QZERO)
        d.nonbasic.append(aux)
        acol = len(d.nonbasic) - 1
        obj = [_QZERO, [_QZERO] * len(d.nonbasic)]
        obj[1][acol] = -_QONE
        leave = min(rows, key=lambda i: (d.consts[i], d.basic[i]))
        d.pivot(leave, acol, obj)
        d.solve(obj)
        if obj[0] < 0:
            out = Infeasible()
            check_outcome(objective, cs, out)
            return out
        if aux in d.basic:
            r = d.basic.index(aux)
            col = next((j for j, v in enumerate(d.coefs[r]) if v != 0), None)
            if col is None:
                # aux is identically zero here: the row carries no information
                del d.coefs[r], d.consts[r], d.basic[r]
                d.m -= 1
            else:
                d.pivot(r, col)
        acol = d.nonbasic.index(aux)
        for row in d.coefs:
            del row[acol]
        del d.nonbasic[acol]

    obj = [_QZERO, [_QZERO] * len(d.nonbasic)]
    for var, c in enumerate(objective):
        c = _Q(c)
        if c == 0:
            continue
        if var in d.nonbasic:
            obj[1][d.nonbasic.index(var)] += c
        else:
            r = d.basic.index(var)
            obj[0] += c * d.consts[r]
            for j, v in enumerate(d.coefs[r]):
                obj[1][j] += c * v
    status = d.solve(obj)
    point = tuple(_frac(d.value_of(v)) for v in range(n))
    if status is None:
        out = Optimal(_frac(obj[0]), point)
    else:
        col, sign = status
        ray = tuple(_frac(d.rate_of(v, col, sign)) for v in range(n))
        out = Unbounded(ray, point)
    check_outcome(objective, cs, out)
    return out


def feasible(cs: ConstraintSystem) -> tuple[bool, Optional[tuple]]:
    """``(True, witness)`` if the system has a solution, else ``(False, None)``."""
    out = solve_max([0] * cs.dimension, cs)
    if isinstance(out, Infeasible):
        return False, None
    return True, out.point if isinstance(out, Optimal) else out.base_point
