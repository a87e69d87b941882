"""Integer intersection forms: exact signature, block sums and surface bounds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple


@dataclass(frozen=True)
class IntersectionForm:
    matrix: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        m = tuple(tuple(int(v) for v in row) for row in self.matrix)
        object.__setattr__(self, "matrix", m)
        n = len(m)
        if any(len(row) != n for row in m):
            lengths = [len(r) for r in m]
            raise ValueError(f"Intersection form must be square, got row lengths {lengths}")
        for i in range(n):
            for j in range(i + 1, n):
                if m[i][j] != m[j][i]:
                    raise ValueError(f"Intersection form is not symmetric at ({i}, {j})")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i}" for i in range(n)))
        elif len(self.labels) != n:
            raise ValueError(f"Expected {n} basis labels, got {len(self.labels)}")

    @classmethod
    def from_rows(
        cls, rows: Sequence[Sequence[int]], labels: Sequence[str] = ()
    ) -> "IntersectionForm":
        return cls(tuple(tuple(r) for r in rows), tuple(labels))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntersectionForm":
        n = len(values)
        return cls(tuple(tuple(values[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @property
    def rank(self) -> int:
        return len(self.matrix)


def signature(form: IntersectionForm) -> Tuple[int, int, int]:
    """(positive, negative, zero) inertia counts via exact symmetric elimination.

    Each step is a congruence: a non-zero diagonal pivot is eliminated from its row
    and column; when the diagonal vanishes, row/column j is added to row/column i
    to create a pivot 2 a_ij.
    """
    a: List[List[Fraction]] = [[Fraction(v) for v in row] for row in form.matrix]
    pos = neg = zero = 0
    while a:
        n = len(a)
        piv = next((i for i in range(n) if a[i][i] != 0), None)
        if piv is None:
            off = ((i, j) for i in range(n) for j in range(n) if i != j and a[i][j] != 0)
            pair = next(off, None)
            if pair is None:
                zero += n
                break
            i, j = pair
            for c in range(n):
                a[i][c] += a[j][c]
            for r in range(n):
                a[r][i] += a[r][j]
            piv = i
        if piv != 0:
            a[0], a[piv] = a[piv], a[0]
            for row in a:
                row[0], row[piv] = row[piv], row[0]
        d = a[0][0]
        if d > 0:
            pos += 1
        else:
            neg += 1
        a = [[a[r][c] - a[r][0] * a[0][c] / d for c in range(1, n)] for r in range(1, n)]
    return pos, neg, zero


def b_plus(form: IntersectionForm) -> int:
    return signature(form)[0]


def block_sum(first: IntersectionForm, second: IntersectionForm) -> IntersectionForm:
    n1, n2 = first.rank, second.rank
    rows = [list(r) + [0] * n2 for r in first.matrix] + [[0] * n1 + list(r) for r in second.matrix]
    return IntersectionForm.from_rows(rows, first.labels + second.labels)


def congruent(form: IntersectionForm, p: Sequence[Sequence[int]]) -> IntersectionForm:
    """P^T Q P for an integer change of basis P."""
    n = form.rank
    q = form.matrix
    qp = [[sum(q[i][k] * p[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    rows = [[sum(p[k][i] * qp[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    return IntersectionForm.from_rows(rows)


def ends_bound(surface_gram: IntersectionForm, ambient: Optional[IntersectionForm] = None) -> int:
    """Number of classes with positive square, which must be pairwise orthogonal.

    This is a lower bound for b_plus of any form containing the block. When an
    ambient form is given and its b_plus is smaller, the configuration is
    contradictory and ValueError is raised.
    """
    q = surface_gram.matrix
    selected = [i for i in range(surface_gram.rank) if q[i][i] > 0]
    for a_idx, i in enumerate(selected):
        for j in selected[a_idx + 1 :]:
            if q[i][j] != 0:
                raise ValueError(
                    f"Classes {surface_gram.labels[i]} and {surface_gram.labels[j]}"
                    " have positive squares"
                    f" but intersect ({q[i][j]}); they cannot be disjoint"
                )
    count = len(selected)
    if ambient is not None:
        bp = b_plus(ambient)
        if count > bp:
            raise ValueError(
                f"{count} disjoint positive classes but the ambient form has b_plus = {bp}"
            )
    return count
