"""Hirzebruch-Jung strings of cyclic quotient singularities, in exact arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple


@dataclass(frozen=True)
class HJString:
    q: int
    p: int
    chain: Tuple[int, ...]
    intermediates: Tuple[Fraction, ...] = field(default=(), compare=False)

    def render(self) -> str:
        return "[" + ",".join(str(e) for e in self.chain) + "]"


def _check_type(q: int, p: int) -> None:
    if int(q) != q or int(p) != p:
        raise ValueError(f"(q, p) must be integers, got ({q}, {p})")
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    if not (0 < p < q):
        raise ValueError(f"p must satisfy 0 < p < q, got p={p}, q={q}")
    if math.gcd(p, q) != 1:
        raise ValueError(f"gcd(p, q) = {math.gcd(p, q)} != 1 for (q, p) = ({q}, {p})")


def hj_resolve(q: int, p: int) -> HJString:
    """Resolution chain of the (q, p) singularity.

    d_1 = q/p, e_j = ceil(d_j), d_{j+1} = 1/(e_j - d_j), stopping at the first
    integral d_j.
    """
    _check_type(q, p)
    d = Fraction(q, p)
    chain: List[int] = []
    inter: List[Fraction] = []
    while True:
        inter.append(d)
        e = math.ceil(d)
        chain.append(e)
        if d.denominator == 1:
            break
        d = 1 / (e - d)
    out = HJString(q=q, p=p, chain=tuple(chain), intermediates=tuple(inter))
    assert all(e >= 2 for e in out.chain)
    assert hj_evaluate(out.chain) == Fraction(q, p)
    return out


def hj_evaluate(chain: Sequence[int]) -> Fraction:
    """e_1 - 1/(e_2 - 1/(...)) as an exact fraction in lowest terms."""
    if len(chain) == 0:
        raise ValueError("Chain must have at least one entry")
    if any(int(e) != e or e < 2 for e in chain):
        raise ValueError(f"Chain entries must be integers >= 2, got {list(chain)}")
    acc = Fraction(chain[-1])
    for e in reversed(chain[:-1]):
        assert acc != 0
        acc = e - 1 / acc
    return acc


def dual_parameter(q: int, p: int) -> int:
    """p' with p p' = 1 mod q; the chain of (q, p') is the reversed chain of (q, p)."""
    _check_type(q, p)
    return pow(p, -1, q)


def plumbing_matrix(chain: Sequence[int]) -> List[List[int]]:
    """Tridiagonal intersection matrix: -e_j on the diagonal, 1 between neighbours."""
    n = len(chain)
    m = [[0] * n for _ in range(n)]
    for j, e in enumerate(chain):
        m[j][j] = -int(e)
        if j + 1 < n:
            m[j][j + 1] = 1
            m[j + 1][j] = 1
    return m


def exact_determinant(matrix: Sequence[Sequence[int]]) -> Fraction:
    """Determinant by fraction-valued Gaussian elimination."""
    a = [[Fraction(v) for v in row] for row in matrix]
    n = len(a)
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if a[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            a[i], a[piv] = a[piv], a[i]
            det = -det
        det *= a[i][i]
        for r in range(i + 1, n):
            f = a[r][i] / a[i][i]
            if f:
                for c in range(i, n):
                    a[r][c] -= f * a[i][c]
    return det
