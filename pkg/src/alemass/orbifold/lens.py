"""Cyclic subgroups of U(2) acting diagonally by roots of unity.

An element diag(zeta^a, zeta^b) with zeta = exp(2 pi i / n) is stored exactly as
the reduced exponent pair (a mod n, b mod n) together with its modulus n.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Sequence, Set, Tuple

import numpy as np

CLOSURE_CAP = 10_000


@dataclass(frozen=True)
class RootOfUnityMatrix:
    """diag(exp(2 pi i a/n), exp(2 pi i b/n)), kept in canonical reduced form."""

    a: Fraction
    b: Fraction

    @classmethod
    def from_exponents(cls, a: int, b: int, n: int) -> "RootOfUnityMatrix":
        return cls(Fraction(a % n, n), Fraction(b % n, n))

    def __mul__(self, other: "RootOfUnityMatrix") -> "RootOfUnityMatrix":
        return RootOfUnityMatrix((self.a + other.a) % 1, (self.b + other.b) % 1)

    @property
    def is_identity(self) -> bool:
        return self.a == 0 and self.b == 0

    @property
    def is_scalar(self) -> bool:
        return self.a == self.b

    @property
    def has_unit_eigenvalue(self) -> bool:
        return self.a == 0 or self.b == 0

    def to_complex(self) -> np.ndarray:
        return np.diag([np.exp(2j * np.pi * float(self.a)), np.exp(2j * np.pi * float(self.b))])

    def to_real(self) -> np.ndarray:
        """Real 4x4 matrix acting on (x1, x2, x3, x4) with z1 = x1 + i x2, z2 = x3 + i x4."""
        out = np.zeros((4, 4))
        for blk, frac in ((0, self.a), (2, self.b)):
            ang = 2.0 * math.pi * float(frac)
            c, s = math.cos(ang), math.sin(ang)
            out[blk : blk + 2, blk : blk + 2] = [[c, -s], [s, c]]
        return out


IDENTITY = RootOfUnityMatrix(Fraction(0), Fraction(0))


def lens_generator(q: int, p: int) -> RootOfUnityMatrix:
    """Generator (z1, z2) -> (zeta z1, zeta^p z2) of the lens action of type (q, p)."""
    if int(q) != q or int(p) != p:
        raise ValueError(f"(q, p) must be integers, got ({q}, {p})")
    if q < 2:
        raise ValueError(f"Lens actions need q >= 2, got q={q}")
    if not (0 < p < q):
        raise ValueError(f"p must satisfy 0 < p < q, got p={p}, q={q}")
    g = math.gcd(p, q)
    if g != 1:
        j = q // g
        raise ValueError(
            f"Action of type ({q}, {p}) is not free: gcd={g}, element j={j} has a unit eigenvalue"
        )
    return RootOfUnityMatrix.from_exponents(1, p, q)


def lens_rotation(q: int, p: int) -> np.ndarray:
    return lens_generator(q, p).to_real()


def group_closure(
    generators: Iterable[RootOfUnityMatrix], cap: int = CLOSURE_CAP
) -> List[RootOfUnityMatrix]:
    """All products of the generators, found breadth-first from the identity."""
    gens = list(generators)
    seen: Set[RootOfUnityMatrix] = {IDENTITY}
    order: List[RootOfUnityMatrix] = [IDENTITY]
    queue = deque([IDENTITY])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = cur * g
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                if len(order) > cap:
                    raise ValueError(f"Group closure exceeded {cap} elements")
                queue.append(nxt)
    return order


def is_free(elements: Sequence[RootOfUnityMatrix]) -> bool:
    """True iff no non-identity element has eigenvalue 1 (the action on S^3 is free)."""
    return not any(g.has_unit_eigenvalue and not g.is_identity for g in elements)


def central_quotient(generators: Iterable[RootOfUnityMatrix]) -> Tuple[int, int]:
    """(ell, |Gamma check|): the number of scalar elements and the order of the quotient."""
    elems = group_closure(generators)
    ell = sum(1 for g in elems if g.is_scalar)
    return ell, len(elems) // ell
