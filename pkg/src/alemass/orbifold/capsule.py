from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import networkx as nx

from .hj import HJString, hj_resolve, plumbing_matrix

KINDS = ("trivial", "cyclic", "dihedral", "tetrahedral", "octahedral", "icosahedral")
_NEEDS_N = ("cyclic", "dihedral")
_FIXED_PROFILES = {
    "trivial": [],
    "tetrahedral": [2, 3, 3],
    "octahedral": [2, 3, 4],
    "icosahedral": [2, 5, 5],
}


@dataclass(frozen=True)
class OrbifoldGroupType:
    """A finite subgroup of SO(3) acting on the sphere at infinity, up to conjugacy."""

    kind: str
    n: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"Unknown group kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in _NEEDS_N:
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise ValueError(f"{self.kind} groups need an integer order n >= 2, got {self.n}")
        elif self.n is not None:
            raise ValueError(f"{self.kind} groups take no order parameter")

    @property
    def singularity_profile(self) -> List[int]:
        return classify_singularities(self)

    def __str__(self) -> str:
        return f"{self.kind}({self.n})" if self.n is not None else self.kind


def parse_group_type(text: str) -> OrbifoldGroupType:
    """Read ``cyclic(4)``, ``cyclic:4``, ``dihedral(3)`` or a bare polyhedral name."""
    m = re.fullmatch(r"\s*([a-z_]+)\s*(?:[(:]\s*(\d+)\s*\)?)?\s*", text.lower())
    if not m:
        raise ValueError(f"Cannot parse group kind {text!r}")
    n = int(m.group(2)) if m.group(2) else None
    return OrbifoldGroupType(m.group(1), n)


def classify_singularities(kind: OrbifoldGroupType) -> List[int]:
    """Orders of the cyclic isotropy groups of the action on the 2-sphere."""
    if kind.kind == "cyclic":
        return [kind.n, kind.n]
    if kind.kind == "dihedral":
        return [2, 2, kind.n]
    return list(_FIXED_PROFILES[kind.kind])


def capsule_degree(ell: int) -> int:
    """chi(Sigma) + Sigma.Sigma for the sphere at infinity of a Gamma-capsule."""
    if int(ell) != ell or ell < 1:
        raise ValueError(f"ell must be a positive integer, got {ell}")
    deg = 2 + int(ell)
    assert deg >= 3
    return deg


@dataclass
class CapsuleModel:
    ell: int
    gamma_check: OrbifoldGroupType
    local_types: List[Tuple[int, int]]
    chains: List[HJString]
    tree: nx.Graph
    central_weight: Optional[Fraction] = None
    degree: int = field(init=False)

    def __post_init__(self) -> None:
        self.degree = capsule_degree(self.ell)

    @property
    def vertex_count(self) -> int:
        return self.tree.number_of_nodes()


def build_capsule(
    ell: int,
    gamma_check: OrbifoldGroupType,
    local_types: Sequence[Tuple[int, int]],
    central_weight: Optional[Fraction] = None,
) -> CapsuleModel:
    """Central vertex plus one Hirzebruch-Jung chain per singular point of Sigma/Gamma-check.

    The central vertex carries ``central_weight`` when given; it is never used in
    definiteness checks since its orbifold self-intersection is not determined here.
    """
    profile = classify_singularities(gamma_check)
    local = [(int(q), int(p)) for q, p in local_types]
    if len(local) != len(profile):
        raise ValueError(
            f"{gamma_check} has {len(profile)} singular points"
            f" but {len(local)} local types were given"
        )
    for i, ((q, _p), order) in enumerate(zip(local, profile)):
        if q != order:
            raise ValueError(
                f"Local type {i} has q={q} but the profile order is {order} (profile {profile})"
            )

    chains = [hj_resolve(q, p) for q, p in local]
    tree = nx.Graph()
    tree.add_node(0, label="center", weight=central_weight)
    nid = 1
    for i, ch in enumerate(chains):
        prev = 0
        for j, e in enumerate(ch.chain):
            tree.add_node(nid, label=f"chain{i}.{j}", weight=-e)
            tree.add_edge(prev, nid)
            prev = nid
            nid += 1
    if not nx.is_tree(tree):
        raise RuntimeError("Capsule plumbing graph is not a tree")
    return CapsuleModel(
        ell=int(ell),
        gamma_check=gamma_check,
        local_types=local,
        chains=chains,
        tree=tree,
        central_weight=Fraction(central_weight) if central_weight is not None else None,
    )


def capsule_intersection_matrices(model: CapsuleModel) -> List[List[List[int]]]:
    """Plumbing matrices of the attached chains, central vertex excluded."""
    return [plumbing_matrix(ch.chain) for ch in model.chains]


def render_adjacency(model: CapsuleModel) -> str:
    lines = [
        f"# capsule ell={model.ell} gamma_check={model.gamma_check} degree={model.degree}",
    ]
    for node in sorted(model.tree.nodes):
        attrs = model.tree.nodes[node]
        w = attrs["weight"]
        wtxt = "?" if w is None else str(w)
        nbrs = " ".join(str(v) for v in sorted(model.tree.neighbors(node)))
        lines.append(f"{node} {attrs['label']} w={wtxt}: {nbrs}".rstrip())
    return "\n".join(lines) + "\n"
