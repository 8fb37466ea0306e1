"""
Subgroup invariants of finite p-groups by exhaustive element scans.

Subgroups are explicit member sets inside a parent FiniteGroup (a PcGroup
or a QuotientGroup), closed by breadth-first multiplication by generators.
Everything here is a pure function of the parent group.
"""

import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from pc_group import FiniteGroup
from pgaut_errors import CapExceededError, NotNormalError

logger = logging.getLogger(__name__)


def _log_p(value: int, prime: int) -> int:
    exponent = round(math.log(value, prime)) if value > 1 else 0
    if prime ** exponent != value:
        raise ValueError(f"{value} is not a power of {prime}")
    return exponent


class Subgroup:
    """A subgroup of `group` held as a sorted member array plus a boolean mask."""

    def __init__(self, group: FiniteGroup, mask: np.ndarray, generators: Sequence[int]):
        self.group = group
        self.mask = mask
        self.mask.setflags(write=False)
        self.members = np.flatnonzero(mask).astype(np.int64)
        self.generators = tuple(int(g) for g in generators)

    @classmethod
    def trivial(cls, group: FiniteGroup) -> "Subgroup":
        mask = np.zeros(group.order, dtype=bool)
        mask[0] = True
        return cls(group, mask, ())

    @classmethod
    def whole(cls, group: FiniteGroup) -> "Subgroup":
        return cls(group, np.ones(group.order, dtype=bool), _prune(group, group.generators))

    @classmethod
    def from_members(cls, group: FiniteGroup, members: Iterable[int]) -> "Subgroup":
        """Wrap a member set that is already known to be a subgroup."""
        mask = np.zeros(group.order, dtype=bool)
        mask[np.fromiter((int(m) for m in members), dtype=np.int64)] = True
        mask[0] = True
        gens: List[int] = []
        spanned = _closure_mask(group, [])
        for m in np.flatnonzero(mask):
            if not spanned[m]:
                gens.append(int(m))
                spanned = _closure_mask(group, gens)
        if not np.array_equal(spanned, mask):
            raise ValueError("member set is not closed under multiplication")
        return cls(group, mask, gens)

    @property
    def order(self) -> int:
        return int(self.members.size)

    @property
    def log_order(self) -> int:
        return _log_p(self.order, self.group.prime)

    def __len__(self) -> int:
        return self.order

    def __contains__(self, element: int) -> bool:
        return bool(self.mask[int(element)])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.group is other.group and np.array_equal(self.mask, other.mask)

    def __hash__(self) -> int:
        return hash(np.packbits(self.mask).tobytes())

    def __le__(self, other: "Subgroup") -> bool:
        return bool(np.all(other.mask[self.members]))

    def is_trivial(self) -> bool:
        return self.order == 1

    def __repr__(self) -> str:
        return f"Subgroup(order={self.order}, generators={list(self.generators)})"


def _closure_mask(group: FiniteGroup, generators: Sequence[int]) -> np.ndarray:
    mask = np.zeros(group.order, dtype=bool)
    mask[0] = True
    gens = np.array(sorted(set(int(g) for g in generators) - {0}), dtype=np.int64)
    if gens.size == 0:
        return mask
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        products = group.multiply_many(frontier[:, None], gens[None, :]).ravel()
        fresh = np.unique(products[~mask[products]])
        mask[fresh] = True
        frontier = fresh
    return mask


def _prune(group: FiniteGroup, generators: Sequence[int]) -> List[int]:
    """Drop generators already in the span of the earlier ones."""
    kept: List[int] = []
    spanned = _closure_mask(group, [])
    for g in generators:
        g = int(g)
        if not spanned[g]:
            kept.append(g)
            spanned = _closure_mask(group, kept)
    return kept


def closure(group: FiniteGroup, generators: Iterable[int]) -> Subgroup:
    gens = _prune(group, list(generators))
    return Subgroup(group, _closure_mask(group, gens), gens)


def normal_closure(
    group: FiniteGroup, elements: Iterable[int], ambient: Optional[Sequence[int]] = None
) -> Subgroup:
    """Smallest subgroup containing `elements` normalized by `ambient` (default: all of G)."""
    conjugators = np.array(ambient if ambient is not None else group.generators, dtype=np.int64)
    gens = _prune(group, list(elements))
    mask = _closure_mask(group, gens)
    while True:
        if conjugators.size == 0 or not gens:
            break
        conj = group.conjugate_many(
            np.array(gens, dtype=np.int64)[:, None], conjugators[None, :]
        ).ravel()
        outside = [int(c) for c in np.unique(conj) if not mask[c]]
        if not outside:
            break
        gens = _prune(group, gens + outside)
        mask = _closure_mask(group, gens)
    return Subgroup(group, mask, gens)


def is_normal(group: FiniteGroup, subgroup: Subgroup) -> bool:
    if not subgroup.generators:
        return True
    conj = group.conjugate_many(
        np.array(subgroup.generators, dtype=np.int64)[:, None],
        np.array(group.generators, dtype=np.int64)[None, :],
    )
    return bool(np.all(subgroup.mask[conj]))


def product(group: FiniteGroup, h: Subgroup, k: Subgroup) -> Subgroup:
    """HK as the subgroup generated by both (equal to HK when one is normal)."""
    return closure(group, list(h.generators) + list(k.generators))


def intersection(group: FiniteGroup, h: Subgroup, k: Subgroup) -> Subgroup:
    return Subgroup.from_members(group, np.flatnonzero(h.mask & k.mask))


def centralizer(group: FiniteGroup, elements: Iterable[int]) -> Subgroup:
    everything = group.elements
    mask = np.ones(group.order, dtype=bool)
    for s in set(int(e) for e in elements):
        if s == 0:
            continue
        mask &= group.multiply_many(everything, s) == group.multiply_many(s, everything)
    return Subgroup.from_members(group, np.flatnonzero(mask))


def center(group: FiniteGroup) -> Subgroup:
    return centralizer(group, group.generators)


def subgroup_center(group: FiniteGroup, h: Subgroup) -> Subgroup:
    """Z(H) for a subgroup H."""
    inside = centralizer(group, h.generators)
    return intersection(group, inside, h)


def commutator_subgroup(
    group: FiniteGroup, h: Subgroup, k: Subgroup, ambient: Optional[Sequence[int]] = None
) -> Subgroup:
    """[H, K] for subgroups normalized by `ambient`."""
    pairs = group.commutator_many(
        np.array(h.generators or (0,), dtype=np.int64)[:, None],
        np.array(k.generators or (0,), dtype=np.int64)[None, :],
    ).ravel()
    return normal_closure(group, pairs, ambient)


def derived_subgroup(group: FiniteGroup, h: Optional[Subgroup] = None) -> Subgroup:
    h = h or Subgroup.whole(group)
    return commutator_subgroup(group, h, h, ambient=h.generators)


def gamma3(group: FiniteGroup) -> Subgroup:
    whole = Subgroup.whole(group)
    return commutator_subgroup(group, derived_subgroup(group), whole)


def frattini(group: FiniteGroup, h: Optional[Subgroup] = None) -> Subgroup:
    """Φ(H) = H'H^p; the p-th powers of generators suffice modulo H'."""
    h = h or Subgroup.whole(group)
    derived = derived_subgroup(group, h)
    powers = [group.power(g, group.prime) for g in h.generators]
    return closure(group, list(derived.generators) + powers)


def min_generators(group: FiniteGroup, h: Optional[Subgroup] = None) -> int:
    """d(H) = log_p |H : Φ(H)|."""
    h = h or Subgroup.whole(group)
    return _log_p(h.order // frattini(group, h).order, group.prime)


def relative_min_generators(group: FiniteGroup, h: Subgroup, k: Subgroup) -> int:
    """d(H/K) for K normal in H: log_p |H : Φ(H)K|."""
    phi_k = product(group, frattini(group, h), k)
    return _log_p(h.order // phi_k.order, group.prime)


def is_cyclic(group: FiniteGroup, h: Subgroup) -> bool:
    return min_generators(group, h) <= 1


def omega1(group: FiniteGroup, h: Optional[Subgroup] = None) -> Subgroup:
    h = h or Subgroup.whole(group)
    members = h.members
    roots = members[group.power_many(members, group.prime) == 0]
    return closure(group, roots)


def omega1_star(group: FiniteGroup, z: Optional[Subgroup] = None) -> Subgroup:
    """Ω₁*(G) = ⟨x : x^p ∈ Z(G)⟩."""
    z = z or center(group)
    everything = group.elements
    hits = everything[z.mask[group.power_many(everything, group.prime)]]
    return closure(group, hits)


class QuotientGroup(FiniteGroup):
    """G/N by coset labels; each coset is represented by its smallest element."""

    def __init__(self, parent: FiniteGroup, normal: Subgroup):
        if not is_normal(parent, normal):
            raise NotNormalError(f"subgroup of order {normal.order} is not normal")
        self.parent = parent
        self.normal = normal
        self.prime = parent.prime

        labels = np.full(parent.order, -1, dtype=np.int64)
        reps: List[int] = []
        for x in range(parent.order):
            if labels[x] < 0:
                coset = parent.multiply_many(x, normal.members)
                labels[coset] = len(reps)
                reps.append(x)
        self.labels = labels
        self.reps = np.array(reps, dtype=np.int64)
        self.order = len(reps)
        if self.order * normal.order != parent.order:
            raise NotNormalError("coset enumeration does not partition the parent group")

        projected = [int(labels[g]) for g in parent.generators]
        self.generators = tuple(dict.fromkeys(g for g in projected if g != 0))
        logger.debug("Quotient of order %d by subgroup of order %d", self.order, normal.order)

    def multiply_many(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return self.labels[self.parent.multiply_many(self.reps[a], self.reps[b])]

    def project(self, element: int) -> int:
        return int(self.labels[element])

    def lift(self, label: int) -> int:
        return int(self.reps[label])

    def preimage(self, subgroup: Subgroup) -> Subgroup:
        return Subgroup.from_members(self.parent, np.flatnonzero(subgroup.mask[self.labels]))

    def coset_table(self) -> np.ndarray:
        everything = self.elements
        return self.multiply_many(everything[:, None], everything[None, :])


def quotient(group: FiniteGroup, normal: Subgroup) -> QuotientGroup:
    return QuotientGroup(group, normal)


def upper_central_series(group: FiniteGroup) -> List[Subgroup]:
    """[Z_0 = 1, Z_1, ..., Z_c = G]."""
    series = [Subgroup.trivial(group)]
    while series[-1].order < group.order:
        current = series[-1]
        if current.is_trivial():
            following = center(group)
        else:
            q = QuotientGroup(group, current)
            following = q.preimage(center(q))
        if following.order == current.order:
            raise ValueError("upper central series stalled; group is not nilpotent")
        series.append(following)
    return series


def nilpotency_class(group: FiniteGroup, series: Optional[List[Subgroup]] = None) -> int:
    return len(series or upper_central_series(group)) - 1


def _enumerate_subgroups(group: FiniteGroup) -> Dict[bytes, Subgroup]:
    """All subgroups, grown one index-p step at a time."""
    p = group.prime
    everything = group.elements
    powers = group.power_many(everything, p)
    found: Dict[bytes, Subgroup] = {}
    layer = [Subgroup.trivial(group)]
    found[np.packbits(layer[0].mask).tobytes()] = layer[0]

    while layer:
        following: List[Subgroup] = []
        for s in layer:
            candidates = (~s.mask) & s.mask[powers]
            for g in s.generators:
                candidates &= s.mask[group.conjugate_many(g, everything)]
            covered = s.mask.copy()
            for x in np.flatnonzero(candidates):
                if covered[x]:
                    continue
                child = closure(group, list(s.generators) + [int(x)])
                covered |= child.mask
                key = np.packbits(child.mask).tobytes()
                if key not in found:
                    found[key] = child
                    following.append(child)
        layer = following
    return found


def rank(group: FiniteGroup, exponent_cap: int = 5) -> int:
    """rk(G) = max d(H) over all subgroups H.

    Raises:
        CapExceededError: |G| > p^exponent_cap.
    """
    limit = group.prime ** exponent_cap
    if group.order > limit:
        raise CapExceededError("rank_exponent_cap", limit, group.order)
    subgroups = _enumerate_subgroups(group)
    logger.debug("Rank scan over %d subgroups of a group of order %d", len(subgroups), group.order)
    return max(min_generators(group, h) for h in subgroups.values())


def rank_upper_bound(group: FiniteGroup, z: Optional[Subgroup] = None) -> int:
    """Bound on rk(G/Z): d(G/G'Z) + d(G'Z/Z)."""
    whole = Subgroup.whole(group)
    z = z or center(group)
    derived_z = product(group, derived_subgroup(group), z)
    return relative_min_generators(group, whole, derived_z) + relative_min_generators(group, derived_z, z)


def is_direct_factor(group: FiniteGroup, b: Subgroup, k: Subgroup) -> bool:
    """Is K a direct factor of the abelian group B?

    Uses purity: K splits off a finite abelian B exactly when
    K ∩ B^(p^j) = K^(p^j) for every j.
    """
    if not k <= b:
        return False
    if any(group.commutator(x, y) != 0 for x in b.generators for y in b.generators):
        raise ValueError("direct factor test needs an abelian group")
    b_powers, k_powers = b.members, k.members
    while b_powers.size > 1:
        b_powers = np.unique(group.power_many(b_powers, group.prime))
        k_powers = np.unique(group.power_many(k_powers, group.prime))
        inside = b_powers[k.mask[b_powers]]
        if not np.array_equal(inside, k_powers):
            return False
    return True
