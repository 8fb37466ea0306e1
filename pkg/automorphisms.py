"""
Automorphisms of pc groups: lifting derivations, innerness, explicit
constructions and bounded brute-force search.

An Automorphism is a full permutation of element indices. Everything that
leaves this module has passed bijectivity, homomorphism and order checks.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from analysis_config import AnalysisConfig
from derivations import (
    Derivation,
    ModuleAction,
    build_module_action,
    derivation_table,
    extension_check,
    inner_levels,
    inner_space,
)
from group_structure import (
    QuotientGroup,
    Subgroup,
    center,
    centralizer,
    closure,
    derived_subgroup,
    is_cyclic,
    omega1,
)
from pc_group import PcGroup
from pgaut_errors import HypothesisViolationError, VerificationError

logger = logging.getLogger(__name__)

PAIR_CHUNK = 256


class Automorphism:
    """A verified-on-demand permutation of the elements of a PcGroup."""

    def __init__(self, group: PcGroup, full_map: np.ndarray, source: str = ""):
        self.group = group
        self.full_map = np.asarray(full_map, dtype=np.int64)
        self.full_map.setflags(write=False)
        self.source = source

    @classmethod
    def identity(cls, group: PcGroup) -> "Automorphism":
        return cls(group, group.elements, source="identity")

    @classmethod
    def conjugation(cls, group: PcGroup, g: int) -> "Automorphism":
        """x ↦ g^-1 x g."""
        return cls(group, group.conjugate_many(group.elements, g), source=f"conjugation:{g}")

    def __call__(self, element: int) -> int:
        return int(self.full_map[element])

    @property
    def generator_images(self) -> Tuple[int, ...]:
        return tuple(int(self.full_map[g]) for g in self.group.generators)

    def generator_image_exponents(self) -> List[List[int]]:
        return [list(self.group.exponents(a)) for a in self.generator_images]

    def compose(self, other: "Automorphism") -> "Automorphism":
        """x ↦ self(other(x))."""
        return Automorphism(self.group, self.full_map[other.full_map], source="composite")

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.full_map, self.group.elements))

    def is_bijective(self) -> bool:
        return bool(np.array_equal(np.sort(self.full_map), self.group.elements))

    def respects_generators(self) -> bool:
        """f(x g_k) = f(x) f(g_k) for every x and pc generator g_k."""
        group = self.group
        everything = group.elements
        for g in group.generators:
            left = self.full_map[group.multiply_many(everything, g)]
            right = group.multiply_many(self.full_map, self.full_map[g])
            if not np.array_equal(left, right):
                return False
        return True

    def respects_all_pairs(self) -> bool:
        group = self.group
        everything = group.elements
        for start in range(0, group.order, PAIR_CHUNK):
            a = everything[start:start + PAIR_CHUNK, None]
            left = self.full_map[group.multiply_many(a, everything[None, :])]
            right = group.multiply_many(self.full_map[a], self.full_map[None, :])
            if not np.array_equal(left, right):
                return False
        return True

    def order(self) -> int:
        current = self.full_map
        value = 1
        while not np.array_equal(current, self.group.elements):
            current = self.full_map[current]
            value += 1
            if value > self.group.order:
                raise VerificationError("automorphism.order", "order exceeds the group order")
        return value

    def fixes(self, subgroup: Subgroup) -> bool:
        return bool(np.array_equal(self.full_map[subgroup.members], subgroup.members))

    def verify(self, exhaustive_pair_max_order: int = 4096) -> int:
        """Run the full check list and return the automorphism order.

        Raises:
            VerificationError: naming the first failed check.
        """
        if self.full_map[0] != 0:
            raise VerificationError("automorphism.identity", "identity is not fixed")
        if not self.is_bijective():
            raise VerificationError("automorphism.bijective")
        if not self.respects_generators():
            raise VerificationError("automorphism.homomorphism", "generator edge check failed")
        if self.group.order <= exhaustive_pair_max_order and not self.respects_all_pairs():
            raise VerificationError("automorphism.homomorphism", "pair check failed")
        return self.order()


class WordTable:
    """Breadth-first words in a generating list, reused across many candidate maps."""

    def __init__(self, group: PcGroup, basis: Sequence[int]):
        self.group = group
        self.basis = np.array(basis, dtype=np.int64)
        seen = np.zeros(group.order, dtype=bool)
        seen[0] = True
        frontier = np.array([0], dtype=np.int64)
        self.layers: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        while frontier.size:
            products = group.multiply_many(frontier[:, None], self.basis[None, :])
            parents = np.repeat(frontier, self.basis.size)
            gens = np.tile(np.arange(self.basis.size), frontier.size)
            flat = products.ravel()
            _, first = np.unique(flat, return_index=True)
            keep = first[~seen[flat[first]]]
            layer = flat[keep]
            seen[layer] = True
            if layer.size:
                self.layers.append((layer, parents[keep], gens[keep]))
            frontier = layer
        if not seen.all():
            raise HypothesisViolationError("basis does not generate the group")
        self.edges = group.multiply_many(group.elements[:, None], self.basis[None, :])

    def extend(self, images: Sequence[int]) -> Optional[Automorphism]:
        """The automorphism sending basis[i] to images[i], or None if there is none."""
        group = self.group
        images = np.asarray(images, dtype=np.int64)
        table = np.full(group.order, -1, dtype=np.int64)
        table[0] = 0
        for layer, parents, gens in self.layers:
            table[layer] = group.multiply_many(table[parents], images[gens])
        if not np.array_equal(table[self.edges], group.multiply_many(table[:, None], images[None, :])):
            return None
        if not np.array_equal(np.sort(table), group.elements):
            return None
        return Automorphism(group, table, source="extension")


def extend_homomorphism(group: PcGroup, basis: Sequence[int], images: Sequence[int]) -> Optional[Automorphism]:
    return WordTable(group, basis).extend(images)


def lift_derivation(action: ModuleAction, derivation: Derivation, exhaustive_pair_max_order: int = 4096) -> Automorphism:
    """x ↦ x·δ(x̄), verified to fix Φ(G) and to have order 1 or p.

    Raises:
        HypothesisViolationError: δ is not a derivation.
        VerificationError: the lift fails a check.
    """
    if not extension_check(action, derivation.matrix):
        raise HypothesisViolationError("images do not extend to a derivation")
    group = action.group
    values = action.section.decode_many(derivation_table(action, derivation))
    full_map = group.multiply_many(group.elements, values[action.quotient.labels])
    automorphism = Automorphism(group, full_map, source="derivation")

    order = automorphism.verify(exhaustive_pair_max_order)
    if not automorphism.fixes(action.frattini):
        raise VerificationError("lift.frattini_fixed")
    expected = 1 if derivation.is_zero() else group.prime
    if order != expected:
        raise VerificationError("lift.order", f"order {order}, expected {expected}")
    return automorphism


def is_inner(group: PcGroup, automorphism: Automorphism, z: Optional[Subgroup] = None) -> Tuple[bool, Optional[int]]:
    """Scan representatives of G/Z(G) for a g with x^g = α(x) on the pc generators."""
    z = z or center(group)
    reps = QuotientGroup(group, z).reps
    gens = np.array(group.generators, dtype=np.int64)
    conjugated = group.conjugate_many(gens[None, :], reps[:, None])
    hits = np.flatnonzero(np.all(conjugated == automorphism.full_map[gens][None, :], axis=1))
    if hits.size:
        return True, int(reps[hits[0]])
    return False, None


def is_inner_via_derivation(action: ModuleAction, derivation: Derivation) -> bool:
    """δ ∈ Ider(Ḡ, A*)."""
    return inner_space(action, action.module_star).contains(derivation)


def find_noninner_derivation(action: ModuleAction, level: int) -> Optional[Derivation]:
    """A basis derivation of Der(Ḡ, A_{level-1}) outside Ider(Ḡ, A*), when the dimensions allow one."""
    der, ider = inner_levels(action, level)
    logger.debug("Level %d: dim Der=%d, dim Ider=%d", level, der.dim, ider.dim)
    if der.dim <= ider.dim:
        return None
    all_inner = inner_space(action, action.module_star)
    for derivation in der.basis:
        if not all_inner.contains(derivation):
            return derivation
    raise VerificationError("lemma33.gap_without_witness", f"level {level}")


def case_b_construct(
    group: PcGroup, action: Optional[ModuleAction] = None, exhaustive_pair_max_order: int = 4096
) -> Optional[Automorphism]:
    """β(u x^i) = u (xk)^i for k ∈ Z_2 \\ Z of order 3 outside G' and x outside C_G(k).

    Raises:
        HypothesisViolationError: p != 3, d != 2, class != 3 or Z(G) non-cyclic.
    """
    action = action or build_module_action(group)
    if group.prime != 3 or action.n != 2 or action.nilpotency_class != 3 or not is_cyclic(group, action.center):
        raise HypothesisViolationError("case b needs p = 3, d(G) = 2, class 3 and a cyclic center")

    z, z2 = action.center, action.z_level(2)
    derived = derived_subgroup(group)
    cubes = group.power_many(group.elements, 3)
    candidates = [
        int(k) for k in group.elements
        if cubes[k] == 0 and z2.mask[k] and not z.mask[k] and not derived.mask[k]
    ]
    logger.debug("Case b: %d candidate elements k", len(candidates))

    for k in candidates:
        c = centralizer(group, [k])
        x = int(np.flatnonzero(~c.mask)[0])
        xk = group.multiply(x, k)
        if group.power(xk, 3) != group.power(x, 3):
            logger.info("Case b: (xk)^3 != x^3 for k=%d", k)
            continue

        full_map = np.full(group.order, -1, dtype=np.int64)
        for i in range(3):
            domain = group.multiply_many(c.members, group.power(x, i))
            full_map[domain] = group.multiply_many(c.members, group.power(xk, i))
        beta = Automorphism(group, full_map, source="case-b")
        try:
            order = beta.verify(exhaustive_pair_max_order)
        except VerificationError as exc:
            logger.info("Case b map for k=%d rejected: %s", k, exc)
            continue
        if order != 3 or not beta.fixes(action.frattini):
            continue
        inner, _ = is_inner(group, beta, action.center)
        if not inner:
            return beta
    return None


@dataclass
class SearchReport:
    family: str
    candidates_total: int
    candidates_tried: int = 0
    truncated: bool = False
    found: bool = False

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "candidates_total": self.candidates_total,
            "candidates_tried": self.candidates_tried,
            "truncated": self.truncated,
            "found": self.found,
        }


def search_shifts(group: PcGroup, action: ModuleAction, require_frattini_fixed: bool) -> Subgroup:
    """Subgroup whose elements c give candidate images x_i c: A·Ω₁(Z(G)), or all of G."""
    if require_frattini_fixed:
        return closure(group, list(action.module.generators) + list(omega1(group, action.center).generators))
    return Subgroup.whole(group)


def brute_force_search(
    group: PcGroup,
    require_frattini_fixed: bool,
    action: Optional[ModuleAction] = None,
    config: Optional[AnalysisConfig] = None,
) -> Tuple[Optional[Automorphism], SearchReport]:
    """First verified non-inner automorphism of order p of the form x_i ↦ x_i c_i.

    Candidates are enumerated in lexicographic order of (c_1, ..., c_n) with
    each c_i running over the shift subgroup in increasing index order.
    """
    config = config or AnalysisConfig()
    action = action or build_module_action(group)
    family = "frattini-fixed" if require_frattini_fixed else "general"
    shifts = search_shifts(group, action, require_frattini_fixed)
    total = shifts.order ** action.n
    report = SearchReport(family=family, candidates_total=total)

    if not require_frattini_fixed and (
        group.order > config.brute_force_full_max_order or action.n > config.brute_force_full_max_d
    ):
        logger.info("General search skipped: order %d, d=%d above caps", group.order, action.n)
        report.truncated = True
        return None, report

    basis = np.array(action.transversal, dtype=np.int64)
    table = WordTable(group, basis)
    reps = QuotientGroup(group, action.center).reps
    gens = np.array(group.generators, dtype=np.int64)
    conjugated = group.conjugate_many(gens[None, :], reps[:, None])

    for choice in itertools.product(shifts.members, repeat=action.n):
        if report.candidates_tried >= config.max_search_candidates:
            report.truncated = True
            logger.info("%s search truncated after %d candidates", family, report.candidates_tried)
            break
        report.candidates_tried += 1
        if not any(choice):
            continue
        candidate = table.extend(group.multiply_many(basis, np.array(choice, dtype=np.int64)))
        if candidate is None:
            continue
        if candidate.order() != group.prime:
            continue
        if require_frattini_fixed and not candidate.fixes(action.frattini):
            continue
        if np.any(np.all(conjugated == candidate.full_map[gens][None, :], axis=1)):
            continue

        candidate.source = f"brute-force:{family}"
        candidate.verify(config.exhaustive_pair_max_order)
        report.found = True
        return candidate, report
    return None, report
