"""
Derivations of the Frattini quotient into the Frattini-center module.

Notation used throughout this module:

    G          a non-abelian p-group (PcGroup)
    Ḡ          G/Φ(G), elementary abelian with basis x̄_1..x̄_n
    A          Ω₁(Z(Φ(G))), an F_p-module for Ḡ acting by conjugation
    A_j        A ∩ Z_j(G)
    A*         Ω₁*(G) ∩ Z(Φ(G))

Coordinates on A come from a SectionBasis. The matrix M_i acts on column
vectors: the coordinates of a^(x_i) = x_i^-1 a x_i are M_i @ coords(a).
A derivation δ satisfies δ(uv) = M_v δ(u) + δ(v) and is stored by its
images b_i = δ(x̄_i).
"""

import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import List, Optional, Sequence, Tuple

import numpy as np

from fp_linear import FpSubspace, SectionBasis, intersect, nullspace
from group_structure import (
    QuotientGroup,
    Subgroup,
    center,
    centralizer,
    closure,
    frattini,
    intersection,
    omega1,
    omega1_star,
    subgroup_center,
    upper_central_series,
)
from pc_group import PcGroup
from pgaut_errors import AbelianGroupError, HypothesisViolationError, VerificationError

logger = logging.getLogger(__name__)


def _matrix_power(matrix: np.ndarray, exponent: int, prime: int) -> np.ndarray:
    result = np.eye(matrix.shape[0], dtype=np.int64)
    for _ in range(exponent):
        result = (matrix @ result) % prime
    return result


@dataclass(eq=False)
class ModuleAction:
    """Conjugation action of Ḡ on A, plus the subgroup data it was built from."""

    group: PcGroup
    center: Subgroup
    frattini: Subgroup
    frattini_center: Subgroup
    series: List[Subgroup]
    module: Subgroup
    module_star: Subgroup
    section: SectionBasis
    quotient: QuotientGroup
    quotient_section: SectionBasis
    transversal: Tuple[int, ...]
    matrices: Tuple[np.ndarray, ...]
    standing_hypothesis: bool
    module_in_z3: bool
    levels: List[FpSubspace] = field(default_factory=list)

    @property
    def prime(self) -> int:
        return self.group.prime

    @property
    def n(self) -> int:
        return len(self.transversal)

    @property
    def r(self) -> int:
        return self.section.dim

    @property
    def nilpotency_class(self) -> int:
        return len(self.series) - 1

    def level(self, j: int) -> FpSubspace:
        """A_j in A-coordinates; trivial for j <= 0 and all of A beyond the class."""
        if j <= 0:
            return FpSubspace.zero(self.prime, self.r)
        return self.levels[min(j, len(self.levels) - 1)]

    def z_level(self, j: int) -> Subgroup:
        if j <= 0:
            return self.series[0]
        return self.series[min(j, len(self.series) - 1)]

    def star_level(self, j: int) -> Subgroup:
        """A* ∩ Z_j as a subgroup of G."""
        return intersection(self.group, self.module_star, self.z_level(j))

    def element_matrix(self, label: int) -> np.ndarray:
        """Action matrix of any element of Ḡ, given by its quotient label."""
        exps = self.quotient_section.coordinates(label)
        result = np.eye(self.r, dtype=np.int64)
        for i, e in enumerate(exps):
            result = (_matrix_power(self.matrices[i], int(e), self.prime) @ result) % self.prime
        return result

    def transversal_exponents(self) -> List[List[int]]:
        return [list(self.group.exponents(x)) for x in self.transversal]

    def module_basis_exponents(self) -> List[List[int]]:
        return [list(self.group.exponents(a)) for a in self.section.elements]


def _burnside_basis(group: PcGroup, bar: QuotientGroup) -> List[int]:
    """Pc generators whose images form a basis of Ḡ, lifted to the smallest coset element."""
    chosen: List[int] = []
    spanned = closure(bar, [])
    for g in group.generators:
        label = bar.project(g)
        if label not in spanned:
            chosen.append(label)
            spanned = closure(bar, chosen)
    return [bar.lift(label) for label in chosen]


def build_module_action(group: PcGroup) -> ModuleAction:
    """Assemble A, its filtration and the action matrices of the Burnside basis.

    Raises:
        AbelianGroupError: the group is abelian.
        VerificationError: the action depends on the transversal.
    """
    if group.is_abelian():
        raise AbelianGroupError("module action needs a non-abelian group")

    p = group.prime
    z = center(group)
    phi = frattini(group)
    zphi = subgroup_center(group, phi)
    series = upper_central_series(group)
    module = omega1(group, zphi)
    module_star = intersection(group, omega1_star(group, z), zphi)

    standing = centralizer(group, zphi.generators) == phi
    z3 = series[min(3, len(series) - 1)]
    in_z3 = module <= z3

    section = SectionBasis(group, module.members)
    bar = QuotientGroup(group, phi)
    transversal = _burnside_basis(group, bar)
    bar_section = SectionBasis(bar, bar.elements, basis=[bar.project(x) for x in transversal])

    basis = np.array(section.elements, dtype=np.int64)
    matrices = []
    for x in transversal:
        conjugated = group.conjugate_many(basis, x)
        matrices.append(section.coordinates_many(conjugated).T.copy())

        for f in phi.generators:
            other = group.multiply(x, f)
            if not np.array_equal(group.conjugate_many(basis, other), conjugated):
                raise VerificationError(
                    "module.well_defined", f"conjugation by x and x*{f} differ on A"
                )

    levels = [
        section.subspace_of(intersection(group, module, zj).members) for zj in series
    ]

    action = ModuleAction(
        group=group,
        center=z,
        frattini=phi,
        frattini_center=zphi,
        series=series,
        module=module,
        module_star=module_star,
        section=section,
        quotient=bar,
        quotient_section=bar_section,
        transversal=tuple(transversal),
        matrices=tuple(matrices),
        standing_hypothesis=standing,
        module_in_z3=in_z3,
        levels=levels,
    )
    logger.info(
        "Module action: n=%d, dim A=%d, class=%d, standing hypothesis=%s",
        action.n, action.r, action.nilpotency_class, standing,
    )
    return action


@dataclass(frozen=True, eq=False)
class TraceMap:
    index: int
    matrix: np.ndarray

    def kernel(self, prime: int) -> FpSubspace:
        return nullspace(self.matrix, prime, ncols=self.matrix.shape[1])


def trace_from_matrix(matrix: np.ndarray, prime: int) -> np.ndarray:
    """1 + M + ... + M^(p-1), always p terms."""
    total = np.zeros_like(matrix)
    power = np.eye(matrix.shape[0], dtype=np.int64)
    for _ in range(prime):
        total = (total + power) % prime
        power = (matrix @ power) % prime
    return total


def trace_map(action: ModuleAction, i: int) -> TraceMap:
    """τ_{x_i}, checked against a ↦ [a,_{p-1} x_i] and τ² = 0."""
    p = action.prime
    matrix = trace_from_matrix(action.matrices[i], p)

    if action.r:
        x = action.transversal[i]
        expected = [
            action.section.coordinates(action.group.left_normed_commutator(b, x, p - 1))
            for b in action.section.elements
        ]
        if not np.array_equal(matrix, np.array(expected, dtype=np.int64).T):
            raise VerificationError("lemma31.trace_commutator", f"generator {i + 1}")
        if np.any((matrix @ matrix) % p):
            raise VerificationError("lemma31.trace_square", f"generator {i + 1}")

    return TraceMap(index=i, matrix=matrix)


def kernel_filtration(action: ModuleAction, i: int) -> List[int]:
    """d(ker τ_{x_i} ∩ A_j) for j = 0..class.

    Raises:
        VerificationError: one of the kernel bounds fails.
    """
    p = action.prime
    kernel = trace_map(action, i).kernel(p)
    if 2 * kernel.dim < action.r:
        raise VerificationError("lemma31.kernel_half", f"generator {i + 1}")

    dims = []
    for j in range(action.nilpotency_class + 1):
        level = action.level(j)
        cut = intersect(kernel, level).dim
        if j <= p - 1 and cut != level.dim:
            raise VerificationError("lemma31.low_levels", f"generator {i + 1}, level {j}")
        if cut < level.dim - action.level(j - p + 1).dim:
            raise VerificationError("lemma31.level_bound", f"generator {i + 1}, level {j}")
        dims.append(cut)
    return dims


@dataclass(frozen=True)
class Derivation:
    """Images b_i = δ(x̄_i) as rows of A-coordinates."""

    images: Tuple[Tuple[int, ...], ...]

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "Derivation":
        return cls(tuple(tuple(int(v) for v in row) for row in np.asarray(matrix)))

    @classmethod
    def from_vector(cls, vector: np.ndarray, n: int, r: int) -> "Derivation":
        return cls.from_matrix(np.asarray(vector, dtype=np.int64).reshape(n, r))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.images, dtype=np.int64).reshape(len(self.images), -1)

    @property
    def vector(self) -> np.ndarray:
        return self.matrix.reshape(-1)

    def is_zero(self) -> bool:
        return not any(any(row) for row in self.images)


def extension_check(action: ModuleAction, images) -> bool:
    """Do generator images b_i extend to a derivation Ḡ → A?"""
    p = action.prime
    b = np.asarray(images, dtype=np.int64).reshape(action.n, action.r)
    identity = np.eye(action.r, dtype=np.int64)
    for i in range(action.n):
        if np.any((trace_from_matrix(action.matrices[i], p) @ b[i]) % p):
            return False
    for i, j in itertools.combinations(range(action.n), 2):
        left = ((action.matrices[j] - identity) @ b[i]) % p
        right = ((action.matrices[i] - identity) @ b[j]) % p
        if not np.array_equal(left, right):
            return False
    return True


def commutator_span(action: ModuleAction, c: FpSubspace) -> FpSubspace:
    """Span of [C, x_i] over all i."""
    p = action.prime
    identity = np.eye(action.r, dtype=np.int64)
    vectors = [
        ((m - identity) @ row) % p for m in action.matrices for row in c.basis
    ]
    return FpSubspace.span(vectors, p, action.r)


def constraint_matrix(
    action: ModuleAction, c: FpSubspace, d: Optional[FpSubspace] = None
) -> np.ndarray:
    """Coefficient matrix E over unknowns t (block i holds the C-coordinates of b_i).

    Rows are ordered by (i, j, q) with i < j: +m^q_{j·} in block i and
    -m^q_{i·} in block j, where m^q_{il} is the q-th D-coordinate of [c_l, x_i].

    Raises:
        HypothesisViolationError: some [c, x_i] falls outside D.
    """
    p = action.prime
    n = action.n
    d = d if d is not None else commutator_span(action, c)
    identity = np.eye(action.r, dtype=np.int64)

    # m[i][q, l] = q-th coordinate of [c_l, x_i] in D
    m = []
    for i, matrix in enumerate(action.matrices):
        block = np.zeros((d.dim, c.dim), dtype=np.int64)
        for l, row in enumerate(c.basis):
            coefficients = d.express(((matrix - identity) @ row) % p)
            if coefficients is None:
                raise HypothesisViolationError(f"[C, x_{i + 1}] is not contained in D")
            block[:, l] = coefficients
        m.append(block)

    rows = []
    for i, j in itertools.combinations(range(n), 2):
        for q in range(d.dim):
            row = np.zeros(n * c.dim, dtype=np.int64)
            row[i * c.dim:(i + 1) * c.dim] = m[j][q]
            row[j * c.dim:(j + 1) * c.dim] = (-m[i][q]) % p
            rows.append(row)
    if not rows:
        return np.zeros((0, n * c.dim), dtype=np.int64)
    return np.vstack(rows)


@dataclass(eq=False)
class DerivationSpace:
    """Der^C(Ḡ, A) as a subspace of A^n (flattened generator-major)."""

    action: ModuleAction
    constraint: FpSubspace
    subspace: FpSubspace

    @property
    def dim(self) -> int:
        return self.subspace.dim

    @property
    def basis(self) -> List[Derivation]:
        return [
            Derivation.from_vector(row, self.action.n, self.action.r) for row in self.subspace.basis
        ]

    def contains(self, derivation: Derivation) -> bool:
        return self.subspace.contains(derivation.vector)


def derivation_space(
    action: ModuleAction, c: Optional[FpSubspace] = None, d: Optional[FpSubspace] = None
) -> DerivationSpace:
    """Der^C(Ḡ, A), solved on the product of the kernels ker τ_i ∩ C.

    Raises:
        VerificationError: the dimension bound or a basis extension check fails.
    """
    p, n, r = action.prime, action.n, action.r
    c = c if c is not None else FpSubspace.full(p, r)
    d = d if d is not None else commutator_span(action, c)
    e = constraint_matrix(action, c, d)

    # restricted coordinates: block-diagonal embedding of each ker τ_i ∩ C into C^n
    kernels = [intersect(trace_map(action, i).kernel(p), c) for i in range(n)]
    widths = [k.dim for k in kernels]
    embed = np.zeros((n * c.dim, sum(widths)), dtype=np.int64)
    offset = 0
    for i, kernel in enumerate(kernels):
        for k, row in enumerate(kernel.basis):
            embed[i * c.dim:(i + 1) * c.dim, offset + k] = c.express(row)
        offset += widths[i]

    restricted = (e @ embed) % p
    solutions = nullspace(restricted, p, ncols=embed.shape[1])

    vectors = []
    for s in solutions.basis:
        t = (embed @ s) % p
        images = np.zeros((n, r), dtype=np.int64)
        for i in range(n):
            images[i] = (t[i * c.dim:(i + 1) * c.dim] @ c.basis) % p if c.dim else 0
        vectors.append(images.reshape(-1))
    space = DerivationSpace(action, c, FpSubspace.span(vectors, p, n * r))

    bound = sum(widths) - comb(n, 2) * d.dim
    if space.dim < bound:
        raise VerificationError("lemma23.bound", f"dim {space.dim} < {bound}")
    for derivation in space.basis:
        if not extension_check(action, derivation.matrix):
            raise VerificationError("lemma22.extension", "basis derivation fails the extension test")
    logger.debug("Derivation space: dim C=%d, dim D=%d, dim Der=%d (bound %d)", c.dim, d.dim, space.dim, bound)
    return space


def derivation_table(action: ModuleAction, derivation: Derivation) -> np.ndarray:
    """δ on every element of Ḡ (rows indexed by quotient label), A-coordinates.

    Each element is evaluated along x̄_1^e1..x̄_n^en and along the reversed
    word; both must agree.
    """
    p, r = action.prime, action.r
    b = derivation.matrix
    exps = action.quotient_section.coordinates_many(action.quotient.elements)

    def evaluate(order: Sequence[int]) -> np.ndarray:
        values = np.zeros((exps.shape[0], r), dtype=np.int64)
        for i in order:
            m = action.matrices[i]
            power = np.eye(r, dtype=np.int64)
            partial = np.zeros(r, dtype=np.int64)
            for e in range(p):
                mask = exps[:, i] == e
                if mask.any():
                    values[mask] = (values[mask] @ power.T + partial) % p
                partial = (m @ partial + b[i]) % p
                power = (m @ power) % p
        return values

    forward = evaluate(range(action.n))
    backward = evaluate(reversed(range(action.n)))
    if not np.array_equal(forward, backward):
        raise VerificationError("derivation.word_independence")
    return forward


def apply_derivation(
    action: ModuleAction, derivation: Derivation, label: int, table: Optional[np.ndarray] = None
) -> int:
    """δ(ḡ) as an element of A, for ḡ given by its quotient label.

    Pass the result of derivation_table when evaluating many labels.
    """
    if table is None:
        table = derivation_table(action, derivation)
    vector = table[label]
    return action.section.decode(vector)


def inner_derivation(action: ModuleAction, a: int) -> Derivation:
    """φ_a: x̄ ↦ [x, a] for a ∈ Z(Φ(G)).

    Raises:
        HypothesisViolationError: a is outside Z(Φ(G)) or some [x_i, a] leaves A.
    """
    if a not in action.frattini_center:
        raise HypothesisViolationError(f"element {a} is not in Z(Φ(G))")
    images = []
    for x in action.transversal:
        value = action.group.commutator(x, a)
        if value not in action.section:
            raise HypothesisViolationError(f"[x, {a}] lies outside A")
        images.append(action.section.coordinates(value))
    if not images:
        return Derivation(())
    return Derivation.from_matrix(np.vstack(images))


def inner_space(action: ModuleAction, w: Subgroup) -> DerivationSpace:
    """Ider(Ḡ, W) for W ≤ Z(Φ(G)) with [G, W] ≤ A.

    Raises:
        VerificationError: the dimension differs from log_p |W : W ∩ Z(G)|.
    """
    p = action.prime
    vectors = [inner_derivation(action, a).vector for a in w.generators]
    space = DerivationSpace(
        action, FpSubspace.full(p, action.r), FpSubspace.span(vectors, p, action.n * action.r)
    )
    expected = w.order // intersection(action.group, w, action.center).order
    if p ** space.dim != expected:
        raise VerificationError("lemma33.inner_dimension", f"p^{space.dim} != {expected}")
    return space


def inner_levels(action: ModuleAction, level: int) -> Tuple[DerivationSpace, DerivationSpace]:
    """(Der(Ḡ, A_{i-1}), Ider(Ḡ, A* ∩ Z_i)) with the level identities checked."""
    der = derivation_space(action, action.level(level - 1))
    ider = inner_space(action, action.star_level(level))
    all_inner = inner_space(action, action.module_star)

    common = intersect(all_inner.subspace, der.subspace)
    if common != ider.subspace:
        raise VerificationError("lemma33.inner_intersection", f"level {level}")
    if ider.dim > action.level(level).dim:
        raise VerificationError("lemma33.inner_bound", f"level {level}")
    return der, ider


def brute_force_derivations(action: ModuleAction, c: Optional[FpSubspace] = None) -> List[Tuple[int, ...]]:
    """All tuples in C^n that pass extension_check, as flattened vectors."""
    p, n, r = action.prime, action.n, action.r
    c = c if c is not None else FpSubspace.full(p, r)
    points = np.array(list(c.vectors()), dtype=np.int64).reshape(-1, r)
    found = []
    for choice in itertools.product(range(points.shape[0]), repeat=n):
        images = points[list(choice)]
        if extension_check(action, images):
            found.append(tuple(int(v) for v in images.reshape(-1)))
    return sorted(found)


def space_vectors(space: DerivationSpace) -> List[Tuple[int, ...]]:
    return sorted(tuple(int(v) for v in vec) for vec in space.subspace.vectors())


def oracle_within_caps(action: ModuleAction, c: FpSubspace, max_module_order: int, max_d: int) -> bool:
    """Whether brute_force_derivations over C^n stays within the oracle caps."""
    return action.prime ** c.dim <= max_module_order and action.n <= max_d
