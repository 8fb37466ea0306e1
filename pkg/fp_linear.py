"""
Exact linear algebra over the prime field F_p.

Vectors and matrices are numpy integer arrays with entries in [0, p); the
elimination itself is done by galois field arrays, whose reduced row echelon
form is canonical, so every basis produced here is reproducible.

SectionBasis bridges group language and linear algebra: it fixes an ordered
basis of an elementary abelian subgroup and converts elements to coordinate
vectors and back.
"""

import logging
from typing import Dict, Iterable, Iterator, List, Optional, Sequence

import galois
import numpy as np

from pgaut_errors import HypothesisViolationError

logger = logging.getLogger(__name__)


def field(prime: int):
    """The galois field class GF(p); galois caches these per prime."""
    return galois.GF(prime)


def _as_int(array) -> np.ndarray:
    return np.asarray(array, dtype=np.int64)


def _reduce(matrix, prime: int) -> np.ndarray:
    return np.mod(_as_int(matrix), prime)


def row_reduce(matrix, prime: int) -> np.ndarray:
    """Reduced row echelon form with zero rows dropped."""
    m = _reduce(matrix, prime)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {m.shape}")
    if m.shape[0] == 0 or m.shape[1] == 0:
        return np.zeros((0, m.shape[1]), dtype=np.int64)
    rref = _as_int(field(prime)(m).row_reduce())
    return rref[np.any(rref != 0, axis=1)]


def _pivots(rref: np.ndarray) -> List[int]:
    return [int(np.flatnonzero(row)[0]) for row in rref]


def rank(matrix, prime: int) -> int:
    m = _reduce(matrix, prime)
    if m.size == 0:
        return 0
    return int(np.linalg.matrix_rank(field(prime)(m)))


class FpSubspace:
    """A subspace of F_p^ambient held by its reduced row echelon basis.

    Two subspaces are equal exactly when their bases are equal, since the
    echelon form is canonical.
    """

    __slots__ = ("prime", "ambient", "basis")

    def __init__(self, prime: int, ambient: int, basis: Optional[np.ndarray] = None):
        self.prime = prime
        self.ambient = ambient
        if basis is None:
            basis = np.zeros((0, ambient), dtype=np.int64)
        self.basis = row_reduce(np.asarray(basis, dtype=np.int64).reshape(-1, ambient), prime)
        self.basis.setflags(write=False)

    @classmethod
    def span(cls, vectors: Iterable[Sequence[int]], prime: int, ambient: int) -> "FpSubspace":
        rows = [np.asarray(v, dtype=np.int64) for v in vectors]
        if not rows:
            return cls(prime, ambient)
        return cls(prime, ambient, np.vstack(rows))

    @classmethod
    def zero(cls, prime: int, ambient: int) -> "FpSubspace":
        return cls(prime, ambient)

    @classmethod
    def full(cls, prime: int, ambient: int) -> "FpSubspace":
        return cls(prime, ambient, np.eye(ambient, dtype=np.int64))

    @property
    def dim(self) -> int:
        return int(self.basis.shape[0])

    @property
    def pivots(self) -> List[int]:
        return _pivots(self.basis)

    def contains(self, vector: Sequence[int]) -> bool:
        v = _reduce(vector, self.prime)
        return self.express(v) is not None

    def express(self, vector: Sequence[int]) -> Optional[np.ndarray]:
        """Coefficients of `vector` in the echelon basis, or None if outside."""
        v = _reduce(vector, self.prime)
        if v.shape != (self.ambient,):
            raise ValueError(f"vector of length {v.shape} in ambient dimension {self.ambient}")
        if self.dim == 0:
            return np.zeros(0, dtype=np.int64) if not v.any() else None
        coefficients = v[self.pivots]
        residue = (v - coefficients @ self.basis) % self.prime
        return coefficients if not residue.any() else None

    def is_subspace_of(self, other: "FpSubspace") -> bool:
        _check_compatible(self, other)
        return all(other.contains(row) for row in self.basis)

    def vectors(self) -> Iterator[np.ndarray]:
        """All p^dim vectors, in lexicographic order of coefficients."""
        for index in range(self.prime ** self.dim):
            coefficients = np.array(
                [(index // self.prime ** (self.dim - 1 - k)) % self.prime for k in range(self.dim)],
                dtype=np.int64,
            )
            yield (coefficients @ self.basis) % self.prime if self.dim else np.zeros(self.ambient, dtype=np.int64)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FpSubspace):
            return NotImplemented
        return (
            self.prime == other.prime
            and self.ambient == other.ambient
            and np.array_equal(self.basis, other.basis)
        )

    def __hash__(self) -> int:
        return hash((self.prime, self.ambient, self.basis.tobytes()))

    def __repr__(self) -> str:
        return f"FpSubspace(p={self.prime}, ambient={self.ambient}, dim={self.dim})"


def _check_compatible(u: FpSubspace, v: FpSubspace) -> None:
    if u.prime != v.prime or u.ambient != v.ambient:
        raise ValueError(
            f"ambient mismatch: F_{u.prime}^{u.ambient} vs F_{v.prime}^{v.ambient}"
        )


def nullspace(matrix, prime: int, ncols: Optional[int] = None) -> FpSubspace:
    """Subspace of column vectors x with Mx = 0."""
    m = _reduce(matrix, prime)
    cols = m.shape[1] if m.ndim == 2 else int(ncols or 0)
    if m.size == 0:
        return FpSubspace.full(prime, cols)

    rref = row_reduce(m, prime)
    pivots = _pivots(rref)
    free = [c for c in range(cols) if c not in pivots]
    vectors = []
    for f in free:
        x = np.zeros(cols, dtype=np.int64)
        x[f] = 1
        for row, pivot in zip(rref, pivots):
            x[pivot] = (-row[f]) % prime
        vectors.append(x)
    return FpSubspace.span(vectors, prime, cols)


def solve(matrix, vector, prime: int) -> Optional[np.ndarray]:
    """One solution x of Mx = v (free variables zero), or None."""
    m = _reduce(matrix, prime)
    v = _reduce(vector, prime)
    if m.ndim != 2 or v.shape != (m.shape[0],):
        raise ValueError(f"dimension mismatch: matrix {m.shape}, vector {v.shape}")
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.zeros(cols, dtype=np.int64)

    rref = row_reduce(np.hstack([m, v.reshape(-1, 1)]), prime)
    x = np.zeros(cols, dtype=np.int64)
    for row, pivot in zip(rref, _pivots(rref)):
        if pivot == cols:
            return None
        x[pivot] = row[cols]
    return x


def subspace_sum(u: FpSubspace, v: FpSubspace) -> FpSubspace:
    _check_compatible(u, v)
    return FpSubspace(u.prime, u.ambient, np.vstack([u.basis, v.basis]))


def intersect(u: FpSubspace, v: FpSubspace) -> FpSubspace:
    """U ∩ V from the kernel of [B_U^T | -B_V^T]."""
    _check_compatible(u, v)
    p = u.prime
    if u.dim == 0 or v.dim == 0:
        return FpSubspace.zero(p, u.ambient)
    stacked = np.hstack([u.basis.T, (-v.basis.T) % p])
    kernel = nullspace(stacked, p)
    vectors = [(row[: u.dim] @ u.basis) % p for row in kernel.basis]
    return FpSubspace.span(vectors, p, u.ambient)


def contains(u: FpSubspace, vector: Sequence[int]) -> bool:
    return u.contains(vector)


def dim(u: FpSubspace) -> int:
    return u.dim


def image(matrix, domain: FpSubspace) -> FpSubspace:
    """M(U) for a subspace U of the column space."""
    m = _reduce(matrix, domain.prime)
    vectors = [(m @ row) % domain.prime for row in domain.basis]
    return FpSubspace.span(vectors, domain.prime, m.shape[0])


class SectionBasis:
    """Ordered F_p basis of an elementary abelian subgroup of a finite group.

    Unless an explicit basis is passed, it is chosen greedily in increasing
    element order, so it only depends on the member set. Lookups go both
    ways through dense tables.
    """

    def __init__(self, group, members: Iterable[int], basis: Optional[Sequence[int]] = None):
        self.group = group
        self.prime = group.prime
        members = sorted(int(m) for m in members)
        member_set = set(members)

        p = self.prime
        coords: Dict[int, List[int]] = {0: []}
        explicit = basis is not None
        candidates = [int(b) for b in basis] if explicit else members
        basis = []
        for candidate in candidates:
            if candidate in coords:
                if explicit:
                    raise HypothesisViolationError(f"basis element {candidate} is dependent on earlier ones")
                continue
            if group.power(candidate, p) != 0:
                raise HypothesisViolationError(f"element {candidate} has order above p in the section")
            if any(group.commutator(candidate, b) != 0 for b in basis):
                raise HypothesisViolationError("member set is not abelian")
            grown: Dict[int, List[int]] = {}
            power = 0
            for k in range(p):
                for element, vec in coords.items():
                    grown[group.multiply(element, power)] = vec + [k]
                power = group.multiply(power, candidate)
            coords = grown
            basis.append(candidate)

        if set(coords) != member_set:
            raise HypothesisViolationError("member set is not an elementary abelian subgroup")

        self.elements = tuple(basis)
        self.dim = len(basis)
        self.members = tuple(members)

        self._lookup = np.full((group.order, self.dim), -1, dtype=np.int64)
        self._decode = np.zeros(p ** self.dim, dtype=np.int64)
        self._place = p ** np.arange(self.dim - 1, -1, -1, dtype=np.int64)
        for element, vec in coords.items():
            vector = np.asarray(vec, dtype=np.int64)
            self._lookup[element] = vector
            self._decode[int(vector @ self._place) if self.dim else 0] = element

    def __contains__(self, element: int) -> bool:
        if self.dim == 0:
            return element == 0
        return bool(self._lookup[element, 0] >= 0)

    def coordinates(self, element: int) -> np.ndarray:
        if self.dim == 0:
            if element != 0:
                raise HypothesisViolationError(f"element {element} is outside the trivial section")
            return np.zeros(0, dtype=np.int64)
        vector = self._lookup[element]
        if vector[0] < 0:
            raise HypothesisViolationError(f"element {element} is outside the section")
        return vector.copy()

    def coordinates_many(self, elements) -> np.ndarray:
        elements = np.asarray(elements, dtype=np.int64)
        vectors = self._lookup[elements]
        if self.dim and np.any(vectors[..., 0] < 0):
            raise HypothesisViolationError("some elements are outside the section")
        return vectors

    def decode(self, vector: Sequence[int]) -> int:
        v = _reduce(vector, self.prime)
        if v.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got {v.shape}")
        return int(self._decode[int(v @ self._place)]) if self.dim else 0

    def decode_many(self, vectors) -> np.ndarray:
        v = _reduce(vectors, self.prime)
        if self.dim == 0:
            return np.zeros(v.shape[:-1], dtype=np.int64)
        return self._decode[v @ self._place]

    def subspace_of(self, members: Iterable[int]) -> FpSubspace:
        """Coordinates of a subgroup of the section, as an FpSubspace."""
        return FpSubspace.span(
            (self.coordinates(m) for m in members), self.prime, self.dim
        )

    def elements_of(self, subspace: FpSubspace) -> List[int]:
        return sorted(self.decode(v) for v in subspace.vectors())
