"""
Power-Commutator Presentations for pgaut

This module parses power-commutator presentations of finite p-groups, builds
their full element tables by collection from the left, and checks
presentation consistency with the standard overlap family.

Elements are plain integers: the position of the normal form
g1^e1 * ... * gn^en in lexicographic order, so the identity is 0 and the
pc generator g_i is p^(n-i). Arithmetic on numpy arrays of such indices is
vectorized; scalar helpers wrap the array versions.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from pgaut_errors import (
    CapExceededError,
    ConsistencyError,
    PresentationSyntaxError,
    WeightingError,
)

logger = logging.getLogger(__name__)

# ((generator, exponent), ...) with 1-based generators in increasing order
Word = Tuple[Tuple[int, int], ...]

DEFAULT_HARD_LIMIT = 20000


@dataclass(frozen=True)
class PcPresentation:
    """A power-commutator presentation with all relative orders equal to p."""

    prime: int
    ngens: int
    power_relations: Dict[int, Word] = field(default_factory=dict)
    commutator_relations: Dict[Tuple[int, int], Word] = field(default_factory=dict)

    @property
    def order(self) -> int:
        return self.prime ** self.ngens

    def power_word(self, i: int) -> Word:
        """Word equal to g_i^p."""
        return self.power_relations.get(i, ())

    def commutator_word(self, j: int, i: int) -> Word:
        """Word equal to [g_j, g_i] for j > i."""
        return self.commutator_relations.get((j, i), ())


def _is_prime(value: int) -> bool:
    if value < 2:
        return False
    return all(value % d for d in range(2, int(value ** 0.5) + 1))


_HEADER_RE = re.compile(r"^([pn])\s*=\s*(\d+)$")
_POWER_RE = re.compile(r"^g(\d+)\s*\^\s*(p|\d+)\s*=\s*(.+)$")
_COMM_RE = re.compile(r"^\[\s*g(\d+)\s*,\s*g(\d+)\s*\]\s*=\s*(.+)$")
_FACTOR_RE = re.compile(r"^g(\d+)(?:\s*\^\s*(\d+))?$")


def _statements(text: str) -> Iterable[Tuple[str, int, int]]:
    """Yield (statement, line, column) for every non-empty statement."""
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        offset = 0
        for chunk in line.split(";"):
            stripped = chunk.strip()
            if stripped:
                column = offset + (len(chunk) - len(chunk.lstrip())) + 1
                yield stripped, line_no, column
            offset += len(chunk) + 1


def _parse_word(
    text: str, prime: int, ngens: int, floor: int, line: int, column: int
) -> Word:
    """Parse a relation word whose generators must all exceed `floor`."""
    text = text.strip()
    if text == "1":
        return ()

    word: List[Tuple[int, int]] = []
    last = 0
    for factor in text.split("*"):
        match = _FACTOR_RE.match(factor.strip())
        if not match:
            raise PresentationSyntaxError(f"malformed word factor '{factor.strip()}'", line, column)
        gen = int(match.group(1))
        exponent = int(match.group(2)) if match.group(2) is not None else 1
        if not 1 <= gen <= ngens:
            raise PresentationSyntaxError(f"generator g{gen} out of range 1..{ngens}", line, column)
        if not 0 <= exponent < prime:
            raise PresentationSyntaxError(
                f"exponent {exponent} of g{gen} out of range [0, {prime})", line, column
            )
        if gen <= floor:
            raise WeightingError(
                f"word uses g{gen}, but only generators above g{floor} are allowed", line, column
            )
        if gen <= last:
            raise PresentationSyntaxError("word indices must be strictly increasing", line, column)
        last = gen
        if exponent:
            word.append((gen, exponent))
    return tuple(word)


def parse_presentation(text: str) -> PcPresentation:
    """Parse presentation-file contents.

    Statements are separated by newlines or ';'. Headers `p = <prime>` and
    `n = <int>` are required; relations not listed default to the identity.

    Raises:
        PresentationSyntaxError: malformed text, with line and column.
        WeightingError: a relation refers to a generator that is too shallow.
    """
    headers: Dict[str, int] = {}
    pending: List[Tuple[str, int, int]] = []

    for statement, line, column in _statements(text):
        header = _HEADER_RE.match(statement)
        if header:
            key = header.group(1)
            if key in headers:
                raise PresentationSyntaxError(f"duplicate header '{key}'", line, column)
            headers[key] = int(header.group(2))
        else:
            pending.append((statement, line, column))

    if "p" not in headers or "n" not in headers:
        raise PresentationSyntaxError("missing header: both 'p = <prime>' and 'n = <int>' are required")
    prime, ngens = headers["p"], headers["n"]
    if not _is_prime(prime):
        raise PresentationSyntaxError(f"p = {prime} is not prime")
    if ngens < 1:
        raise PresentationSyntaxError("n must be at least 1")

    powers: Dict[int, Word] = {}
    commutators: Dict[Tuple[int, int], Word] = {}

    for statement, line, column in pending:
        power = _POWER_RE.match(statement)
        comm = _COMM_RE.match(statement)
        if power:
            i = int(power.group(1))
            if not 1 <= i <= ngens:
                raise PresentationSyntaxError(f"generator g{i} out of range 1..{ngens}", line, column)
            if power.group(2) != "p" and int(power.group(2)) != prime:
                raise PresentationSyntaxError(
                    f"power relation must raise g{i} to p = {prime}", line, column
                )
            if i in powers:
                raise PresentationSyntaxError(f"duplicate power relation for g{i}", line, column)
            powers[i] = _parse_word(power.group(3), prime, ngens, i, line, column)
        elif comm:
            j, i = int(comm.group(1)), int(comm.group(2))
            for gen in (j, i):
                if not 1 <= gen <= ngens:
                    raise PresentationSyntaxError(f"generator g{gen} out of range 1..{ngens}", line, column)
            if j <= i:
                raise WeightingError(
                    f"commutator [g{j},g{i}] must have its first index larger", line, column
                )
            if (j, i) in commutators:
                raise PresentationSyntaxError(f"duplicate relation for [g{j},g{i}]", line, column)
            commutators[(j, i)] = _parse_word(comm.group(3), prime, ngens, j, line, column)
        else:
            raise PresentationSyntaxError(f"unrecognized statement '{statement}'", line, column)

    return PcPresentation(
        prime=prime,
        ngens=ngens,
        power_relations={k: v for k, v in sorted(powers.items()) if v},
        commutator_relations={k: v for k, v in sorted(commutators.items()) if v},
    )


def format_word(word: Word) -> str:
    if not word:
        return "1"
    return "*".join(f"g{g}" if e == 1 else f"g{g}^{e}" for g, e in word)


def canonical_text(pres: PcPresentation) -> str:
    """Canonical form: headers, then sorted non-trivial relations, one per line."""
    lines = [f"p = {pres.prime}", f"n = {pres.ngens}"]
    for i in sorted(pres.power_relations):
        lines.append(f"g{i}^p = {format_word(pres.power_relations[i])}")
    for j, i in sorted(pres.commutator_relations):
        lines.append(f"[g{j},g{i}] = {format_word(pres.commutator_relations[(j, i)])}")
    return "\n".join(lines) + "\n"


class FiniteGroup:
    """Shared arithmetic for finite p-groups whose elements are 0..order-1.

    Subclasses provide `multiply_many`; everything else is derived from it.
    The identity is always element 0.
    """

    prime: int
    order: int
    generators: Tuple[int, ...]
    identity: int = 0

    def multiply_many(self, a, b) -> np.ndarray:
        raise NotImplementedError

    def multiply(self, a: int, b: int) -> int:
        return int(self.multiply_many(np.array([a]), np.array([b]))[0])

    @property
    def elements(self) -> np.ndarray:
        return np.arange(self.order, dtype=np.int64)

    def power_many(self, a, m: int) -> np.ndarray:
        """Elementwise a^m for m >= 0 by repeated squaring."""
        base = np.asarray(a, dtype=np.int64)
        result = np.zeros_like(base)
        while m > 0:
            if m & 1:
                result = self.multiply_many(result, base)
            base = self.multiply_many(base, base)
            m >>= 1
        return result

    def power(self, a: int, m: int) -> int:
        if m < 0:
            return self.power(self.inverse(a), -m)
        return int(self.power_many(np.array([a]), m)[0])

    @cached_property
    def exponent(self) -> int:
        """Exponent of the group (a power of p)."""
        current = self.elements
        value = 1
        while np.any(current != 0):
            current = self.power_many(current, self.prime)
            value *= self.prime
        return value

    @cached_property
    def inverses(self) -> np.ndarray:
        return self.power_many(self.elements, self.exponent - 1)

    def inverse(self, a: int) -> int:
        return int(self.inverses[a])

    def element_order(self, a: int) -> int:
        value, current = 1, a
        while current != 0:
            current = self.power(current, self.prime)
            value *= self.prime
        return value

    def commutator_many(self, a, b) -> np.ndarray:
        """[a, b] = a^-1 b^-1 a b, elementwise."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        left = self.multiply_many(self.inverses[a], self.inverses[b])
        return self.multiply_many(left, self.multiply_many(a, b))

    def commutator(self, a: int, b: int) -> int:
        return int(self.commutator_many(np.array([a]), np.array([b]))[0])

    def left_normed_commutator(self, a: int, x: int, count: int) -> int:
        """[a, x, ..., x] with `count` copies of x; count 0 gives a."""
        if count < 0:
            raise ValueError("count must be non-negative")
        for _ in range(count):
            a = self.commutator(a, x)
        return a

    def conjugate_many(self, a, g) -> np.ndarray:
        """a^g = g^-1 a g, elementwise."""
        g = np.asarray(g, dtype=np.int64)
        return self.multiply_many(self.inverses[g], self.multiply_many(a, g))

    def is_abelian(self) -> bool:
        for x, y in itertools.combinations(self.generators, 2):
            if self.commutator(x, y) != 0:
                return False
        return True


class PcGroup(FiniteGroup):
    """A finite p-group given by a power-commutator presentation.

    The constructor enumerates all p^n normal forms and precomputes the
    element-times-generator table; products are then table lookups.
    """

    def __init__(self, presentation: PcPresentation, hard_limit: int = DEFAULT_HARD_LIMIT):
        if presentation.order > hard_limit:
            raise CapExceededError("hard_order_limit", hard_limit, presentation.order)

        self.presentation = presentation
        self.prime = presentation.prime
        self.ngens = presentation.ngens
        self.order = presentation.order

        p, n = self.prime, self.ngens
        self.exponent_matrix = np.array(list(itertools.product(range(p), repeat=n)), dtype=np.int64)
        self._place = p ** np.arange(n - 1, -1, -1, dtype=np.int64)
        self.generators = tuple(int(v) for v in self._place)

        self.gen_table = np.full((self.order, n), -1, dtype=np.int64)
        self._collect_table()
        logger.info("Built pc group of order %d^%d (%d elements)", p, n, self.order)

    @classmethod
    def from_text(cls, text: str, hard_limit: int = DEFAULT_HARD_LIMIT) -> "PcGroup":
        return cls(parse_presentation(text), hard_limit=hard_limit)

    def _apply_word(self, values: np.ndarray, word: Word) -> np.ndarray:
        for gen, exponent in word:
            for _ in range(exponent):
                values = self.gen_table[values, gen - 1]
        return values

    def _collect_table(self) -> None:
        """Fill gen_table[x, k] = x * g_{k+1}, deepest generator first.

        x * g_k = g_1^e1..g_k^(e_k+1) * prod_{j>k} (g_j [g_j, g_k])^e_j, and an
        overflowing g_k^p is replaced by its power word. Every word applied
        only involves generators deeper than g_k, whose columns are done.
        """
        p, n = self.prime, self.ngens
        pres = self.presentation
        exps = self.exponent_matrix

        for k in reversed(range(n)):
            prefix = exps.copy()
            prefix[:, k] += 1
            prefix[:, k + 1:] = 0
            overflow = prefix[:, k] == p
            prefix[overflow, k] = 0
            values = prefix @ self._place

            if overflow.any():
                values[overflow] = self._apply_word(values[overflow], pres.power_word(k + 1))

            for j in range(k + 1, n):
                conjugated = ((j + 1, 1),) + pres.commutator_word(j + 1, k + 1)
                for t in range(1, p):
                    mask = exps[:, j] >= t
                    if not mask.any():
                        break
                    values[mask] = self._apply_word(values[mask], conjugated)

            self.gen_table[:, k] = values

    def multiply_many(self, a, b) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        shape = a.shape
        result = a.reshape(-1).copy()
        exps = self.exponent_matrix[b.reshape(-1)]
        for k in range(self.ngens):
            column = exps[:, k]
            for t in range(1, self.prime):
                mask = column >= t
                if not mask.any():
                    break
                result[mask] = self.gen_table[result[mask], k]
        return result.reshape(shape)

    def generator(self, i: int) -> int:
        """Element index of the pc generator g_i (1-based)."""
        return int(self._place[i - 1])

    def element(self, exponents: Sequence[int]) -> int:
        if len(exponents) != self.ngens or any(not 0 <= e < self.prime for e in exponents):
            raise ValueError(f"not a normal form over {self.ngens} generators mod {self.prime}: {exponents}")
        return int(np.dot(np.asarray(exponents, dtype=np.int64), self._place))

    def exponents(self, a: int) -> Tuple[int, ...]:
        return tuple(int(e) for e in self.exponent_matrix[a])

    def word_element(self, word: Word) -> int:
        return int(self._apply_word(np.array([0]), word)[0])

    def format_element(self, a: int) -> str:
        exps = self.exponents(a)
        return format_word(tuple((i + 1, e) for i, e in enumerate(exps) if e))


@dataclass(frozen=True)
class Overlap:
    """One overlap test: kind plus the generator indices involved."""

    kind: str
    generators: Tuple[int, ...]

    def describe(self) -> str:
        names = ",".join(f"g{g}" for g in self.generators)
        return f"{self.kind}({names})"


@dataclass
class ConsistencyReport:
    passed: bool
    checked: int
    failure: Optional[Overlap] = None

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise ConsistencyError(
                f"inconsistent presentation: overlap {self.failure.describe()} collects differently",
                overlap=(self.failure.kind, self.failure.generators),
            )


def check_consistency(pres: PcPresentation, group: Optional[PcGroup] = None) -> ConsistencyReport:
    """Run the standard overlap family and report the first failing overlap.

    For k > j > i: g_k(g_j g_i) vs (g_k g_j)g_i. For j > i: g_j^p g_i vs
    g_j^(p-1)(g_j g_i) and g_j(g_i^p) vs (g_j g_i)g_i^(p-1). For every i:
    g_i^p g_i vs g_i g_i^p.
    """
    group = group or PcGroup(pres)
    p, n = pres.prime, pres.ngens
    gen = group.generator
    mul = group.multiply

    def top_power(i: int, e: int) -> int:
        exps = [0] * n
        exps[i - 1] = e
        return group.element(exps)

    def power_elem(i: int) -> int:
        return group.word_element(pres.power_word(i))

    tests: List[Tuple[Overlap, int, int]] = []
    checked = 0

    def run(overlap: Overlap, lhs: int, rhs: int) -> Optional[ConsistencyReport]:
        nonlocal checked
        checked += 1
        if lhs != rhs:
            logger.info("Consistency failure at %s", overlap.describe())
            return ConsistencyReport(passed=False, checked=checked, failure=overlap)
        return None

    for k in range(1, n + 1):
        for j in range(1, k):
            for i in range(1, j):
                failed = run(
                    Overlap("associativity", (k, j, i)),
                    mul(gen(k), mul(gen(j), gen(i))),
                    mul(mul(gen(k), gen(j)), gen(i)),
                )
                if failed:
                    return failed

    for j in range(1, n + 1):
        for i in range(1, j):
            failed = run(
                Overlap("power-left", (j, i)),
                mul(power_elem(j), gen(i)),
                mul(top_power(j, p - 1), mul(gen(j), gen(i))),
            )
            if failed:
                return failed
            failed = run(
                Overlap("power-right", (j, i)),
                mul(gen(j), power_elem(i)),
                mul(mul(gen(j), gen(i)), top_power(i, p - 1)),
            )
            if failed:
                return failed

    for i in range(1, n + 1):
        failed = run(
            Overlap("power-power", (i,)),
            mul(power_elem(i), gen(i)),
            mul(gen(i), power_elem(i)),
        )
        if failed:
            return failed

    return ConsistencyReport(passed=True, checked=checked)


def associativity_violations(group: FiniteGroup, limit: Optional[int] = None) -> int:
    """Count triples (a, b, c) with (ab)c != a(bc); exhaustive oracle for small groups."""
    elements = group.elements if limit is None else group.elements[:limit]
    violations = 0
    b, c = np.meshgrid(group.elements, group.elements, indexing="ij")
    b, c = b.reshape(-1), c.reshape(-1)
    bc = group.multiply_many(b, c)
    for a in elements:
        left = group.multiply_many(group.multiply_many(np.full_like(b, a), b), c)
        right = group.multiply_many(np.full_like(b, a), bc)
        violations += int(np.count_nonzero(left != right))
    return violations


def load_group(path: str, hard_limit: int = DEFAULT_HARD_LIMIT, check: bool = True) -> PcGroup:
    """Read a presentation file, build the group and (optionally) insist on consistency."""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    pres = parse_presentation(text)
    group = PcGroup(pres, hard_limit=hard_limit)
    if check:
        check_consistency(pres, group).raise_if_failed()
    return group
