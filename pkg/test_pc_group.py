"""
Unit tests for power-commutator presentations and collection.
"""

import os
import tempfile
import unittest

import numpy as np
import pytest

from pc_group import (
    PcGroup,
    associativity_violations,
    canonical_text,
    check_consistency,
    load_group,
    parse_presentation,
)
from pgaut_errors import (
    CapExceededError,
    ConsistencyError,
    PresentationSyntaxError,
    WeightingError,
)

D16_TEXT = """
# dihedral of order 16
p = 2
n = 4
g2^2 = g3
g3^2 = g4
[g2,g1] = g3*g4
[g3,g1] = g4
"""

HEISENBERG_TEXT = "p = 3; n = 3; [g2,g1] = g3"

# g1^2 = g2 with [g2,g1] = g3 cannot hold: g1 commutes with its own square
INCONSISTENT_TEXT = """
p = 2
n = 3
g1^2 = g2
[g2,g1] = g3
"""


class TestParsePresentation(unittest.TestCase):
    """Test cases for parse_presentation."""

    def test_headers_and_relations(self):
        """Test parsing headers, power and commutator relations."""
        pres = parse_presentation(D16_TEXT)
        self.assertEqual(pres.prime, 2)
        self.assertEqual(pres.ngens, 4)
        self.assertEqual(pres.order, 16)
        self.assertEqual(pres.power_word(2), ((3, 1),))
        self.assertEqual(pres.commutator_word(2, 1), ((3, 1), (4, 1)))
        self.assertEqual(pres.power_word(1), ())
        self.assertEqual(pres.commutator_word(4, 1), ())

    def test_semicolons_and_angle_power(self):
        """Test ';' separators and the g^<p> spelling."""
        pres = parse_presentation("p = 5; n = 2; g1^5 = g2")
        self.assertEqual(pres.power_word(1), ((2, 1),))
        same = parse_presentation("p = 5; n = 2; g1^p = g2")
        self.assertEqual(canonical_text(pres), canonical_text(same))

    def test_canonical_text_ignores_layout(self):
        """Test that comments, order and trivial relations do not change the canonical form."""
        shuffled = """
        n = 4   # generators
        p = 2
        [g3,g1] = g4
        [g2,g1] = g3*g4
        g3^2 = g4; g2^2 = g3
        g4^2 = 1
        """
        self.assertEqual(
            canonical_text(parse_presentation(shuffled)),
            canonical_text(parse_presentation(D16_TEXT)),
        )
        self.assertEqual(
            canonical_text(parse_presentation(D16_TEXT)),
            "p = 2\nn = 4\ng2^p = g3\ng3^p = g4\n[g2,g1] = g3*g4\n[g3,g1] = g4\n",
        )

    def test_missing_header(self):
        """Test that both headers are required."""
        with self.assertRaises(PresentationSyntaxError):
            parse_presentation("p = 3\n[g2,g1] = g3")

    def test_non_prime(self):
        """Test rejecting a composite p."""
        with self.assertRaises(PresentationSyntaxError):
            parse_presentation("p = 4; n = 2")

    def test_wrong_power_exponent(self):
        """Test that power relations must raise to p."""
        with self.assertRaises(PresentationSyntaxError):
            parse_presentation("p = 3; n = 2; g1^2 = g2")

    def test_commutator_order(self):
        """Test that [gj,gi] needs j > i."""
        with self.assertRaises(WeightingError):
            parse_presentation("p = 3; n = 3; [g1,g2] = g3")

    def test_word_too_shallow(self):
        """Test that a relation word may only use deeper generators."""
        with self.assertRaises(WeightingError):
            parse_presentation("p = 3; n = 3; [g3,g1] = g2")

    def test_word_must_be_increasing(self):
        """Test rejecting words with non-increasing indices."""
        with self.assertRaises(PresentationSyntaxError):
            parse_presentation("p = 3; n = 4; [g2,g1] = g4*g3")

    def test_error_location(self):
        """Test that syntax errors carry the line number."""
        with self.assertRaises(PresentationSyntaxError) as ctx:
            parse_presentation("p = 3\nn = 3\n[g2,g1] = g3\nnonsense here\n")
        self.assertEqual(ctx.exception.line, 4)
        self.assertEqual(ctx.exception.column, 1)

    def test_duplicate_relation(self):
        """Test rejecting a relation given twice."""
        with self.assertRaises(PresentationSyntaxError):
            parse_presentation("p = 3; n = 3; [g2,g1] = g3; [g2,g1] = g3^2")


class TestPcGroup(unittest.TestCase):
    """Test cases for PcGroup class."""

    @classmethod
    def setUpClass(cls):
        cls.d16 = PcGroup.from_text(D16_TEXT)
        cls.heis = PcGroup.from_text(HEISENBERG_TEXT)

    def test_element_indices(self):
        """Test that g_i is p^(n-i) and the identity is 0."""
        self.assertEqual(self.d16.generators, (8, 4, 2, 1))
        self.assertEqual(self.d16.element((0, 0, 0, 0)), 0)
        self.assertEqual(self.d16.element((1, 0, 1, 1)), 11)
        self.assertEqual(self.d16.exponents(11), (1, 0, 1, 1))

    def test_element_rejects_bad_vector(self):
        """Test that element() validates length and range."""
        with self.assertRaises(ValueError):
            self.d16.element((1, 0, 0))
        with self.assertRaises(ValueError):
            self.d16.element((2, 0, 0, 0))

    def test_dihedral_arithmetic(self):
        """Test orders and the defining commutator of D16."""
        s, r = self.d16.generator(1), self.d16.generator(2)
        self.assertEqual(self.d16.element_order(s), 2)
        self.assertEqual(self.d16.element_order(r), 8)
        self.assertEqual(self.d16.exponent, 8)
        self.assertEqual(self.d16.commutator(r, s), self.d16.element((0, 0, 1, 1)))
        # s r s = r^-1
        self.assertEqual(self.d16.conjugate_many(np.array([r]), np.array([s]))[0], self.d16.inverse(r))
        self.assertFalse(self.d16.is_abelian())

    def test_inverses(self):
        """Test that every element times its inverse is the identity."""
        products = self.d16.multiply_many(self.d16.elements, self.d16.inverses)
        self.assertTrue(np.all(products == 0))

    def test_associativity(self):
        """Test exhaustive associativity of collected multiplication."""
        self.assertEqual(associativity_violations(self.d16), 0)
        self.assertEqual(associativity_violations(self.heis), 0)

    def test_left_normed_commutator(self):
        """Test [g2, g1, ..., g1] in the Heisenberg group."""
        g1, g2, g3 = self.heis.generators
        self.assertEqual(self.heis.left_normed_commutator(g2, g1, 0), g2)
        self.assertEqual(self.heis.left_normed_commutator(g2, g1, 1), g3)
        self.assertEqual(self.heis.left_normed_commutator(g2, g1, 2), 0)
        with self.assertRaises(ValueError):
            self.heis.left_normed_commutator(g2, g1, -1)

    def test_format_element(self):
        """Test rendering normal forms as words."""
        self.assertEqual(self.d16.format_element(0), "1")
        self.assertEqual(self.d16.format_element(self.d16.element((1, 0, 1, 1))), "g1*g3*g4")
        self.assertEqual(self.heis.format_element(self.heis.element((0, 2, 1))), "g2^2*g3")

    def test_hard_limit(self):
        """Test that oversized presentations are refused before enumeration."""
        with self.assertRaises(CapExceededError) as ctx:
            PcGroup.from_text("p = 3; n = 10", hard_limit=1000)
        self.assertEqual(ctx.exception.cap, "hard_order_limit")


def test_consistency_passes_for_valid_presentations():
    """Test the overlap family on consistent presentations."""
    for text in (D16_TEXT, HEISENBERG_TEXT):
        report = check_consistency(parse_presentation(text))
        assert report.passed
        assert report.checked > 0
        report.raise_if_failed()


def test_consistency_detects_bad_presentation():
    """Test that an inconsistent presentation is rejected."""
    report = check_consistency(parse_presentation(INCONSISTENT_TEXT))
    assert not report.passed
    assert report.failure is not None
    with pytest.raises(ConsistencyError) as exc:
        report.raise_if_failed()
    assert exc.value.overlap[0] == report.failure.kind


def test_load_group_from_file():
    """Test reading a presentation file from disk."""
    with tempfile.NamedTemporaryFile("w", suffix=".pc", delete=False) as f:
        f.write(D16_TEXT)
        path = f.name
    try:
        group = load_group(path)
        assert group.order == 16
    finally:
        os.unlink(path)


def test_load_group_refuses_inconsistent_file():
    """Test that load_group checks consistency by default."""
    with tempfile.NamedTemporaryFile("w", suffix=".pc", delete=False) as f:
        f.write(INCONSISTENT_TEXT)
        path = f.name
    try:
        with pytest.raises(ConsistencyError):
            load_group(path)
        assert load_group(path, check=False).order == 8
    finally:
        os.unlink(path)
