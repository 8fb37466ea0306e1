"""
Unit tests for subgroup invariants.
"""

import unittest

import numpy as np
import pytest

from group_structure import (
    Subgroup,
    center,
    closure,
    derived_subgroup,
    frattini,
    gamma3,
    intersection,
    is_cyclic,
    is_direct_factor,
    is_normal,
    min_generators,
    nilpotency_class,
    omega1,
    omega1_star,
    quotient,
    rank,
    rank_upper_bound,
    relative_min_generators,
    upper_central_series,
)
from pc_group import PcGroup
from pgaut_errors import CapExceededError, NotNormalError

D16_TEXT = "p = 2; n = 4; g2^2 = g3; g3^2 = g4; [g2,g1] = g3*g4; [g3,g1] = g4"
HEISENBERG_TEXT = "p = 3; n = 3; [g2,g1] = g3"
W81_TEXT = "p = 3; n = 4; [g2,g1] = g3; [g3,g1] = g4"


class TestDihedralInvariants(unittest.TestCase):
    """Test cases for invariants of the dihedral group of order 16."""

    @classmethod
    def setUpClass(cls):
        cls.group = PcGroup.from_text(D16_TEXT)
        cls.s = cls.group.generator(1)
        cls.r = cls.group.generator(2)

    def test_center(self):
        """Test that Z(D16) = <r^4>."""
        z = center(self.group)
        self.assertEqual(z.order, 2)
        self.assertIn(self.group.power(self.r, 4), z)

    def test_derived_and_frattini(self):
        """Test that G' = Φ(G) = <r^2> and γ3 = <r^4>."""
        r2 = closure(self.group, [self.group.power(self.r, 2)])
        self.assertEqual(derived_subgroup(self.group), r2)
        self.assertEqual(frattini(self.group), r2)
        self.assertEqual(gamma3(self.group), center(self.group))
        self.assertEqual(min_generators(self.group), 2)

    def test_upper_central_series(self):
        """Test Z_0 < Z_1 < Z_2 < Z_3 = G."""
        series = upper_central_series(self.group)
        self.assertEqual([z.order for z in series], [1, 2, 4, 16])
        self.assertEqual(nilpotency_class(self.group, series), 3)

    def test_omega1(self):
        """Test that the involutions generate the whole group."""
        self.assertEqual(omega1(self.group).order, 16)
        rotations = closure(self.group, [self.r])
        self.assertEqual(omega1(self.group, rotations).order, 2)

    def test_cyclic_and_normal(self):
        """Test cyclicity and normality of small subgroups."""
        rotations = closure(self.group, [self.r])
        reflection = closure(self.group, [self.s])
        self.assertTrue(is_cyclic(self.group, rotations))
        self.assertTrue(is_normal(self.group, rotations))
        self.assertFalse(is_normal(self.group, reflection))
        self.assertFalse(is_cyclic(self.group, Subgroup.whole(self.group)))
        self.assertTrue(intersection(self.group, rotations, reflection).is_trivial())

    def test_quotient(self):
        """Test G/Z(G) and the refusal of non-normal quotients."""
        bar = quotient(self.group, center(self.group))
        self.assertEqual(bar.order, 8)
        self.assertEqual(nilpotency_class(bar), 2)
        self.assertEqual(bar.preimage(Subgroup.trivial(bar)), center(self.group))
        with self.assertRaises(NotNormalError):
            quotient(self.group, closure(self.group, [self.s]))

    def test_rank(self):
        """Test exact rank against the surrogate bound."""
        self.assertEqual(rank(self.group), 2)
        bar = quotient(self.group, center(self.group))
        self.assertLessEqual(rank(bar), rank_upper_bound(self.group))
        self.assertEqual(rank_upper_bound(self.group), 3)

    def test_relative_min_generators(self):
        """Test d(G/G') for D16."""
        whole = Subgroup.whole(self.group)
        self.assertEqual(relative_min_generators(self.group, whole, derived_subgroup(self.group)), 2)


def test_from_members_rejects_non_subgroup():
    """Test that from_members insists on closure."""
    group = PcGroup.from_text(HEISENBERG_TEXT)
    with pytest.raises(ValueError):
        Subgroup.from_members(group, [0, group.generator(1)])


def test_heisenberg_class_two():
    """Test the class and centre of the Heisenberg group."""
    group = PcGroup.from_text(HEISENBERG_TEXT)
    assert nilpotency_class(group) == 2
    assert center(group) == derived_subgroup(group)
    assert min_generators(group) == 2


def test_wreath_product_class_three():
    """Test C3 wr C3: class 3 with a non-cyclic Frattini subgroup."""
    group = PcGroup.from_text(W81_TEXT)
    assert nilpotency_class(group) == 3
    assert center(group).order == 3
    assert frattini(group).order == 9
    assert gamma3(group).order == 3


def test_rank_cap():
    """Test that exact rank refuses groups above the cap."""
    group = PcGroup.from_text("p = 2; n = 3")
    with pytest.raises(CapExceededError):
        rank(group, exponent_cap=2)
    assert rank(group, exponent_cap=3) == 3


def test_direct_factor_by_purity():
    """Test direct factors of C9 x C3."""
    group = PcGroup.from_text("p = 3; n = 3; g1^3 = g2")
    whole = Subgroup.whole(group)
    g1, g2, g3 = group.generators
    assert is_direct_factor(group, whole, closure(group, [g3]))
    assert is_direct_factor(group, whole, closure(group, [group.multiply(g1, g3)]))
    assert not is_direct_factor(group, whole, closure(group, [g2]))
    assert is_direct_factor(group, whole, Subgroup.trivial(group))
    assert is_direct_factor(group, whole, whole)


def test_direct_factor_needs_abelian():
    """Test the abelian precondition of the direct factor test."""
    group = PcGroup.from_text(HEISENBERG_TEXT)
    with pytest.raises(ValueError):
        is_direct_factor(group, Subgroup.whole(group), center(group))


def test_subgroup_members_sorted():
    """Test that member arrays are sorted and masks agree."""
    group = PcGroup.from_text(D16_TEXT)
    z = center(group)
    np.testing.assert_array_equal(z.members, np.flatnonzero(z.mask))
    assert z <= Subgroup.whole(group)
    assert z.log_order == 1


def test_omega1_star():
    """Test ⟨x : x^p ∈ Z⟩ for several choices of Z."""
    group = PcGroup.from_text("p = 3; n = 3; g1^3 = g2")
    g2 = group.generator(2)
    trivial = Subgroup.trivial(group)
    assert omega1_star(group, trivial) == omega1(group)
    assert omega1_star(group, trivial).order == 9
    assert omega1_star(group, closure(group, [g2])).order == 27

    dihedral = PcGroup.from_text(D16_TEXT)
    assert omega1_star(dihedral).order == 16
