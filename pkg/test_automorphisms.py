"""
Tests for automorphism construction, verification and search.
"""

import os
import unittest

import numpy as np
import pytest

from analysis_config import AnalysisConfig
from automorphisms import (
    Automorphism,
    WordTable,
    brute_force_search,
    case_b_construct,
    extend_homomorphism,
    find_noninner_derivation,
    is_inner,
    is_inner_via_derivation,
    lift_derivation,
    search_shifts,
)
from derivations import Derivation, build_module_action, derivation_space, inner_derivation
from group_structure import centralizer, derived_subgroup
from pc_group import PcGroup
from pgaut_errors import HypothesisViolationError, VerificationError
from pgroup_corpus import get_entry, load_corpus

D16_TEXT = "p = 2; n = 4; g2^2 = g3; g3^2 = g4; [g2,g1] = g3*g4; [g3,g1] = g4"

# s = g1, r = g2, r^5 = g2*g4
S, R, R5 = 8, 4, 5

# a = g1 with a^3 = c^-1, b = g2 with b^3 = k = g3, c = g4 = [b,a] with c^3 = z = g5.
# k lies in Z_2 \ Z, has order 3 and is not in G' = <c>.
CASE_B_TEXT = (
    "p = 3; n = 5; g1^3 = g4^2*g5^2; g2^3 = g3; g4^3 = g5; "
    "[g2,g1] = g4; [g3,g1] = g5; [g4,g2] = g5"
)

LIFT_ENTRIES = [
    entry.name for entry in load_corpus()
    if entry.order <= 625 or os.getenv("PGAUT_RUN_LARGE_CORPUS")
]


class TestAutomorphism(unittest.TestCase):
    """Test cases for Automorphism class."""

    @classmethod
    def setUpClass(cls):
        cls.group = PcGroup.from_text(D16_TEXT)
        cls.action = build_module_action(cls.group)

    def test_identity(self):
        """Test the identity map."""
        identity = Automorphism.identity(self.group)
        self.assertTrue(identity.is_identity())
        self.assertEqual(identity.verify(), 1)

    def test_conjugation_is_inner(self):
        """Test that conjugation by s has order 2 and is recognized as inner."""
        alpha = Automorphism.conjugation(self.group, S)
        self.assertEqual(alpha.verify(), 2)
        inner, g = is_inner(self.group, alpha)
        self.assertTrue(inner)
        self.assertEqual(
            Automorphism.conjugation(self.group, g).generator_images, alpha.generator_images
        )
        self.assertTrue(alpha.compose(alpha).is_identity())

    def test_outer_rotation_map(self):
        """Test r ↦ r^5, s ↦ s: order 2, fixes Φ, not inner."""
        alpha = extend_homomorphism(self.group, [S, R], [S, R5])
        self.assertIsNotNone(alpha)
        self.assertEqual(alpha.verify(), 2)
        self.assertEqual(alpha(R), R5)
        self.assertTrue(alpha.fixes(self.action.frattini))
        self.assertFalse(is_inner(self.group, alpha)[0])
        self.assertEqual(alpha.generator_image_exponents()[1], [0, 1, 0, 1])

    def test_extension_failure(self):
        """Test that images that do not define an automorphism give None."""
        self.assertIsNone(extend_homomorphism(self.group, [S, R], [S, S]))
        self.assertIsNone(extend_homomorphism(self.group, [S, R], [R, R]))

    def test_word_table_needs_generators(self):
        """Test that a non-generating list is refused."""
        with self.assertRaises(HypothesisViolationError):
            WordTable(self.group, [R])

    def test_verify_rejects_broken_map(self):
        """Test that a corrupted permutation fails verification."""
        full_map = self.group.elements.copy()
        full_map[[S, R]] = full_map[[R, S]]
        with self.assertRaises(VerificationError) as ctx:
            Automorphism(self.group, full_map).verify()
        self.assertEqual(ctx.exception.check, "automorphism.homomorphism")

        moved = self.group.elements.copy()
        moved[0], moved[1] = 1, 0
        with self.assertRaises(VerificationError) as ctx:
            Automorphism(self.group, moved).verify()
        self.assertEqual(ctx.exception.check, "automorphism.identity")


class TestDerivationLift(unittest.TestCase):
    """Test cases for lifting derivations to automorphisms."""

    @classmethod
    def setUpClass(cls):
        cls.group = PcGroup.from_text(D16_TEXT)
        cls.action = build_module_action(cls.group)

    def test_lift_outer_derivation(self):
        """Test that δ(r) = r^4 lifts to r ↦ r^5."""
        delta = Derivation(((0,), (1,)))
        alpha = lift_derivation(self.action, delta)
        self.assertEqual(alpha(S), S)
        self.assertEqual(alpha(R), R5)
        self.assertEqual(alpha.source, "derivation")
        self.assertFalse(is_inner_via_derivation(self.action, delta))

    def test_lift_zero_derivation(self):
        """Test that the zero derivation lifts to the identity."""
        alpha = lift_derivation(self.action, Derivation(((0,), (0,))))
        self.assertTrue(alpha.is_identity())

    def test_lift_inner_derivation(self):
        """Test that an inner derivation lifts to an inner automorphism."""
        delta = Derivation(((1,), (0,)))
        self.assertTrue(is_inner_via_derivation(self.action, delta))
        self.assertTrue(is_inner(self.group, lift_derivation(self.action, delta))[0])

    def test_find_noninner_derivation(self):
        """Test that level 2 has a derivation outside Ider(A*)."""
        delta = find_noninner_derivation(self.action, 2)
        self.assertEqual(delta, Derivation(((0,), (1,))))


@pytest.fixture(scope="module")
def d16():
    group = PcGroup.from_text(D16_TEXT)
    return group, build_module_action(group)


def test_frattini_fixed_search(d16):
    """Test that the restricted family finds r ↦ r^5 first."""
    group, action = d16
    shifts = search_shifts(group, action, require_frattini_fixed=True)
    assert shifts.order == 2
    alpha, report = brute_force_search(group, True, action)
    assert alpha is not None
    assert alpha.generator_images[:2] == (S, R5)
    assert alpha.source == "brute-force:frattini-fixed"
    assert report.found and not report.truncated
    assert report.candidates_total == 4


def test_general_search(d16):
    """Test the general family over all shifts c in G."""
    group, action = d16
    assert search_shifts(group, action, require_frattini_fixed=False).order == 16
    alpha, report = brute_force_search(group, False, action)
    assert alpha is not None
    assert alpha.order() == 2
    assert not is_inner(group, alpha)[0]
    assert report.to_dict()["family"] == "general"


def test_general_search_respects_caps(d16):
    """Test that the general family is skipped above the order cap."""
    group, action = d16
    alpha, report = brute_force_search(group, False, action, AnalysisConfig(brute_force_full_max_order=8))
    assert alpha is None
    assert report.truncated
    assert report.candidates_tried == 0


def test_search_candidate_cap(d16):
    """Test truncation by max_search_candidates."""
    group, action = d16
    alpha, report = brute_force_search(group, True, action, AnalysisConfig(max_search_candidates=1))
    assert alpha is None
    assert report.truncated
    assert report.candidates_tried == 1


def test_case_b_preconditions(d16):
    """Test that the case-b construction is refused outside its hypotheses."""
    group, action = d16
    with pytest.raises(HypothesisViolationError):
        case_b_construct(group, action)


def test_automorphism_map_is_read_only(d16):
    """Test that the stored permutation cannot be modified."""
    group, _ = d16
    alpha = Automorphism.identity(group)
    with pytest.raises(ValueError):
        alpha.full_map[0] = 1
    np.testing.assert_array_equal(alpha.full_map, group.elements)


def test_case_b_without_candidates():
    """Test C3 wr C3, where Z_2 \\ Z lies inside G' and no k exists."""
    group = get_entry("W81").build()
    action = build_module_action(group)
    derived = derived_subgroup(group)
    z2 = action.z_level(2)
    assert all(derived.mask[k] for k in z2.members if not action.center.mask[k])
    assert case_b_construct(group, action) is None


def test_case_b_construction():
    """Test β(u x^i) = u (xk)^i on a group with k in Z_2 \\ Z outside G'."""
    group = PcGroup.from_text(CASE_B_TEXT)
    action = build_module_action(group)
    x, k = group.generator(1), group.generator(3)
    xk = group.multiply(x, k)
    assert group.power(xk, 3) == group.power(x, 3)

    beta = case_b_construct(group, action)
    assert beta is not None
    assert beta.source == "case-b"
    assert beta(x) == xk
    assert beta.fixes(centralizer(group, [k]))
    assert beta.verify() == 3
    assert beta.fixes(action.frattini)
    assert not is_inner(group, beta)[0]


@pytest.mark.parametrize("name", LIFT_ENTRIES)
def test_lift_is_inner_exactly_for_inner_derivations(name):
    """Test that a lift is inner iff its derivation lies in Ider(Ḡ, A*)."""
    group = get_entry(name).build()
    action = build_module_action(group)
    if not action.standing_hypothesis:
        pytest.skip(f"{name}: C_G(Z(Φ)) != Φ")

    for delta in derivation_space(action).basis:
        alpha = lift_derivation(action, delta)
        assert is_inner(group, alpha, action.center)[0] == is_inner_via_derivation(action, delta)
        if not delta.is_zero():
            assert alpha.order() == group.prime

    rng = np.random.default_rng(20240521)
    for a in rng.choice(action.frattini_center.members, size=50):
        lifted = lift_derivation(action, inner_derivation(action, int(a)))
        np.testing.assert_array_equal(lifted.full_map, Automorphism.conjugation(group, int(a)).full_map)
