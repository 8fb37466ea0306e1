"""
Routing a p-group through the existence criteria for non-inner
automorphisms of order p, and assembling a verified certificate.

analyze() never reports a criterion without an explicit witness that has
just passed full verification; when every construction fails within the
configured caps the certificate says NONE-FOUND and the transcript
records the bounds that were searched.
"""

import logging
from dataclasses import dataclass
from math import comb
from typing import Any, Dict, List, Optional, Tuple

from analysis_config import AnalysisConfig
from automorphisms import (
    Automorphism,
    brute_force_search,
    case_b_construct,
    extend_homomorphism,
    is_inner,
    lift_derivation,
)
from certificate import (
    CRITERIA,
    Certificate,
    GroupProfile,
    HypothesisFlags,
    TranscriptEntry,
    Witness,
    group_id,
    map_digest,
)
from derivations import (
    ModuleAction,
    build_module_action,
    derivation_space,
    inner_levels,
    inner_space,
    trace_from_matrix,
)
from group_structure import (
    derived_subgroup,
    intersection,
    is_cyclic,
    is_direct_factor,
    min_generators,
    omega1,
    quotient,
    rank,
    rank_upper_bound,
)
from pc_group import PcGroup
from pgaut_errors import (
    AbelianGroupError,
    CapExceededError,
    HypothesisViolationError,
    VerificationError,
)

logger = logging.getLogger(__name__)

THEOREM_TAGS = (
    "Thm3.4(1)", "Thm3.4(2)", "Thm3.4(3)", "Thm3.4(4)", "Thm3.4(5)",
    "Thm3.5(1)", "Thm3.5(2)", "Lem4.2", "Thm4.5(1)", "Thm4.5(2)", "Thm4.6",
)
# every tag except the fallbacks promises an automorphism fixing Φ(G) elementwise
FRATTINI_FIXING_TAGS = THEOREM_TAGS + ("Thm4.4-caseB", "Lem3.3(4)")


class Transcript:
    """Ordered record of the checks performed during one analysis."""

    def __init__(self):
        self.entries: List[TranscriptEntry] = []

    def record(self, step: str, outcome: str, **detail: Any) -> None:
        logger.debug("%s: %s %s", step, outcome, detail or "")
        self.entries.append(TranscriptEntry(step=step, outcome=outcome, detail=detail))


@dataclass
class VerificationOutcome:
    ok: bool
    check: Optional[str] = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def quotient_rank(group: PcGroup, action: ModuleAction, config: AnalysisConfig) -> Tuple[Optional[int], bool]:
    """rk(G/Z(G)) exactly under the cap, else the class-3 upper bound (or None)."""
    bar = quotient(group, action.center)
    if bar.order <= group.prime ** config.rank_exponent_cap:
        return rank(bar, config.rank_exponent_cap), True
    if action.nilpotency_class <= 3:
        # G'Z/Z is central in G/Z here, so the class-2 bound applies
        return rank_upper_bound(group, action.center), False
    logger.info("Rank of G/Z(G) not computed: order %d above cap, class %d", bar.order, action.nilpotency_class)
    return None, False


def compute_profile(
    group: PcGroup, action: Optional[ModuleAction] = None, config: Optional[AnalysisConfig] = None
) -> GroupProfile:
    """Structure invariants recorded in (and re-checked from) every certificate."""
    config = config or AnalysisConfig()
    action = action or build_module_action(group)
    z = action.center
    zphi = action.frattini_center
    cl = action.nilpotency_class
    d = len(action.transversal)
    rk, exact = quotient_rank(group, action, config)

    if exact and cl == 3 and rk > comb(d + 1, 2):
        raise VerificationError("lemma41.rank_bound", f"rk(G/Z) = {rk} > C({d + 1}, 2)")

    return GroupProfile(
        prime=group.prime,
        order=group.order,
        ngens=group.ngens,
        nilpotency_class=cl,
        d=d,
        d_center=min_generators(group, z),
        center_cyclic=is_cyclic(group, z),
        module_dims=[action.level(j).dim for j in (1, 2, 3)],
        dim_module=action.r,
        star_level_dims=[action.star_level(j).log_order for j in range(cl + 1)],
        rank_quotient=rk,
        rank_exact=exact,
        frattini_order=action.frattini.order,
        frattini_center_order=zphi.order,
        derived_order=derived_subgroup(group).order,
        d_frattini_center=min_generators(group, zphi),
        d_frattini_center_z2=min_generators(group, intersection(group, zphi, action.z_level(2))),
        transversal=action.transversal_exponents(),
        module_basis=action.module_basis_exponents(),
    )


def frattini_inequalities(profile: GroupProfile) -> Dict[str, Dict[str, Any]]:
    """F'1-F'3 on the level dims d_j = d(A_j), with d_j = 0 for j <= 0."""
    p, n = profile.prime, profile.d

    def level(j: int) -> int:
        if j <= 0:
            return 0
        return profile.module_dims[min(j, 3) - 1]

    d1, d2, d3 = level(1), level(2), level(3)
    pairs = comb(n, 2)
    checks = {
        "F'1": ((n - 1) * d3, n * level(4 - p) + pairs * d2),
        "F'2": (pairs * d2, n * level(4 - p) + n * (n - 1) * level(3 - p) + pairs * (n - 1) * d1),
        "F'3": (pairs * d1, n * level(4 - p) + n * (n - 1) * level(3 - p)),
    }
    result = {name: {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs} for name, (lhs, rhs) in checks.items()}

    # measured side of F1: d_2 >= d((A* ∩ Z_2)/Z) >= n d_1
    star2 = profile.star_level_dims[min(2, len(profile.star_level_dims) - 1)] - profile.star_level_dims[1]
    result["F1"] = {"d2": d2, "star_quotient": star2, "n_d1": n * d1, "holds": d2 >= star2 >= n * d1}
    return result


def check_p2(profile: GroupProfile) -> Optional[str]:
    if profile.prime != 2 or profile.nilpotency_class != 3:
        return None
    if profile.d != 3 and not profile.center_cyclic:
        return "Thm4.5(1)"
    if profile.d == 3 and profile.d_center > 2:
        return "Thm4.5(2)"
    if profile.d > 4:
        return "Thm4.6"
    return None


def _trace_zero_label(action: ModuleAction) -> Optional[int]:
    """First non-identity x̄ in Ḡ with τ_x = 0."""
    for label in range(1, action.quotient.order):
        if not trace_from_matrix(action.element_matrix(label), action.prime).any():
            return label
    return None


def _check_direct_factor_dims(action: ModuleAction) -> None:
    for i in range(1, action.nilpotency_class + 1):
        ider = inner_space(action, action.star_level(i))
        expected = action.level(i).dim - action.level(1).dim
        if ider.dim != expected:
            raise VerificationError(
                "lemma33.direct_factor_dimension", f"level {i}: dim Ider {ider.dim} != {expected}"
            )


def check_thm34(action: ModuleAction, profile: GroupProfile) -> Tuple[Optional[str], Dict[str, Any]]:
    """First satisfied subcase of the Z_3 criterion, with the side data it looked at.

    Raises:
        HypothesisViolationError: the standing hypothesis or A <= Z_3 fails.
    """
    if not (action.standing_hypothesis and action.module_in_z3):
        raise HypothesisViolationError("Z_3 criterion needs C_G(Z(Φ)) = Φ and Ω₁(Z(Φ)) <= Z_3")

    group = action.group
    p, d, dz = profile.prime, profile.d, profile.d_center
    side: Dict[str, Any] = {
        "d_frattini_center_z2": profile.d_frattini_center_z2,
        "d_frattini_center": profile.d_frattini_center,
        "d_center": dz,
    }

    exact = is_direct_factor(group, action.module_star, action.center)
    omega_reading = is_direct_factor(group, omega1(group, action.module_star), action.center)
    side["direct_factor_exact"] = exact
    side["direct_factor_omega"] = omega_reading
    if exact:
        _check_direct_factor_dims(action)

    if p > 3:
        return "Thm3.4(1)", side
    if p == 3 and d > 3:
        return "Thm3.4(2)", side
    if p == 3 and d == 3:
        if profile.d_frattini_center_z2 != 3 * dz or profile.d_frattini_center != 6 * dz:
            return "Thm3.4(3)", side
        label = _trace_zero_label(action)
        side["trace_zero_element"] = None if label is None else action.quotient_section.coordinates(label).tolist()
        if label is not None:
            return "Thm3.4(4)", side
    if d == 3 and (exact or omega_reading):
        side["direct_factor_reading"] = "exact" if exact else "omega"
        return "Thm3.4(5)", side
    return None, side


def check_thm35(profile: GroupProfile) -> Optional[str]:
    """Rank criterion; an upper bound can only affirm the strict inequality."""
    if profile.rank_quotient is None:
        return None
    if profile.prime == 2:
        threshold, tag = comb(profile.d, 2) * profile.d_center, "Thm3.5(2)"
    else:
        threshold, tag = comb(profile.d + 1, 2) * profile.d_center, "Thm3.5(1)"
    return tag if profile.rank_quotient < threshold else None


def check_lem42(profile: GroupProfile) -> Optional[str]:
    if profile.prime > 2 and profile.nilpotency_class == 3 and not profile.center_cyclic:
        return "Lem4.2"
    return None


def applicable_theorem(
    action: ModuleAction, profile: GroupProfile, transcript: Optional[Transcript] = None
) -> Optional[str]:
    """The highest-priority existence criterion whose arithmetic holds."""
    transcript = transcript or Transcript()
    tag = check_p2(profile)
    if profile.prime == 2 and profile.nilpotency_class == 3:
        transcript.record("p2-theorems", tag or "none", d=profile.d, d_center=profile.d_center)
    if tag:
        return tag

    if not action.standing_hypothesis:
        transcript.record("standing-hypothesis", "fails")
        return None
    transcript.record("standing-hypothesis", "holds")

    if action.module_in_z3:
        tag, side = check_thm34(action, profile)
        transcript.record("thm3.4", tag or "none", **side)
        if tag:
            return tag
    else:
        transcript.record("thm3.4", "skipped", reason="Ω₁(Z(Φ)) is not contained in Z_3")

    tag = check_thm35(profile)
    transcript.record(
        "thm3.5", tag or ("undecided" if profile.rank_quotient is None else "none"),
        rank=profile.rank_quotient, rank_exact=profile.rank_exact,
    )
    if tag:
        return tag

    tag = check_lem42(profile)
    if profile.prime > 2 and profile.nilpotency_class == 3:
        transcript.record("lem4.2", tag or "none", center_cyclic=profile.center_cyclic)
    return tag


def _checked_lift(action: ModuleAction, derivation, config: AnalysisConfig) -> Optional[Automorphism]:
    automorphism = lift_derivation(action, derivation, config.exhaustive_pair_max_order)
    inner, _ = is_inner(action.group, automorphism, action.center)
    if inner and action.standing_hypothesis:
        raise VerificationError("lemma32.cross_check", "lift of a non-inner derivation is inner")
    return None if inner else automorphism


def derivation_witness(
    action: ModuleAction, config: AnalysisConfig, transcript: Transcript
) -> Tuple[Optional[Automorphism], bool]:
    """Scan levels i = 2..class+1 for a derivation outside Ider(Ḡ, A*).

    Returns the first lift that is non-inner, and whether some level had
    dim Der(Ḡ, A_{i-1}) > d(A_i).
    """
    all_inner = inner_space(action, action.module_star)
    saturated = False
    for level in range(2, action.nilpotency_class + 2):
        der, ider = inner_levels(action, level)
        bound = action.level(level).dim
        saturated |= der.dim > bound
        transcript.record(
            "derivation-level", "gap" if der.dim > ider.dim else "no-gap",
            level=level, dim_lower=action.level(level - 1).dim, dim_der=der.dim,
            dim_ider=ider.dim, dim_level=bound,
        )
        if der.dim <= ider.dim:
            continue
        for derivation in der.basis:
            if all_inner.contains(derivation):
                continue
            automorphism = _checked_lift(action, derivation, config)
            if automorphism is not None:
                automorphism.source = f"derivation:level{level}"
                return automorphism, saturated
    return None, saturated


def omega_derivation_witness(
    action: ModuleAction, config: AnalysisConfig, transcript: Transcript
) -> Optional[Automorphism]:
    """Derivations into Ω₁(G') ∩ A with commutators in Ω₁(Z(G)) ∩ A."""
    group = action.group
    section = action.section
    c = section.subspace_of(intersection(group, omega1(group, derived_subgroup(group)), action.module).members)
    d = section.subspace_of(intersection(group, omega1(group, action.center), action.module).members)
    try:
        space = derivation_space(action, c, d)
    except HypothesisViolationError as exc:
        transcript.record("omega-derivations", "skipped", reason=str(exc))
        return None

    all_inner = inner_space(action, action.module_star)
    transcript.record("omega-derivations", "solved", dim_c=c.dim, dim_d=d.dim, dim_der=space.dim)
    for derivation in space.basis:
        if all_inner.contains(derivation):
            continue
        automorphism = _checked_lift(action, derivation, config)
        if automorphism is not None:
            automorphism.source = "derivation:omega"
            return automorphism
    return None


def search_witness(
    action: ModuleAction, config: AnalysisConfig, transcript: Transcript, frattini_fixed_only: bool = False
) -> Optional[Automorphism]:
    """Frattini-fixed family first, then (unless excluded) the general family."""
    for frattini_fixed in (True,) if frattini_fixed_only else (True, False):
        found, report = brute_force_search(action.group, frattini_fixed, action, config)
        transcript.record(f"brute-force:{report.family}", "found" if found else "none", **report.to_dict())
        if found is not None:
            return found
    return None


def _witness_record(action: ModuleAction, automorphism: Automorphism, config: AnalysisConfig) -> Witness:
    """Re-verify a witness from scratch before it goes into a certificate."""
    group = action.group
    order = automorphism.verify(config.exhaustive_pair_max_order)
    if order != group.prime:
        raise VerificationError("witness.order", f"order {order}")
    inner, g = is_inner(group, automorphism, action.center)
    if inner:
        raise VerificationError("witness.non_inner", f"conjugation by element {g}")
    return Witness(
        generator_images=automorphism.generator_image_exponents(),
        order=order,
        fixes_frattini=automorphism.fixes(action.frattini),
        source=automorphism.source,
        full_map_digest=map_digest(automorphism.full_map),
    )


def _route(
    action: ModuleAction, profile: GroupProfile, config: AnalysisConfig, transcript: Transcript
) -> Tuple[str, Optional[Automorphism]]:
    tag = applicable_theorem(action, profile, transcript)

    if action.standing_hypothesis or tag:
        found, saturated = derivation_witness(action, config, transcript)
    else:
        found, saturated = None, False

    if action.standing_hypothesis:
        inequalities = frattini_inequalities(profile)
        violated = [name for name, entry in inequalities.items() if not entry["holds"] and name != "F1"]
        transcript.record("frattini-inequalities", "violated" if violated else "hold", **inequalities)
        if action.module_in_z3 and violated and found is None:
            logger.error("Inequalities %s fail but no derivation witness was found", violated)
            transcript.record("internal-error", "inequality-without-witness", violated=violated)
        if saturated and found is None:
            raise VerificationError("lemma33.saturation_without_witness", "dim Der(A_{i-1}) > d(A_i) but no witness")

    if tag:
        if found is None and profile.prime == 2:
            found = omega_derivation_witness(action, config, transcript)
        if found is None:
            found = search_witness(action, config, transcript, frattini_fixed_only=True)
        return (tag, found) if found is not None else ("NONE-FOUND", None)

    if not action.standing_hypothesis:
        found = search_witness(action, config, transcript)
        return ("DS-fallback", found) if found is not None else ("NONE-FOUND", None)

    if profile.prime == 3 and profile.d == 2 and profile.nilpotency_class == 3 and profile.center_cyclic:
        beta = case_b_construct(action.group, action, config.exhaustive_pair_max_order)
        transcript.record("case-b", "found" if beta is not None else "none")
        if beta is not None:
            return "Thm4.4-caseB", beta

    if found is not None:
        return "Lem3.3(4)", found

    found = search_witness(action, config, transcript)
    return ("BRUTE-FORCE", found) if found is not None else ("NONE-FOUND", None)


def analyze(group: PcGroup, config: Optional[AnalysisConfig] = None) -> Certificate:
    """Run the decision tree and return a certificate with a verified witness.

    Raises:
        CapExceededError: the group is above max_order.
        AbelianGroupError: the group is abelian.
    """
    config = config or AnalysisConfig()
    if group.order > config.max_order:
        raise CapExceededError("max_order", config.max_order, group.order)
    if group.is_abelian():
        raise AbelianGroupError("abelian groups have no non-inner automorphisms to certify here")

    transcript = Transcript()
    transcript.record("caps", "recorded", **config.caps())

    action = build_module_action(group)
    profile = compute_profile(group, action, config)
    flags = HypothesisFlags(
        standing_hypothesis=action.standing_hypothesis, module_in_z3=action.module_in_z3
    )
    transcript.record("profile", "computed", order=profile.order, nilpotency_class=profile.nilpotency_class, d=profile.d)
    if profile.nilpotency_class != 3:
        transcript.record(
            "class", f"class-{profile.nilpotency_class}",
            note="class-3 criteria do not apply; result comes from the fallback searches",
        )

    criterion, automorphism = _route(action, profile, config, transcript)
    witness = None
    if automorphism is not None:
        witness = _witness_record(action, automorphism, config)
        transcript.record("witness-verification", "passed", source=witness.source, fixes_frattini=witness.fixes_frattini)
        if criterion in FRATTINI_FIXING_TAGS and not witness.fixes_frattini:
            raise VerificationError("witness.frattini_fixed", f"{criterion} witness moves Φ(G)")

    logger.info("Group %s: criterion %s", group_id(group.presentation)[:12], criterion)
    return Certificate(
        group_id=group_id(group.presentation),
        profile=profile,
        hypothesis_flags=flags,
        criterion=criterion,
        witness=witness,
        transcript=transcript.entries,
    )


def _criterion_consistent(
    criterion: str, expected: Optional[str], action: ModuleAction, profile: GroupProfile
) -> bool:
    if criterion == "NONE-FOUND":
        return True
    if expected is not None:
        return criterion == expected
    if criterion == "DS-fallback":
        return not action.standing_hypothesis
    if criterion == "Thm4.4-caseB":
        return (
            action.standing_hypothesis and profile.prime == 3 and profile.d == 2
            and profile.nilpotency_class == 3 and profile.center_cyclic
        )
    if criterion in ("Lem3.3(4)", "BRUTE-FORCE"):
        return action.standing_hypothesis
    return False


def verify_certificate(
    group: PcGroup, cert: Certificate, config: Optional[AnalysisConfig] = None
) -> VerificationOutcome:
    """Re-check a certificate against the group, trusting only the group law.

    Returns an outcome that is falsy and names the first failed check on
    any mismatch.
    """
    config = config or AnalysisConfig()

    def fail(check: str, message: str = "") -> VerificationOutcome:
        logger.warning("Certificate rejected: %s %s", check, message)
        return VerificationOutcome(False, check, message)

    if cert.group_id != group_id(group.presentation):
        return fail("group_id", "certificate belongs to another presentation")
    if cert.criterion not in CRITERIA:
        return fail("criterion.known", cert.criterion)
    if cert.criterion == "NONE-FOUND" and cert.witness is not None:
        return fail("criterion.witness_present")
    if cert.criterion != "NONE-FOUND" and cert.witness is None:
        return fail("witness.missing")

    action = build_module_action(group)
    witness = cert.witness
    if witness is not None:
        try:
            images = [group.element(exps) for exps in witness.generator_images]
        except ValueError as exc:
            return fail("witness.exponents", str(exc))
        if len(images) != group.ngens:
            return fail("witness.exponents", f"{len(images)} images for {group.ngens} generators")
        automorphism = extend_homomorphism(group, group.generators, images)
        if automorphism is None:
            return fail("witness.homomorphism", "generator images do not extend to an automorphism")
        if map_digest(automorphism.full_map) != witness.full_map_digest:
            return fail("witness.full_map_digest")
        try:
            order = automorphism.verify(config.exhaustive_pair_max_order)
        except VerificationError as exc:
            return fail(exc.check, str(exc))
        if order != group.prime or order != witness.order:
            return fail("witness.order", f"order {order}")
        inner, g = is_inner(group, automorphism, action.center)
        if inner:
            return fail("witness.non_inner", f"conjugation by element {g}")
        fixes = automorphism.fixes(action.frattini)
        if fixes != witness.fixes_frattini:
            return fail("witness.frattini_fixed", "recorded flag differs")
        if cert.criterion in FRATTINI_FIXING_TAGS and not fixes:
            return fail("witness.frattini_fixed", f"{cert.criterion} needs a Φ(G)-fixing witness")

    try:
        profile = compute_profile(group, action, config)
    except CapExceededError as exc:
        return fail("profile.caps", str(exc))
    for name in GroupProfile.model_fields:
        if getattr(profile, name) != getattr(cert.profile, name):
            return fail(f"profile.{name}", f"recomputed {getattr(profile, name)!r}")
    if cert.hypothesis_flags.standing_hypothesis != action.standing_hypothesis:
        return fail("hypothesis_flags.standing_hypothesis")
    if cert.hypothesis_flags.module_in_z3 != action.module_in_z3:
        return fail("hypothesis_flags.module_in_z3")

    expected = applicable_theorem(action, profile)
    if not _criterion_consistent(cert.criterion, expected, action, profile):
        return fail("criterion.preconditions", f"{cert.criterion} (expected {expected or 'a fallback'})")
    return VerificationOutcome(True)
