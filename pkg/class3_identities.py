"""
Commutator identities of 3-groups of class at most 3, checked on real groups.

Pairs (and the power range for i) are exhaustive for small groups; triples
are exhaustive up to the configured order and sampled with a seeded
generator above it.
"""

import logging
from dataclasses import asdict, dataclass
from math import comb
from typing import List, Optional, Tuple

import numpy as np

from analysis_config import AnalysisConfig
from group_structure import center, frattini, nilpotency_class, omega1_star, subgroup_center
from pc_group import PcGroup
from pgaut_errors import HypothesisViolationError

logger = logging.getLogger(__name__)


@dataclass
class IdentityReport:
    name: str
    checked: int
    violations: int
    exhaustive: bool
    counterexample: Optional[Tuple[int, ...]] = None

    @property
    def holds(self) -> bool:
        return self.violations == 0

    def to_dict(self) -> dict:
        return asdict(self)


def _report(name: str, ok: np.ndarray, args: Tuple[np.ndarray, ...], exhaustive: bool) -> IdentityReport:
    ok = np.asarray(ok).reshape(-1)
    bad = np.flatnonzero(~ok)
    counterexample = None
    if bad.size:
        counterexample = tuple(int(np.asarray(a).reshape(-1)[bad[0]]) for a in args)
    return IdentityReport(name, int(ok.size), int(bad.size), exhaustive, counterexample)


def _pairs(group: PcGroup, config: AnalysisConfig, rng: np.random.Generator):
    if group.order <= config.identity_exhaustive_max_order:
        x, y = np.meshgrid(group.elements, group.elements, indexing="ij")
        return x.ravel(), y.ravel(), True
    size = config.identity_sample_size
    return rng.integers(0, group.order, size), rng.integers(0, group.order, size), False


def _triples(group: PcGroup, config: AnalysisConfig, rng: np.random.Generator):
    if group.order <= config.identity_exhaustive_max_order:
        grids = np.meshgrid(group.elements, group.elements, group.elements, indexing="ij")
        return tuple(g.ravel() for g in grids) + (True,)
    size = config.identity_sample_size
    return tuple(rng.integers(0, group.order, size) for _ in range(3)) + (False,)


def run_identity_suite(group: PcGroup, config: Optional[AnalysisConfig] = None) -> List[IdentityReport]:
    """Check the six class-3 identities for a 3-group.

    Raises:
        HypothesisViolationError: p != 3 or class > 3.
    """
    config = config or AnalysisConfig()
    if group.prime != 3:
        raise HypothesisViolationError("identity suite is for 3-groups")
    if nilpotency_class(group) > 3:
        raise HypothesisViolationError("identity suite is for class at most 3")

    rng = np.random.default_rng(config.random_seed)
    mul, comm, pw = group.multiply_many, group.commutator_many, group.power_many
    reports: List[IdentityReport] = []

    x, y, exhaustive = _pairs(group, config, rng)
    xy = comm(x, y)
    xyy = comm(xy, y)
    xyx = comm(xy, x)

    ok_right = np.ones(x.size, dtype=bool)
    ok_left = np.ones(x.size, dtype=bool)
    for i in range(1, group.exponent + 1):
        right = mul(pw(xy, i), pw(xyy, comb(i, 2)))
        ok_right &= comm(x, pw(y, i)) == right
        left = mul(pw(xy, i), pw(xyx, comb(i, 2)))
        ok_left &= comm(pw(x, i), y) == left
    reports.append(_report("commutator_power_right", ok_right, (x, y), exhaustive))
    reports.append(_report("commutator_power_left", ok_left, (x, y), exhaustive))

    cube_trivial = comm(pw(x, 3), y) == 0
    commutator_cube_trivial = pw(xy, 3) == 0
    reports.append(_report("cube_commutator_equivalence", cube_trivial == commutator_cube_trivial, (x, y), exhaustive))

    yx = comm(y, x)
    expected = mul(
        mul(mul(pw(x, 3), pw(y, 3)), pw(yx, 3)),
        mul(comm(yx, x), pw(comm(yx, y), 2)),
    )
    reports.append(_report("cube_of_product", pw(mul(x, y), 3) == expected, (x, y), exhaustive))

    a, b, c, exhaustive3 = _triples(group, config, rng)
    jacobi = mul(mul(comm(comm(a, b), c), comm(comm(b, c), a)), comm(comm(c, a), b))
    reports.append(_report("hall_witt_cyclic", jacobi == 0, (a, b, c), exhaustive3))

    z = center(group)
    zphi = subgroup_center(group, frattini(group))
    star = omega1_star(group, z)
    reports.append(_report("frattini_center_in_omega_star", star.mask[zphi.members], (zphi.members,), True))

    for report in reports:
        log = logger.error if report.violations else logger.debug
        log("Identity %s: %d checked, %d violations", report.name, report.checked, report.violations)
    return reports
