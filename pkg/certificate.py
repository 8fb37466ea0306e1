"""
Certificate schema and byte-stable JSON serialization.

A certificate binds a presentation (by the SHA-256 of its canonical text)
to the criterion that fired, the invariants it relied on and an explicit
witness automorphism. Field order is fixed by the models; nothing
time-dependent is written.
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from pc_group import PcPresentation, canonical_text
from pgaut_errors import SchemaVersionError, VerificationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

CRITERIA = (
    "Thm3.4(1)",
    "Thm3.4(2)",
    "Thm3.4(3)",
    "Thm3.4(4)",
    "Thm3.4(5)",
    "Thm3.5(1)",
    "Thm3.5(2)",
    "Lem4.2",
    "Thm4.4-caseB",
    "Thm4.5(1)",
    "Thm4.5(2)",
    "Thm4.6",
    "Lem3.3(4)",
    "DS-fallback",
    "BRUTE-FORCE",
    "NONE-FOUND",
)


def group_id(presentation: PcPresentation) -> str:
    return hashlib.sha256(canonical_text(presentation).encode("utf-8")).hexdigest()


def map_digest(full_map: np.ndarray) -> str:
    """SHA-256 of the permutation as little-endian int64."""
    return hashlib.sha256(np.asarray(full_map, dtype="<i8").tobytes()).hexdigest()


class GroupProfile(BaseModel):
    prime: int
    order: int
    ngens: int
    nilpotency_class: int
    d: int
    d_center: int
    center_cyclic: bool
    module_dims: List[int] = Field(description="d(A_1), d(A_2), d(A_3)")
    dim_module: int
    star_level_dims: List[int] = Field(description="log_p |A* ∩ Z_i| for i = 0..class")
    rank_quotient: Optional[int] = Field(description="rk(G/Z(G)); exact or an upper bound, see rank_exact")
    rank_exact: bool
    frattini_order: int
    frattini_center_order: int
    derived_order: int
    d_frattini_center: int
    d_frattini_center_z2: int
    transversal: List[List[int]]
    module_basis: List[List[int]]


class HypothesisFlags(BaseModel):
    standing_hypothesis: bool = Field(description="C_G(Z(Φ(G))) = Φ(G)")
    module_in_z3: bool = Field(description="Ω₁(Z(Φ(G))) ≤ Z_3(G)")


class Witness(BaseModel):
    generator_images: List[List[int]] = Field(description="exponent vectors of the images of g_1..g_n")
    order: int
    fixes_frattini: bool
    source: str
    full_map_digest: str


class TranscriptEntry(BaseModel):
    step: str
    outcome: str
    detail: Dict[str, Any] = Field(default_factory=dict)


class Certificate(BaseModel):
    schema_version: int = SCHEMA_VERSION
    group_id: str
    profile: GroupProfile
    hypothesis_flags: HypothesisFlags
    criterion: str
    witness: Optional[Witness] = None
    transcript: List[TranscriptEntry] = Field(default_factory=list)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"


def save_certificate(cert: Certificate, path: str) -> None:
    """Write atomically: temporary file in the target directory, then rename."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(cert.to_json())
        os.replace(temp_path, target)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise
    logger.info("Certificate written to %s", target)


def load_certificate(path: str) -> Certificate:
    """Read a certificate of the current schema version.

    Raises:
        SchemaVersionError: written by another schema version.
        VerificationError: not a parseable certificate.
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise VerificationError("certificate.parse", str(exc)) from exc

    version = data.get("schema_version") if isinstance(data, dict) else None
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(f"certificate schema version {version}, expected {SCHEMA_VERSION}")
    try:
        return Certificate.model_validate(data)
    except ValidationError as exc:
        raise VerificationError("certificate.schema", str(exc)) from exc
