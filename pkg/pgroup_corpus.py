"""
Built-in corpus of small p-groups used as regression fixtures.

Presentations live in corpus/*.pc next to this module; the expected
profile and criterion family of each entry are kept here.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from pc_group import PcGroup, check_consistency, parse_presentation

logger = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).resolve().parent / "corpus"


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    filename: str
    order: int
    nilpotency_class: int
    d: int
    center_cyclic: bool
    criterion: str
    text: str = ""

    @property
    def path(self) -> Path:
        return CORPUS_DIR / self.filename

    def build(self, hard_limit: int = 20000) -> PcGroup:
        """Parse, check consistency and build the element table."""
        presentation = parse_presentation(self.text)
        group = PcGroup(presentation, hard_limit=hard_limit)
        check_consistency(presentation, group).raise_if_failed()
        return group


_ENTRIES = (
    CorpusEntry("D16", "d16.pc", 16, 3, 2, True, "DS-fallback"),
    CorpusEntry("Q16", "q16.pc", 16, 3, 2, True, "DS-fallback"),
    CorpusEntry("SD16", "sd16.pc", 16, 3, 2, True, "DS-fallback"),
    CorpusEntry("D16xC2xC2", "d16_c2_c2.pc", 64, 3, 4, False, "Thm4.5(1)"),
    CorpusEntry("W81", "w81.pc", 81, 3, 2, True, "DS-fallback"),
    CorpusEntry("MaxClass625", "max_class_625.pc", 625, 3, 2, True, "DS-fallback"),
    CorpusEntry("D3Order243", "d3_243.pc", 243, 3, 3, True, "DS-fallback"),
    CorpusEntry("FreeClass3Order243", "free_class3_243.pc", 243, 3, 2, False, "Thm3.5(1)"),
    CorpusEntry("FreeClass3Order3125", "free_class3_3125.pc", 3125, 3, 2, False, "Thm3.4(1)"),
    CorpusEntry("D3Order2187", "d3_2187.pc", 2187, 3, 3, True, "Thm3.4(3)"),
    CorpusEntry("Heisenberg27", "heisenberg_27.pc", 27, 2, 2, True, "DS-fallback"),
)


def load_corpus(name_filter: Optional[str] = None) -> List[CorpusEntry]:
    """Corpus entries with their presentation text, optionally filtered by a name substring."""
    entries = []
    for entry in _ENTRIES:
        if name_filter and name_filter.lower() not in entry.name.lower():
            continue
        with open(entry.path, "r", encoding="utf-8") as f:
            text = f.read()
        entries.append(CorpusEntry(**{**entry.__dict__, "text": text}))
    logger.debug("Loaded %d corpus entries", len(entries))
    return entries


def get_entry(name: str) -> CorpusEntry:
    for entry in load_corpus():
        if entry.name == name:
            return entry
    raise KeyError(f"no corpus entry named {name}")
