"""
Corpus Batch Processor

Analyzes every corpus entry on a worker pool, re-verifies each
certificate and optionally writes it to an output directory. Per-entry
work is single-threaded; entries run concurrently.
"""

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from analysis_config import AnalysisConfig
from certificate import save_certificate
from pgaut_errors import PgautError
from pgroup_corpus import CorpusEntry
from theorem_engine import analyze, verify_certificate

logger = logging.getLogger(__name__)
console = Console(stderr=True)


def analyze_entry(entry: CorpusEntry, config_data: Dict[str, Any], output_dir: Optional[str] = None) -> Dict[str, Any]:
    """Worker body: build, analyze, verify and (optionally) save one entry.

    Module-level so that process pools can pickle it.
    """
    config = AnalysisConfig(**config_data)
    group = entry.build(config.hard_order_limit)
    cert = analyze(group, config)
    outcome = verify_certificate(group, cert, config)

    path = None
    if output_dir:
        path = str(Path(output_dir) / f"{entry.name}.json")
        save_certificate(cert, path)

    return {
        "name": entry.name,
        "criterion": cert.criterion,
        "expected": entry.criterion,
        "matches_expected": cert.criterion == entry.criterion,
        "verified": outcome.ok,
        "failed_check": outcome.check,
        "witness_order": cert.witness.order if cert.witness else None,
        "certificate_path": path,
    }


class CorpusBatch:
    """Concurrent corpus run with a rich progress display."""

    def __init__(
        self,
        config: Optional[AnalysisConfig] = None,
        output_dir: Optional[str] = None,
        executor_factory: Optional[Callable[[int], Executor]] = None,
    ):
        self.config = config or AnalysisConfig()
        self.output_dir = output_dir
        self.executor_factory = executor_factory or (lambda workers: ProcessPoolExecutor(max_workers=workers))
        self.stats = {"analyzed": 0, "verified": 0, "mismatches": 0, "errors": 0}

    async def run(self, entries: List[CorpusEntry]) -> Dict[str, Any]:
        """Analyze all entries; results come back in corpus order."""
        loop = asyncio.get_running_loop()
        config_data = self.config.model_dump()
        results: Dict[str, Dict[str, Any]] = {}

        with self.executor_factory(self.config.workers) as executor, Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
        ) as progress:
            task_id = progress.add_task("Analyzing corpus", total=len(entries))
            futures = {
                entry.name: loop.run_in_executor(executor, analyze_entry, entry, config_data, self.output_dir)
                for entry in entries
            }
            for entry in entries:
                try:
                    result = await futures[entry.name]
                    self._count(result)
                except PgautError as e:
                    self.stats["errors"] += 1
                    logger.error("Corpus entry %s failed: %s", entry.name, e)
                    result = {"name": entry.name, "expected": entry.criterion, "error": str(e)}
                results[entry.name] = result
                progress.update(task_id, advance=1)

        return {
            "results": [results[entry.name] for entry in entries],
            "summary": dict(self.stats),
            "status": "success" if self.stats["errors"] == 0 and self.stats["mismatches"] == 0 else "partial_success",
        }

    def _count(self, result: Dict[str, Any]) -> None:
        self.stats["analyzed"] += 1
        if result["verified"]:
            self.stats["verified"] += 1
        if not result["matches_expected"]:
            self.stats["mismatches"] += 1
            logger.warning("%s: criterion %s, expected %s", result["name"], result["criterion"], result["expected"])


def run_corpus(
    entries: List[CorpusEntry], config: Optional[AnalysisConfig] = None, output_dir: Optional[str] = None
) -> Dict[str, Any]:
    return asyncio.run(CorpusBatch(config, output_dir).run(entries))
