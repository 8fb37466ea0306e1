"""
Command-line entry point for pgaut.

Subcommands analyze a presentation file, run the built-in corpus,
re-verify a certificate, print derivation dimensions per level, compare
the linear-algebra and brute-force derivation spaces, and run the class-3
identity suite.

Exit codes: 0 success, 1 parse or verification failure, 2 cap exceeded.
"""

import argparse
import logging
import sys
from typing import List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from analysis_config import AnalysisConfig, load_config
from automorphisms import find_noninner_derivation
from certificate import load_certificate, save_certificate
from class3_identities import run_identity_suite
from corpus_batch import run_corpus
from derivations import (
    ModuleAction,
    brute_force_derivations,
    build_module_action,
    derivation_space,
    inner_levels,
    oracle_within_caps,
    space_vectors,
)
from pc_group import PcGroup, load_group
from pgaut_errors import CapExceededError, PgautError
from pgroup_corpus import load_corpus
from theorem_engine import analyze, verify_certificate

logger = logging.getLogger("pgaut")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CAP = 2


def setup_argparse() -> argparse.ArgumentParser:
    """Set up command line argument parser."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="JSON configuration file (default: pgaut_config.json)")
    common.add_argument("--verbose", "-v", action="store_true", help="Debug logging on stderr")
    common.add_argument("--max-order", type=int, help="Largest group order analyzed")

    parser = argparse.ArgumentParser(
        description="pgaut: certify non-inner automorphisms of order p in finite p-groups",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", parents=[common], help="Analyze a presentation file and emit a certificate")
    p_analyze.add_argument("file")
    p_analyze.add_argument("--json", dest="json_path", type=str, help="Write the certificate to this path")

    p_corpus = sub.add_parser("corpus", help="Built-in corpus")
    corpus_sub = p_corpus.add_subparsers(dest="corpus_command", required=True)
    p_run = corpus_sub.add_parser("run", parents=[common], help="Analyze and verify every corpus entry")
    p_run.add_argument("--filter", dest="name_filter", type=str, help="Substring of entry names")
    p_run.add_argument("--output-dir", type=str, help="Directory for certificates")

    p_verify = sub.add_parser("verify", parents=[common], help="Re-verify a certificate against a presentation")
    p_verify.add_argument("file")
    p_verify.add_argument("certificate")

    p_der = sub.add_parser("derivations", parents=[common], help="Der/Ider dimensions per level")
    p_der.add_argument("file")
    p_der.add_argument("--level", type=int, help="Only this level i (2..class+1)")

    p_oracle = sub.add_parser("oracle-compare", parents=[common], help="Linear algebra vs brute-force derivations")
    p_oracle.add_argument("file")

    p_ident = sub.add_parser("identities", parents=[common], help="Class-3 commutator identities for 3-groups")
    p_ident.add_argument("file")

    return parser


def _load(path: str, config: AnalysisConfig) -> PcGroup:
    group = load_group(path, hard_limit=config.hard_order_limit)
    if group.order > config.max_order:
        raise CapExceededError("max_order", config.max_order, group.order)
    return group


def run_analyze(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    group = _load(args.file, config)
    cert = analyze(group, config)
    profile = cert.profile

    table = Table(title=f"{args.file}")
    table.add_column("Invariant", style="cyan")
    table.add_column("Value")
    table.add_row("order", f"{profile.prime}^{profile.ngens} = {profile.order}")
    table.add_row("class", str(profile.nilpotency_class))
    table.add_row("d(G)", str(profile.d))
    table.add_row("d(Z(G))", f"{profile.d_center} ({'cyclic' if profile.center_cyclic else 'non-cyclic'})")
    table.add_row("d(A_1), d(A_2), d(A_3)", ", ".join(map(str, profile.module_dims)))
    rank_text = "n/a" if profile.rank_quotient is None else f"{profile.rank_quotient} ({'exact' if profile.rank_exact else 'bound'})"
    table.add_row("rk(G/Z(G))", rank_text)
    table.add_row("C_G(Z(Φ)) = Φ", str(cert.hypothesis_flags.standing_hypothesis))
    table.add_row("Ω₁(Z(Φ)) ≤ Z_3", str(cert.hypothesis_flags.module_in_z3))
    console.print(table)

    console.print(f"[bold]Criterion:[/bold] {cert.criterion}")
    if cert.witness:
        console.print(
            f"[green]Witness of order {cert.witness.order} from {cert.witness.source}"
            f"{', fixes Φ(G)' if cert.witness.fixes_frattini else ''}[/green]"
        )
    else:
        console.print("[yellow]No witness within the configured caps[/yellow]")

    if args.json_path:
        save_certificate(cert, args.json_path)
        console.print(f"[green]Certificate saved to {args.json_path}[/green]")
    return EXIT_OK


def run_corpus_command(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    entries = load_corpus(args.name_filter)
    if not entries:
        console.print(f"[red]No corpus entries match '{args.name_filter}'[/red]")
        return EXIT_FAILURE
    report = run_corpus(entries, config, args.output_dir)

    table = Table(title="Corpus run")
    table.add_column("Entry", style="cyan")
    table.add_column("Criterion")
    table.add_column("Expected")
    table.add_column("Verified")
    for result in report["results"]:
        if "error" in result:
            table.add_row(result["name"], "[red]error[/red]", result["expected"], result["error"])
            continue
        table.add_row(
            result["name"],
            result["criterion"],
            result["expected"],
            "[green]yes[/green]" if result["verified"] else f"[red]no ({result['failed_check']})[/red]",
        )
    console.print(table)

    summary = report["summary"]
    console.print(
        f"{summary['analyzed']} analyzed, {summary['verified']} verified, "
        f"{summary['mismatches']} unexpected criteria, {summary['errors']} errors"
    )
    ok = summary["errors"] == 0 and summary["verified"] == summary["analyzed"]
    return EXIT_OK if ok else EXIT_FAILURE


def run_verify(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    group = _load(args.file, config)
    cert = load_certificate(args.certificate)
    outcome = verify_certificate(group, cert, config)
    if outcome:
        console.print(f"[green]VERIFIED[/green] {cert.criterion}")
        return EXIT_OK
    console.print(f"[red]REJECTED[/red] first failed check: {outcome.check} {outcome.message}")
    return EXIT_FAILURE


NO_STANDING_HYPOTHESIS = "n/a (C_G(Z(Φ)) ≠ Φ)"


def derivation_rows(action: ModuleAction, levels: List[int]) -> List[List[str]]:
    """One row per level: i, d(A_{i-1}), dim Der, dim Ider, d(A_i), gap.

    A gap only means a non-inner lift when C_G(Z(Φ)) = Φ; otherwise the
    column reads n/a.
    """
    rows = []
    for level in levels:
        der, ider = inner_levels(action, level)
        if not action.standing_hypothesis:
            gap = NO_STANDING_HYPOTHESIS
        else:
            gap = "yes" if find_noninner_derivation(action, level) is not None else "no"
        rows.append([
            str(level),
            str(action.level(level - 1).dim),
            str(der.dim),
            str(ider.dim),
            str(action.level(level).dim),
            gap,
        ])
    return rows


def run_derivations(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    group = _load(args.file, config)
    action = build_module_action(group)
    levels = [args.level] if args.level else list(range(2, action.nilpotency_class + 2))

    table = Table(title=f"Derivations of G/Φ(G) into Ω₁(Z(Φ(G))), n = {action.n}, dim A = {action.r}")
    for column in ("i", "d(A_{i-1})", "dim Der", "dim Ider(A*∩Z_i)", "d(A_i)", "gap"):
        table.add_column(column)
    for row in derivation_rows(action, levels):
        if row[-1] == "yes":
            row[-1] = "[green]yes[/green]"
        table.add_row(*row)
    console.print(table)
    return EXIT_OK


def run_oracle_compare(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    group = _load(args.file, config)
    action = build_module_action(group)
    p = action.prime
    differ = False

    for name, index in (("A_1", 1), ("A_2", 2), ("A_3", 3), ("A", action.nilpotency_class)):
        c = action.level(index)
        if not oracle_within_caps(action, c, config.oracle_max_module_order, config.oracle_max_d):
            console.print(f"{name}: skipped (|C| = {p ** c.dim}, d = {action.n} above oracle caps)")
            continue
        fast = space_vectors(derivation_space(action, c))
        slow = brute_force_derivations(action, c)
        if fast == slow:
            console.print(f"{name}: EQUAL (dim {derivation_space(action, c).dim})")
        else:
            differ = True
            console.print(f"{name}: [red]DIFFER[/red] ({len(fast)} vs {len(slow)} derivations)")
    return EXIT_FAILURE if differ else EXIT_OK


def run_identities(args: argparse.Namespace, config: AnalysisConfig, console: Console) -> int:
    group = _load(args.file, config)
    reports = run_identity_suite(group, config)

    table = Table(title="Class-3 identities")
    table.add_column("Identity", style="cyan")
    table.add_column("Checked")
    table.add_column("Mode")
    table.add_column("Violations")
    for report in reports:
        table.add_row(
            report.name,
            str(report.checked),
            "exhaustive" if report.exhaustive else "sampled",
            "[green]0[/green]" if report.holds else f"[red]{report.violations}[/red]",
        )
    console.print(table)
    return EXIT_OK if all(r.holds for r in reports) else EXIT_FAILURE


COMMANDS = {
    "analyze": run_analyze,
    "corpus": run_corpus_command,
    "verify": run_verify,
    "derivations": run_derivations,
    "oracle-compare": run_oracle_compare,
    "identities": run_identities,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the pgaut runner; returns the process exit code."""
    console = Console()
    err_console = Console(stderr=True)
    args = setup_argparse().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )

    try:
        config = load_config(args.config, max_order=args.max_order)
        return COMMANDS[args.command](args, config, console)
    except CapExceededError as e:
        err_console.print(f"[red]Cap exceeded: {e}[/red]")
        return EXIT_CAP
    except (PgautError, OSError) as e:
        err_console.print(f"[red]{type(e).__name__}: {e}[/red]")
        return EXIT_FAILURE
    except Exception as e:
        logger.exception("Unexpected error")
        err_console.print(f"[red]Unexpected error: {e}[/red]")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
