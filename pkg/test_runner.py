"""
Tests for the pgaut command-line runner.
"""

import json
import os
import shutil
import tempfile
from unittest import mock

from derivations import build_module_action
from pgaut_runner import (
    EXIT_CAP,
    EXIT_FAILURE,
    EXIT_OK,
    NO_STANDING_HYPOTHESIS,
    derivation_rows,
    main,
    setup_argparse,
)
from pgroup_corpus import CORPUS_DIR, get_entry

D16 = str(CORPUS_DIR / "d16.pc")
W81 = str(CORPUS_DIR / "w81.pc")
HEISENBERG = str(CORPUS_DIR / "heisenberg_27.pc")


def test_paths_with_shell_characters():
    """Test that file names are taken literally."""
    with tempfile.TemporaryDirectory() as temp_dir:
        path = os.path.join(temp_dir, "a&b;$(x).pc")
        shutil.copy(D16, path)
        assert main(["analyze", path]) == EXIT_OK


def test_common_options_after_subcommand():
    """Test that --max-order and --verbose are accepted on every leaf command."""
    args = setup_argparse().parse_args(["analyze", D16, "--max-order", "64", "-v"])
    assert args.max_order == 64
    assert args.verbose
    args = setup_argparse().parse_args(["corpus", "run", "--filter", "D16"])
    assert args.name_filter == "D16"


def test_analyze_and_verify_round_trip():
    """Test analyze --json followed by verify."""
    with tempfile.TemporaryDirectory() as temp_dir:
        cert_path = os.path.join(temp_dir, "d16.json")
        assert main(["analyze", D16, "--json", cert_path]) == EXIT_OK
        assert os.path.exists(cert_path)
        assert main(["verify", D16, cert_path]) == EXIT_OK

        with open(cert_path, "r", encoding="utf-8") as f:
            data = json.load(f)
        data["profile"]["d"] = 3
        with open(cert_path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        assert main(["verify", D16, cert_path]) == EXIT_FAILURE


def test_verify_against_other_group():
    """Test that a certificate is rejected for a different presentation."""
    with tempfile.TemporaryDirectory() as temp_dir:
        cert_path = os.path.join(temp_dir, "d16.json")
        assert main(["analyze", D16, "--json", cert_path]) == EXIT_OK
        assert main(["verify", HEISENBERG, cert_path]) == EXIT_FAILURE


def test_cap_exit_code():
    """Test exit code 2 when the order cap is hit."""
    assert main(["analyze", W81, "--max-order", "27"]) == EXIT_CAP


def test_missing_and_malformed_files():
    """Test exit code 1 for unreadable or invalid presentations."""
    assert main(["analyze", "/nonexistent/group.pc"]) == EXIT_FAILURE
    with tempfile.NamedTemporaryFile("w", suffix=".pc", delete=False) as f:
        f.write("p = 4\nn = 2\n")
        path = f.name
    try:
        assert main(["analyze", path]) == EXIT_FAILURE
    finally:
        os.unlink(path)


def test_derivations_and_oracle():
    """Test the derivation table and the brute-force comparison."""
    assert main(["derivations", D16]) == EXIT_OK
    assert main(["derivations", W81, "--level", "2"]) == EXIT_OK
    assert main(["oracle-compare", W81]) == EXIT_OK


def test_identities_command():
    """Test the identity suite on a 3-group and its refusal on a 2-group."""
    assert main(["identities", HEISENBERG]) == EXIT_OK
    assert main(["identities", D16]) == EXIT_FAILURE


def test_corpus_command():
    """Test corpus run with the batch runner mocked out."""
    report = {
        "results": [{
            "name": "D16", "criterion": "DS-fallback", "expected": "DS-fallback",
            "matches_expected": True, "verified": True, "failed_check": None,
            "witness_order": 2, "certificate_path": None,
        }],
        "summary": {"analyzed": 1, "verified": 1, "mismatches": 0, "errors": 0},
        "status": "success",
    }
    with mock.patch("pgaut_runner.run_corpus", return_value=report) as run:
        assert main(["corpus", "run", "--filter", "D16xC2"]) == EXIT_OK
    entries = run.call_args[0][0]
    assert [e.name for e in entries] == ["D16xC2xC2"]

    report["summary"]["errors"] = 1
    with mock.patch("pgaut_runner.run_corpus", return_value=report):
        assert main(["corpus", "run"]) == EXIT_FAILURE

    assert main(["corpus", "run", "--filter", "no-such-group"]) == EXIT_FAILURE


def test_config_file_option():
    """Test --config with a file that lowers the order cap."""
    with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
        json.dump({"analysis": {"max_order": 8}}, f)
        path = f.name
    try:
        assert main(["analyze", D16, "--config", path]) == EXIT_CAP
        assert main(["analyze", D16, "--config", path, "--max-order", "16"]) == EXIT_OK
    finally:
        os.unlink(path)
    assert main(["analyze", D16, "--config", "/nonexistent/config.json"]) == EXIT_FAILURE


def test_derivation_rows_without_standing_hypothesis():
    """Test that the gap column is not reported when C_G(Z(Φ)) != Φ."""
    for name in ("D16", "W81"):
        action = build_module_action(get_entry(name).build())
        rows = derivation_rows(action, list(range(2, action.nilpotency_class + 2)))
        assert rows
        assert all(row[-1] == NO_STANDING_HYPOTHESIS for row in rows)


def test_derivation_rows_with_standing_hypothesis():
    """Test the gap column on a group where C_G(Z(Φ)) = Φ."""
    action = build_module_action(get_entry("FreeClass3Order243").build())
    assert action.standing_hypothesis
    rows = derivation_rows(action, [2, 3, 4])
    assert [row[0] for row in rows] == ["2", "3", "4"]
    assert {row[-1] for row in rows} <= {"yes", "no"}
