from __future__ import annotations

import json

import pytest

from yangcheck import REGISTRY, SuiteSpec, emit_report, run_suite
from yangcheck import checks
from yangcheck.cli import combined_exit, main
from yangcheck.report import EXIT_CODES, INCONCLUSIVE, SCHEMA_VERSION

SUITES = [
    "ybe", "unitarity", "crossing", "g-series", "rtt-series", "srel", "usflg", "rsrs",
    "rsrs-multi", "shuffle", "fusion", "welldef", "quasi-assoc", "quantum-current",
    "centrality-critical", "lemma31", "invariants", "commute-invariants", "center-commute",
    "invariant-generation", "sdet-identity", "gamma-factorization", "classical-limit",
    "rewrite-confluence",
]


def test_registry_is_complete():
    assert sorted(REGISTRY) == sorted(SUITES)
    for name, (body, anchor) in REGISTRY.items():
        assert callable(body) and anchor


def test_run_suite_rejects_N1():
    with pytest.raises(ValueError):
        run_suite(SuiteSpec("ybe", N=1))


def test_run_suite_rejects_unknown():
    with pytest.raises(ValueError):
        run_suite(SuiteSpec("nope"))


def test_spec_validation():
    with pytest.raises(ValueError):
        SuiteSpec("ybe", window=(3, 1))
    with pytest.raises(ValueError):
        SuiteSpec("rsrs-multi", shapes=((3, 1),))


def test_cli_verified_exit_and_json(capsys):
    assert main(["ybe", "--N", "2", "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert {"suite", "params", "status", "precision", "residual", "elapsed_ms",
            "schema_version"} <= set(out)
    assert out["schema_version"] == SCHEMA_VERSION
    assert out["status"] == "verified" and out["residual"] is None


def test_cli_text_output(capsys):
    assert main(["g-series", "--N", "3"]) == 0
    text = capsys.readouterr().out
    assert text.startswith("g-series: verified")


@pytest.mark.parametrize("argv", [
    [],
    ["ybe", "--all"],
    ["nope"],
    ["ybe", "--N", "1"],
    ["ybe", "--window", "3"],
    ["srel", "--twist", "symplectic", "--N", "3"],
    ["srel", "--twist", "file:/nonexistent/g.txt"],
    ["ybe", "--level", "1/0"],
    ["ybe", "--format", "xml"],
    ["invariants", "--level", "0"],
])
def test_cli_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 64


def test_json_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        assert main(["classical-limit", "--format", "json", "--modes", "2"]) == 0
        d = json.loads(capsys.readouterr().out)
        d.pop("elapsed_ms")
        outs.append(json.dumps(d, sort_keys=True))
    assert outs[0] == outs[1]


def test_failed_report_has_location(monkeypatch, capsys):
    # a module built at the wrong level breaks the level-dependent relation
    real = checks.vacuum
    monkeypatch.setattr(checks, "vacuum", lambda N, c, K: real(N, c + 1, K))
    code = main(["rtt-series", "--h-order", "3", "--degree", "1", "--modes", "1",
                 "--window", "-3:3", "--level", "0", "--format", "json"])
    out = json.loads(capsys.readouterr().out)
    assert code == EXIT_CODES["failed"] == 1
    assert out["status"] == "failed"
    assert out["residual"]["check"].startswith("rtt3")
    assert out["residual"]["location"]


def test_inconclusive_when_window_exceeds_box(monkeypatch):
    # shrink the box of the srel check below the window
    real = checks.twisted
    monkeypatch.setattr(checks, "twisted",
                        lambda spec, tw, c, names, caps, K=None:
                        real(spec, tw, c, names, {n: 2 for n in caps}, K))
    rep = run_suite(SuiteSpec("srel", K=2, D=0, window=(-4, 4), twist="orthogonal", level=0))
    assert rep.status == INCONCLUSIVE
    assert rep.exit_code == 2
    assert "incomplete_checks" in rep.residual


def test_emit_report_rejects_format():
    rep = run_suite(SuiteSpec("ybe"))
    with pytest.raises(ValueError):
        emit_report(rep, "yaml")


def test_list(capsys):
    assert main(["--list"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == len(SUITES)


@pytest.mark.parametrize("codes,expected", [([0, 0], 0), ([0, 2], 2), ([2, 1, 0], 1), ([1], 1)])
def test_combined_exit(codes, expected):
    assert combined_exit(codes) == expected


def test_window_with_negative_lower_end(capsys):
    assert main(["ybe", "--window", "-2:2", "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["params"]["window"] == [-2, 2]
