"""Tests for the command line interface."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from sarpomcp.cli import main
from sarpomcp.models import EpisodeResult
from sarpomcp.scenario import load_scenario

from . import fixture_path

GREEDY_WALK = str(fixture_path("greedy_walk.yaml"))


def test_gen_scenario(tmp_path: Path) -> None:
    """Test generated scenario files carry the override flags."""
    out = tmp_path / "scenario.yaml"
    code = main(
        [
            "gen-scenario",
            "--belief",
            "one_peak",
            "--seed",
            "4",
            "--out",
            str(out),
            "--iterations",
            "500",
            "--no-fly-zones",
            "0",
        ]
    )
    assert code == 0
    sc = load_scenario(out)
    assert sc.name == "one_peak-4"
    assert sc.planner.max_iterations == 500
    assert sc.no_fly_zones == []


def test_run(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test a greedy episode writes its record and event log."""
    events = tmp_path / "events.jsonl"
    code = main(
        [
            "run",
            "--scenario",
            GREEDY_WALK,
            "--planner",
            "greedy",
            "--out",
            str(tmp_path),
            "--events",
            str(events),
            "--no-render",
        ]
    )
    assert code == 0
    assert capsys.readouterr().out == "all_found: 5 epochs, 1/1 targets, 21 m\n"
    record = json.loads((tmp_path / "episode.json").read_text(encoding="utf-8"))
    assert record["epochs_used"] == 5
    assert "wall_ms_per_epoch" not in record
    kinds = [
        json.loads(line)["kind"]
        for line in events.read_text(encoding="utf-8").splitlines()
    ]
    assert kinds.count("plan") == 5
    assert "capture" in kinds
    assert not (tmp_path / "trajectory.png").exists()


def test_run_and_render(tmp_path: Path) -> None:
    """Test an episode record renders again from disk."""
    assert (
        main(
            [
                "run",
                "--scenario",
                GREEDY_WALK,
                "--planner",
                "lawnmower",
                "--max-epochs",
                "5",
                "--out",
                str(tmp_path),
            ]
        )
        == 0
    )
    assert (tmp_path / "trajectory.png").exists()
    record = (tmp_path / "episode.json").read_text(encoding="utf-8")
    assert EpisodeResult.from_json(record).epochs_used <= 5
    image = tmp_path / "again.png"
    code = main(
        [
            "render",
            "--scenario",
            GREEDY_WALK,
            "--episode",
            str(tmp_path / "episode.json"),
            "--out",
            str(image),
        ]
    )
    assert code == 0
    assert image.read_bytes() == (tmp_path / "trajectory.png").read_bytes()


def test_belief_maps(tmp_path: Path) -> None:
    """Test the prior maps are written."""
    out = tmp_path / "beliefs.png"
    assert main(["belief-maps", "--scenario", GREEDY_WALK, "--out", str(out)]) == 0
    assert out.read_bytes()[:4] == b"\x89PNG"


def test_sweep(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    """Test a one-cell sweep writes its tables."""
    code = main(
        [
            "sweep",
            "--scenario",
            GREEDY_WALK,
            "--seeds",
            "1",
            "--belief",
            "one_peak",
            "--dfs",
            "0.9",
            "--alphas",
            "0",
            "--iterations",
            "20",
            "--workers",
            "1",
            "--no-wall-clock",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 0
    table = (tmp_path / "sweep_table.md").read_text(encoding="utf-8")
    assert capsys.readouterr().out == table
    assert table.splitlines()[2].startswith("| 0.9 | 0 | **")
    header = (tmp_path / "results.csv").read_text(encoding="utf-8").splitlines()
    config = [json.loads(line[2:]) for line in header if line.startswith("# ")]
    assert {key for entry in config for key in entry} == {
        "experiment",
        "scenario",
        "sweep",
    }
    assert (tmp_path / "summary.csv").exists()


def test_missing_scenario(
    tmp_path: Path, capsys: pytest.CaptureFixture[str]
) -> None:
    """Test errors end with exit code 1 and a message."""
    code = main(["belief-maps", "--scenario", str(tmp_path / "nope.yaml"), "--out", "x"])
    assert code == 1
    assert "sarpomcp: error:" in capsys.readouterr().err


def test_invalid_override(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    """Test an invalid flag value is reported as a configuration error."""
    code = main(
        [
            "run",
            "--scenario",
            GREEDY_WALK,
            "--iterations",
            "0",
            "--out",
            str(tmp_path),
        ]
    )
    assert code == 1
    assert "max_iterations" in capsys.readouterr().err


def test_run_dump_tree(tmp_path: Path) -> None:
    """Test every search tree of a run is written as text."""
    trees = tmp_path / "trees.txt"
    code = main(
        [
            "run",
            "--scenario",
            GREEDY_WALK,
            "--planner",
            "shrinking",
            "--iterations",
            "50",
            "--out",
            str(tmp_path),
            "--no-render",
            "--dump-tree",
            str(trees),
            "--dump-depth",
            "0",
        ]
    )
    assert code == 0
    lines = trees.read_text(encoding="utf-8").splitlines()
    record = json.loads((tmp_path / "episode.json").read_text(encoding="utf-8"))
    headers = [line for line in lines if line.startswith("== plan ")]
    assert headers[0] == "== plan 1 =="
    assert len(headers) == record["epochs_used"]
    assert lines[1].startswith("b N=50 ")
    assert len(lines) == 2 * len(headers)
