"""The mgk command line, driven through run(argv)."""

from __future__ import annotations

import json
from fractions import Fraction

from morse_graph_kit.chain import BasedChainComplex
from morse_graph_kit.cli import run
from morse_graph_kit.graph import canonical_form, enumerate_graphs
from morse_graph_kit.invariant import CountsVector


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_d_squared_on_theta_graphs(capsys):
    assert run(["gc", "verify-d2", "--n", "2", "--m", "3"]) == 0
    report = _stdout_json(capsys)
    assert report["check"] == "d∘d"
    assert report["passed"]
    assert report["reproduce"] == "mgk gc verify-d2 --n 2 --m 3"


def test_cycle_closed_on_elementary_complexes(capsys):
    assert run(["verify", "cycle-closed", "--seed", "7"]) == 0
    assert _stdout_json(capsys)["passed"]


def test_seeded_runs_are_reproducible(capsys):
    argv = ["verify", "lemma-2-1", "--n", "2", "--m", "3", "--seed", "7"]
    assert run(argv) == 0
    first = capsys.readouterr().out
    assert run(argv) == 0
    assert capsys.readouterr().out == first


def test_sigma_check_passes(capsys):
    assert run(["verify", "sigma"]) == 0
    report = _stdout_json(capsys)
    assert report["check"] == "sigma"
    assert abs(report["stats"]["tau"] - report["stats"]["series"]) < 1e-10


def test_handle_slide_check_passes(capsys):
    assert run(["verify", "handle-slide", "--samples", "5"]) == 0
    assert _stdout_json(capsys)["stats"]


def test_missing_config_is_a_usage_error(capsys, tmp_path):
    assert run(["flow", "critical", "--config", str(tmp_path / "absent.toml")]) == 2
    assert "file not found" in capsys.readouterr().err


def test_unknown_command_is_a_usage_error(capsys):
    assert run(["verify", "nonsense"]) == 2


def test_out_writes_the_report_to_a_file(capsys, tmp_path):
    target = tmp_path / "reports" / "sigma.json"
    assert run(["verify", "sigma", "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["passed"]


def test_propagator_solve_reads_a_complex(capsys, tmp_path, elementary):
    path = tmp_path / "complex.json"
    path.write_text(json.dumps(elementary.to_json()), encoding="utf-8")
    assert run(["prop", "solve", "--complex", str(path)]) == 0
    assert capsys.readouterr().out.strip()


def test_enumerate_writes_one_graph_per_line(capsys):
    assert run(["graphs", "enumerate", "--n", "2", "--m", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 8
    assert all(json.loads(line)["n"] == 2 for line in lines)


def test_trace_checks_have_numbered_aliases(capsys):
    argv = ["--samples", "1", "--seed", "3", "--random-complexes", "--max-generators", "4"]
    assert run(["verify", "lemma-2-2", *argv]) == 0
    assert _stdout_json(capsys)["check"] == "xi-trace"
    assert run(["verify", "lemma-2-3", *argv, "--functionals", "2"]) == 0
    assert _stdout_json(capsys)["check"] == "independence"


def test_assemble_infers_labels_from_the_complexes(capsys, tmp_path):
    counts = CountsVector()
    for graph in enumerate_graphs(2, 3):
        _, sign = canonical_form(graph)
        counts.add(graph, 5 * sign)
    counts_path = tmp_path / "counts.json"
    counts_path.write_text(json.dumps(counts.to_json()), encoding="utf-8")
    complexes_path = tmp_path / "c.json"
    complexes_path.write_text(
        json.dumps({"complexes": [BasedChainComplex.zero(3).to_json()] * 3}),
        encoding="utf-8",
    )

    argv = ["invariant", "assemble", "--counts", str(counts_path)]
    assert run([*argv, "--complexes", str(complexes_path)]) == 0
    report = _stdout_json(capsys)
    assert report["space"] == "A(2,3)"
    assert [Fraction(c) for c in report["class_coords"]] == [40]

    assert run(argv) == 0
    assert [Fraction(c) for c in _stdout_json(capsys)["class_coords"]] == [40]


def test_unknown_generator_is_a_usage_error(capsys, tmp_path, elementary):
    path = tmp_path / "complex.json"
    path.write_text(json.dumps(elementary.to_json()), encoding="utf-8")
    argv = ["prop", "reduce", "--complex", str(path), "--top", "nope", "--bottom", "q"]
    assert run(argv) == 2
    assert "unknown generator 'nope'" in capsys.readouterr().err
