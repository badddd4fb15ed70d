"""Problem bundles and the command line."""

import json

import pytest

from cyclic_forge import cli
from cyclic_forge.diagram import DiagramSpec
from cyclic_forge.pairings import Pairing
from cyclic_forge.pipeline import bundle_files, generate_problem, make_problem, target_relation, write_bundle
from cyclic_forge.proof import check_soundness

BUNDLE = {"diagram.svg", "statement.json", "proof.txt", "trace.json", "seed.txt"}


def test_bundle_contents(tmp_path):
    p = make_problem(DiagramSpec(Pairing.of([(1, 4), (2, 5), (3, 6)]), seed=9))
    out = write_bundle(p, tmp_path / "b")
    assert {f.name for f in out.iterdir()} == BUNDLE
    assert (out / "seed.txt").read_text() == "9\n"
    data = json.loads((out / "statement.json").read_text())
    assert data["spec"]["seed"] == 9
    assert data["statement"]["text"] == p.diagram.statement.render()
    assert "Prove that" in (out / "proof.txt").read_text()


def test_bundles_are_deterministic():
    a = bundle_files(generate_problem(4, 17, permute=True))
    b = bundle_files(generate_problem(4, 17, permute=True))
    assert a == b


def test_proof_concludes_the_statement():
    p = generate_problem(3, 5, permute=True)
    assert p.trace.conclusion.expr == target_relation(p.diagram).expr


@pytest.mark.parametrize("seed", range(3))
def test_heptagon_from_merged_octagon(seed):
    p = generate_problem(4, seed, merges=1)
    assert p.diagram.structure.slots == 7


def test_find_numeric_mode_has_answer():
    p = generate_problem(3, 2, mode="find-numeric")
    assert p.posed.answer.endswith("°")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_catalog(tmp_path, capsys):
    code, out, _ = run(capsys, "catalog", "--n", "3", "--out", str(tmp_path / "c3.json"))
    assert code == 0 and out.startswith("3 orbits")
    code, out, _ = run(capsys, "catalog", "--n", "2", "--out", str(tmp_path / "c2.json"))
    assert out.startswith("1 orbit ")
    code, _, err = run(capsys, "catalog", "--n", "9", "--out", str(tmp_path / "c9.json"))
    assert code != 0 and "limit" in err


def test_cli_verify(capsys):
    code, out, _ = run(capsys, "verify", "--samples", "500", "--seed", "1")
    report = json.loads(out)
    assert code == 0 and report["max_residual"] < 1e-9
    assert {-2, -1, 1, 2} <= {int(k) for k in report["windings"]}


def test_cli_rejects_invalid_pairing(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--pairing", "1-3,2-4", "--seed", "1", "--out", str(tmp_path))
    assert code == cli.EXIT_VERIFY and "even gap" in err


def test_cli_generate_is_reproducible(tmp_path, capsys):
    args = ["generate", "--pairing", "1-2,3-10,4-7,5-8,6-9", "--seed", "4"]
    run(capsys, *args, "--out", str(tmp_path / "a"))
    run(capsys, *args, "--out", str(tmp_path / "b"))
    for name in BUNDLE:
        assert (tmp_path / "a/problem_4" / name).read_text() == (tmp_path / "b/problem_4" / name).read_text()


def test_cli_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "21")
    code, out, _ = run(capsys, "generate", "--n", "2", "--out", str(tmp_path))
    assert code == 0 and "problem_21" in out


def test_cli_exhaustion_exit_code(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--n", "5", "--seed", "1", "--min-cross", "0.99",
                       "--max-attempts", "5", "--out", str(tmp_path))
    assert code == cli.EXIT_EXHAUSTED and "seed" in err


def test_cli_collection_manifest_is_stable(tmp_path, capsys):
    for sub in ("a", "b"):
        code, out, _ = run(capsys, "collection", "--shape", "hexagon", "--seed", "0", "--out", str(tmp_path / sub))
        assert code == 0 and out.startswith("49 distinct")
    a = (tmp_path / "a/manifest.json").read_text()
    assert a == (tmp_path / "b/manifest.json").read_text()
    assert json.loads(a)["count"] == 49


def test_stalled_helper_order_falls_back_to_greedy_choice():
    # helpers taken in name order all sit at one vertex and propagation stalls
    p = generate_problem(4, 11500, permute=True, merges=1)
    assert p.seed == 11500 and p.diagram.structure.slots == 7
    assert check_soundness(p.trace.state) < 1e-9
