import json

import pytest

from wittlab.cli import run

from paper_data import f4_chain_certificate


def run_cli(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_ring_info(capsys):
    code, data = run_cli(capsys, "ring-info", "--ring", "GF(2)[x]/(x^4)")
    assert code == 0
    assert data["schema"] == "witt-lab/1"
    assert data["config"]["ring"] == "GF(2)[x]/(x^4)"
    assert data["ring"]["units"] == 8
    assert data["ring"]["squares"] == ["1", "1+x^2"]
    assert data["ring"]["residue_field"] == "GF(2)"


def test_gw_gf2(capsys):
    code, data = run_cli(capsys, "gw", "--ring", "GF(2)")
    assert code == 0
    assert data["free_rank"] == 1
    assert data["invariant_factors"] == []


def test_compare_counterexample(capsys):
    code, data = run_cli(capsys, "compare", "--ring", "GF(2)[x]/(x^4)")
    assert code == 0
    assert data["kernel"]["invariant_factors"] == [2]
    assert data["is_isomorphism"] is False
    assert data["cokernel"] == {"free_rank": 0, "invariant_factors": []}


def test_kmw_and_witt(capsys):
    code, data = run_cli(capsys, "kmw", "--ring", "GF(2)[x]/(x^4)")
    assert code == 0
    assert data["free_rank"] == 1 and data["invariant_factors"] == [2, 2, 2]
    code, data = run_cli(capsys, "witt", "--ring", "GF(2)[x]/(x^4)")
    assert code == 0
    assert data["free_rank"] == 0 and data["invariant_factors"] == [2, 2, 2]


def test_diagonalize(capsys):
    gram = json.dumps([[0, 1], [1, 0]])
    code, data = run_cli(capsys, "diagonalize", "--ring", "Z/4", "--gram", gram)
    assert code == 0
    assert data["units"] == []
    assert len(data["blocks"]) == 1


def test_chain_roundtrip_and_verify(tmp_path, capsys):
    gram = json.dumps([[1, 0], [0, 1]])
    frm = json.dumps([[1, 0], [0, 1]])
    to = json.dumps([[1, 1], [1, 2]])
    cert_path = tmp_path / "chain.json"
    code, data = run_cli(
        capsys, "chain", "--ring", "GF(3)", "--gram", gram,
        "--from", frm, "--to", to, "--output", str(cert_path),
    )
    assert code == 0
    assert data["certificate"]["ring"] == "GF(3)"
    code, data = run_cli(capsys, "verify", "--cert", str(cert_path))
    assert code == 0
    assert data["valid"] is True


def test_verify_paper_chain(tmp_path, capsys):
    path = tmp_path / "f4.json"
    path.write_text(json.dumps(f4_chain_certificate()))
    code, data = run_cli(capsys, "verify", "--cert", str(path))
    assert code == 0
    assert data["valid"] is True and data["kind"] == "chain"


def test_verify_rejects_corrupted_chain(tmp_path, capsys):
    cert = f4_chain_certificate()
    cert["bases"][3] = cert["bases"][0]  # break the overlap condition
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cert))
    code, data = run_cli(capsys, "verify", "--cert", str(path))
    assert code == 1
    assert data["valid"] is False
    assert "step" in data["diagnostic"] or "start" in data["diagnostic"]


def test_verify_congruence_witness(capsys):
    witness = {
        "source": [[2, 0], [0, 4]],
        "target": [[1, 0], [0, 3]],
        "matrix": [[1, 4], [4, 2]],
    }
    code, data = run_cli(
        capsys, "verify", "--ring", "GF(5)", "--cert", json.dumps(witness)
    )
    assert code == 0 and data["valid"] is True
    witness["target"] = [[1, 0], [0, 4]]
    code, data = run_cli(
        capsys, "verify", "--ring", "GF(5)", "--cert", json.dumps(witness)
    )
    assert code == 1 and data["valid"] is False


def test_chain_unreachable_exit_codes(capsys):
    gram = json.dumps([[1 if i == j else 0 for j in range(4)] for i in range(4)])
    e = json.dumps([[1 if i == j else 0 for j in range(4)] for i in range(4)])
    ehat = json.dumps([[0 if i == j else 1 for j in range(4)] for i in range(4)])
    code, data = run_cli(
        capsys, "chain", "--ring", "GF(2)", "--gram", gram, "--from", e, "--to", ehat,
        "--allow-unreachable",
    )
    assert code == 0 and data["unreachable"] is True
    code, data = run_cli(
        capsys, "chain", "--ring", "GF(2)", "--gram", gram, "--from", e, "--to", ehat,
    )
    assert code == 1 and data["unreachable"] is True


def test_usage_errors(capsys):
    code = run(["gw", "--ring", "Z/6"])
    out = capsys.readouterr()
    assert code == 2
    assert json.loads(out.out.splitlines()[0])["error"]

    code = run(["gw"])  # missing --ring
    out = capsys.readouterr()
    assert code == 2

    code = run(["gw", "--ring", "GF(3)", "--bogus-flag"])
    out = capsys.readouterr()
    assert code == 2


def test_steinberg_check(capsys):
    code, data = run_cli(capsys, "steinberg-check", "--ring", "GF(5)")
    assert code == 0
    assert data["ok"] is True and data["asserted"] is True
    code, data = run_cli(capsys, "steinberg-check", "--ring", "GF(3)")
    assert code == 0
    assert data["asserted"] is False


def test_oracle_output(capsys):
    code, data = run_cli(
        capsys, "oracle", "--ring", "GF(5)", "--rank-cap", "2", "--stab-cap", "1"
    )
    assert code == 0
    assert data["classes"]["1"] and data["classes"]["2"]
    assert data["undecided"] == []


def test_determinism_byte_identical(capsys):
    code1 = run(["gw", "--ring", "Z/9", "--seed", "0"])
    out1 = capsys.readouterr().out
    code2 = run(["gw", "--ring", "Z/9", "--seed", "0"])
    out2 = capsys.readouterr().out
    assert code1 == code2 == 0
    assert out1 == out2
