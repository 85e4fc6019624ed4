import json

import numpy as np
import pytest

from verblunsky.cli import dumps, main
from verblunsky.sampling import random_hankel_spec, random_toeplitz_spec


def _write(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def _mat(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.atleast_2d(M)]


def _blocks(doc, key):
    return [np.array([[complex(*x) for x in row] for row in b]) for b in doc[key]]


def _run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_toeplitz_to_rho_example(tmp_path, capsys):
    src = _write(tmp_path / "t.json", {"kind": "toeplitz", "p": 1, "s": [[[2]]], "nu": 0})
    out = tmp_path / "r.json"
    code, _, err = _run(["toeplitz-to-rho", src, str(out)], capsys)
    assert code == 0 and "identity_residual" in err
    rho = _blocks(json.loads(out.read_text()), "rho")
    assert np.abs(rho[0]).max() <= 1e-12


def test_omega_to_hankel_example(tmp_path, capsys):
    src = _write(tmp_path / "o.json", {"kind": "omega", "p": 1, "omega": [[[0, 1]], [[[0, -1], 0]]]})
    out = tmp_path / "h.json"
    assert _run(["omega-to-hankel", src, str(out)], capsys)[0] == 0
    H = _blocks(json.loads(out.read_text()), "H")
    assert np.allclose(np.array(H).ravel(), [1, 0, 1], atol=1e-15)


def test_contraction_violation_exit_3(tmp_path, capsys):
    src = _write(tmp_path / "r.json", {"kind": "verblunsky_rho", "p": 1, "rho": [[[1.5]]]})
    assert _run(["rho-to-toeplitz", src, str(tmp_path / "o.json")], capsys)[0] == 3


@pytest.mark.parametrize("doc", [
    {"kind": "toeplitz", "p": 1},
    {"kind": "nonsense", "p": 1},
    {"kind": "hankel", "p": 2, "H": [[[1]]]},
    {"kind": "hankel", "p": 1, "H": [[[1]], [[0]]]},
    {"kind": "omega", "p": 1, "omega": [[["a", 1]]]},
])
def test_schema_errors_exit_2(tmp_path, capsys, doc):
    src = _write(tmp_path / "bad.json", doc)
    cmd = {"toeplitz": "toeplitz-to-rho", "hankel": "hankel-to-omega"}.get(doc["kind"], "omega-to-hankel")
    assert _run([cmd, src], capsys)[0] == 2


def test_malformed_json_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(["hankel-to-omega", str(bad)], capsys)[0] == 2


def test_refuses_in_place_output(tmp_path, capsys):
    src = _write(tmp_path / "t.json", {"kind": "toeplitz", "p": 1, "s": [[[2]]]})
    assert _run(["toeplitz-to-rho", src, src], capsys)[0] == 2
    assert json.loads(open(src).read())["kind"] == "toeplitz"


def test_verify_examples(tmp_path, capsys):
    h = _write(tmp_path / "h.json", {"kind": "hankel", "p": 1, "H": [[[1]], [[0]], [[1]]]})
    code, out, _ = _run(["verify", h, "--suite", "identity"], capsys)
    report = json.loads(out)
    assert code == 0 and report["pass"]
    assert all(c["residual"] <= 1e-14 for c in report["checks"])
    t = _write(tmp_path / "t.json", {"kind": "toeplitz", "p": 1, "s": [[[1]]], "nu": [[0]]})
    code, out, _ = _run(["verify", t, "--suite", "roundtrip"], capsys)
    assert code == 0 and json.loads(out)["pass"]
    bad = _write(tmp_path / "hi.json", {"kind": "hankel", "p": 1, "H": [[[1]], [[2]], [[1]]]})
    assert _run(["verify", bad], capsys)[0] == 3
    assert _run(["verify", t, "--suite", "moments"], capsys)[0] == 2


def test_verify_failed_check_exit_1(tmp_path, capsys):
    h = _write(tmp_path / "h.json", {"kind": "hankel", "p": 1, "H": [[[1]], [[0.3]], [[1]]]})
    code, out, _ = _run(["verify", h, "--tol", "1e-300"], capsys)
    assert code == 1 and not json.loads(out)["pass"]


def test_verify_all_suites_on_random_hankel(tmp_path, capsys, rng):
    sp, _ = random_hankel_spec(rng, 2, 3)
    h = _write(tmp_path / "h.json", {"kind": "hankel", "p": 2, "H": [_mat(b) for b in sp.H]})
    code, out, _ = _run(["verify", h], capsys)
    report = json.loads(out)
    assert code == 0, report
    assert {c["check"] for c in report["checks"]} >= {"moments_match", "spectral_isometry", "hankel_roundtrip_blocks"}


def test_moments_examples(tmp_path, capsys):
    m = _write(tmp_path / "m.json", {"kind": "measure", "p": 1,
                                     "atoms": [{"t": -1, "w": [[0.5]]}, {"t": 1, "w": [[0.5]]}]})
    code, out, err = _run(["moments", m, "--n", "2"], capsys)
    assert code == 0 and json.loads(err)["leading_sections_pd"] == [True, True]
    assert np.allclose(np.array(_blocks(json.loads(out), "H")).ravel(), [1, 0, 1])
    pi = np.pi
    m = _write(tmp_path / "mt.json", {"kind": "measure", "p": 1,
                                      "atoms": [{"t": 0, "w": [[pi]]}, {"t": pi, "w": [[pi]]}]})
    code, out, _ = _run(["moments", m, "--kind", "toeplitz", "--n", "2"], capsys)
    s = _blocks(json.loads(out), "s")
    assert code == 0 and np.allclose(s[0], 1) and np.abs(s[1]).max() <= 1e-15
    m = _write(tmp_path / "d.json", {"kind": "measure", "p": 1, "atoms": [{"t": 0, "w": [[1]]}]})
    code, out, _ = _run(["moments", m, "--n", "1"], capsys)
    assert np.allclose(np.array(_blocks(json.loads(out), "H")).ravel(), [1])


def test_weyl_examples(tmp_path, capsys):
    t = _write(tmp_path / "t.json", {"kind": "toeplitz", "p": 1, "s": [[[2]]], "nu": 0})
    code, out, _ = _run(["weyl", t, "--eval", "-i"], capsys)
    assert code == 0 and json.loads(out)["evaluations"][0]["phi"] == [[[0, -1]]]
    t1 = _write(tmp_path / "t1.json", {"kind": "toeplitz", "p": 1, "s": [[[2]]], "nu": [[1]]})
    code, out, _ = _run(["weyl", t1, "--eval", "-i"], capsys)
    assert json.loads(out)["evaluations"][0]["phi"] == [[[1, -1]]]
    assert _run(["weyl", t, "--eval", "+i"], capsys)[0] == 3


def test_pipeline_roundtrip_on_disk(tmp_path, capsys, rng):
    sp = random_toeplitz_spec(rng, 2, 3)
    t = _write(tmp_path / "t.json", {"kind": "toeplitz", "p": 2, "s": [_mat(b) for b in sp.s], "nu": _mat(sp.nu)})
    assert _run(["toeplitz-to-rho", t, str(tmp_path / "r.json")], capsys)[0] == 0
    assert _run(["rho-to-toeplitz", str(tmp_path / "r.json"), str(tmp_path / "t2.json")], capsys)[0] == 0
    back = json.loads((tmp_path / "t2.json").read_text())
    assert max(np.abs(a - b).max() for a, b in zip(_blocks(back, "s"), sp.s)) <= 1e-8

    hs, _ = random_hankel_spec(rng, 2, 3)
    h = _write(tmp_path / "h.json", {"kind": "hankel", "p": 2, "H": [_mat(b) for b in hs.H]})
    assert _run(["hankel-to-omega", h, str(tmp_path / "o.json")], capsys)[0] == 0
    assert _run(["omega-to-hankel", str(tmp_path / "o.json"), str(tmp_path / "h2.json")], capsys)[0] == 0
    back = json.loads((tmp_path / "h2.json").read_text())
    assert max(np.abs(a - b).max() for a, b in zip(_blocks(back, "H"), hs.H)) <= 1e-8


def test_outputs_byte_deterministic(tmp_path, capsys, rng):
    hs, _ = random_hankel_spec(rng, 2, 3)
    h = _write(tmp_path / "h.json", {"kind": "hankel", "p": 2, "H": [_mat(b) for b in hs.H]})
    for name in ("a", "b"):
        main(["hankel-to-omega", h, str(tmp_path / f"{name}.json")])
        main(["verify", h, str(tmp_path / f"v{name}.json")])
    capsys.readouterr()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert (tmp_path / "va.json").read_bytes() == (tmp_path / "vb.json").read_bytes()


def test_dumps_format():
    text = dumps({"b": [-0.0, 0.1], "a": True})
    assert text == '{"a": true, "b": [0, 0.10000000000000001]}\n'
