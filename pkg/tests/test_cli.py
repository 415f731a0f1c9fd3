import json

import pytest

from petal_lab import cli
from petal_lab.errors import InputError


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_parse_domain_kinds():
    assert type(cli.parse_domain({"kind": "strip", "a": -1.5707963, "b": 1.5707963})).__name__ == "Strip"
    assert cli.parse_domain({"kind": "half_plane", "height": 1.0}).height == 1.0
    assert cli.parse_domain({"kind": "widened_strip", "delta": 0.2}).b == pytest.approx(1.7707963, abs=1e-6)
    assert cli.parse_domain({"kind": "two_slit", "slit_end": -2.0}).slit_end == -2.0
    P = cli.parse_domain({"kind": "profile", "upper": [{"t": -1.0, "shape": {"const": 0.2}},
                                                       {"t": -5.0, "shape": {"tail": {"c": 1.0, "p": 2.0}}}]})
    assert float(P.upper(-10.0)) == pytest.approx(0.01)


@pytest.mark.parametrize("obj, path", [
    ({"kind": "strip", "a": 1.0, "b": 0.0}, "$"),
    ({"kind": "blob"}, "$.kind"),
    ({"kind": "widened_strip"}, "$.delta"),
    ({"kind": "profile", "upper": [{"t": -1.0, "shape": {"const": -0.1}}]}, "$.upper[0].shape.const"),
    ({"kind": "profile", "upper": [{"t": -1.0, "shape": {"tail": {"c": 1.0}}}]}, "$.upper[0].shape.tail.p"),
    ({"kind": "profile", "lower": [{"shape": {"const": 0.1}}]}, "$.lower[0].t"),
    ({"kind": "profile", "upper": [{"t": -1.0, "shape": {"const": 0.5}}, {"t": 1.0, "shape": {"const": 0.1}}]},
     "$.upper"),
])
def test_parse_errors_name_field(obj, path):
    with pytest.raises(InputError) as exc:
        cli.parse_domain(obj)
    assert str(exc.value).startswith(path)


def test_analyze_verdicts_and_exit_codes(tmp_path, capsys):
    strip = write(tmp_path, "s.json", {"kind": "strip", "a": -1.5707963, "b": 1.5707963})
    code, out = run(["analyze", strip], capsys)
    assert code == 0 and json.loads(out.out)["verdict"] == "conformal"
    code, out = run(["analyze", write(tmp_path, "d.json", {"kind": "two_slit"})], capsys)
    assert code == 0 and json.loads(out.out)["verdict"] == "conformal"
    p1 = write(tmp_path, "p1.json", {"kind": "profile",
                                     "upper": [{"t": -1.0, "shape": {"tail": {"c": 1.0, "p": 1.0}}}]})
    code, out = run(["analyze", p1, "--walks", "50000"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["verdict"] == "non_conformal"
    assert set(rep) == {"verdict", "criteria", "base_point", "notes"}
    for c in rep["criteria"]:
        assert {"name", "classification", "value", "error"} <= set(c)


def test_analyze_input_errors(tmp_path, capsys):
    code, out = run(["analyze", str(tmp_path / "missing.json")], capsys)
    assert code == 1 and "cannot read" in out.err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, out = run(["analyze", str(bad)], capsys)
    assert code == 1 and "invalid JSON" in out.err
    code, out = run(["analyze", write(tmp_path, "x.json", {"kind": "strip", "b": -3})], capsys)
    assert code == 1 and "$: need a < b" in out.err


def test_analyze_deterministic(tmp_path, capsys):
    spec = write(tmp_path, "p.json", {"kind": "profile",
                                      "upper": [{"t": -1.0, "shape": {"tail": {"c": 1.0, "p": 2.0}}}]})
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"r{threads}.json"
        assert cli.main(["analyze", spec, "--walks", "50000", "--seed", "7", "--threads", threads,
                         "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    json.loads(outs[0])  # re-parses


def test_analyze_csv_and_integrand(tmp_path, capsys):
    spec = write(tmp_path, "d.json", {"kind": "two_slit"})
    integ = tmp_path / "f.csv"
    code, out = run(["analyze", spec, "--format", "csv", "--integrand-csv", str(integ)], capsys)
    assert code == 0 and out.out.splitlines()[0] == "name,classification,value,error,exact"
    rows = integ.read_text().splitlines()
    assert rows[0] == "t,log_density_ratio,partial_integral" and len(rows) == 130


def test_orbit(tmp_path, capsys):
    strip = write(tmp_path, "s.json", {"kind": "strip", "a": -1.5707963267948966, "b": 1.5707963267948966})
    code, out = run(["orbit", strip, "--t-min", "-40", "--samples", "41"], capsys)
    lines = out.out.splitlines()
    assert code == 0 and lines[0] == "t,re,im,dist_to_alpha,rate,slope"
    first = lines[1].split(",")
    assert float(first[0]) == 0 and float(first[1]) == 0 and float(first[2]) == 0
    last = lines[-1].split(",")
    assert float(last[5]) == pytest.approx(1.0, abs=1e-3)
    # the rate column carries the log(2)/t offset of the strip model
    assert float(last[4]) == pytest.approx(1 - 0.6931471805599453 / 40, abs=1e-9)

    d = write(tmp_path, "d.json", {"kind": "two_slit"})
    code, out = run(["orbit", d], capsys)
    dists = [float(r.split(",")[3]) for r in out.out.splitlines()[1:]]
    assert all(b < a for a, b in zip(dists, dists[1:]))

    code, out = run(["orbit", d, "--point", "0", "2"], capsys)
    assert code == 1 and out.out.splitlines()[1].startswith("error,")


def test_parabolic_command(capsys):
    code, out = run(["parabolic", "koebe"], capsys)
    assert code == 0 and json.loads(out.out)["conformal"] is False
    code, out = run(["parabolic", "h2"], capsys)
    rep = json.loads(out.out)
    assert rep["conformal"] is True and rep["L"][1] == pytest.approx(-2, abs=1e-2)


def test_phi_delta_seed_env(monkeypatch, capsys):
    code, a = run(["phi-delta", "--walks", "5000", "--seed", "1"], capsys)
    monkeypatch.setenv("PETAL_LAB_SEED", "1")
    code, b = run(["phi-delta", "--walks", "5000", "--seed", "99"], capsys)
    assert code == 0 and a.out == b.out
    assert 0 < json.loads(a.out)["phi"] < 1
