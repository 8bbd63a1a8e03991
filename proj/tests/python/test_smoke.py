import json
import pathlib

import numpy as np
import pytest

import pspace

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def toy_exports():
    return pspace.ExportMatrix(
        ["A", "B"], ["0001", "0002"], np.array([[10.0, 0.0], [10.0, 10.0]])
    )


def test_rca_hand_example():
    r = pspace.rca(toy_exports())
    assert r.at("A", "0001") == pytest.approx(1.5)
    assert r.at("B", "0002") == pytest.approx(1.5)
    s = pspace.binarize(r, 1.0)
    assert s.bits.tolist() == [[True, False], [False, True]]


def test_proximity_and_network():
    m = pspace.load_trade(str(FIXTURES / "toy3_trade.csv"), pspace.YearWindow(2000, 2000))
    p = pspace.proximity(pspace.binarize(pspace.rca(m)))
    assert np.allclose(p.phi, [[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    stats = pspace.phi_stats(p, [0.6])
    assert stats.frac_zero == 0.0
    assert stats.frac_below == [(0.6, 1.0)]
    edges = pspace.product_network(p, 0.4)
    assert [e[3] for e in edges].count("mst") == 2
    assert [e[3] for e in edges].count("overlay") == 1
    assert sorted(pspace.hierarchical_order(p)) == [0, 1, 2]


def test_diffusion_chain():
    phi = np.zeros((3, 3))
    phi[0, 1] = phi[1, 0] = phi[1, 2] = phi[2, 1] = 0.7
    p = pspace.ProximityMatrix(["1000", "1001", "1002"], phi)
    exports = pspace.ExportMatrix(["C00", "C01"], p.products, np.array([[5.0, 0, 0], [0, 1.0, 1.0]]))
    s = pspace.binarize(pspace.rca(exports))
    assert pspace.diffuse(s, p, "C00", phi0=0.65, iterations=2) == {"1000": 0, "1001": 1, "1002": 2}
    assert pspace.diffuse(s, p, "C00", phi0=0.75) == {"1000": 0}


def test_errors_are_python_exceptions(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("year,exporter,sitc4,value\n1999,CHL,2879,-5\n")
    with pytest.raises(pspace.ParseError, match=":2:"):
        pspace.load_trade(str(bad), pspace.YearWindow(1998, 2000))
    with pytest.raises(pspace.PspaceError):
        pspace.diffuse(pspace.binarize(pspace.rca(toy_exports())),
                       pspace.ProximityMatrix(["0001", "0002"], np.zeros((2, 2))), "ZZZ")


def test_cli_pipeline(tmp_path):
    synth = FIXTURES / "synth"
    code, out, err = pspace.run_cli([
        "run", "--trade", str(synth / "trade.csv"), "--income", str(synth / "income.csv"),
        "--compare", "1990:1995", "--out", str(tmp_path),
    ])
    assert code == 0, err
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["missing"] == []
    assert report["convergence"]["rows"][0]["phi0"] == 0.4
    code, out, _ = pspace.run_cli(["diffuse", "--help"])
    assert code == 0 and "--phi0" in out
