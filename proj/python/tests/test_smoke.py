import json
import math
import os

import numpy as np
import pytest

import mmgc


def path_graph():
    w = 1.0
    return 4, [(0, 1, w), (1, 2, w), (2, 3, w)], {0: 1, 3: -1}


def test_harmonic_on_a_path():
    n, edges, labels = path_graph()
    ell = mmgc.harmonic(n, edges, labels)
    np.testing.assert_allclose(ell, [1, 1 / 3, -1 / 3, -1], atol=1e-12)
    ell = mmgc.harmonic(n, edges, labels, gamma_g=1.0)
    np.testing.assert_allclose(ell[1:3], [0.25, -0.25], atol=1e-12)


def test_soft_harmonic_two_vertices():
    ell = mmgc.soft_harmonic(2, [(0, 1, 1.0)], {0: 1}, c_l=1.0, c_u=0.01)
    np.testing.assert_allclose(ell, [0.990196, 0.980392], atol=1e-6)


def test_synthetic_problem_shape():
    p = mmgc.synthetic()
    assert p["points"].shape == (36, 2)
    assert len(p["edges"]) == 50
    assert p["labels"] == {0: 1, 35: -1}
    assert all(math.isclose(w, math.exp(-0.5)) for _, _, w in p["edges"])


def test_graph_cut_separates_ribbons():
    p = mmgc.synthetic()
    res = mmgc.train_graph_cut(p["points"], p["edges"], p["labels"], mmgc.Kernel.linear(),
                               gamma=0.1, gamma_g=1e-4, epsilon=0.01, bias=False)
    scores = res["model"].predict(p["points"])
    pred = np.where(scores >= 0, 1, -1)
    assert (pred == np.array(p["truth"])).all()
    assert len(res["induced"]) == 36


def test_svm_and_lapsvm_run():
    p = mmgc.synthetic()
    pts = p["points"]
    lab = [0, 35]
    model = mmgc.train_svm(pts[lab], [1, -1], mmgc.Kernel.rbf(1.0), gamma=0.1)
    assert model.duality_gap <= 1e-6 * (1 + abs(model.objective))
    mr = mmgc.train_lapsvm(pts, p["edges"], p["labels"], mmgc.Kernel.linear(), gamma=0.1, gamma_u=1.0, bias=False)
    assert mr.predict(pts).shape == (36,)
    assert "kernel,linear" in mr.to_csv()


def test_kernel_descriptors_round_trip():
    for k in (mmgc.Kernel.linear(), mmgc.Kernel.cubic(0.5), mmgc.Kernel.rbf(2.0)):
        assert mmgc.Kernel.parse(k.descriptor).descriptor == k.descriptor


def test_bounds():
    assert mmgc.inductive_error(3, 100, 0.05) == pytest.approx(0.44700, abs=1e-4)
    assert mmgc.stability_beta(0.0, 1, 0.01, 2.0) == pytest.approx(53.7401, abs=1e-3)
    report = json.loads(mmgc.bound_report(h=3, n=100, n_l=10))
    assert report["inputs"]["n_l"] == 10
    assert report["bound_p1"] >= report["delta_I"]


def test_errors_map_to_python_exceptions():
    with pytest.raises(mmgc.InvalidArgument):
        mmgc.inductive_error(3, 100, 2.0)
    with pytest.raises(mmgc.SingularSystem):
        mmgc.harmonic(3, [(0, 1, 1.0)], {0: 1})
    with pytest.raises(mmgc.Error):
        mmgc.uci_protocol("/nonexistent.csv")


def test_synthetic_study_json():
    table = mmgc.load_report(mmgc.synthetic_study([1e-4], ["linear"]))
    rows = {r["algorithm"]: r for r in table["rows"]}
    assert rows["gc"]["extras"]["train_error"] == 0.0
    assert rows["mr"]["extras"]["train_error"] > 0.0


@pytest.mark.skipif(not os.environ.get("MMGC_DATA_DIR"), reason="data directory not configured")
def test_uci_protocol_small():
    csv = os.path.join(os.environ["MMGC_DATA_DIR"], "optdigits.csv")
    text = mmgc.uci_protocol(csv, kernels=["linear"], fractions=[0.1], repetitions=1, max_tasks=1,
                             max_points=120, consecutive=True)
    table = mmgc.load_report(text)
    assert {r["algorithm"] for r in table["rows"]} == {"svm", "mr", "gc"}
    assert text == mmgc.uci_protocol(csv, kernels=["linear"], fractions=[0.1], repetitions=1, max_tasks=1,
                                     max_points=120, consecutive=True)
