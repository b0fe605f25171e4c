"""Smoke test for the Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/python
Then run:                 python -m pytest python/smoke_test.py   (or plain python)
"""

import json
import math

import crpoint_py as cp


def test_models():
    eli = cp.Pair.model("elliptic")
    hyp = cp.Pair.model("hyperbolic")
    assert eli.det4() == 1.0 and eli.sign() == "elliptic"
    assert hyp.det4() == -1.0 and hyp.sign() == "hyperbolic"
    assert cp.sign_class(hyp)["tag"] == "hyperbolic"


def test_rejects_non_symmetric_b():
    try:
        cp.Pair([[1, 0], [0, 1]], [[0, 1], [0, 0]])
    except ValueError as e:
        assert "symmetric" in str(e)
    else:
        raise AssertionError("non-symmetric B accepted")


def test_group_action_scales_det4():
    p = cp.Pair.random(7)
    g = cp.GroupElement.random(11)
    q = g.act(p)
    det_p = g.P[0][0] * g.P[1][1] - g.P[0][1] * g.P[1][0]
    assert math.isclose(q.det4(), abs(det_p) ** 4 * p.det4(), rel_tol=1e-9)
    back = g.inverse().act(q)
    assert back.distance(p) < 1e-9


def test_normal_form_witness():
    p = cp.Pair.random(3)
    nf, witness = cp.normal_form(p)
    assert nf["class"]["type"] in ("type_i", "type_iii")
    image = witness.act(p)
    b = nf["B_reduced"]
    assert abs(image.B[0][1] - complex(*b[0][1])) < 1e-8


def test_non_generic_raises():
    jordan = cp.Pair([[0, 1], [1, 1j]], [[1, 0], [0, 1]])
    try:
        cp.normal_form(jordan)
    except cp.NonGenericError:
        pass
    else:
        raise AssertionError("Jordan-type A accepted")


def test_connect_and_surface():
    p = cp.Pair.random(5)
    path = cp.connect_to_model(p)
    assert path.certificate["pass"]
    assert path(0.0).distance(p) <= 1e-9
    assert path(1.0).distance(cp.Pair.model(p.sign())) <= 1e-9
    again = cp.Path.from_json(path.to_json())
    assert again.to_json() == path.to_json()
    report = cp.surface_check(path.reversed())
    assert report["pass"] and report["n_used"] == report["n_required"]


def test_levi():
    m = cp.levi_matrix("elliptic", [0.01, 0.02j, 0.0])
    assert all(abs(m[i][j] - m[j][i].conjugate()) < 1e-15 for i in range(3) for j in range(3))
    report = cp.levi_scan("hyperbolic", grid=3)
    assert report["violation_count"] == 0 and report["min_trace"] > 0
    json.dumps(report)


def test_selftest_small():
    results = cp.run_selftest(seed=1, cases=5)
    assert len(results) == 8
    assert all(r["pass"] for r in results), results


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_") and callable(fn):
            fn()
            print("ok", name)
