"""Smoke test for the koflow Python module. Exits nonzero on the first failed check."""

import json
import sys

import koflow


def main() -> int:
    v = koflow.irrep(2, 1, "-")
    assert v["n"] == 2 and len(v["E"]) == 2 and len(v["F"]) == 1, v
    assert koflow.abs_class(v) == {"degree": 0, "group": "Z", "value": -1}

    c = koflow.irrep(0, 1)
    assert koflow.abs_class(c) == {"degree": 2, "group": "Z2", "value": 1}
    bad = dict(c, F=[[0.0, -1.0, 2.0, 0.0]])
    assert koflow.check(bad)["valid"] is False

    l1 = [[0.0, -1.0], [1.0, 0.0]]
    minus_l1 = [[0.0, 1.0], [-1.0, 0.0]]
    idx = koflow.pair_index(l1, minus_l1)
    assert idx["kernel_dim"] == 2 and idx["class"]["value"] == 1, idx

    assert koflow.projection_index([[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 0.0]]) == 1
    assert koflow.orthogonal_parity([[1.0, 0.0], [0.0, 1.0]], [[-1.0, 0.0], [0.0, 1.0]]) == 1

    for n in (3, 8):
        k = koflow.kitaev_flow(n)
        assert k["class"] == {"degree": 2, "group": "Z2", "value": 1}, k
        assert k["class"] == k["endpoint_class"]

    w = koflow.irrep(0, 3, "-")
    assert koflow.normalization_flow(w)["class"] == koflow.abs_class(w)
    assert koflow.flux_flow(w, 5)["class"] == koflow.abs_class(w)

    try:
        koflow.irrep(0, 1, "+")
    except ValueError:
        pass
    else:
        raise AssertionError("chirality on a signature with one irreducible was accepted")

    code, out, _ = koflow.cli(["kitaev", "--N", "4"])
    assert code == 0 and json.loads(out)["value"] == 1, (code, out)
    code, _, err = koflow.cli(["kitaev", "--N", "2"])
    assert code == 2 and json.loads(err)["error"] == "invalid"

    print(f"koflow {koflow.__version__}: smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
