"""Smoke test for the gate_witness extension module.

Build and install the wheel first:

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/gate_witness-*.whl
    python python/smoke_test.py
"""

import json
import math

import gate_witness as gw


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol


def main():
    table = gw.classify()
    assert table["zx"] == "identity", table
    assert table["zz"] == table["zy"] == "CNOT", table
    assert table["xx"] == table["yx"] == "reverse CNOT", table
    assert all(table[b] == "entangle" for b in ("xy", "xz", "yy", "yz")), table
    assert gw.table("swap").count("other") == 9

    p = 0.1
    noisy = gw.Channel.cnot().then(gw.Channel.depolarizing(p))
    assert noisy.dim == 4
    assert close(gw.classical_fidelity(noisy, "zz"), 1 - 3 * p / 4)
    assert close(noisy.process_fidelity(), 1 - 15 * p / 16)
    lower, upper = gw.process_bounds(*(gw.classical_fidelity(noisy, b) for b in ("zz", "xx", "zy", "yx")))
    assert close(lower, 0.85) and close(upper, 0.925)
    assert lower <= noisy.process_fidelity() <= upper

    fidelities = gw.classical_fidelities(noisy)
    assert len(fidelities) == 9 and close(fidelities["F_xz->ent"], 0.925)
    bell = gw.entanglement_fidelity(noisy, "yz", route="bell")
    local = gw.entanglement_fidelity(noisy, "yz", route="local")
    assert close(bell, local, 1e-10)

    random = gw.Channel.cnot().then(gw.Channel.random(rank=4, seed=7))
    assert close(random.process_fidelity(), gw.Channel.from_spec('{"type": "ideal"}').then(random).process_fidelity())
    # First diagonal entry of the sum of K^dagger K.
    completeness = sum(abs(k[r][0]) ** 2 for k in random.kraus_ops() for r in range(4))
    assert close(completeness, 1.0, 1e-10)

    s = 1 / math.sqrt(2)
    phi = [[s], [0], [0], [s]]
    rho = [[phi[i][0] * phi[j][0] for j in range(4)] for i in range(4)]
    assert close(gw.wootters_concurrence(rho), 1.0, 1e-10)
    assert close(gw.gate_entanglement_capability(0.925, 0.925, 0.925, 0.925), 0.7)

    report = json.loads(gw.report('{"noise": {"type": "depolarizing", "p": 0.1}}'))
    assert close(report["process_fidelity_exact"], 0.90625)
    sampled = '{"noise": {"type": "depolarizing", "p": 0.1}, "mode": "sampled", "shots": 10000, "seed": 42}'
    assert gw.report(sampled) == gw.report(sampled)

    sweep = json.loads(gw.sweep('{"noise": {"type": "depolarizing", "p": 0}}', "0:0.4:41"))
    assert abs(sweep["capability_crossing"] - 1 / 3) <= 0.01 + 1e-12

    summary = json.loads(gw.verify_bounds(50, seed=7, rank=4))
    assert summary["violations"] == 0

    for bad in (lambda: gw.Channel.depolarizing(1.5), lambda: gw.report("{}"), lambda: gw.verify_bounds(0)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("gate_witness smoke test passed")


if __name__ == "__main__":
    main()
