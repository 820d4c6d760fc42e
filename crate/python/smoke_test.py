"""Smoke test for the pyzominmax extension.

Build and install first:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
"""

import math
import tempfile
from pathlib import Path

import pyzominmax as zm


def close(a, b, tol=1e-12):
    return all(abs(u - v) <= tol for u, v in zip(a, b))


def main():
    assert close(zm.project_box([2.0, -3.0, 0.5], [-1.0] * 3, [1.0] * 3), [1.0, -1.0, 0.5])
    assert close(zm.project_l2_ball([3.0, 4.0], [0.0, 0.0], 1.0), [0.6, 0.8])
    assert close(zm.project_simplex([0.9, 0.7]), [0.6, 0.4])
    assert close(zm.inner_max_weights([0.4, 0.2], 0.5), [0.6, 0.4])
    alpha, beta = zm.theory_rates(1.0, 1.0, 1.0)
    assert math.isclose(beta, 1 / 8) and math.isclose(alpha, 8 / 265)
    assert math.isclose(zm.variance_bound(1.0, 1.0, 1, 0.1, 1, 1), 6.01)

    try:
        zm.project_simplex([])
    except ValueError:
        pass
    else:
        raise AssertionError("empty simplex projection should fail")

    quad = zm.Problem.quadratic(dim=3, seed=1)
    cfg = zm.SolverConfig(0.05, 0.05, 200, mu=0.01, q=5, y_mode="fo-pga", seed=3)
    trace = zm.solve(quad, cfg)
    assert len(trace) == 201
    assert trace.queries[-1] == cfg.expected_queries(quad) == 200 * 6
    assert trace.gap[-1] < trace.gap[0]
    fo = zm.solve(quad, cfg, solver="fo-min-max")
    assert fo.queries[-1] == 0 and fo.gap[-1] < trace.gap[-1]
    again = zm.solve(quad, cfg)
    assert again.x == trace.x

    toy = zm.Problem.toy()
    assert toy.evaluate([0.0, 0.0], [0.0, 0.0]) == 0.0
    assert 0.3 < zm.toy_regret([-0.195, 0.284]) < 0.4

    ens = zm.Problem.ensemble(seed=0)
    cfg = zm.SolverConfig(0.05, 0.01, 100, q=10, gap_every=10)
    for solver in ["zo-min-max", "zo-pgd", "zo-finite-sum"]:
        t = zm.solve(ens, cfg, solver=solver)
        losses = [v for _, v in t.metric("attack_loss")]
        assert losses[-1] < losses[0], solver
    try:
        zm.solve(ens, cfg, solver="fo-min-max")
    except ValueError:
        pass
    else:
        raise AssertionError("fo-min-max needs x-gradients")

    with tempfile.TemporaryDirectory() as tmp:
        config = Path(tmp) / "toy.cfg"
        config.write_text(
            "problem = toy\nsolver = zo-min-max\ny_mode = fo-pga\nalpha = 2e-4\nbeta = 0.05\n"
            "iters = 200\nseed = 0\ntrials = 2\noutput = out\n"
        )
        summary = zm.run_experiment(config)
        assert summary["problem"] == "toy" and len(summary["trials"]) == 2
        assert all(t["ok"] for t in summary["trials"])
        assert Path(summary["trials"][0]["trace"]).is_file()
        trace.write_csv(Path(tmp) / "quad.csv")
        assert (Path(tmp) / "quad.csv").read_text().startswith("iter,queries,wall_ms,objective,gap")

    print("pyzominmax smoke test: ok")


if __name__ == "__main__":
    main()
