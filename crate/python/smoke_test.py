"""Smoke test for the haar_newton_py extension.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`.
"""

import csv
import io
import json
import math

import haar_newton_py as hn


def main():
    f2 = hn.Problem.builtin("f2")
    out = hn.iterate(f2, "new")
    assert out.converged and out.status == "Converged", out
    assert abs(out.root - 0.739085133215161) < 1e-12
    assert out.nfe == 4 * out.iterations
    assert out.classify() == "0.739085133215161"
    assert len(out.iterates) == out.iterations + 1

    # user-defined problem; errors raised by the callables propagate
    p = hn.Problem("x^2-4", lambda x: x * x - 4.0, lambda x: 2.0 * x)
    x1, n_f, n_df = hn.step(p, "new", 3.0)
    assert abs(x1 - 63.0 / 31.0) < 1e-14 and (n_f, n_df) == (1, 3)
    assert hn.step(p, "new", 3.0, points=1)[0] == hn.step(p, "fs", 3.0)[0]
    assert hn.iterate(p, "wf", 3.0, tol=1e-12).converged

    bad = hn.Problem("bad", lambda x: 1.0 / 0.0, lambda x: 1.0)
    try:
        hn.iterate(bad, "newton", 1.0)
    except ZeroDivisionError:
        pass
    else:
        raise AssertionError("callable error was swallowed")

    q = hn.haar_indefinite_integral(math.exp, 0.0, 1.0, 64)
    assert abs(q - (math.e - 1.0)) < 1e-4
    assert hn.resolution_points(2) == 8
    assert abs(hn.theoretical_error_constant(0.5, 1 / 6, 2) - 23 / 96) < 1e-15

    f6 = hn.iterate(hn.Problem.builtin("f6"), "new")
    assert 2.7 <= f6.coc() <= 3.3, f6.coc()

    names = [name for name, _ in hn.builtin_suite()]
    assert names == [f"f{i}" for i in range(1, 8)]

    rows = list(csv.DictReader(io.StringIO(hn.compare())))
    assert len(rows) == 35
    as_json = json.loads(hn.compare(["f3"], ["wf", "new"], "json"))
    assert as_json[0]["root"] == "Diverse" and as_json[1]["status"] == "Converged"

    try:
        hn.Problem.builtin("f9")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown function accepted")

    print("smoke test ok")


if __name__ == "__main__":
    main()
