"""Harness layer: Matrix Market I/O, the adversarial instance generator,
brute-force column oracles, and the command-line interface."""

import json
import os

import numpy as np
import pytest
import scipy.sparse

from optcur import cli, cur, linalg, mmio
from optcur.instances import (gen_adversarial, brute_force_best_columns,
                              span_restricted_residual_sq)


# ---------------------------------------------------------------------------
# Matrix Market I/O


def test_round_trip_dense(tmp_path, rng):
    a = rng.standard_normal((3, 3))
    path = tmp_path / "a.mtx"
    mmio.write_matrix(path, a)
    back = mmio.read_matrix(path)
    assert isinstance(back, linalg.DenseMatrix)
    assert np.array_equal(np.asarray(back), a)  # 17 digits: bit-exact


def test_round_trip_sparse(tmp_path):
    a = scipy.sparse.random(6, 5, density=0.3, random_state=0, format="csr")
    path = tmp_path / "a.mtx"
    mmio.write_matrix(path, a)
    back = mmio.read_matrix(path)
    assert isinstance(back, linalg.SparseMatrix)
    assert np.array_equal(back.csr.toarray(), a.toarray())


def test_coordinate_one_based_mapping(tmp_path):
    path = tmp_path / "c.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "2 3 2\n1 1 5.0\n2 3 -1.5\n")
    m = mmio.read_matrix(path)
    dense = np.asarray(m.csr.toarray())
    assert dense[0, 0] == 5.0 and dense[1, 2] == -1.5
    assert m.nnz == 2


def test_symmetric_expansion(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real symmetric\n"
                    "3 3 2\n1 1 2.0\n3 1 7.0\n")
    dense = np.asarray(mmio.read_matrix(path).csr.toarray())
    assert dense[0, 0] == 2.0
    assert dense[2, 0] == 7.0 and dense[0, 2] == 7.0


def test_array_column_major(tmp_path):
    path = tmp_path / "d.mtx"
    path.write_text("%%MatrixMarket matrix array real general\n"
                    "2 2\n1\n2\n3\n4\n")
    assert np.array_equal(np.asarray(mmio.read_matrix(path)),
                          [[1.0, 3.0], [2.0, 4.0]])


def test_comments_skipped(tmp_path):
    path = tmp_path / "c.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "% a comment\n1 1 1\n1 1 3.5\n")
    assert np.asarray(mmio.read_matrix(path).csr.toarray())[0, 0] == 3.5


@pytest.mark.parametrize("content,lineno", [
    ("%%Matrix matrix coordinate real general\n1 1 1\n1 1 1.0\n", 1),
    ("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0\n", 1),
    ("%%MatrixMarket matrix coordinate real general\n1 1\n", 2),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n", 3),
    ("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1.0\n", 3),
    ("%%MatrixMarket matrix array real general\n2 2\n1\nbad\n", 4),
])
def test_parse_errors_carry_line_numbers(tmp_path, content, lineno):
    path = tmp_path / "bad.mtx"
    path.write_text(content)
    with pytest.raises(mmio.MatrixMarketError) as err:
        mmio.read_matrix(path)
    assert err.value.lineno == lineno


def test_truncated_coordinate_file(tmp_path):
    path = tmp_path / "t.mtx"
    path.write_text("%%MatrixMarket matrix coordinate real general\n"
                    "3 3 5\n1 1 1.0\n")
    with pytest.raises(mmio.MatrixMarketError):
        mmio.read_matrix(path)


# ---------------------------------------------------------------------------
# adversarial instances


def test_adversarial_structure():
    inst = gen_adversarial(3, 2, 1e-10)
    assert inst.t == (2 * 3 + 1) * 2
    assert inst.A.shape == (inst.t, inst.t)
    assert inst.ell == 6
    assert inst.B.shape == (2 * (3 + 1), 2 * 3)
    # B is k diagonal copies of D with nnz = k * 2n
    assert np.count_nonzero(inst.B) == 2 * 2 * 3
    assert inst.opt_sq == pytest.approx(6 * (1 + 2e-20 / 2), rel=1e-12)


def test_adversarial_spectrum_closed_form():
    # sigma_i^2 = n + alpha^2/k for i <= 2k, alpha^2/k beyond (up to the
    # structural zero rows)
    for n, k in [(2, 1), (4, 1), (3, 2), (5, 3), (20, 3)]:
        alpha = 1e-3  # large enough that the tail is resolvable in doubles
        inst = gen_adversarial(n, k, alpha)
        s2 = np.sort(np.linalg.svd(inst.A, compute_uv=False) ** 2)[::-1]
        top = n + alpha * alpha / k
        tail = alpha * alpha / k
        assert np.allclose(s2[:2 * k], top, rtol=1e-9)
        nonzero_tail = s2[2 * k:2 * k * n]
        assert np.allclose(nonzero_tail, tail, rtol=1e-6)


def test_adversarial_argument_errors():
    with pytest.raises(ValueError):
        gen_adversarial(1, 1)
    with pytest.raises(ValueError):
        gen_adversarial(3, 0)
    with pytest.raises(ValueError):
        gen_adversarial(3, 1, 0.0)


# ---------------------------------------------------------------------------
# brute-force oracle


def test_brute_force_rank_k_spanning_subset(rng):
    a = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 5))
    subset, best = brute_force_best_columns(a, 2, 2)
    assert best <= 1e-16 * np.sum(a * a)


def test_brute_force_monotone_in_c(rng):
    a = rng.standard_normal((6, 6))
    vals = [brute_force_best_columns(a, c, 2)[1] for c in (2, 3, 4)]
    assert vals[0] >= vals[1] - 1e-9 >= vals[2] - 2e-9


def test_brute_force_budget():
    with pytest.raises(ValueError):
        brute_force_best_columns(np.ones((2, 40)), 15, 1)


def test_span_restricted_matches_subspace_oracle(rng):
    a = rng.standard_normal((8, 7))
    c = a[:, :4]
    res = span_restricted_residual_sq(a, c, 2)
    from optcur import subspace
    sf = subspace.best_subspace_svd(a, c, 2)
    direct = np.sum((a - sf.project(a)) ** 2)
    assert res == pytest.approx(direct, abs=1e-9)


# ---------------------------------------------------------------------------
# CLI


def write_test_matrix(tmp_path, seed=151):
    rng = np.random.default_rng(seed)
    a = (rng.standard_normal((40, 35, )).astype(float) * 0.1
         + rng.standard_normal((40, 3)) @ rng.standard_normal((3, 35)))
    path = tmp_path / "input.mtx"
    mmio.write_matrix(path, a)
    return path


def run_cli(args):
    return cli.main([str(x) for x in args])


def test_decompose_then_verify(tmp_path):
    inp = write_test_matrix(tmp_path)
    out = tmp_path / "out"
    code = run_cli(["decompose", "--input", inp, "--rank", "2",
                    "--epsilon", "1.0", "--variant", "deterministic",
                    "--fidelity", "heuristic", "--out-dir", out])
    assert code == 0
    for name in ("C.mtx", "U.mtx", "R.mtx", "indices.json", "report.json"):
        assert (out / name).exists()
    with open(out / "report.json") as fh:
        report = json.load(fh)
    assert report["config"]["fidelity"] == "heuristic"
    assert "seed" in report["config"]
    assert run_cli(["verify", "--input", inp,
                    "--decomposition", out]) == 0


def test_deterministic_artifacts_byte_identical(tmp_path):
    inp = write_test_matrix(tmp_path)
    outs = []
    for name in ("o1", "o2"):
        out = tmp_path / name
        assert run_cli(["decompose", "--input", inp, "--rank", "2",
                        "--epsilon", "1.0", "--variant", "deterministic",
                        "--fidelity", "heuristic", "--out-dir", out]) == 0
        outs.append(out)
    for name in ("C.mtx", "U.mtx", "R.mtx", "indices.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_missing_rank_flag_exits_2(tmp_path, capsys):
    inp = write_test_matrix(tmp_path)
    assert run_cli(["decompose", "--input", inp, "--epsilon", "0.5"]) == 2
    capsys.readouterr()


def test_oversized_config_exits_2(tmp_path):
    inp = write_test_matrix(tmp_path)
    # paper-constants linear config cannot fit in a 40 x 35 matrix
    assert run_cli(["decompose", "--input", inp, "--rank", "2",
                    "--epsilon", "0.5", "--variant", "linear",
                    "--out-dir", tmp_path / "x"]) == 2


def test_missing_input_exits_2(tmp_path):
    assert run_cli(["decompose", "--input", tmp_path / "nope.mtx",
                    "--rank", "2", "--epsilon", "0.5"]) == 2


def test_verify_detects_tampering(tmp_path):
    inp = write_test_matrix(tmp_path)
    out = tmp_path / "out"
    assert run_cli(["decompose", "--input", inp, "--rank", "2",
                    "--epsilon", "1.0", "--variant", "deterministic",
                    "--fidelity", "heuristic", "--out-dir", out]) == 0
    u = np.asarray(mmio.read_matrix(out / "U.mtx"))
    mmio.write_matrix(out / "U.mtx", u * 2.0)
    assert run_cli(["verify", "--input", inp,
                    "--decomposition", out]) == 3


def test_gen_adversarial_cli(tmp_path):
    out = tmp_path / "adv.mtx"
    assert run_cli(["gen-adversarial", "--n", "3", "--k", "1",
                    "--out", out]) == 0
    a = np.asarray(mmio.read_matrix(out))
    assert a.shape == (7, 7)


def test_bench_cli(tmp_path):
    inp = write_test_matrix(tmp_path)
    suite = tmp_path / "suite.json"
    suite.write_text(json.dumps([
        {"input": str(inp), "rank": 2, "epsilon": 1.0,
         "variant": "deterministic", "fidelity": "heuristic"},
        {"input": str(inp), "rank": 2, "epsilon": 1.0,
         "variant": "linear", "fidelity": "heuristic", "trials": 2},
    ]))
    assert run_cli(["bench", "--suite", suite]) == 0


def test_trials_keep_best_ratio(tmp_path):
    inp = write_test_matrix(tmp_path)
    mat = mmio.read_matrix(inp)
    cfg = cur.CurConfig(k=2, epsilon=1.0, fidelity="heuristic", seed=3)
    dec, rep, seed = cli._run_decompose(mat, cfg, 3)
    singles = []
    for trial in range(3):
        s = cli._derived_seed(3, trial)
        d = cur.decompose(mat, cfg, np.random.default_rng(s))
        singles.append(cur.evaluate(mat, d).ratio)
    assert rep.ratio == pytest.approx(min(singles), rel=1e-12)
