import numpy as np

from steinmat.experiments import default_f0_grid, gof_table, mle_vs_mksde


def test_default_grid_matches_study_setup():
    grid = default_f0_grid()
    labels = [g[0] for g in grid]
    assert labels == ["0.3*E1", "E1", "5*E1", "0.3*E2", "E2", "5*E2"]
    e1 = np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]])
    assert np.array_equal(grid[2][1], 5.0 * e1)
    assert np.array_equal(grid[4][1], np.ones((3, 2)))


def test_gof_table_default_shape():
    # default sweep is 3 scales x 5 sample sizes x 2 kinds; a single
    # replicate is enough to pin the table shape
    rows, medians = gof_table(replicates=1, n_sim=200, seed=2)
    assert len(medians) == 3 * 5 * 2
    kinds = {m["kind"] for m in medians}
    labels = {m["F_label"] for m in medians}
    ns = sorted({m["n"] for m in medians})
    assert kinds == {"U", "V"}
    assert labels == {"0.3*E1", "1*E1", "5*E1"}
    assert ns == [100, 150, 200, 250, 300]
    assert all(0.0 <= r["p_value"] <= 1.0 for r in rows)


def test_mle_vs_mksde_row_schema_and_determinism():
    f0_grid = [("E1", np.array([[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]]))]
    a = mle_vs_mksde(n_values=(40,), replicates=2, seed=9, f0_grid=f0_grid,
                     mle_pool=2000)
    b = mle_vs_mksde(n_values=(40,), replicates=2, seed=9, f0_grid=f0_grid,
                     mle_pool=2000, threads=3)
    assert a == b
    assert {r["estimator"] for r in a} == {"mksde_u", "mksde_v", "mle_numeric",
                                           "mle_small_f"}
    assert all(r["frob_error"] >= 0.0 for r in a)
