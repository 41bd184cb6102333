import csv
import json

import numpy as np
import pytest

from tucker_rgrad.harness import (
    CSV_HEADER,
    PhaseGrid,
    TrialSpec,
    add_noise,
    derive_seed,
    dof,
    linear_fit,
    phase_boundary,
    random_low_rank_tensor,
    run_phase_grid,
    run_trial,
)
from tucker_rgrad.solver import SolverConfig
from tucker_rgrad.tucker import multilinear_rank


def test_dof():
    assert dof((10, 10, 10), (2, 2, 2)) == 56
    assert dof((6, 6, 6), (1, 1, 1)) == 16


def test_derive_seed_is_stable():
    assert derive_seed(0, 10, 224, 3) == derive_seed(0, 10, 224, 3)
    assert derive_seed(0, 10, 224, 3) != derive_seed(0, 10, 224, 4)
    assert 0 <= derive_seed("x") < 2**64


def test_random_low_rank_tensor():
    t = random_low_rank_tensor((4, 5, 6), (1, 1, 1), seed=1)
    assert multilinear_rank(t.full()) == (1, 1, 1)
    a = random_low_rank_tensor((6, 6, 6), (2, 3, 2), seed=2)
    b = random_low_rank_tensor((6, 6, 6), (2, 3, 2), seed=2)
    np.testing.assert_array_equal(a.full(), b.full())
    assert multilinear_rank(a.full(), 1e-8) == (2, 3, 2)
    assert a.orthonormality_defect() < 1e-12
    with pytest.raises(ValueError):
        random_low_rank_tensor((3, 3), (4, 1), seed=0)


def test_add_noise():
    y = np.random.default_rng(0).standard_normal(50)
    assert add_noise(y, 0.0, seed=1) is y
    noisy = add_noise(y, 1e-4, seed=1)
    assert np.linalg.norm(noisy - y) / np.linalg.norm(y) == pytest.approx(1e-4, rel=1e-12)
    other = add_noise(y, 1e-4, seed=2)
    assert not np.allclose(noisy, other)
    assert np.linalg.norm(other - y) == pytest.approx(np.linalg.norm(noisy - y), rel=1e-12)
    z = y + 1j * y
    cz = add_noise(z, 1e-3, seed=3)
    assert np.iscomplexobj(cz) and np.abs((cz - z).imag).max() > 0
    assert np.linalg.norm(cz - z) / np.linalg.norm(z) == pytest.approx(1e-3, rel=1e-12)
    with pytest.raises(ValueError):
        add_noise(y, -1.0, seed=0)


def test_trial_spec_validation():
    with pytest.raises(ValueError):
        TrialSpec((4, 4), (2, 2), m=0)
    with pytest.raises(ValueError):
        TrialSpec((4, 4), (2, 2), m=5, noise_level=-1.0)
    with pytest.raises(ValueError):
        TrialSpec((4, 4), (2, 2), m=5, operator_kind="bernoulli")
    with pytest.raises(ValueError):
        TrialSpec((4, 4), (2, 2), m=5, solver=SolverConfig((1, 1)))


def test_trial_spec_json_roundtrip():
    spec = TrialSpec((5, 5, 5), (2, 2, 2), m=80, noise_level=1e-4, seed=3,
                     solver=SolverConfig((2, 2, 2), max_iters=50, algorithm="niht"))
    again = TrialSpec.from_dict(json.loads(json.dumps(spec.to_dict())))
    assert again == spec
    partial = TrialSpec.from_dict({"dims": [5, 5, 5], "rank": [2, 2, 2], "m": 80, "solver": {"max_iters": 7}})
    assert partial.solver.rank == (2, 2, 2) and partial.solver.max_iters == 7


def test_full_measurement_trial_is_exact():
    r = run_trial(TrialSpec((5, 5, 5), (2, 2, 2), m=125, operator_kind="fourier", seed=4))
    assert r.success and r.relative_error <= 1e-10 and r.iterations == 0


def test_undersampled_trial_fails():
    dims, rank = (8, 8, 8), (2, 2, 2)
    spec = TrialSpec(dims, rank, m=dof(dims, rank) // 2, seed=5, solver=SolverConfig(rank, max_iters=100))
    r = run_trial(spec)
    assert not r.success and r.relative_error > 1e-3


def test_trial_determinism():
    spec = TrialSpec((6, 6, 6), (2, 2, 2), m=120, noise_level=1e-4, seed=11)
    a, b = run_trial(spec), run_trial(spec)
    assert (a.success, a.relative_error, a.iterations) == (b.success, b.relative_error, b.iterations)


def small_grid(**kw):
    opts = dict(n_values=(5,), m_values=(125,), rank=(2, 2, 2), trials_per_cell=3, operator_kind="fourier")
    opts.update(kw)
    return PhaseGrid(**opts)


def test_grid_full_measurement_cell(tmp_path):
    out = tmp_path / "grid.csv"
    cells = run_phase_grid(small_grid(), out=str(out))
    assert [c.success_rate for c in cells] == [1.0]
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == CSV_HEADER
    assert rows[1][:8] == ["5", "125", "2x2x2", "fourier", "0.0", "3", "3", "1.0"]


def test_grid_csv_appends_without_repeating_header(tmp_path):
    out = tmp_path / "grid.csv"
    run_phase_grid(small_grid(), out=str(out))
    run_phase_grid(small_grid(m_values=(100, 125)), out=str(out))
    with open(out) as fh:
        rows = list(csv.reader(fh))
    assert rows.count(CSV_HEADER) == 1 and len(rows) == 4


def test_grid_undersampled_column_fails():
    cells = run_phase_grid(PhaseGrid(n_values=(6,), m_values=(20,), rank=(2, 2, 2), trials_per_cell=4, max_iters=100))
    assert cells[0].success_rate == 0.0


def test_grid_skips_impossible_fourier_cells():
    cells = run_phase_grid(small_grid(m_values=(125, 200)))
    assert [c.m for c in cells] == [125]


def test_grid_is_order_and_schedule_independent():
    grid = PhaseGrid(n_values=(5, 6), m_values=(60, 90), rank=(2, 2, 2), trials_per_cell=2, max_iters=60, base_seed=9)
    flipped = PhaseGrid(n_values=(6, 5), m_values=(90, 60), rank=(2, 2, 2), trials_per_cell=2, max_iters=60, base_seed=9)
    key = lambda cells: {(c.n, c.m): [(r.success, r.relative_error, r.iterations) for r in c.results] for c in cells}
    base = key(run_phase_grid(grid))
    assert key(run_phase_grid(flipped)) == base
    assert key(run_phase_grid(grid, workers=2)) == base
    # One cell rerun alone matches.
    single = PhaseGrid(n_values=(6,), m_values=(60,), rank=(2, 2, 2), trials_per_cell=2, max_iters=60, base_seed=9)
    assert key(run_phase_grid(single))[(6, 60)] == base[(6, 60)]


def test_phase_boundary_and_fit():
    class Cell:
        def __init__(self, n, m, rate):
            self.n, self.m, self.success_rate = n, m, rate

    cells = [Cell(8, 100, 0.5), Cell(8, 120, 1.0), Cell(8, 140, 0.95), Cell(10, 100, 0.1), Cell(10, 120, 0.2)]
    assert phase_boundary(cells) == {8: 120, 10: None}
    slope, intercept, worst = linear_fit([1, 2, 3], [2, 4, 6])
    assert slope == pytest.approx(2) and abs(intercept) < 1e-12 and worst < 1e-12
