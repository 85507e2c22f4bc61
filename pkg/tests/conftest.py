import csv
from pathlib import Path

import pytest

from edf.harness import SimCell, run_cell
from edf.sampling import derive_seed

DATA = Path(__file__).parent / "data"
MASTER_SEED = 20241122
FULL_REPS = 200_000


@pytest.fixture(scope="session")
def paper_table():
    """Tables 1 and 2 keyed by (K, nu); values as printed."""
    with open(DATA / "paper_tables.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        (int(r["K"]), int(r["nu"])): {k: float(v) for k, v in r.items()}
        for r in rows
    }


@pytest.fixture(scope="session")
def full_cell():
    """Full-scale simulation of one cell, computed once per session."""
    cache = {}

    def get(k, nu, reps=FULL_REPS):
        key = (k, nu, reps)
        if key not in cache:
            cell = SimCell(k, nu, reps, seed=derive_seed(MASTER_SEED, k, nu))
            cache[key] = run_cell(cell, keep_ratios=True)
        return cache[key]

    return get
