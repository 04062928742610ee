import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from givp.stats import (CSV_COLUMNS, Series, StatsError, histogram, linfit, pearson, poisson_mle, read_table,
                        summary, summary_rows, reference_runs, write_table)


def test_summary_small():
    assert summary([1, 2, 3]) == (2, 2, 1)
    assert summary(Series("x", [1, 2, 3, 4])) == pytest.approx((2.5, 2.5, np.std([1, 2, 3, 4], ddof=1)))
    assert summary([1, 2, 3], ddof=0)[2] == pytest.approx(np.sqrt(2 / 3))


@pytest.mark.parametrize("bad", [[], Series("e", [])])
def test_empty_rejected(bad):
    with pytest.raises(StatsError):
        summary(bad)
    with pytest.raises(StatsError):
        histogram(bad, 3)


def test_pearson_examples():
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    with pytest.raises(StatsError, match="variance"):
        pearson([1, 1, 1], [1, 2, 3])


@given(st.lists(st.integers(-1000, 1000), min_size=3, max_size=30, unique=True),
       st.floats(0.1, 10), st.floats(-5, 5), st.booleans())
def test_pearson_of_affine_image(xs, a, b, neg):
    a = -a if neg else a
    assert pearson(xs, [a * x + b for x in xs]) == pytest.approx(-1.0 if neg else 1.0, abs=1e-9)


def test_linfit_examples():
    assert linfit([0, 1, 2, 5], [1, 3, 5, 11]) == pytest.approx((2, 1))
    with pytest.raises(StatsError):
        linfit([2, 2], [1, 3])


def test_histogram_examples():
    edges, counts = histogram(np.arange(20), 20)
    assert list(counts) == [1] * 20
    assert len(edges) == 21
    _, counts = histogram([3.0] * 5, 7)
    assert counts[0] == 5 and counts.sum() == 5
    with pytest.raises(StatsError):
        histogram([1.0], 0)


def test_permutation_invariance():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=30), rng.normal(size=30)
    p = rng.permutation(30)
    assert summary(x) == pytest.approx(summary(x[p]))
    assert pearson(x, y) == pytest.approx(pearson(x[p], y[p]))
    assert linfit(x, y) == pytest.approx(linfit(x[p], y[p]))


def test_poisson_rate_is_mean():
    assert poisson_mle([1, 2, 6]) == 3


def test_table_round_trip(tmp_path):
    rows = [(1, 10, 20, 9, 100, 90, 12.5, 0.125), (2, 11, 22, 10, 110, 95, 1 / 3, 0.1)]
    table = {c: np.array([r[i] for r in rows], float) for i, c in enumerate(CSV_COLUMNS)}
    write_table(rows, tmp_path / "t.csv", extra_rows=summary_rows(table))
    back = read_table(tmp_path / "t.csv")
    for c in CSV_COLUMNS:
        assert np.array_equal(back[c], table[c])
    text = (tmp_path / "t.csv").read_text().splitlines()
    assert text[0] == ",".join(CSV_COLUMNS)
    assert [line.split(",")[0] for line in text[-3:]] == ["MED", "AVG", "STD"]


def test_table_missing_column():
    with pytest.raises(StatsError, match="missing"):
        read_table("run,vertices\n1,2\n")


def test_fixture_shape():
    t = reference_runs()
    assert all(len(t[c]) == 40 for c in CSV_COLUMNS)
    assert list(t["run"]) == list(range(1, 41))
    _, counts = histogram(t["alpha_deg"], 20)
    assert counts.sum() == 40
