import numpy as np
import pytest

from tiescan import ConfigError, InputError, categorize
from tiescan.io import ingest


def test_csv_vectors(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("1,0\n0,1\n1,0\n0,0\n")
    X = ingest(f, "csv-vectors")
    assert X.shape == (4, 2)
    assert categorize(list(X)).K == 3


def test_csv_ragged(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("1,0\n0,1,1\n1,0\n0,0\n")
    with pytest.raises(InputError, match="ragged"):
        ingest(f)


def test_csv_non_numeric(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("1,a\n0,1\n1,0\n0,0\n")
    with pytest.raises(InputError):
        ingest(f)


def test_too_few(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("1,0\n0,1\n1,0\n")
    with pytest.raises(InputError, match="at least 4"):
        ingest(f)


def _block(A):
    return "\n".join(" ".join(str(v) for v in row) for row in A)


def test_adjacency_stack(tmp_path):
    A = np.array([[0, 1], [1, 0]])
    B = np.zeros((2, 2), dtype=int)
    f = tmp_path / "adj.txt"
    f.write_text("\n\n".join(_block(M) for M in (A, A, B, A)) + "\n")
    X = ingest(f, "adjacency-stack")
    assert X.shape == (4, 2, 2)
    assert categorize(list(X)).K == 2
    f.write_text("\n\n".join(_block(A) for _ in range(4)))
    assert categorize(list(ingest(f, "adjacency-stack"))).K == 1


@pytest.mark.parametrize(
    "text,msg",
    [("0 1 1\n1 0 1\n\n" * 4, "not square"), ("0 2\n2 0\n\n" * 4, "0 or 1"), ("0 1\n1\n\n" * 4, "ragged")],
)
def test_adjacency_errors(tmp_path, text, msg):
    f = tmp_path / "adj.txt"
    f.write_text(text)
    with pytest.raises(InputError, match=msg):
        ingest(f, "adjacency-stack")


def test_adjacency_size_mismatch(tmp_path):
    f = tmp_path / "adj.txt"
    f.write_text("0 1\n1 0\n\n" * 3 + "0 0 0\n0 0 0\n0 0 0\n")
    with pytest.raises(InputError, match="differ in size"):
        ingest(f, "adjacency-stack")


def test_adjacency_dir_lexicographic(tmp_path):
    mats = {"day03.txt": np.eye(3, dtype=int), "day01.txt": np.zeros((3, 3), dtype=int)}
    mats["day02.txt"] = 1 - np.eye(3, dtype=int)
    mats["day10.txt"] = np.ones((3, 3), dtype=int)
    for name, M in mats.items():
        (tmp_path / name).write_text(_block(M) + "\n")
    X = ingest(tmp_path, "adjacency-dir")
    expected = [mats[k] for k in sorted(mats)]
    assert np.array_equal(X, np.stack(expected))


def test_unknown_format_and_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ingest(tmp_path / "x", "parquet")
    with pytest.raises(InputError):
        ingest(tmp_path / "missing.csv")
