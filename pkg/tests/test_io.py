import numpy as np

from epiact import SeriesTable
from epiact.io import (
    RunManifest,
    format_float,
    read_csv,
    read_results,
    sha256_file,
    trajectory_table,
    write_csv,
    write_results,
)


def test_trajectory_header_and_exact_round_trip(tmp_path, nsfd_run):
    path = write_csv(trajectory_table(nsfd_run), tmp_path / "trajectory.csv")
    raw = path.read_bytes()
    assert raw.startswith(b"t,s,e,i,a,r,d,n_living\n")
    assert b"\r" not in raw
    back = read_csv(path)
    assert np.array_equal(back.times, nsfd_run.times)
    assert np.array_equal(back["s"], nsfd_run.s)
    assert np.array_equal(back["n_living"], nsfd_run.n_living)


def test_awkward_floats_round_trip(tmp_path):
    values = np.array([0.1, 1 / 3, 5e-324, 1.7976931348623157e308, -0.0, 2.0 ** -60])
    path = write_csv(SeriesTable(np.arange(values.size, dtype=float), {"x": values}), tmp_path / "x.csv")
    assert np.array_equal(read_csv(path)["x"], values)
    assert float(format_float(1 / 3)) == 1 / 3


def test_results_file(tmp_path):
    path = write_results({"scenario": "demo", "optimal_premium": 0.25, "n": 3}, tmp_path / "results.txt")
    assert path.read_text() == (
        "scenario = demo\noptimal_premium = 2.5000000000000000e-01\nn = 3\n"
    )
    assert read_results(path) == {"scenario": "demo", "optimal_premium": "2.5000000000000000e-01", "n": "3"}


def test_manifest_round_trip_and_verify(tmp_path, monkeypatch):
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")
    (tmp_path / "a.csv").write_text("t\n0\n")
    (tmp_path / "b.txt").write_text("x = 1\n")
    manifest = RunManifest.build(tmp_path, ["a.csv", "b.txt"], "abc", "0.1.0")
    assert manifest.timestamp == "1970-01-01T00:00:00+00:00"
    manifest.write(tmp_path / "manifest.txt")
    text = (tmp_path / "manifest.txt").read_text()
    assert f"file = a.csv sha256:{sha256_file(tmp_path / 'a.csv')}" in text
    back = RunManifest.read(tmp_path / "manifest.txt")
    assert back == manifest
    assert back.verify(tmp_path) == []
    (tmp_path / "b.txt").write_text("x = 2\n")
    (tmp_path / "a.csv").unlink()
    assert back.verify(tmp_path) == ["a.csv", "b.txt"]
