"""The committed reference CSVs must regenerate byte-identically from the
default configuration (fixed default seed)."""

from pathlib import Path

import pytest

from powersense.cli import main as cli_main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

CASES = {
    "regions_strategy1.csv": ["regions", "--strategy", "1"],
    "regions_strategy2.csv": ["regions", "--strategy", "2"],
    "montecarlo_m1000.csv": ["montecarlo"],
    "sweep_samples.csv": ["sweep", "--axis", "samples", "--grid", "500:5000:500"],
    "fusion_samples.csv": ["fusion", "--axis", "samples", "--grid", "500:5000:500"],
    "fusion_users.csv": ["fusion", "--axis", "users", "--grid", "1:10:1", "--samples", "5000"],
}


@pytest.mark.parametrize("name", sorted(CASES))
def test_fixture_regenerates_identically(name, tmp_path, capsys):
    out = tmp_path / name
    assert cli_main(CASES[name] + ["--out", str(out)]) == 0
    capsys.readouterr()
    assert out.read_bytes() == (FIXTURES / name).read_bytes()
