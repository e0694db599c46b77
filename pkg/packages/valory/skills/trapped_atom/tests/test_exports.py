# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2024 Valory AG
#
#   Licensed under the Apache License, Version 2.0 (the "License");
#   you may not use this file except in compliance with the License.
#   You may obtain a copy of the License at
#
#       http://www.apache.org/licenses/LICENSE-2.0
#
#   Unless required by applicable law or agreed to in writing, software
#   distributed under the License is distributed on an "AS IS" BASIS,
#   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#   See the License for the specific language governing permissions and
#   limitations under the License.
#
# ------------------------------------------------------------------------------

"""Test the exports.py module of the skill."""

# pylint: skip-file

from pathlib import Path

import numpy as np
import pytest

from packages.valory.skills.trapped_atom.constants import NS
from packages.valory.skills.trapped_atom.emitter import EmissionRecord
from packages.valory.skills.trapped_atom.exceptions import ConfigurationError
from packages.valory.skills.trapped_atom.exports import (
    DIGEST_PREFIX,
    EMISSION_COLUMNS,
    read_csv,
    read_emissions,
    read_key_values,
    write_csv,
    write_emissions,
    write_key_values,
)


class TestCsv:
    """Test the numeric tables."""

    def test_layout(self, tmp_path: Path) -> None:
        """Test the digest line, the header and the number format."""
        path = write_csv(
            tmp_path / "sub" / "table.csv", ("x", "y"), ([1.0, 2.5], [1 / 3, 4e-9]), "abc"
        )
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == [
            f"{DIGEST_PREFIX}abc",
            "x,y",
            "1,0.333333333333",
            "2.5,4e-09",
        ]

    def test_read_back(self, tmp_path: Path) -> None:
        """Test reading the columns by name."""
        path = write_csv(tmp_path / "t.csv", ("a", "b"), ([1, 2, 3], [4, 5, 6]), "d")
        digest, columns = read_csv(path)
        assert digest == "d"
        np.testing.assert_array_equal(columns["b"], [4, 5, 6])

    def test_empty_table(self, tmp_path: Path) -> None:
        """Test a table without rows."""
        path = write_csv(tmp_path / "e.csv", ("a", "b"), ([], []), "d")
        with pytest.warns(UserWarning):
            _, columns = read_csv(path)
        assert columns["a"].size == 0

    def test_column_mismatch(self, tmp_path: Path) -> None:
        """Test that names must match the columns."""
        with pytest.raises(ValueError):
            write_csv(tmp_path / "m.csv", ("a",), ([1], [2]), "d")

    def test_missing_digest(self, tmp_path: Path) -> None:
        """Test that foreign tables are rejected."""
        path = tmp_path / "foreign.csv"
        path.write_text("a,b\n1,2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            read_csv(path)


class TestEmissions:
    """Test the emission tables."""

    def test_read_back(self, tmp_path: Path) -> None:
        """Test that records survive at nanosecond resolution."""
        records = [
            EmissionRecord(0, np.array([1.5, 30.25, 200.0]) * NS),
            EmissionRecord(1, np.array([])),
            EmissionRecord(4, np.array([7.0]) * NS),
        ]
        path = write_emissions(tmp_path / "emissions.csv", records, "d")
        digest, back = read_emissions(path)
        assert digest == "d"
        assert [record.trajectory_id for record in back] == [0, 4]
        np.testing.assert_allclose(back[0].emission_times, records[0].emission_times)

    def test_missing_column(self, tmp_path: Path) -> None:
        """Test that the emission columns are required."""
        path = write_csv(tmp_path / "x.csv", ("trajectory_id",), ([0],), "d")
        with pytest.raises(ConfigurationError):
            read_emissions(path)

    def test_unordered_rows(self, tmp_path: Path) -> None:
        """Test that rows are sorted per trajectory and duplicates are rejected."""
        path = write_csv(
            tmp_path / "x.csv", EMISSION_COLUMNS, ([2, 2, 2], [9.0, 3.0, 5.0]), "d"
        )
        _, back = read_emissions(path)
        expected = np.array([3.0, 5.0, 9.0]) * NS
        np.testing.assert_allclose(back[0].emission_times, expected)
        path = write_csv(
            tmp_path / "y.csv", EMISSION_COLUMNS, ([2, 2, 3], [3.0, 3.0, 3.0]), "d"
        )
        with pytest.raises(ConfigurationError, match="Trajectory 2"):
            read_emissions(path)


class TestKeyValues:
    """Test the key = value files."""

    def test_read_back(self, tmp_path: Path) -> None:
        """Test that order and values are kept."""
        entries = [("b", "2 ± 1 s^-1"), ("a", "x = y")]
        path = write_key_values(tmp_path / "kv" / "summary.txt", entries)
        assert read_key_values(path) == entries
