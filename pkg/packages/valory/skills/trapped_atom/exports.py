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

"""This module contains the artifact writers and readers."""

from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from aea.exceptions import enforce

from packages.valory.skills.trapped_atom.constants import NS
from packages.valory.skills.trapped_atom.emitter import EmissionRecord
from packages.valory.skills.trapped_atom.exceptions import ConfigurationError


DIGEST_PREFIX = "# config_digest="
NUMBER_FORMAT = "%.12g"
EMISSION_COLUMNS = ("trajectory_id", "emission_time_ns")

PathLike = Union[str, Path]


def write_csv(
    path: PathLike,
    columns: Sequence[str],
    data: Iterable[Sequence[float]],
    digest: str,
) -> Path:
    """
    Write a numeric table with its provenance header.

    :param path: the file to write.
    :param columns: the column names.
    :param data: the columns, each a sequence of numbers.
    :param digest: the configuration digest.
    :return: the path written.
    """
    path = Path(path)
    table = np.column_stack([np.asarray(column, dtype=float) for column in data])
    enforce(
        table.shape[1] == len(columns),
        f"{len(columns)} column names for {table.shape[1]} columns.",
        ValueError,
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as file:
        file.write(f"{DIGEST_PREFIX}{digest}\n")
        file.write(",".join(columns) + "\n")
        np.savetxt(file, table, fmt=NUMBER_FORMAT, delimiter=",")
    return path


def read_csv(path: PathLike) -> Tuple[str, Dict[str, np.ndarray]]:
    """
    Read a table written by write_csv.

    :param path: the file to read.
    :return: the configuration digest and the columns by name.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8") as file:
        first = file.readline().rstrip("\n")
        header = file.readline().rstrip("\n")
        enforce(
            first.startswith(DIGEST_PREFIX),
            f"{path} has no configuration digest.",
            ConfigurationError,
        )
        columns = header.split(",")
        table = np.loadtxt(file, delimiter=",", ndmin=2)
    if table.size == 0:
        table = np.zeros((0, len(columns)))
    return first[len(DIGEST_PREFIX) :], {
        name: table[:, index] for index, name in enumerate(columns)
    }


def write_emissions(
    path: PathLike, records: Sequence[EmissionRecord], digest: str
) -> Path:
    """Write the emission times of trajectories, in ns."""
    ids = np.concatenate(
        [np.full(len(record), record.trajectory_id) for record in records] or [[]]
    )
    times = np.concatenate([record.emission_times for record in records] or [[]])
    return write_csv(path, EMISSION_COLUMNS, (ids, times / NS), digest)


def read_emissions(path: PathLike) -> Tuple[str, List[EmissionRecord]]:
    """
    Read an emission table back into records.

    Trajectories without emissions between listed ones are not recovered.
    Rows may come in any order; a time listed twice for one trajectory is
    rejected.

    :param path: the file to read.
    :return: the configuration digest and the records, by trajectory id.
    """
    digest, columns = read_csv(path)
    for name in EMISSION_COLUMNS:
        enforce(name in columns, f"Missing column {name}.", ConfigurationError)
    ids = columns["trajectory_id"].astype(np.int64)
    times = columns["emission_time_ns"] * NS
    records = []
    for trajectory_id in np.unique(ids):
        emission_times = np.sort(times[ids == trajectory_id])
        enforce(
            bool(np.all(np.diff(emission_times) > 0)),
            f"Trajectory {trajectory_id} lists the same emission time twice.",
            ConfigurationError,
        )
        records.append(EmissionRecord(int(trajectory_id), emission_times))
    return digest, records


def write_key_values(path: PathLike, entries: Iterable[Tuple[str, str]]) -> Path:
    """Write key = value lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(f"{key} = {value}\n" for key, value in entries), encoding="utf-8"
    )
    return path


def read_key_values(path: PathLike) -> List[Tuple[str, str]]:
    """Read key = value lines, keeping their order."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        entries.append((key.strip(), value.strip()))
    return entries
