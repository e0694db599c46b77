#!/usr/bin/env python3
# -*- coding: utf-8 -*-
# ------------------------------------------------------------------------------
#
#   Copyright 2023-2024 Valory AG
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

from setuptools import find_packages, setup


if __name__ == "__main__":
    setup(
        name="trapped-atom",
        version="0.1.0",
        description="Simulator of a single trapped atom used as a photon source and a qubit.",
        license="Apache-2.0",
        python_requires=">=3.8,<3.12",
        packages=find_packages(include=["packages*"]),
        package_data={"packages.valory.skills.trapped_atom": ["experiment.cfg"]},
        install_requires=[
            "open-aea==1.42.0",
            "click>=8.0,<9",
            "numpy>=1.21,<2",
            "scipy>=1.7,<2",
            "joblib>=1.1,<2",
        ],
        extras_require={"test": ["pytest>=7.0,<8"]},
        entry_points={
            "console_scripts": [
                "trapped-atom=packages.valory.skills.trapped_atom.cli:main"
            ]
        },
    )
