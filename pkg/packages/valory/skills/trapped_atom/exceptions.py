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

"""This module contains the exceptions raised by the trapped atom skill."""

from typing import Iterable, List, Optional, Tuple


class TrappedAtomError(Exception):
    """Base class of the errors raised on purpose by the simulator."""


class DomainError(TrappedAtomError, ValueError):
    """A physical quantity lies outside its allowed domain."""


class RejectedTransitionError(DomainError):
    """A Raman sublevel pair violates the selection rule."""


class SingularityError(DomainError):
    """A formula is evaluated at its singular point."""


class AnalysisError(TrappedAtomError):
    """A data set cannot be analysed."""


class ConfigurationError(TrappedAtomError, ValueError):
    """
    Invalid configuration.

    Each failure is kept as a (field path, message) pair so that callers can
    report every failing field at once.
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        errors: Optional[Iterable[Tuple[str, str]]] = None,
    ) -> None:
        """Initialize the error."""
        self.errors: List[Tuple[str, str]] = list(errors or [])
        if not self.errors:
            self.errors.append((field or "-", message))
        super().__init__(message)

    @classmethod
    def collect(cls, errors: Iterable[Tuple[str, str]]) -> "ConfigurationError":
        """Merge several failures into a single error."""
        errors = list(errors)
        summary = "; ".join(f"{path}: {message}" for path, message in errors)
        return cls(summary, errors=errors)
