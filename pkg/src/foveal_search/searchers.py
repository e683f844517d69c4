"""Next-fixation selection rules: MAP, ELM and contrast-normalized ELM."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .foveation import VisibilityTable
from .inference import PosteriorState, normalized_posterior

# scores within this relative distance of the maximum count as tied
TIE_RTOL = 1e-12


class SearcherKind(str, enum.Enum):
    MAP = "map"
    ELM = "elm"
    NELM = "nelm"

    @classmethod
    def parse(cls, name) -> "SearcherKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValidationError(f"unknown searcher {name!r}; choose map, elm or nelm") from None


@dataclass(frozen=True, eq=False)
class SelectionOutcome:
    chosen: int
    score_map: np.ndarray


def argmax_lowest(scores: np.ndarray) -> int:
    """Index of the maximum; near-equal maxima resolve to the lowest index.

    The tolerance keeps the choice independent of floating-point summation
    order when candidates are tied by symmetry.
    """
    top = scores.max()
    return int(np.flatnonzero(scores >= top - TIE_RTOL * abs(top))[0])


def information_gain(weights: np.ndarray, table: VisibilityTable) -> np.ndarray:
    """score(k) = sum_i weights_i * d'(i, k)^2 (the constant 1/2 is dropped)."""
    if weights.shape != (table.size,):
        raise ValidationError(f"posterior of length {weights.size} vs table of size {table.size}")
    return weights @ table.d_prime_sq


def select_map(state: PosteriorState) -> SelectionOutcome:
    scores = state.posterior.copy()
    return SelectionOutcome(argmax_lowest(scores), scores)


def select_elm(state: PosteriorState, table: VisibilityTable) -> SelectionOutcome:
    scores = information_gain(state.posterior, table)
    return SelectionOutcome(argmax_lowest(scores), scores)


def select_nelm(state: PosteriorState, table: VisibilityTable, contrast) -> SelectionOutcome:
    scores = information_gain(normalized_posterior(state, contrast), table)
    return SelectionOutcome(argmax_lowest(scores), scores)


def select(kind: SearcherKind, state: PosteriorState, table: VisibilityTable,
           contrast=None) -> SelectionOutcome:
    kind = SearcherKind.parse(kind)
    if kind is SearcherKind.MAP:
        return select_map(state)
    if kind is SearcherKind.ELM:
        return select_elm(state, table)
    if contrast is None:
        raise ValidationError("nELM selection needs the per-patch contrast channel")
    return select_nelm(state, table, contrast)
