import numpy as np
import pytest

from foveal_search.errors import ValidationError
from foveal_search.foveation import VisibilityProfile, build_visibility_table
from foveal_search.inference import PosteriorState
from foveal_search.raster import PatchGrid
from foveal_search.searchers import SearcherKind, select, select_elm, select_map, select_nelm

from oracles import elm_choice_loop, map_choice_loop

PROFILE = VisibilityProfile()


def _state(p):
    p = np.asarray(p, dtype=float)
    return PosteriorState(p, np.zeros(len(p)), (), 8)


def test_map_examples():
    assert select_map(_state([0.1, 0.7, 0.2])).chosen == 1
    assert select_map(_state([0.25] * 4)).chosen == 0


def test_map_equivariance_and_monotone_invariance():
    r = np.random.default_rng(0)
    p = r.dirichlet(np.ones(10))
    perm = r.permutation(10)
    assert select_map(_state(p[perm])).chosen == int(np.flatnonzero(perm == np.argmax(p))[0])
    assert select_map(_state(np.sqrt(p) / np.sqrt(p).sum())).chosen == select_map(_state(p)).chosen


def test_elm_point_mass():
    grid = PatchGrid(16, 6, 6)
    table = build_visibility_table(PROFILE, grid)
    for j in (0, 17, 35):
        p = np.zeros(36)
        p[j] = 1.0
        assert select_elm(_state(p), table).chosen == j
        assert select_nelm(_state(p), table, np.linspace(0.1, 2, 36)).chosen == j
        assert select_map(_state(p)).chosen == j


def test_elm_symmetric_tie():
    table = build_visibility_table(PROFILE, PatchGrid(16, 2, 1))
    out = select_elm(_state([0.5, 0.5]), table)
    assert out.score_map[0] == out.score_map[1]
    assert out.chosen == 0


def test_elm_symmetric_grid_ties_resolve_low():
    table = build_visibility_table(PROFILE, PatchGrid(16, 4, 4))
    out = select_elm(_state(np.full(16, 1 / 16)), table)
    # the four central patches tie by symmetry
    assert out.chosen == 5


def test_elm_scale_invariance():
    grid = PatchGrid(16, 5, 5)
    table = build_visibility_table(PROFILE, grid)
    p = np.random.default_rng(4).dirichlet(np.ones(25))
    assert select_elm(_state(p), table).chosen == select_elm(_state(p * 0.5), table).chosen


def test_nelm_uniform_contrast_equals_elm():
    grid = PatchGrid(16, 6, 6)
    table = build_visibility_table(PROFILE, grid)
    p = np.random.default_rng(5).dirichlet(np.ones(36))
    a, b = select_elm(_state(p), table), select_nelm(_state(p), table, np.full(36, 0.3))
    assert a.chosen == b.chosen
    np.testing.assert_allclose(a.score_map, b.score_map, rtol=1e-12)


@pytest.mark.parametrize("cols,rows", [(6, 6), (3, 5), (8, 8)])
def test_oracle_agreement(cols, rows):
    grid = PatchGrid(16, cols, rows)
    table = build_visibility_table(PROFILE, grid)
    centers = [grid.center_of(i) for i in range(grid.size)]
    r = np.random.default_rng(cols * 100 + rows)
    for _ in range(15):
        p = r.dirichlet(np.ones(grid.size) * 0.3)
        c = r.uniform(0.01, 0.5, grid.size)
        assert select_map(_state(p)).chosen == map_choice_loop(p)
        assert select_elm(_state(p), table).chosen == elm_choice_loop(p, centers)
        q = [pi / ci for pi, ci in zip(p, c)]
        assert select_nelm(_state(p), table, c).chosen == elm_choice_loop(q, centers)


def test_scores_finite_nonnegative():
    table = build_visibility_table(PROFILE, PatchGrid(16, 5, 4))
    p = np.random.default_rng(1).dirichlet(np.ones(20))
    for out in (select_map(_state(p)), select_elm(_state(p), table)):
        assert np.all(np.isfinite(out.score_map)) and np.all(out.score_map >= 0)


def test_dispatch_and_parse():
    table = build_visibility_table(PROFILE, PatchGrid(16, 2, 2))
    s = _state([0.1, 0.2, 0.3, 0.4])
    assert select("map", s, table).chosen == 3
    assert SearcherKind.parse("NELM") is SearcherKind.NELM
    with pytest.raises(ValidationError):
        SearcherKind.parse("ideal")
    with pytest.raises(ValidationError):
        select(SearcherKind.NELM, s, table)
    with pytest.raises(ValidationError):
        select_elm(_state([0.5, 0.5]), table)
