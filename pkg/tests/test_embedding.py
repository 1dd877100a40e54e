import numpy as np
import pytest

from s2malign.cca import project
from s2malign.embedding import EmbeddingConfig, embed

from oracles import direct_embed


def test_identity_embedding():
    assert embed([1, 2, 3], EmbeddingConfig(0, 0)).vectors.tolist() == [[1], [2], [3]]


def test_edge_replication():
    e = embed([1, 2, 3], EmbeddingConfig(1, 1))
    assert e.vectors.tolist() == [[1, 1, 2], [1, 2, 3], [2, 3, 3]]


def test_constant_series():
    v = embed(np.full(7, 2.5), EmbeddingConfig(3, 1)).vectors
    assert (v == 2.5).all()


@pytest.mark.parametrize("past, future", [(0, 0), (2, 0), (0, 3), (4, 4), (10, 2)])
def test_matches_direct_loop(past, future):
    x = np.random.default_rng(past * 7 + future).normal(size=9)
    e = embed(x, EmbeddingConfig(past, future))
    assert e.vectors.shape == (9, past + future + 1)
    np.testing.assert_array_equal(e.vectors, direct_embed(x, past, future))


def test_interior_rows_are_windows():
    x = np.arange(20.0)
    e = embed(x, EmbeddingConfig(3, 2)).vectors
    for k in range(3, 20 - 2):
        np.testing.assert_array_equal(e[k], x[k - 3 : k + 3])


def test_identity_projection_roundtrip():
    x = np.random.default_rng(0).normal(size=12)
    np.testing.assert_array_equal(project(embed(x, EmbeddingConfig(0, 0)), [1.0]), x)


def test_negative_config_rejected():
    with pytest.raises(ValueError):
        EmbeddingConfig(-1, 0)
