import numpy as np
import pytest

from smallcells.config import BLOCK_SIZE
from smallcells.experiments import (
    TopKAccumulator,
    merge_accumulators,
    select_k_smallest,
)
from smallcells.functionals import SizeFunctional, size_array
from smallcells.sampler import SampleStreamSpec, sample_array


def _brute_force(model, spec, functional, k):
    sizes = size_array(sample_array(model, spec), functional, model)
    order = np.lexsort((np.arange(len(sizes)), sizes))[:k]
    return order, sizes[order]


@pytest.mark.parametrize(
    "functional",
    [
        SizeFunctional.EDGE_PRODUCT_AREA,
        SizeFunctional.GEOMETRIC_AREA,
        SizeFunctional.HALF_PERIMETER,
    ],
)
def test_matches_full_sort(sixty_degree_model, functional):
    spec = SampleStreamSpec(seed=13, count=BLOCK_SIZE + 500)
    selection = select_k_smallest(sixty_degree_model, spec, functional, 40)
    indices, sizes = _brute_force(sixty_degree_model, spec, functional, 40)
    assert np.array_equal(selection.indices, indices)
    assert np.array_equal(selection.sizes, sizes)
    assert not selection.truncated


def test_worker_count_does_not_change_selection(standard_3d):
    n = 4 * BLOCK_SIZE + 3
    one = select_k_smallest(
        standard_3d, SampleStreamSpec(seed=2, count=n), SizeFunctional.VOLUME, 25
    )
    four = select_k_smallest(
        standard_3d, SampleStreamSpec(seed=2, count=n, worker_hint=4), SizeFunctional.VOLUME, 25
    )
    assert one == four


def test_sorted_ascending(standard_2d):
    selection = select_k_smallest(
        standard_2d, SampleStreamSpec(seed=4, count=10_000), SizeFunctional.EDGE_PRODUCT_AREA, 30
    )
    assert np.all(np.diff(selection.sizes) >= 0)
    assert selection.min_size == selection.sizes[0]
    assert selection.max_size == selection.sizes[-1]


def test_ties_prefer_smaller_index():
    acc = TopKAccumulator(2, SizeFunctional.HALF_PERIMETER)
    cells = np.array([[1.0, 1.0], [0.5, 1.5], [2.0, 0.0], [0.1, 0.1]])
    acc.push_block(0, cells)
    selection = acc.to_selection()
    # sizes 2, 2, 2, 0.2; of the three ties only index 0 survives
    assert selection.indices.tolist() == [3, 0]


def test_ties_across_blocks():
    acc = TopKAccumulator(1, SizeFunctional.HALF_PERIMETER)
    acc.push_block(10, np.array([[1.0, 1.0]]))
    acc.push_block(5, np.array([[1.5, 0.5]]))
    assert acc.to_selection().indices.tolist() == [5]


def test_merge_is_order_independent():
    rng = np.random.default_rng(0)
    cells = rng.exponential(size=(300, 2))
    parts = []
    for lo in range(0, 300, 100):
        acc = TopKAccumulator(7, SizeFunctional.EDGE_PRODUCT_AREA)
        acc.push_block(lo, cells[lo : lo + 100])
        parts.append(acc)
    forward = merge_accumulators(parts).to_selection()
    backward = merge_accumulators(reversed(parts)).to_selection()
    assert forward == backward
    assert forward.n == 300


def test_merge_rejects_mismatch():
    a = TopKAccumulator(3, SizeFunctional.HALF_PERIMETER)
    b = TopKAccumulator(4, SizeFunctional.HALF_PERIMETER)
    with pytest.raises(ValueError, match="same k"):
        a.merge(b)


def test_truncated_selection(standard_2d):
    with pytest.warns(UserWarning, match="fewer than k"):
        selection = select_k_smallest(
            standard_2d, SampleStreamSpec(seed=1, count=5), SizeFunctional.HALF_PERIMETER, 10
        )
    assert selection.truncated
    assert len(selection.entries) == 5


def test_empty_stream(standard_2d):
    with pytest.warns(UserWarning):
        selection = select_k_smallest(
            standard_2d, SampleStreamSpec(seed=1, count=0), SizeFunctional.HALF_PERIMETER, 3
        )
    assert selection.entries == ()


def test_k_must_be_positive(standard_2d):
    with pytest.raises(ValueError, match="k must be at least 1"):
        select_k_smallest(
            standard_2d, SampleStreamSpec(seed=1, count=5), SizeFunctional.HALF_PERIMETER, 0
        )


def test_to_frame(standard_3d):
    selection = select_k_smallest(
        standard_3d, SampleStreamSpec(seed=1, count=1000), SizeFunctional.SURFACE_AREA, 5
    )
    frame = selection.to_frame()
    assert list(frame.columns) == ["sample_index", "x1", "x2", "x3", "size"]
    assert len(frame) == 5
    assert frame["size"].tolist() == selection.sizes.tolist()
