"""Deep-stack rank-one-distance traces."""

import numpy as np
import pytest

from mrsplit.trajectories import TraceConfig, rod_trace


def small_config(**overrides):
    base = dict(
        variants=("gcn", "mrs_gcn"), num_graphs=4, layers=8, dim=6, seed=0
    )
    base.update(overrides)
    return TraceConfig(**base)


def test_shapes():
    traces = rod_trace(small_config())
    assert set(traces) == {"gcn", "mrs_gcn"}
    for variant in traces:
        assert traces[variant]["rod_mean"].shape == (8,)
        assert traces[variant]["dirichlet_mean"].shape == (8,)


def test_deterministic():
    t1 = rod_trace(small_config())
    t2 = rod_trace(small_config())
    for variant in t1:
        assert np.array_equal(t1[variant]["rod_mean"], t2[variant]["rod_mean"])


def test_gcn_trace_decays_below_split_trace():
    traces = rod_trace(small_config(layers=32))
    assert traces["gcn"]["rod_mean"][-1] < traces["mrs_gcn"]["rod_mean"][-1]


def test_random_ordering_supported():
    traces = rod_trace(small_config(variants=("mrs_sage",), ordering="random"))
    assert np.all(np.isfinite(traces["mrs_sage"]["rod_mean"]))


def test_unknown_ordering_rejected():
    with pytest.raises(ValueError):
        rod_trace(small_config(variants=("mrs_gcn",), ordering="ppr"))
