import math

import numpy as np
import pytest

from chemoflux import Grid
from chemoflux.studies import (
    OrderStudy,
    elliptic_study,
    observed_orders,
    spatial_study,
    thread_count,
    time_study,
)

from conftest import cosine, make_params


def test_observed_orders():
    assert observed_orders([1.0, 0.25, 0.0625]) == pytest.approx([2.0, 2.0])
    assert observed_orders([9.0, 1.0], ratio=3.0) == pytest.approx([2.0])


def test_order_study_pass_flag():
    assert OrderStudy("x", [1, 2], [1.0, 0.25], [2.0], 1.9).passed
    assert not OrderStudy("x", [1, 2], [1.0, 0.5], [1.0], 1.9).passed
    assert not OrderStudy("x", [1], [1.0], [], 1.9).passed


def test_elliptic_three_levels():
    study = elliptic_study(3)
    assert study.passed and len(study.orders) == 3
    assert all(o >= 1.9 for o in study.orders)


def test_elliptic_scaled_domain():
    study = elliptic_study(2, length=3.0, alpha=2.0, beta=0.5)
    assert study.passed


def test_spatial():
    assert spatial_study(3, length=2.0).passed


def test_time_three_levels():
    g = Grid((1.0,), (64,))
    params = make_params(m=1, p=2, q=2)
    study = time_study(3, cosine(g, 1.0, 0.1), g, params, 0.01)
    assert study.passed and all(o >= 0.9 for o in study.orders)


def test_threads_give_identical_results():
    g = Grid((1.0,), (32,))
    params = make_params(m=1, p=2, q=2)
    u0 = cosine(g, 1.0, 0.2)
    serial = time_study(2, u0, g, params, 0.01, threads=1)
    pooled = time_study(2, u0, g, params, 0.01, threads=3)
    assert serial.errors == pooled.errors


def test_thread_count(monkeypatch):
    monkeypatch.delenv("CHEMOFLUX_THREADS", raising=False)
    assert thread_count() == 1
    monkeypatch.setenv("CHEMOFLUX_THREADS", "4")
    assert thread_count() == 4
    monkeypatch.setenv("CHEMOFLUX_THREADS", "many")
    with pytest.raises(ValueError):
        thread_count()
