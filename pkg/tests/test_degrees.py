"""Degree lattice arithmetic, including the cancellation identity used by
the degree bookkeeping of spanning-element products: if m + p = n + q and
n ^ p = 0 then m - m^q = n and q - m^q = p."""

import random

import pytest

from kgraph_kms.degrees import Degree


def test_lattice_ops():
    m = Degree((2, 0, 3))
    n = Degree((1, 4, 3))
    assert m.meet(n) == Degree((1, 0, 3))
    assert m.join(n) == Degree((2, 4, 3))
    assert m + n == Degree((3, 4, 6))
    assert (m + n) - n == m
    assert not m <= n and not n <= m
    assert m.meet(n) <= m and m <= m.join(n)


def test_subtraction_guards():
    with pytest.raises(ValueError):
        Degree((1, 0)) - Degree((0, 1))
    assert Degree((1, 0)).minus_capped(Degree((0, 1))) == Degree((1, 0))


def test_box_enumeration():
    box = list(Degree((1, 2)).box())
    assert len(box) == 6
    assert box[0] == Degree((0, 0)) and box[-1] == Degree((1, 2))


def test_units_and_support():
    e2 = Degree.unit(3, 2)
    assert e2 == Degree((0, 1, 0))
    assert e2.support() == (2,)
    assert Degree.zero(3).is_zero()


def test_cancellation_identity_random():
    rng = random.Random(5)
    for _ in range(300):
        k = rng.randrange(1, 4)
        n = Degree(tuple(rng.randrange(0, 4) for _ in range(k)))
        # force n ^ p = 0
        p = Degree(tuple(0 if n[i] > 0 else rng.randrange(0, 4) for i in range(k)))
        assert n.meet(p).is_zero()
        m = Degree(tuple(rng.randrange(max(0, n[i] - p[i]), 5) for i in range(k)))
        q = m + p - n
        assert m + p == n + q
        assert m - m.meet(q) == n
        assert q - m.meet(q) == p
