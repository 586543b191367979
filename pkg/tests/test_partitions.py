import math
from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from matherm.partitions import (
    Partition,
    dominates,
    enumerate_partitions,
    gen_pochhammer,
    log_multivariate_gamma,
    multivariate_gamma,
    parse_partition,
    partitions_up_to,
    rising_factorial,
)
from oracles import pochhammer_product

partitions_st = st.lists(st.integers(1, 6), max_size=5).map(lambda xs: Partition(sorted(xs, reverse=True)))


def test_counts_match_partition_function():
    for k in range(0, 13):
        assert len(enumerate_partitions(k)) == int(sympy.partition(k))


def test_reverse_lexicographic_order():
    assert enumerate_partitions(4) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert enumerate_partitions(4, 2) == [(4,), (3, 1), (2, 2)]
    assert enumerate_partitions(0) == [()]


def test_partitions_up_to_respects_length():
    got = partitions_up_to(3, 2)
    assert got == [(), (1,), (2,), (1, 1), (3,), (2, 1)]


@pytest.mark.parametrize("bad", [(2, 3), (1, 0), (-1,)])
def test_invalid_partitions_rejected(bad):
    with pytest.raises(ValueError):
        Partition(bad)


def test_parse_partition():
    assert parse_partition("2,1") == (2, 1)
    assert parse_partition("0") == ()
    assert str(Partition((2, 1))) == "2,1"
    assert str(Partition()) == "0"
    with pytest.raises(ValueError, match="non-increasing"):
        parse_partition("2,3")
    with pytest.raises(ValueError):
        parse_partition("a,b")


@given(partitions_st)
def test_parse_roundtrip(kappa):
    assert parse_partition(str(kappa)) == kappa


@given(partitions_st)
def test_conjugate_is_involution(kappa):
    assert kappa.conjugate().conjugate() == kappa
    assert kappa.conjugate().weight == kappa.weight


@given(partitions_st)
def test_dominance_extremes(kappa):
    k = kappa.weight
    if k:
        assert dominates((k,), kappa)
        assert dominates(kappa, (1,) * k)
    assert dominates(kappa, kappa)


def test_rising_factorial_matches_scipy():
    for a in (0.5, 1.5, 3.25):
        for k in range(6):
            assert rising_factorial(a, k) == pytest.approx(special.poch(a, k), rel=1e-13)
    assert rising_factorial(Fraction(1, 2), 3) == Fraction(15, 8)


@given(partitions_st, st.fractions(min_value=-3, max_value=5, max_denominator=4))
def test_gen_pochhammer_matches_definition(kappa, a):
    assert gen_pochhammer(a, kappa) == pochhammer_product(a, kappa)


def test_gen_pochhammer_examples():
    assert gen_pochhammer(Fraction(3, 2), (1,)) == Fraction(3, 2)
    # (3/2)_(1,1) = (3/2)(1)
    assert gen_pochhammer(Fraction(3, 2), (1, 1)) == Fraction(3, 2)
    assert gen_pochhammer(Fraction(3, 2), ()) == 1
    with pytest.raises(ValueError):
        gen_pochhammer(1, (1, 1, 1), ell=2)


@pytest.mark.parametrize("ell", [1, 2, 3, 5])
@pytest.mark.parametrize("a", [2.5, 3.0, 4.75, 10.0])
def test_multivariate_gamma_matches_scipy(a, ell):
    assert log_multivariate_gamma(a, ell) == pytest.approx(special.multigammaln(a, ell), rel=1e-13)
    assert multivariate_gamma(a, ell) == pytest.approx(math.exp(special.multigammaln(a, ell)), rel=1e-12)


def test_multivariate_gamma_poles():
    with pytest.raises(ValueError, match="pole"):
        multivariate_gamma(1, 3)
    with pytest.raises(ValueError, match="pole"):
        log_multivariate_gamma(Fraction(1, 2), 2)
