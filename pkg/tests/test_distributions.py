"""Stochastic primitives against analytic values.

Tolerances are 4 standard errors at the stated n (or exact for degenerate
parameters), so failures indicate real defects rather than unlucky seeds;
the streams are seeded and fully deterministic anyway.
"""

import math

import pytest

from worldtalk.compiler import compile_expr
from worldtalk.errors import ChurchEvalError
from worldtalk.rng import RandomStream, derive_chain_seed, mix64
from worldtalk.runtime import WorldTrace
from worldtalk.sexpr import parse_one
from worldtalk.values import iter_list

N = 100_000


def draws(text, n=N, base_seed=100):
    step = compile_expr(parse_one(text))
    return [step(None, WorldTrace(derive_chain_seed(base_seed, 0, i))) for i in range(n)]


def test_flip_degenerate():
    assert all(v is False for v in draws("(flip 0)", 2000))
    assert all(v is True for v in draws("(flip 1)", 2000))


def test_flip_default_half():
    values = draws("(flip)", N)
    p = sum(values) / N
    assert abs(p - 0.5) <= 4 * math.sqrt(0.25 / N)


@pytest.mark.parametrize("p", [0.1, 0.5, 0.9])
def test_flip_rates(p):
    values = draws(f"(flip {p})", N, base_seed=int(p * 1000))
    rate = sum(values) / N
    assert abs(rate - p) <= 4 * math.sqrt(p * (1 - p) / N)


def test_gaussian_moments():
    values = draws("(gaussian 50 20)")
    mean = sum(values) / N
    assert abs(mean - 50) <= 0.4  # ~5 standard errors of the mean
    var = sum((v - mean) ** 2 for v in values) / N
    se_var = math.sqrt(2 / (N - 1)) * 400
    assert abs(var - 400) <= 4 * se_var


def test_uniform_range_and_mean():
    values = draws("(uniform 2 5)")
    assert all(2 <= v < 5 for v in values)
    mean = sum(values) / N
    assert abs(mean - 3.5) <= 4 * (3 / math.sqrt(12)) / math.sqrt(N)


def test_exponential_rate_parameterization():
    values = draws("(exponential 2)")
    mean = sum(values) / N
    assert abs(mean - 0.5) <= 4 * 0.5 / math.sqrt(N)


def test_uniform_draw_uniformity():
    values = draws("(uniform-draw '(a b c d))")
    counts = {}
    for v in values:
        counts[v.name] = counts.get(v.name, 0) + 1
    for name in "abcd":
        assert abs(counts[name] / N - 0.25) <= 4 * math.sqrt(0.25 * 0.75 / N)


def test_bounded_geometric_pmf():
    values = draws("(bounded-geometric 0.5 0 3)")
    counts = [0, 0, 0, 0]
    for v in values:
        counts[int(v)] += 1
    expected = [0.5, 0.25, 0.125, 0.125]  # mass at >= 3 collapses onto 3
    for k in range(4):
        assert abs(counts[k] / N - expected[k]) <= 0.01


def test_bounded_geometric_p_one():
    assert all(v == 2.0 for v in draws("(bounded-geometric 1 2 5)", 200))


def test_shuffle_unique_is_uniform_permutation():
    values = draws("(shuffle-unique '(a b c))", 60_000)
    counts = {}
    for v in values:
        key = "".join(s.name for s in iter_list(v))
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == 6
    for key, count in counts.items():
        assert abs(count / 60_000 - 1 / 6) <= 4 * math.sqrt((1 / 6) * (5 / 6) / 60_000)


@pytest.mark.parametrize(
    "text",
    [
        "(flip 1.5)",
        "(flip -0.1)",
        "(gaussian 0 -1)",
        "(uniform-draw '())",
        "(bounded-geometric 0.5 3 1)",
        "(exponential 0)",
    ],
)
def test_parameter_validation(text):
    with pytest.raises(ChurchEvalError):
        compile_expr(parse_one(text))(None, WorldTrace(1))


# --- seed derivation ----------------------------------------------------------


def test_derive_chain_seed_golden():
    # Pinned: changing the mixing function invalidates recorded transcripts.
    assert derive_chain_seed(0, 0, 0) == 1947650974430630626
    assert derive_chain_seed(1, 2, 3) == 15265486093347245592


def test_derive_chain_seed_deterministic_and_sensitive():
    assert derive_chain_seed(5, 1, 9) == derive_chain_seed(5, 1, 9)
    assert derive_chain_seed(5, 1, 9) != derive_chain_seed(5, 1, 10)
    assert derive_chain_seed(5, 1, 9) != derive_chain_seed(5, 2, 9)
    assert derive_chain_seed(5, 1, 9) != derive_chain_seed(6, 1, 9)


def test_derive_chain_seed_collision_scan():
    rng = RandomStream(42)
    seen = set()
    for _ in range(200_000):
        chain = rng.next_u64() % (1 << 20)
        attempt = rng.next_u64() % (1 << 20)
        seen.add(derive_chain_seed(777, chain, attempt))
    assert len(seen) >= 200_000 - 25  # duplicate (chain, attempt) probes only


def test_mix64_distinct_outputs():
    # mix64(0) == 0 is the finalizer's known fixed point; derive_chain_seed
    # offsets its inputs so the all-zero case never reaches it.
    assert mix64(1) != mix64(2)
    assert len({mix64(i) for i in range(1000)}) == 1000
