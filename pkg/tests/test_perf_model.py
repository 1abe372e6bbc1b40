import pytest
from hypothesis import given
from hypothesis import strategies as st

from semalloc.perf_model import (
    DEFAULT_CURVE,
    DimensionError,
    PayloadModel,
    PerfCurve,
    feasible_dimension,
    load_curve_csv,
    lookup,
    payload_bits,
)

# golden copy of the measured curve, typed in independently of the package
GOLDEN = {
    1: (0.39550235, 0.0944817), 2: (0.40009948, 0.09667912), 3: (0.40945041, 0.09386748),
    4: (0.41866887, 0.10047062), 5: (0.42247792, 0.10116262), 6: (0.42490115, 0.10300542),
    7: (0.4295931, 0.11076793), 8: (0.43368545, 0.11739845), 9: (0.43733177, 0.12781957),
    10: (0.4519554, 0.15357989), 11: (0.47728359, 0.1940025), 12: (0.51547686, 0.27020956),
    13: (0.55437698, 0.34242301), 14: (0.61085957, 0.44607532), 15: (0.7460733, 0.65054165),
    16: (0.86169747, 0.82109432),
}


def test_lookup_endpoints():
    assert lookup(DEFAULT_CURVE, 16) == (0.86169747, 0.82109432)
    assert lookup(DEFAULT_CURVE, 1) == (0.39550235, 0.0944817)


@pytest.mark.parametrize("d", [0, 17, -1, 2.5, "3", True])
def test_lookup_out_of_range(d):
    with pytest.raises(DimensionError):
        lookup(DEFAULT_CURVE, d)


def test_golden_table_bit_exact():
    for d, pair in GOLDEN.items():
        assert lookup(DEFAULT_CURVE, d) == pair


def test_packaged_csv_matches_embedded_table():
    assert dict(load_curve_csv().points) == GOLDEN


def test_bleu_dip_is_kept():
    assert lookup(DEFAULT_CURVE, 3)[1] < lookup(DEFAULT_CURVE, 2)[1]


def test_curve_rejects_non_monotone_similarity():
    bad = dict(GOLDEN)
    bad[5] = (0.1, 0.1)
    with pytest.raises(ValueError):
        PerfCurve(bad)


@pytest.mark.parametrize("model,d,bits", [
    (PayloadModel(32, 32), 16, 16384),
    (PayloadModel(32, 32), 1, 1024),
    (PayloadModel(1, 1), 1, 1),
])
def test_payload_bits(model, d, bits):
    assert payload_bits(model, d) == bits


def test_payload_bits_rejects_bad_dimension():
    with pytest.raises(DimensionError):
        payload_bits(PayloadModel(), 0)


@pytest.mark.parametrize("budget,d", [(16384, 16), (16383, 15), (1024, 1), (1023, None), (0, None), (10**9, 16)])
def test_feasible_dimension(budget, d):
    assert feasible_dimension(PayloadModel(), budget) == d


@given(st.integers(0, 40000), st.integers(0, 40000))
def test_feasible_dimension_monotone(a, b):
    m = PayloadModel()
    lo, hi = sorted((a, b))
    da, db = feasible_dimension(m, lo) or 0, feasible_dimension(m, hi) or 0
    assert da <= db


@given(st.integers(1, 8), st.integers(1, 64), st.integers(0, 20000))
def test_feasible_dimension_is_maximal(words, q, budget):
    m = PayloadModel(words, q)
    d = feasible_dimension(m, budget)
    if d is None:
        assert payload_bits(m, 1) > budget
        return
    assert payload_bits(m, d) <= budget
    if d < m.max_dimension:
        assert budget < payload_bits(m, d + 1)
