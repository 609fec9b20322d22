import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faircap.data import (
    Pattern,
    Predicate,
    coverage,
    evaluate_predicate,
    pattern_mask,
    pattern_refines,
)
from faircap.errors import PatternError, UnknownAttribute
from helpers import random_categorical_dataset, survey_dataset


@pytest.fixture(scope="module")
def survey():
    return survey_dataset()


def test_equality_predicate_on_rows(survey):
    pred = Predicate("Age", "=", 26)
    rows = [
        tuple(
            survey.columns[a.name][i]
            if not a.is_categorical
            else a.domain.values[survey.columns[a.name][i]]
            for a in survey.schema
        )
        for i in range(survey.n)
    ]
    assert evaluate_predicate(pred, rows[0], survey) is True
    assert evaluate_predicate(pred, rows[1], survey) is False


def test_predicate_reflexivity(survey):
    # x = x holds for whatever value the row actually carries
    age0 = survey.columns["Age"][0]
    pred = Predicate("Age", "=", float(age0))
    row0 = [None] * len(survey.schema)
    row0[[a.name for a in survey.schema].index("Age")] = age0
    assert evaluate_predicate(pred, row0, survey) is True


def test_unknown_attribute_raises(survey):
    with pytest.raises(UnknownAttribute):
        coverage(Pattern([Predicate("Nope", "=", "x")]), survey)


def test_comparison_on_categorical_rejected(survey):
    with pytest.raises(PatternError):
        pattern_mask(Pattern([Predicate("Country", "<", "US")]), survey)


def test_coverage_country_us(survey):
    cov = coverage(Pattern([Predicate("Country", "=", "US")]), survey)
    assert list(cov.row_ids) == [0, 1]
    assert cov.count == 2
    assert cov.protected_count == 0  # both US rows are White, protected is non-White


def test_coverage_empty_pattern_covers_all(survey):
    cov = coverage(Pattern(), survey)
    assert cov.count == survey.n
    assert list(cov.row_ids) == list(range(survey.n))


def test_contradictory_conjunction_is_empty(survey):
    # same-attribute contradictions need distinct ops by construction
    p = Pattern([Predicate("Age", "<", 1.0), Predicate("Age", ">", 2.0)])
    assert coverage(p, survey).count == 0


def test_duplicate_attribute_op_rejected():
    with pytest.raises(PatternError):
        Pattern([Predicate("A", "=", "1"), Predicate("A", "=", "2")])


def test_pattern_refines_basics():
    a1 = Predicate("A", "=", "1")
    b2 = Predicate("B", "=", "2")
    child = Pattern([a1, b2])
    parent = Pattern([a1])
    assert pattern_refines(child, parent)
    assert not pattern_refines(parent, child)
    assert pattern_refines(parent, parent)
    assert pattern_refines(child, Pattern())


@st.composite
def pattern_pair(draw):
    """(child, parent) with parent's predicates a subset of child's."""
    n_attrs = draw(st.integers(2, 4))
    card = draw(st.integers(2, 3))
    preds = []
    for i in draw(st.sets(st.integers(0, n_attrs - 1), min_size=1, max_size=3)):
        value = draw(st.integers(0, card - 1))
        preds.append(Predicate(f"A{i}", "=", f"v{value}"))
    k = draw(st.integers(0, len(preds)))
    return n_attrs, card, preds, preds[:k]


@given(pattern_pair(), st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_refinement_coverage_monotone(pair, seed):
    n_attrs, card, child_preds, parent_preds = pair
    rng = np.random.default_rng(seed)
    ds = random_categorical_dataset(rng, n_rows=60, n_attrs=n_attrs, card=card)
    child = Pattern(child_preds)
    parent = Pattern(parent_preds)
    assert pattern_refines(child, parent)
    child_rows = set(coverage(child, ds).row_ids.tolist())
    parent_rows = set(coverage(parent, ds).row_ids.tolist())
    assert child_rows <= parent_rows


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_protected_count_cross_check(seed):
    rng = np.random.default_rng(seed)
    ds = random_categorical_dataset(rng, n_rows=80, n_attrs=3, card=3)
    pattern = Pattern([Predicate("A1", "=", "v1")])
    cov = coverage(pattern, ds)
    protected_rows = set(coverage(ds.protected_pattern, ds).row_ids.tolist())
    assert cov.protected_count == len(set(cov.row_ids.tolist()) & protected_rows)


def test_coverage_deterministic(survey):
    p = Pattern([Predicate("Country", "=", "US"), Predicate("Age", ">=", 30.0)])
    first = coverage(p, survey)
    second = coverage(p, survey)
    assert list(first.row_ids) == list(second.row_ids)
    assert first.count == second.count == 1
