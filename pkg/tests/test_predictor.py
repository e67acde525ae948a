import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from beliefbox.errors import DataError, DomainError, NumericError
from beliefbox.predictor import (
    BeliefPredictor,
    BeliefUpdateExample,
    evaluate,
    fit_forest,
    fit_ridge,
    fit_tfidf,
    load_examples,
    mine_examples,
    predict_new_strength,
    split_dataset,
    synthetic_corpus,
    tokenize,
    train_predictor,
    write_examples,
)


def test_tokenize():
    assert tokenize("I Agree, a 2nd time!") == ["agree", "2nd", "time"]
    assert tokenize("I agree", min_token_len=1) == ["i", "agree"]


def test_tfidf_weights_by_hand():
    model = fit_tfidf(["red apple", "green apple", "red red car"])
    assert list(model.vocabulary) == ["apple", "car", "green", "red"]
    # idf = ln((1+N)/(1+df)) + 1 with N = 3
    assert model.idf[model.vocabulary["apple"]] == pytest.approx(math.log(4 / 3) + 1)
    assert model.idf[model.vocabulary["car"]] == pytest.approx(math.log(2) + 1)
    vec = model.transform("red red car unknown")
    r, c = 2 * (math.log(4 / 3) + 1), math.log(2) + 1
    norm = math.hypot(r, c)
    assert vec == pytest.approx({model.vocabulary["car"]: c / norm, model.vocabulary["red"]: r / norm})
    assert model.transform("nothing known") == {}
    with pytest.raises(DomainError):
        fit_tfidf([])


def test_tfidf_small_corpus_by_hand():
    model = fit_tfidf(["a bb bb", "bb cc"])
    assert model.document_frequency["bb"] == 2
    assert model.idf[model.vocabulary["bb"]] == pytest.approx(1.0)
    assert "a" not in model.vocabulary
    single = fit_tfidf(["one two"])
    assert np.allclose(single.idf, 1.0)


@given(st.lists(st.text(alphabet="abc xyz", min_size=1, max_size=20), min_size=1, max_size=8))
def test_tfidf_rows_unit_or_zero(docs):
    X = fit_tfidf(docs).transform_many(docs)
    norms = np.linalg.norm(X, axis=1)
    assert np.all(np.isclose(norms, 1.0) | (norms == 0.0))


def ridge_oracle(X, y, lam):
    """Augmented least squares: minimize |yc - Xc w|^2 + lam |w|^2."""
    Xc = X - X.mean(axis=0)
    yc = y - y.mean()
    A = np.vstack([Xc, math.sqrt(lam) * np.eye(X.shape[1])])
    b = np.concatenate([yc, np.zeros(X.shape[1])])
    w = np.linalg.lstsq(A, b, rcond=None)[0]
    return w, y.mean() - X.mean(axis=0) @ w


@pytest.mark.parametrize("n, p", [(30, 4), (6, 20)])
def test_ridge_matches_augmented_least_squares(n, p):
    rng = np.random.default_rng(n + p)
    X = rng.normal(size=(n, p))
    y = rng.normal(size=n)
    m = fit_ridge(X, y, 0.7)
    w, b = ridge_oracle(X, y, 0.7)
    assert np.allclose(m.weights, w, atol=1e-10)
    assert m.intercept == pytest.approx(b, abs=1e-10)


def test_ridge_limits():
    X = np.arange(10, dtype=float).reshape(-1, 1)
    const = fit_ridge(X, np.full(10, 2.5))
    assert np.allclose(const.weights, 0) and const.intercept == pytest.approx(2.5)
    line = fit_ridge(X, 3 * X[:, 0] - 1, penalty=1e-9)
    assert line.weights[0] == pytest.approx(3, abs=1e-6) and line.intercept == pytest.approx(-1, abs=1e-6)
    big = fit_ridge(X, 3 * X[:, 0] - 1, penalty=1e9)
    assert abs(big.weights[0]) < 1e-3


def test_ridge_errors():
    with pytest.raises(NumericError):
        fit_ridge(np.ones((4, 2)), [1, 2, 3, 4], 0.0)
    with pytest.raises(DomainError):
        fit_ridge(np.ones((4, 2)), [1, 2, 3], 1.0)
    with pytest.raises(DomainError):
        fit_ridge(np.ones((4, 2)), [1, 2, 3, 4], -1)


def test_forest_fits_step_function_and_is_deterministic():
    X = np.arange(20, dtype=float).reshape(-1, 1)
    y = (X[:, 0] >= 10).astype(float)
    a = fit_forest(X, y, trees=10, seed=4)
    b = fit_forest(X, y, trees=10, seed=4)
    assert np.array_equal(a.predict(X), b.predict(X))
    single = fit_forest(X, y, trees=1, bootstrap=False)
    assert np.array_equal(single.predict(X), y)
    assert single.features_per_split == 1


def test_forest_single_tree_recovers_leaf_means():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    y = np.array([1.0, 1.0, 4.0, 4.0])
    tree = fit_forest(X, y, trees=1, bootstrap=False).trees[0]
    assert tree.n_nodes == 3 and tree.threshold[0] == 1.5
    assert [tree.value[tree.left[0]], tree.value[tree.right[0]]] == [1.0, 4.0]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000))
def test_forest_predictions_within_target_range(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(15, 3))
    y = rng.integers(-4, 5, size=15).astype(float)
    pred = fit_forest(X, y, trees=5, seed=seed).predict(rng.normal(size=(20, 3)))
    assert np.all(pred >= y.min()) and np.all(pred <= y.max())
    const = fit_forest(X, np.full(15, 2.0), trees=3, seed=seed)
    assert np.all(const.predict(X) == 2.0)


def test_forest_uses_a_third_of_features():
    X = np.random.default_rng(0).normal(size=(12, 9))
    assert fit_forest(X, X[:, 0], trees=2).features_per_split == 3


def test_forest_falls_back_when_sampled_features_are_constant():
    X = np.zeros((10, 6))
    X[:, 5] = np.arange(10)
    y = X[:, 5] * 2
    model = fit_forest(X, y, trees=1, features_per_split=1, bootstrap=False)
    assert np.array_equal(model.predict(X), y)


def test_forest_errors():
    with pytest.raises(DomainError):
        fit_forest(np.ones((1, 2)), [1.0])
    with pytest.raises(DomainError):
        fit_forest(np.ones((3, 2)), [1.0, 2.0, 3.0], trees=0)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 300), st.integers(0, 1000))
def test_split_sizes(n, seed):
    tr, va, te = split_dataset(range(n), seed)
    assert (len(tr), len(va)) == (7 * n // 10, n // 10)
    assert sorted(tr + va + te) == list(range(n))


def test_split_of_2000():
    assert [len(s) for s in split_dataset(range(2000), 0)] == [1400, 200, 400]


def test_synthetic_corpus_follows_its_rule():
    for e in synthetic_corpus(300, seed=2):
        words = e.statement.lower()
        expected = 1 if "agree" in words else -2 if "concede" in words else 0
        assert e.update == expected
        assert 1 <= e.prev <= 5 and 1 <= e.next <= 5


def test_constant_median_baseline_is_derived():
    corpus = synthetic_corpus(2000, seed=0)
    truth = [e.next for e in corpus]
    assert sorted(truth)[len(truth) // 2] == 3
    assert oracles.mean_abs_dev_uniform(3) == pytest.approx(1.2)
    empirical = sum(abs(t - 3) for t in truth) / len(truth)
    assert empirical == pytest.approx(1.2, abs=0.06)


@pytest.mark.parametrize("kind", ["ridge", "forest"])
def test_model_round_trip(tmp_path, kind):
    examples = synthetic_corpus(10, seed=1)
    model = train_predictor(examples, kind=kind, trees=5)
    path = tmp_path / "m.json"
    model.save(path)
    loaded = BeliefPredictor.load(path)
    assert loaded.kind == kind
    texts = [e.statement for e in examples]
    assert np.allclose(loaded.predict_update(texts), model.predict_update(texts))


def test_predict_new_strength_is_clamped():
    model = train_predictor([BeliefUpdateExample("concede now", 3, 1), BeliefUpdateExample("hold on", 1, 1)], penalty=0.0001)
    assert predict_new_strength(model, "concede concede", 1) == 0
    assert predict_new_strength(model, "hold on", 5) == 5
    with pytest.raises(DomainError):
        predict_new_strength(model, "x", 0)


def test_concede_rule_is_learned():
    train, val, test = split_dataset(synthetic_corpus(2000), 0)
    held_out = [e for e in test if "concede" in e.statement.lower()]
    assert held_out
    forest = train_predictor(train, val, kind="forest", trees=50)
    assert all(predict_new_strength(forest, e.statement, 4) == 2 for e in held_out)
    # ridge is linear in L2-normalized features, so long statements dilute the cue
    ridge = train_predictor(train, val)
    hits = sum(predict_new_strength(ridge, e.statement, 4) == 2 for e in held_out)
    assert hits / len(held_out) >= 0.8


def test_evaluate_and_baseline():
    examples = synthetic_corpus(50, seed=3)
    model = train_predictor(examples, kind="forest", trees=10)
    rep = evaluate(model, examples, baseline_value=3.0)
    assert rep["n"] == 50 and rep["baseline_value"] == 3.0
    assert rep["baseline_mae"] == pytest.approx(sum(abs(e.next - 3) for e in examples) / 50)
    with pytest.raises(DomainError):
        evaluate(model, [])


def test_examples_io(tmp_path):
    examples = synthetic_corpus(5)
    write_examples(tmp_path / "e.jsonl", examples)
    assert load_examples(tmp_path / "e.jsonl") == examples
    (tmp_path / "bad.jsonl").write_text('{"statement": "x"}\n')
    with pytest.raises(DataError):
        load_examples(tmp_path / "bad.jsonl")


def test_mine_examples_skips_imputed_and_speech():
    recs = [
        {"kind": "debate"},
        {"kind": "speak", "response": "x"},
        {"kind": "reassess", "statement": "s1", "prev_strength": 5, "reassessed_strength": 4, "imputed": False},
        {"kind": "reassess", "statement": "s2", "prev_strength": 5, "reassessed_strength": 5, "imputed": True},
    ]
    assert mine_examples(recs) == [BeliefUpdateExample("s1", 5, 4)]
    assert mine_examples(recs, "last_turn") == [BeliefUpdateExample("x", 5, 4)]
    with pytest.raises(DomainError):
        mine_examples(recs, "sentence")


def test_unknown_format_version(tmp_path):
    (tmp_path / "m.json").write_text('{"format_version": 99}')
    with pytest.raises(DataError):
        BeliefPredictor.load(tmp_path / "m.json")
