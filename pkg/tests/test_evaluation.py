import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparseqa import evaluation as ev
from sparseqa.corpus import Passage
from sparseqa.errors import DataFormatError
from sparseqa.runs import RankedList, RunSet

from conftest import make_corpus, q
from oracles import rouge_brute


# -- normalize_answer ----------------------------------------------------------


def test_normalize_removes_article_and_punctuation():
    assert ev.normalize_answer("The September 1977.") == "september 1977"


def test_normalize_drops_symbols():
    assert ev.normalize_answer("Brooks & Dunn") == "brooks dunn"


def test_normalize_collapses_whitespace():
    assert ev.normalize_answer("AN   apple") == "apple"


@given(st.text(max_size=60))
def test_normalize_idempotent(s):
    once = ev.normalize_answer(s)
    assert ev.normalize_answer(once) == once


# -- containment ------------------------------------------------------------------


def _passage(text, title=""):
    return Passage(id="p", title=title, text=text)


def test_containment_table1_sentence():
    p = _passage("The album was released in September 1977 on Cleveland "
                 "International / Epic Records.")
    assert ev.passage_contains_answer(p, ["September 1977"])


def test_containment_is_token_level_not_substring():
    assert not ev.passage_contains_answer(_passage("concatenate things"), ["cat"])


def test_containment_requires_contiguity():
    p = _passage("september was warm but 1977 was cold")
    assert not ev.passage_contains_answer(p, ["September 1977"])


def test_containment_checks_title_too():
    p = Passage(id="p", title="September 1977", text="irrelevant body")
    assert ev.passage_contains_answer(p, ["september 1977"])


def test_containment_empty_answer_never_matches():
    assert not ev.passage_contains_answer(_passage("a b c"), ["..."])


def test_containment_union_is_disjunction():
    p = _passage("alpha beta gamma")
    a, b = ["alpha"], ["zeta"]
    assert ev.passage_contains_answer(p, a + b) == (
        ev.passage_contains_answer(p, a) or ev.passage_contains_answer(p, b)
    )


# -- exact match ---------------------------------------------------------------------


def test_exact_match_table1():
    assert ev.exact_match("September 1977", ["September 1977"])
    assert ev.exact_match("the september 1977", ["September 1977"])
    assert not ev.exact_match("September 1978", ["September 1977"])


@given(st.text(max_size=40))
def test_exact_match_reflexive(s):
    assert ev.exact_match(s, [s])


@given(st.text(max_size=40), st.text(max_size=40))
def test_exact_match_invariant_under_normalization(a, b):
    assert ev.exact_match(a, [b]) == ev.exact_match(ev.normalize_answer(a), [b])
    assert ev.exact_match(a, [b]) == ev.exact_match(a, [ev.normalize_answer(b)])


# -- top-k accuracy ---------------------------------------------------------------------


def _depth_fixture():
    """Four questions with first hits at depths 1, 3, none, 7."""
    misses = [(f"m{i}", "", f"filler text {i}") for i in range(10)]
    hits = [(f"h{i}", "", f"the answer ans{i} is here") for i in range(4)]
    corpus = make_corpus(misses + hits)
    questions = [q(f"q{i}", f"question {i}", [f"ans{i}"]) for i in range(4)]
    run = RunSet(name="fixture")

    def entries(ids):
        return [(pid, float(len(ids) - j)) for j, pid in enumerate(ids)]

    run.add(RankedList("q0", entries(["h0", "m0", "m1"])))
    run.add(RankedList("q1", entries(["m0", "m1", "h1", "m2"])))
    run.add(RankedList("q2", entries(["m0", "m1", "m2"])))
    run.add(RankedList("q3", entries(["m0", "m1", "m2", "m3", "m4", "m5", "h3", "m6"])))
    return run, questions, corpus


def test_topk_accuracy_depth_fixture():
    run, questions, corpus = _depth_fixture()
    report = ev.topk_accuracy(run, questions, [1, 5, 10], corpus)
    assert report.accuracy == {1: 0.25, 5: 0.5, 10: 0.75}
    assert report.hit_depth == {"q0": 1, "q1": 3, "q2": None, "q3": 7}


def test_topk_accuracy_all_hits_and_all_misses():
    run, questions, corpus = _depth_fixture()
    hit_run = RunSet(name="hits")
    miss_run = RunSet(name="misses")
    for i in range(4):
        hit_run.add(RankedList(f"q{i}", [(f"h{i}", 1.0)]))
        miss_run.add(RankedList(f"q{i}", [("m0", 1.0)]))
    assert ev.topk_accuracy(hit_run, questions, [1, 5], corpus).accuracy == {1: 1.0, 5: 1.0}
    assert ev.topk_accuracy(miss_run, questions, [1, 5], corpus).accuracy == {1: 0.0, 5: 0.0}


def test_topk_missing_question_counts_as_miss():
    run, questions, corpus = _depth_fixture()
    run.lists.pop("q0")
    report = ev.topk_accuracy(run, questions, [10], corpus)
    assert report.hit_depth["q0"] is None
    assert report.accuracy[10] == 0.5


def test_topk_unknown_passage_is_hard_error():
    run, questions, corpus = _depth_fixture()
    run.lists["q0"].entries.append(("ghost", 0.1))
    with pytest.raises(DataFormatError, match="ghost"):
        ev.topk_accuracy(run, questions, [10], corpus)


def test_topk_monotone_in_k_random_runs():
    rng = random.Random(21)
    docs = [(f"p{i}", "", f"body ans{i % 5} text") for i in range(30)]
    corpus = make_corpus(docs)
    questions = [q(f"q{i}", f"question {i}", [f"ans{i % 5}"]) for i in range(8)]
    for _ in range(100):
        run = RunSet(name="r")
        for question in questions:
            ids = rng.sample([d[0] for d in docs], rng.randint(0, 12))
            run.add(RankedList(question.id, [(p, float(20 - j)) for j, p in enumerate(ids)]))
        ks = [1, 2, 5, 10, 20]
        acc = ev.topk_accuracy(run, questions, ks, corpus).accuracy
        assert all(acc[a] <= acc[b] for a, b in zip(ks, ks[1:]))


# -- ROUGE ---------------------------------------------------------------------------------


def test_rouge_identical_strings():
    scores = ev.rouge_f1("the cat sat", "the cat sat")
    assert scores.as_tuple() == (1.0, 1.0, 1.0)


def test_rouge_disjoint_strings():
    assert ev.rouge_f1("aa bb", "cc dd").as_tuple() == (0.0, 0.0, 0.0)


def test_rouge_cat_sat_ran():
    scores = ev.rouge_f1("the cat sat", "the cat ran")
    assert scores.rouge1_f1 == pytest.approx(2 / 3, abs=1e-12)
    assert scores.rouge2_f1 == pytest.approx(1 / 2, abs=1e-12)
    assert scores.rougeL_f1 == pytest.approx(2 / 3, abs=1e-12)


def test_rouge_empty_sides_are_zero():
    assert ev.rouge_f1("", "words here").as_tuple() == (0.0, 0.0, 0.0)
    assert ev.rouge_f1("words here", "").as_tuple() == (0.0, 0.0, 0.0)


def test_rouge_matches_brute_force_random_pairs():
    rng = random.Random(17)
    vocab = [f"t{i}" for i in range(9)]
    for _ in range(300):
        cand = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        ref = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        got = ev.rouge_f1(cand, ref).as_tuple()
        want = rouge_brute(cand, ref)
        for g, w in zip(got, want):
            assert g == pytest.approx(w, abs=1e-9)


def test_rouge_symmetry_single_reference():
    rng = random.Random(23)
    vocab = [f"t{i}" for i in range(6)]
    for _ in range(50):
        a = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 10)))
        b = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 10)))
        ab, ba = ev.rouge_f1(a, b), ev.rouge_f1(b, a)
        assert ab.rouge1_f1 == pytest.approx(ba.rouge1_f1, abs=1e-12)
        assert ab.rougeL_f1 == pytest.approx(ba.rougeL_f1, abs=1e-12)


def test_rouge_multi_reference_takes_max():
    scores = ev.rouge_f1("the cat sat", ["totally unrelated", "the cat sat"])
    assert scores.as_tuple() == (1.0, 1.0, 1.0)


def test_split_references():
    assert ev.split_references("A[SEP]B") == ["A", "B"]
    assert ev.split_references("solo") == ["solo"]
    assert ev.split_references("x [SEP] y [SEP] ") == ["x", "y"]


# -- grouped metrics ----------------------------------------------------------------------


def test_question_type_first_token():
    assert ev.question_type("Why did it rain") == "Why"
    assert ev.question_type("'Who is there?") == "Who"
    assert ev.question_type("name the capital") == "Other"
    assert ev.question_type("") == "Other"


def test_grouped_metric_single_group():
    questions = [q(f"q{i}", f"who is number {i}", ["x"]) for i in range(4)]
    values = {"q0": 1.0, "q1": 0.0, "q2": 1.0, "q3": 1.0}
    groups = ev.grouped_metric(questions, values)
    assert set(groups) == {"Who"}
    assert groups["Who"].count == 4
    assert groups["Who"].mean == pytest.approx(0.75)


def test_grouped_metric_eight_categories():
    starts = ["who", "when", "what", "where", "how", "which", "why", "is"]
    questions = [q(f"q{i}", f"{s} example", ["x"]) for i, s in enumerate(starts)]
    values = {question.id: 1.0 for question in questions}
    groups = ev.grouped_metric(questions, values)
    assert set(groups) == {"Who", "When", "What", "Where", "How", "Which", "Why", "Other"}
    assert all(stat.count == 1 for stat in groups.values())


def test_grouped_metric_recomposes_overall_mean():
    rng = random.Random(5)
    starts = ["who", "when", "what", "maybe"]
    questions = [q(f"q{i}", f"{rng.choice(starts)} thing {i}", ["x"]) for i in range(40)]
    values = {question.id: rng.random() for question in questions}
    groups = ev.grouped_metric(questions, values)
    weighted = sum(stat.mean * stat.count for stat in groups.values())
    total = sum(stat.count for stat in groups.values())
    assert weighted / total == pytest.approx(sum(values.values()) / 40, abs=1e-9)


def test_grouped_metric_missing_value_raises():
    questions = [q("q1", "who", ["x"])]
    with pytest.raises(ValueError, match="q1"):
        ev.grouped_metric(questions, {})


def test_external_labeler_missing_id_is_hard_error():
    questions = [q("q1", "who", ["x"])]
    labeler = ev.labeler_from_file({"other": "A"})
    with pytest.raises(DataFormatError, match="q1"):
        ev.grouped_metric(questions, {"q1": 1.0}, labeler)
