import logging
import random

import pytest

from semrerank.corpus import Corpus, Document, NormalizeConfig
from semrerank.errors import DataError
from semrerank.evaluation import (
    EvalReport,
    GroundTruth,
    avg_p_at_k,
    comparison_csv,
    evaluate,
    load_ground_truth,
    movement,
    movement_bin,
    precision_at_k,
    rare_terms,
    rtp_and_prf,
)
from semrerank.scorers import ScoredList

from oracles import naive_movement, naive_p_at_k, naive_rtp


def ranked(names):
    return ScoredList(" x", [(c, float(-i)) for i, c in enumerate(names)])


def test_precision_examples():
    gt = GroundTruth(frozenset({"t1", "t3"}))
    assert precision_at_k(ranked(["t1", "x"]), gt, 1) == 1.0
    assert precision_at_k(ranked(["t1", "t2", "t3", "t4"]), gt, 4) == 0.5
    assert all(precision_at_k(ranked(["a", "b"]), gt, k) == 0.0 for k in (1, 2, 50))
    assert precision_at_k(ranked(["t1"]), gt, 10) == 0.1
    with pytest.raises(ValueError):
        precision_at_k(ranked([]), gt, 1)
    with pytest.raises(ValueError):
        precision_at_k(ranked(["t1"]), gt, 0)


def test_avg_p_at_k_ceiling_and_hand_mean():
    names = [f"t{i}" for i in range(2000)]
    assert avg_p_at_k(ranked(names), GroundTruth(frozenset(names))) == 1.0
    rng = random.Random(4)
    names = [f"c{i}" for i in range(2100)]
    truth = {c for c in names if rng.random() < 0.3}
    hits = {k: sum(1 for c in names[:k] if c in truth) for k in (50, 100, 500, 1000, 2000)}
    want = sum(h / k for k, h in hits.items()) / 5
    assert avg_p_at_k(ranked(names), GroundTruth(frozenset(truth))) == pytest.approx(want, abs=1e-15)


def test_precision_ceiling_with_few_true_terms():
    truth = frozenset(f"g{i}" for i in range(226))
    names = sorted(truth) + [f"n{i}" for i in range(3000)]
    assert precision_at_k(ranked(names), GroundTruth(truth), 2000) == 226 / 2000 == 0.113


def test_rtp_examples(caplog):
    gt = GroundTruth(frozenset({"a", "b", "z1", "z2"}))
    assert rtp_and_prf(ranked(["a", "b", "c", "d"]), gt) == (2, 1.0, 0.5, pytest.approx(2 / 3))
    exact = GroundTruth(frozenset({"a", "b"}))
    assert rtp_and_prf(ranked(["b", "a"]), exact) == (2, 1.0, 1.0, 1.0)
    with caplog.at_level(logging.WARNING):
        assert rtp_and_prf(ranked(["q"]), exact) == (0, 0.0, 0.0, 0.0)
    assert "no candidate" in caplog.text


def test_movement_examples():
    names = [f"t{i:04d}" for i in range(1000)]
    revised = list(names)
    mover = revised.pop(998)  # rank 999
    revised.insert(98, mover)  # rank 99
    rep = movement(ranked(names), ranked(revised), [mover])
    assert rep.mov[mover] == 0.9
    assert rep.bins[mover] == 18  # (0.85, 0.90]
    same = movement(ranked(names), ranked(names))
    assert same.histogram[0] == 1000 and same.percentages()[0] == 100.0


def test_three_term_swap():
    rep = movement(ranked(["a", "b", "c"]), ranked(["b", "a", "c"]))
    assert rep.mov == {"a": -1 / 3, "b": 1 / 3, "c": 0.0}
    assert rep.bins == {"a": -7, "b": 7, "c": 0}
    assert sum(rep.histogram.values()) == 3


def test_movement_bin_edges():
    assert movement_bin(1, 20) == 1  # exactly 5%
    assert movement_bin(2, 20) == 2
    assert movement_bin(-20, 20) == -20
    assert movement_bin(3, 40) == 2  # 7.5%


def test_movement_errors():
    with pytest.raises(DataError):
        movement(ranked(["a", "b"]), ranked(["a", "c"]))
    with pytest.raises(DataError):
        movement(ranked(["a"]), ranked(["a"]), ["zz"])


def test_metrics_match_naive_oracle_on_random_pairs():
    rng = random.Random(123)
    for _ in range(50):
        n = rng.randint(1, 2600)
        names = [f"c{i}" for i in range(n)]
        rng.shuffle(names)
        truth = {c for c in names if rng.random() < rng.random()} | {f"miss{i}" for i in range(rng.randint(0, 30))}
        if not truth:
            truth = {"miss"}
        gt = GroundTruth(frozenset(truth))
        lst = ranked(names)
        for k in (1, 50, 100, 500, 1000, 2000, n):
            assert precision_at_k(lst, gt, k) == naive_p_at_k(names, truth, k)
        assert rtp_and_prf(lst, gt) == naive_rtp(names, truth)
        revised = list(names)
        rng.shuffle(revised)
        terms = [c for c in names if c in truth]
        rep = movement(lst, ranked(revised), terms)
        mov, bins, hist = naive_movement(names, revised, terms)
        assert rep.mov == mov and rep.bins == bins and rep.histogram == hist
        assert sum(rep.histogram.values()) == len(set(terms))


def test_tp_non_decreasing_and_recall_bound():
    rng = random.Random(9)
    names = [f"c{i}" for i in range(300)]
    truth = frozenset(rng.sample(names, 40) + ["absent"])
    gt = GroundTruth(truth)
    tps = [round(precision_at_k(ranked(names), gt, k) * k) for k in range(1, 301)]
    assert all(b >= a for a, b in zip(tps, tps[1:]))
    rtp, _, r, _ = rtp_and_prf(ranked(names), gt)
    assert r <= rtp / len(truth)
    perfect = sorted(names, key=lambda c: c not in truth)
    rtp, _, r, _ = rtp_and_prf(ranked(perfect), gt)
    assert r == rtp / len(truth)


def test_ground_truth_normalized_like_candidates(tmp_path):
    p = tmp_path / "gt.txt"
    p.write_text("Rotor Blades\nthe wind turbines\ndegree of freedom\n\n%%%\n")
    gt = load_ground_truth(p, NormalizeConfig())
    assert gt.terms == {"rotor blade", "wind turbine", "degree of freedom"}
    with pytest.raises(DataError):
        load_ground_truth(tmp_path / "missing.txt")


def test_rare_filter():
    c = Corpus([Document("d", [])], {"rare": 2, "common": 9, "odd": 4}, {})
    assert rare_terms(["rare odd", "rare common", "common"], c) == {"rare odd"}


def test_report_roundtrip_and_csv(tmp_path):
    gt = GroundTruth(frozenset({"a", "c"}))
    rep = evaluate(ScoredList.from_scores("tfidf", {"a": 3.0, "b": 2.0, "c": 1.0}), gt)
    assert rep.p_at_k[50] == 2 / 50 and rep.rtp == 2 and rep.p_at_rtp == 0.5
    rep.write(tmp_path / "r.tsv", "# corpus=x\n")
    back = EvalReport.read(tmp_path / "r.tsv")
    assert back == rep
    csv_text = comparison_csv([rep, back])
    assert csv_text.splitlines()[0].startswith("method,p@50")
    assert len(csv_text.splitlines()) == 3
    for v in [*rep.p_at_k.values(), rep.avg_p_at_k, rep.p_at_rtp, rep.r_at_rtp, rep.f1_at_rtp]:
        assert 0 <= v <= 1
