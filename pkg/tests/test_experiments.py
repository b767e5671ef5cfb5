from collections import Counter

import numpy as np
import pytest

from oracles import ref_seed_driven_scores
from seedrank import (
    ContractError,
    Document,
    ExperimentReport,
    InsufficientDocumentsError,
    InsufficientSeedsError,
    RunEntry,
    SeedGroup,
    Topic,
    bow,
    concat_group,
    evaluate_entries,
    intra_similarity,
    loocv_single,
    make_groups,
    multi_sdr,
    oracle_single,
    rank,
    term_commonality,
    write_run,
)
from seedrank.experiments import _pairwise_mean_cosine
from seedrank.vectors import TfIdfVector


def run_bytes(entries, tmp_path, name):
    path = tmp_path / name
    write_run(entries, path)
    return path.read_bytes()


class TestLoocvSingle:
    def test_one_run_per_seed_and_mean(self, params, pipeline, hand_corpus, hand_topic):
        report, runs = loocv_single(hand_topic, hand_corpus, "qlm", "bow", params, pipeline)
        assert set(runs) == {"s", "c1", "c3"}
        units = report.values["T1"]
        aps = [units[seed]["map"] for seed in runs]
        per_topic = report.per_topic_means()["map"]["T1"]
        assert per_topic == pytest.approx(sum(aps) / len(aps), abs=1e-12)
        for seed_id, entries in runs.items():
            assert all(e.topic_id == f"T1.{seed_id}" for e in entries)
            assert {e.doc_id for e in entries} == set(hand_corpus) - {seed_id}

    def test_single_relevant_is_error(self, params, pipeline, hand_corpus):
        topic = Topic("T1", list(hand_corpus), {"s": 1})
        with pytest.raises(InsufficientSeedsError):
            loocv_single(topic, hand_corpus, "qlm", "bow", params, pipeline)

    def test_cross_topic_mean_is_unweighted(self):
        report = ExperimentReport()
        report.add("T1", "a", {"map": 0.3})
        report.add("T1", "b", {"map": 0.5})
        report.add("T2", "a", {"map": 0.6})
        assert report.per_topic_means()["map"] == {"T1": 0.4, "T2": 0.6}
        assert report.cross_topic_means()["map"] == pytest.approx(0.5)


class TestMakeGroups:
    def pool(self, n):
        return [f"d{i}" for i in range(n)]

    def test_window_counts(self):
        assert len(make_groups("T", self.pool(10))) == 9      # w = 2
        assert len(make_groups("T", self.pool(20))) == 17     # w = 4
        assert len(make_groups("T", self.pool(5))) == 4       # w = max(2, 1)

    def test_window_width(self):
        groups = make_groups("T", self.pool(20))
        assert all(len(g.member_ids) == 4 for g in groups)
        assert groups[0].member_ids == ("d0", "d1", "d2", "d3")
        assert groups[-1].member_ids == ("d16", "d17", "d18", "d19")

    def test_too_few_seeds(self):
        with pytest.raises(InsufficientSeedsError):
            make_groups("T", self.pool(2))

    @pytest.mark.parametrize("n", [3, 5, 10, 23])
    def test_every_seed_in_one_to_w_groups(self, n):
        groups = make_groups("T", self.pool(n))
        w = len(groups[0].member_ids)
        membership = Counter(m for g in groups for m in g.member_ids)
        assert set(membership) == set(self.pool(n))
        assert all(1 <= c <= w for c in membership.values())

    def test_window_indices_are_offsets(self):
        groups = make_groups("T", self.pool(6))
        assert [g.window_index for g in groups] == list(range(len(groups)))


class TestConcatGroup:
    def corpus(self):
        return {
            "a": Document("a", "x", "y y"),
            "b": Document("b", "x z", "y"),
        }

    def test_counts_are_additive(self, pipeline):
        group = SeedGroup("T", ("a", "b"), 0)
        pseudo = concat_group(group, self.corpus())
        merged = bow(pseudo, pipeline).counts
        summed = Counter(bow(self.corpus()["a"], pipeline).counts)
        summed += Counter(bow(self.corpus()["b"], pipeline).counts)
        assert merged == dict(summed)

    def test_singleton_identity(self, pipeline):
        pseudo = concat_group(SeedGroup("T", ("a",), 0), self.corpus())
        assert bow(pseudo, pipeline).counts == bow(self.corpus()["a"], pipeline).counts

    def test_order_permutation_same_counts(self, pipeline):
        ab = concat_group(SeedGroup("T", ("a", "b"), 0), self.corpus())
        ba = concat_group(SeedGroup("T", ("b", "a"), 0), self.corpus())
        assert bow(ab, pipeline).counts == bow(ba, pipeline).counts

    def test_missing_member(self):
        with pytest.raises(ContractError):
            concat_group(SeedGroup("T", ("a", "zz"), 0), self.corpus())


MULTI_DOCS = [
    Document("s1", "anticoagulant therapy", "warfarin stroke prevention trial"),
    Document("s2", "atrial fibrillation", "anticoagulant stroke risk"),
    Document("c1", "warfarin trial", "stroke prevention anticoagulant"),
    Document("c2", "atrial fibrillation management", "heart rhythm control"),
    Document("c3", "stroke rehabilitation", "motor recovery exercise"),
    Document("c4", "diabetes screening", "glucose tolerance test"),
    Document("c5", "warfarin dosing", "bleeding risk anticoagulant"),
]


@pytest.fixture
def multi_corpus():
    return {d.doc_id: d for d in MULTI_DOCS}


@pytest.fixture
def multi_topic(multi_corpus):
    judgments = {"s1": 1, "s2": 1, "c1": 1, "c5": 1}
    return Topic("T9", list(multi_corpus), judgments)


class TestMultiSdr:
    def test_singleton_group_equals_single(self, params, pipeline, multi_corpus, multi_topic, tmp_path):
        group = SeedGroup("T9", ("s1",), 0)
        multi = multi_sdr(
            multi_topic, multi_corpus, group, "sdr", "bow", params, pipeline, run_key="K"
        )
        single = rank(
            multi_topic, multi_corpus, ["s1"], "sdr", "bow", params, pipeline, run_key="K"
        )
        assert run_bytes(multi, tmp_path, "m.run") == run_bytes(single, tmp_path, "s.run")

    def test_group_excludes_all_members(self, params, pipeline, multi_corpus, multi_topic):
        group = SeedGroup("T9", ("s1", "s2"), 0)
        entries = multi_sdr(multi_topic, multi_corpus, group, "sdr", "bow", params, pipeline)
        assert {e.doc_id for e in entries} == {"c1", "c2", "c3", "c4", "c5"}
        assert all(e.topic_id == "T9.w0" for e in entries)

    def test_pseudo_seed_vocabulary_is_union(self, params, pipeline):
        corpus = {
            "s1": Document("s1", "", "alpha alpha"),
            "s2": Document("s2", "", "beta"),
            "c1": Document("c1", "", "alpha"),
            "c2": Document("c2", "", "beta gamma"),
        }
        topic = Topic("T", list(corpus), {"s1": 1, "s2": 1, "c1": 1})
        group = SeedGroup("T", ("s1", "s2"), 0)
        entries = multi_sdr(topic, corpus, group, "qlm", "bow", params, pipeline)
        # both candidates score > 0 because the pseudo-seed covers both vocabularies
        assert all(e.score > 0 for e in entries)

    def test_two_seed_group_matches_reference(self, params, pipeline, multi_corpus, multi_topic):
        group = SeedGroup("T9", ("s1", "s2"), 0)
        entries = multi_sdr(multi_topic, multi_corpus, group, "sdr", "bow", params, pipeline)
        assert [e.doc_id for e in entries] == ["c1", "c5", "c3", "c2", "c4"]  # frozen from the oracle

        counts = {d: bow(doc, pipeline).counts for d, doc in multi_corpus.items()}
        seed = dict(Counter(counts.pop("s1")) + Counter(counts.pop("s2")))
        expected = ref_seed_driven_scores(seed, counts, params.jm_lambda)
        for entry in entries:
            assert entry.score == pytest.approx(expected[entry.doc_id], abs=1e-9)


class TestOracleSingle:
    def runs(self):
        # Winner selection fodder: s1's run places relevants earlier.
        s1 = [
            RunEntry("T.s1", "d1", 1, 4.0, "x"),
            RunEntry("T.s1", "s2", 2, 3.0, "x"),
            RunEntry("T.s1", "d3", 3, 2.0, "x"),
            RunEntry("T.s1", "d4", 4, 1.0, "x"),
        ]
        s2 = [
            RunEntry("T.s2", "d3", 1, 4.0, "x"),
            RunEntry("T.s2", "d4", 2, 3.0, "x"),
            RunEntry("T.s2", "s1", 3, 2.0, "x"),
            RunEntry("T.s2", "d1", 4, 1.0, "x"),
        ]
        return {"s1": s1, "s2": s2}

    def topic(self):
        judgments = {"s1": 1, "s2": 1, "d1": 1, "d4": 1, "d3": 0}
        return Topic("T", ["s1", "s2", "d1", "d3", "d4"], judgments)

    def test_picks_best_and_removes_group_mates(self):
        group = SeedGroup("T", ("s1", "s2"), 0)
        entries = oracle_single(self.topic(), group, self.runs())
        assert [e.doc_id for e in entries] == ["d1", "d3", "d4"]
        assert [e.rank for e in entries] == [1, 2, 3]
        assert all(e.topic_id == "T.w0" for e in entries)
        assert entries[0].tag == "x-oracle"

    def test_ap_changes_after_midrank_removal(self):
        # Hand recomputation: before removal (restricted to the 4 ranked docs)
        # R=3 with hits at 1, 2, 4 -> AP = (1 + 1 + 3/4)/3.
        topic = self.topic()
        before = evaluate_entries(self.runs()["s1"], topic.judgments)
        assert before["map"] == pytest.approx((1.0 + 1.0 + 0.75) / 3, abs=1e-12)
        # After removing s2 and compacting: R=2 with hits at 1 and 3.
        group = SeedGroup("T", ("s1", "s2"), 0)
        after = evaluate_entries(oracle_single(topic, group, self.runs()), topic.judgments)
        assert after["map"] == pytest.approx((1.0 + 2.0 / 3.0) / 2, abs=1e-12)

    def test_tie_breaks_to_smallest_seed_id(self):
        entries = {
            "s1": [RunEntry("T.s1", "d1", 1, 1.0, "x"), RunEntry("T.s1", "s2", 2, 0.5, "x")],
            "s2": [RunEntry("T.s2", "d1", 1, 1.0, "x"), RunEntry("T.s2", "s1", 2, 0.5, "x")],
        }
        topic = Topic("T", ["s1", "s2", "d1"], {"s1": 1, "s2": 1, "d1": 1})
        group = SeedGroup("T", ("s2", "s1"), 0)
        out = oracle_single(topic, group, entries)
        # both runs have AP 1.0 on their restricted qrels; s1 wins the tie
        assert out == [RunEntry("T.w0", "d1", 1, 1.0, "x-oracle")]

    def test_missing_member_run(self):
        group = SeedGroup("T", ("s1", "missing"), 0)
        with pytest.raises(ContractError):
            oracle_single(self.topic(), group, self.runs())

    def test_oracle_and_multi_cover_same_docs(self, params, pipeline, multi_corpus, multi_topic):
        _, singles = loocv_single(multi_topic, multi_corpus, "sdr", "bow", params, pipeline)
        for group in make_groups("T9", multi_topic.relevant_ids):
            multi = multi_sdr(multi_topic, multi_corpus, group, "sdr", "bow", params, pipeline)
            oracle = oracle_single(multi_topic, group, singles)
            assert {e.doc_id for e in multi} == {e.doc_id for e in oracle}
            assert len(multi) == len(oracle)


class TestIntraSimilarity:
    def make_topic_corpus(self, rel_texts, irrel_texts):
        corpus = {}
        judgments = {}
        for i, text in enumerate(rel_texts):
            doc_id = f"r{i}"
            corpus[doc_id] = Document(doc_id, "", text)
            judgments[doc_id] = 1
        for i, text in enumerate(irrel_texts):
            doc_id = f"i{i}"
            corpus[doc_id] = Document(doc_id, "", text)
            judgments[doc_id] = 0
        return Topic("T", list(corpus), judgments), corpus

    def test_identical_relevant_docs(self, pipeline):
        topic, corpus = self.make_topic_corpus(
            ["aspirin heart unique1", "aspirin heart unique1"],
            ["stroke brain", "glucose insulin", "kidney renal"],
        )
        rel_mean, _ = intra_similarity(topic, corpus, "bow", pipeline, rng_seed=1)
        assert rel_mean == pytest.approx(1.0)

    def test_pairwise_mean_hand_example(self):
        # Three unit vectors with pairwise cosines exactly {0.5, 0.2, 0.1}.
        gram = np.array([[1.0, 0.5, 0.2], [0.5, 1.0, 0.1], [0.2, 0.1, 1.0]])
        rows = np.linalg.cholesky(gram)
        vectors = []
        for row in rows:
            weights = {f"t{j}": float(w) for j, w in enumerate(row) if w != 0.0}
            vectors.append(TfIdfVector(weights, float(np.linalg.norm(row))))
        assert _pairwise_mean_cosine(vectors) == pytest.approx(0.26666666, abs=1e-7)

    def test_single_relevant_is_error(self, pipeline):
        topic, corpus = self.make_topic_corpus(["one doc"], ["a", "b"])
        with pytest.raises(InsufficientDocumentsError, match="relevant"):
            intra_similarity(topic, corpus, "bow", pipeline)

    def test_too_few_irrelevant_is_error(self, pipeline):
        topic, corpus = self.make_topic_corpus(["a b", "a c", "a d"], ["x y"])
        with pytest.raises(InsufficientDocumentsError, match="irrelevant"):
            intra_similarity(topic, corpus, "bow", pipeline)

    def test_deterministic_and_rel_mean_seed_free(self, pipeline):
        rng = np.random.default_rng(11)
        words = [f"w{i}" for i in range(30)]
        rel = [" ".join(rng.choice(words[:10], size=8)) for _ in range(3)]
        irrel = [" ".join(rng.choice(words, size=8)) for _ in range(8)]
        topic, corpus = self.make_topic_corpus(rel, irrel)
        a = intra_similarity(topic, corpus, "bow", pipeline, rng_seed=5)
        b = intra_similarity(topic, corpus, "bow", pipeline, rng_seed=5)
        c = intra_similarity(topic, corpus, "bow", pipeline, rng_seed=6)
        assert a == b
        assert a[0] == c[0]  # relevant side never sampled


class TestTermCommonality:
    def test_fractions(self, pipeline):
        corpus = {
            "r0": Document("r0", "", "shared alpha"),
            "r1": Document("r1", "", "shared beta"),
            "r2": Document("r2", "", "shared gamma"),
            "r3": Document("r3", "", "shared delta"),
        }
        topic = Topic("T", list(corpus), {d: 1 for d in corpus})
        fractions, histogram = term_commonality(topic, corpus, "bow", pipeline)
        assert fractions["shared"] == 1.0
        assert fractions["alpha"] == 0.25
        assert histogram == {1: 4, 4: 1}

    def test_boc_fractions_over_restricted_vocab(self, pipeline):
        from seedrank import Lexicon

        corpus = {
            "r0": Document("r0", "", "heart noise1"),
            "r1": Document("r1", "", "heart noise2"),
        }
        topic = Topic("T", list(corpus), {d: 1 for d in corpus})
        lex = Lexicon(frozenset({"heart"}))
        fractions, _ = term_commonality(topic, corpus, "boc", pipeline, lexicon=lex)
        assert fractions == {"heart": 1.0}

    def test_no_relevant_is_error(self, pipeline):
        corpus = {"d": Document("d", "", "x")}
        topic = Topic("T", ["d"], {"d": 0})
        with pytest.raises(InsufficientDocumentsError):
            term_commonality(topic, corpus, "bow", pipeline)
