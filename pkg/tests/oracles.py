"""Independent reference implementations used to cross-check the library.

Everything here is written from the definitions, in the most literal way
possible (quadratic slicing, explicit ideal rankings, no shared helpers),
so agreement with the library is meaningful.
"""

import math


def ref_average_precision(ranked, qrels):
    """AP by definition: mean of precision@r over relevant ranks, over total R."""
    relevant = {d for d, g in qrels.items() if g >= 1}
    total = len(relevant)
    precisions = []
    for r in range(1, len(ranked) + 1):
        if ranked[r - 1] in relevant:
            precisions.append(len([d for d in ranked[:r] if d in relevant]) / r)
    return sum(precisions) / total


def ref_precision_at(ranked, qrels, k):
    relevant = {d for d, g in qrels.items() if g >= 1}
    return len([d for d in ranked[:k] if d in relevant]) / k


def ref_recall_at(ranked, qrels, k):
    relevant = {d for d, g in qrels.items() if g >= 1}
    return len([d for d in ranked[:k] if d in relevant]) / len(relevant)


def _dcg(gains):
    return sum(g / math.log2(r + 1) for r, g in enumerate(gains, start=1))


def ref_ndcg_at(ranked, qrels, k):
    relevant = {d for d, g in qrels.items() if g >= 1}
    gains = [1.0 if d in relevant else 0.0 for d in ranked[:k]]
    # Ideal ranking: every judged-relevant document first, then the rest.
    ideal = [1.0] * len(relevant)
    idcg = _dcg(ideal[:k])
    if idcg == 0.0:
        return 0.0
    return _dcg(gains) / idcg


def ref_tfidf(counts, collection):
    """tf * ln(N/df) vectors computed from scratch over a list of count dicts."""
    n = len(collection)
    vec = {}
    for term, c in counts.items():
        df = sum(1 for other in collection if term in other)
        if df == 0 or df == n:
            continue
        vec[term] = c * math.log(n / df)
    return vec


def ref_cosine(u, v):
    num = sum(w * v[t] for t, w in u.items() if t in v)
    nu = math.sqrt(sum(w * w for w in u.values()))
    nv = math.sqrt(sum(w * w for w in v.values()))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return num / (nu * nv)


def ref_seed_driven_scores(seed_counts, candidates, lam):
    """Literal transcription of the seed-driven scoring formula.

    candidates: dict doc_id -> term count dict (seed already excluded).
    Returns doc_id -> score with phi computed from full partitions.
    """
    count_dicts = list(candidates.values())
    total_tokens = sum(sum(c.values()) for c in count_dicts)
    vectors = {d: ref_tfidf(c, count_dicts) for d, c in candidates.items()}
    seed_vec = ref_tfidf(seed_counts, count_dicts)

    def gamma_over(doc_ids):
        if not doc_ids:
            return 0.0
        return sum(ref_cosine(vectors[d], seed_vec) for d in doc_ids) / len(doc_ids)

    phi = {}
    for term in seed_counts:
        with_term = [d for d, c in candidates.items() if term in c]
        without_term = [d for d, c in candidates.items() if term not in c]
        g_with = gamma_over(with_term)
        g_without = gamma_over(without_term)
        if g_without == 0.0:
            phi[term] = math.log(2.0)
        elif g_with == 0.0:
            phi[term] = 0.0
        else:
            phi[term] = math.log(1.0 + g_with / g_without)

    scores = {}
    for doc_id, cand in candidates.items():
        length = sum(cand.values())
        s = 0.0
        for term, c_seed in seed_counts.items():
            if term not in cand:
                continue
            p_c = sum(c.get(term, 0) for c in count_dicts) / total_tokens
            s += phi[term] * c_seed * math.log(1.0 + (1.0 - lam) / lam * cand[term] / (length * p_c))
        scores[doc_id] = s
    return scores


def ref_qlm_scores(seed_counts, candidates, lam):
    """Same transcription with every term weight pinned to one."""
    count_dicts = list(candidates.values())
    total_tokens = sum(sum(c.values()) for c in count_dicts)
    scores = {}
    for doc_id, cand in candidates.items():
        length = sum(cand.values())
        s = 0.0
        for term, c_seed in seed_counts.items():
            if term not in cand:
                continue
            p_c = sum(c.get(term, 0) for c in count_dicts) / total_tokens
            s += c_seed * math.log(1.0 + (1.0 - lam) / lam * cand[term] / (length * p_c))
        scores[doc_id] = s
    return scores
