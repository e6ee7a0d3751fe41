import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from winqe.corpus import Document
from winqe.tokenizers import SidecarTokenizer, get_tokenizer
from winqe.windowing import (
    Chunk,
    PartialPolicy,
    TokenWindowConfig,
    WindowConfig,
    WindowingError,
    count_tokens,
    extract_chunks,
    extract_chunks_token_budget,
    full_window_count,
)


def make_doc(d, doc_id="doc0"):
    return Document(doc_id, tuple(f"s{i}" for i in range(d)))


def identity_hyp(doc):
    return tuple(f"h{i}" for i in range(doc.length))


def brute_force_spans(d, w, s, policy):
    """Independent enumeration of (start, length, is_partial) spans."""
    spans = []
    start = 0
    while start + w <= d:
        spans.append((start, w, False))
        start += s
    if policy is PartialPolicy.INCLUDE:
        if not spans:
            spans.append((0, d, True))
        else:
            last_end = spans[-1][0] + w
            if last_end < d:
                spans.append((last_end, d - last_end, True))
    return spans


def extract(d, w, s, policy=PartialPolicy.DROP):
    doc = make_doc(d)
    return extract_chunks(doc, identity_hyp(doc), WindowConfig(w, s, policy))


class TestExtractChunks:
    def test_drop_d7_w4_s2(self):
        chunks = extract(7, 4, 2)
        assert [(c.start, c.n_sentences) for c in chunks] == [(0, 4), (2, 4)]
        covered = {i for c in chunks for i in range(c.start, c.start + c.n_sentences)}
        assert 6 not in covered

    def test_short_document(self):
        assert extract(3, 4, 2) == []
        included = extract(3, 4, 2, PartialPolicy.INCLUDE)
        assert len(included) == 1
        assert included[0].n_sentences == 3
        assert included[0].is_partial

    def test_include_tail(self):
        chunks = extract(7, 4, 2, PartialPolicy.INCLUDE)
        assert [(c.start, c.n_sentences, c.is_partial) for c in chunks] == [
            (0, 4, False),
            (2, 4, False),
            (6, 1, True),
        ]

    def test_sentence_level_degenerate(self):
        for policy in PartialPolicy:
            chunks = extract(6, 1, 1, policy)
            assert len(chunks) == 6
            assert all(c.n_sentences == 1 and not c.is_partial for c in chunks)
            assert [c.src_text for c in chunks] == [f"s{i}" for i in range(6)]

    def test_space_join_preserves_empty_sentences(self):
        doc = Document("d", ("a", "", "b"))
        chunks = extract_chunks(doc, ("x", "", "y"), WindowConfig(3, 3))
        assert chunks[0].src_text == "a  b"
        assert chunks[0].hyp_text == "x  y"

    def test_misaligned_hyp_rejected(self):
        doc = make_doc(3)
        with pytest.raises(WindowingError):
            extract_chunks(doc, ("h0",), WindowConfig(2, 1))

    def test_invalid_config_rejected(self):
        with pytest.raises(WindowingError):
            WindowConfig(2, 3)
        with pytest.raises(WindowingError):
            WindowConfig(2, 0)

    @given(
        d=st.integers(1, 40),
        w=st.integers(1, 12),
        data=st.data(),
        policy=st.sampled_from(list(PartialPolicy)),
    )
    @settings(max_examples=300)
    def test_matches_brute_force(self, d, w, data, policy):
        s = data.draw(st.integers(1, w))
        chunks = extract(d, w, s, policy)
        assert [
            (c.start, c.n_sentences, c.is_partial) for c in chunks
        ] == brute_force_spans(d, w, s, policy)

    @given(d=st.integers(1, 60), w=st.integers(1, 15), data=st.data())
    def test_count_formula(self, d, w, data):
        s = data.draw(st.integers(1, w))
        full = [c for c in extract(d, w, s, PartialPolicy.INCLUDE) if not c.is_partial]
        assert len(full) == max(0, (d - w) // s + 1) == full_window_count(d, w, s)

    @given(d=st.integers(1, 40), w=st.integers(1, 10), data=st.data())
    def test_coverage_under_include(self, d, w, data):
        s = data.draw(st.integers(1, w))
        chunks = extract(d, w, s, PartialPolicy.INCLUDE)
        covered = {i for c in chunks for i in range(c.start, c.start + c.n_sentences)}
        assert covered == set(range(d))

    @given(d=st.integers(1, 40), w=st.integers(1, 10))
    def test_disjoint_partition_when_s_equals_w(self, d, w):
        chunks = extract(d, w, w, PartialPolicy.INCLUDE)
        indices = [
            i for c in chunks for i in range(c.start, c.start + c.n_sentences)
        ]
        assert sorted(indices) == list(range(d))
        assert len(indices) == len(set(indices))

    @given(d=st.integers(1, 40), w=st.integers(1, 10), data=st.data())
    def test_overlap_bound(self, d, w, data):
        s = data.draw(st.integers(1, w))
        chunks = extract(d, w, s, PartialPolicy.INCLUDE)
        hits = {}
        for c in chunks:
            for i in range(c.start, c.start + c.n_sentences):
                hits[i] = hits.get(i, 0) + 1
        assert max(hits.values()) <= math.ceil(w / s)

    def test_determinism(self):
        doc = make_doc(13)
        cfg = WindowConfig(5, 2, PartialPolicy.INCLUDE)
        a = extract_chunks(doc, identity_hyp(doc), cfg)
        b = extract_chunks(doc, identity_hyp(doc), cfg)
        assert a == b


def sidecar_for(doc_id, pair_counts):
    return SidecarTokenizer(
        {(doc_id, i): (n, 0) for i, n in enumerate(pair_counts)}
    )


def greedy_oracle(pair_counts, w_t, s):
    """Prefix-sum greedy fill, independent of the implementation."""
    d = len(pair_counts)
    spans = []
    i = 0
    while i < d:
        total = 0
        j = i
        while j < d and total + pair_counts[j] <= w_t:
            total += pair_counts[j]
            j += 1
        if j == i:
            spans.append((i, 1, True))
        else:
            spans.append((i, j - i, False))
        i += s
    return spans


class TestTokenBudget:
    def test_greedy_fill(self):
        doc = make_doc(4, "D")
        tok = sidecar_for("D", [100, 100, 100, 100])
        cfg = TokenWindowConfig(w_t=250, s=2, tokenizer_id="sidecar")
        chunks = extract_chunks_token_budget(doc, identity_hyp(doc), cfg, tok)
        assert [(c.start, c.n_sentences) for c in chunks] == [(0, 2), (2, 2)]

    def test_overlength_singleton_flagged(self):
        doc = make_doc(1, "D")
        tok = sidecar_for("D", [300])
        cfg = TokenWindowConfig(w_t=250, s=1)
        chunks = extract_chunks_token_budget(doc, identity_hyp(doc), cfg, tok)
        assert [(c.start, c.n_sentences, c.is_partial) for c in chunks] == [(0, 1, True)]

    def test_budget_never_binds(self):
        doc = make_doc(5, "D")
        tok = sidecar_for("D", [10] * 5)
        cfg = TokenWindowConfig(w_t=10_000, s=5)
        chunks = extract_chunks_token_budget(doc, identity_hyp(doc), cfg, tok)
        assert [(c.start, c.n_sentences) for c in chunks] == [(0, 5)]

    @given(
        counts=st.lists(st.integers(1, 400), min_size=1, max_size=25),
        w_t=st.integers(1, 600),
        s=st.integers(1, 6),
    )
    @settings(max_examples=300)
    def test_matches_greedy_oracle(self, counts, w_t, s):
        doc = make_doc(len(counts), "D")
        tok = sidecar_for("D", counts)
        cfg = TokenWindowConfig(w_t=w_t, s=s)
        chunks = extract_chunks_token_budget(doc, identity_hyp(doc), cfg, tok)
        assert [
            (c.start, c.n_sentences, c.is_partial) for c in chunks
        ] == greedy_oracle(counts, w_t, s)

    def test_invalid_budget_rejected(self):
        with pytest.raises(WindowingError):
            TokenWindowConfig(w_t=0, s=1)


class TestCountTokens:
    def test_whitespace(self):
        tok = get_tokenizer("whitespace")
        chunk = Chunk("d", 0, 1, "a b", "c", False)
        assert count_tokens(chunk, tok) == 3

    def test_empty(self):
        tok = get_tokenizer("whitespace")
        assert count_tokens(Chunk("d", 0, 1, "", "", False), tok) == 0

    def test_chars(self):
        tok = get_tokenizer("chars")
        assert count_tokens(Chunk("d", 0, 1, "abc", "de", False), tok) == 5

    def test_512_boundary_is_not_overlength(self):
        # overlength means strictly more than the limit
        tok = get_tokenizer("whitespace")
        exactly = Chunk("d", 0, 1, " ".join(["t"] * 256), " ".join(["t"] * 256), False)
        over = Chunk("d", 0, 1, " ".join(["t"] * 256), " ".join(["t"] * 257), False)
        assert count_tokens(exactly, tok) == 512
        assert not count_tokens(exactly, tok) > 512
        assert count_tokens(over, tok) > 512
