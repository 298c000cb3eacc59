"""Gazetteer tagging and lexicon parsing."""

import random
import re

import pytest

from layerlab.errors import LexiconParseError
from layerlab.predictors.gazetteer import GazetteerTagger, LexiconEntry, parse_lexicon


def tagger(*pairs, **kw):
    return GazetteerTagger([LexiconEntry(s, l, **kw) for s, l in pairs])


class TestLexiconParsing:
    def test_basic_tsv(self):
        entries = parse_lexicon("ZSM-5\tMATERIAL\nzeolite\tMATERIAL\n")
        assert len(entries) == 2
        assert entries[0] == LexiconEntry("ZSM-5", "MATERIAL")

    def test_comments_and_blanks(self):
        entries = parse_lexicon("# header\n\niron\tMATERIAL\n")
        assert len(entries) == 1

    def test_flags(self):
        entries = parse_lexicon("Fe[0-9]+\tMATERIAL\tregex\npH\tQUANTITY\tcase_sensitive\n")
        assert entries[0].is_pattern and not entries[0].case_sensitive
        assert entries[1].case_sensitive and not entries[1].is_pattern

    def test_error_carries_line_number(self):
        with pytest.raises(LexiconParseError) as err:
            parse_lexicon("good\tLABEL\nbadline\n")
        assert "line 2" in str(err.value)

    def test_bad_regex_rejected(self):
        with pytest.raises(LexiconParseError):
            parse_lexicon("([bad\tLABEL\tregex\n")

    def test_unknown_flag_rejected(self):
        with pytest.raises(LexiconParseError):
            parse_lexicon("x\tY\tshiny\n")


class TestTagging:
    def test_spec_example_offsets(self):
        t = tagger(("ZSM-5", "MATERIAL"), ("zeolite", "MATERIAL"))
        [tags] = t.tag_batch(["ZSM-5 is a zeolite."])
        assert [(x.start, x.end, x.label) for x in tags] == [
            (0, 5, "MATERIAL"), (11, 18, "MATERIAL")
        ]

    def test_word_boundary(self):
        t = tagger(("iron", "MATERIAL"))
        assert t.tag_batch(["environment"]) == [[]]
        [tags] = t.tag_batch(["an iron rod"])
        assert [(x.start, x.end) for x in tags] == [(3, 7)]

    def test_longest_match_wins(self):
        t = tagger(("iron", "MATERIAL"), ("iron oxide", "MATERIAL"))
        [tags] = t.tag_batch(["iron oxide"])
        assert [(x.start, x.end) for x in tags] == [(0, 10)]

    def test_case_insensitive_by_default(self):
        t = tagger(("zeolite", "MATERIAL"))
        [tags] = t.tag_batch(["Zeolite synthesis"])
        assert [(x.start, x.end) for x in tags] == [(0, 7)]

    def test_case_sensitive_flag(self):
        t = tagger(("pH", "QUANTITY"), case_sensitive=True)
        assert t.tag_batch(["PH value"]) == [[]]
        [tags] = t.tag_batch(["pH value"])
        assert len(tags) == 1

    def test_regex_entry(self):
        t = GazetteerTagger([LexiconEntry(r"Fe\d+", "MATERIAL", is_pattern=True)])
        [tags] = t.tag_batch(["uses Fe3 oxide"])
        assert [(x.start, x.end) for x in tags] == [(5, 8)]

    def test_non_overlapping_left_to_right(self):
        t = tagger(("x y", "X"), ("y z", "X"))
        [tags] = t.tag_batch(["x y z"])
        assert [(x.start, x.end) for x in tags] == [(0, 3)]

    def test_scores_default_one(self):
        t = tagger(("x1", "L"))
        [tags] = t.tag_batch(["x1"])
        assert tags[0].score == 1.0

    def test_batch_shape(self):
        t = tagger(("a1", "L"))
        out = t.tag_batch(["a1 here", "nothing", "a1 a1"])
        assert [len(x) for x in out] == [1, 0, 2]


def brute_force_tags(entries, text):
    """Oracle: all candidate matches, then greedy (start, longest) sweep."""
    candidates = []
    for entry in entries:
        flags = 0 if entry.case_sensitive else re.IGNORECASE
        pattern = (
            entry.surface if entry.is_pattern
            else r"(?<!\w)" + re.escape(entry.surface) + r"(?!\w)"
        )
        for i in range(len(text)):
            m = re.compile(pattern, flags).match(text, i)
            if m and m.end() > m.start():
                candidates.append((m.start(), m.end(), entry))
    candidates.sort(key=lambda c: (c[0], -(c[1] - c[0])))
    chosen, last = [], 0
    for start, end, entry in candidates:
        if start >= last:
            chosen.append((start, end, entry))
            last = end
    return chosen


def test_randomized_against_brute_force():
    rng = random.Random(5)
    vocab = ["iron", "iron oxide", "ZSM-5", "zeolite", "acid", "pH", "silica gel"]
    fillers = ["the", "was", "heated", "with", "sample", "at", "ratio", "ironic"]
    for _ in range(150):
        surfaces = rng.sample(vocab, rng.randrange(2, 5))
        entries = [LexiconEntry(s, "M") for s in surfaces]
        t = GazetteerTagger(entries)
        words = [rng.choice(vocab + fillers) for _ in range(rng.randrange(3, 12))]
        text = " ".join(words)
        [tags] = t.tag_batch([text])
        expected = brute_force_tags(entries, text)
        assert [(x.start, x.end) for x in tags] == [(s, e) for s, e, _ in expected]
        # every tagged surface equals a lexicon entry, case-folded
        lowered = {s.lower() for s in surfaces}
        for x in tags:
            assert text[x.start:x.end].lower() in lowered
