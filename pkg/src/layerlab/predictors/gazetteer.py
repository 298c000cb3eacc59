"""Lexicon-driven span tagger.

Matches are longest-first, left to right, non-overlapping. Literal entries
are word-boundary anchored; regex entries match as written.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from layerlab.errors import LexiconParseError
from layerlab.predictors.base import TaggedSpan, TokenClassificationPredictor

_VALID_FLAGS = {"regex", "case_sensitive"}


@dataclass(frozen=True)
class LexiconEntry:
    surface: str
    label: str
    is_pattern: bool = False
    case_sensitive: bool = False


def parse_lexicon(text: str) -> list[LexiconEntry]:
    """Parse TSV lines: surface<TAB>label[<TAB>flags]; '#' starts a comment."""
    entries: list[LexiconEntry] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2 or not parts[0] or not parts[1]:
            raise LexiconParseError(
                f"line {lineno}: expected surface<TAB>label, got {raw!r}", line=lineno
            )
        flags = set()
        if len(parts) > 2 and parts[2]:
            flags = {f.strip() for f in parts[2].split(",") if f.strip()}
            unknown = flags - _VALID_FLAGS
            if unknown:
                raise LexiconParseError(
                    f"line {lineno}: unknown flags {sorted(unknown)}", line=lineno
                )
        entry = LexiconEntry(
            surface=parts[0],
            label=parts[1],
            is_pattern="regex" in flags,
            case_sensitive="case_sensitive" in flags,
        )
        if entry.is_pattern:
            try:
                re.compile(entry.surface)
            except re.error as exc:
                raise LexiconParseError(
                    f"line {lineno}: bad pattern: {exc}", line=lineno
                ) from exc
        entries.append(entry)
    return entries


def load_lexicon(path: str | Path) -> list[LexiconEntry]:
    return parse_lexicon(Path(path).read_text(encoding="utf-8"))


class GazetteerTagger(TokenClassificationPredictor):
    name = "gazetteer"

    def __init__(self, entries: list[LexiconEntry]):
        self.entries = entries
        self._patterns: list[tuple[re.Pattern, str]] = []
        for entry in entries:
            flags = 0 if entry.case_sensitive else re.IGNORECASE
            if entry.is_pattern:
                pattern = re.compile(entry.surface, flags)
            else:
                # lookarounds instead of \b so surfaces ending in non-word
                # characters still anchor correctly
                pattern = re.compile(
                    r"(?<!\w)" + re.escape(entry.surface) + r"(?!\w)", flags
                )
            self._patterns.append((pattern, entry.label))

    def tag_batch(self, texts: list[str]) -> list[list[TaggedSpan]]:
        return [self._tag(text) for text in texts]

    def _tag(self, text: str) -> list[TaggedSpan]:
        candidates: list[tuple[int, int, str]] = []
        for pattern, label in self._patterns:
            for m in pattern.finditer(text):
                if m.end() > m.start():
                    candidates.append((m.start(), -(m.end() - m.start()), label))
        candidates.sort()
        tags: list[TaggedSpan] = []
        last_end = 0
        for start, neg_len, label in candidates:
            end = start - neg_len
            if start >= last_end:
                tags.append(TaggedSpan(start, end, label, 1.0))
                last_end = end
        return tags
