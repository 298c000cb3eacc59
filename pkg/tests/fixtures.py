"""Programmatic fixture PDFs with exact ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from io import BytesIO

from reportlab.lib.pagesizes import letter
from reportlab.pdfbase.pdfmetrics import stringWidth
from reportlab.pdfgen import canvas

PAGE_W, PAGE_H = letter  # 612 x 792
FONT = "Helvetica"
SIZE = 12
LEADING = 18  # baseline-to-baseline inside a block
BLOCK_GAP = 40  # baseline gap between blocks (edge gap ~29pt > merge threshold)
MARGIN_X = 72


def _words_of(text: str, x: float, y: float) -> list[tuple[str, float, float]]:
    """(word, x_start, y_baseline) positions for a string drawn at (x, y)."""
    out = []
    cursor = x
    for token in text.split(" "):
        if token:
            out.append((token, cursor, y))
        cursor += stringWidth(token + " ", FONT, SIZE)
    return out


@dataclass
class FixtureTruth:
    """Everything the fixture planted, for exact assertions."""

    section_names: list[str] = field(default_factory=list)
    paragraph_texts: list[str] = field(default_factory=list)
    paragraph_sections: list[str] = field(default_factory=list)
    sentence_counts: list[int] = field(default_factory=list)
    table_grid: list[list[str]] = field(default_factory=list)
    table_record: dict[str, list[str]] = field(default_factory=dict)
    # (term, label, section) planted for the gazetteer, paragraphs only
    planted_terms: list[tuple[str, str, str]] = field(default_factory=list)
    block_classes: list[str] = field(default_factory=list)
    words: list[tuple[str, float, float]] = field(default_factory=list)


def _canvas(buf: BytesIO) -> canvas.Canvas:
    c = canvas.Canvas(buf, pagesize=letter, invariant=1)
    c.setFont(FONT, SIZE)
    return c


def simple_pdf(lines: list[str], x: float = MARGIN_X, y_start: float = 720,
               leading: float = LEADING) -> bytes:
    buf = BytesIO()
    c = _canvas(buf)
    y = y_start
    for line in lines:
        c.drawString(x, y, line)
        y -= leading
    c.showPage()
    c.save()
    return buf.getvalue()


def empty_page_pdf() -> bytes:
    buf = BytesIO()
    c = _canvas(buf)
    c.showPage()
    c.save()
    return buf.getvalue()


def two_column_pdf() -> tuple[bytes, list[str], list[str]]:
    """Left column fully left of x=0.41, right column right of x=0.55."""
    buf = BytesIO()
    c = _canvas(buf)
    left_lines = ["alpha one", "alpha two", "alpha three"]
    right_lines = ["beta one", "beta two", "beta three"]
    y = 720
    for line in left_lines:
        c.drawString(72, y, line)
        y -= LEADING
    y = 720
    for line in right_lines:
        c.drawString(350, y, line)
        y -= LEADING
    c.showPage()
    c.save()
    return buf.getvalue(), left_lines, right_lines


TABLE_COLUMN_X = (MARGIN_X, 230.0, 390.0)
TABLE_GRID = [
    ["Material", "Temp", "Time"],
    ["ZSM-5", "450", "24"],
    ["Y", "500", "12"],
    ["Beta", "425", "36"],
]


def paper_fixture() -> tuple[bytes, FixtureTruth]:
    """Two sections + front matter, three paragraphs, one aligned table.

    Layout uses 18pt leading inside blocks and 40pt+ baseline gaps between
    blocks so the geometric thresholds resolve blocks unambiguously.
    """
    truth = FixtureTruth()
    buf = BytesIO()
    c = _canvas(buf)

    def block(lines: list[str], y: float, cls: str) -> float:
        for line in lines:
            for word in _words_of(line, MARGIN_X, y):
                truth.words.append(word)
            c.drawString(MARGIN_X, y, line)
            y -= LEADING
        truth.block_classes.append(cls)
        return y - (BLOCK_GAP - LEADING)

    y = 720.0
    front = ["This report surveys zeolite synthesis.", "Parameters vary widely."]
    y = block(front, y, "paragraph")
    y = block(["1. Introduction"], y, "heading")
    intro = ["We study crystallization of porous frameworks.",
             "Results guide reactor design."]
    y = block(intro, y, "paragraph")
    y = block(["2. Methods"], y, "heading")
    methods = ["Samples of ZSM-5 were prepared at 450 K. The",
               "zeolite ratio was 3.5 wt. % overall."]
    y = block(methods, y, "paragraph")
    y = block(["Table 1: Synthesis parameters"], y, "caption")

    for row in TABLE_GRID:
        for cell, x in zip(row, TABLE_COLUMN_X):
            truth.words.extend(_words_of(cell, x, y))
            c.drawString(x, y, cell)
        y -= LEADING
    truth.block_classes.append("table_candidate")

    c.showPage()
    c.save()

    truth.section_names = ["front_matter", "Introduction", "Methods"]
    truth.paragraph_texts = ["\n".join(front), "\n".join(intro), "\n".join(methods)]
    truth.paragraph_sections = ["front_matter", "Introduction", "Methods"]
    truth.sentence_counts = [2, 2, 2]
    truth.table_grid = [list(r) for r in TABLE_GRID]
    truth.table_record = {
        "Material": ["ZSM-5", "Y", "Beta"],
        "Temp": ["450", "500", "425"],
        "Time": ["24", "12", "36"],
    }
    truth.planted_terms = [
        ("zeolite", "MATERIAL", "front_matter"),
        ("ZSM-5", "MATERIAL", "Methods"),
        ("zeolite", "MATERIAL", "Methods"),
    ]
    return buf.getvalue(), truth


GAZETTEER_TSV = "ZSM-5\tMATERIAL\nzeolite\tMATERIAL\nzeolite framework\tMATERIAL\n"
