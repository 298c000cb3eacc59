"""Staged PDF-to-Document processing: lines, blocks, sections, sentences.

Layout analysis is explicit geometry rather than a model: thresholds are
configurable and every stage is a pure function, so identical input bytes
and config always produce the identical document.
"""

from __future__ import annotations

import hashlib
import json
import re
import statistics
from dataclasses import dataclass, field
from enum import Enum

from layerlab.docmodel import Box, Document, Entity, Span
from layerlab.pdf.extract import ExtractionResult, Word, extract_words

DEFAULT_ABBREVIATIONS = (
    "Fig", "Eq", "et al", "e.g", "i.e", "vs", "Dr", "No", "Ref", "Tab",
    "approx", "ca", "wt", "at",
)

_SECTION_LEXICON = {
    "abstract", "introduction", "methods", "results", "discussion",
    "conclusion", "references", "acknowledgements", "appendix", "related work",
}

_NUMBERED_HEADING_RE = re.compile(r"^\d+(\.\d+)*\.?\s+\S")
_CAPTION_RE = re.compile(r"^(Figure|Fig\.|Table)\s+\d+")
_HEADING_NUMBER_PREFIX_RE = re.compile(r"^\d+(\.\d+)*\.?\s+")

# two-column detection: gutter width and coverage thresholds
_GUTTER_WIDTH = 0.04
_GUTTER_COVERAGE = 0.60
_GUTTER_CENTER_RANGE = (0.45, 0.55)


class BlockClass(str, Enum):
    PARAGRAPH = "paragraph"
    HEADING = "heading"
    TABLE_CANDIDATE = "table_candidate"
    CAPTION = "caption"
    OTHER = "other"


@dataclass
class PipelineConfig:
    line_gap_factor: float = 1.5
    block_gap_factor: float = 1.8
    min_table_aligned_columns: int = 3
    abbreviation_list: tuple[str, ...] = DEFAULT_ABBREVIATIONS
    structure_service_url: str | None = None
    render_dpi: int = 150

    def __post_init__(self):
        if self.line_gap_factor <= 0 or self.block_gap_factor <= 0:
            raise ValueError("gap factors must be positive")
        if not (72 <= self.render_dpi <= 600):
            raise ValueError("render_dpi must be in [72, 600]")
        self.abbreviation_list = tuple(self.abbreviation_list)

    @classmethod
    def from_mapping(cls, mapping: dict | None) -> "PipelineConfig":
        mapping = dict(mapping or {})
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(mapping) - known
        if unknown:
            raise ValueError(f"unknown pipeline config fields: {sorted(unknown)}")
        return cls(**mapping)

    def to_mapping(self) -> dict:
        return {
            "line_gap_factor": self.line_gap_factor,
            "block_gap_factor": self.block_gap_factor,
            "min_table_aligned_columns": self.min_table_aligned_columns,
            "abbreviation_list": sorted(self.abbreviation_list),
            "structure_service_url": self.structure_service_url,
            "render_dpi": self.render_dpi,
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.to_mapping(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


@dataclass
class Line:
    words: list[Word]
    column: int = 0

    @property
    def box(self) -> Box:
        return Box.enclosing([w.box for w in self.words])

    @property
    def text(self) -> str:
        return " ".join(w.text for w in self.words)


@dataclass
class Block:
    lines: list[Line]
    column: int = 0
    block_class: BlockClass = BlockClass.PARAGRAPH
    span: Span | None = None

    @property
    def box(self) -> Box:
        return Box.enclosing([ln.box for ln in self.lines])

    @property
    def page(self) -> int:
        return self.lines[0].words[0].box.page

    @property
    def text(self) -> str:
        return "\n".join(ln.text for ln in self.lines)


def _median(values: list[float], default: float = 0.01) -> float:
    return statistics.median(values) if values else default


def detect_column_gutter(words: list[Word]) -> float | None:
    """Return the gutter center x if the page reads as two columns.

    A gutter is a vertical whitespace strip of width >= 0.04 centered in
    [0.45, 0.55]. A text row counts toward it only when the strip actually
    separates words (text on both sides, nothing inside); short ragged lines
    that never reach the strip are not evidence. The strip must separate
    >= 60% of the occupied text rows.
    """
    if not words:
        return None
    bins = 200
    rows: dict[int, list[tuple[float, float]]] = {}
    for w in words:
        lo = int(w.box.y * bins)
        hi = int((w.box.y + w.box.h) * bins)
        for row in range(lo, min(hi + 1, bins)):
            rows.setdefault(row, []).append((w.box.x, w.box.x + w.box.w))
    if not rows:
        return None
    lo_c, hi_c = _GUTTER_CENTER_RANGE
    best = None
    center = lo_c
    while center <= hi_c + 1e-9:
        strip = (center - _GUTTER_WIDTH / 2, center + _GUTTER_WIDTH / 2)
        split = 0
        for intervals in rows.values():
            clear = all(x1 <= strip[0] or x0 >= strip[1] for x0, x1 in intervals)
            has_left = any(x1 <= strip[0] for x0, x1 in intervals)
            has_right = any(x0 >= strip[1] for x0, x1 in intervals)
            if clear and has_left and has_right:
                split += 1
        frac = split / len(rows)
        if frac >= _GUTTER_COVERAGE and (best is None or frac > best[1]):
            best = (center, frac)
        center += 0.005
    return best[0] if best else None


def build_lines(words: list[Word], config: PipelineConfig) -> list[Line]:
    """Group one page's words into lines in reading order.

    Words join a line while their vertical centers differ by less than
    line_gap_factor x the median word height. On two-column pages all
    left-column lines precede right-column lines.
    """
    if not words:
        return []
    gutter = detect_column_gutter(words)
    if gutter is None:
        return _build_lines_one_column(words, config, column=0)
    left = [w for w in words if w.box.x + w.box.w / 2 < gutter]
    right = [w for w in words if w.box.x + w.box.w / 2 >= gutter]
    lines = _build_lines_one_column(left, config, column=0)
    lines += _build_lines_one_column(right, config, column=1)
    return lines


def _build_lines_one_column(words: list[Word], config: PipelineConfig, column: int) -> list[Line]:
    if not words:
        return []
    threshold = config.line_gap_factor * _median([w.box.h for w in words])
    ordered = sorted(words, key=lambda w: (w.box.y + w.box.h / 2, w.box.x))
    lines: list[list[Word]] = []
    centers: list[float] = []
    for word in ordered:
        yc = word.box.y + word.box.h / 2
        if lines and abs(yc - centers[-1]) < threshold:
            group = lines[-1]
            group.append(word)
            centers[-1] = sum(w.box.y + w.box.h / 2 for w in group) / len(group)
        else:
            lines.append([word])
            centers.append(yc)
    result = [Line(sorted(group, key=lambda w: w.box.x), column) for group in lines]
    result.sort(key=lambda ln: (ln.box.y, ln.box.x))
    return result


def detect_blocks(lines: list[Line], config: PipelineConfig) -> list[Block]:
    """Merge consecutive lines into blocks.

    Lines merge while the vertical edge gap stays below block_gap_factor x
    the median line height and horizontal overlap is at least 50% of the
    narrower of the two.
    """
    if not lines:
        return []
    threshold = config.block_gap_factor * _median([ln.box.h for ln in lines])
    blocks: list[Block] = []
    for line in lines:
        if blocks and blocks[-1].column == line.column:
            prev = blocks[-1].lines[-1].box
            cur = line.box
            gap = cur.y - (prev.y + prev.h)
            if gap < threshold and _h_overlap(prev, cur) >= 0.5:
                blocks[-1].lines.append(line)
                continue
        blocks.append(Block([line], column=line.column))
    return blocks


def _h_overlap(a: Box, b: Box) -> float:
    inter = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    if inter <= 0:
        return 0.0
    return inter / min(a.w, b.w)


def classify_block(block: Block, config: PipelineConfig) -> BlockClass:
    first_line = block.lines[0].text
    if _is_heading(first_line):
        return BlockClass.HEADING
    if _CAPTION_RE.match(block.text):
        return BlockClass.CAPTION
    if _aligned_column_count(block) >= config.min_table_aligned_columns:
        return BlockClass.TABLE_CANDIDATE
    return BlockClass.PARAGRAPH


def _is_heading(line_text: str) -> bool:
    if _NUMBERED_HEADING_RE.match(line_text):
        return True
    text = line_text.strip()
    if len(text) >= 60:
        return False
    if not (text.istitle() or text.isupper()):
        return False
    normalized = re.sub(r"[^a-z ]", "", text.lower()).strip()
    return normalized in _SECTION_LEXICON


def _aligned_column_count(block: Block) -> int:
    """Count word-start x positions (tolerance 0.01) shared by >= 3 lines."""
    if len(block.lines) < 3:
        return 0
    starts: list[tuple[float, int]] = []
    for i, line in enumerate(block.lines):
        for word in line.words:
            starts.append((word.box.x, i))
    starts.sort()
    columns = 0
    cluster_start = None
    cluster_lines: set[int] = set()
    for x, line_idx in starts:
        if cluster_start is None or x - cluster_start > 0.01:
            if len(cluster_lines) >= 3:
                columns += 1
            cluster_start = x
            cluster_lines = {line_idx}
        else:
            cluster_lines.add(line_idx)
    if len(cluster_lines) >= 3:
        columns += 1
    return columns


def compose_symbols(blocks_per_page: list[list[Block]]) -> tuple[str, list[Span]]:
    """Build the canonical symbols string and assign every word its span.

    Words within a line join with " ", lines within a block with "\\n",
    blocks with "\\n\\n", and pages (that have any text) with "\\n\\n".
    Also records each block's span on the Block.
    """
    parts: list[str] = []
    word_spans: list[Span] = []
    cursor = 0
    first_page_with_text = True
    for blocks in blocks_per_page:
        if not blocks:
            continue
        if not first_page_with_text:
            parts.append("\n\n")
            cursor += 2
        first_page_with_text = False
        for b_idx, block in enumerate(blocks):
            if b_idx > 0:
                parts.append("\n\n")
                cursor += 2
            block_start = cursor
            for l_idx, line in enumerate(block.lines):
                if l_idx > 0:
                    parts.append("\n")
                    cursor += 1
                for w_idx, word in enumerate(line.words):
                    if w_idx > 0:
                        parts.append(" ")
                        cursor += 1
                    parts.append(word.text)
                    word_spans.append(Span(cursor, cursor + len(word.text)))
                    cursor += len(word.text)
            block.span = Span(block_start, cursor)
    return "".join(parts), word_spans


def segment_sentences(text: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS) -> list[Span]:
    """Rule-based sentence spans (local to `text`), trimmed of whitespace.

    A boundary follows [.?!] + whitespace + an uppercase/digit-start token,
    unless the token before the period is a known abbreviation or the period
    sits inside a decimal number.
    """
    if not text.strip():
        return []
    breaks: list[int] = []
    for i, ch in enumerate(text):
        if ch not in ".?!":
            continue
        j = i + 1
        while j < len(text) and text[j].isspace():
            j += 1
        if j == i + 1 or j >= len(text):
            continue  # no whitespace after, or end of text
        nxt = text[j]
        if not (nxt.isupper() or nxt.isdigit()):
            continue
        if ch == "." and _in_decimal(text, i):
            continue
        if ch == "." and _ends_with_abbreviation(text, i, abbreviations):
            continue
        breaks.append(i + 1)
    spans: list[Span] = []
    start = 0
    for brk in breaks + [len(text)]:
        chunk = text[start:brk]
        lead = len(chunk) - len(chunk.lstrip())
        trail = len(chunk) - len(chunk.rstrip())
        if chunk.strip():
            spans.append(Span(start + lead, brk - trail))
        start = brk
    return spans


def _in_decimal(text: str, i: int) -> bool:
    return 0 < i < len(text) - 1 and text[i - 1].isdigit() and text[i + 1].isdigit()


def _ends_with_abbreviation(text: str, i: int, abbreviations: tuple[str, ...]) -> bool:
    head = text[:i]
    for abbr in abbreviations:
        if not head.endswith(abbr):
            continue
        before = i - len(abbr) - 1
        if before < 0 or not text[before].isalnum():
            return True
    return False


def clean_heading(text: str) -> str:
    cleaned = _HEADING_NUMBER_PREFIX_RE.sub("", text.replace("\n", " ")).strip()
    return cleaned.rstrip(":.").strip()


@dataclass
class SectionInfo:
    name: str
    order: int
    block_range: tuple[int, int]  # [start, end) indices into the block list


def assign_sections(blocks: list[Block]) -> list[SectionInfo]:
    """Partition the block sequence into sections delimited by headings."""
    heading_idx = [i for i, b in enumerate(blocks) if b.block_class is BlockClass.HEADING]
    sections: list[SectionInfo] = []
    order = 0
    if not heading_idx:
        if blocks:
            sections.append(SectionInfo("front_matter", 0, (0, len(blocks))))
        return sections
    if heading_idx[0] > 0:
        sections.append(SectionInfo("front_matter", 0, (0, heading_idx[0])))
        order = 1
    for pos, start in enumerate(heading_idx):
        end = heading_idx[pos + 1] if pos + 1 < len(heading_idx) else len(blocks)
        name = clean_heading(blocks[start].lines[0].text)
        if not name:
            name = f"unnamed_section_{order}"
        sections.append(SectionInfo(name, order, (start, end)))
        order += 1
    return sections


def _page_enclosing_boxes(boxes: list[Box]) -> list[Box]:
    by_page: dict[int, list[Box]] = {}
    for box in boxes:
        by_page.setdefault(box.page, []).append(box)
    return [Box.enclosing(group) for _, group in sorted(by_page.items())]


def _table_geometry(block: Block) -> dict:
    """Row/column geometry hints (page-normalized) for a detected table."""
    rows = [[ln.box.y, ln.box.h] for ln in block.lines]
    starts = sorted(
        {round(w.box.x, 4) for ln in block.lines for w in ln.words}
    )
    clusters: list[list[float]] = []
    for x in starts:
        if not clusters or x - clusters[-1][0] > 0.01:
            clusters.append([x])
        else:
            clusters[-1].append(x)
    columns = []
    cluster_mins = [c[0] for c in clusters]
    for idx, xmin in enumerate(cluster_mins):
        ends = [
            w.box.x + w.box.w
            for ln in block.lines
            for w in ln.words
            if abs(w.box.x - xmin) <= 0.011
        ]
        columns.append([xmin, max(ends) - xmin])
    return {"rows": rows, "columns": columns}


def run_core_pipeline(
    pdf: bytes,
    config: PipelineConfig | None = None,
    region_hints: list | None = None,
    source_filename: str = "",
    doc_id: str | None = None,
) -> Document:
    """Full staged processing of a PDF into a layered Document.

    Heuristic stages never fail; they degrade to empty layers with warnings
    recorded in document metadata.
    """
    config = config or PipelineConfig()
    extraction = extract_words(pdf)
    if doc_id is None:
        doc_id = hashlib.sha256(pdf).hexdigest()
    return build_document(
        extraction,
        config,
        region_hints=region_hints,
        source_filename=source_filename,
        doc_id=doc_id,
        pdf=pdf,
    )


def build_document(
    extraction: ExtractionResult,
    config: PipelineConfig,
    region_hints: list | None,
    source_filename: str,
    doc_id: str,
    pdf: bytes | None = None,
) -> Document:
    warnings = list(extraction.warnings)
    blocks_per_page: list[list[Block]] = []
    for page_words in extraction.words:
        lines = build_lines(page_words, config)
        page_blocks: list[Block] = []
        for column in sorted({ln.column for ln in lines}):
            page_blocks.extend(
                detect_blocks([ln for ln in lines if ln.column == column], config)
            )
        blocks_per_page.append(page_blocks)

    symbols, word_spans = compose_symbols(blocks_per_page)
    if not symbols:
        warnings.append("no_extractable_text")

    all_blocks = [b for page in blocks_per_page for b in page]
    for block in all_blocks:
        block.block_class = classify_block(block, config)

    sections = assign_sections(all_blocks)
    if config.structure_service_url and pdf is not None:
        from layerlab.structure import apply_external_structure

        apply_external_structure(
            pdf, config.structure_service_url, all_blocks, sections, warnings
        )

    section_of_block: dict[int, str] = {}
    for info in sections:
        for idx in range(*info.block_range):
            section_of_block[idx] = info.name

    metadata = {
        "source_filename": source_filename,
        "pipeline_config_hash": config.config_hash(),
        "warnings": warnings,
    }
    doc = Document(doc_id=doc_id, symbols=symbols, pages=list(extraction.pages), metadata=metadata)

    # pages layer: full-page boxes, plus the page's symbol range when it has text
    page_entities = []
    for page in extraction.pages:
        page_blocks = blocks_per_page[page.index]
        spans = []
        if page_blocks:
            spans = [Span(page_blocks[0].span.start, page_blocks[-1].span.end)]
        page_entities.append(
            Entity(page.index, spans=spans, boxes=[Box(page.index, 0.0, 0.0, 1.0, 1.0)])
        )
    doc = doc.add_layer("pages", page_entities)

    word_entities = []
    word_idx = 0
    line_entities = []
    block_entities = []
    for block_idx, block in enumerate(all_blocks):
        for line in block.lines:
            line_start = None
            for word in line.words:
                span = word_spans[word_idx]
                word_entities.append(
                    Entity(word_idx, spans=[span], boxes=[word.box])
                )
                if line_start is None:
                    line_start = span.start
                word_idx += 1
            line_entities.append(
                Entity(
                    len(line_entities),
                    spans=[Span(line_start, word_spans[word_idx - 1].end)],
                    boxes=[line.box],
                    metadata={"column": line.column},
                )
            )
        block_entities.append(
            Entity(
                block_idx,
                spans=[block.span],
                boxes=[block.box],
                metadata={
                    "block_class": block.block_class.value,
                    "section": section_of_block.get(block_idx, ""),
                },
            )
        )
    doc = doc.add_layer("words", word_entities)
    doc = doc.add_layer("lines", line_entities)
    doc = doc.add_layer("blocks", block_entities)

    section_entities = []
    for info in sections:
        covered = all_blocks[info.block_range[0]:info.block_range[1]]
        section_entities.append(
            Entity(
                info.order,
                spans=[Span(covered[0].span.start, covered[-1].span.end)],
                boxes=_page_enclosing_boxes([b.box for b in covered]),
                metadata={"name": info.name, "order": info.order},
            )
        )
    doc = doc.add_layer("sections", section_entities)

    paragraph_entities = []
    sentence_entities = []
    for block_idx, block in enumerate(all_blocks):
        if block.block_class is not BlockClass.PARAGRAPH:
            continue
        para_id = len(paragraph_entities)
        section = section_of_block.get(block_idx, "")
        paragraph_entities.append(
            Entity(
                para_id,
                spans=[block.span],
                boxes=[block.box],
                metadata={"section": section, "block_id": block_idx},
            )
        )
        text = symbols[block.span.start:block.span.end]
        for local in segment_sentences(text, config.abbreviation_list):
            span = Span(block.span.start + local.start, block.span.start + local.end)
            sentence_entities.append(
                Entity(
                    len(sentence_entities),
                    spans=[span],
                    boxes=_page_enclosing_boxes(
                        doc.span_to_boxes(span) or [block.box]
                    ),
                    metadata={"paragraph_id": para_id, "section": section},
                )
            )
    doc = doc.add_layer("paragraphs", paragraph_entities)
    doc = doc.add_layer("sentences", sentence_entities)

    caption_entities = []
    table_entities = []
    for block_idx, block in enumerate(all_blocks):
        section = section_of_block.get(block_idx, "")
        if block.block_class is BlockClass.CAPTION:
            caption_entities.append(
                Entity(
                    len(caption_entities),
                    spans=[block.span],
                    boxes=[block.box],
                    metadata={"section": section},
                )
            )
        elif block.block_class is BlockClass.TABLE_CANDIDATE:
            table_entities.append(
                Entity(
                    len(table_entities),
                    spans=[block.span],
                    boxes=[block.box],
                    metadata={
                        "section": section,
                        "source": "aligned_columns",
                        "geometry": _table_geometry(block),
                    },
                )
            )
    for hint in _parse_region_hints(region_hints, warnings):
        table_entities.append(
            Entity(len(table_entities), boxes=[hint[0]], metadata=hint[1])
        )
    doc = doc.add_layer("tables", table_entities)
    doc = doc.add_layer("captions", caption_entities)
    return doc


def _parse_region_hints(region_hints: list | None, warnings: list[str]) -> list[tuple[Box, dict]]:
    """Sidecar table regions: either [page,x,y,w,h] rows, or objects with a
    "box" plus optional "rows"/"columns" geometry."""
    out: list[tuple[Box, dict]] = []
    for hint in region_hints or []:
        try:
            if isinstance(hint, dict):
                page, x, y, w, h = hint["box"]
                metadata: dict = {"source": "region_hint", "section": ""}
                if "rows" in hint and "columns" in hint:
                    metadata["geometry"] = {
                        "rows": hint["rows"], "columns": hint["columns"],
                    }
            else:
                page, x, y, w, h = hint
                metadata = {"source": "region_hint", "section": ""}
            out.append((Box(int(page), float(x), float(y), float(w), float(h)), metadata))
        except (KeyError, TypeError, ValueError, IndexError):
            warnings.append("region_hint_invalid")
    return out
