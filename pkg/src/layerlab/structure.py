"""Client for an external PDF section-structure service (TEI-like XML)."""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import requests

STRUCTURE_TIMEOUT_S = 30


@dataclass
class ExternalSection:
    name: str
    order: int


def _normalize_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def fetch_external_structure(pdf: bytes, service_url: str) -> list[ExternalSection]:
    """POST the PDF and parse <div><head>...</head></div> section headings.

    Raises requests exceptions on transport failure and ValueError on an
    unparseable response body.
    """
    response = requests.post(
        service_url,
        files={"input": ("document.pdf", pdf, "application/pdf")},
        timeout=STRUCTURE_TIMEOUT_S,
    )
    response.raise_for_status()
    try:
        root = ET.fromstring(response.content)
    except ET.ParseError as exc:
        raise ValueError(f"unparseable structure response: {exc}") from exc
    sections: list[ExternalSection] = []
    for elem in root.iter():
        if _localname(elem.tag) != "div":
            continue
        for child in elem:
            if _localname(child.tag) == "head":
                name = _normalize_ws("".join(child.itertext()))
                if name:
                    sections.append(ExternalSection(name, len(sections)))
                break
    return sections


def _longest_common_substring(a: str, b: str) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    best = 0
    for i in range(1, len(a) + 1):
        cur = [0] * (len(b) + 1)
        for j in range(1, len(b) + 1):
            if a[i - 1] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best


def match_heading(service_name: str, candidates: list[str]) -> int | None:
    """Best candidate index for a service heading: exact match after
    whitespace normalization, else longest-common-substring covering >= 90%
    of the service heading. None when nothing qualifies."""
    target = _normalize_ws(service_name)
    normed = [_normalize_ws(c) for c in candidates]
    for idx, cand in enumerate(normed):
        if cand == target:
            return idx
    best_idx, best_len = None, 0
    for idx, cand in enumerate(normed):
        lcs = _longest_common_substring(target, cand)
        if lcs > best_len:
            best_idx, best_len = idx, lcs
    if best_idx is not None and best_len >= 0.9 * len(target):
        return best_idx
    return None


def apply_external_structure(pdf, service_url, blocks, sections, warnings) -> None:
    """Rename heuristic sections in place from the structure service.

    Service names win for matched headings; unmatched service headings are
    dropped with a warning; transport failure falls back to the heuristic
    sectioning and records "structure_service_fallback".
    """
    from layerlab.pipeline import BlockClass, clean_heading

    try:
        external = fetch_external_structure(pdf, service_url)
    except (requests.RequestException, ValueError):
        warnings.append("structure_service_fallback")
        return
    candidates = []
    owners = []
    for section in sections:
        block = blocks[section.block_range[0]]
        if block.block_class is BlockClass.HEADING:
            candidates.append(block.lines[0].text)
            owners.append(section)
    claimed: set[int] = set()
    for ext in external:
        idx = match_heading(ext.name, candidates)
        if idx is None or idx in claimed:
            warnings.append(f"structure_heading_unmatched:{ext.name}")
            continue
        claimed.add(idx)
        cleaned = clean_heading(ext.name)
        if cleaned:
            owners[idx].name = cleaned
