/** Inline highlight segmentation for tagged spans over entity text.
 *
 * Boundary-event approach: the text is cut at every span start/end, and each
 * piece knows the spans covering it (ordered outermost first), so overlapping
 * and nested tags render as stacked marks.
 */

export interface TagSpan {
  start: number;
  end: number;
  label: string;
  score: number;
}

export interface Segment {
  text: string;
  start: number;
  end: number;
  /** covering tags, outermost (earliest start, longest) first */
  covering: TagSpan[];
}

export function buildSegments(text: string, tags: TagSpan[]): Segment[] {
  const bounds = new Set<number>([0, text.length]);
  for (const tag of tags) {
    if (tag.start < 0 || tag.end > text.length || tag.start >= tag.end) continue;
    bounds.add(tag.start);
    bounds.add(tag.end);
  }
  const sorted = [...bounds].sort((a, b) => a - b);
  const ordered = [...tags].sort(
    (a, b) => a.start - b.start || b.end - a.end || a.label.localeCompare(b.label),
  );
  const segments: Segment[] = [];
  for (let i = 0; i < sorted.length - 1; i++) {
    const start = sorted[i];
    const end = sorted[i + 1];
    if (start === end) continue;
    const covering = ordered.filter((t) => t.start <= start && end <= t.end);
    segments.push({ text: text.slice(start, end), start, end, covering });
  }
  return segments;
}

/** Positions (local offsets) of sentence boundaries inside an entity's text:
 * one marker between each adjacent pair of sentences. */
export function sentenceBoundaries(
  entityStart: number,
  entityEnd: number,
  sentenceSpans: [number, number][],
): number[] {
  const inside = sentenceSpans
    .filter(([s, e]) => s >= entityStart && e <= entityEnd)
    .sort((a, b) => a[0] - b[0]);
  const marks: number[] = [];
  for (let i = 1; i < inside.length; i++) {
    marks.push(inside[i][0] - entityStart);
  }
  return marks;
}
