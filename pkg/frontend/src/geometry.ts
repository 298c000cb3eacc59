/** Overlay and hit-testing math shared by the PDF panes. */

import type { BoxTuple, EntityJson } from "./types.js";

export interface DisplayRect {
  left: number;
  top: number;
  width: number;
  height: number;
}

/** Pixel rectangle for a normalized box on a page displayed at W x H. */
export function overlayRect(box: BoxTuple, pageW: number, pageH: number): DisplayRect {
  const [, x, y, w, h] = box;
  return { left: x * pageW, top: y * pageH, width: w * pageW, height: h * pageH };
}

export function boxContains(box: BoxTuple, x: number, y: number): boolean {
  const [, bx, by, bw, bh] = box;
  return bx <= x && x <= bx + bw && by <= y && y <= by + bh;
}

export function boxArea(box: BoxTuple): number {
  return box[3] * box[4];
}

/**
 * The entity whose box on `page` contains the point; ties go to the
 * smallest box area, then the lowest entity id. Mirrors the server rule.
 */
export function hitTest(
  entities: EntityJson[],
  page: number,
  x: number,
  y: number,
): EntityJson | null {
  let best: { area: number; id: number; entity: EntityJson } | null = null;
  for (const entity of entities) {
    for (const box of entity.boxes) {
      if (box[0] !== page || !boxContains(box, x, y)) continue;
      const area = boxArea(box);
      if (
        best === null ||
        area < best.area ||
        (area === best.area && entity.id < best.id)
      ) {
        best = { area, id: entity.id, entity };
      }
    }
  }
  return best ? best.entity : null;
}

/** Union of an entity's boxes on its first page (the crop region). */
export function enclosingBox(boxes: BoxTuple[]): BoxTuple | null {
  if (!boxes.length) return null;
  const page = boxes[0][0];
  const same = boxes.filter((b) => b[0] === page);
  const x0 = Math.min(...same.map((b) => b[1]));
  const y0 = Math.min(...same.map((b) => b[2]));
  const x1 = Math.max(...same.map((b) => b[1] + b[3]));
  const y1 = Math.max(...same.map((b) => b[2] + b[4]));
  return [page, x0, y0, x1 - x0, y1 - y0];
}

/** Normalized click position within an element, from a mouse event. */
export function relativePosition(
  rect: { left: number; top: number; width: number; height: number },
  clientX: number,
  clientY: number,
): { x: number; y: number } {
  return {
    x: (clientX - rect.left) / rect.width,
    y: (clientY - rect.top) / rect.height,
  };
}
