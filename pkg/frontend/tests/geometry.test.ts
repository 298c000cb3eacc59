import { describe, expect, it } from "vitest";

import {
  boxContains,
  enclosingBox,
  hitTest,
  overlayRect,
  relativePosition,
} from "../src/geometry.js";
import type { BoxTuple, EntityJson } from "../src/types.js";

function entity(id: number, boxes: BoxTuple[]): EntityJson {
  return { id, spans: [[0, 1]], boxes, metadata: {} };
}

describe("overlayRect", () => {
  it("scales normalized boxes to display pixels exactly", () => {
    const rect = overlayRect([0, 0.25, 0.5, 0.1, 0.05], 800, 1000);
    expect(rect).toEqual({ left: 200, top: 500, width: 80, height: 50 });
  });

  it("stays within 1px of x*W at arbitrary zoom levels", () => {
    const boxes: BoxTuple[] = [];
    let seed = 42;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2 ** 31;
      return seed / 2 ** 31;
    };
    for (let i = 0; i < 50; i++) {
      const x = rand() * 0.8;
      const y = rand() * 0.8;
      boxes.push([0, x, y, rand() * (1 - x), rand() * (1 - y)]);
    }
    for (const [pageW, pageH] of [[640, 828], [1280, 1656]] as const) {
      for (const box of boxes) {
        const rect = overlayRect(box, pageW, pageH);
        expect(Math.abs(rect.left - box[1] * pageW)).toBeLessThanOrEqual(1);
        expect(Math.abs(rect.top - box[2] * pageH)).toBeLessThanOrEqual(1);
        expect(Math.abs(rect.width - box[3] * pageW)).toBeLessThanOrEqual(1);
        expect(Math.abs(rect.height - box[4] * pageH)).toBeLessThanOrEqual(1);
      }
    }
  });
});

describe("boxContains", () => {
  it("includes edges", () => {
    const box: BoxTuple = [0, 0.1, 0.1, 0.2, 0.2];
    expect(boxContains(box, 0.1, 0.1)).toBe(true);
    expect(boxContains(box, 0.3, 0.3)).toBe(true);
    expect(boxContains(box, 0.31, 0.3)).toBe(false);
  });
});

describe("hitTest", () => {
  const entities = [
    entity(0, [[0, 0.0, 0.0, 1.0, 1.0]]),
    entity(1, [[0, 0.4, 0.4, 0.2, 0.2]]),
    entity(2, [[1, 0.0, 0.0, 0.5, 0.5]]),
  ];

  it("prefers the smallest containing box", () => {
    expect(hitTest(entities, 0, 0.5, 0.5)?.id).toBe(1);
  });

  it("falls back to the outer box elsewhere", () => {
    expect(hitTest(entities, 0, 0.05, 0.05)?.id).toBe(0);
  });

  it("respects the page", () => {
    expect(hitTest(entities, 1, 0.25, 0.25)?.id).toBe(2);
    expect(hitTest(entities, 1, 0.9, 0.9)).toBeNull();
  });

  it("breaks area ties by lower id", () => {
    const tied = [
      entity(5, [[0, 0.0, 0.0, 0.5, 0.5]]),
      entity(3, [[0, 0.25, 0.25, 0.5, 0.5]]),
    ];
    expect(hitTest(tied, 0, 0.3, 0.3)?.id).toBe(3);
  });

  it("agrees with a brute-force scan on random clicks", () => {
    let seed = 7;
    const rand = () => {
      seed = (seed * 1103515245 + 12345) % 2 ** 31;
      return seed / 2 ** 31;
    };
    const items: EntityJson[] = [];
    for (let i = 0; i < 30; i++) {
      const x = rand() * 0.7;
      const y = rand() * 0.7;
      items.push(entity(i, [[0, x, y, 0.01 + rand() * 0.25, 0.01 + rand() * 0.25]]));
    }
    for (let k = 0; k < 500; k++) {
      const px = rand();
      const py = rand();
      const got = hitTest(items, 0, px, py);
      let best: { area: number; id: number } | null = null;
      for (const e of items) {
        for (const b of e.boxes) {
          if (!boxContains(b, px, py)) continue;
          const area = b[3] * b[4];
          if (!best || area < best.area || (area === best.area && e.id < best.id)) {
            best = { area, id: e.id };
          }
        }
      }
      expect(got?.id ?? null).toBe(best?.id ?? null);
    }
  });
});

describe("enclosingBox", () => {
  it("unions boxes on the first page only", () => {
    const union = enclosingBox([
      [0, 0.1, 0.2, 0.1, 0.1],
      [0, 0.3, 0.25, 0.2, 0.1],
      [1, 0.0, 0.0, 1.0, 1.0],
    ]);
    expect(union).not.toBeNull();
    const [page, x, y, w, h] = union!;
    expect(page).toBe(0);
    expect(x).toBeCloseTo(0.1, 10);
    expect(y).toBeCloseTo(0.2, 10);
    expect(w).toBeCloseTo(0.4, 10);
    expect(h).toBeCloseTo(0.15, 10);
  });

  it("returns null for no boxes", () => {
    expect(enclosingBox([])).toBeNull();
  });
});

describe("relativePosition", () => {
  it("converts client coordinates to normalized page position", () => {
    const rect = { left: 100, top: 50, width: 400, height: 800 };
    expect(relativePosition(rect, 300, 450)).toEqual({ x: 0.5, y: 0.5 });
  });
});
