import { describe, expect, it } from "vitest";

import { StrokeRecorder, distanceToPolyline, nearestStroke } from "../src/strokes";

describe("StrokeRecorder", () => {
  it("keeps points spaced by the minimum gap", () => {
    const rec = new StrokeRecorder(2);
    rec.begin(0, 0);
    expect(rec.extend(0.5, 0)).toBe(false); // too close, dropped
    expect(rec.extend(3, 0)).toBe(true);
    expect(rec.extend(3, 4)).toBe(true);
    expect(rec.finish()).toEqual([[0, 0], [3, 0], [3, 4]]);
  });

  it("rejects strokes with fewer than 2 points", () => {
    const rec = new StrokeRecorder();
    rec.begin(10, 10);
    rec.extend(10.5, 10.2); // within the gap, never recorded
    expect(rec.finish()).toBeNull();
    expect(rec.active).toBe(false);
  });

  it("cancel discards the stroke", () => {
    const rec = new StrokeRecorder();
    rec.begin(0, 0);
    rec.extend(10, 10);
    rec.cancel();
    expect(rec.finish()).toBeNull();
  });

  it("exposes the last segment for live ink", () => {
    const rec = new StrokeRecorder(1);
    rec.begin(0, 0);
    expect(rec.lastSegment()).toBeNull();
    rec.extend(5, 0);
    expect(rec.lastSegment()).toEqual([[0, 0], [5, 0]]);
  });
});

describe("hit testing", () => {
  const horizontal = [[0, 0], [10, 0]];
  const diagonal = [[0, 5], [10, 15]];

  it("measures distance to the closest segment", () => {
    expect(distanceToPolyline([5, 3], horizontal)).toBeCloseTo(3, 12);
    expect(distanceToPolyline([-4, 3], horizontal)).toBeCloseTo(5, 12);
  });

  it("picks the nearest stroke within tolerance", () => {
    expect(nearestStroke([horizontal, diagonal], [5, 1], 2)).toBe(0);
    expect(nearestStroke([horizontal, diagonal], [5, 9.5], 2)).toBe(1);
  });

  it("returns -1 when nothing is close enough", () => {
    expect(nearestStroke([horizontal, diagonal], [5, 3], 0.5)).toBe(-1);
  });
});
