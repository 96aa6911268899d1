// Affine canvas <-> task mapping. Canvas y grows downward, task y
// grows upward, so the y axis flips. The mapping is shown in the UI
// and embedded in every exported demo so recordings stay traceable.

export interface MappingExport {
  px_per_unit: number;
  origin_px: [number, number];
  y_axis: "up";
}

export class ViewTransform {
  pxPerUnit: number;
  originPx: [number, number];

  constructor(pxPerUnit: number, originPx: [number, number]) {
    if (!(pxPerUnit > 0)) {
      throw new Error(`px per unit must be positive, got ${pxPerUnit}`);
    }
    this.pxPerUnit = pxPerUnit;
    this.originPx = [originPx[0], originPx[1]];
  }

  toCanvas(p: number[]): [number, number] {
    return [
      this.originPx[0] + p[0] * this.pxPerUnit,
      this.originPx[1] - p[1] * this.pxPerUnit,
    ];
  }

  toTask(px: number, py: number): [number, number] {
    return [
      (px - this.originPx[0]) / this.pxPerUnit,
      (this.originPx[1] - py) / this.pxPerUnit,
    ];
  }

  describe(): string {
    const [ox, oy] = this.originPx;
    return `1 task unit = ${round3(this.pxPerUnit)} px, origin at ` +
      `(${round3(ox)}, ${round3(oy)}) px, y up`;
  }

  export(): MappingExport {
    return {
      px_per_unit: this.pxPerUnit,
      origin_px: [this.originPx[0], this.originPx[1]],
      y_axis: "up",
    };
  }
}

function round3(v: number): number {
  return Math.round(v * 1000) / 1000;
}

/** Fit the bounding box of some task points into the canvas with a margin. */
export function fitView(
  points: number[][],
  width: number,
  height: number,
  marginPx = 24,
): ViewTransform {
  if (points.length === 0) {
    // unit square default view
    return fitView([[0, 0], [1, 1]], width, height, marginPx);
  }
  let minX = Infinity, maxX = -Infinity, minY = Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    maxX = Math.max(maxX, x);
    minY = Math.min(minY, y);
    maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(maxX - minX, 1e-9);
  const spanY = Math.max(maxY - minY, 1e-9);
  const scale = Math.min(
    (width - 2 * marginPx) / spanX,
    (height - 2 * marginPx) / spanY,
  );
  // center the box
  const cx = (minX + maxX) / 2;
  const cy = (minY + maxY) / 2;
  return new ViewTransform(scale, [
    width / 2 - cx * scale,
    height / 2 + cy * scale,
  ]);
}
