// Pointer capture for freehand strokes, plus the hit test used to
// relabel a stroke by clicking it.

export class StrokeRecorder {
  private current: number[][] | null = null;
  private minGapPx: number;

  constructor(minGapPx = 2) {
    this.minGapPx = minGapPx;
  }

  get active(): boolean {
    return this.current !== null;
  }

  begin(x: number, y: number) {
    this.current = [[x, y]];
  }

  /** Returns true when the sample was kept (moved far enough). */
  extend(x: number, y: number): boolean {
    if (this.current === null) return false;
    const [lx, ly] = this.current[this.current.length - 1];
    // drop micro-movements so slow drawing does not pile up points
    if (Math.hypot(x - lx, y - ly) < this.minGapPx) return false;
    this.current.push([x, y]);
    return true;
  }

  /** Last two recorded samples, for live ink. */
  lastSegment(): [number[], number[]] | null {
    if (this.current === null || this.current.length < 2) return null;
    return [
      this.current[this.current.length - 2],
      this.current[this.current.length - 1],
    ];
  }

  /** Ends the stroke. Returns null for strokes too short to be a demo. */
  finish(): number[][] | null {
    const pts = this.current;
    this.current = null;
    if (pts === null || pts.length < 2) return null;
    return pts;
  }

  cancel() {
    this.current = null;
  }
}

function pointSegmentDist(p: number[], a: number[], b: number[]): number {
  const vx = b[0] - a[0];
  const vy = b[1] - a[1];
  const wx = p[0] - a[0];
  const wy = p[1] - a[1];
  const vv = vx * vx + vy * vy;
  const t = vv > 0 ? Math.max(0, Math.min(1, (wx * vx + wy * vy) / vv)) : 0;
  return Math.hypot(wx - t * vx, wy - t * vy);
}

export function distanceToPolyline(p: number[], poly: number[][]): number {
  if (poly.length === 1) return Math.hypot(p[0] - poly[0][0], p[1] - poly[0][1]);
  let best = Infinity;
  for (let i = 0; i + 1 < poly.length; i++) {
    best = Math.min(best, pointSegmentDist(p, poly[i], poly[i + 1]));
  }
  return best;
}

/** Index of the closest polyline within tolerance, or -1. */
export function nearestStroke(
  strokes: number[][][],
  p: number[],
  tolerance: number,
): number {
  let best = -1;
  let bestDist = tolerance;
  strokes.forEach((poly, i) => {
    const d = distanceToPolyline(p, poly);
    if (d <= bestDist) {
      best = i;
      bestDist = d;
    }
  });
  return best;
}
