// Canvas 2D drawing of a CanvasScene through a ViewTransform.

import type { ViewTransform } from "./mapping";
import type { CanvasScene, SceneRibbon } from "./scene";

function tracePath(ctx: CanvasRenderingContext2D, view: ViewTransform, pts: number[][]) {
  ctx.beginPath();
  pts.forEach((p, i) => {
    const [x, y] = view.toCanvas(p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
}

function drawRibbon(ctx: CanvasRenderingContext2D, view: ViewTransform, ribbon: SceneRibbon) {
  const upper = ribbon.mean.map((p, i) => [p[0], p[1] + ribbon.halfWidth[i][1]]);
  const lower = ribbon.mean.map((p, i) => [p[0], p[1] - ribbon.halfWidth[i][1]]);
  ctx.beginPath();
  upper.forEach((p, i) => {
    const [x, y] = view.toCanvas(p);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  for (let i = lower.length - 1; i >= 0; i--) {
    const [x, y] = view.toCanvas(lower[i]);
    ctx.lineTo(x, y);
  }
  ctx.closePath();
  ctx.globalAlpha = 0.12;
  ctx.fillStyle = ribbon.color;
  ctx.fill();
  ctx.globalAlpha = 1.0;

  ctx.setLineDash([5, 4]);
  ctx.strokeStyle = ribbon.color;
  ctx.lineWidth = 1;
  tracePath(ctx, view, ribbon.mean);
  ctx.stroke();
  ctx.setLineDash([]);
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  view: ViewTransform,
  scene: CanvasScene,
  width: number,
  height: number,
) {
  ctx.clearRect(0, 0, width, height);

  for (const ob of scene.obstacles) {
    const [cx, cy] = view.toCanvas(ob.center);
    ctx.beginPath();
    ctx.arc(cx, cy, ob.radius * view.pxPerUnit, 0, 2 * Math.PI);
    ctx.fillStyle = "rgba(120, 120, 120, 0.18)";
    ctx.fill();
    ctx.setLineDash([3, 3]);
    ctx.strokeStyle = "#777";
    ctx.lineWidth = 1;
    ctx.stroke();
    ctx.setLineDash([]);
  }

  for (const ribbon of scene.ribbons) {
    drawRibbon(ctx, view, ribbon);
  }

  for (const traj of scene.trajectories) {
    ctx.strokeStyle = traj.color;
    ctx.lineWidth = 2;
    tracePath(ctx, view, traj.points);
    ctx.stroke();
  }

  if (scene.overlay) {
    ctx.strokeStyle = scene.overlay.color;
    ctx.lineWidth = 3;
    tracePath(ctx, view, scene.overlay.points);
    ctx.stroke();
  }

  // constraint markers drawn last so they stay visible
  for (const marker of scene.markers) {
    const [x, y] = view.toCanvas(marker.point);
    ctx.strokeStyle = "#111";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x - 6, y);
    ctx.lineTo(x + 6, y);
    ctx.moveTo(x, y - 6);
    ctx.lineTo(x, y + 6);
    ctx.stroke();
    ctx.font = "11px sans-serif";
    ctx.fillStyle = "#111";
    ctx.fillText(String(marker.index), x + 8, y - 8);
  }
}
