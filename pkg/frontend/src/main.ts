import { ApiError, StudioClient } from "./api";
import { exportSession } from "./export";
import { ViewTransform, fitView } from "./mapping";
import { drawScene } from "./render";
import { buildScene, demoColor, type SceneObstacle } from "./scene";
import { StrokeRecorder, nearestStroke } from "./strokes";
import type { DemoLabel, SessionPayload } from "./types";

const WIDTH = 720;
const HEIGHT = 480;

document.body.innerHTML = `
  <h1>Skill Studio</h1>
  <div id="toolbar">
    <input id="baseUrl" placeholder="service URL (blank = same origin)" size="28">
    <input id="sessionId" placeholder="session id" size="16" value="studio">
    <button id="connectBtn">Open session</button>
    <span id="mapping" class="dim"></span>
  </div>
  <div id="modes">
    <label><input type="radio" name="mode" value="success" checked> draw successful</label>
    <label><input type="radio" name="mode" value="failure"> draw failed</label>
    <label><input type="radio" name="mode" value="relabel"> relabel (click a stroke)</label>
    <label><input type="radio" name="mode" value="constraint"> place constraint</label>
    <label><input type="radio" name="mode" value="obstacle"> place obstacle</label>
    <input id="obstacleRadius" type="number" value="0.05" step="0.01" min="0.01" size="5">
    <button id="clearObstacles">clear obstacles</button>
  </div>
  <canvas id="board" width="${WIDTH}" height="${HEIGHT}" style="border:1px solid #999; touch-action:none;"></canvas>
  <div id="actions">
    <button id="reproduceBtn">Reproduce</button>
    <button id="markSuccess">Mark success</button>
    <button id="markFailure">Mark failure + iterate</button>
    <span id="iteration"></span>
    <span id="badge"></span>
    <button id="exportBtn">Export demos</button>
  </div>
  <div id="message"></div>
  <style>
    body { font-family: sans-serif; margin: 16px; }
    .dim { color: #666; font-size: 12px; margin-left: 12px; }
    #modes label { margin-right: 10px; }
    #badge { color: #b45309; font-weight: bold; margin-left: 10px; }
    #iteration { margin-left: 10px; }
    #message { color: #b91c1c; min-height: 1.2em; margin-top: 6px; }
    button { margin-right: 6px; }
  </style>
`;

const canvas = document.getElementById("board") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const messageEl = document.getElementById("message")!;
const badgeEl = document.getElementById("badge")!;
const iterationEl = document.getElementById("iteration")!;
const mappingEl = document.getElementById("mapping")!;

let client = new StudioClient("");
let session: SessionPayload | null = null;
let view: ViewTransform = fitView([], WIDTH, HEIGHT);
let obstacles: SceneObstacle[] = [];
let strokeCounter = 0;
const recorder = new StrokeRecorder();

function mode(): string {
  const checked = document.querySelector<HTMLInputElement>('input[name="mode"]:checked');
  return checked ? checked.value : "success";
}

function say(text: string) {
  messageEl.textContent = text;
}

function taskPointsInScene(s: SessionPayload): number[][] {
  const pts: number[][] = [];
  for (const d of [...s.demos.successes, ...s.demos.failures]) pts.push(...d.points);
  const last = s.history[s.history.length - 1];
  if (last) pts.push(...last.reproduction.trajectory.points);
  for (const e of s.constraints.entries) pts.push(e.point);
  return pts;
}

function redraw() {
  if (!session) return;
  const scene = buildScene(session, obstacles);
  view = fitView(taskPointsInScene(session), WIDTH, HEIGHT);
  drawScene(ctx, view, scene, WIDTH, HEIGHT);
  mappingEl.textContent = view.describe();
  iterationEl.textContent = `iteration ${scene.iteration}`;
  badgeEl.textContent = scene.warning ?? "";
}

async function refresh() {
  if (!session) return;
  session = await client.getSession(session.session_id);
  redraw();
}

async function guard(fn: () => Promise<void>) {
  try {
    say("");
    await fn();
  } catch (err) {
    if (err instanceof ApiError) {
      say(err.status === 409 ? `${err.detail}; scene refreshed` : err.detail);
      if (err.status === 409) await refresh().catch(() => undefined);
    } else {
      say(String(err));
    }
  }
}

document.getElementById("connectBtn")!.addEventListener("click", () => guard(async () => {
  const base = (document.getElementById("baseUrl") as HTMLInputElement).value.trim();
  const sid = (document.getElementById("sessionId") as HTMLInputElement).value.trim();
  client = new StudioClient(base);
  try {
    session = await client.getSession(sid);
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      await client.createSession(sid, {});
      session = await client.getSession(sid);
    } else {
      throw err;
    }
  }
  strokeCounter = session.demos.successes.length + session.demos.failures.length;
  redraw();
}));

canvas.addEventListener("pointerdown", (ev) => {
  const m = mode();
  const rect = canvas.getBoundingClientRect();
  const px = ev.clientX - rect.left;
  const py = ev.clientY - rect.top;
  if (m === "success" || m === "failure") {
    recorder.begin(px, py);
    canvas.setPointerCapture(ev.pointerId);
    return;
  }
  if (!session) {
    say("open a session first");
    return;
  }
  const p = view.toTask(px, py);
  if (m === "constraint") void guard(() => placeConstraint(p));
  else if (m === "obstacle") placeObstacle(p);
  else if (m === "relabel") void guard(() => relabelAt(p));
});

canvas.addEventListener("pointermove", (ev) => {
  if (!recorder.active) return;
  const rect = canvas.getBoundingClientRect();
  if (!recorder.extend(ev.clientX - rect.left, ev.clientY - rect.top)) return;
  const seg = recorder.lastSegment();
  if (!seg) return;
  // live ink; the authoritative stroke renders after upload
  ctx.strokeStyle = demoColor(mode() as DemoLabel);
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(seg[0][0], seg[0][1]);
  ctx.lineTo(seg[1][0], seg[1][1]);
  ctx.stroke();
});

canvas.addEventListener("pointerup", () => {
  const m = mode();
  if (m !== "success" && m !== "failure") return;
  const strokePx = recorder.finish();
  if (strokePx === null) {
    say("a demonstration needs at least 2 points");
    return;
  }
  if (!session) {
    say("open a session first");
    return;
  }
  const label = m as DemoLabel;
  const points = strokePx.map(([x, y]) => view.toTask(x, y));
  strokeCounter += 1;
  const id = `stroke-${strokeCounter}`;
  void guard(async () => {
    await client.addDemo(session!.session_id, { id, label, points }, session!.version);
    await refresh();
    say(`${id} uploaded as ${label}`);
  });
});

async function placeConstraint(p: [number, number]) {
  const s = session!;
  const length = Number(s.config.resample_len ?? 100);
  const entries = [...s.constraints.entries];
  if (entries.length === 0) {
    entries.push({ index: 0, point: [p[0], p[1]] });
  } else if (entries.length === 1) {
    entries.push({ index: length - 1, point: [p[0], p[1]] });
  } else {
    // move the nearest marker, keep its timestep
    let best = 0;
    let bestD = Infinity;
    entries.forEach((e, i) => {
      const d = Math.hypot(e.point[0] - p[0], e.point[1] - p[1]);
      if (d < bestD) { bestD = d; best = i; }
    });
    entries[best] = { index: entries[best].index, point: [p[0], p[1]] };
  }
  await client.setConstraints(
    s.session_id, { rho: s.constraints.rho, entries }, s.version);
  await refresh();
}

function placeObstacle(p: [number, number]) {
  const radius = Number((document.getElementById("obstacleRadius") as HTMLInputElement).value) || 0.05;
  // drawing aid only; obstacles never reach the solver
  obstacles.push({ center: [p[0], p[1]], radius });
  redraw();
}

async function relabelAt(p: [number, number]) {
  const s = session!;
  const demos = [...s.demos.successes, ...s.demos.failures];
  const hitTolerance = 10 / view.pxPerUnit;
  const idx = nearestStroke(demos.map((d) => d.points), p, hitTolerance);
  if (idx < 0) {
    say("no stroke near the click");
    return;
  }
  const d = demos[idx];
  const flipped: DemoLabel = d.label === "success" ? "failure" : "success";
  await client.relabelDemo(s.session_id, d.id, flipped, s.version);
  await refresh();
  say(`${d.id} relabeled ${flipped}`);
}

document.getElementById("clearObstacles")!.addEventListener("click", () => {
  obstacles = [];
  redraw();
});

document.getElementById("reproduceBtn")!.addEventListener("click", () => guard(async () => {
  if (!session) { say("open a session first"); return; }
  await client.reproduce(session.session_id);
  await refresh();
}));

function iterateWith(label: DemoLabel) {
  return guard(async () => {
    if (!session) { say("open a session first"); return; }
    const res = await client.iterate(session.session_id, label);
    await refresh();
    if (res.converged) say(`accepted after ${res.iterations} iteration(s)`);
    else say(`attempt banked as failed; iteration ${res.iterations} rendered`);
  });
}

document.getElementById("markSuccess")!.addEventListener("click", () => void iterateWith("success"));
document.getElementById("markFailure")!.addEventListener("click", () => void iterateWith("failure"));

document.getElementById("exportBtn")!.addEventListener("click", () => {
  if (!session) { say("open a session first"); return; }
  const payload = exportSession(session, view.export());
  const blob = new Blob([JSON.stringify(payload, null, 2)], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = `${session.session_id}-demos.json`;
  a.click();
  URL.revokeObjectURL(a.href);
});
