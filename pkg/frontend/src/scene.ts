// Scene model: what the canvas renders, derived purely from session
// state so a page reload plus refetch reproduces the identical scene.

import type {
  DemoLabel,
  ReproductionPayload,
  SessionPayload,
} from "./types";

export const SUCCESS_COLOR = "#2f9e44";
export const FAILURE_COLOR = "#d64545";
export const REPRODUCTION_COLOR = "#2563eb";
export const MEAN_COLOR = "#6d28d9";

// solver statuses that need no warning badge
const CLEAN_STATUSES = new Set(["DirectSolve", "IterativeConverged"]);

export interface SceneTrajectory {
  id: string;
  label: DemoLabel;
  points: number[][];
  color: string;
}

export interface SceneRibbon {
  mean: number[][];
  halfWidth: number[][];
  color: string;
}

export interface SceneOverlay {
  points: number[][];
  color: string;
  status: string;
  label: DemoLabel | null;
}

export interface SceneMarker {
  index: number;
  point: number[];
}

export interface SceneObstacle {
  center: number[];
  radius: number;
}

export interface CanvasScene {
  trajectories: SceneTrajectory[];
  ribbons: SceneRibbon[];
  overlay: SceneOverlay | null;
  markers: SceneMarker[];
  obstacles: SceneObstacle[];
  warning: string | null;
  iteration: number;
}

export function demoColor(label: DemoLabel): string {
  return label === "success" ? SUCCESS_COLOR : FAILURE_COLOR;
}

function ribbonsOf(rep: ReproductionPayload): SceneRibbon[] {
  const out: SceneRibbon[] = [];
  for (const frame of rep.frames) {
    if (frame.frame !== "cartesian") continue;
    if (frame.success_mean && frame.success_spread) {
      out.push({
        mean: frame.success_mean,
        halfWidth: frame.success_spread,
        color: SUCCESS_COLOR,
      });
    }
    if (frame.failure_mean && frame.failure_spread) {
      out.push({
        mean: frame.failure_mean,
        halfWidth: frame.failure_spread,
        color: FAILURE_COLOR,
      });
    }
  }
  return out;
}

export function buildScene(
  session: SessionPayload,
  obstacles: SceneObstacle[] = [],
): CanvasScene {
  const trajectories: SceneTrajectory[] = [];
  for (const d of session.demos.successes) {
    trajectories.push({
      id: d.id, label: "success", points: d.points, color: SUCCESS_COLOR,
    });
  }
  for (const d of session.demos.failures) {
    trajectories.push({
      id: d.id, label: "failure", points: d.points, color: FAILURE_COLOR,
    });
  }

  const latest = session.history.length > 0
    ? session.history[session.history.length - 1]
    : null;

  let overlay: SceneOverlay | null = null;
  let ribbons: SceneRibbon[] = [];
  let warning: string | null = null;
  if (latest !== null) {
    const rep = latest.reproduction;
    // rendered points are the solver's own, never resampled client-side
    overlay = {
      points: rep.trajectory.points,
      color: REPRODUCTION_COLOR,
      status: rep.report.status,
      label: latest.label,
    };
    ribbons = ribbonsOf(rep);
    if (!CLEAN_STATUSES.has(rep.report.status)) {
      warning = `solver fell back: ${rep.report.status}`;
    }
  }

  return {
    trajectories,
    ribbons,
    overlay,
    markers: session.constraints.entries.map((e) => ({
      index: e.index,
      point: e.point,
    })),
    obstacles,
    warning,
    iteration: session.history.length,
  };
}
