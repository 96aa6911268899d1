import { describe, expect, it } from "vitest";

import { exportSession } from "../src/export";
import {
  FAILURE_COLOR,
  REPRODUCTION_COLOR,
  SUCCESS_COLOR,
  buildScene,
} from "../src/scene";
import type {
  ReproductionPayload,
  SessionPayload,
  SolveReportPayload,
} from "../src/types";

function report(status: string): SolveReportPayload {
  return {
    status,
    iterations: 0,
    initial_cost: 2.0,
    final_cost: 1.0,
    gradient_norm: 1e-9,
    constraint_residual: 1e-4,
    backend: "native",
  };
}

function reproduction(status = "DirectSolve"): ReproductionPayload {
  return {
    trajectory: { dim: 2, points: [[0, 0], [0.5, 0.1], [1, 0]] },
    cost: { total: 1.0 },
    report: report(status),
    frames: [
      {
        frame: "cartesian",
        weight: 1,
        success_mean: [[0, 0], [0.5, 0.2], [1, 0]],
        success_spread: [[0.1, 0.1], [0.1, 0.1], [0.1, 0.1]],
        failure_mean: null,
        failure_spread: null,
        success_components: 1,
        failure_components: null,
        w_sim: null,
      },
    ],
    config: { resample_len: 3 },
  };
}

function sessionPayload(overrides: Partial<SessionPayload> = {}): SessionPayload {
  return {
    session_id: "s1",
    version: 3,
    config: { resample_len: 3 },
    demos: {
      successes: [{ id: "a", label: "success", dim: 2, points: [[0, 0], [1, 0]] }],
      failures: [{ id: "b", label: "failure", dim: 2, points: [[0, 1], [1, 1]] }],
    },
    constraints: { rho: 1e-3, entries: [{ index: 0, point: [0, 0] }] },
    history: [],
    ...overrides,
  };
}

describe("buildScene", () => {
  it("colors demos by label", () => {
    const scene = buildScene(sessionPayload());
    expect(scene.trajectories.map((t) => t.color)).toEqual([
      SUCCESS_COLOR,
      FAILURE_COLOR,
    ]);
    expect(scene.overlay).toBeNull();
    expect(scene.iteration).toBe(0);
  });

  it("renders the latest reproduction verbatim with ribbons", () => {
    const rep = reproduction();
    const scene = buildScene(
      sessionPayload({ history: [{ reproduction: rep, label: null }] }));
    expect(scene.overlay).not.toBeNull();
    // byte-traceable: the very same point array the API returned
    expect(scene.overlay!.points).toBe(rep.trajectory.points);
    expect(scene.overlay!.color).toBe(REPRODUCTION_COLOR);
    expect(scene.ribbons).toHaveLength(1);
    expect(scene.ribbons[0].mean).toBe(rep.frames[0].success_mean);
    expect(scene.warning).toBeNull();
    expect(scene.iteration).toBe(1);
  });

  it("raises a warning badge on solver fallback", () => {
    const scene = buildScene(sessionPayload({
      history: [{ reproduction: reproduction("IndefiniteFallback"), label: null }],
    }));
    expect(scene.warning).toMatch(/IndefiniteFallback/);
  });

  it("carries constraint markers and visual obstacles", () => {
    const scene = buildScene(sessionPayload(), [{ center: [0.5, 0], radius: 0.05 }]);
    expect(scene.markers).toEqual([{ index: 0, point: [0, 0] }]);
    expect(scene.obstacles).toHaveLength(1);
  });
});

describe("exportSession", () => {
  it("embeds the mapping in every exported demo", () => {
    const mapping = { px_per_unit: 140, origin_px: [40, 420] as [number, number], y_axis: "up" as const };
    const out = exportSession(sessionPayload(), mapping);
    expect(out.demos).toHaveLength(2);
    for (const d of out.demos) {
      expect(d.mapping).toEqual(mapping);
    }
    expect(out.session_id).toBe("s1");
  });
});
