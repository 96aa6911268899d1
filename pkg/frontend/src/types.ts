// Payload shapes mirrored from the HTTP service. The client renders
// these verbatim; it never resamples or rescales solver output.

export type DemoLabel = "success" | "failure";

export interface TrajectoryPayload {
  dim: number;
  points: number[][];
}

export interface DemoPayload extends TrajectoryPayload {
  id: string;
  label: DemoLabel;
}

export interface ConstraintEntry {
  index: number;
  point: number[];
}

export interface ConstraintsPayload {
  rho: number;
  entries: ConstraintEntry[];
}

export interface FramePayload {
  frame: string;
  weight: number;
  success_mean: number[][] | null;
  success_spread: number[][] | null;
  failure_mean: number[][] | null;
  failure_spread: number[][] | null;
  success_components: number | null;
  failure_components: number | null;
  w_sim: number[] | null;
}

export interface SolveReportPayload {
  status: string;
  iterations: number;
  initial_cost: number;
  final_cost: number;
  gradient_norm: number;
  constraint_residual: number;
  backend: string;
}

export interface ReproductionPayload {
  trajectory: TrajectoryPayload;
  cost: Record<string, number>;
  report: SolveReportPayload;
  frames: FramePayload[];
  config: Record<string, unknown>;
}

export interface HistoryEntry {
  reproduction: ReproductionPayload;
  label: DemoLabel | null;
}

export interface SessionPayload {
  session_id: string;
  version: number;
  config: Record<string, unknown>;
  demos: { successes: DemoPayload[]; failures: DemoPayload[] };
  constraints: ConstraintsPayload;
  history: HistoryEntry[];
}

export interface IterateResponse {
  session_id: string;
  version: number;
  converged: boolean;
  iterations: number;
  reproduction: ReproductionPayload;
}
