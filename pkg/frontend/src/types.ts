// Wire formats of the lmap HTTP service. The viewer never re-derives any
// displayed number: everything comes from these payloads.

export interface MeshStats {
  id: string;
  v: number;
  e: number;
  f: number;
  chi: number;
  boundary_loops: number;
}

export interface MeshPayload {
  positions: number[]; // flat x,y,z triples
  faces: number[]; // flat vertex-id triples
}

export interface StepEntry {
  step: number;
  converged: boolean;
  newton_iterations: number;
  max_residual: number;
  flips_replayed: number;
  gd_iterations: number;
  energy_initial: number;
  energy_final: number;
}

export interface ResultPayload extends MeshPayload {
  report: {
    schema: string;
    steps: StepEntry[];
    final_curvature: { interior_max_abs: number; interior_sum_abs: number };
  };
}

export interface RoiStats {
  size: number;
  interior_count: number;
  rim_count: number;
}

export type JobPhase = "none" | "pending" | "running" | "done" | "failed";

export interface JobStatus {
  status: JobPhase;
  error: string | null;
}

export interface OverlayPayload {
  name: string;
  values: number[];
}

export interface HistogramData {
  edges: number[];
  counts: number[];
}

export interface MetricsPayload {
  schema: string;
  area_eps: {
    vertex_ids: number[];
    values: number[];
    hist: HistogramData;
  };
  angle_eta: {
    corner_count: number;
    vertex_ids: number[];
    vertex_mean_abs: number[];
    hist: HistogramData;
  };
}

export interface FlattenConfig {
  steps?: number;
  epsilon?: number;
  max_newton?: number;
  max_gd?: number;
  pin_rim?: boolean;
  seed?: number | null;
  radius?: number | null;
}
