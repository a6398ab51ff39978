import { ApiError, LmapClient } from "./api.js";
import { pollUntilDone, type PollOptions } from "./poll.js";
import {
  canRun,
  jobFailed,
  jobFinished,
  jobRunning,
  jobStarted,
  type ViewerState,
} from "./state.js";

export interface RunDeps {
  client: LmapClient;
  poll?: PollOptions;
  /** observe intermediate states (pending/running) for the UI */
  onState?: (state: ViewerState) => void;
}

/** Submit the current selection, run the flow, and pull the results.
 *
 * Every byte shown afterwards comes from the fetched /result and /metrics
 * payloads. Failures keep mesh and selection so the user can retry; the
 * server's error class is surfaced verbatim.
 */
export async function runAndCompare(
  state: ViewerState,
  deps: RunDeps,
): Promise<ViewerState> {
  const { client } = deps;
  if (!canRun(state) || state.meshId === null) {
    return jobFailed(state, "nothing to run: load a mesh and select a region");
  }
  const meshId = state.meshId;
  try {
    const roiStats = await client.submitRoi(meshId, [...state.selection].sort((a, b) => a - b));
    if (roiStats.interior_count === 0) {
      return jobFailed(state, "selection has no interior vertices to flatten");
    }
    let current = jobStarted(state, roiStats);
    deps.onState?.(current);

    await client.flatten(meshId, { steps: state.steps });
    current = jobRunning(current);
    deps.onState?.(current);

    const status = await pollUntilDone(client, meshId, deps.poll);
    if (status.status === "failed") {
      return jobFailed(current, status.error ?? "job failed");
    }
    const [resultRaw, metricsRaw] = await Promise.all([
      client.resultText(meshId),
      client.metricsText(meshId),
    ]);
    return jobFinished(current, resultRaw, metricsRaw);
  } catch (err) {
    if (err instanceof ApiError) {
      return jobFailed(state, `${err.status}: ${err.message}`);
    }
    const message = err instanceof Error ? err.message : String(err);
    return jobFailed(state, `connection error: ${message}`);
  }
}
