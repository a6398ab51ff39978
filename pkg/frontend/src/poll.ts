import type { LmapClient } from "./api.js";
import type { JobStatus } from "./types.js";

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export interface PollOptions {
  intervalMs?: number;
  timeoutMs?: number;
  sleep?: (ms: number) => Promise<void>;
  onTick?: (status: JobStatus) => void;
}

/** Poll /status every 250 ms until the job reaches done or failed. */
export async function pollUntilDone(
  client: LmapClient,
  meshId: string,
  options: PollOptions = {},
): Promise<JobStatus> {
  const interval = options.intervalMs ?? 250;
  const timeout = options.timeoutMs ?? 120_000;
  const sleep = options.sleep ?? defaultSleep;
  let waited = 0;
  for (;;) {
    const status = await client.status(meshId);
    options.onTick?.(status);
    if (status.status === "done" || status.status === "failed") return status;
    if (waited >= timeout) throw new Error(`job still ${status.status} after ${timeout} ms`);
    await sleep(interval);
    waited += interval;
  }
}
