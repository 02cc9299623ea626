/**
 * Job polling at a fixed 500 ms cadence, plus the one-in-flight-job-per-mesh
 * guard the single-page app enforces.
 */

import type { ApiClient, JobStatus } from "./api.js";

export const POLL_INTERVAL_MS = 500;

export class JobFailed extends Error {
  constructor(readonly jobId: string, detail: string) {
    super(detail);
    this.name = "JobFailed";
  }
}

export type Sleep = (ms: number) => Promise<void>;

const defaultSleep: Sleep = (ms) =>
  new Promise((resolve) => setTimeout(resolve, ms));

/**
 * Poll a job until it reaches a terminal state.
 *
 * Resolves with the final status when the job is done and rejects with
 * JobFailed (carrying the server's error string) when it failed.  The
 * sleep function is injectable for tests.
 */
export async function pollJob(
  client: ApiClient,
  jobId: string,
  onUpdate?: (status: JobStatus) => void,
  intervalMs: number = POLL_INTERVAL_MS,
  sleep: Sleep = defaultSleep,
): Promise<JobStatus> {
  for (;;) {
    const status = await client.getJob(jobId);
    onUpdate?.(status);
    if (status.state === "done") {
      return status;
    }
    if (status.state === "failed") {
      throw new JobFailed(jobId, status.error ?? "job failed");
    }
    await sleep(intervalMs);
  }
}

/** Tracks the single in-flight job each mesh is allowed. */
export class JobTracker {
  private readonly active = new Map<string, string>();

  /** Registers a job; throws if the mesh already has one in flight. */
  start(meshId: string, jobId: string): void {
    const current = this.active.get(meshId);
    if (current !== undefined) {
      throw new Error(
        `mesh ${meshId} already has job ${current} in flight`);
    }
    this.active.set(meshId, jobId);
  }

  finish(meshId: string): void {
    this.active.delete(meshId);
  }

  inFlight(meshId: string): string | undefined {
    return this.active.get(meshId);
  }
}
