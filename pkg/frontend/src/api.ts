/**
 * Typed client for the decomposition service HTTP API.
 *
 * Every request goes through the documented JSON endpoints; non-2xx
 * responses raise ApiError carrying the server's `detail` string so the
 * UI can surface it verbatim.
 */

import type { RegionsFile } from "./regions.js";

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export interface MeshUploadResponse {
  mesh_id: string;
  validation: { watertight: boolean; problems: string[] };
  n_vertices: number;
  n_faces: number;
  watertight: boolean;
  aabb_min: number[];
  aabb_max: number[];
  volume: number | null;
}

export type JobKind = "decompose" | "error_eval" | "bench";

export interface JobStatus {
  id: string;
  kind: JobKind;
  state: "queued" | "running" | "done" | "failed";
  progress: number;
  error: string | null;
}

export interface ManifestPart {
  file: string;
  provenance: string;
  volume: number | null;
}

export interface DecomposeManifest {
  parts: ManifestPart[];
  exact_meshes: { file: string; region_id: string }[];
  stats: Record<string, unknown>;
  regions: unknown[];
}

export interface ErrorSamplesResponse {
  alpha: number;
  beta: number;
  points: number[][];
  distances: number[];
  normalized: number[];
  colors: string[];
}

export interface EvaluateErrorRequest {
  mesh_id: string;
  decompose_job_id: string;
  n?: number;
  alpha?: number;
  beta?: number;
  on_approx?: boolean;
  seed?: number;
  filter_boxes?: { min: number[]; max: number[] }[];
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchFn: FetchLike;

  constructor(readonly baseUrl: string, fetchFn?: FetchLike) {
    this.fetchFn = fetchFn ?? ((url, init) => fetch(url, init));
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status} ${response.statusText}`;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") {
          detail = body.detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    return (await this.request(path, init)).json() as Promise<T>;
  }

  uploadMesh(
    data: ArrayBuffer | string, filename: string,
  ): Promise<MeshUploadResponse> {
    return this.json("/meshes", {
      method: "POST",
      body: data,
      headers: { "x-filename": filename },
    });
  }

  getMesh(meshId: string): Promise<Record<string, unknown>> {
    return this.json(`/meshes/${meshId}`);
  }

  putRegions(
    meshId: string, file: RegionsFile,
  ): Promise<{ ok: boolean; warnings: string[] }> {
    return this.json(`/meshes/${meshId}/regions`, {
      method: "PUT",
      body: JSON.stringify(file),
      headers: { "content-type": "application/json" },
    });
  }

  postJob(
    kind: JobKind, meshId: string, params: object,
  ): Promise<{ job_id: string }> {
    return this.json("/jobs", {
      method: "POST",
      body: JSON.stringify({ kind, mesh_id: meshId, params }),
      headers: { "content-type": "application/json" },
    });
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.json(`/jobs/${jobId}`);
  }

  getJobResult<T = DecomposeManifest>(jobId: string): Promise<T> {
    return this.json(`/jobs/${jobId}/result`);
  }

  async getJobFileText(jobId: string, name: string): Promise<string> {
    const response = await this.request(`/jobs/${jobId}/files/${name}`);
    return response.text();
  }

  evaluateError(
    payload: EvaluateErrorRequest,
  ): Promise<ErrorSamplesResponse> {
    return this.json("/evaluate/error", {
      method: "POST",
      body: JSON.stringify(payload),
      headers: { "content-type": "application/json" },
    });
  }

  /** Download URL of the part-files zip for a finished decompose job. */
  exportUrl(jobId: string): string {
    return `${this.baseUrl}/export/${jobId}`;
  }
}
