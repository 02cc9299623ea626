/**
 * Single-page app wiring: upload a mesh, edit region boxes, run one
 * decomposition job at a time, inspect parts and the error heatmap, and
 * export the result zip.
 */

import { ApiClient, type DecomposeManifest } from "./api.js";
import { GizmoSession, type NumericField } from "./gizmo.js";
import { heatmapAttributes } from "./heatmap.js";
import { parseObj } from "./obj.js";
import { JobTracker, pollJob } from "./polling.js";
import {
  exportRegions, importRegions, regionColor, regionFromCenterCorner,
  type UiRegion,
} from "./regions.js";
import { ToastQueue } from "./toasts.js";
import { Viewer } from "./viewer.js";

interface AppState {
  meshId: string | null;
  meshAabb: { min: number[]; max: number[] } | null;
  regions: UiRegion[];
  jobId: string | null;
  manifest: DecomposeManifest | null;
  heatmapOn: boolean;
  alpha: number;
  beta: number | null;
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

export function startApp(): void {
  const baseUrl =
    new URLSearchParams(location.search).get("api") ?? "http://127.0.0.1:8732";
  const client = new ApiClient(baseUrl);
  const tracker = new JobTracker();
  const viewer = new Viewer(el<HTMLCanvasElement>("viewport"));
  const toastHost = el<HTMLDivElement>("toasts");
  const toasts = new ToastQueue((list) => {
    toastHost.replaceChildren(...list.map((toast) => {
      const node = document.createElement("div");
      node.className = `toast toast-${toast.level}`;
      node.textContent = toast.regionId
        ? `[${toast.regionId}] ${toast.message}` : toast.message;
      node.addEventListener("click", () => toasts.dismiss(toast.id));
      return node;
    }));
  });

  const state: AppState = {
    meshId: null, meshAabb: null, regions: [], jobId: null,
    manifest: null, heatmapOn: false, alpha: 0, beta: null,
  };

  const regionList = el<HTMLDivElement>("region-list");
  const partList = el<HTMLDivElement>("part-list");
  const progress = el<HTMLProgressElement>("job-progress");

  function renderRegions(): void {
    viewer.setRegions(state.regions);
    regionList.replaceChildren(...state.regions.map((region, index) => {
      const session = new GizmoSession(region);
      const row = document.createElement("div");
      row.className = "region-row";
      const title = document.createElement("span");
      title.textContent = region.id;
      title.style.color = region.color;
      row.append(title);
      const fields: [string, NumericField][] = [
        ["cx", { kind: "center", axis: 0 }],
        ["cy", { kind: "center", axis: 1 }],
        ["cz", { kind: "center", axis: 2 }],
        ["hx", { kind: "halfExtent", axis: 0 }],
        ["hy", { kind: "halfExtent", axis: 1 }],
        ["hz", { kind: "halfExtent", axis: 2 }],
        ["tol", { kind: "tolerance" }],
      ];
      for (const [label, field] of fields) {
        const input = document.createElement("input");
        input.type = "number";
        input.step = "any";
        input.title = label;
        const committed = session.committed();
        input.value = String(
          field.kind === "tolerance" ? committed.tolerance
            : field.kind === "center"
              ? (committed.min[field.axis] + committed.max[field.axis]) / 2
              : (committed.max[field.axis] - committed.min[field.axis]) / 2);
        input.addEventListener("change", () => {
          // numeric entry is authoritative over any in-progress drag
          state.regions[index] =
            session.applyNumeric(field, Number(input.value));
          void syncRegions();
          renderRegions();
        });
        row.append(input);
      }
      const remove = document.createElement("button");
      remove.textContent = "x";
      remove.addEventListener("click", () => {
        state.regions.splice(index, 1);
        void syncRegions();
        renderRegions();
      });
      row.append(remove);
      return row;
    }));
  }

  async function syncRegions(): Promise<void> {
    if (state.meshId === null) {
      return;
    }
    try {
      const reply = await client.putRegions(
        state.meshId, exportRegions(state.regions));
      for (const warning of reply.warnings) {
        toasts.push("info", warning);
      }
    } catch (error) {
      toasts.pushError(error);
    }
  }

  el<HTMLInputElement>("mesh-file").addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) {
      return;
    }
    try {
      const meta = await client.uploadMesh(await file.arrayBuffer(), file.name);
      state.meshId = meta.mesh_id;
      state.meshAabb = { min: meta.aabb_min, max: meta.aabb_max };
      viewer.frame(meta.aabb_min, meta.aabb_max);
      toasts.push("info", `uploaded ${file.name}: ${meta.n_faces} faces, ` +
        `watertight=${meta.watertight}`);
    } catch (error) {
      toasts.pushError(error);
    }
  });

  el<HTMLButtonElement>("add-region").addEventListener("click", () => {
    if (state.meshAabb === null) {
      toasts.push("error", "upload a mesh first");
      return;
    }
    const { min, max } = state.meshAabb;
    const center = [0, 1, 2].map((a) => (min[a] + max[a]) / 2) as
      [number, number, number];
    const corner = [0, 1, 2].map(
      (a) => center[a] + (max[a] - min[a]) / 4) as [number, number, number];
    const region = regionFromCenterCorner(
      `region_${state.regions.length}`, center, corner, 0.05,
      regionColor(state.regions.length));
    state.regions.push(region);
    void syncRegions();
    renderRegions();
  });

  el<HTMLButtonElement>("export-regions").addEventListener("click", () => {
    const blob = new Blob(
      [JSON.stringify(exportRegions(state.regions), null, 1)],
      { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "regions.json";
    link.click();
  });

  el<HTMLInputElement>("import-regions").addEventListener("change", async (e) => {
    const file = (e.target as HTMLInputElement).files?.[0];
    if (!file) {
      return;
    }
    try {
      state.regions = importRegions(JSON.parse(await file.text()));
      await syncRegions();
      renderRegions();
    } catch (error) {
      toasts.pushError(error);
    }
  });

  el<HTMLButtonElement>("run").addEventListener("click", async () => {
    if (state.meshId === null) {
      toasts.push("error", "upload a mesh first");
      return;
    }
    if (tracker.inFlight(state.meshId)) {
      toasts.push("error", "a job is already running for this mesh");
      return;
    }
    try {
      const { job_id } = await client.postJob(
        "decompose", state.meshId, exportRegions(state.regions));
      tracker.start(state.meshId, job_id);
      state.jobId = job_id;
      await pollJob(client, job_id, (status) => {
        progress.value = status.progress;
      });
      state.manifest = await client.getJobResult(job_id);
      await showParts();
    } catch (error) {
      toasts.pushError(error);
    } finally {
      tracker.finish(state.meshId);
    }
  });

  async function showParts(): Promise<void> {
    if (state.manifest === null || state.jobId === null) {
      return;
    }
    viewer.clearParts();
    const entries = [
      ...state.manifest.parts.map((p) => ({ file: p.file, tag: p.provenance })),
      ...state.manifest.exact_meshes.map(
        (e) => ({ file: e.file, tag: `exact:${e.region_id}` })),
    ];
    partList.replaceChildren();
    for (let i = 0; i < entries.length; i++) {
      const { file, tag } = entries[i];
      const text = await client.getJobFileText(state.jobId, file);
      viewer.addPart(file, parseObj(text), i);
      const row = document.createElement("label");
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.checked = true;
      toggle.addEventListener("change", () =>
        viewer.setPartVisible(file, toggle.checked));
      row.append(toggle, ` ${file} (${tag})`);
      partList.append(row);
    }
  }

  el<HTMLButtonElement>("heatmap").addEventListener("click", async () => {
    if (state.meshId === null || state.jobId === null) {
      toasts.push("error", "run a decomposition first");
      return;
    }
    if (state.heatmapOn) {
      viewer.setHeatmap(null);
      state.heatmapOn = false;
      return;
    }
    try {
      const samples = await client.evaluateError({
        mesh_id: state.meshId,
        decompose_job_id: state.jobId,
        alpha: state.alpha,
        ...(state.beta !== null ? { beta: state.beta } : {}),
        on_approx: el<HTMLInputElement>("on-approx").checked,
      });
      viewer.setHeatmap(heatmapAttributes(samples));
      state.heatmapOn = true;
    } catch (error) {
      toasts.pushError(error);
    }
  });

  for (const [id, key] of [["alpha", "alpha"], ["beta", "beta"]] as const) {
    el<HTMLInputElement>(id).addEventListener("change", (e) => {
      const raw = (e.target as HTMLInputElement).value;
      if (key === "alpha") {
        state.alpha = Number(raw) || 0;
      } else {
        state.beta = raw === "" ? null : Number(raw);
      }
    });
  }

  el<HTMLButtonElement>("export-zip").addEventListener("click", () => {
    if (state.jobId === null) {
      toasts.push("error", "run a decomposition first");
      return;
    }
    location.href = client.exportUrl(state.jobId);
  });

}

startApp();
