/** Typed client for the local planning service. The UI computes no
 * geometry of its own: every marker and every mesh shown comes from
 * these responses. */

export type Vec3 = [number, number, number];

export interface BaselineDoc {
  model_id: string;
  step_mm: number;
  wheel_angle_rad: number;
  seed: { anchor: number[]; N: number[]; D: number[] };
  points: { p: Vec3; n: Vec3 }[];
  truncated: [boolean, boolean];
}

export interface CatalogModel {
  id: string;
  overall_length_mm: number;
  rings: unknown[];
}

export interface GenerateResult {
  stl: ArrayBuffer;
  report: { ring_count: number; triangle_count: number; span_mm: number };
}

export interface ExportFile {
  name: string;
  data: ArrayBuffer;
}

/** Surface the controller depends on; mocked in tests. */
export interface PlannerService {
  fetchMesh(): Promise<ArrayBuffer>;
  fetchCatalog(): Promise<CatalogModel[]>;
  seed(point: Vec3, angleDeg: number, modelId: string, stepMm?: number): Promise<BaselineDoc>;
  rotate(deltaTicks: number): Promise<BaselineDoc>;
  setWheelStep(degrees: number): Promise<void>;
  adjustMarker(index: number, point: Vec3): Promise<BaselineDoc>;
  generate(): Promise<GenerateResult>;
  save(): Promise<number>;
  exportAll(mode: "combined" | "per_implant"): Promise<ExportFile>;
}

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function jsonOrThrow<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    const body = await resp.text();
    throw new ServiceError(resp.status, body || resp.statusText);
  }
  return (await resp.json()) as T;
}

export class HttpPlannerService implements PlannerService {
  constructor(private baseUrl: string) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return jsonOrThrow<T>(resp);
  }

  async fetchMesh(): Promise<ArrayBuffer> {
    const resp = await fetch(this.baseUrl + "/mesh");
    if (!resp.ok) throw new ServiceError(resp.status, "mesh not available");
    return resp.arrayBuffer();
  }

  async fetchCatalog(): Promise<CatalogModel[]> {
    const resp = await fetch(this.baseUrl + "/catalog");
    const doc = await jsonOrThrow<{ models: CatalogModel[] }>(resp);
    return doc.models;
  }

  seed(point: Vec3, angleDeg: number, modelId: string, stepMm?: number): Promise<BaselineDoc> {
    const body: Record<string, unknown> = { point, angle_deg: angleDeg, model_id: modelId };
    if (stepMm !== undefined) body.step_mm = stepMm;
    return this.post<BaselineDoc>("/seed", body);
  }

  rotate(deltaTicks: number): Promise<BaselineDoc> {
    return this.post<BaselineDoc>("/rotate", { delta_ticks: deltaTicks });
  }

  async setWheelStep(degrees: number): Promise<void> {
    await this.post<unknown>("/wheel_step", { degrees });
  }

  adjustMarker(index: number, point: Vec3): Promise<BaselineDoc> {
    return this.post<BaselineDoc>("/adjust_marker", { index, point });
  }

  async generate(): Promise<GenerateResult> {
    const resp = await fetch(this.baseUrl + "/generate", { method: "POST" });
    if (!resp.ok) throw new ServiceError(resp.status, await resp.text());
    const report = JSON.parse(resp.headers.get("X-Report") ?? "{}");
    return { stl: await resp.arrayBuffer(), report };
  }

  async save(): Promise<number> {
    const resp = await fetch(this.baseUrl + "/save", { method: "POST" });
    const doc = await jsonOrThrow<{ saved_count: number }>(resp);
    return doc.saved_count;
  }

  async exportAll(mode: "combined" | "per_implant"): Promise<ExportFile> {
    const resp = await fetch(this.baseUrl + "/export", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ mode }),
    });
    if (!resp.ok) throw new ServiceError(resp.status, await resp.text());
    const name = mode === "combined" ? "implants.stl" : "implants.zip";
    return { name, data: await resp.arrayBuffer() };
  }
}
