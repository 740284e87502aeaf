/** Planner state machine, independent of the DOM and of three.js so the
 * thin-client contract is testable: markers and meshes pass through to
 * the viewer exactly as the service returned them. */

import type { BaselineDoc, CatalogModel, PlannerService, Vec3 } from "./api.js";
import { ServiceError } from "./api.js";

/** Rendering side the controller drives; implemented by the three.js
 * viewer and by a recorder in tests. */
export interface ViewerPort {
  setAnatomy(stl: ArrayBuffer): void;
  setMarkers(points: Vec3[]): void;
  setCurrentImplant(stl: ArrayBuffer | null): void;
  addSavedImplant(stl: ArrayBuffer): void;
  setBusy(busy: boolean): void;
  hint(message: string): void;
  download(name: string, data: ArrayBuffer): void;
}

export class PlannerController {
  modelId = "";
  baseline: BaselineDoc | null = null;
  visualize = false;
  busy = false;

  private lastSeedPoint: Vec3 | null = null;
  private lastImplantStl: ArrayBuffer | null = null;

  /** wheel coalescing: one rotate request in flight, later ticks pool up */
  private pendingTicks = 0;
  private rotateInFlight = false;
  inFlightRotates = 0;

  constructor(private service: PlannerService, private viewer: ViewerPort) {}

  /** Load the anatomy mesh and the plate catalog. */
  async init(): Promise<CatalogModel[]> {
    const [mesh, models] = await Promise.all([
      this.service.fetchMesh(),
      this.service.fetchCatalog(),
    ]);
    this.viewer.setAnatomy(mesh);
    if (models.length > 0 && !this.modelId) this.modelId = models[0].id;
    return models;
  }

  private applyBaseline(doc: BaselineDoc): void {
    this.baseline = doc;
    this.viewer.setMarkers(doc.points.map((pt) => pt.p));
  }

  private report(err: unknown): void {
    const msg = err instanceof ServiceError ? `service: ${err.message}` : String(err);
    this.viewer.hint(msg);
  }

  /** ALT-click on the surface: (re)place the seed. */
  async altClick(point: Vec3): Promise<void> {
    if (this.busy || this.visualize) {
      this.viewer.hint("turn visualization off to adjust the implant");
      return;
    }
    if (!this.modelId) {
      this.viewer.hint("select a plate model first");
      return;
    }
    const angleDeg = this.baseline ? (this.baseline.wheel_angle_rad * 180) / Math.PI : 0;
    try {
      const doc = await this.service.seed(point, angleDeg, this.modelId);
      this.lastSeedPoint = point;
      this.applyBaseline(doc);
    } catch (err) {
      this.report(err);
    }
  }

  /** Mouse wheel: rotate the baseline about the seed normal. */
  wheel(deltaTicks: number): void {
    if (!this.baseline) {
      this.viewer.hint("ALT-click the surface to place a seed first");
      return;
    }
    if (this.busy || this.visualize) {
      this.viewer.hint("turn visualization off to rotate");
      return;
    }
    this.pendingTicks += deltaTicks;
    void this.flushRotate();
  }

  private async flushRotate(): Promise<void> {
    if (this.rotateInFlight || this.pendingTicks === 0) return;
    this.rotateInFlight = true;
    this.inFlightRotates += 1;
    const ticks = this.pendingTicks;
    this.pendingTicks = 0;
    try {
      const doc = await this.service.rotate(ticks);
      this.applyBaseline(doc);
    } catch (err) {
      this.report(err);
    } finally {
      this.rotateInFlight = false;
      this.inFlightRotates -= 1;
      if (this.pendingTicks !== 0) void this.flushRotate();
    }
  }

  async setWheelStep(degrees: number): Promise<void> {
    try {
      await this.service.setWheelStep(degrees);
    } catch (err) {
      this.report(err);
    }
  }

  /** Model radio change: an existing seed is re-issued so the baseline
   * length tracks the selected model. */
  async selectModel(modelId: string): Promise<void> {
    this.modelId = modelId;
    if (!this.lastSeedPoint || this.busy) return;
    const angleDeg = this.baseline ? (this.baseline.wheel_angle_rad * 180) / Math.PI : 0;
    try {
      const doc = await this.service.seed(this.lastSeedPoint, angleDeg, modelId);
      this.applyBaseline(doc);
    } catch (err) {
      this.report(err);
    }
  }

  async dragMarker(index: number, point: Vec3): Promise<void> {
    if (!this.baseline || this.busy || this.visualize) return;
    try {
      this.applyBaseline(await this.service.adjustMarker(index, point));
    } catch (err) {
      this.report(err);
    }
  }

  /** Visualize toggle: ON generates and shows the implant (blocking
   * seed/rotate meanwhile), OFF hides it but keeps the baseline. */
  async toggleVisualize(on: boolean): Promise<void> {
    if (!on) {
      this.visualize = false;
      this.viewer.setCurrentImplant(null);
      return;
    }
    if (!this.baseline) {
      this.viewer.hint("place a seed before visualizing");
      return;
    }
    this.busy = true;
    this.viewer.setBusy(true);
    try {
      const result = await this.service.generate();
      this.lastImplantStl = result.stl;
      this.visualize = true;
      this.viewer.setCurrentImplant(result.stl);
    } catch (err) {
      this.report(err);
    } finally {
      this.busy = false;
      this.viewer.setBusy(false);
    }
  }

  /** Keep the current implant for this session and start the next one. */
  async saveClick(): Promise<void> {
    try {
      await this.service.save();
      if (this.lastImplantStl) this.viewer.addSavedImplant(this.lastImplantStl);
      this.lastImplantStl = null;
      this.visualize = false;
      this.viewer.setCurrentImplant(null);
    } catch (err) {
      this.report(err);
    }
  }

  /** Write all implants (saved and current) to disk. */
  async exportClick(mode: "combined" | "per_implant" = "per_implant"): Promise<void> {
    try {
      const file = await this.service.exportAll(mode);
      this.viewer.download(file.name, file.data);
    } catch (err) {
      this.report(err);
    }
  }
}
