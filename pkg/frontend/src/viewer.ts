/** three.js rendering of the planning scene: white anatomy, green
 * baseline markers, golden implants. Also maps pointer events to
 * surface points (pick) and marker indices (drag start). */

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";
import type { Vec3 } from "./api.js";
import type { ViewerPort } from "./controller.js";
import { parseBinaryStl } from "./stl.js";

const ANATOMY_COLOR = 0xf2f0ec;
const MARKER_COLOR = 0x19c24a;
const IMPLANT_COLOR = 0xd4a017;

function stlToGeometry(stl: ArrayBuffer): THREE.BufferGeometry {
  const { positions } = parseBinaryStl(stl);
  const geometry = new THREE.BufferGeometry();
  geometry.setAttribute("position", new THREE.BufferAttribute(positions, 3));
  geometry.computeVertexNormals();
  return geometry;
}

export class ThreeViewer implements ViewerPort {
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  readonly renderer: THREE.WebGLRenderer;
  readonly controls: OrbitControls;

  private anatomy: THREE.Mesh | null = null;
  private markers: THREE.InstancedMesh | null = null;
  private markerPositions: Vec3[] = [];
  private markerRadius = 0.5;
  private current: THREE.Mesh | null = null;
  private saved: THREE.Mesh[] = [];
  private raycaster = new THREE.Raycaster();
  private statusTimer: number | undefined;

  constructor(
    private canvas: HTMLCanvasElement,
    private statusLine: HTMLElement,
    private busyOverlay: HTMLElement,
  ) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setPixelRatio(window.devicePixelRatio);
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.1, 5000);
    this.camera.position.set(0, -120, 80);
    this.controls = new OrbitControls(this.camera, canvas);
    this.controls.enableZoom = true;

    this.scene.background = new THREE.Color(0x20242b);
    this.scene.add(new THREE.HemisphereLight(0xffffff, 0x445566, 1.0));
    const sun = new THREE.DirectionalLight(0xffffff, 1.4);
    sun.position.set(60, -80, 120);
    this.scene.add(sun);

    const resize = () => {
      const w = canvas.clientWidth || canvas.parentElement?.clientWidth || 800;
      const h = canvas.clientHeight || canvas.parentElement?.clientHeight || 600;
      this.renderer.setSize(w, h, false);
      this.camera.aspect = w / h;
      this.camera.updateProjectionMatrix();
    };
    window.addEventListener("resize", resize);
    resize();

    const tick = () => {
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
      requestAnimationFrame(tick);
    };
    requestAnimationFrame(tick);
  }

  setAnatomy(stl: ArrayBuffer): void {
    if (this.anatomy) this.scene.remove(this.anatomy);
    const geometry = stlToGeometry(stl);
    this.anatomy = new THREE.Mesh(
      geometry,
      new THREE.MeshStandardMaterial({ color: ANATOMY_COLOR, roughness: 0.85, side: THREE.DoubleSide }),
    );
    this.scene.add(this.anatomy);

    geometry.computeBoundingSphere();
    const sphere = geometry.boundingSphere;
    if (sphere) {
      this.markerRadius = Math.max(0.3, sphere.radius * 0.006);
      this.controls.target.copy(sphere.center);
      this.camera.position
        .copy(sphere.center)
        .add(new THREE.Vector3(0, -2.2 * sphere.radius, 1.4 * sphere.radius));
      this.camera.near = sphere.radius / 100;
      this.camera.far = sphere.radius * 20;
      this.camera.updateProjectionMatrix();
    }
  }

  setMarkers(points: Vec3[]): void {
    if (this.markers) this.scene.remove(this.markers);
    this.markerPositions = points;
    const geometry = new THREE.SphereGeometry(this.markerRadius, 12, 8);
    const material = new THREE.MeshStandardMaterial({ color: MARKER_COLOR });
    this.markers = new THREE.InstancedMesh(geometry, material, points.length);
    const m = new THREE.Matrix4();
    points.forEach((p, i) => {
      m.setPosition(p[0], p[1], p[2]);
      this.markers!.setMatrixAt(i, m);
    });
    this.markers.instanceMatrix.needsUpdate = true;
    this.scene.add(this.markers);
  }

  get markerCount(): number {
    return this.markerPositions.length;
  }

  setCurrentImplant(stl: ArrayBuffer | null): void {
    if (this.current) this.scene.remove(this.current);
    this.current = null;
    if (stl) {
      this.current = new THREE.Mesh(
        stlToGeometry(stl),
        new THREE.MeshStandardMaterial({ color: IMPLANT_COLOR, metalness: 0.65, roughness: 0.3 }),
      );
      this.scene.add(this.current);
    }
  }

  addSavedImplant(stl: ArrayBuffer): void {
    const mesh = new THREE.Mesh(
      stlToGeometry(stl),
      new THREE.MeshStandardMaterial({ color: IMPLANT_COLOR, metalness: 0.5, roughness: 0.45 }),
    );
    this.saved.push(mesh);
    this.scene.add(mesh);
  }

  setBusy(busy: boolean): void {
    this.busyOverlay.style.display = busy ? "flex" : "none";
    this.controls.enabled = !busy;
  }

  hint(message: string): void {
    this.statusLine.textContent = message;
    if (this.statusTimer !== undefined) window.clearTimeout(this.statusTimer);
    this.statusTimer = window.setTimeout(() => (this.statusLine.textContent = ""), 4000);
  }

  download(name: string, data: ArrayBuffer): void {
    const blob = new Blob([data], { type: "application/octet-stream" });
    const url = URL.createObjectURL(blob);
    const a = document.createElement("a");
    a.href = url;
    a.download = name;
    a.click();
    URL.revokeObjectURL(url);
  }

  private ndc(event: PointerEvent | WheelEvent): THREE.Vector2 {
    const rect = this.canvas.getBoundingClientRect();
    return new THREE.Vector2(
      ((event.clientX - rect.left) / rect.width) * 2 - 1,
      -((event.clientY - rect.top) / rect.height) * 2 + 1,
    );
  }

  /** Surface point under the pointer, or null off the anatomy. */
  pickSurface(event: PointerEvent): Vec3 | null {
    if (!this.anatomy) return null;
    this.raycaster.setFromCamera(this.ndc(event), this.camera);
    const hits = this.raycaster.intersectObject(this.anatomy, false);
    if (hits.length === 0) return null;
    const p = hits[0].point;
    return [p.x, p.y, p.z];
  }

  /** Marker index under the pointer, or null. */
  pickMarker(event: PointerEvent): number | null {
    if (!this.markers) return null;
    this.raycaster.setFromCamera(this.ndc(event), this.camera);
    const hits = this.raycaster.intersectObject(this.markers, false);
    return hits.length > 0 && hits[0].instanceId !== undefined ? hits[0].instanceId : null;
  }

  /** Drag target: surface point if over the anatomy, else the pointer ray
   * dropped onto the camera-facing plane through the marker (the service
   * re-projects to the surface either way). */
  dragTarget(event: PointerEvent, markerIndex: number): Vec3 {
    const onSurface = this.pickSurface(event);
    if (onSurface) return onSurface;
    const origin = this.markerPositions[markerIndex];
    const plane = new THREE.Plane();
    const normal = new THREE.Vector3();
    this.camera.getWorldDirection(normal);
    plane.setFromNormalAndCoplanarPoint(normal, new THREE.Vector3(...origin));
    this.raycaster.setFromCamera(this.ndc(event), this.camera);
    const out = new THREE.Vector3();
    this.raycaster.ray.intersectPlane(plane, out);
    return [out.x, out.y, out.z];
  }
}
