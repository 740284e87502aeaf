import { HttpPlannerService } from "./api.js";
import { PlannerController } from "./controller.js";
import { ThreeViewer } from "./viewer.js";

const SERVICE_URL = (window as { PLATEFORGE_SERVICE?: string }).PLATEFORGE_SERVICE ?? "http://127.0.0.1:8787";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

async function boot(): Promise<void> {
  const canvas = el<HTMLCanvasElement>("viewport");
  const viewer = new ThreeViewer(canvas, el("status"), el("busy"));
  const service = new HttpPlannerService(SERVICE_URL);
  const controller = new PlannerController(service, viewer);

  const modelBox = el("models");
  const visualizeToggle = el<HTMLInputElement>("visualize");

  let models;
  try {
    models = await controller.init();
  } catch (err) {
    viewer.hint(`cannot reach the planning service at ${SERVICE_URL}: ${err}`);
    return;
  }

  for (const model of models) {
    const label = document.createElement("label");
    const radio = document.createElement("input");
    radio.type = "radio";
    radio.name = "model";
    radio.value = model.id;
    radio.checked = model.id === controller.modelId;
    radio.addEventListener("change", () => void controller.selectModel(model.id));
    label.appendChild(radio);
    label.append(` ${model.id} (${model.overall_length_mm} mm)`);
    modelBox.appendChild(label);
  }

  // ALT-click seeds (long-press on touch devices); plain pointer
  // interaction stays camera-only. Dragging a marker suspends the camera
  // and reports the drop point.
  let dragIndex: number | null = null;
  let longPress: number | undefined;
  const seedAt = (event: PointerEvent) => {
    const point = viewer.pickSurface(event);
    if (point) void controller.altClick(point);
    else viewer.hint("that click landed off the surface");
  };
  canvas.addEventListener("pointerdown", (event) => {
    if (event.altKey) {
      seedAt(event);
      event.preventDefault();
      return;
    }
    if (event.pointerType === "touch") {
      longPress = window.setTimeout(() => seedAt(event), 600);
    }
    const marker = viewer.pickMarker(event);
    if (marker !== null) {
      dragIndex = marker;
      viewer.controls.enabled = false;
      canvas.setPointerCapture(event.pointerId);
    }
  });
  const cancelLongPress = () => {
    if (longPress !== undefined) window.clearTimeout(longPress);
    longPress = undefined;
  };
  canvas.addEventListener("pointermove", cancelLongPress);
  canvas.addEventListener("pointerup", (event) => {
    cancelLongPress();
    if (dragIndex !== null) {
      void controller.dragMarker(dragIndex, viewer.dragTarget(event, dragIndex));
      dragIndex = null;
      viewer.controls.enabled = true;
      canvas.releasePointerCapture(event.pointerId);
    }
  });

  // the wheel rotates the implant once a seed exists; CTRL+wheel zooms
  // (built-in orbit zoom is off so the two can never double-fire)
  viewer.controls.enableZoom = false;
  canvas.addEventListener(
    "wheel",
    (event) => {
      event.preventDefault();
      if (event.ctrlKey || controller.baseline === null) {
        const toward = event.deltaY < 0 ? 0.9 : 1.12;
        viewer.camera.position.lerpVectors(
          viewer.controls.target,
          viewer.camera.position,
          toward,
        );
        return;
      }
      controller.wheel(event.deltaY < 0 ? 1 : -1);
    },
    { passive: false },
  );

  el<HTMLInputElement>("wheel-step").addEventListener("change", (event) => {
    const degrees = Number((event.target as HTMLInputElement).value);
    if (degrees > 0) void controller.setWheelStep(degrees);
  });

  visualizeToggle.addEventListener("change", () => {
    void controller.toggleVisualize(visualizeToggle.checked).then(() => {
      visualizeToggle.checked = controller.visualize;
    });
  });

  el("save").addEventListener("click", () => {
    void controller.saveClick().then(() => {
      visualizeToggle.checked = controller.visualize;
    });
  });
  el("export").addEventListener("click", () => void controller.exportClick("per_implant"));
  el("export-combined").addEventListener("click", () => void controller.exportClick("combined"));
}

void boot();
