/**
 * Browser entry: a photo-arranging sandbox plus an interactive study
 * mode, with every pose change coming back from the engine. Hold Alt
 * and click to synthesize the second touch with a mouse.
 */
import {
  CoordinateMapper,
  FrameParser,
  formatEventLine,
  formatSceneLine,
  parseSpecsCsv,
  traceHeader,
  type Frame,
  type SceneObjectSnapshot,
  type TouchEventWire,
  type TrialSpecRow,
} from "./protocol.js";
import { PointerAdapter, ModifierSecondTouch } from "./pointer.js";
import { renderScene, type StudyHud } from "./render.js";
import { StudyController } from "./study.js";
import { ViewState } from "./viewstate.js";

const DISPLAY = { w: 708, h: 398 };

class HttpEngineSession {
  private constructor(private id: string) {}

  static async create(policy: string): Promise<HttpEngineSession> {
    const res = await fetch(`/api/session?policy=${encodeURIComponent(policy)}`, { method: "POST" });
    const { id } = await res.json();
    return new HttpEngineSession(id);
  }

  private async frame(res: Response): Promise<Frame> {
    const text = await res.text();
    const frames = new FrameParser().push(text);
    if (frames.length !== 1) throw new Error(`expected one frame, got ${frames.length}`);
    return frames[0];
  }

  async send(line: string): Promise<Frame> {
    return this.frame(
      await fetch(`/api/session/${this.id}/event`, { method: "POST", body: line }),
    );
  }

  async loadScene(lines: string[]): Promise<Frame> {
    return this.frame(
      await fetch(`/api/session/${this.id}/scene`, { method: "POST", body: lines.join("\n") }),
    );
  }

  async close(): Promise<void> {
    await fetch(`/api/session/${this.id}`, { method: "DELETE" });
  }
}

function sandboxScene(): string[] {
  const photos: SceneObjectSnapshot[] = [];
  for (let i = 0; i < 6; i++) {
    photos.push({
      id: i + 1,
      z: i,
      kind: i % 2 ? "circle" : "rectangle",
      cx: 120 + (i % 3) * 180,
      cy: 110 + Math.floor(i / 3) * 160,
      params: i % 2 ? [45] : [120, 80],
      rotation: 0,
      scale: 1,
      draggable: true,
      selected: false,
    });
  }
  return photos.map(formatSceneLine);
}

async function main(): Promise<void> {
  const canvas = document.getElementById("canvas") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const status = document.getElementById("status")!;
  const policySelect = document.getElementById("policy") as HTMLSelectElement;
  const seedInput = document.getElementById("seed") as HTMLInputElement;

  const mapper = new CoordinateMapper(DISPLAY.w / canvas.width);
  const view = new ViewState();
  const t0 = performance.now();
  const clockNow = () => performance.now() - t0;
  const adapter = new PointerAdapter(mapper, clockNow, DISPLAY);
  const modifier = new ModifierSecondTouch(adapter);

  let engine = await HttpEngineSession.create(policySelect.value);
  let study: StudyController | null = null;
  let capturedTrace: string[] = traceHeader(DISPLAY.w, DISPLAY.h);

  function hud(): StudyHud | undefined {
    if (!study) return undefined;
    const spec = study.current;
    const { done, total } = study.progress;
    const started = study.trialStartMs;
    const summaryLines = study
      .summary()
      .map((s) => `${s.technique}: n=${s.n} mean=${s.meanTimeS.toFixed(2)}s fail=${(s.failureRate * 100).toFixed(1)}%`);
    if (!spec) return { trialLabel: `study finished (${total} trials)`, timerS: null, source: null, target: null, summaryLines };
    return {
      trialLabel: `trial ${done + 1}/${total}: ${spec.technique} ${spec.distanceMm} mm ${spec.direction}`,
      timerS: started === null ? null : (clockNow() - started) / 1000,
      source: { x: spec.sx, y: spec.sy },
      target: study.targetVisible() ? { x: spec.tx, y: spec.ty } : null,
      summaryLines,
    };
  }

  function redraw(): void {
    renderScene(ctx, view, mapper, { w: canvas.width, h: canvas.height }, hud());
  }

  async function forward(e: TouchEventWire | null): Promise<void> {
    if (!e) return;
    const line = formatEventLine(e);
    capturedTrace.push(line);
    study?.noteSent(e);
    const frame = await engine.send(line);
    view.applyFrame(frame);
    if (study) {
      const outcome = study.applyFrame(frame);
      if (outcome) {
        status.textContent = `trial ${outcome.index}: ${outcome.passed ? "pass" : "FAIL"} in ${outcome.timeS.toFixed(2)} s`;
        await nextTrial();
      }
    }
    redraw();
  }

  async function nextTrial(): Promise<void> {
    if (!study) return;
    if (study.finished) {
      downloadText("results.csv", study.resultsCsvText());
      status.textContent = "study finished; results downloaded";
      study = null;
      return;
    }
    const frame = await engine.loadScene(study.sceneBlock());
    view.applyFrame(frame);
    redraw();
  }

  canvas.addEventListener("pointerdown", (e) => {
    canvas.setPointerCapture(e.pointerId);
    if (e.altKey && !modifier.held) {
      void forward(modifier.press(e.offsetX, e.offsetY));
    } else {
      void forward(adapter.down(e.pointerId, e.offsetX, e.offsetY));
    }
  });
  canvas.addEventListener("pointermove", (e) => {
    void forward(adapter.move(e.pointerId, e.offsetX, e.offsetY));
  });
  canvas.addEventListener("pointerup", (e) => {
    void forward(adapter.up(e.pointerId, e.offsetX, e.offsetY));
  });
  window.addEventListener("keyup", (e) => {
    if (!e.altKey) void forward(modifier.release());
  });

  document.getElementById("reset")!.addEventListener("click", async () => {
    study = null;
    capturedTrace = traceHeader(DISPLAY.w, DISPLAY.h);
    const frame = await engine.loadScene(sandboxScene());
    view.applyFrame(frame);
    redraw();
  });

  document.getElementById("start-study")!.addEventListener("click", async () => {
    const seed = seedInput.value || "7";
    const res = await fetch(`/api/study?seed=${encodeURIComponent(seed)}`);
    const specs: TrialSpecRow[] = parseSpecsCsv(await res.text());
    study = new StudyController(specs, DISPLAY);
    status.textContent = `study: ${specs.length} trials`;
    await nextTrial();
  });

  document.getElementById("download-trace")!.addEventListener("click", () => {
    downloadText("session.trace", capturedTrace.join("\n") + "\n");
  });

  document.getElementById("policy")!.addEventListener("change", async () => {
    await engine.close();
    engine = await HttpEngineSession.create(policySelect.value);
    const frame = await engine.loadScene(sandboxScene());
    view.applyFrame(frame);
    redraw();
  });

  const frame = await engine.loadScene(sandboxScene());
  view.applyFrame(frame);
  redraw();
  setInterval(redraw, 100); // keep the HUD timer live
}

function downloadText(name: string, text: string): void {
  const a = document.createElement("a");
  a.href = URL.createObjectURL(new Blob([text], { type: "text/plain" }));
  a.download = name;
  a.click();
  URL.revokeObjectURL(a.href);
}

void main();
