/**
 * Render model. Object poses always mirror the latest engine snapshot;
 * the app never moves anything locally. Overlays (ghost, selection
 * preview, rubber band) are derived from the gesture log.
 */
import type { Frame, GestureEvent, SceneObjectSnapshot } from "./protocol.js";

export interface GhostOverlay {
  objectId: number;
  x: number;
  y: number;
}

export type RegionOverlay =
  | { kind: "rect"; ax: number; ay: number; bx: number; by: number }
  | { kind: "poly"; points: { x: number; y: number }[] };

function parsePoint(s: string): { x: number; y: number } {
  const [x, y] = s.split(",").map(Number);
  return { x, y };
}

function parseRegion(value: string): RegionOverlay {
  if (value.startsWith("rect:")) {
    const [a, b, c, d] = value.slice(5).split(",").map(Number);
    return { kind: "rect", ax: a, ay: b, bx: c, by: d };
  }
  if (value.startsWith("poly:")) {
    return { kind: "poly", points: value.slice(5).split(";").map(parsePoint) };
  }
  throw new Error(`unknown region encoding: ${value}`);
}

export class ViewState {
  objects: SceneObjectSnapshot[] = [];
  ghost: GhostOverlay | null = null;
  region: RegionOverlay | null = null;
  lastEvents: GestureEvent[] = [];

  applyFrame(frame: Frame): void {
    this.objects = frame.scene;
    this.lastEvents = frame.log;
    for (const ev of frame.log) {
      switch (ev.name) {
        case "GHOST_SHOWN": {
          const at = parsePoint(ev.args.at);
          this.ghost = { objectId: Number(ev.args.object), x: at.x, y: at.y };
          break;
        }
        case "GHOST_RESOLVED":
          this.ghost = null;
          break;
        case "SELECTION_PREVIEW":
          this.region = parseRegion(ev.args.region);
          break;
        case "RUBBER_BAND_CHANGED": {
          const [ax, ay, bx, by] = ev.args.rect.split(",").map(Number);
          this.region = { kind: "rect", ax, ay, bx, by };
          break;
        }
        case "SELECTION_CHANGED":
        case "BACKGROUND_TAP":
          this.region = null;
          break;
      }
    }
  }

  get selection(): Set<number> {
    return new Set(this.objects.filter((o) => o.selected).map((o) => o.id));
  }

  object(id: number): SceneObjectSnapshot | undefined {
    return this.objects.find((o) => o.id === id);
  }
}
