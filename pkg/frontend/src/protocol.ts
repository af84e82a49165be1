/**
 * Wire protocol shared with the engine: trace event lines, gesture-log
 * lines, scene snapshots, serve-mode frames and the study CSVs. All
 * recognition lives on the engine side; this module only encodes and
 * decodes text.
 */

export type Phase = "d" | "m" | "u";

export interface TouchEventWire {
  t: number; // integer milliseconds
  id: number;
  phase: Phase;
  x: number; // millimetres
  y: number;
}

export interface GestureEvent {
  t: number;
  name: string;
  args: Record<string, string>;
}

export interface SceneObjectSnapshot {
  id: number;
  z: number;
  kind: "circle" | "rectangle";
  cx: number;
  cy: number;
  params: number[]; // circle: [radius]; rectangle: [width, height]
  rotation: number;
  scale: number;
  draggable: boolean;
  selected: boolean;
}

export interface Frame {
  log: GestureEvent[];
  rawLog: string[];
  scene: SceneObjectSnapshot[];
  rawScene: string[];
  error?: string;
}

export function frameToText(frame: Frame): string {
  const lines = [...frame.rawLog];
  if (frame.error !== undefined) lines.push(`#error ${frame.error}`);
  lines.push("#scene", ...frame.rawScene, "#end");
  return lines.join("\n") + "\n";
}

/** Millimetre formatting used everywhere on the wire: 3 fraction digits. */
export function fmtMm(v: number): string {
  let r = Math.round(v * 1000) / 1000;
  if (Object.is(r, -0) || r === 0) r = 0;
  return r.toFixed(3);
}

export function formatEventLine(e: TouchEventWire): string {
  return `${Math.round(e.t)} ${e.id} ${e.phase} ${fmtMm(e.x)} ${fmtMm(e.y)}`;
}

export function traceHeader(displayW: number, displayH: number, dpi?: number): string[] {
  const lines = [`#display ${displayW} ${displayH}`];
  if (dpi !== undefined) lines.push(`#dpi ${dpi}`);
  return lines;
}

export function parseLogLine(line: string): GestureEvent {
  const fields = line.split(" ");
  if (fields.length < 2) throw new Error(`malformed gesture log line: ${line}`);
  const args: Record<string, string> = {};
  for (const field of fields.slice(2)) {
    const eq = field.indexOf("=");
    if (eq < 0) throw new Error(`malformed key=value field: ${field}`);
    args[field.slice(0, eq)] = field.slice(eq + 1);
  }
  return { t: Number(fields[0]), name: fields[1], args };
}

export function parseSceneLine(line: string): SceneObjectSnapshot {
  const f = line.trim().split(/\s+/);
  const kind = f[2];
  if (kind !== "circle" && kind !== "rectangle") {
    throw new Error(`unknown shape kind: ${kind}`);
  }
  const nParams = kind === "circle" ? 1 : 2;
  const params = f.slice(5, 5 + nParams).map(Number);
  const rest = f.slice(5 + nParams);
  return {
    id: Number(f[0]),
    z: Number(f[1]),
    kind,
    cx: Number(f[3]),
    cy: Number(f[4]),
    params,
    rotation: Number(rest[0]),
    scale: Number(rest[1]),
    draggable: rest[2] === "1",
    selected: rest[3] === "1",
  };
}

function fmt6(v: number): string {
  let r = Math.round(v * 1e6) / 1e6;
  if (Object.is(r, -0) || r === 0) r = 0;
  return r.toFixed(6);
}

export function formatSceneLine(o: SceneObjectSnapshot): string {
  const fields = [
    String(o.id),
    String(o.z),
    o.kind,
    fmt6(o.cx),
    fmt6(o.cy),
    ...o.params.map(fmt6),
    fmt6(o.rotation),
    fmt6(o.scale),
    o.draggable ? "1" : "0",
    o.selected ? "1" : "0",
  ];
  return fields.join(" ");
}

/** Incremental parser for serve-mode output: frames are gesture log
 * lines followed by `#scene`, snapshot lines and `#end`. */
export class FrameParser {
  private buffer = "";
  private logLines: string[] = [];
  private sceneLines: string[] = [];
  private error: string | undefined;
  private inScene = false;

  push(chunk: string): Frame[] {
    this.buffer += chunk;
    const frames: Frame[] = [];
    let nl: number;
    while ((nl = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, nl);
      this.buffer = this.buffer.slice(nl + 1);
      if (line === "#end") {
        frames.push(this.finish());
      } else if (line === "#scene") {
        this.inScene = true;
      } else if (line.startsWith("#error")) {
        this.error = line.slice("#error".length).trim();
      } else if (line.length > 0) {
        (this.inScene ? this.sceneLines : this.logLines).push(line);
      }
    }
    return frames;
  }

  private finish(): Frame {
    const frame: Frame = {
      rawLog: this.logLines,
      log: this.logLines.map(parseLogLine),
      scene: this.sceneLines.map(parseSceneLine),
      rawScene: this.sceneLines,
      error: this.error,
    };
    this.logLines = [];
    this.sceneLines = [];
    this.error = undefined;
    this.inScene = false;
    return frame;
  }
}

/** Pixel/millimetre mapping for a rendered canvas. */
export class CoordinateMapper {
  constructor(readonly mmPerPx: number) {
    if (!(mmPerPx > 0)) throw new Error("mmPerPx must be positive");
  }

  static fromDpi(dpi: number): CoordinateMapper {
    return new CoordinateMapper(25.4 / dpi);
  }

  toMm(px: number, py: number): { x: number; y: number } {
    return { x: px * this.mmPerPx, y: py * this.mmPerPx };
  }

  toPx(x: number, y: number): { x: number; y: number } {
    return { x: x / this.mmPerPx, y: y / this.mmPerPx };
  }
}

// --- Study CSVs -----------------------------------------------------------

export interface TrialSpecRow {
  index: number;
  technique: "tapdrag" | "traditional";
  visible: boolean;
  area: "left_half" | "right_half";
  distanceMm: number;
  direction: "up" | "down" | "left" | "right";
  sx: number;
  sy: number;
  tx: number;
  ty: number;
}

export const SPEC_HEADER = "index,technique,visible,area,distance_mm,direction,sx,sy,tx,ty";
export const RESULT_HEADER = "index,time_s,passed";

export function parseSpecsCsv(text: string): TrialSpecRow[] {
  const lines = text.trim().split("\n");
  if (lines[0] !== SPEC_HEADER) throw new Error("unexpected trial spec header");
  return lines.slice(1).map((line) => {
    const f = line.split(",");
    return {
      index: Number(f[0]),
      technique: f[1] as TrialSpecRow["technique"],
      visible: f[2] === "1",
      area: f[3] as TrialSpecRow["area"],
      distanceMm: Number(f[4]),
      direction: f[5] as TrialSpecRow["direction"],
      sx: Number(f[6]),
      sy: Number(f[7]),
      tx: Number(f[8]),
      ty: Number(f[9]),
    };
  });
}

export interface TrialResultRow {
  index: number;
  timeS: number;
  passed: boolean;
}

export function resultsCsv(rows: TrialResultRow[]): string {
  const body = rows.map((r) => `${r.index},${r.timeS.toFixed(3)},${r.passed ? "1" : "0"}`);
  return [RESULT_HEADER, ...body].join("\n") + "\n";
}
