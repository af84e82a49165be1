/**
 * Study mode: presents generated trials in order, times them from the
 * first source contact, detects completion from the gesture log, and
 * exports the spec/result CSVs the stats tool consumes.
 *
 * The controller is transport-agnostic: the app (or a test driver)
 * forwards every engine frame here and asks which scene block to load
 * for the current trial.
 */
import {
  formatSceneLine,
  formatEventLine,
  resultsCsv,
  traceHeader,
  type Frame,
  type TouchEventWire,
  type TrialResultRow,
  type TrialSpecRow,
} from "./protocol.js";

export const DROP_TOLERANCE_MM = 17.5;
export const TRIAL_OBJECT_DIAMETER_MM = 35;

export interface TrialOutcome {
  index: number;
  timeS: number;
  passed: boolean;
  dropX: number;
  dropY: number;
  how: "COMMITTED" | "DROPPED";
}

export interface TrialRecording {
  index: number;
  traceLines: string[]; // replayable: header + event lines
  logLines: string[];
}

/** Initial scene of one trial: a single draggable circle at the source. */
export function trialSceneBlock(spec: TrialSpecRow): string[] {
  return [
    formatSceneLine({
      id: 1,
      z: 0,
      kind: "circle",
      cx: spec.sx,
      cy: spec.sy,
      params: [TRIAL_OBJECT_DIAMETER_MM / 2],
      rotation: 0,
      scale: 1,
      draggable: true,
      selected: false,
    }),
  ];
}

export class StudyController {
  private cursor = 0;
  private sourceTouched = false;
  private startMs: number | null = null;
  private trialTrace: string[] = [];
  private trialLog: string[] = [];
  readonly results: TrialResultRow[] = [];
  readonly outcomes: TrialOutcome[] = [];
  readonly recordings: TrialRecording[] = [];

  constructor(
    readonly specs: TrialSpecRow[],
    private display: { w: number; h: number } = { w: 708, h: 398 },
    private tolerance = DROP_TOLERANCE_MM,
  ) {}

  get finished(): boolean {
    return this.cursor >= this.specs.length;
  }

  get current(): TrialSpecRow | undefined {
    return this.specs[this.cursor];
  }

  get progress(): { done: number; total: number } {
    return { done: this.cursor, total: this.specs.length };
  }

  /** Engine-clock timestamp of the current trial's first source
   * contact, or null before it happens. */
  get trialStartMs(): number | null {
    return this.startMs;
  }

  /** Scene for the current trial; also resets per-trial bookkeeping. */
  sceneBlock(): string[] {
    const spec = this.current;
    if (!spec) throw new Error("study already finished");
    this.sourceTouched = false;
    this.startMs = null;
    this.trialTrace = traceHeader(this.display.w, this.display.h);
    this.trialLog = [];
    return trialSceneBlock(spec);
  }

  /** The target marker is hidden until first source contact when the
   * trial's visibility factor says so. */
  targetVisible(): boolean {
    const spec = this.current;
    if (!spec) return false;
    return spec.visible || this.sourceTouched;
  }

  /** Record an outgoing event line (for the replayable per-trial trace). */
  noteSent(e: TouchEventWire): void {
    this.trialTrace.push(formatEventLine(e));
  }

  /** Feed the engine's response frame; returns the outcome when this
   * frame completed the trial. */
  applyFrame(frame: Frame): TrialOutcome | null {
    const spec = this.current;
    if (!spec) return null;
    this.trialLog.push(...frame.rawLog);
    for (const ev of frame.log) {
      if (ev.name === "SOURCE_ACQUIRED" && !this.sourceTouched) {
        this.sourceTouched = true;
        this.startMs = ev.t;
      }
      if (ev.name === "COMMITTED" || ev.name === "DROPPED") {
        const obj = frame.scene.find((o) => o.id === 1);
        if (!obj || this.startMs === null) continue;
        const dx = obj.cx - spec.tx;
        const dy = obj.cy - spec.ty;
        const outcome: TrialOutcome = {
          index: spec.index,
          timeS: (ev.t - this.startMs) / 1000,
          passed: Math.hypot(dx, dy) <= this.tolerance,
          dropX: obj.cx,
          dropY: obj.cy,
          how: ev.name as TrialOutcome["how"],
        };
        this.outcomes.push(outcome);
        this.results.push({ index: spec.index, timeS: outcome.timeS, passed: outcome.passed });
        this.recordings.push({
          index: spec.index,
          traceLines: this.trialTrace.slice(),
          logLines: this.trialLog.slice(),
        });
        this.cursor += 1;
        return outcome;
      }
    }
    return null;
  }

  resultsCsvText(): string {
    return resultsCsv(this.results);
  }

  /** Running per-technique numbers for the HUD. */
  summary(): { technique: string; n: number; meanTimeS: number; failureRate: number }[] {
    const groups = new Map<string, { times: number[]; failures: number }>();
    const byIndex = new Map(this.specs.map((s) => [s.index, s]));
    for (const r of this.results) {
      const technique = byIndex.get(r.index)?.technique ?? "unknown";
      const g = groups.get(technique) ?? { times: [], failures: 0 };
      g.times.push(r.timeS);
      if (!r.passed) g.failures += 1;
      groups.set(technique, g);
    }
    return [...groups.entries()].map(([technique, g]) => ({
      technique,
      n: g.times.length,
      meanTimeS: g.times.reduce((a, b) => a + b, 0) / g.times.length,
      failureRate: g.failures / g.times.length,
    }));
  }
}
