import { describe, expect, it } from "vitest";

import { FrameParser, type Frame, type TrialSpecRow } from "../src/protocol.js";
import { StudyController } from "../src/study.js";

function spec(index: number, over: Partial<TrialSpecRow> = {}): TrialSpecRow {
  return {
    index,
    technique: "tapdrag",
    visible: true,
    area: "left_half",
    distanceMm: 100,
    direction: "right",
    sx: 100,
    sy: 200,
    tx: 200,
    ty: 200,
    ...over,
  };
}

function frame(log: string[], circleAt: { x: number; y: number }): Frame {
  const sceneLine = `1 0 circle ${circleAt.x.toFixed(6)} ${circleAt.y.toFixed(6)} 17.500000 0.000000 1.000000 1 0`;
  const text = [...log, "#scene", sceneLine, "#end"].join("\n") + "\n";
  return new FrameParser().push(text)[0];
}

describe("study controller", () => {
  it("builds a one-circle scene at the trial source", () => {
    const study = new StudyController([spec(0)]);
    const block = study.sceneBlock();
    expect(block).toHaveLength(1);
    expect(block[0]).toBe("1 0 circle 100.000000 200.000000 17.500000 0.000000 1.000000 1 0");
  });

  it("hides the target until first source contact when invisible", () => {
    const study = new StudyController([spec(0, { visible: false })]);
    study.sceneBlock();
    expect(study.targetVisible()).toBe(false);
    study.applyFrame(frame(["1000 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
    expect(study.targetVisible()).toBe(true);
  });

  it("always shows visible targets", () => {
    const study = new StudyController([spec(0, { visible: true })]);
    study.sceneBlock();
    expect(study.targetVisible()).toBe(true);
  });

  it("times from first source contact to the commit and judges the drop", () => {
    const study = new StudyController([spec(0)]);
    study.sceneBlock();
    study.applyFrame(frame(["1000 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
    const outcome = study.applyFrame(
      frame(["2500 COMMITTED ids=1 translation=105.000,0.000"], { x: 205, y: 200 }),
    );
    expect(outcome).not.toBeNull();
    expect(outcome!.timeS).toBeCloseTo(1.5, 9);
    expect(outcome!.passed).toBe(true); // 5 mm off, inside 17.5
    expect(study.finished).toBe(true);
  });

  it("fails drops beyond the tolerance radius", () => {
    const study = new StudyController([spec(0)]);
    study.sceneBlock();
    study.applyFrame(frame(["0 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
    const outcome = study.applyFrame(
      frame(["100 COMMITTED ids=1 translation=118.000,0.000"], { x: 218, y: 200 }),
    );
    expect(outcome!.passed).toBe(false);
  });

  it("accepts traditional-drag completions via DROPPED", () => {
    const study = new StudyController([spec(0, { technique: "traditional" })]);
    study.sceneBlock();
    study.applyFrame(frame(["0 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
    const outcome = study.applyFrame(
      frame(["900 DROPPED at=200.000,200.000 object=1"], { x: 200, y: 200 }),
    );
    expect(outcome!.how).toBe("DROPPED");
    expect(outcome!.passed).toBe(true);
  });

  it("walks through all trials and exports results", () => {
    const specs = [spec(0), spec(1, { technique: "traditional" }), spec(2)];
    const study = new StudyController(specs);
    for (let i = 0; i < specs.length; i++) {
      study.sceneBlock();
      study.applyFrame(frame(["0 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
      const outcome = study.applyFrame(
        frame(["1000 COMMITTED ids=1 translation=100.000,0.000"], { x: 200, y: 200 }),
      );
      expect(outcome!.index).toBe(i);
    }
    expect(study.finished).toBe(true);
    const csv = study.resultsCsvText();
    expect(csv.split("\n")[0]).toBe("index,time_s,passed");
    expect(csv.trim().split("\n")).toHaveLength(4);
    const summary = study.summary();
    expect(summary.map((s) => s.technique).sort()).toEqual(["tapdrag", "traditional"]);
  });

  it("keeps a replayable per-trial recording", () => {
    const study = new StudyController([spec(0)]);
    study.sceneBlock();
    study.noteSent({ t: 0, id: 1, phase: "d", x: 100, y: 200 });
    study.applyFrame(frame(["0 SOURCE_ACQUIRED object=1"], { x: 100, y: 200 }));
    study.noteSent({ t: 40, id: 2, phase: "d", x: 200, y: 200 });
    study.noteSent({ t: 80, id: 1, phase: "u", x: 100, y: 200 });
    const outcome = study.applyFrame(
      frame(["80 COMMITTED ids=1 translation=100.000,0.000"], { x: 200, y: 200 }),
    );
    expect(outcome).not.toBeNull();
    const rec = study.recordings[0];
    expect(rec.traceLines[0]).toBe("#display 708 398");
    expect(rec.traceLines).toContain("0 1 d 100.000 200.000");
    expect(rec.logLines).toContain("0 SOURCE_ACQUIRED object=1");
  });
});
