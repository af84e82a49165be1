import { describe, expect, it } from "vitest";

import { FrameParser, type Frame } from "../src/protocol.js";
import { ViewState } from "../src/viewstate.js";

function frame(log: string[], scene: string[]): Frame {
  const text = [...log, "#scene", ...scene, "#end"].join("\n") + "\n";
  return new FrameParser().push(text)[0];
}

const CIRCLE = "1 1 circle 100.000000 100.000000 17.500000 0.000000 1.000000 1 0";
const CIRCLE_MOVED = "1 1 circle 400.000000 300.000000 17.500000 0.000000 1.000000 1 0";
const CIRCLE_SELECTED = "1 1 circle 100.000000 100.000000 17.500000 0.000000 1.000000 1 1";

describe("view state", () => {
  it("mirrors the latest snapshot verbatim", () => {
    const view = new ViewState();
    view.applyFrame(frame([], [CIRCLE]));
    expect(view.object(1)!.cx).toBe(100);
    view.applyFrame(frame(["100 PREVIEW_MOVED object=1 to=400.000,300.000"], [CIRCLE_MOVED]));
    expect(view.object(1)!.cx).toBe(400);
    expect(view.object(1)!.cy).toBe(300);
  });

  it("shows the ghost only between GHOST_SHOWN and GHOST_RESOLVED", () => {
    const view = new ViewState();
    view.applyFrame(frame(["10 GHOST_SHOWN at=410.000,305.000 object=1"], [CIRCLE]));
    expect(view.ghost).toEqual({ objectId: 1, x: 410, y: 305 });
    view.applyFrame(frame([], [CIRCLE]));
    expect(view.ghost).not.toBeNull(); // unrelated frames keep it
    view.applyFrame(frame(["20 GHOST_RESOLVED as=manipulation"], [CIRCLE]));
    expect(view.ghost).toBeNull();
  });

  it("tracks selection flags from the snapshot", () => {
    const view = new ViewState();
    view.applyFrame(frame(["30 SELECTION_CHANGED ids=1"], [CIRCLE_SELECTED]));
    expect(view.selection).toEqual(new Set([1]));
  });

  it("parses region previews and clears them on completion", () => {
    const view = new ViewState();
    view.applyFrame(
      frame(["5 SELECTION_PREVIEW region=poly:0.000,0.000;50.000,0.000;50.000,50.000"], [CIRCLE]),
    );
    expect(view.region).toEqual({
      kind: "poly",
      points: [
        { x: 0, y: 0 },
        { x: 50, y: 0 },
        { x: 50, y: 50 },
      ],
    });
    view.applyFrame(frame(["6 SELECTION_CHANGED ids="], [CIRCLE]));
    expect(view.region).toBeNull();
  });

  it("shows rubber band rectangles", () => {
    const view = new ViewState();
    view.applyFrame(frame(["7 RUBBER_BAND_CHANGED rect=10.000,20.000,30.000,40.000"], [CIRCLE]));
    expect(view.region).toEqual({ kind: "rect", ax: 10, ay: 20, bx: 30, by: 40 });
  });
});
