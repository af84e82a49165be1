/**
 * Native pointer input -> engine touch events: pixel-to-millimetre
 * conversion, stable touch-id mapping, monotone timestamps, and a
 * mouse-only fallback that synthesizes a second touch while a modifier
 * key is held (so bimanual gestures are testable at a desk).
 */
import { CoordinateMapper, type TouchEventWire } from "./protocol.js";

export class PointerAdapter {
  private nextTouchId = 1;
  private byPointer = new Map<number | string, number>();
  private lastT = 0;
  private bounds: { w: number; h: number };

  constructor(
    private mapper: CoordinateMapper,
    private clock: () => number,
    bounds: { w: number; h: number },
  ) {
    this.bounds = bounds;
  }

  private stamp(): number {
    const t = Math.max(Math.round(this.clock()), this.lastT);
    this.lastT = t;
    return t;
  }

  private position(px: number, py: number): { x: number; y: number } {
    const p = this.mapper.toMm(px, py);
    return {
      x: Math.min(Math.max(p.x, 0), this.bounds.w),
      y: Math.min(Math.max(p.y, 0), this.bounds.h),
    };
  }

  down(pointerId: number | string, px: number, py: number): TouchEventWire {
    if (this.byPointer.has(pointerId)) {
      throw new Error(`pointer ${pointerId} is already down`);
    }
    const id = this.nextTouchId++;
    this.byPointer.set(pointerId, id);
    const { x, y } = this.position(px, py);
    return { t: this.stamp(), id, phase: "d", x, y };
  }

  move(pointerId: number | string, px: number, py: number): TouchEventWire | null {
    const id = this.byPointer.get(pointerId);
    if (id === undefined) return null; // hover or unknown pointer
    const { x, y } = this.position(px, py);
    return { t: this.stamp(), id, phase: "m", x, y };
  }

  up(pointerId: number | string, px: number, py: number): TouchEventWire | null {
    const id = this.byPointer.get(pointerId);
    if (id === undefined) return null;
    this.byPointer.delete(pointerId);
    const { x, y } = this.position(px, py);
    return { t: this.stamp(), id, phase: "u", x, y };
  }

  get activeTouches(): number {
    return this.byPointer.size;
  }
}

const MODIFIER_POINTER = "modifier-touch";

/** Second-touch synthesis: while the modifier key is held, a click
 * places (and releases) an extra engine touch instead of moving the
 * primary one. */
export class ModifierSecondTouch {
  private downAt: { px: number; py: number } | null = null;

  constructor(private adapter: PointerAdapter) {}

  press(px: number, py: number): TouchEventWire {
    if (this.downAt) throw new Error("modifier touch already held");
    this.downAt = { px, py };
    return this.adapter.down(MODIFIER_POINTER, px, py);
  }

  release(): TouchEventWire | null {
    if (!this.downAt) return null;
    const { px, py } = this.downAt;
    this.downAt = null;
    return this.adapter.up(MODIFIER_POINTER, px, py);
  }

  get held(): boolean {
    return this.downAt !== null;
  }
}
