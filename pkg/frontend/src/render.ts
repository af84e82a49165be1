/**
 * Canvas rendering: objects in z order with rotation and scale,
 * selection outlines, translucent ghost previews, region overlays and
 * the study HUD. Pure drawing; all poses come from the view state.
 */
import type { CoordinateMapper, SceneObjectSnapshot } from "./protocol.js";
import type { ViewState } from "./viewstate.js";

export interface StudyHud {
  trialLabel: string;
  timerS: number | null;
  source: { x: number; y: number } | null;
  target: { x: number; y: number } | null;
  summaryLines: string[];
}

const OBJECT_FILL = "#4a7dbf";
const SELECTED_STROKE = "#ffb300";
const GHOST_ALPHA = 0.35;

function drawShape(
  ctx: CanvasRenderingContext2D,
  mapper: CoordinateMapper,
  o: SceneObjectSnapshot,
  cx: number,
  cy: number,
  alpha: number,
): void {
  const c = mapper.toPx(cx, cy);
  ctx.save();
  ctx.globalAlpha = alpha;
  ctx.translate(c.x, c.y);
  ctx.rotate(o.rotation);
  ctx.fillStyle = OBJECT_FILL;
  if (o.kind === "circle") {
    const r = (o.params[0] * o.scale) / mapper.mmPerPx;
    ctx.beginPath();
    ctx.arc(0, 0, r, 0, Math.PI * 2);
    ctx.fill();
  } else {
    const w = (o.params[0] * o.scale) / mapper.mmPerPx;
    const h = (o.params[1] * o.scale) / mapper.mmPerPx;
    ctx.fillRect(-w / 2, -h / 2, w, h);
  }
  if (o.selected && alpha === 1) {
    ctx.strokeStyle = SELECTED_STROKE;
    ctx.lineWidth = 3;
    ctx.setLineDash([6, 4]);
    if (o.kind === "circle") {
      const r = (o.params[0] * o.scale) / mapper.mmPerPx + 4;
      ctx.beginPath();
      ctx.arc(0, 0, r, 0, Math.PI * 2);
      ctx.stroke();
    } else {
      const w = (o.params[0] * o.scale) / mapper.mmPerPx + 8;
      const h = (o.params[1] * o.scale) / mapper.mmPerPx + 8;
      ctx.strokeRect(-w / 2, -h / 2, w, h);
    }
  }
  ctx.restore();
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  mapper: CoordinateMapper,
  size: { w: number; h: number },
  hud?: StudyHud,
): void {
  ctx.clearRect(0, 0, size.w, size.h);
  ctx.fillStyle = "#f4f2ee";
  ctx.fillRect(0, 0, size.w, size.h);

  const ordered = [...view.objects].sort((a, b) => a.z - b.z || a.id - b.id);
  for (const o of ordered) {
    drawShape(ctx, mapper, o, o.cx, o.cy, 1);
  }

  // ghost preview: translucent copy at the pending destination, the
  // original stays where it is
  if (view.ghost) {
    const o = view.object(view.ghost.objectId);
    if (o) drawShape(ctx, mapper, o, view.ghost.x, view.ghost.y, GHOST_ALPHA);
  }

  if (view.region) {
    ctx.save();
    ctx.strokeStyle = "#777";
    ctx.setLineDash([4, 4]);
    ctx.beginPath();
    if (view.region.kind === "rect") {
      const a = mapper.toPx(view.region.ax, view.region.ay);
      const b = mapper.toPx(view.region.bx, view.region.by);
      ctx.strokeRect(Math.min(a.x, b.x), Math.min(a.y, b.y), Math.abs(b.x - a.x), Math.abs(b.y - a.y));
    } else {
      view.region.points.forEach((p, i) => {
        const px = mapper.toPx(p.x, p.y);
        if (i === 0) ctx.moveTo(px.x, px.y);
        else ctx.lineTo(px.x, px.y);
      });
      ctx.closePath();
      ctx.stroke();
    }
    ctx.restore();
  }

  if (hud) renderHud(ctx, mapper, size, hud);
}

function renderHud(
  ctx: CanvasRenderingContext2D,
  mapper: CoordinateMapper,
  size: { w: number; h: number },
  hud: StudyHud,
): void {
  ctx.save();
  if (hud.source) {
    const p = mapper.toPx(hud.source.x, hud.source.y);
    ctx.strokeStyle = "#2a7";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 24, 0, Math.PI * 2);
    ctx.stroke();
  }
  if (hud.target) {
    const p = mapper.toPx(hud.target.x, hud.target.y);
    ctx.strokeStyle = "#c33";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.arc(p.x, p.y, 24, 0, Math.PI * 2);
    ctx.moveTo(p.x - 10, p.y);
    ctx.lineTo(p.x + 10, p.y);
    ctx.moveTo(p.x, p.y - 10);
    ctx.lineTo(p.x, p.y + 10);
    ctx.stroke();
  }
  ctx.fillStyle = "#222";
  ctx.font = "14px sans-serif";
  let y = 20;
  const lines = [hud.trialLabel];
  if (hud.timerS !== null) lines.push(`t = ${hud.timerS.toFixed(2)} s`);
  lines.push(...hud.summaryLines);
  for (const line of lines) {
    ctx.fillText(line, 10, y);
    y += 18;
  }
  ctx.restore();
}
