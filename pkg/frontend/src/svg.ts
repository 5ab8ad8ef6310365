/**
 * Minimal SVG step-plot rendering for performance profiles.
 *
 * Post-step interpolation: a series holds its pi value until the next tau,
 * matching the cumulative-fraction semantics of the profile. Axis limits
 * are [0, max tau] x [0, 1]; drawing clamps pi into [0, 1].
 */

import { StepSeries } from "./profile_data";

const WIDTH = 760;
const HEIGHT = 480;
const MARGIN = { top: 48, right: 24, bottom: 56, left: 64 };

const COLORS = [
  "#4361ee",
  "#e63946",
  "#2d6a4f",
  "#f3722c",
  "#7209b7",
  "#277da1",
  "#9c6644",
  "#343a40",
];

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function ticks(min: number, max: number, count: number): number[] {
  const range = max - min || 1;
  const rough = range / count;
  const mag = Math.pow(10, Math.floor(Math.log10(rough)));
  const step = [1, 2, 5, 10].map((m) => m * mag).find((s) => s >= rough) ?? rough;
  const out: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    out.push(Number(v.toFixed(12)));
  }
  return out;
}

export interface RenderOptions {
  title?: string;
}

export function renderSvg(series: StepSeries[], opts: RenderOptions = {}): string {
  if (series.length === 0 || series[0].points.length === 0) {
    throw new Error("nothing to plot");
  }
  const tauMax = Math.max(
    1e-9,
    ...series.flatMap((s) => s.points.map(([t]) => t))
  );
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;
  const sx = (t: number) => MARGIN.left + (t / tauMax) * plotW;
  const sy = (pi: number) =>
    MARGIN.top + (1 - Math.min(1, Math.max(0, pi))) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="sans-serif" font-size="12">`
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);

  if (opts.title) {
    parts.push(
      `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="16">` +
        `${esc(opts.title)}</text>`
    );
  }

  // frame and grid
  for (const yv of [0, 0.25, 0.5, 0.75, 1]) {
    const y = sy(yv);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}" y2="${y}" ` +
        `stroke="#ddd" stroke-width="1"/>`
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${y + 4}" text-anchor="end">${yv}</text>`
    );
  }
  for (const tv of ticks(0, tauMax, 8)) {
    const x = sx(tv);
    parts.push(
      `<line x1="${x}" y1="${HEIGHT - MARGIN.bottom}" x2="${x}" ` +
        `y2="${HEIGHT - MARGIN.bottom + 5}" stroke="#333"/>`
    );
    parts.push(
      `<text x="${x}" y="${HEIGHT - MARGIN.bottom + 20}" text-anchor="middle">` +
        `${Number(tv.toPrecision(6))}</text>`
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333"/>`
  );
  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 12}" text-anchor="middle">tau</text>`
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">fraction of problems</text>`
  );

  // step paths (post interpolation)
  series.forEach((s, idx) => {
    const color = COLORS[idx % COLORS.length];
    const cmds: string[] = [];
    s.points.forEach(([t, pi], i) => {
      const x = sx(t);
      const y = sy(pi);
      if (i === 0) {
        cmds.push(`M ${x} ${y}`);
      } else {
        cmds.push(`H ${x}`);
        cmds.push(`V ${y}`);
      }
    });
    cmds.push(`H ${sx(tauMax)}`);
    parts.push(
      `<path d="${cmds.join(" ")}" fill="none" stroke="${color}" stroke-width="2" ` +
        `data-series="${esc(s.label)}"/>`
    );
  });

  // legend
  series.forEach((s, idx) => {
    const color = COLORS[idx % COLORS.length];
    const y = MARGIN.top + 16 + idx * 18;
    const x = MARGIN.left + 12;
    parts.push(
      `<line x1="${x}" y1="${y}" x2="${x + 22}" y2="${y}" stroke="${color}" stroke-width="2"/>`
    );
    parts.push(`<text x="${x + 28}" y="${y + 4}">${esc(s.label)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n");
}
