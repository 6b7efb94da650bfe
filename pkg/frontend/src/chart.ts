// Inline SVG progress chart: accepted-count line, plus a recall line
// whenever the corpus is labeled. Pure string builder so it is testable
// without a DOM.
import type { HistoryPoint } from "./state.js";

const W = 360;
const H = 140;
const PAD = 24;

function x(iteration: number, maxIteration: number): number {
  if (maxIteration <= 1) return PAD;
  return PAD + ((iteration - 1) / (maxIteration - 1)) * (W - 2 * PAD);
}

function y(value: number, maxValue: number): number {
  if (maxValue <= 0) return H - PAD;
  return H - PAD - (value / maxValue) * (H - 2 * PAD);
}

function polyline(points: Array<[number, number]>, cls: string): string {
  const attr = points.map(([px, py]) => `${px.toFixed(1)},${py.toFixed(1)}`).join(" ");
  return `<polyline class="${cls}" fill="none" points="${attr}" />`;
}

export function progressChartSvg(history: HistoryPoint[]): string {
  if (history.length === 0) {
    return (
      `<svg class="chart" viewBox="0 0 ${W} ${H}" role="img">` +
      `<text class="chart-empty" x="${W / 2}" y="${H / 2}" text-anchor="middle">` +
      "no iterations yet</text></svg>"
    );
  }
  const maxIteration = history[history.length - 1].iteration;
  const maxAccepted = Math.max(1, ...history.map((p) => p.acceptedTotal));
  const parts: string[] = [
    `<svg class="chart" viewBox="0 0 ${W} ${H}" role="img">`,
    `<line class="axis" x1="${PAD}" y1="${H - PAD}" x2="${W - PAD}" y2="${H - PAD}" />`,
    `<line class="axis" x1="${PAD}" y1="${PAD}" x2="${PAD}" y2="${H - PAD}" />`,
  ];
  parts.push(
    polyline(
      history.map((p) => [x(p.iteration, maxIteration), y(p.acceptedTotal, maxAccepted)]),
      "line-accepted",
    ),
  );
  const labeled = history.filter((p) => p.recall !== null);
  if (labeled.length > 0) {
    parts.push(
      polyline(
        labeled.map((p) => [x(p.iteration, maxIteration), y(p.recall as number, 1)]),
        "line-recall",
      ),
    );
  }
  const last = history[history.length - 1];
  parts.push(
    `<text class="chart-label" x="${W - PAD}" y="${PAD - 8}" text-anchor="end">` +
      `accepted ${last.acceptedTotal}` +
      (last.recall !== null ? `, recall ${(last.recall * 100).toFixed(0)}%` : "") +
      "</text>",
  );
  parts.push("</svg>");
  return parts.join("");
}
