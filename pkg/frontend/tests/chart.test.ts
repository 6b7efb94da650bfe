import { describe, expect, it } from "vitest";
import { progressChartSvg } from "../src/chart.js";

describe("progressChartSvg", () => {
  it("renders a placeholder before the first iteration", () => {
    const svg = progressChartSvg([]);
    expect(svg).toContain("no iterations yet");
    expect(svg).not.toContain("polyline");
  });

  it("plots the accepted series across the full width", () => {
    const svg = progressChartSvg([
      { iteration: 1, acceptedTotal: 0, recall: null },
      { iteration: 2, acceptedTotal: 5, recall: null },
      { iteration: 3, acceptedTotal: 10, recall: null },
    ]);
    // viewBox is 360x140 with 24px padding: x spans 24..336, max value sits at y=24
    expect(svg).toContain('class="line-accepted"');
    expect(svg).toContain("24.0,116.0 180.0,70.0 336.0,24.0");
    expect(svg).not.toContain('class="line-recall"');
    expect(svg).toContain("accepted 10");
  });

  it("adds the recall series only for labeled sessions", () => {
    const svg = progressChartSvg([
      { iteration: 1, acceptedTotal: 4, recall: 0.5 },
      { iteration: 2, acceptedTotal: 8, recall: 1.0 },
    ]);
    expect(svg).toContain('class="line-recall"');
    // recall scales against 1.0: 0.5 -> midpoint y=70, 1.0 -> top y=24
    expect(svg).toContain("24.0,70.0 336.0,24.0");
    expect(svg).toContain("recall 100%");
  });
});
