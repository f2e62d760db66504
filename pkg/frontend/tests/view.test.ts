import { describe, expect, it } from "vitest";

import {
  hintArrowTop,
  lengthPx,
  makeCamera,
  planeTraceSide,
  planeTraceTop,
  toPx,
} from "../src/view";

describe("camera mapping", () => {
  const cam = makeCamera(800, 400, 0, 0, 100);

  it("puts the camera center at the canvas center", () => {
    expect(toPx(cam, 0, 0)).toEqual({ x: 400, y: 200 });
  });

  it("maps +x right and +y up", () => {
    const px = toPx(cam, 1, 0.5);
    expect(px.x).toBe(500);
    expect(px.y).toBe(150);
  });

  it("draws the guard circle to scale for both band endpoints", () => {
    // collapsed 0.26 m and expanded 0.425 m radii
    expect(lengthPx(cam, 0.26)).toBeCloseTo(26, 9);
    expect(lengthPx(cam, 0.425)).toBeCloseTo(42.5, 9);
    // proportionality: the on-screen ratio equals the physical ratio
    expect(lengthPx(cam, 0.425) / lengthPx(cam, 0.26)).toBeCloseTo(0.425 / 0.26, 12);
  });

  it("tracks the drone so it stays centered", () => {
    const tracking = makeCamera(800, 400, 2.5, -1.0, 100);
    expect(toPx(tracking, 2.5, -1.0)).toEqual({ x: 400, y: 200 });
  });
});

describe("contact hint arrows", () => {
  const cam = makeCamera(800, 400, 0, 0, 100);

  it("points along +x for azimuth zero", () => {
    const arrow = hintArrowTop(cam, 0, 0, 0, 0.26, 0.25);
    expect(arrow.from.x).toBeCloseTo(426, 9);
    expect(arrow.from.y).toBeCloseTo(200, 9);
    expect(arrow.to.x).toBeCloseTo(451, 9);
    expect(arrow.to.y).toBeCloseTo(200, 9);
  });

  it("points down-screen for azimuth -90 degrees", () => {
    const arrow = hintArrowTop(cam, 0, 0, -Math.PI / 2, 0.26, 0.25);
    expect(arrow.to.y).toBeGreaterThan(arrow.from.y);
    expect(arrow.to.x).toBeCloseTo(arrow.from.x, 9);
  });
});

describe("obstacle traces", () => {
  const cam = makeCamera(800, 400, 0, 0, 100);

  it("traces a vertical wall perpendicular to its normal in the top view", () => {
    const seg = planeTraceTop(cam, {
      shape: "plane",
      point: [2, 0, 0],
      normal: [-1, 0, 0],
      tag: "structure",
    });
    expect(seg).not.toBeNull();
    // wall along the y axis at x = 2 m -> vertical line at 600 px
    expect(seg!.from.x).toBeCloseTo(600, 9);
    expect(seg!.to.x).toBeCloseTo(600, 9);
    expect(seg!.from.y).not.toBe(seg!.to.y);
  });

  it("hides the ground from the top view but shows it from the side", () => {
    const ground = {
      shape: "plane" as const,
      point: [0, 0, 0],
      normal: [0, 0, 1],
      tag: "ground",
    };
    expect(planeTraceTop(cam, ground)).toBeNull();
    const side = planeTraceSide(cam, ground);
    expect(side).not.toBeNull();
    expect(side!.from.y).toBeCloseTo(side!.to.y, 9); // horizontal line
  });
});
