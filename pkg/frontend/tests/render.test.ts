import { describe, expect, it } from "vitest";

import { renderFrontPlot, renderParamSlider, renderSlider } from "../src/render.js";
import { buildParamViewModels, buildSliderViewModels } from "../src/viewmodel.js";
import { makeFronts, makeMeta, makeSnapshot } from "./fixtures.js";

describe("slider rendering", () => {
	it("renders all markers and the selector at snapshot-derived positions", () => {
		const meta = makeMeta();
		const vm = buildSliderViewModels(meta, makeSnapshot())[0]!;
		const svg = renderSlider(vm);
		expect(svg).toContain('data-role="selector"');
		expect(svg).toContain('data-role="marker-nsr"');
		expect(svg).toContain('data-role="marker-mo"');
		// Marker x positions are affine in the marker values; check ordering.
		const nsrX = Number(/marker-nsr" cx="([\d.]+)"/.exec(svg)?.[1]);
		const moX = Number(/marker-mo" cx="([\d.]+)"/.exec(svg)?.[1]);
		expect(moX).toBeLessThan(nsrX); // mo = 0.131 < nsr = 0.25
		expect(svg).toContain("price 0.11900");
	});

	it("is idempotent for identical snapshots", () => {
		const meta = makeMeta();
		const snapshot = makeSnapshot();
		const a = renderSlider(buildSliderViewModels(meta, snapshot)[0]!);
		const b = renderSlider(buildSliderViewModels(meta, snapshot)[0]!);
		expect(a).toBe(b);
	});

	it("draws the restriction handle and greys the excluded region", () => {
		const meta = makeMeta();
		const vm = buildSliderViewModels(
			meta,
			makeSnapshot({ restrictions: { f1: 1.0, f2: null } }),
		)[0]!;
		const svg = renderSlider(vm);
		expect(svg).toContain('data-role="restriction"');
		const active = /data-role="active-range" x1="([\d.]+)" y1="\d+" x2="([\d.]+)"/.exec(svg);
		expect(active).not.toBeNull();
		// The active range must end at the restriction, left of full width.
		expect(Number(active![2])).toBeLessThan(540);
	});

	it("annotates clamped prices", () => {
		const meta = makeMeta();
		const vm = buildSliderViewModels(
			meta,
			makeSnapshot({
				markers: { nsr: { f1: 0.5, f2: 0.3 }, mo: { f1: 0.5 + 1e-10, f2: 0.3 }, price: { f1: 0, f2: 0 } },
			}),
		)[0]!;
		expect(renderSlider(vm)).toContain("clamped to 0 within tolerance");
	});
});

describe("parameter rendering", () => {
	it("shows hourglass plus nominal (and re-optimized for operations)", () => {
		const meta = makeMeta();
		const params = buildParamViewModels(meta, makeSnapshot());
		const hnvSvg = renderParamSlider(params[0]!, 0, 1);
		expect(hnvSvg).toContain('data-role="selector"');
		expect(hnvSvg).toContain('data-role="marker-nominal"');
		expect(hnvSvg).not.toContain('data-role="marker-nsr"');
		const wsvSvg = renderParamSlider(params[1]!, 0, 1);
		expect(wsvSvg).toContain('data-role="marker-nsr"');
		expect(wsvSvg).toContain("interpolated, not re-optimized");
	});
});

describe("front plot", () => {
	it("draws both fronts, re-optimized points, and the improvement ray", () => {
		const svg = renderFrontPlot(makeFronts(), makeSnapshot(), ["f1", "f2"]);
		expect(svg).toContain('data-role="front-nominal"');
		expect(svg).toContain('data-role="front-maro"');
		expect(svg).toContain('data-role="ray"');
		expect((svg.match(/data-role="nsr-point"/g) ?? []).length).toBe(3);
		expect(svg).toContain('data-role="nav-point"');
	});
});
