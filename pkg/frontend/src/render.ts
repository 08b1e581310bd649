import type { Fronts, Snapshot } from "./types.js";
import type { ParamViewModel, SliderViewModel } from "./viewmodel.js";

/**
 * Pure SVG-string renderers.  Keeping markup generation free of DOM and
 * state makes the render path trivially testable and idempotent; the DOM
 * layer only assigns innerHTML and wires pointer events.
 */

export const SLIDER_WIDTH = 560;
export const SLIDER_HEIGHT = 56;
const TRACK_Y = 34;
const TRACK_X0 = 20;
const TRACK_X1 = SLIDER_WIDTH - 20;

export const COLORS = {
	selector: "#2e9e4f", // green hourglass
	nsr: "#e6b800", // yellow: re-optimized for the nominal scenario
	mo: "#8e44ad", // purple: comparable nominal-front solution
	excluded: "#d0d0d0",
	track: "#444",
};

function toX(value: number, min: number, max: number): number {
	const span = max - min || 1;
	const frac = (value - min) / span;
	return TRACK_X0 + Math.min(Math.max(frac, 0), 1) * (TRACK_X1 - TRACK_X0);
}

function fmt(value: number): string {
	return Number.isFinite(value) ? value.toPrecision(5) : "-";
}

export function hourglassPath(x: number, y: number, size = 7): string {
	return `M ${x - size} ${y - size} L ${x + size} ${y - size} L ${x - size} ${y + size} L ${x + size} ${y + size} Z`;
}

export function renderSlider(vm: SliderViewModel): string {
	const selX = toX(vm.selector, vm.min, vm.max);
	const nsrX = toX(vm.nsr, vm.min, vm.max);
	const moX = toX(vm.mo, vm.min, vm.max);
	const activeX0 = toX(vm.activeMin, vm.min, vm.max);
	const activeX1 = toX(vm.activeMax, vm.min, vm.max);
	const parts = [
		`<svg class="slider" data-objective="${vm.name}" width="${SLIDER_WIDTH}" height="${SLIDER_HEIGHT}" viewBox="0 0 ${SLIDER_WIDTH} ${SLIDER_HEIGHT}">`,
		`<text x="${TRACK_X0}" y="12" class="label">${vm.name} = ${fmt(vm.selector)}</text>`,
		`<text x="${TRACK_X1}" y="12" text-anchor="end" class="price" data-role="price">` +
			`price ${fmt(vm.displayPrice)}${vm.priceClampedToZero ? " (clamped to 0 within tolerance)" : ""}</text>`,
		`<line x1="${TRACK_X0}" y1="${TRACK_Y}" x2="${TRACK_X1}" y2="${TRACK_Y}" stroke="${COLORS.excluded}" stroke-width="6" />`,
		`<line data-role="active-range" x1="${activeX0}" y1="${TRACK_Y}" x2="${activeX1}" y2="${TRACK_Y}" stroke="${COLORS.track}" stroke-width="6" />`,
		// price bracket between the two markers
		`<line data-role="price-span" x1="${moX}" y1="${TRACK_Y - 14}" x2="${nsrX}" y2="${TRACK_Y - 14}" stroke="${COLORS.nsr}" stroke-dasharray="3 2" />`,
		`<circle data-role="marker-mo" cx="${moX}" cy="${TRACK_Y - 14}" r="5" fill="${COLORS.mo}" />`,
		`<circle data-role="marker-nsr" cx="${nsrX}" cy="${TRACK_Y - 14}" r="5" fill="${COLORS.nsr}" />`,
		`<path data-role="selector" d="${hourglassPath(selX, TRACK_Y)}" fill="${COLORS.selector}" />`,
	];
	if (vm.restriction !== null) {
		const rx = toX(vm.restriction, vm.min, vm.max);
		parts.push(
			`<path data-role="restriction" d="M ${rx} ${TRACK_Y - 10} L ${rx} ${TRACK_Y + 10}" stroke="#c0392b" stroke-width="3" />`,
		);
	}
	parts.push("</svg>");
	return parts.join("");
}

export function renderParamSlider(vm: ParamViewModel, min: number, max: number): string {
	const robustX = toX(vm.robust, min, max);
	const nominalX = toX(vm.nominal, min, max);
	const parts = [
		`<svg class="param" data-param="${vm.name}" width="${SLIDER_WIDTH}" height="${SLIDER_HEIGHT}" viewBox="0 0 ${SLIDER_WIDTH} ${SLIDER_HEIGHT}">`,
		`<text x="${TRACK_X0}" y="12" class="label">${vm.name} = ${fmt(vm.robust)} (interpolated, not re-optimized)</text>`,
		`<line x1="${TRACK_X0}" y1="${TRACK_Y}" x2="${TRACK_X1}" y2="${TRACK_Y}" stroke="${COLORS.track}" stroke-width="4" />`,
		`<path data-role="marker-nominal" d="M ${nominalX} ${TRACK_Y - 10} L ${nominalX - 6} ${TRACK_Y - 18} L ${nominalX + 6} ${TRACK_Y - 18} Z" fill="${COLORS.mo}" />`,
	];
	if (vm.nsr !== null) {
		const nsrX = toX(vm.nsr, min, max);
		parts.push(
			`<path data-role="marker-nsr" d="M ${nsrX} ${TRACK_Y - 10} L ${nsrX - 6} ${TRACK_Y - 18} L ${nsrX + 6} ${TRACK_Y - 18} Z" fill="${COLORS.nsr}" />`,
		);
	}
	parts.push(`<path data-role="selector" d="${hourglassPath(robustX, TRACK_Y)}" fill="${COLORS.selector}" />`);
	parts.push("</svg>");
	return parts.join("");
}

export const PLOT_SIZE = 420;

/** Bi-objective plot: nominal front, worst-case front, re-optimized points,
 * and the improvement ray from the navigated point to the nominal front. */
export function renderFrontPlot(fronts: Fronts, snapshot: Snapshot, names: [string, string]): string {
	const all = fronts.maro.concat(fronts.nominal, fronts.nsr);
	const mins = [Math.min(...all.map((p) => p[0] ?? 0)), Math.min(...all.map((p) => p[1] ?? 0))];
	const maxs = [Math.max(...all.map((p) => p[0] ?? 0)), Math.max(...all.map((p) => p[1] ?? 0))];
	const pad = 0.06;
	const sx = (v: number) =>
		40 + ((v - mins[0]!) / (maxs[0]! - mins[0]! || 1)) * (PLOT_SIZE - 60) * (1 - pad);
	const sy = (v: number) =>
		PLOT_SIZE - 30 - ((v - mins[1]!) / (maxs[1]! - mins[1]! || 1)) * (PLOT_SIZE - 60) * (1 - pad);
	const poly = (points: number[][]) =>
		points.map((p) => `${sx(p[0]!)},${sy(p[1]!)}`).join(" ");
	const navX = sx(snapshot.f_nav[names[0]] ?? 0);
	const navY = sy(snapshot.f_nav[names[1]] ?? 0);
	const nsrX = sx(snapshot.markers.nsr[names[0]] ?? 0);
	const nsrY = sy(snapshot.markers.nsr[names[1]] ?? 0);
	const moX = sx(snapshot.markers.mo[names[0]] ?? 0);
	const moY = sy(snapshot.markers.mo[names[1]] ?? 0);
	const parts = [
		`<svg class="plot" width="${PLOT_SIZE}" height="${PLOT_SIZE}" viewBox="0 0 ${PLOT_SIZE} ${PLOT_SIZE}">`,
		`<polyline data-role="front-nominal" points="${poly(fronts.nominal)}" fill="none" stroke="${COLORS.selector}" stroke-width="1.5" />`,
		`<polyline data-role="front-maro" points="${poly(fronts.maro)}" fill="none" stroke="#e67e22" stroke-width="1.5" />`,
		fronts.nsr
			.map(
				(p, i) =>
					`<circle data-role="nsr-point" data-index="${i}" cx="${sx(p[0]!)}" cy="${sy(p[1]!)}" r="3" fill="${COLORS.nsr}" />`,
			)
			.join(""),
		`<line data-role="ray" x1="${navX}" y1="${navY}" x2="${moX}" y2="${moY}" stroke="${COLORS.mo}" stroke-dasharray="4 3" />`,
		`<circle data-role="nav-point" cx="${navX}" cy="${navY}" r="5" fill="#e67e22" />`,
		`<circle data-role="nsr-marker" cx="${nsrX}" cy="${nsrY}" r="4" fill="${COLORS.nsr}" />`,
		`<circle data-role="mo-marker" cx="${moX}" cy="${moY}" r="4" fill="${COLORS.mo}" />`,
		`<text x="40" y="14" class="label">${names[1]} vs ${names[0]}</text>`,
		"</svg>",
	];
	return parts.join("");
}
