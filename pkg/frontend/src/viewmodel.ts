import type { Meta, Snapshot } from "./types.js";

/** Everything one objective slider needs to draw itself. */
export interface SliderViewModel {
	name: string;
	min: number;
	max: number;
	/** Selected worst-case value (the draggable hourglass). */
	selector: number;
	/** Yellow marker: re-optimized value for the nominal scenario. */
	nsr: number;
	/** Purple marker: comparable non-robust value on the nominal front. */
	mo: number;
	/** Price of robustness for this objective: nsr - mo. */
	price: number;
	/** Price as displayed: clamped at zero when negative within tolerance. */
	displayPrice: number;
	/** True when the raw price was negative but within tolerance of zero. */
	priceClampedToZero: boolean;
	/** Upper-bound restriction handle (null = none). */
	restriction: number | null;
	/** Draggable range under the current restrictions. */
	activeMin: number;
	activeMax: number;
}

const PRICE_TOLERANCE = 1e-9;

export function buildSliderViewModels(meta: Meta, snapshot: Snapshot): SliderViewModel[] {
	return meta.objectives.map((objective) => {
		const name = objective.name;
		const nsr = snapshot.markers.nsr[name] ?? 0;
		const mo = snapshot.markers.mo[name] ?? 0;
		const price = nsr - mo;
		const clamped = price < 0 && price >= -PRICE_TOLERANCE;
		const restriction = snapshot.restrictions[name] ?? null;
		return {
			name,
			min: objective.min,
			max: objective.max,
			selector: snapshot.f_nav[name] ?? 0,
			nsr,
			mo,
			price,
			displayPrice: clamped ? 0 : price,
			priceClampedToZero: clamped,
			restriction,
			activeMin: objective.front_min,
			activeMax: restriction === null ? objective.front_max : Math.min(objective.front_max, restriction),
		};
	});
}

/** Read-only parameter slider: design/operation values at the navigated point. */
export interface ParamViewModel {
	name: string;
	kind: "hnv" | "wsv";
	/** Green hourglass: the robust solution's interpolated value. */
	robust: number;
	/** Purple marker: the comparable nominal solution's value. */
	nominal: number;
	/** Yellow marker: re-optimized operation (wait-and-see only). */
	nsr: number | null;
}

export function buildParamViewModels(meta: Meta, snapshot: Snapshot): ParamViewModel[] {
	const params: ParamViewModel[] = [];
	for (const name of meta.variables.hnv) {
		params.push({
			name,
			kind: "hnv",
			robust: snapshot.variables.hnv[name] ?? 0,
			nominal: snapshot.variables.hnv_nominal[name] ?? 0,
			nsr: null,
		});
	}
	for (const name of meta.variables.wsv) {
		params.push({
			name,
			kind: "wsv",
			robust: snapshot.variables.wsv_robust[name] ?? 0,
			nominal: snapshot.variables.wsv_nominal[name] ?? 0,
			nsr: snapshot.variables.wsv_nsr[name] ?? 0,
		});
	}
	return params;
}
