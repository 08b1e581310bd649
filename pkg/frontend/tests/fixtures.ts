import type { Fronts, Meta, Snapshot } from "../src/types.js";

export function makeMeta(): Meta {
	return {
		problem_hash: "abc",
		tool_version: "maropt 0.1.0",
		objectives: [
			{ name: "f1", min: 0, max: 2, front_min: 0.36, front_max: 2.0 },
			{ name: "f2", min: 0, max: 1.5, front_min: 0.2, front_max: 1.44 },
		],
		variables: { hnv: ["x"], wsv: ["y"] },
		points: 8,
	};
}

export function makeSnapshot(overrides: Partial<Snapshot> = {}): Snapshot {
	return {
		lambda: [0, 0, 0.5, 0.5, 0, 0, 0, 0],
		f_nav: { f1: 0.61, f2: 0.7 },
		markers: {
			nsr: { f1: 0.25, f2: 0.76 },
			mo: { f1: 0.131, f2: 0.76 },
			price: { f1: 0.119, f2: 0.0 },
		},
		alpha_star: 1.47,
		flags: { d_zero: false, ray_misses_front: false, clamped: false },
		restrictions: { f1: null, f2: null },
		variables: {
			hnv: { x: 0.45 },
			wsv_robust: { y: 0.2 },
			wsv_nsr: { y: 0.31 },
			hnv_nominal: { x: 0.4 },
			wsv_nominal: { y: 0.1 },
		},
		revision: 3,
		...overrides,
	};
}

export function makeFronts(): Fronts {
	return {
		maro: [
			[0.36, 1.44],
			[0.61, 0.7],
			[2.0, 0.2],
		],
		nominal: [
			[0.0, 1.5],
			[0.5, 0.6],
			[2.0, 0.0],
		],
		nsr: [
			[0.25, 0.76],
			[0.5, 0.55],
			[1.99, 0.01],
		],
		mro: null,
	};
}
