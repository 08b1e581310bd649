/** Wire types mirroring the navigation service's JSON schema. */

export interface ObjectiveMeta {
	name: string;
	min: number;
	max: number;
	front_min: number;
	front_max: number;
}

export interface Meta {
	problem_hash: string;
	tool_version: string;
	objectives: ObjectiveMeta[];
	variables: { hnv: string[]; wsv: string[] };
	points: number;
}

export interface Fronts {
	maro: number[][];
	nominal: number[][];
	nsr: number[][];
	mro: number[][] | null;
}

export interface Markers {
	nsr: Record<string, number>;
	mo: Record<string, number>;
	price: Record<string, number>;
}

export interface Snapshot {
	lambda: number[];
	f_nav: Record<string, number>;
	markers: Markers;
	alpha_star: number;
	flags: { d_zero: boolean; ray_misses_front: boolean; clamped: boolean };
	restrictions: Record<string, number | null>;
	variables: {
		hnv: Record<string, number>;
		wsv_robust: Record<string, number>;
		wsv_nsr: Record<string, number>;
		hnv_nominal: Record<string, number>;
		wsv_nominal: Record<string, number>;
	};
	revision: number;
}

export type CommandKind = "move" | "restrict" | "reset";

export interface Command {
	command: CommandKind;
	objective?: string | null;
	value?: number | null;
}

export interface OpenedSession {
	id: string;
	snapshot: Snapshot;
}
