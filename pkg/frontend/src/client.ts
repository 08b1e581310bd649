import type { Command, Fronts, Meta, OpenedSession, Snapshot } from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the navigation service endpoints. */
export class ApiClient {
	constructor(
		private readonly baseUrl: string = "",
		private readonly fetchFn: FetchLike = (u, i) => fetch(u, i),
	) {}

	private async request<T>(path: string, init?: RequestInit): Promise<T> {
		const response = await this.fetchFn(this.baseUrl + path, init);
		if (!response.ok) {
			const body = await response.text();
			throw new Error(`${init?.method ?? "GET"} ${path} -> ${response.status}: ${body}`);
		}
		return (await response.json()) as T;
	}

	meta(): Promise<Meta> {
		return this.request<Meta>("/meta");
	}

	fronts(): Promise<Fronts> {
		return this.request<Fronts>("/fronts");
	}

	openSession(): Promise<OpenedSession> {
		return this.request<OpenedSession>("/session", { method: "POST" });
	}

	getSession(id: string): Promise<Snapshot> {
		return this.request<Snapshot>(`/session/${id}`);
	}

	command(id: string, command: Command): Promise<Snapshot> {
		return this.request<Snapshot>(`/session/${id}/command`, {
			method: "POST",
			headers: { "content-type": "application/json" },
			body: JSON.stringify(command),
		});
	}
}
