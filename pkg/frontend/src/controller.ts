import type { Command, Snapshot } from "./types.js";

export type SendFn = (command: Command) => Promise<Snapshot>;

export interface ControllerOptions {
	/** Drag events are coalesced for this long before one command fires. */
	debounceMs?: number;
	onSnapshot?: (snapshot: Snapshot) => void;
	onError?: (error: unknown) => void;
}

/**
 * Serializes slider interaction into service commands.
 *
 * The client is deliberately dumb: it never computes marker values, it only
 * forwards the latest user intent and renders whatever snapshot the service
 * returns.  Drag streams are debounced (one command per settle), at most one
 * command is in flight, and each outgoing command gets a sequence number so
 * a response that arrives after a newer one has been applied is dropped.
 */
export class SessionController {
	private readonly debounceMs: number;
	private readonly onSnapshot: (snapshot: Snapshot) => void;
	private readonly onError: (error: unknown) => void;

	private timer: ReturnType<typeof setTimeout> | null = null;
	private pendingMove: { objective: string; value: number } | null = null;
	private queued: Command | null = null;
	private inFlight = false;
	private nextSeq = 1;
	private appliedSeq = 0;
	private _snapshot: Snapshot | null = null;
	private _commandsSent = 0;

	constructor(private readonly send: SendFn, options: ControllerOptions = {}) {
		this.debounceMs = options.debounceMs ?? 30;
		this.onSnapshot = options.onSnapshot ?? (() => undefined);
		this.onError = options.onError ?? (() => undefined);
	}

	get snapshot(): Snapshot | null {
		return this._snapshot;
	}

	get commandsSent(): number {
		return this._commandsSent;
	}

	/** Seed the controller with the snapshot returned when opening the session. */
	accept(snapshot: Snapshot): void {
		this._snapshot = snapshot;
		this.onSnapshot(snapshot);
	}

	/** Drag handler: remembers only the latest target, sends after settle. */
	setTarget(objective: string, value: number): void {
		this.pendingMove = { objective, value };
		if (this.timer !== null) {
			clearTimeout(this.timer);
		}
		this.timer = setTimeout(() => {
			this.timer = null;
			this.flush();
		}, this.debounceMs);
	}

	/** Send the pending drag target immediately (e.g. on pointer-up). */
	flush(): void {
		if (this.timer !== null) {
			clearTimeout(this.timer);
			this.timer = null;
		}
		if (this.pendingMove === null) {
			return;
		}
		const { objective, value } = this.pendingMove;
		this.pendingMove = null;
		this.dispatch({ command: "move", objective, value });
	}

	restrict(objective: string, value: number | null): void {
		this.dispatch({ command: "restrict", objective, value });
	}

	reset(): void {
		this.dispatch({ command: "reset" });
	}

	/**
	 * Issue a command now.  While one is in flight, only the latest further
	 * command is kept; it goes out when the response lands.
	 */
	dispatch(command: Command): void {
		if (this.inFlight) {
			this.queued = command;
			return;
		}
		const seq = this.nextSeq++;
		this.inFlight = true;
		this._commandsSent += 1;
		this.send(command)
			.then((snapshot) => {
				if (seq > this.appliedSeq) {
					this.appliedSeq = seq;
					this._snapshot = snapshot;
					this.onSnapshot(snapshot);
				}
			})
			.catch((error) => this.onError(error))
			.finally(() => {
				this.inFlight = false;
				if (this.queued !== null) {
					const next = this.queued;
					this.queued = null;
					this.dispatch(next);
				}
			});
	}

	/**
	 * Re-fetch the snapshot outside the command queue (reconnects, focus).
	 * A refresh may race an in-flight command response; the sequence numbers
	 * decide which one a client is allowed to render.
	 */
	refresh(get: () => Promise<Snapshot>): void {
		const seq = this.nextSeq++;
		get()
			.then((snapshot) => {
				if (seq > this.appliedSeq) {
					this.appliedSeq = seq;
					this._snapshot = snapshot;
					this.onSnapshot(snapshot);
				}
			})
			.catch((error) => this.onError(error));
	}

	dispose(): void {
		if (this.timer !== null) {
			clearTimeout(this.timer);
			this.timer = null;
		}
		this.pendingMove = null;
		this.queued = null;
	}
}
