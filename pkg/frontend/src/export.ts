import type { Meta, Snapshot } from "./types.js";

/** One-row CSV of the current navigated point, markers, and price. */
export function snapshotToCsv(meta: Meta, snapshot: Snapshot | null): string {
	const names = meta.objectives.map((o) => o.name);
	const header = [
		...names.map((n) => `f_nav_${n}`),
		...names.map((n) => `nsr_${n}`),
		...names.map((n) => `mo_${n}`),
		...names.map((n) => `price_${n}`),
		"alpha_star",
	];
	const lines = [header.join(",")];
	if (snapshot !== null) {
		const row = [
			...names.map((n) => String(snapshot.f_nav[n] ?? "")),
			...names.map((n) => String(snapshot.markers.nsr[n] ?? "")),
			...names.map((n) => String(snapshot.markers.mo[n] ?? "")),
			...names.map((n) => String(snapshot.markers.price[n] ?? "")),
			String(snapshot.alpha_star),
		];
		lines.push(row.join(","));
	}
	return lines.join("\n") + "\n";
}

/** Rasterize an SVG string; browser-only (uses Image/canvas). */
export function svgToPngBlob(svgMarkup: string, width: number, height: number): Promise<Blob> {
	return new Promise((resolve, reject) => {
		const canvas = document.createElement("canvas");
		canvas.width = width;
		canvas.height = height;
		const ctx = canvas.getContext("2d");
		if (ctx === null) {
			reject(new Error("no 2d canvas context"));
			return;
		}
		const image = new Image();
		const url = URL.createObjectURL(new Blob([svgMarkup], { type: "image/svg+xml" }));
		image.onload = () => {
			ctx.drawImage(image, 0, 0);
			URL.revokeObjectURL(url);
			canvas.toBlob((blob) => {
				if (blob === null) {
					reject(new Error("canvas rasterization failed"));
				} else {
					resolve(blob);
				}
			}, "image/png");
		};
		image.onerror = () => {
			URL.revokeObjectURL(url);
			reject(new Error("svg failed to load"));
		};
		image.src = url;
	});
}
