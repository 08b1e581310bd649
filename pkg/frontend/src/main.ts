import { ApiClient } from "./client.js";
import { SessionController } from "./controller.js";
import { snapshotToCsv } from "./export.js";
import { renderFrontPlot, renderParamSlider, renderSlider, SLIDER_WIDTH } from "./render.js";
import type { Fronts, Meta, Snapshot } from "./types.js";
import { buildParamViewModels, buildSliderViewModels } from "./viewmodel.js";

/** Browser wiring: everything numeric comes from service snapshots. */
async function boot(): Promise<void> {
	const root = document.getElementById("app");
	if (root === null) {
		return;
	}
	const client = new ApiClient("");
	const banner = document.getElementById("banner")!;
	let meta: Meta;
	let fronts: Fronts;
	let sessionId: string;
	try {
		meta = await client.meta();
		fronts = await client.fronts();
		const opened = await client.openSession();
		sessionId = opened.id;
		var controller = new SessionController((cmd) => client.command(sessionId, cmd), {
			onSnapshot: (snapshot) => render(snapshot),
			onError: () => {
				banner.textContent = "connection lost - retrying on next interaction";
				banner.classList.add("visible");
			},
		});
		controller.accept(opened.snapshot);
	} catch (error) {
		banner.textContent = `service unreachable: ${String(error)}`;
		banner.classList.add("visible");
		return;
	}

	const objectiveNames: [string, string] = [
		meta.objectives[0]!.name,
		meta.objectives[1]!.name,
	];
	const paramBounds = new Map<string, { min: number; max: number }>();

	function render(snapshot: Snapshot): void {
		banner.classList.remove("visible");
		const sliders = buildSliderViewModels(meta, snapshot);
		const params = buildParamViewModels(meta, snapshot);
		for (const p of params) {
			const known = paramBounds.get(p.name) ?? { min: p.robust, max: p.robust };
			const values = [p.robust, p.nominal, p.nsr ?? p.robust];
			paramBounds.set(p.name, {
				min: Math.min(known.min, ...values),
				max: Math.max(known.max, ...values),
			});
		}
		const stale = document.getElementById("stale")!;
		stale.textContent = `revision ${snapshot.revision}`;
		root!.innerHTML = [
			'<section class="sliders">',
			...sliders.map((vm) => renderSlider(vm)),
			"</section>",
			'<h3>Parameters</h3>',
			'<section class="params">',
			...params.map((vm) => {
				const b = paramBounds.get(vm.name)!;
				const pad = 0.1 * (b.max - b.min || 1);
				return renderParamSlider(vm, b.min - pad, b.max + pad);
			}),
			"</section>",
			'<section class="plot-area">',
			renderFrontPlot(fronts, snapshot, objectiveNames),
			"</section>",
		].join("");
		wireDrag(snapshot);
	}

	function wireDrag(snapshot: Snapshot): void {
		for (const svg of root!.querySelectorAll<SVGSVGElement>("svg.slider")) {
			const objective = svg.dataset.objective!;
			const spec = meta.objectives.find((o) => o.name === objective)!;
			const toValue = (event: PointerEvent): number => {
				const rect = svg.getBoundingClientRect();
				const frac = (event.clientX - rect.left - 20) / ((SLIDER_WIDTH - 40) * (rect.width / SLIDER_WIDTH));
				return spec.min + Math.min(Math.max(frac, 0), 1) * (spec.max - spec.min);
			};
			let dragging = false;
			svg.addEventListener("pointerdown", (event) => {
				dragging = true;
				svg.setPointerCapture(event.pointerId);
				if (event.shiftKey) {
					controller.restrict(objective, toValue(event));
				} else {
					controller.setTarget(objective, toValue(event));
				}
			});
			svg.addEventListener("pointermove", (event) => {
				if (dragging && !event.shiftKey) {
					controller.setTarget(objective, toValue(event));
				}
			});
			svg.addEventListener("pointerup", () => {
				dragging = false;
				controller.flush();
			});
		}
	}

	document.getElementById("reset")!.addEventListener("click", () => controller.reset());
	document.getElementById("export-csv")!.addEventListener("click", () => {
		const csv = snapshotToCsv(meta, controller.snapshot);
		const blob = new Blob([csv], { type: "text/csv" });
		const link = document.createElement("a");
		link.href = URL.createObjectURL(blob);
		link.download = "navigated-point.csv";
		link.click();
		URL.revokeObjectURL(link.href);
	});
}

boot();
