// The what-if console: impacts panel -> evidence panel -> result banner ->
// sensitivity panel, all state server-side. Each mutation is followed by a
// snapshot fetch so the widgets always mirror the session.

import { ApiError, MastApi } from "./api.js";
import { formatSpread, resultMessage } from "./format.js";
import {
  ConsoleState,
  EVIDENCE_STATES,
  SensitivityView,
  impactsValid,
  initialState,
  isStale,
  sensitivityStale,
  afterCreate,
  afterInfer,
  afterSensitivity,
  afterSnapshot,
  sortBySpread,
  targetProbabilities,
  validImpact,
  withError,
} from "./state.js";

export class Console {
  state: ConsoleState = initialState();

  constructor(
    private readonly root: HTMLElement,
    private readonly api: MastApi,
  ) {
    this.render();
  }

  private setState(next: ConsoleState): void {
    this.state = next;
    this.render();
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiError ? error.message : error instanceof Error ? error.message : String(error);
    this.setState({ ...withError(this.state, message), pending: false });
  }

  /** Runs one mutation at a time; refreshes the server snapshot afterwards. */
  private async mutate(action: () => Promise<unknown>): Promise<void> {
    if (this.state.pending) return;
    this.setState({ ...this.state, pending: true, error: null });
    try {
      await action();
      if (this.state.modelId) {
        const snapshot = await this.api.getModel(this.state.modelId);
        this.setState({ ...afterSnapshot(this.state, snapshot), pending: false });
      } else {
        this.setState({ ...this.state, pending: false });
      }
    } catch (error) {
      this.fail(error);
    }
  }

  async submitImpacts(): Promise<void> {
    const impacts = [...this.state.impacts];
    if (!impactsValid(impacts)) return;
    if (this.state.modelId === null) {
      if (this.state.pending) return;
      this.setState({ ...this.state, pending: true, error: null });
      try {
        const created = await this.api.createModel(impacts);
        this.setState({ ...afterCreate(this.state, created), pending: false });
      } catch (error) {
        this.fail(error);
      }
    } else {
      await this.mutate(() => this.api.patchImpacts(this.state.modelId!, impacts));
    }
  }

  async setEvidence(factorId: string, state: string): Promise<void> {
    if (!this.state.modelId) return;
    await this.mutate(() => this.api.setEvidence(this.state.modelId!, factorId, state));
  }

  async clearEvidence(factorId: string): Promise<void> {
    if (!this.state.modelId) return;
    await this.mutate(() => this.api.clearEvidence(this.state.modelId!, factorId));
  }

  async runInference(): Promise<void> {
    if (!this.state.modelId || this.state.pending) return;
    this.setState({ ...this.state, pending: true, error: null });
    try {
      const response = await this.api.infer(this.state.modelId);
      this.setState({ ...afterInfer(this.state, response), pending: false });
    } catch (error) {
      this.fail(error);
    }
  }

  async refreshSensitivity(): Promise<void> {
    if (!this.state.modelId || this.state.pending) return;
    this.setState({ ...this.state, pending: true, error: null });
    try {
      const views: SensitivityView[] = [];
      for (const factor of this.state.factors) {
        const response = await this.api.sensitivity(this.state.modelId, factor.id);
        views.push({ factorId: factor.id, label: factor.label, response });
      }
      this.setState({ ...afterSensitivity(this.state, views), pending: false });
    } catch (error) {
      this.fail(error);
    }
  }

  // --- rendering -------------------------------------------------------------

  private render(): void {
    this.root.textContent = "";
    this.root.append(
      this.renderError(),
      this.renderImpactsPanel(),
      this.renderEvidencePanel(),
      this.renderResultBanner(),
      this.renderSensitivityPanel(),
    );
  }

  private renderError(): HTMLElement {
    const banner = el("div", { class: "error-banner", id: "error-banner" });
    if (this.state.error) {
      banner.textContent = this.state.error;
    } else {
      banner.style.display = "none";
    }
    return banner;
  }

  private renderImpactsPanel(): HTMLElement {
    const panel = el("section", { class: "panel", id: "impacts-panel" });
    panel.append(el("h2", {}, "Impact of risk factors (0–10)"));
    let allValid = true;
    this.state.factors.forEach((factor, index) => {
      const row = el("div", { class: "impact-row" });
      const input = el("input", {
        type: "number",
        min: "0",
        max: "10",
        step: "0.5",
        id: `impact-${factor.id}`,
        value: String(this.state.impacts[index] ?? 0),
      }) as HTMLInputElement;
      const warning = el("span", { class: "inline-warning", id: `impact-warning-${factor.id}` });
      warning.style.display = "none";
      input.addEventListener("input", () => {
        const impacts = [...this.state.impacts];
        impacts[index] = parseFloat(input.value);
        this.state = { ...this.state, impacts };
        const bad = !validImpact(impacts[index] ?? NaN);
        warning.textContent = bad ? "must be a number between 0 and 10" : "";
        warning.style.display = bad ? "" : "none";
        submit.disabled = !impactsValid(impacts) || this.state.pending;
      });
      row.append(el("label", { for: `impact-${factor.id}` }, factor.label), input, warning);
      if (!validImpact(this.state.impacts[index] ?? NaN)) allValid = false;
      panel.append(row);
    });
    const submit = el("button", { id: "submit-impacts" },
      this.state.modelId === null ? "Submit" : "Update impacts") as HTMLButtonElement;
    submit.disabled = !allValid || this.state.pending;
    submit.addEventListener("click", () => void this.submitImpacts());
    panel.append(submit);
    return panel;
  }

  private renderEvidencePanel(): HTMLElement {
    const panel = el("section", { class: "panel", id: "evidence-panel" });
    panel.append(el("h2", {}, "Evidence for risk factors"));
    const disabled = this.state.modelId === null || this.state.pending;
    for (const factor of this.state.factors) {
      const row = el("div", { class: "evidence-row" });
      const select = el("select", { id: `evidence-${factor.id}` }) as HTMLSelectElement;
      select.append(el("option", { value: "" }, "— no evidence —"));
      for (const state of EVIDENCE_STATES) {
        select.append(el("option", { value: state }, state));
      }
      select.value = this.state.evidence[factor.id] ?? "";
      select.disabled = disabled;
      select.addEventListener("change", () => {
        if (select.value === "") void this.clearEvidence(factor.id);
        else void this.setEvidence(factor.id, select.value);
      });
      const clear = el("button", { class: "clear-evidence", id: `clear-${factor.id}` },
        "Clear Evidence") as HTMLButtonElement;
      clear.disabled = disabled || !(factor.id in this.state.evidence);
      clear.addEventListener("click", () => void this.clearEvidence(factor.id));
      row.append(el("label", { for: `evidence-${factor.id}` }, factor.label), select, clear);
      panel.append(row);
    }
    const infer = el("button", { id: "run-inference" }, "Inference") as HTMLButtonElement;
    infer.disabled = disabled;
    infer.addEventListener("click", () => void this.runInference());
    panel.append(infer);
    return panel;
  }

  private renderResultBanner(): HTMLElement {
    const banner = el("section", { class: "panel result", id: "result-banner" });
    const result = this.state.lastResult;
    if (!result) {
      banner.append(el("p", { id: "result-message" }, "No inference run yet."));
      return banner;
    }
    banner.append(el("p", { id: "result-message" }, resultMessage(result.percentage, result.cost)));
    const posterior = Object.entries(result.posterior)
      .map(([state, p]) => `P(${state}) = ${p.toFixed(3)}`);
    banner.append(el("p", { class: "posterior", id: "result-posterior" }, posterior.join("  ")));
    banner.append(el(
      "p", { class: "revision-tag", id: "result-revision" }, `computed at revision ${result.revision}`));
    if (isStale(this.state)) {
      banner.append(el("p", { class: "stale-marker", id: "stale-marker" },
        "stale — re-run inference"));
    }
    return banner;
  }

  private renderSensitivityPanel(): HTMLElement {
    const panel = el("section", { class: "panel", id: "sensitivity-panel" });
    panel.append(el("h2", {}, "Sensitivity"));
    const refresh = el("button", { id: "refresh-sensitivity" }, "Update sensitivity") as HTMLButtonElement;
    refresh.disabled = this.state.modelId === null || this.state.pending;
    refresh.addEventListener("click", () => void this.refreshSensitivity());
    panel.append(refresh);
    if (!this.state.sensitivity) return panel;
    if (sensitivityStale(this.state)) {
      panel.append(el("p", { class: "stale-marker", id: "sensitivity-stale" },
        "stale — update sensitivity"));
    }
    for (const view of sortBySpread(this.state.sensitivity)) {
      const probabilities = targetProbabilities(view);
      const low = Math.min(...probabilities);
      const high = Math.max(...probabilities);
      const bar = el("div", { class: "sens-bar", id: `sens-${view.factorId}` });
      bar.append(el("span", { class: "sens-label" }, view.label));
      const track = el("div", { class: "sens-track" });
      const fill = el("div", { class: "sens-fill" });
      fill.style.left = `${low * 100}%`;
      fill.style.width = `${(high - low) * 100}%`;
      track.append(fill);
      bar.append(track);
      for (const row of view.response.rows) {
        const p = row.posterior[view.response.target_state] ?? 0;
        const chip = el("button", { class: "sens-state", "data-state": row.state },
          `${row.state} ${p.toFixed(3)}`) as HTMLButtonElement;
        chip.disabled = this.state.pending;
        chip.addEventListener("click", () => void this.setEvidence(view.factorId, row.state));
        bar.append(chip);
      }
      bar.append(el("span", { class: "sens-spread" }, `spread ${formatSpread(view.response.spread)}`));
      panel.append(bar);
    }
    return panel;
  }
}

function el(tag: string, attrs: Record<string, string> = {}, text?: string): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mountConsole(root: HTMLElement, api: MastApi): Console {
  return new Console(root, api);
}
