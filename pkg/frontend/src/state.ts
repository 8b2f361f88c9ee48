// Console state and its pure transitions. The server is the single source of
// truth; this mirror is refreshed from response payloads only.

import type { FactorInfo, InferResponse, SensitivityResponse, SessionSnapshot } from "./api.js";

export const EVIDENCE_STATES = ["Probable", "Possible", "Remote"] as const;
export type EvidenceState = (typeof EVIDENCE_STATES)[number];

// Shown before the first submit; replaced by server labels afterwards.
export const DEFAULT_FACTORS: FactorInfo[] = [
  { id: "software", label: "Lack of experience with project software", impact: 5 },
  { id: "new_staff", label: "Newly Appointed Staff", impact: 5 },
  { id: "quality", label: "Staff not well versed with the required quality standards", impact: 5 },
  { id: "environment", label: "Lack of experience with project environment", impact: 5 },
];

export interface ResultView {
  percentage: number;
  cost: number;
  posterior: Record<string, number>;
  revision: number;
}

export interface SensitivityView {
  factorId: string;
  label: string;
  response: SensitivityResponse;
}

export interface ConsoleState {
  modelId: string | null;
  factors: FactorInfo[];
  impacts: number[];
  evidence: Record<string, string>;
  revision: number;
  lastResult: ResultView | null;
  sensitivity: SensitivityView[] | null;
  sensitivityRevision: number | null;
  pending: boolean;
  error: string | null;
}

export function initialState(): ConsoleState {
  return {
    modelId: null,
    factors: DEFAULT_FACTORS,
    impacts: DEFAULT_FACTORS.map((f) => f.impact),
    evidence: {},
    revision: 0,
    lastResult: null,
    sensitivity: null,
    sensitivityRevision: null,
    pending: false,
    error: null,
  };
}

export function validImpact(value: number): boolean {
  return Number.isFinite(value) && value >= 0 && value <= 10;
}

export function impactsValid(impacts: number[]): boolean {
  return impacts.length === 4 && impacts.every(validImpact);
}

/** A result is stale when the session has mutated since it was computed. */
export function isStale(state: ConsoleState): boolean {
  return state.lastResult !== null && state.lastResult.revision !== state.revision;
}

export function sensitivityStale(state: ConsoleState): boolean {
  return state.sensitivity !== null && state.sensitivityRevision !== state.revision;
}

export function afterCreate(state: ConsoleState, created: { model_id: string; factors: FactorInfo[]; revision: number }): ConsoleState {
  return {
    ...state,
    modelId: created.model_id,
    factors: created.factors,
    impacts: created.factors.map((f) => f.impact),
    evidence: {},
    revision: created.revision,
    error: null,
  };
}

export function afterSnapshot(state: ConsoleState, snapshot: SessionSnapshot): ConsoleState {
  return {
    ...state,
    modelId: snapshot.model_id,
    factors: snapshot.factors,
    impacts: snapshot.factors.map((f) => f.impact),
    evidence: { ...snapshot.evidence },
    revision: snapshot.revision,
    error: null,
  };
}

export function afterInfer(state: ConsoleState, response: InferResponse): ConsoleState {
  return {
    ...state,
    lastResult: {
      percentage: response.percentage,
      cost: response.cost,
      posterior: response.posterior,
      revision: response.revision,
    },
    evidence: { ...response.evidence },
    error: null,
  };
}

export function afterSensitivity(state: ConsoleState, views: SensitivityView[]): ConsoleState {
  return { ...state, sensitivity: views, sensitivityRevision: state.revision, error: null };
}

export function withError(state: ConsoleState, message: string): ConsoleState {
  return { ...state, error: message };
}

/** Bars sort by how much the factor can still move the target probability. */
export function sortBySpread(views: SensitivityView[]): SensitivityView[] {
  return [...views].sort((a, b) => b.response.spread - a.response.spread);
}

export function targetProbabilities(view: SensitivityView): number[] {
  return view.response.rows.map((row) => row.posterior[view.response.target_state] ?? 0);
}
