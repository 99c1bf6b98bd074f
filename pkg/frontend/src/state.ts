// UI state transitions, kept pure so they can be tested without a DOM.
//
// Responses are matched to requests by a sequence number: every submit
// bumps it, and a response only lands if it still carries the latest
// number. A slow early response can never clobber a later one.

import type { LinkResponse, SearchResponse } from "./api.js";

export interface UiState {
  query: string;
  sequence: number;
  loading: boolean;
  results: SearchResponse | null;
  kb: LinkResponse | null;
  kbError: string | null;
  error: string | null;
  hiddenCorpora: Set<string>;
}

export function initialState(): UiState {
  return {
    query: "",
    sequence: 0,
    loading: false,
    results: null,
    kb: null,
    kbError: null,
    error: null,
    hiddenCorpora: new Set(),
  };
}

export function beginQuery(state: UiState, query: string): number {
  state.query = query;
  state.sequence += 1;
  state.loading = true;
  return state.sequence;
}

function isStale(state: UiState, sequence: number): boolean {
  return sequence !== state.sequence;
}

export function applyResults(
  state: UiState,
  sequence: number,
  results: SearchResponse,
): boolean {
  if (isStale(state, sequence)) return false;
  state.results = results;
  state.error = null;
  state.loading = false;
  return true;
}

export function applyKb(state: UiState, sequence: number, kb: LinkResponse): boolean {
  if (isStale(state, sequence)) return false;
  state.kb = kb;
  state.kbError = null;
  return true;
}

export function applyKbFailure(state: UiState, sequence: number, message: string): boolean {
  if (isStale(state, sequence)) return false;
  state.kb = null;
  state.kbError = message;
  return true;
}

// A failed search keeps whatever was on screen; the banner says why.
export function applyFailure(state: UiState, sequence: number, message: string): boolean {
  if (isStale(state, sequence)) return false;
  state.error = message;
  state.loading = false;
  return true;
}

// Pure visibility: flipping a corpus touches no fetched data, so
// toggling twice is a no-op by construction.
export function toggleCorpus(state: UiState, corpusId: string): void {
  if (state.hiddenCorpora.has(corpusId)) {
    state.hiddenCorpora.delete(corpusId);
  } else {
    state.hiddenCorpora.add(corpusId);
  }
}

export function isCorpusVisible(state: UiState, corpusId: string): boolean {
  return !state.hiddenCorpora.has(corpusId);
}

// Sections in response order, which the server keeps stable.
export function sectionIds(state: UiState): string[] {
  return state.results ? Object.keys(state.results.corpora) : [];
}
