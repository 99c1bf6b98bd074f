// Wiring: the form drives the state machine, the state drives the DOM.

import { ApiFailure, linkRequest, searchRequest } from "./api.js";
import { renderApp } from "./render.js";
import {
  applyFailure,
  applyKb,
  applyKbFailure,
  applyResults,
  beginQuery,
  initialState,
  toggleCorpus,
  type UiState,
} from "./state.js";

function message(error: unknown): string {
  if (error instanceof ApiFailure) {
    return `${error.message} (${error.code})`;
  }
  return error instanceof Error ? error.message : String(error);
}

export function mountApp(form: HTMLFormElement, container: HTMLElement): UiState {
  const state = initialState();
  const input = form.querySelector<HTMLInputElement>("input[name=q]");
  if (!input) {
    throw new Error("the search form needs an input named q");
  }

  const redraw = () =>
    renderApp(container, state, (corpusId) => {
      // Visibility only; nothing is refetched.
      toggleCorpus(state, corpusId);
      redraw();
    });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const query = input.value.trim();
    if (!query) return;
    const sequence = beginQuery(state, query);
    redraw();

    searchRequest(query)
      .then((results) => {
        if (applyResults(state, sequence, results)) redraw();
      })
      .catch((error) => {
        if (applyFailure(state, sequence, message(error))) redraw();
      });

    linkRequest(query)
      .then((kb) => {
        if (applyKb(state, sequence, kb)) redraw();
      })
      .catch((error) => {
        if (applyKbFailure(state, sequence, message(error))) redraw();
      });
  });

  redraw();
  return state;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  const form = document.querySelector<HTMLFormElement>("form#search");
  const container = document.getElementById("app");
  if (form && container) {
    mountApp(form, container);
  }
}
