// DOM construction. One renderApp call redraws everything below the
// form; the pieces are small enough that diffing would buy nothing.

import type { CorpusSection, DocumentCard, LinkResponse, SentenceHit } from "./api.js";
import { isCorpusVisible, type UiState } from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// Highlight offsets count characters the way the server does: one per
// code point. UTF-16 slicing would drift after any astral-plane symbol,
// so slice an Array.from view instead.
export function renderSentence(hit: SentenceHit): HTMLLIElement {
  const item = el("li", "sentence");
  const points = Array.from(hit.text);
  let cursor = 0;
  for (const [start, end] of hit.highlights) {
    if (start > cursor) {
      item.append(points.slice(cursor, start).join(""));
    }
    const mark = el("mark", undefined, points.slice(start, end).join(""));
    item.append(mark);
    cursor = end;
  }
  if (cursor < points.length) {
    item.append(points.slice(cursor).join(""));
  }
  return item;
}

function renderCard(card: DocumentCard): HTMLLIElement {
  const item = el("li", "card");
  const heading = el("h3");
  if (card.url) {
    const link = el("a", undefined, card.title || card.doc_id);
    link.href = card.url;
    heading.append(link);
  } else {
    heading.textContent = card.title || card.doc_id;
  }
  item.append(heading);
  const sentences = el("ul", "sentences");
  for (const hit of card.sentences) {
    sentences.append(renderSentence(hit));
  }
  item.append(sentences);
  return item;
}

function renderSection(
  corpusId: string,
  section: CorpusSection,
  state: UiState,
  onToggle: (corpusId: string) => void,
): HTMLElement {
  const visible = isCorpusVisible(state, corpusId);
  const root = el("section", "corpus-section");
  root.dataset.corpus = corpusId;

  const heading = el("h2");
  heading.append(`${section.display_name} `);
  const count = el("span", "count", `${section.total_documents} document(s)`);
  heading.append(count);
  const toggle = el("button", "toggle", visible ? "hide" : "show");
  toggle.type = "button";
  toggle.setAttribute("aria-expanded", String(visible));
  toggle.addEventListener("click", () => onToggle(corpusId));
  heading.append(" ", toggle);
  root.append(heading);

  const cards = el("ul", "cards");
  cards.hidden = !visible;
  for (const card of section.cards) {
    cards.append(renderCard(card));
  }
  root.append(cards);
  return root;
}

export function renderKbPanel(kb: LinkResponse | null, kbError: string | null): HTMLElement {
  const panel = el("aside", "kb-panel");
  panel.append(el("h2", undefined, "Knowledge base"));
  if (kbError) {
    panel.append(el("p", "kb-error", kbError));
    return panel;
  }
  if (!kb) {
    return panel;
  }
  for (const warning of kb.warnings ?? []) {
    panel.append(el("p", "kb-warning", warning));
  }
  const list = el("ul", "kb-entries");
  for (const entry of kb.wikidata) {
    const item = el("li", "kb-wikidata");
    const link = el("a", undefined, `${entry.label} (${entry.id})`);
    link.href = entry.url;
    item.append(link);
    if (entry.description) {
      item.append(` ${entry.description}`);
    }
    list.append(item);
  }
  for (const entry of kb.nlab) {
    const item = el("li", "kb-nlab");
    const link = el("a", undefined, entry.title);
    link.href = entry.url;
    item.append(link, " (nLab)");
    list.append(item);
  }
  if (list.childElementCount === 0) {
    panel.append(el("p", "kb-empty", "no entries found"));
  } else {
    panel.append(list);
  }
  return panel;
}

export function renderApp(
  container: HTMLElement,
  state: UiState,
  onToggle: (corpusId: string) => void,
): void {
  container.replaceChildren();

  if (state.error) {
    const banner = el("div", "error-banner", state.error);
    banner.setAttribute("role", "alert");
    container.append(banner);
  }
  if (state.loading) {
    container.append(el("p", "loading", "searching..."));
  }
  if (!state.results) {
    return;
  }

  // Knowledge base first, corpus sections below it.
  container.append(renderKbPanel(state.kb, state.kbError));

  const sections = el("div", "corpus-sections");
  for (const [corpusId, section] of Object.entries(state.results.corpora)) {
    sections.append(renderSection(corpusId, section, state, onToggle));
  }
  container.append(sections);
}
