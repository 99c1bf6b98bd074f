// Structural tests against a stubbed API: the page is driven exactly
// like the browser would, but every response is canned.
import { afterEach, describe, expect, it, vi } from "vitest";

import type { LinkResponse, SearchResponse } from "../src/api.js";
import { renderSentence } from "../src/render.js";
import { mountApp } from "../src/main.js";

const SEARCH_BODY: SearchResponse = {
  query: "double category",
  lemmas: ["double", "category"],
  corpora: {
    tac: {
      display_name: "Theory and Applications of Categories",
      total_documents: 2,
      cards: [
        {
          doc_id: "tac-001",
          title: "The word problem for free double categories",
          url: "https://example.org/tac/abs/tac-001",
          sentences: [
            {
              text: "Double categories were introduced by Ehresmann.",
              highlights: [[0, 17]],
            },
            {
              text: "The 😀 symbol precedes double categories.",
              highlights: [[22, 39]],
            },
          ],
        },
        {
          doc_id: "tac-002",
          title: "Monads arising from adjoint functors",
          url: "",
          sentences: [
            {
              text: "The double category of monads admits a universal property.",
              highlights: [[4, 19]],
            },
          ],
        },
      ],
    },
    nlab: {
      display_name: "nLab",
      total_documents: 1,
      cards: [
        {
          doc_id: "nlab-0001",
          title: "double category",
          url: "https://ncatlab.org/nlab/show/double+category",
          sentences: [
            {
              text: "A double category is a category internal to Cat.",
              highlights: [[2, 17]],
            },
          ],
        },
      ],
    },
  },
};

const LINK_BODY: LinkResponse = {
  query: "double category",
  wikidata: [
    {
      id: "Q99613675",
      label: "double category",
      description: null,
      url: "https://www.wikidata.org/wiki/Q99613675",
    },
  ],
  nlab: [
    {
      slug: "double+category",
      title: "double category",
      url: "https://ncatlab.org/nlab/show/double+category",
    },
  ],
};

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

type Route = (url: string) => Response;

function stubFetch(route: Route) {
  const mock = vi.fn((input: RequestInfo | URL) =>
    Promise.resolve(route(String(input))),
  );
  vi.stubGlobal("fetch", mock);
  return mock;
}

function happyRoute(url: string): Response {
  if (url.startsWith("/api/search")) return jsonResponse(SEARCH_BODY);
  if (url.startsWith("/api/link")) return jsonResponse(LINK_BODY);
  throw new Error(`unexpected request: ${url}`);
}

function mount() {
  document.body.innerHTML = `
    <form id="search"><input name="q"><button type="submit">go</button></form>
    <main id="app"></main>`;
  const form = document.querySelector("form#search") as HTMLFormElement;
  const container = document.getElementById("app") as HTMLElement;
  const state = mountApp(form, container);
  const input = form.querySelector("input[name=q]") as HTMLInputElement;
  return { form, container, input, state };
}

function submit(form: HTMLFormElement, input: HTMLInputElement, query: string) {
  input.value = query;
  form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
}

async function settled(container: HTMLElement) {
  await vi.waitFor(() => {
    expect(container.querySelector(".corpus-sections")).toBeTruthy();
    expect(container.querySelector(".loading")).toBeFalsy();
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
  document.body.innerHTML = "";
});

describe("page structure", () => {
  it("puts the knowledge-base panel above the corpus sections", async () => {
    stubFetch(happyRoute);
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);

    const children = Array.from(container.children);
    expect(children.map((c) => c.className)).toEqual(["kb-panel", "corpus-sections"]);
    const panel = container.querySelector(".kb-panel")!;
    expect(panel.textContent).toContain("double category (Q99613675)");
    expect(panel.querySelector("li.kb-nlab a")?.getAttribute("href")).toBe(
      "https://ncatlab.org/nlab/show/double+category",
    );
  });

  it("renders one section per corpus, in response order", async () => {
    stubFetch(happyRoute);
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);

    const sections = Array.from(
      container.querySelectorAll<HTMLElement>("section.corpus-section"),
    );
    expect(sections.map((s) => s.dataset.corpus)).toEqual(["tac", "nlab"]);
    expect(sections[0]!.querySelector("h2")!.textContent).toContain(
      "Theory and Applications of Categories",
    );
    expect(sections[0]!.querySelectorAll("li.card")).toHaveLength(2);

    const linked = sections[0]!.querySelector("li.card a") as HTMLAnchorElement;
    expect(linked.textContent).toBe("The word problem for free double categories");
    expect(linked.getAttribute("href")).toBe("https://example.org/tac/abs/tac-001");
    // A card without a url gets a plain heading, not an empty link.
    const second = sections[0]!.querySelectorAll("li.card")[1]!;
    expect(second.querySelector("a")).toBeNull();
    expect(second.querySelector("h3")!.textContent).toBe(
      "Monads arising from adjoint functors",
    );
  });

  it("turns highlight offsets into mark elements without losing text", async () => {
    stubFetch(happyRoute);
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);

    const sentences = Array.from(
      container.querySelectorAll<HTMLElement>("li.sentence"),
    );
    const byText = new Map(sentences.map((s) => [s.textContent, s]));
    for (const card of Object.values(SEARCH_BODY.corpora).flatMap((c) => c.cards)) {
      for (const hit of card.sentences) {
        expect(byText.has(hit.text)).toBe(true);
      }
    }

    const plain = byText.get("Double categories were introduced by Ehresmann.")!;
    expect(plain.querySelector("mark")!.textContent).toBe("Double categories");

    // Offsets count code points; the emoji must not shift the span.
    const astral = byText.get("The 😀 symbol precedes double categories.")!;
    expect(astral.querySelector("mark")!.textContent).toBe("double categories");
  });
});

describe("corpus toggling", () => {
  it("hides and restores a section without refetching", async () => {
    const mock = stubFetch(happyRoute);
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);
    const calls = mock.mock.calls.length;
    expect(calls).toBe(2); // one search, one link

    const toggle = () =>
      (
        container.querySelector(
          "section[data-corpus=tac] button.toggle",
        ) as HTMLButtonElement
      ).click();
    const tacCards = () =>
      container.querySelector<HTMLElement>("section[data-corpus=tac] ul.cards")!;

    expect(tacCards().hidden).toBe(false);
    toggle();
    expect(tacCards().hidden).toBe(true);
    // The other section is untouched.
    expect(
      container.querySelector<HTMLElement>("section[data-corpus=nlab] ul.cards")!.hidden,
    ).toBe(false);
    toggle();
    expect(tacCards().hidden).toBe(false);
    expect(mock.mock.calls.length).toBe(calls);
  });
});

describe("failures", () => {
  it("shows an error banner and keeps the previous results", async () => {
    let failSearch = false;
    stubFetch((url) => {
      if (url.startsWith("/api/search")) {
        return failSearch
          ? jsonResponse(
              { error: { code: "unknown-corpus", message: "unknown corpus 'arxiv'" } },
              400,
            )
          : jsonResponse(SEARCH_BODY);
      }
      return jsonResponse(LINK_BODY);
    });
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);

    failSearch = true;
    submit(form, input, "something else");
    await vi.waitFor(() => {
      expect(container.querySelector(".error-banner")).toBeTruthy();
    });

    const banner = container.querySelector(".error-banner")!;
    expect(banner.textContent).toContain("unknown corpus 'arxiv'");
    expect(banner.getAttribute("role")).toBe("alert");
    expect(container.firstElementChild).toBe(banner);
    // Old sections are still on the page.
    expect(
      container.querySelectorAll("section.corpus-section"),
    ).toHaveLength(2);
  });

  it("reports a knowledge-base failure inside the panel", async () => {
    stubFetch((url) => {
      if (url.startsWith("/api/link")) {
        return jsonResponse(
          { error: { code: "upstream-failure", message: "gone fishing", status: 503 } },
          502,
        );
      }
      return jsonResponse(SEARCH_BODY);
    });
    const { form, container, input } = mount();
    submit(form, input, "double category");
    await settled(container);
    await vi.waitFor(() => {
      expect(container.querySelector(".kb-error")).toBeTruthy();
    });
    expect(container.querySelector(".kb-error")!.textContent).toContain("gone fishing");
    expect(container.querySelectorAll("section.corpus-section")).toHaveLength(2);
  });
});

describe("overlapping requests", () => {
  it("ignores a response that was overtaken by a newer submit", async () => {
    const pending: Array<{ url: string; resolve: (r: Response) => void }> = [];
    const mock = vi.fn(
      (input: RequestInfo | URL) =>
        new Promise<Response>((resolve) =>
          pending.push({ url: String(input), resolve }),
        ),
    );
    vi.stubGlobal("fetch", mock);

    const { form, container, input, state } = mount();
    submit(form, input, "monad");
    submit(form, input, "double category");
    await vi.waitFor(() => expect(pending.length).toBe(4));

    const staleBody: SearchResponse = {
      query: "monad",
      lemmas: ["monad"],
      corpora: {
        tac: { display_name: "STALE", total_documents: 0, cards: [] },
      },
    };
    const fresh = pending.find(
      (p) => p.url.includes("/api/search") && p.url.includes("double+category"),
    )!;
    const stale = pending.find(
      (p) => p.url.includes("/api/search") && p.url.includes("monad"),
    )!;

    fresh.resolve(jsonResponse(SEARCH_BODY));
    await settled(container);
    stale.resolve(jsonResponse(staleBody));
    await new Promise((r) => setTimeout(r, 10));

    expect(state.results?.query).toBe("double category");
    expect(container.textContent).not.toContain("STALE");
    expect(
      container.querySelectorAll("section.corpus-section"),
    ).toHaveLength(2);
  });
});

describe("sentence rendering", () => {
  it("emits plain text when there is nothing to highlight", () => {
    const item = renderSentence({ text: "No matches here.", highlights: [] });
    expect(item.querySelector("mark")).toBeNull();
    expect(item.textContent).toBe("No matches here.");
  });

  it("handles a highlight that spans the whole sentence", () => {
    const item = renderSentence({ text: "all of it", highlights: [[0, 9]] });
    expect(item.querySelector("mark")!.textContent).toBe("all of it");
    expect(item.textContent).toBe("all of it");
  });
});
