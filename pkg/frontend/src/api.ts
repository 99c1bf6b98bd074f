// Typed client for the JSON API. Shapes mirror the server's response
// schemas; nothing here reaches into the index directly.

export interface SentenceHit {
  text: string;
  highlights: [number, number][];
}

export interface DocumentCard {
  doc_id: string;
  title: string;
  url: string;
  sentences: SentenceHit[];
}

export interface CorpusSection {
  display_name: string;
  total_documents: number;
  cards: DocumentCard[];
}

export interface SearchResponse {
  query: string;
  lemmas: string[];
  corpora: Record<string, CorpusSection>;
}

export interface KbEntry {
  id: string;
  label: string;
  description: string | null;
  url: string;
}

export interface WikiEntry {
  slug: string;
  title: string;
  url: string;
}

export interface LinkResponse {
  query: string;
  wikidata: KbEntry[];
  nlab: WikiEntry[];
  warnings?: string[];
}

export class ApiFailure extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

async function request<T>(path: string, params: Record<string, string>): Promise<T> {
  const search = new URLSearchParams(params);
  const response = await fetch(`${path}?${search}`, {
    headers: { accept: "application/json" },
  });
  const body = await response.json().catch(() => null);
  if (!response.ok) {
    const error = body?.error;
    throw new ApiFailure(
      response.status,
      error?.code ?? "unknown",
      error?.message ?? `request failed with status ${response.status}`,
    );
  }
  return body as T;
}

export function searchRequest(query: string, corpora: string[] = []): Promise<SearchResponse> {
  const params: Record<string, string> = { q: query };
  if (corpora.length > 0) {
    params.corpora = corpora.join(",");
  }
  return request<SearchResponse>("/api/search", params);
}

export function linkRequest(query: string): Promise<LinkResponse> {
  return request<LinkResponse>("/api/link", { q: query });
}
