/** Typed client for the suggestion-service HTTP API. */

export interface SuggestionDto {
  etype: string;
  score: number;
  anchor: number;
  direction: "out" | "in";
  other: number | null;
  other_type: string | null;
}

export interface SuggestionBatch {
  version: number;
  suggestions: SuggestionDto[];
}

export interface GraphNodeDto {
  id: number;
  kind: "name" | "type";
  label: string;
  value: string;
}

export interface GraphEdgeDto {
  src: number;
  dst: number;
  etype: string;
}

export interface SessionState {
  session_id: string;
  graph: { nodes: GraphNodeDto[]; edges: GraphEdgeDto[] };
  session: string[];
  pending_connection: boolean;
  closed: boolean;
  k: number;
}

export interface EdgeOption {
  etype: string;
  score: number;
  directions: string[];
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

export class SuggestionApi {
  constructor(private readonly baseUrl: string) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "content-type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const resp = await fetch(this.baseUrl + path, init);
    const payload = await resp.json();
    if (!resp.ok) {
      const detail = typeof payload?.detail === "string" ? payload.detail : resp.statusText;
      throw new ApiError(resp.status, detail);
    }
    return payload as T;
  }

  createSession(): Promise<{ session_id: string }> {
    return this.request("POST", "/sessions");
  }

  getSession(id: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${id}`);
  }

  activeSuggestions(id: string): Promise<SuggestionBatch> {
    return this.request("GET", `/sessions/${id}/suggestions?mode=active`);
  }

  respond(id: string, version: number, accepted: number[]): Promise<SessionState> {
    return this.request("POST", `/sessions/${id}/respond`, { version, accepted });
  }

  addNode(id: string, kind: "name" | "type", label: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${id}/nodes`, { kind, label });
  }

  suggestEdge(id: string, src: number, dst: number): Promise<{ options: EdgeOption[] }> {
    return this.request("POST", `/sessions/${id}/edges/suggest`, { src, dst });
  }

  addEdge(id: string, src: number, dst: number, etype: string): Promise<SessionState> {
    return this.request("POST", `/sessions/${id}/edges`, { src, dst, etype });
  }

  domains(filter = ""): Promise<{ entries: string[] }> {
    return this.request("GET", `/catalog/domains?filter=${encodeURIComponent(filter)}`);
  }

  types(domain: string, filter = ""): Promise<{ entries: string[] }> {
    return this.request(
      "GET",
      `/catalog/types?domain=${encodeURIComponent(domain)}&filter=${encodeURIComponent(filter)}`,
    );
  }

  names(type: string, filter = ""): Promise<{ entries: string[] }> {
    return this.request(
      "GET",
      `/catalog/names?type=${encodeURIComponent(type)}&filter=${encodeURIComponent(filter)}`,
    );
  }

  submit(id: string): Promise<{ session_id: string; persisted_line: string }> {
    return this.request("POST", `/sessions/${id}/submit`);
  }
}
