/** Orchestrates the interaction flows against the service; owns no DOM. */
import { ApiError, SuggestionApi } from "./api.js";
import type { EdgeOption, SessionState } from "./api.js";
import { CanvasModel, tips } from "./model.js";

export interface View {
  renderGraph(model: CanvasModel): void;
  renderSuggestions(model: CanvasModel): void;
  showEdgeOptions(src: number, dst: number, options: EdgeOption[]): void;
  showTips(lines: string[]): void;
  showError(message: string): void;
  showSubmitted(line: string): void;
}

export class CanvasController {
  readonly model = new CanvasModel();
  sessionId = "";

  constructor(
    private readonly api: SuggestionApi,
    private readonly view: View,
  ) {}

  private sync(state: SessionState): void {
    this.model.applyServerState(state);
    this.view.renderGraph(this.model);
    this.view.showTips(tips(this.model));
  }

  async start(): Promise<void> {
    const { session_id } = await this.api.createSession();
    this.sessionId = session_id;
    this.sync(await this.api.getSession(session_id));
  }

  /** Node-panel flow, final step: the user picked a type or a concrete name. */
  async addNode(kind: "name" | "type", label: string): Promise<void> {
    try {
      this.sync(await this.api.addNode(this.sessionId, kind, label));
    } catch (err) {
      this.surface(err);
      return;
    }
    await this.fetchSuggestions();
  }

  /** Pull the active top-k batch unless the graph cannot accept one. */
  async fetchSuggestions(): Promise<void> {
    if (this.model.pendingConnection || this.model.closed || this.model.nodes.size === 0) {
      return;
    }
    try {
      const batch = await this.api.activeSuggestions(this.sessionId);
      this.model.showSuggestions(batch);
      this.view.renderSuggestions(this.model);
    } catch (err) {
      this.surface(err);
    }
  }

  toggleSuggestion(index: number): void {
    this.model.toggleSuggestion(index);
    this.view.renderSuggestions(this.model);
  }

  /** Canvas click with a batch outstanding: commit picks, ignore the rest. */
  async commitSelections(): Promise<void> {
    const batch = this.model.batch;
    if (!batch) {
      return;
    }
    const accepted = this.model.resolveSuggestions();
    try {
      this.sync(await this.api.respond(this.sessionId, batch.version, accepted));
    } catch (err) {
      this.surface(err);
      if (err instanceof ApiError && err.status === 409) {
        this.sync(await this.api.getSession(this.sessionId)); // stale batch: resync
      }
      await this.fetchSuggestions();
      return;
    }
    await this.fetchSuggestions(); // next batch appears automatically
  }

  /** Explicit "Refresh Suggestions": everything shown counts as ignored. */
  async refreshSuggestions(): Promise<void> {
    const batch = this.model.batch;
    if (!batch) {
      await this.fetchSuggestions();
      return;
    }
    this.model.discardSuggestions();
    try {
      this.sync(await this.api.respond(this.sessionId, batch.version, []));
    } catch (err) {
      this.surface(err);
    }
    await this.fetchSuggestions();
  }

  listDomains(filter = ""): Promise<string[]> {
    return this.api.domains(filter).then((r) => r.entries);
  }

  listTypes(domain: string, filter = ""): Promise<string[]> {
    return this.api.types(domain, filter).then((r) => r.entries);
  }

  listNames(type: string, filter = ""): Promise<string[]> {
    return this.api.names(type, filter).then((r) => r.entries);
  }

  /** Drag between two committed nodes: rank the admissible edge types. */
  async dragEdge(srcId: number, dstId: number): Promise<EdgeOption[]> {
    try {
      const { options } = await this.api.suggestEdge(this.sessionId, srcId, dstId);
      this.view.showEdgeOptions(srcId, dstId, options);
      return options;
    } catch (err) {
      this.surface(err);
      return [];
    }
  }

  /** The user picked an edge type from the pop-up. */
  async chooseEdge(srcId: number, dstId: number, option: EdgeOption): Promise<void> {
    const forward = option.directions.includes("forward");
    const [src, dst] = forward ? [srcId, dstId] : [dstId, srcId];
    this.model.discardSuggestions();
    try {
      this.sync(await this.api.addEdge(this.sessionId, src, dst, option.etype));
    } catch (err) {
      this.surface(err);
      return;
    }
    await this.fetchSuggestions();
  }

  async submit(): Promise<string | null> {
    if (this.model.pendingConnection) {
      this.view.showError("Connect the pending node before submitting.");
      return null;
    }
    this.model.discardSuggestions();
    try {
      const { persisted_line } = await this.api.submit(this.sessionId);
      this.sync(await this.api.getSession(this.sessionId));
      this.view.showSubmitted(persisted_line);
      return persisted_line;
    } catch (err) {
      this.surface(err);
      return null;
    }
  }

  private surface(err: unknown): void {
    if (err instanceof ApiError) {
      this.view.showError(err.message);
    } else {
      throw err;
    }
  }
}
