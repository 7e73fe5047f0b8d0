/** SVG canvas rendering with a small force layout and drag-to-connect. */
import type { EdgeOption } from "./api.js";
import type { CanvasController, View } from "./controller.js";
import type { CanvasModel, CanvasNode } from "./model.js";

const NODE_RADIUS = 34;
const SVG_NS = "http://www.w3.org/2000/svg";

export class SvgCanvasView implements View {
  private controller!: CanvasController;
  private model: CanvasModel | null = null;
  private dragFrom: CanvasNode | null = null;
  private dragMoved = false;

  constructor(
    private readonly svg: SVGSVGElement,
    private readonly tipsBox: HTMLElement,
    private readonly popup: HTMLElement,
    private readonly statusBox: HTMLElement,
  ) {}

  attach(controller: CanvasController): void {
    this.controller = controller;
    this.svg.addEventListener("click", (ev) => {
      if (ev.target === this.svg) {
        void this.onCanvasClick(ev);
      }
    });
  }

  private async onCanvasClick(ev: MouseEvent): Promise<void> {
    const model = this.model;
    if (model && model.batch) {
      await this.controller.commitSelections();
      return;
    }
    if (model && (model.pendingConnection || model.closed)) {
      return;
    }
    this.openNodePanel(ev.offsetX, ev.offsetY);
  }

  // -- node panel (3-level drill-down with keyword search) -----------------

  private openNodePanel(x: number, y: number): void {
    void this.renderPanel(x, y, {});
  }

  private async renderPanel(
    x: number,
    y: number,
    picked: { domain?: string; type?: string },
  ): Promise<void> {
    this.popup.innerHTML = "";
    this.popup.style.display = "block";
    this.popup.style.left = `${x}px`;
    this.popup.style.top = `${y}px`;

    const search = document.createElement("input");
    search.placeholder = "search";
    this.popup.appendChild(search);
    const list = document.createElement("ul");
    this.popup.appendChild(list);

    const fill = async () => {
      const filter = search.value;
      let entries: string[];
      if (!picked.domain) {
        entries = await this.controller.listDomains(filter);
      } else if (!picked.type) {
        entries = await this.controller.listTypes(picked.domain, filter);
      } else {
        entries = await this.controller.listNames(picked.type, filter);
      }
      list.innerHTML = "";
      for (const entry of entries) {
        const item = document.createElement("li");
        item.textContent = entry;
        item.addEventListener("click", () => void this.onPanelPick(x, y, picked, entry));
        list.appendChild(item);
      }
    };
    search.addEventListener("input", () => void fill());

    if (picked.type) {
      const useType = document.createElement("button");
      useType.textContent = `use type "${picked.type}"`;
      useType.addEventListener("click", () => {
        this.closePopup();
        void this.controller.addNode("type", picked.type!);
      });
      this.popup.appendChild(useType);
    }
    await fill();
  }

  private async onPanelPick(
    x: number,
    y: number,
    picked: { domain?: string; type?: string },
    entry: string,
  ): Promise<void> {
    if (!picked.domain) {
      await this.renderPanel(x, y, { domain: entry });
    } else if (!picked.type) {
      await this.renderPanel(x, y, { domain: picked.domain, type: entry });
    } else {
      this.closePopup();
      await this.controller.addNode("name", entry);
    }
  }

  private closePopup(): void {
    this.popup.style.display = "none";
    this.popup.innerHTML = "";
  }

  // -- View interface -------------------------------------------------------

  renderGraph(model: CanvasModel): void {
    this.model = model;
    this.relax(model);
    this.draw(model);
  }

  renderSuggestions(model: CanvasModel): void {
    this.renderGraph(model);
  }

  showEdgeOptions(src: number, dst: number, options: EdgeOption[]): void {
    this.popup.innerHTML = "";
    this.popup.style.display = "block";
    const list = document.createElement("ul");
    for (const option of options) {
      const item = document.createElement("li");
      item.textContent = `${option.etype} (${option.score.toFixed(3)})`;
      item.addEventListener("click", () => {
        this.closePopup();
        void this.controller.chooseEdge(src, dst, option);
      });
      list.appendChild(item);
    }
    this.popup.appendChild(list);
  }

  showTips(lines: string[]): void {
    this.tipsBox.innerHTML = "";
    for (const line of lines) {
      const li = document.createElement("li");
      li.textContent = line;
      this.tipsBox.appendChild(li);
    }
  }

  showError(message: string): void {
    this.statusBox.textContent = message;
    this.statusBox.classList.add("error");
  }

  showSubmitted(line: string): void {
    this.statusBox.textContent = `Submitted: ${line}`;
    this.statusBox.classList.remove("error");
  }

  // -- layout and drawing ----------------------------------------------------

  /** A few rounds of a spring layout; user-dragged positions are the seed. */
  private relax(model: CanvasModel): void {
    const nodes = [...model.nodes.values()];
    for (let round = 0; round < 30; round++) {
      for (const a of nodes) {
        let fx = 0;
        let fy = 0;
        for (const b of nodes) {
          if (a === b) {
            continue;
          }
          const dx = a.x - b.x;
          const dy = a.y - b.y;
          const d2 = Math.max(dx * dx + dy * dy, 1);
          fx += (dx / d2) * 4200;
          fy += (dy / d2) * 4200;
        }
        for (const e of model.edges) {
          if (e.src !== a.key && e.dst !== a.key) {
            continue;
          }
          const other = model.nodes.get(e.src === a.key ? e.dst : e.src);
          if (!other) {
            continue;
          }
          const dx = other.x - a.x;
          const dy = other.y - a.y;
          const d = Math.max(Math.hypot(dx, dy), 1);
          fx += (dx / d) * (d - 150) * 0.08;
          fy += (dy / d) * (d - 150) * 0.08;
        }
        a.x = Math.min(Math.max(a.x + fx, NODE_RADIUS), this.svg.clientWidth - NODE_RADIUS);
        a.y = Math.min(Math.max(a.y + fy, NODE_RADIUS), this.svg.clientHeight - NODE_RADIUS);
      }
    }
  }

  private draw(model: CanvasModel): void {
    this.svg.innerHTML = "";
    for (const edge of model.edges) {
      const a = model.nodes.get(edge.src);
      const b = model.nodes.get(edge.dst);
      if (!a || !b) {
        continue;
      }
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      line.setAttribute("class", edge.suggested ? "edge suggested" : "edge");
      line.setAttribute("marker-end", "url(#arrow)");
      this.svg.appendChild(line);
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String((a.x + b.x) / 2));
      label.setAttribute("y", String((a.y + b.y) / 2 - 6));
      label.setAttribute("class", "edge-label");
      label.textContent = edge.etype;
      this.svg.appendChild(label);
    }
    this.ensureArrowMarker();
    for (const node of model.nodes.values()) {
      const group = document.createElementNS(SVG_NS, "g");
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(node.x));
      circle.setAttribute("cy", String(node.y));
      circle.setAttribute("r", String(NODE_RADIUS));
      circle.setAttribute("class", `node ${node.state}`);
      group.appendChild(circle);
      const text = document.createElementNS(SVG_NS, "text");
      text.setAttribute("x", String(node.x));
      text.setAttribute("y", String(node.y + 4));
      text.setAttribute("class", "node-label");
      text.textContent = node.label;
      group.appendChild(text);
      this.wireNodeEvents(group, node);
      this.svg.appendChild(group);
    }
  }

  private wireNodeEvents(group: SVGGElement, node: CanvasNode): void {
    group.addEventListener("mousedown", () => {
      if (node.state === "dark") {
        this.dragFrom = node;
        this.dragMoved = false;
      }
    });
    group.addEventListener("mousemove", () => {
      this.dragMoved = this.dragFrom !== null;
    });
    group.addEventListener("mouseup", () => {
      const from = this.dragFrom;
      this.dragFrom = null;
      if (!from || from === node) {
        return;
      }
      if (node.state === "dark" && from.serverId !== null && node.serverId !== null) {
        void this.controller.dragEdge(from.serverId, node.serverId);
      }
    });
    group.addEventListener("click", (ev) => {
      ev.stopPropagation();
      if (this.dragMoved) {
        return;
      }
      const suggestion = node.suggestion;
      if (suggestion && this.model?.batch) {
        const index = this.model.batch.suggestions.indexOf(suggestion);
        if (index >= 0) {
          this.controller.toggleSuggestion(index);
        }
      }
    });
  }

  private ensureArrowMarker(): void {
    const defs = document.createElementNS(SVG_NS, "defs");
    defs.innerHTML =
      '<marker id="arrow" viewBox="0 0 10 10" refX="28" refY="5" ' +
      'markerWidth="7" markerHeight="7" orient="auto-start-reverse">' +
      '<path d="M 0 0 L 10 5 L 0 10 z" fill="#8a8fa3"/></marker>';
    this.svg.appendChild(defs);
  }
}
