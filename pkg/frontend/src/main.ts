import { SuggestionApi } from "./api.js";
import { CanvasController } from "./controller.js";
import { SvgCanvasView } from "./view.js";

function byId<T extends Element>(id: string): T {
  const el = document.getElementById(id);
  if (!el) {
    throw new Error(`missing element #${id}`);
  }
  return el as unknown as T;
}

window.addEventListener("DOMContentLoaded", () => {
  const api = new SuggestionApi("");
  const view = new SvgCanvasView(
    byId<SVGSVGElement>("canvas"),
    byId<HTMLElement>("tips"),
    byId<HTMLElement>("popup"),
    byId<HTMLElement>("status"),
  );
  const controller = new CanvasController(api, view);
  view.attach(controller);

  byId<HTMLButtonElement>("refresh").addEventListener("click", () => {
    void controller.refreshSuggestions();
  });
  byId<HTMLButtonElement>("submit").addEventListener("click", () => {
    void controller.submit();
  });

  void controller.start();
});
