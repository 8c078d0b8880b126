import { ApiClient, ApiError } from "./api.js";
import { ConsoleController } from "./controller.js";
import { PANELS, type Panel } from "./state.js";

// The console is served by the same process as the API, so the base
// URL is wherever the page came from. Location hash carries the open
// project and panel ("#campusbike/model") to survive reloads.

function parseHash(hash: string): { projectId: string; panel: Panel } | null {
  const [projectId, panel] = hash.replace(/^#/, "").split("/");
  if (!projectId) return null;
  const chosen = PANELS.includes(panel as Panel) ? (panel as Panel) : "dialog";
  return { projectId, panel: chosen };
}

function landing(root: HTMLElement, api: ApiClient): void {
  root.innerHTML = `
    <div class="landing">
      <h1>Architect console</h1>
      <form data-landing>
        <label>Project id <input name="project" pattern="[A-Za-z0-9][A-Za-z0-9._-]*" required></label>
        <button type="submit" value="open">Open</button>
        <button type="submit" value="create" name="create">Create</button>
      </form>
      <p class="landing-error" hidden></p>
    </div>`;
  const form = root.querySelector<HTMLFormElement>("form[data-landing]")!;
  const error = root.querySelector<HTMLParagraphElement>(".landing-error")!;
  form.addEventListener("submit", async (event) => {
    event.preventDefault();
    const projectId = (
      form.elements.namedItem("project") as HTMLInputElement
    ).value.trim();
    const create = (event as SubmitEvent).submitter?.getAttribute("name");
    try {
      if (create === "create") {
        await api.createProject(projectId);
      } else {
        await api.status(projectId);
      }
      location.hash = `#${projectId}/dialog`;
    } catch (err) {
      error.hidden = false;
      error.textContent =
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    }
  });
}

function boot(): void {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const api = new ApiClient(location.origin);
  let controller: ConsoleController | null = null;

  const route = () => {
    controller?.dispose();
    controller = null;
    const parsed = parseHash(location.hash);
    if (!parsed) {
      landing(root, api);
      return;
    }
    controller = new ConsoleController(root, api, parsed.projectId, {
      panel: parsed.panel,
      onPanelChange: (panel) => {
        history.replaceState(null, "", `#${parsed.projectId}/${panel}`);
      },
    });
    controller.open().catch((err) => {
      root.innerHTML = `<div class="banner banner-error">${
        err instanceof ApiError ? `${err.code}: ${err.message}` : String(err)
      }</div>`;
    });
  };

  window.addEventListener("hashchange", () => {
    // Re-route only when the project segment changes; panel moves are
    // already handled in place.
    route();
  });
  route();
}

boot();
