import { ApiClient } from "./api";
import { App } from "./app";

const ANNOTATOR_KEY = "trustlens.annotator";

function annotatorId(): string {
  let id = localStorage.getItem(ANNOTATOR_KEY);
  if (!id) {
    id = `annotator-${Math.random().toString(36).slice(2, 8)}`;
    localStorage.setItem(ANNOTATOR_KEY, id);
  }
  return id;
}

const root = document.getElementById("app");
if (root) {
  const app = new App(root, new ApiClient(""), annotatorId());
  void app.start();
}
