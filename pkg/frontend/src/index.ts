/** Browser bootstrap: mount the console on #app, pointing at the service
 * named by the `api` query parameter (default: same-origin port 8000). */

import { ReviewConsole } from "./console.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("api") ?? `http://${window.location.hostname || "127.0.0.1"}:8000`;

let weights: Record<string, string> | undefined;
const rawWeights = params.get("weights");
if (rawWeights !== null) {
  weights = JSON.parse(rawWeights) as Record<string, string>;
}

const root = document.getElementById("app");
if (root === null) {
  throw new Error("missing #app element");
}
void new ReviewConsole(root, { baseUrl, weights }).showQueue();
