import { ApiClient } from "./api.js";
import { mountPanel } from "./panel.js";

// same-origin by default; ?api=http://host:port points the panel elsewhere
const params = new URLSearchParams(window.location.search);
const base = params.get("api") ?? "";

const root = document.getElementById("app");
if (root === null) throw new Error("missing #app element");
void mountPanel(root, new ApiClient(base));
