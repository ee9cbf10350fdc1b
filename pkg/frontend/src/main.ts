import { ApiClient } from "./api.js";
import { createApp } from "./views/app.js";

const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");

const app = createApp(new ApiClient(""));
root.append(app.element);
void app.refresh();
