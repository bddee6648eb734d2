import { ChatApp } from "./chat.js";

const root = document.getElementById("app");
if (root) {
  new ChatApp(root);
}
