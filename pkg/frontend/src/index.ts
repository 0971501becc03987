export * from "./protocol.js";
export * from "./viewmodel.js";
export * from "./client.js";
