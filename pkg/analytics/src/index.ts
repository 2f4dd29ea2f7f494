export * from "./schema";
export * from "./stats";
export * from "./figures";
