/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const newton_trajectory: (a: number, b: number, c: number, d: number) => [number, number];
export const objective_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const plq_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const rate_comparison: (a: number, b: number, c: number, d: number) => [number, number];
export const subdifferential_polygon: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
