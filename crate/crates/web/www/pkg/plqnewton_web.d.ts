/* tslint:disable */
/* eslint-disable */

/**
 * Manifold Newton iterates from a clicked start, as JSON
 * `{ok, converged, iterates, errors, rate, warnings}` or `{ok: false, message}`.
 */
export function newton_trajectory(bench: string, x1: number, x2: number): string;

/**
 * Objective `h(c(x))` of a two-variable benchmark on a grid.
 */
export function objective_grid(bench: string, xmin: number, xmax: number, ymin: number, ymax: number, nx: number, ny: number): Float64Array;

/**
 * Values of a catalog PLQ function on a grid; empty for an unknown name.
 */
export function plq_grid(name: string, xmin: number, xmax: number, ymin: number, ymax: number, nx: number, ny: number): Float64Array;

/**
 * Error sequences of Newton and two quasi-Newton schedules from the same start, as JSON
 * `{newton, decaying, fixed}` with one trace object (or failure) each.
 */
export function rate_comparison(bench: string, x1: number, x2: number): string;

/**
 * Vertices `[y1, y2, y1, y2, …]` of `∂h(u)` clipped to a box, counterclockwise; empty outside `dom h`.
 */
export function subdifferential_polygon(name: string, u1: number, u2: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly newton_trajectory: (a: number, b: number, c: number, d: number) => [number, number];
    readonly objective_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly plq_grid: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
    readonly rate_comparison: (a: number, b: number, c: number, d: number) => [number, number];
    readonly subdifferential_polygon: (a: number, b: number, c: number, d: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
