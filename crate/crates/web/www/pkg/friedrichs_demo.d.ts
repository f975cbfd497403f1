/* tslint:disable */
/* eslint-disable */

/**
 * `[m(k), M(k)]`.
 */
export function band_edges(k1: number, k2: number, k3: number): Float64Array;

export function determinant_curve(k1: number, k2: number, k3: number, gamma: number, mu: number, z_lo: number, z_hi: number, n: number, tol: number): Float64Array;

/**
 * Regime codes `3·lower + upper` (0 none, 1 virtual, 2 eigenvalue) on a
 * grid, μ-major with μ increasing.
 */
export function phase_diagram(j0: number, gamma_lo: number, gamma_hi: number, n_gamma: number, mu_lo: number, mu_hi: number, n_mu: number, rel_tol: number): Uint8Array;

/**
 * `J₀`, the integral at the bottom threshold.
 */
export function threshold(tol: number): number;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly band_edges: (a: number, b: number, c: number) => [number, number, number, number];
    readonly determinant_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly phase_diagram: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly threshold: (a: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
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
