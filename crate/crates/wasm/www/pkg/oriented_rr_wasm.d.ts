/* tslint:disable */
/* eslint-disable */

/**
 * Associated series of `phi` (e.g. `psi:2`, `ch`, `ch-eps:3`) probed on `P^order`.
 */
export function associated_series(phi: string, order: number, p: number): string;

/**
 * `chi(P^d, O(n))` for `n_min <= n <= n_max` as a JSON table.
 */
export function chi_table(d: number, n_min: number, n_max: number): string;

/**
 * Text report of the five cube faces on `space` (e.g. `2,1`).
 */
export function verify_cube(space: string, j: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly associated_series: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly chi_table: (a: number, b: number, c: number) => [number, number, number, number];
    readonly verify_cube: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
