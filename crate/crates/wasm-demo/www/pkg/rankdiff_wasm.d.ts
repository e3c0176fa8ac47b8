/* tslint:disable */
/* eslint-disable */

/**
 * One institution against an expected percentage (10 for the top decile).
 */
export function compareExpected(pp_percent: number, n: number, expected_percent: number): string;

/**
 * Two institutions given as PP_top10% (percent) and publication count.
 */
export function comparePair(pp1_percent: number, n1: number, pp2_percent: number, n2: number, bonferroni_m: number): string;

/**
 * Family-wise error over `k` null institutions, with and without Bonferroni.
 */
export function familyError(k: number, n: number, p_percent: number, trials: number, seed: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly compareExpected: (a: number, b: number, c: number) => [number, number, number, number];
    readonly comparePair: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly familyError: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
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
