/* tslint:disable */
/* eslint-disable */

/**
 * An RGBA frame ready for `ImageData`.
 */
export class Frame {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    rgba(): Uint8Array;
    readonly contact_pixels: number;
    readonly height: number;
    readonly width: number;
}

export function cost_curve(variant: string): Float64Array;

export function lens_sweep(pitch: number, max_amplitude: number, steps: number, seed: number): Float64Array;

export function render_contact(variant: string, shape: string, dx: number, dy: number, press: number, yaw: number): Frame;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_frame_free: (a: number, b: number) => void;
    readonly cost_curve: (a: number, b: number) => [number, number, number, number];
    readonly frame_contact_pixels: (a: number) => number;
    readonly frame_height: (a: number) => number;
    readonly frame_rgba: (a: number) => [number, number];
    readonly frame_width: (a: number) => number;
    readonly lens_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly render_contact: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
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
