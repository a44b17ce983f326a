/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_frame_free: (a: number, b: number) => void;
export const cost_curve: (a: number, b: number) => [number, number, number, number];
export const frame_contact_pixels: (a: number) => number;
export const frame_height: (a: number) => number;
export const frame_rgba: (a: number) => [number, number];
export const frame_width: (a: number) => number;
export const lens_sweep: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const render_contact: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
