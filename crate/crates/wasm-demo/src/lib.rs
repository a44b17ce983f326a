//! Browser bindings: render a contact frame, plot the batch cost curve,
//! and sweep lens-texture amplitude against SSIM.
//!
//! The `*_impl` functions are plain Rust so they can be tested natively.

use tactsim::contact::{compute_depth_field, compute_displacement_field, displace_markers, ContactPose, IndenterKind};
use tactsim::cost::{bundled_table, find_record, sweep, Calibration};
use tactsim::render::{
    apply_lens_distortion, render_imm, render_imm_mdm, render_mdm, render_tir, Fabric, LensTextureParams,
    StripeOrientation, TactileImage,
};
use tactsim::ssim::ssim;
use tactsim::{preset, Mechanism, Rgb, SensorVariant};
use wasm_bindgen::prelude::*;

/// An RGBA frame ready for `ImageData`.
#[wasm_bindgen]
pub struct Frame {
    width: usize,
    height: usize,
    rgba: Vec<u8>,
    contact_pixels: usize,
}

#[wasm_bindgen]
impl Frame {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }
    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }
    #[wasm_bindgen(getter)]
    pub fn contact_pixels(&self) -> usize {
        self.contact_pixels
    }
    pub fn rgba(&self) -> Vec<u8> {
        self.rgba.clone()
    }
}

fn to_rgba(img: &TactileImage) -> Vec<u8> {
    let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
    img.pixels.iter().flat_map(|p| [q(p.r), q(p.g), q(p.b), 255]).collect()
}

/// Presses `shape` into `variant` at an offset (mm) from the sensing-area centre.
pub fn render_contact_impl(variant: &str, shape: &str, dx: f64, dy: f64, press: f64, yaw: f64) -> Result<Frame, String> {
    let v: SensorVariant = variant.parse().map_err(|e| format!("{e}"))?;
    let kind: IndenterKind = shape.parse().map_err(|e| format!("{e}"))?;
    let cfg = preset(v);
    let c = cfg.area_rect().center();
    let pose = ContactPose::new(c.x + dx, c.y + dy, press, yaw);
    let depth = compute_depth_field(&kind.default_shape(), &pose, &cfg).map_err(|e| e.to_string())?;
    let frame = cfg.raster();
    let bg = cfg
        .mechanism
        .uses_fusion()
        .then(|| Fabric::Cotton.scene(&frame, (0.0, 0.0), 0, 1.0));
    let layout = cfg.marker_layout().map_err(|e| e.to_string())?;
    let field = compute_displacement_field(&depth, &cfg.elastomer, &cfg.mechanics);
    let moved = layout.as_ref().map(|l| displace_markers(l, &field, &cfg.mechanics));
    let need = || moved.as_ref().ok_or_else(|| "variant has no markers".to_string());
    let img = match cfg.mechanism {
        Mechanism::Imm => render_imm(&depth, &cfg),
        Mechanism::ImmMdm => render_imm_mdm(&depth, need()?, &cfg),
        Mechanism::Mdm => render_mdm(need()?, &cfg, None),
        Mechanism::MdmMfm => render_mdm(need()?, &cfg, bg.as_ref()),
        Mechanism::ImmMfm => render_tir(&depth, &cfg, bg.as_ref().expect("fusion background")),
    }
    .map_err(|e| e.to_string())?;
    Ok(Frame {
        width: img.width,
        height: img.height,
        rgba: to_rgba(&img),
        contact_pixels: depth.data.iter().filter(|&&d| d > 0.0).count(),
    })
}

/// `[capacity, avg_time_min, avg_cost_gbp]` triples, flattened, for capacities 1..=max.
pub fn cost_curve_impl(variant: &str) -> Result<Vec<f64>, String> {
    let v: SensorVariant = variant.parse().map_err(|e| format!("{e}"))?;
    let table = bundled_table();
    let rec = find_record(&table, v).ok_or_else(|| format!("{variant} is not in the cost table"))?;
    let cal = Calibration::for_record(rec);
    Ok(sweep(rec, &cal)
        .iter()
        .flat_map(|p| [p.capacity as f64, p.avg_time, p.avg_cost])
        .collect())
}

fn checkerboard(n: usize, cell: usize) -> TactileImage {
    let mut img = TactileImage::filled(n, n, Rgb::BLACK, Mechanism::Imm);
    for j in 0..n {
        for i in 0..n {
            if (i / cell + j / cell) % 2 == 0 {
                img.set(i, j, Rgb::WHITE);
            }
        }
    }
    img
}

/// `[amplitude_px, ssim]` pairs, flattened, for a checkerboard behind a striped lens.
pub fn lens_sweep_impl(pitch: f64, max_amplitude: f64, steps: usize, seed: u64) -> Result<Vec<f64>, String> {
    let clean = checkerboard(128, 16);
    let steps = steps.max(1);
    let mut out = Vec::with_capacity(2 * (steps + 1));
    for k in 0..=steps {
        let amp = max_amplitude * k as f64 / steps as f64;
        let params = LensTextureParams {
            stripe_pitch_px: pitch,
            amplitude_px: amp,
            orientation: StripeOrientation::X,
            seed,
        };
        let d = apply_lens_distortion(&clean, &params).map_err(|e| e.to_string())?;
        out.push(amp);
        out.push(ssim(&clean, &d, 7).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn render_contact(variant: &str, shape: &str, dx: f64, dy: f64, press: f64, yaw: f64) -> Result<Frame, JsError> {
    render_contact_impl(variant, shape, dx, dy, press, yaw).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cost_curve(variant: &str) -> Result<Vec<f64>, JsError> {
    cost_curve_impl(variant).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lens_sweep(pitch: f64, max_amplitude: f64, steps: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    lens_sweep_impl(pitch, max_amplitude, steps, seed as u64).map_err(|e| JsError::new(&e))
}
