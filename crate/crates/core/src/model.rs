//! Sensor configurations, the five family presets and validation.

use std::fmt;
use std::str::FromStr;

use crate::color::Rgb;
use crate::error::{Error, Result};
use crate::geom::{RasterFrame, Rect};
use crate::markers::{self, Arrangement, CellShape, LayoutKind, MarkerLayout, Stiffness};
use crate::textfmt::KvDoc;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Elastomer heights outside this range degrade imaging quality.
pub const RECOMMENDED_ELASTOMER_MM: (f64, f64) = (2.0, 5.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    /// Intensity mapping.
    Imm,
    /// Marker displacement.
    Mdm,
    ImmMdm,
    /// Marker displacement fused with through-skin vision.
    MdmMfm,
    /// Intensity mapping fused with through-skin vision (total internal reflection).
    ImmMfm,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::Imm,
        Mechanism::Mdm,
        Mechanism::ImmMdm,
        Mechanism::MdmMfm,
        Mechanism::ImmMfm,
    ];

    pub fn uses_markers(self) -> bool {
        matches!(self, Mechanism::Mdm | Mechanism::ImmMdm | Mechanism::MdmMfm)
    }

    pub fn uses_intensity(self) -> bool {
        matches!(self, Mechanism::Imm | Mechanism::ImmMdm | Mechanism::ImmMfm)
    }

    pub fn uses_fusion(self) -> bool {
        matches!(self, Mechanism::MdmMfm | Mechanism::ImmMfm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SensorVariant {
    CTac,
    CSight,
    CSighTac,
    ViCTac,
    ViCSight,
}

impl SensorVariant {
    pub const ALL: [SensorVariant; 5] = [
        SensorVariant::CTac,
        SensorVariant::CSight,
        SensorVariant::CSighTac,
        SensorVariant::ViCTac,
        SensorVariant::ViCSight,
    ];

    pub fn mechanism(self) -> Mechanism {
        match self {
            SensorVariant::CTac => Mechanism::Mdm,
            SensorVariant::CSight => Mechanism::Imm,
            SensorVariant::CSighTac => Mechanism::ImmMdm,
            SensorVariant::ViCTac => Mechanism::MdmMfm,
            SensorVariant::ViCSight => Mechanism::ImmMfm,
        }
    }

    /// Display name as printed in the cost table.
    pub fn display_name(self) -> &'static str {
        match self {
            SensorVariant::CTac => "C-Tac",
            SensorVariant::CSight => "C-Sight",
            SensorVariant::CSighTac => "C-SighTac",
            SensorVariant::ViCTac => "Vi-C-Tac",
            SensorVariant::ViCSight => "Vi-C-Sight",
        }
    }

    /// True for variants mounted on the commercial Digit base.
    pub fn digit_base(self) -> bool {
        matches!(
            self,
            SensorVariant::CTac | SensorVariant::ViCTac | SensorVariant::ViCSight
        )
    }
}

impl fmt::Display for SensorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensorVariant::CTac => "c-tac",
            SensorVariant::CSight => "c-sight",
            SensorVariant::CSighTac => "c-sightac",
            SensorVariant::ViCTac => "vi-c-tac",
            SensorVariant::ViCSight => "vi-c-sight",
        })
    }
}

impl FromStr for SensorVariant {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match norm.as_str() {
            "ctac" => Ok(SensorVariant::CTac),
            "csight" => Ok(SensorVariant::CSight),
            "csightac" => Ok(SensorVariant::CSighTac),
            "victac" => Ok(SensorVariant::ViCTac),
            "vicsight" => Ok(SensorVariant::ViCSight),
            _ => Err(format!(
                "unknown sensor variant {s:?} (expected c-tac, c-sight, c-sightac, vi-c-tac or vi-c-sight)"
            )),
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Imm => "IMM",
            Mechanism::Mdm => "MDM",
            Mechanism::ImmMdm => "IMM_MDM",
            Mechanism::MdmMfm => "MDM_MFM",
            Mechanism::ImmMfm => "IMM_MFM",
        })
    }
}

impl FromStr for Mechanism {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().replace(['+', '-'], "_").as_str() {
            "IMM" => Ok(Mechanism::Imm),
            "MDM" => Ok(Mechanism::Mdm),
            "IMM_MDM" => Ok(Mechanism::ImmMdm),
            "MDM_MFM" => Ok(Mechanism::MdmMfm),
            "IMM_MFM" => Ok(Mechanism::ImmMfm),
            _ => Err(format!("unknown mechanism {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElastomerSpec {
    pub thickness: f64,
    /// Transmittance factor in [0, 1].
    pub clarity: f64,
    /// Shore-A-like hardness; only scales lateral compliance.
    pub stiffness: f64,
    /// n_elastomer / n_air.
    pub refractive_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinSpec {
    pub thickness: f64,
    /// 0 = opaque, 1 = fully clear.
    pub transparency: f64,
    pub color: Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IlluminationMode {
    White,
    Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlluminationSpec {
    pub mode: IlluminationMode,
    pub base_intensity: Rgb,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSpec {
    pub width: usize,
    pub height: usize,
    pub mm_per_px: f64,
}

/// Linear depth-to-darkness map: `I = I_bg − gain·d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImmParams {
    pub gain: f64,
    /// Press depth that maps to black at the default gain.
    pub depth_max: f64,
}

/// Smoothed-gradient deformation model coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicsParams {
    /// Gaussian width of the lateral smoothing kernel, mm.
    pub sigma: f64,
    /// Lateral compliance at stiffness 30.
    pub kappa: f64,
    /// Per-layer attenuation of marker motion, in (0, 1].
    pub lambda: f64,
    /// Radius growth of flexible markers per mm of local depth.
    pub stretch_gain: f64,
}

impl Default for MechanicsParams {
    fn default() -> Self {
        MechanicsParams {
            sigma: 2.0,
            kappa: 3.0,
            lambda: 0.6,
            stretch_gain: 0.2,
        }
    }
}

/// Total-internal-reflection brightness model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TirParams {
    /// Brightness added per unit of |∇d| (mm/mm).
    pub gradient_gain: f64,
    /// Uniform brightness lift of the contact patch.
    pub contact_gain: f64,
    /// Depth above which a pixel counts as in contact, mm.
    pub depth_threshold: f64,
}

impl Default for TirParams {
    fn default() -> Self {
        TirParams {
            gradient_gain: 0.5,
            contact_gain: 0.15,
            depth_threshold: 1e-6,
        }
    }
}

/// Declarative marker pattern; expanded into a [`MarkerLayout`] on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerSpec {
    pub kind: LayoutKind,
    /// Width and height of the marker region, centred in the sensing area.
    pub region: (f64, f64),
    pub rows: usize,
    pub cols: usize,
    /// Disk radius, or pointer length for coordinate markers.
    pub size: f64,
    /// Cell pitch for tessellations.
    pub pitch: f64,
    pub cell: CellShape,
    pub separation: f64,
    pub stiffness: Stiffness,
    pub colors: [Rgb; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorConfig {
    pub name: String,
    pub mechanism: Mechanism,
    /// Width × height of the sensing surface, mm.
    pub sensing_area: (f64, f64),
    pub elastomer: ElastomerSpec,
    pub skin: SkinSpec,
    pub markers: Option<MarkerSpec>,
    pub imm: Option<ImmParams>,
    pub illumination: IlluminationSpec,
    pub camera: CameraSpec,
    pub mechanics: MechanicsParams,
    pub tir: TirParams,
}

impl SensorConfig {
    pub fn area_rect(&self) -> Rect {
        Rect::sized(self.sensing_area.0, self.sensing_area.1)
    }

    pub fn raster(&self) -> RasterFrame {
        RasterFrame::centered_on(
            &self.area_rect(),
            self.camera.width,
            self.camera.height,
            self.camera.mm_per_px,
        )
    }

    /// Expands the marker spec, if any.
    pub fn marker_layout(&self) -> Result<Option<MarkerLayout>> {
        let Some(spec) = self.markers else {
            return Ok(None);
        };
        let region = self.area_rect().centered(spec.region.0, spec.region.1);
        let grid = Arrangement::Uniform {
            rows: spec.rows,
            cols: spec.cols,
        };
        let [c0, c1, c2] = spec.colors;
        let layout = match spec.kind {
            LayoutKind::Dot => markers::gen_dot_layout(region, grid, spec.size, spec.stiffness, 0, c0)?,
            LayoutKind::DoubleLayer => {
                let off = (
                    0.5 * spec.region.0 / (spec.cols as f64 + 0.5),
                    0.5 * spec.region.1 / (spec.rows as f64 + 0.5),
                );
                markers::gen_double_layer(
                    region,
                    grid,
                    off,
                    spec.size,
                    spec.separation,
                    (c0, c1),
                    spec.stiffness,
                )?
            }
            LayoutKind::Voronoi => markers::gen_voronoi(region, spec.cell, spec.pitch, c0)?,
            LayoutKind::Coordinate => markers::gen_coordinate_markers(
                region,
                spec.rows,
                spec.cols,
                spec.size,
                (c0, c1, c2),
                Rgb::WHITE,
            )?,
        };
        Ok(Some(layout))
    }

    /// Intensity-map background level (mean of the illumination channels).
    pub fn background_level(&self) -> f64 {
        let c = self.illumination.base_intensity;
        (c.r + c.g + c.b) / 3.0
    }
}

fn base(name: &str, mechanism: Mechanism, area: (f64, f64)) -> SensorConfig {
    SensorConfig {
        name: name.to_string(),
        mechanism,
        sensing_area: area,
        elastomer: ElastomerSpec {
            thickness: 4.0,
            clarity: 0.9,
            stiffness: 30.0,
            refractive_ratio: 1.47,
        },
        skin: SkinSpec {
            thickness: 0.5,
            transparency: 0.0,
            color: Rgb::BLACK,
        },
        markers: None,
        imm: None,
        illumination: IlluminationSpec {
            mode: IlluminationMode::Rgb,
            base_intensity: Rgb::new(0.85, 0.9, 0.95),
        },
        camera: CameraSpec {
            width: 480,
            height: 480,
            mm_per_px: 0.1,
        },
        mechanics: MechanicsParams::default(),
        tir: TirParams::default(),
    }
}

fn dot_spec(colors: [Rgb; 3], stiffness: Stiffness) -> MarkerSpec {
    MarkerSpec {
        kind: LayoutKind::Dot,
        region: (17.5, 17.5),
        rows: 7,
        cols: 7,
        size: 0.5,
        pitch: 2.5,
        cell: CellShape::Square,
        separation: 0.0,
        stiffness,
        colors,
    }
}

fn imm_for(level: f64) -> ImmParams {
    let depth_max = 1.5;
    ImmParams {
        gain: level / depth_max,
        depth_max,
    }
}

/// Fully populated, validation-clean configuration for a family member.
pub fn preset(variant: SensorVariant) -> SensorConfig {
    let name = variant.display_name();
    match variant {
        SensorVariant::CTac => {
            let mut c = base(name, Mechanism::Mdm, (34.0, 27.0));
            c.markers = Some(dot_spec([Rgb::WHITE; 3], Stiffness::Flexible));
            c
        }
        SensorVariant::CSight => {
            let mut c = base(name, Mechanism::Imm, (26.5, 26.5));
            c.illumination = IlluminationSpec {
                mode: IlluminationMode::White,
                base_intensity: Rgb::gray(0.9),
            };
            c.imm = Some(imm_for(c.background_level()));
            c
        }
        SensorVariant::CSighTac => {
            let mut c = preset(SensorVariant::CSight);
            c.name = name.to_string();
            c.mechanism = Mechanism::ImmMdm;
            c.markers = Some(dot_spec([Rgb::RED; 3], Stiffness::Rigid));
            c
        }
        SensorVariant::ViCTac => {
            let mut c = base(name, Mechanism::MdmMfm, (34.0, 27.0));
            c.skin.transparency = 1.0;
            c.skin.color = Rgb::WHITE;
            c.markers = Some(MarkerSpec {
                kind: LayoutKind::DoubleLayer,
                region: (18.75, 18.75),
                separation: 1.5,
                ..dot_spec([Rgb::WHITE, Rgb::MAGENTA, Rgb::WHITE], Stiffness::Flexible)
            });
            c
        }
        SensorVariant::ViCSight => {
            let mut c = base(name, Mechanism::ImmMfm, (34.0, 27.0));
            c.skin.transparency = 1.0;
            c.skin.color = Rgb::WHITE;
            c.imm = Some(imm_for(c.background_level()));
            c
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

pub fn has_errors(v: &[Violation]) -> bool {
    v.iter().any(|v| v.severity == Severity::Error)
}

/// Returns every violated invariant (errors) and out-of-recommendation
/// parameter (warnings). Empty iff the config is clean.
pub fn validate_config(cfg: &SensorConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut error = |m: String| {
        out.push(Violation {
            severity: Severity::Error,
            message: m,
        })
    };
    let m = cfg.mechanism;
    let (w, h) = cfg.sensing_area;
    if !(w > 0.0 && h > 0.0) {
        error(format!("sensing area must be positive, got {w}x{h} mm"));
    }
    let e = &cfg.elastomer;
    if !(e.thickness > 0.0 && e.thickness <= 30.0) {
        error(format!("elastomer thickness {} mm outside (0, 30]", e.thickness));
    }
    if !(0.0..=1.0).contains(&e.clarity) {
        error(format!("elastomer clarity {} outside [0, 1]", e.clarity));
    }
    if !(e.stiffness > 0.0) {
        error(format!("elastomer stiffness {} must be positive", e.stiffness));
    }
    if !(e.refractive_ratio > 1.0) {
        error(format!("refractive ratio {} must exceed 1", e.refractive_ratio));
    }
    let s = &cfg.skin;
    if !(s.thickness >= 0.0) {
        error(format!("skin thickness {} must be non-negative", s.thickness));
    }
    if !(0.0..=1.0).contains(&s.transparency) {
        error(format!("skin transparency {} outside [0, 1]", s.transparency));
    }
    if !s.color.in_unit_range() {
        error("skin colour channels must lie in [0, 1]".into());
    }
    if !cfg.illumination.base_intensity.in_unit_range() {
        error("illumination intensities must lie in [0, 1]".into());
    }
    let cam = &cfg.camera;
    if cam.width < 16 || cam.height < 16 {
        error(format!("camera resolution {}x{} below 16x16", cam.width, cam.height));
    }
    if !(cam.mm_per_px > 0.0) {
        error(format!("camera scale {} mm/px must be positive", cam.mm_per_px));
    } else if (cam.width as f64) * cam.mm_per_px < w || (cam.height as f64) * cam.mm_per_px < h {
        error(format!(
            "camera field {}x{} mm does not cover the {w}x{h} mm sensing area",
            cam.width as f64 * cam.mm_per_px,
            cam.height as f64 * cam.mm_per_px
        ));
    }
    let mech = &cfg.mechanics;
    if !(mech.sigma > 0.0 && mech.kappa >= 0.0 && mech.lambda > 0.0 && mech.lambda <= 1.0 && mech.stretch_gain >= 0.0) {
        error("mechanics parameters need sigma > 0, kappa >= 0, lambda in (0, 1], stretch_gain >= 0".into());
    }
    if !(cfg.tir.gradient_gain >= 0.0 && cfg.tir.contact_gain >= 0.0 && cfg.tir.depth_threshold >= 0.0) {
        error("TIR gains and threshold must be non-negative".into());
    }

    // Mechanism / component matrix, checked in both directions.
    match (m.uses_markers(), cfg.markers.is_some()) {
        (true, false) => error(format!("{m} requires markers")),
        (false, true) => error(format!("{m} must not carry markers")),
        _ => {}
    }
    match (m.uses_intensity(), cfg.imm) {
        (true, None) => error(format!("{m} requires intensity-mapping parameters")),
        (false, Some(_)) => error(format!("{m} must not carry intensity-mapping parameters")),
        (true, Some(p)) if !(p.gain > 0.0 && p.depth_max > 0.0) => {
            error("intensity-mapping gain and depth_max must be positive".into())
        }
        _ => {}
    }
    match (m.uses_fusion(), s.transparency > 0.0) {
        (true, false) => error(format!("{m} requires a transparent skin (transparency > 0)")),
        (false, true) => error(format!("{m} requires an opaque skin (transparency 0)")),
        _ => {}
    }
    if cfg.markers.is_some() {
        match cfg.marker_layout() {
            Ok(Some(layout)) => {
                for v in markers::validate_layout(&layout, cfg) {
                    out.push(v);
                }
            }
            Ok(None) => {}
            Err(e) => out.push(Violation {
                severity: Severity::Error,
                message: format!("marker spec cannot be expanded: {e}"),
            }),
        }
    }

    let (lo, hi) = RECOMMENDED_ELASTOMER_MM;
    if e.thickness > 0.0 && (e.thickness < lo || e.thickness > hi) {
        out.push(Violation {
            severity: Severity::Warning,
            message: format!(
                "elastomer thickness {} mm is outside the recommended {lo}-{hi} mm range; image quality degrades with height",
                e.thickness
            ),
        });
    }
    out
}

impl fmt::Display for IlluminationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IlluminationMode::White => "white",
            IlluminationMode::Rgb => "rgb",
        })
    }
}

impl FromStr for IlluminationMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "white" => Ok(IlluminationMode::White),
            "rgb" => Ok(IlluminationMode::Rgb),
            _ => Err(format!("unknown illumination mode {s:?}")),
        }
    }
}

/// Serialises a config to the flat `key: value` format.
pub fn config_to_string(cfg: &SensorConfig) -> String {
    let mut d = KvDoc::new();
    d.push("schema_version", CONFIG_SCHEMA_VERSION);
    d.push("name", &cfg.name);
    d.push("mechanism", cfg.mechanism);
    d.push("sensing_area.width", cfg.sensing_area.0);
    d.push("sensing_area.height", cfg.sensing_area.1);
    d.push("elastomer.thickness", cfg.elastomer.thickness);
    d.push("elastomer.clarity", cfg.elastomer.clarity);
    d.push("elastomer.stiffness", cfg.elastomer.stiffness);
    d.push("elastomer.refractive_ratio", cfg.elastomer.refractive_ratio);
    d.push("skin.thickness", cfg.skin.thickness);
    d.push("skin.transparency", cfg.skin.transparency);
    d.push("skin.color", cfg.skin.color);
    d.push("illumination.mode", cfg.illumination.mode);
    d.push("illumination.base_intensity", cfg.illumination.base_intensity);
    d.push("camera.width", cfg.camera.width);
    d.push("camera.height", cfg.camera.height);
    d.push("camera.mm_per_px", cfg.camera.mm_per_px);
    d.push("mechanics.sigma", cfg.mechanics.sigma);
    d.push("mechanics.kappa", cfg.mechanics.kappa);
    d.push("mechanics.lambda", cfg.mechanics.lambda);
    d.push("mechanics.stretch_gain", cfg.mechanics.stretch_gain);
    d.push("tir.gradient_gain", cfg.tir.gradient_gain);
    d.push("tir.contact_gain", cfg.tir.contact_gain);
    d.push("tir.depth_threshold", cfg.tir.depth_threshold);
    if let Some(p) = cfg.imm {
        d.push("imm.gain", p.gain);
        d.push("imm.depth_max", p.depth_max);
    }
    if let Some(m) = cfg.markers {
        d.push("markers.kind", m.kind);
        d.push("markers.region_width", m.region.0);
        d.push("markers.region_height", m.region.1);
        d.push("markers.rows", m.rows);
        d.push("markers.cols", m.cols);
        d.push("markers.size", m.size);
        d.push("markers.pitch", m.pitch);
        d.push("markers.cell", m.cell);
        d.push("markers.separation", m.separation);
        d.push("markers.stiffness", m.stiffness);
        d.push("markers.color0", m.colors[0]);
        d.push("markers.color1", m.colors[1]);
        d.push("markers.color2", m.colors[2]);
    }
    d.render()
}

pub fn config_from_str(text: &str) -> Result<SensorConfig> {
    let d = KvDoc::parse(text)?;
    d.check_schema(CONFIG_SCHEMA_VERSION)?;
    let imm = if d.has("imm.gain") {
        Some(ImmParams {
            gain: d.get("imm.gain")?,
            depth_max: d.get("imm.depth_max")?,
        })
    } else {
        None
    };
    let markers = if d.has("markers.kind") {
        Some(MarkerSpec {
            kind: d.get("markers.kind")?,
            region: (d.get("markers.region_width")?, d.get("markers.region_height")?),
            rows: d.get("markers.rows")?,
            cols: d.get("markers.cols")?,
            size: d.get("markers.size")?,
            pitch: d.get("markers.pitch")?,
            cell: d.get("markers.cell")?,
            separation: d.get("markers.separation")?,
            stiffness: d.get("markers.stiffness")?,
            colors: [
                d.get("markers.color0")?,
                d.get("markers.color1")?,
                d.get("markers.color2")?,
            ],
        })
    } else {
        None
    };
    let defaults = TirParams::default();
    Ok(SensorConfig {
        name: d.get("name")?,
        mechanism: d.get("mechanism")?,
        sensing_area: (d.get("sensing_area.width")?, d.get("sensing_area.height")?),
        elastomer: ElastomerSpec {
            thickness: d.get("elastomer.thickness")?,
            clarity: d.get("elastomer.clarity")?,
            stiffness: d.get("elastomer.stiffness")?,
            refractive_ratio: d.get("elastomer.refractive_ratio")?,
        },
        skin: SkinSpec {
            thickness: d.get("skin.thickness")?,
            transparency: d.get("skin.transparency")?,
            color: d.get("skin.color")?,
        },
        markers,
        imm,
        illumination: IlluminationSpec {
            mode: d.get("illumination.mode")?,
            base_intensity: d.get("illumination.base_intensity")?,
        },
        camera: CameraSpec {
            width: d.get("camera.width")?,
            height: d.get("camera.height")?,
            mm_per_px: d.get("camera.mm_per_px")?,
        },
        mechanics: MechanicsParams {
            sigma: d.get("mechanics.sigma")?,
            kappa: d.get("mechanics.kappa")?,
            lambda: d.get("mechanics.lambda")?,
            stretch_gain: d.get("mechanics.stretch_gain")?,
        },
        tir: TirParams {
            gradient_gain: d.get_opt("tir.gradient_gain")?.unwrap_or(defaults.gradient_gain),
            contact_gain: d.get_opt("tir.contact_gain")?.unwrap_or(defaults.contact_gain),
            depth_threshold: d.get_opt("tir.depth_threshold")?.unwrap_or(defaults.depth_threshold),
        },
    })
}

pub fn load_config(path: &std::path::Path) -> Result<SensorConfig> {
    config_from_str(&std::fs::read_to_string(path)?)
}

pub fn save_config(cfg: &SensorConfig, path: &std::path::Path) -> Result<()> {
    std::fs::write(path, config_to_string(cfg)).map_err(Error::from)
}
