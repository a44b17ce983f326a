//! Seeded synthetic recognition datasets: recipes, per-sample rendering,
//! manifests, and the feature/evaluation pipeline.

use std::f64::consts::PI;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contact::{compute_depth_field, compute_displacement_field, displace_markers, ContactPose, DepthField, IndenterKind};
use crate::error::{Error, Result};
use crate::geom::{V2, P2};
use crate::markers::{MarkerLayout, Marker};
use crate::model::{preset, SensorConfig, SensorVariant};
use crate::perception::{
    accuracy, confusion_matrix, detect_markers, extract_features, match_markers, texture_features, Correspondence,
    Detection, FeatureInput, KnnModel,
};
use crate::render::{render_mdm, BackgroundScene, Fabric, TactileImage};
use crate::textfmt::KvDoc;

pub const MANIFEST_SCHEMA_MAJOR: u32 = 1;
pub const RECIPE_SCHEMA_VERSION: u32 = 1;
/// Neighbours used by the recognition heads.
pub const DEFAULT_K: usize = 3;
/// Share of each stratum used for training.
pub const DEFAULT_TRAIN_FRAC: f64 = 0.7;
/// Background attenuation of fabric seen through a clear skin.
pub const FABRIC_DISTANCE_FACTOR: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetMode {
    /// One label per sample: the indenter.
    Object,
    /// Two labels per sample: the part and the fabric wrapped over it.
    Hybrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jitter {
    /// Contact centre is the area centre plus a uniform offset in ±this, mm.
    pub center_mm: f64,
    pub press_mm: (f64, f64),
    pub yaw_rad: (f64, f64),
}

impl Default for Jitter {
    fn default() -> Self {
        Jitter {
            center_mm: 3.0,
            press_mm: (0.3, 1.0),
            yaw_rad: (0.0, 2.0 * PI),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recipe {
    pub mode: DatasetMode,
    pub variant: SensorVariant,
    pub classes: Vec<IndenterKind>,
    /// Fabrics crossed with `classes` in hybrid mode.
    pub textures: Vec<Fabric>,
    pub samples_per_class: usize,
    pub jitter: Jitter,
    pub seed: u64,
}

impl Recipe {
    /// Six indenters on C-Tac.
    pub fn object(samples_per_class: usize, seed: u64) -> Self {
        Recipe {
            mode: DatasetMode::Object,
            variant: SensorVariant::CTac,
            classes: IndenterKind::ALL.to_vec(),
            textures: Vec::new(),
            samples_per_class,
            jitter: Jitter::default(),
            seed,
        }
    }

    /// Three parts × three fabrics on Vi-C-Tac.
    pub fn hybrid(samples_per_class: usize, seed: u64) -> Self {
        Recipe {
            mode: DatasetMode::Hybrid,
            variant: SensorVariant::ViCTac,
            classes: vec![IndenterKind::Curve, IndenterKind::Waves, IndenterKind::MultiDot],
            textures: Fabric::ALL.to_vec(),
            samples_per_class,
            jitter: Jitter::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::Parameter("a recipe needs at least two classes".into()));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Parameter("samples_per_class must be positive".into()));
        }
        if self.mode == DatasetMode::Hybrid && self.textures.len() < 2 {
            return Err(Error::Parameter("hybrid recipes need at least two textures".into()));
        }
        let j = &self.jitter;
        if !(j.center_mm >= 0.0 && 0.0 < j.press_mm.0 && j.press_mm.0 <= j.press_mm.1 && j.yaw_rad.0 <= j.yaw_rad.1) {
            return Err(Error::Parameter("invalid jitter ranges".into()));
        }
        let cfg = preset(self.variant);
        if !cfg.mechanism.uses_markers() {
            return Err(Error::Parameter(format!("{} has no markers to track", self.variant)));
        }
        if self.mode == DatasetMode::Hybrid && cfg.skin.transparency <= 0.0 {
            return Err(Error::Parameter(format!("{} cannot see fabric through its skin", self.variant)));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut d = KvDoc::new();
        d.push("schema_version", RECIPE_SCHEMA_VERSION);
        d.push(
            "mode",
            match self.mode {
                DatasetMode::Object => "object",
                DatasetMode::Hybrid => "hybrid",
            },
        );
        d.push("sensor", self.variant);
        d.push("classes", join(&self.classes));
        if !self.textures.is_empty() {
            d.push("textures", join(&self.textures));
        }
        d.push("samples_per_class", self.samples_per_class);
        d.push("jitter.center_mm", self.jitter.center_mm);
        d.push("jitter.press_min_mm", self.jitter.press_mm.0);
        d.push("jitter.press_max_mm", self.jitter.press_mm.1);
        d.push("jitter.yaw_min_rad", self.jitter.yaw_rad.0);
        d.push("jitter.yaw_max_rad", self.jitter.yaw_rad.1);
        d.push("seed", self.seed);
        d.render()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let d = KvDoc::parse(text)?;
        d.check_schema(RECIPE_SCHEMA_VERSION)?;
        let (mode_s, line) = d.raw("mode")?;
        let mode = match mode_s {
            "object" => DatasetMode::Object,
            "hybrid" => DatasetMode::Hybrid,
            other => return Err(Error::parse(line, format!("unknown mode {other:?}"))),
        };
        let split = |key: &str| -> Result<Vec<String>> {
            Ok(match d.get_opt::<String>(key)? {
                Some(s) => s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
                None => Vec::new(),
            })
        };
        let parse_all = |key: &str| -> Result<Vec<_>> {
            split(key)?
                .iter()
                .map(|s| s.parse::<IndenterKind>().map_err(|e| Error::parse(0, e)))
                .collect()
        };
        let textures: Result<Vec<Fabric>> = split("textures")?
            .iter()
            .map(|s| s.parse::<Fabric>().map_err(|e| Error::parse(0, e)))
            .collect();
        let def = Jitter::default();
        let r = Recipe {
            mode,
            variant: d.get("sensor")?,
            classes: parse_all("classes")?,
            textures: textures?,
            samples_per_class: d.get("samples_per_class")?,
            jitter: Jitter {
                center_mm: d.get_opt("jitter.center_mm")?.unwrap_or(def.center_mm),
                press_mm: (
                    d.get_opt("jitter.press_min_mm")?.unwrap_or(def.press_mm.0),
                    d.get_opt("jitter.press_max_mm")?.unwrap_or(def.press_mm.1),
                ),
                yaw_rad: (
                    d.get_opt("jitter.yaw_min_rad")?.unwrap_or(def.yaw_rad.0),
                    d.get_opt("jitter.yaw_max_rad")?.unwrap_or(def.yaw_rad.1),
                ),
            },
            seed: d.get("seed")?,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn object_labels(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.to_string()).collect()
    }

    pub fn texture_labels(&self) -> Vec<String> {
        self.textures.iter().map(|t| t.to_string()).collect()
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Sub-seed of one sample; independent of generation order.
pub fn sample_seed(master: u64, sample_id: usize) -> u64 {
    // splitmix64 finaliser over the pair.
    let mut z = master ^ (sample_id as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub sample_id: usize,
    pub variant: SensorVariant,
    pub kind: IndenterKind,
    pub texture: Option<Fabric>,
    pub pose: ContactPose,
    /// Offset of the fabric patch under the skin, mm.
    pub texture_offset: (f64, f64),
    pub seed: u64,
    pub object_label: usize,
    pub texture_label: Option<usize>,
}

/// Expands a recipe into its samples, class-major.
pub fn plan_samples(recipe: &Recipe) -> Result<Vec<SampleSpec>> {
    recipe.validate()?;
    let cfg = preset(recipe.variant);
    let center = cfg.area_rect().center();
    let combos: Vec<(usize, Option<usize>)> = match recipe.mode {
        DatasetMode::Object => (0..recipe.classes.len()).map(|c| (c, None)).collect(),
        DatasetMode::Hybrid => (0..recipe.classes.len())
            .flat_map(|c| (0..recipe.textures.len()).map(move |t| (c, Some(t))))
            .collect(),
    };
    let j = recipe.jitter;
    let mut out = Vec::with_capacity(combos.len() * recipe.samples_per_class);
    for (c, t) in combos {
        for _ in 0..recipe.samples_per_class {
            let sample_id = out.len();
            let seed = sample_seed(recipe.seed, sample_id);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut uni = |lo: f64, hi: f64| if hi > lo { rng.gen_range(lo..hi) } else { lo };
            let dx = uni(-j.center_mm, j.center_mm);
            let dy = uni(-j.center_mm, j.center_mm);
            let press = uni(j.press_mm.0, j.press_mm.1);
            let yaw = uni(j.yaw_rad.0, j.yaw_rad.1);
            let texture_offset = (uni(0.0, 10.0), uni(0.0, 10.0));
            out.push(SampleSpec {
                sample_id,
                variant: recipe.variant,
                kind: recipe.classes[c],
                texture: t.map(|t| recipe.textures[t]),
                pose: ContactPose::new(center.x + dx, center.y + dy, press, yaw),
                texture_offset,
                seed,
                object_label: c,
                texture_label: t,
            });
        }
    }
    Ok(out)
}

/// Everything simulated for one sample.
#[derive(Debug, Clone)]
pub struct RenderedSample {
    pub reference: TactileImage,
    pub contact: TactileImage,
    pub depth: DepthField,
    pub rest_layout: MarkerLayout,
    pub displaced_layout: MarkerLayout,
}

impl RenderedSample {
    /// Ground-truth marker motion in pixels, one entry per marker.
    pub fn true_displacements(&self) -> Vec<(P2, V2)> {
        let frame = self.depth.frame;
        self.rest_layout
            .markers
            .iter()
            .zip(&self.displaced_layout.markers)
            .map(|(a, b): (&Marker, &Marker)| {
                let p = frame.to_px(a.geometry.anchor());
                (p, frame.to_px(b.geometry.anchor()) - p)
            })
            .collect()
    }
}

pub fn sample_background(cfg: &SensorConfig, spec: &SampleSpec) -> Option<BackgroundScene> {
    spec.texture
        .map(|f| f.scene(&cfg.raster(), spec.texture_offset, spec.seed, FABRIC_DISTANCE_FACTOR))
}

/// Presses the sample's indenter and renders reference and contact frames.
pub fn render_sample(cfg: &SensorConfig, layout: &MarkerLayout, spec: &SampleSpec) -> Result<RenderedSample> {
    let depth = compute_depth_field(&spec.kind.default_shape(), &spec.pose, cfg)?;
    let field = compute_displacement_field(&depth, &cfg.elastomer, &cfg.mechanics);
    let displaced = displace_markers(layout, &field, &cfg.mechanics);
    let bg = sample_background(cfg, spec);
    let mut reference = render_mdm(layout, cfg, bg.as_ref())?;
    let mut contact = render_mdm(&displaced, cfg, bg.as_ref())?;
    reference.frame_id = 2 * spec.sample_id as u64;
    contact.frame_id = 2 * spec.sample_id as u64 + 1;
    Ok(RenderedSample {
        reference,
        contact,
        depth,
        rest_layout: layout.clone(),
        displaced_layout: displaced,
    })
}

/// Colours to detect for a marker-bearing config, deepest layer first.
pub fn detection_colors(cfg: &SensorConfig) -> Vec<crate::color::Rgb> {
    match cfg.markers {
        Some(m) => match m.kind {
            crate::markers::LayoutKind::DoubleLayer => m.colors[..2].to_vec(),
            crate::markers::LayoutKind::Coordinate => vec![m.colors[0], m.colors[1], m.colors[2], crate::Rgb::WHITE],
            _ => vec![m.colors[0]],
        },
        None => Vec::new(),
    }
}

/// Detects and matches markers between a reference and a contact frame.
pub fn track(cfg: &SensorConfig, reference: &TactileImage, contact: &TactileImage) -> Result<Vec<Correspondence>> {
    let spec = cfg
        .markers
        .ok_or_else(|| Error::Parameter("configuration has no markers".into()))?;
    let colors = detection_colors(cfg);
    let a = detect_markers(reference, spec.kind, &colors);
    let b = detect_markers(contact, spec.kind, &colors);
    match_markers(&a, &b)
}

/// Tracks against precomputed reference detections.
pub fn track_from(cfg: &SensorConfig, reference: &[Detection], contact: &TactileImage) -> Result<Vec<Correspondence>> {
    let spec = cfg
        .markers
        .ok_or_else(|| Error::Parameter("configuration has no markers".into()))?;
    let b = detect_markers(contact, spec.kind, &detection_colors(cfg));
    match_markers(reference, &b)
}

/// Motion features and (for clear skins) texture features of one sample.
pub fn sample_features(cfg: &SensorConfig, reference: &TactileImage, contact: &TactileImage) -> Result<(Vec<f64>, Vec<f64>)> {
    let corr = track(cfg, reference, contact)?;
    let motion = extract_features(FeatureInput {
        correspondences: Some(&corr),
        depth: None,
    })?;
    let texture = texture_features(contact)?;
    Ok((motion, texture))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub sample_id: usize,
    pub object_label: usize,
    pub texture_label: Option<usize>,
    pub motion: Vec<f64>,
    pub texture: Vec<f64>,
}

/// Renders every sample of a recipe in memory and extracts its features.
pub fn build_features(recipe: &Recipe) -> Result<Vec<FeatureRow>> {
    let specs = plan_samples(recipe)?;
    let cfg = preset(recipe.variant);
    let layout = cfg
        .marker_layout()?
        .ok_or_else(|| Error::Parameter("recipe sensor has no markers".into()))?;
    let mut rows = Vec::with_capacity(specs.len());
    for spec in &specs {
        let s = render_sample(&cfg, &layout, spec)?;
        let (motion, texture) = sample_features(&cfg, &s.reference, &s.contact)?;
        rows.push(FeatureRow {
            sample_id: spec.sample_id,
            object_label: spec.object_label,
            texture_label: spec.texture_label,
            motion,
            texture,
        });
    }
    Ok(rows)
}

/// Recomputes features from a generated dataset on disk. Reference frames
/// shared between rows are decoded and detected once.
pub fn features_from_manifest(rows: &[ManifestRow], dir: &Path) -> Result<Vec<FeatureRow>> {
    let mut cache: std::collections::HashMap<(SensorVariant, String), Vec<Detection>> = Default::default();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let spec = &r.spec;
        let cfg = preset(spec.variant);
        let mk = cfg
            .markers
            .ok_or_else(|| Error::Parameter(format!("{} has no markers", spec.variant)))?;
        let key = (spec.variant, r.reference_image.clone());
        if !cache.contains_key(&key) {
            let img = crate::io::read_png(&dir.join(&r.reference_image), cfg.mechanism)?;
            cache.insert(key.clone(), detect_markers(&img, mk.kind, &detection_colors(&cfg)));
        }
        let contact = crate::io::read_png(&dir.join(&r.contact_image), cfg.mechanism)?;
        let corr = track_from(&cfg, &cache[&key], &contact)?;
        let motion = extract_features(FeatureInput {
            correspondences: Some(&corr),
            depth: None,
        })?;
        out.push(FeatureRow {
            sample_id: spec.sample_id,
            object_label: spec.object_label,
            texture_label: spec.texture_label,
            motion,
            texture: texture_features(&contact)?,
        });
    }
    Ok(out)
}

/// Label names recovered from manifest rows: `(objects, textures)`, indexed
/// by label. Errors when a label index has no row or maps to two names.
pub fn manifest_labels(rows: &[ManifestRow]) -> Result<(Vec<String>, Vec<String>)> {
    fn collect(pairs: impl Iterator<Item = (usize, String)>) -> Result<Vec<String>> {
        let mut names: Vec<Option<String>> = Vec::new();
        for (i, n) in pairs {
            if names.len() <= i {
                names.resize(i + 1, None);
            }
            match &names[i] {
                Some(old) if *old != n => {
                    return Err(Error::Parameter(format!("label {i} names both {old:?} and {n:?}")));
                }
                _ => names[i] = Some(n),
            }
        }
        names
            .into_iter()
            .enumerate()
            .map(|(i, n)| n.ok_or_else(|| Error::Parameter(format!("label {i} has no samples"))))
            .collect()
    }
    let objects = collect(rows.iter().map(|r| (r.spec.object_label, r.spec.kind.to_string())))?;
    let textures = collect(
        rows.iter()
            .filter_map(|r| Some((r.spec.texture_label?, r.spec.texture?.to_string()))),
    )?;
    Ok((objects, textures))
}

/// Stratified split: within each object class the rows are shuffled with
/// `seed` and the first `train_frac` go to training.
pub fn split_indices(labels: &[usize], train_frac: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(Error::Parameter(format!("train fraction {train_frac} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = labels.iter().copied().max().map_or(0, |m| m + 1);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in 0..classes {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        idx.shuffle(&mut rng);
        let n = (idx.len() as f64 * train_frac).round() as usize;
        train.extend_from_slice(&idx[..n]);
        test.extend_from_slice(&idx[n..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    if train.is_empty() {
        return Err(Error::EmptyInput("training split is empty".into()));
    }
    if test.is_empty() {
        return Err(Error::EmptyInput("evaluation split is empty".into()));
    }
    Ok((train, test))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeadReport {
    pub name: String,
    pub labels: Vec<String>,
    pub correct: usize,
    pub total: usize,
    pub confusion: Vec<Vec<usize>>,
}

impl HeadReport {
    pub fn accuracy(&self) -> f64 {
        self.correct as f64 / self.total.max(1) as f64
    }

    /// `object accuracy 98.33% (354/360)` followed by the confusion matrix.
    pub fn render(&self) -> String {
        let mut s = format!(
            "{} accuracy {:.2}% ({}/{})\n",
            self.name,
            100.0 * self.accuracy(),
            self.correct,
            self.total
        );
        let width = self.labels.iter().map(|l| l.len()).max().unwrap_or(4).max(4);
        s.push_str(&format!("{:>width$}", "", width = width));
        for l in &self.labels {
            s.push_str(&format!(" {l:>width$}"));
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.confusion) {
            s.push_str(&format!("{l:>width$}"));
            for v in row {
                s.push_str(&format!(" {v:>width$}"));
            }
            s.push('\n');
        }
        s
    }
}

fn run_head(
    name: &str,
    labels: Vec<String>,
    features: &[Vec<f64>],
    targets: &[usize],
    train: &[usize],
    test: &[usize],
    k: usize,
) -> Result<HeadReport> {
    let samples: Vec<(Vec<f64>, usize)> = train.iter().map(|&i| (features[i].clone(), targets[i])).collect();
    let model = KnnModel::train(&samples, labels.clone(), k)?;
    let truth: Vec<usize> = test.iter().map(|&i| targets[i]).collect();
    let pred: Vec<usize> = test.iter().map(|&i| model.classify(&features[i])).collect();
    let (correct, total) = accuracy(&truth, &pred);
    Ok(HeadReport {
        name: name.into(),
        confusion: confusion_matrix(&truth, &pred, labels.len()),
        labels,
        correct,
        total,
    })
}

/// Trains and scores the object head, plus a texture head for hybrid data.
/// The two heads are independent models over the same samples.
pub fn evaluate(
    rows: &[FeatureRow],
    object_labels: Vec<String>,
    texture_labels: Option<Vec<String>>,
    train_frac: f64,
    seed: u64,
) -> Result<Vec<HeadReport>> {
    if rows.is_empty() {
        return Err(Error::EmptyInput("no samples".into()));
    }
    // Stratify on the joint label so every combination is split evenly.
    let nt = texture_labels.as_ref().map_or(1, |t| t.len().max(1));
    let joint: Vec<usize> = rows
        .iter()
        .map(|r| r.object_label * nt + r.texture_label.unwrap_or(0))
        .collect();
    let (train, test) = split_indices(&joint, train_frac, seed)?;
    let motion: Vec<Vec<f64>> = rows.iter().map(|r| r.motion.clone()).collect();
    let obj: Vec<usize> = rows.iter().map(|r| r.object_label).collect();
    let mut out = vec![run_head("object", object_labels, &motion, &obj, &train, &test, DEFAULT_K)?];
    if let Some(tl) = texture_labels {
        let tex_f: Vec<Vec<f64>> = rows.iter().map(|r| r.texture.clone()).collect();
        let tex: Vec<usize> = rows
            .iter()
            .map(|r| r.texture_label.ok_or_else(|| Error::Parameter("missing texture label".into())))
            .collect::<Result<_>>()?;
        out.push(run_head("texture", tl, &tex_f, &tex, &train, &test, DEFAULT_K)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Manifest

pub const MANIFEST_HEADER: [&str; 14] = [
    "sample_id",
    "sensor_variant",
    "indenter_kind",
    "texture_id",
    "center_x_mm",
    "center_y_mm",
    "press_depth_mm",
    "yaw_rad",
    "texture_offset_x_mm",
    "texture_offset_y_mm",
    "seed",
    "object_label",
    "texture_label",
    "reference_image",
];

/// Manifest columns after [`MANIFEST_HEADER`].
pub const MANIFEST_LAST: &str = "contact_image";

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub spec: SampleSpec,
    pub reference_image: String,
    pub contact_image: String,
}

/// CSV text with a leading `#schema_version=1` line.
pub fn manifest_to_csv(rows: &[ManifestRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = MANIFEST_HEADER.to_vec();
    header.push(MANIFEST_LAST);
    w.write_record(&header)?;
    for r in rows {
        let s = &r.spec;
        w.write_record([
            s.sample_id.to_string(),
            s.variant.to_string(),
            s.kind.to_string(),
            s.texture.map(|t| t.to_string()).unwrap_or_default(),
            s.pose.center.x.to_string(),
            s.pose.center.y.to_string(),
            s.pose.press_depth.to_string(),
            s.pose.yaw.to_string(),
            s.texture_offset.0.to_string(),
            s.texture_offset.1.to_string(),
            s.seed.to_string(),
            s.object_label.to_string(),
            s.texture_label.map(|t| t.to_string()).unwrap_or_default(),
            r.reference_image.clone(),
            r.contact_image.clone(),
        ])?;
    }
    let body = crate::io::finish(w)?;
    Ok(format!("#schema_version={MANIFEST_SCHEMA_MAJOR}\n{body}"))
}

pub fn manifest_from_csv(text: &str) -> Result<Vec<ManifestRow>> {
    let first = text.lines().next().unwrap_or_default();
    let version = first
        .strip_prefix("#schema_version=")
        .ok_or_else(|| Error::parse(1, "manifest must start with #schema_version="))?;
    let major: u32 = version
        .split('.')
        .next()
        .unwrap_or_default()
        .trim()
        .parse()
        .map_err(|_| Error::parse(1, format!("bad schema version {version:?}")))?;
    if major != MANIFEST_SCHEMA_MAJOR {
        return Err(Error::SchemaVersion(major));
    }
    let body = &text[first.len()..];
    let mut rdr = csv::Reader::from_reader(body.trim_start().as_bytes());
    let mut out = Vec::new();
    for (idx, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = idx + 3;
        let get = |k: usize| rec.get(k).ok_or_else(|| Error::parse(line, format!("missing column {k}")));
        let num = |k: usize| -> Result<f64> {
            get(k)?.parse().map_err(|e| Error::parse(line, format!("column {k}: {e}")))
        };
        let int = |k: usize| -> Result<u64> {
            get(k)?.parse().map_err(|e| Error::parse(line, format!("column {k}: {e}")))
        };
        let opt = |k: usize| -> Result<Option<&str>> { Ok(Some(get(k)?).filter(|s| !s.is_empty())) };
        let spec = SampleSpec {
            sample_id: int(0)? as usize,
            variant: get(1)?.parse().map_err(|e: String| Error::parse(line, e))?,
            kind: get(2)?.parse().map_err(|e: String| Error::parse(line, e))?,
            texture: opt(3)?
                .map(|s| s.parse::<Fabric>().map_err(|e| Error::parse(line, e)))
                .transpose()?,
            pose: ContactPose::new(num(4)?, num(5)?, num(6)?, num(7)?),
            texture_offset: (num(8)?, num(9)?),
            seed: int(10)?,
            object_label: int(11)? as usize,
            texture_label: opt(12)?
                .map(|s| s.parse::<usize>().map_err(|e| Error::parse(line, e.to_string())))
                .transpose()?,
        };
        out.push(ManifestRow {
            spec,
            reference_image: get(13)?.to_string(),
            contact_image: get(14)?.to_string(),
        });
    }
    let mut ids: Vec<usize> = out.iter().map(|r| r.spec.sample_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Parameter("duplicate sample_id in manifest".into()));
    }
    Ok(out)
}

/// Renders a recipe to `out_dir`: PNG frames, then the manifest last.
///
/// Object datasets share one reference frame; hybrid samples each get their
/// own because the fabric patch differs. On failure every file written so
/// far is removed.
pub fn generate_dataset(recipe: &Recipe, out_dir: &Path) -> Result<Vec<ManifestRow>> {
    let mut written = Vec::new();
    let result = generate_inner(recipe, out_dir, &mut written);
    if result.is_err() {
        for p in written.iter().rev() {
            let _ = std::fs::remove_file(p);
        }
    }
    result
}

fn generate_inner(recipe: &Recipe, out_dir: &Path, written: &mut Vec<std::path::PathBuf>) -> Result<Vec<ManifestRow>> {
    std::fs::create_dir_all(out_dir)?;
    let specs = plan_samples(recipe)?;
    let cfg = preset(recipe.variant);
    let layout = cfg
        .marker_layout()?
        .ok_or_else(|| Error::Parameter("recipe sensor has no markers".into()))?;
    let mut rows = Vec::with_capacity(specs.len());
    let mut shared_ref: Option<String> = None;
    for spec in specs {
        let s = render_sample(&cfg, &layout, &spec)?;
        let reference_image = match (&shared_ref, recipe.mode) {
            (Some(name), DatasetMode::Object) => name.clone(),
            _ => {
                let name = crate::io::frame_filename("reference", s.reference.frame_id, s.reference.mechanism);
                let path = out_dir.join(&name);
                crate::io::write_png(&s.reference, &path)?;
                written.push(path);
                if recipe.mode == DatasetMode::Object {
                    shared_ref = Some(name.clone());
                }
                name
            }
        };
        let contact_image = crate::io::frame_filename("contact", s.contact.frame_id, s.contact.mechanism);
        let path = out_dir.join(&contact_image);
        crate::io::write_png(&s.contact, &path)?;
        written.push(path);
        rows.push(ManifestRow {
            spec,
            reference_image,
            contact_image,
        });
    }
    let path = out_dir.join("manifest.csv");
    crate::io::write_atomic(&path, manifest_to_csv(&rows)?.as_bytes())?;
    written.push(path);
    std::fs::write(out_dir.join("recipe.txt"), recipe.to_text())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_recipes() {
        assert_eq!(plan_samples(&Recipe::object(200, 1)).unwrap().len(), 1200);
        let h = plan_samples(&Recipe::hybrid(200, 1)).unwrap();
        assert_eq!(h.len(), 1800);
        assert!(h.iter().all(|s| s.texture_label.is_some()));
    }

    #[test]
    fn plan_is_deterministic_and_seed_sensitive() {
        let a = plan_samples(&Recipe::object(5, 9)).unwrap();
        assert_eq!(a, plan_samples(&Recipe::object(5, 9)).unwrap());
        assert_ne!(a, plan_samples(&Recipe::object(5, 10)).unwrap());
        for s in &a {
            assert!((0.3..1.0).contains(&s.pose.press_depth));
            assert!((s.pose.center.x - 17.0).abs() <= 3.0);
        }
    }

    #[test]
    fn recipe_text_round_trip() {
        for r in [Recipe::object(20, 3), Recipe::hybrid(7, 4)] {
            assert_eq!(Recipe::from_text(&r.to_text()).unwrap(), r);
        }
    }

    #[test]
    fn manifest_round_trip_and_version_gate() {
        let specs = plan_samples(&Recipe::hybrid(1, 2)).unwrap();
        let rows: Vec<ManifestRow> = specs
            .into_iter()
            .map(|spec| ManifestRow {
                spec,
                reference_image: "r.png".into(),
                contact_image: "c.png".into(),
            })
            .collect();
        let text = manifest_to_csv(&rows).unwrap();
        assert_eq!(manifest_from_csv(&text).unwrap(), rows);
        let bumped = text.replacen("#schema_version=1", "#schema_version=2", 1);
        assert!(matches!(manifest_from_csv(&bumped), Err(Error::SchemaVersion(2))));
    }

    #[test]
    fn full_train_split_is_rejected() {
        let labels = vec![0, 0, 1, 1];
        assert!(matches!(split_indices(&labels, 1.0, 0), Err(Error::EmptyInput(_))));
        let (tr, te) = split_indices(&labels, 0.5, 0).unwrap();
        assert_eq!((tr.len(), te.len()), (2, 2));
    }
}
