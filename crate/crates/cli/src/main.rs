//! `tactsim` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use tactsim::contact::{compute_depth_field, compute_displacement_field, displace_markers, ContactPose, IndenterKind};
use tactsim::cost::{
    batch_plan, bundled_table, find_record, parse_table, record_capacity, sweep, sweep_csv, unit_metrics, Calibration,
    CostRecord,
};
use tactsim::dataset::{
    evaluate, features_from_manifest, generate_dataset, manifest_from_csv, manifest_labels, track, DatasetMode, Recipe,
    DEFAULT_TRAIN_FRAC,
};
use tactsim::io::{correspondences_csv, frame_filename, read_png, write_atomic, write_depth_pfm, write_pfm, write_pgm, write_png};
use tactsim::markers::{gen_dot_layout, layout_from_str, layout_to_string, validate_layout, Arrangement, LayoutKind, MarkerLayout};
use tactsim::model::{has_errors, load_config, save_config};
use tactsim::perception::displacement_overlay;
use tactsim::render::{
    apply_lens_distortion, draw_markers, render_imm, render_imm_mdm, render_mdm, render_tir, BackgroundScene, Fabric,
    LensTextureParams, StripeOrientation, TactileImage,
};
use tactsim::ssim::ssim;
use tactsim::textfmt::KvDoc;
use tactsim::{preset, validate_config, Mechanism, Rgb, SensorConfig, SensorVariant, Violation};

#[derive(Parser)]
#[command(name = "tactsim", version, about = "Simulate, perceive and cost 3D-printed vision-based tactile sensors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the default configuration of a sensor variant.
    Preset(PresetArgs),
    /// Check a configuration (and optionally a marker layout) for violations.
    Validate(ValidateArgs),
    /// Generate a marker layout for a configuration.
    Markers(MarkersArgs),
    /// Press an indenter into a sensor and write frames, fields and ground truth.
    Simulate(SimulateArgs),
    /// Generate a seeded synthetic dataset with a manifest.
    Dataset(DatasetArgs),
    /// Detect and match markers between a reference and a contact frame.
    Track(TrackArgs),
    /// Train and score the k-NN heads on a generated dataset.
    Eval(EvalArgs),
    /// Structural similarity of two images, or a lens-texture amplitude sweep.
    Ssim(SsimArgs),
    /// Per-unit print metrics and batch amortisation.
    Cost(CostArgs),
}

/// Sensor configuration: a file, or a built-in preset.
#[derive(Args)]
struct ConfigSource {
    /// Configuration file written by `preset`.
    #[arg(long, short = 'c', conflicts_with = "variant")]
    config: Option<PathBuf>,
    /// Built-in variant (c-tac, c-sight, c-sightac, vi-c-tac, vi-c-sight).
    #[arg(long, short = 'v')]
    variant: Option<SensorVariant>,
}

impl ConfigSource {
    fn load(&self, default: Option<SensorVariant>) -> Result<SensorConfig> {
        match (&self.config, self.variant.or(default)) {
            (Some(p), _) => load_config(p).with_context(|| format!("reading config {}", p.display())),
            (None, Some(v)) => Ok(preset(v)),
            (None, None) => bail!("pass --config FILE or --variant NAME"),
        }
    }
}

#[derive(Args)]
struct PresetArgs {
    /// c-tac, c-sight, c-sightac, vi-c-tac or vi-c-sight.
    variant: SensorVariant,
    /// Output file; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Configuration file.
    config: PathBuf,
    /// Marker layout to check against the configuration.
    #[arg(long)]
    layout: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ArrangementKind {
    /// The configuration's own marker spec.
    Spec,
    /// Rejection-sampled dot centres.
    Random,
}

#[derive(Args)]
struct MarkersArgs {
    #[command(flatten)]
    source: ConfigSource,
    #[arg(long, value_enum, default_value = "spec")]
    arrangement: ArrangementKind,
    /// Number of dots for the random arrangement.
    #[arg(long, default_value_t = 49)]
    count: usize,
    /// Minimum centre spacing for the random arrangement, mm.
    #[arg(long, default_value_t = 2.0)]
    min_spacing: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Layout file; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Also render the layout at rest to this PNG.
    #[arg(long)]
    png: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    source: ConfigSource,
    /// Marker layout file; the configuration's spec when omitted.
    #[arg(long)]
    layout: Option<PathBuf>,
    /// Indenter: dot, ring, sphere, curve, waves or multi_dot.
    #[arg(long, default_value = "sphere")]
    shape: IndenterKind,
    /// Contact centre, mm; the sensing-area centre when omitted.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    /// Press depth, mm.
    #[arg(long, default_value_t = 0.8)]
    press: f64,
    /// Yaw, radians.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    yaw: f64,
    /// Fabric behind a clear skin: cotton, chemical_fibre or hemp.
    #[arg(long)]
    fabric: Option<Fabric>,
    /// Seed of the fabric texture.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Task {
    Object,
    Hybrid,
}

#[derive(Args)]
struct DatasetArgs {
    /// Recipe file; overrides the options below.
    #[arg(long)]
    recipe: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "object")]
    mode: Task,
    #[arg(long, default_value_t = 200)]
    samples_per_class: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Contact-centre jitter half-width, mm.
    #[arg(long)]
    center_jitter: Option<f64>,
    /// Press depth range, mm.
    #[arg(long)]
    press_min: Option<f64>,
    #[arg(long)]
    press_max: Option<f64>,
    #[arg(long, short = 'o')]
    out: PathBuf,
}

#[derive(Args)]
struct TrackArgs {
    #[command(flatten)]
    source: ConfigSource,
    reference: PathBuf,
    contact: PathBuf,
    /// Correspondence CSV; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
    /// Displacement overlay PNG.
    #[arg(long)]
    overlay: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// `manifest.csv` of a generated dataset; images are resolved next to it.
    manifest: PathBuf,
    #[arg(long, value_enum, default_value = "object")]
    task: Task,
    #[arg(long, default_value_t = DEFAULT_TRAIN_FRAC)]
    train_frac: f64,
    /// Split seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Orientation {
    X,
    Y,
}

#[derive(Args)]
struct SsimArgs {
    /// First image (the clean one for a sweep; a checkerboard when omitted).
    a: Option<PathBuf>,
    /// Second image.
    b: Option<PathBuf>,
    /// Odd window size, px.
    #[arg(long, default_value_t = 7)]
    window: usize,
    /// Sweep lens-texture amplitude from 0 and print `amplitude,ssim` CSV.
    #[arg(long)]
    lens_sweep: bool,
    #[arg(long, default_value_t = 12.0)]
    pitch: f64,
    #[arg(long, default_value_t = 4.0)]
    max_amplitude: f64,
    #[arg(long, default_value_t = 8)]
    steps: usize,
    #[arg(long, value_enum, default_value = "x")]
    orientation: Orientation,
    /// Stripe phase seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CostArgs {
    /// Sensor name as listed in the table (e.g. c-tac, Vi-C-Sight).
    sensor: String,
    /// Units printed together on one tray.
    #[arg(long, default_value_t = 1)]
    capacity: usize,
    /// Emit the whole capacity curve as CSV instead.
    #[arg(long)]
    sweep: bool,
    /// Alternative cost table with the bundled columns.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Where to write the sweep CSV; stdout when omitted.
    #[arg(long, short = 'o')]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let result = match cli.command {
        Command::Preset(a) => cmd_preset(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Markers(a) => cmd_markers(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Dataset(a) => cmd_dataset(a),
        Command::Track(a) => cmd_track(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ssim(a) => cmd_ssim(a),
        Command::Cost(a) => cmd_cost(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Prints a parse error; bad values also get the subcommand's usage line.
fn usage_error(e: clap::Error) -> ExitCode {
    let _ = e.print();
    if matches!(e.kind(), ErrorKind::InvalidValue | ErrorKind::ValueValidation) {
        let mut cmd = Cli::command();
        cmd.build();
        let usage = std::env::args()
            .nth(1)
            .and_then(|s| cmd.find_subcommand_mut(&s).map(|c| c.render_usage()))
            .unwrap_or_else(|| cmd.render_usage());
        eprintln!("\n{usage}");
    }
    ExitCode::from(e.exit_code().clamp(0, 255) as u8)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report(violations: &[Violation]) {
    for v in violations {
        eprintln!("{v}");
    }
}

fn ensure_valid(cfg: &SensorConfig) -> Result<()> {
    let v = validate_config(cfg);
    if has_errors(&v) {
        report(&v);
        bail!("configuration {:?} is invalid", cfg.name);
    }
    Ok(())
}

fn cmd_preset(a: PresetArgs) -> Result<()> {
    let cfg = preset(a.variant);
    match a.out {
        Some(p) => save_config(&cfg, &p).with_context(|| format!("writing {}", p.display())),
        None => emit(None, &tactsim::model::config_to_string(&cfg)),
    }
}

fn cmd_validate(a: ValidateArgs) -> Result<()> {
    let cfg = load_config(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut v = validate_config(&cfg);
    if let Some(p) = &a.layout {
        let layout = read_layout(p)?;
        v.extend(validate_layout(&layout, &cfg));
    }
    report(&v);
    if has_errors(&v) {
        bail!("{} violation(s)", v.len());
    }
    println!("{}: ok ({} warning(s))", cfg.name, v.len());
    Ok(())
}

fn read_layout(p: &Path) -> Result<MarkerLayout> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    layout_from_str(&text).with_context(|| format!("parsing {}", p.display()))
}

/// The configuration's skin with markers drawn at rest.
fn preview(cfg: &SensorConfig, layout: &MarkerLayout) -> TactileImage {
    let f = cfg.raster();
    let mut img = TactileImage::filled(f.width, f.height, cfg.skin.color, cfg.mechanism);
    draw_markers(&mut img, &f, layout);
    img
}

fn cmd_markers(a: MarkersArgs) -> Result<()> {
    let cfg = a.source.load(None)?;
    let spec = cfg.markers.context("configuration has no marker spec")?;
    let layout = match a.arrangement {
        ArrangementKind::Spec => cfg.marker_layout()?.context("configuration has no marker spec")?,
        ArrangementKind::Random => {
            if spec.kind != LayoutKind::Dot {
                bail!("random arrangements are only defined for single-layer dot layouts");
            }
            let region = cfg.area_rect().centered(spec.region.0, spec.region.1);
            let arr = Arrangement::Random {
                count: a.count,
                min_spacing: a.min_spacing,
                seed: a.seed,
            };
            gen_dot_layout(region, arr, spec.size, spec.stiffness, 0, spec.colors[0])?
        }
    };
    let v = validate_layout(&layout, &cfg);
    report(&v);
    if has_errors(&v) {
        bail!("generated layout violates the configuration");
    }
    let text = format!("# seed: {}\n{}", a.seed, layout_to_string(&layout));
    emit(a.out.as_deref(), &text)?;
    if let Some(p) = &a.png {
        write_png(&preview(&cfg, &layout), p)?;
    }
    eprintln!("{} markers", layout.markers.len());
    Ok(())
}

fn render_frame(cfg: &SensorConfig, depth: &tactsim::contact::DepthField, layout: Option<&MarkerLayout>, bg: Option<&BackgroundScene>) -> Result<TactileImage> {
    let need_layout = || layout.context("mechanism needs markers");
    Ok(match cfg.mechanism {
        Mechanism::Imm => render_imm(depth, cfg)?,
        Mechanism::ImmMdm => render_imm_mdm(depth, need_layout()?, cfg)?,
        Mechanism::Mdm => render_mdm(need_layout()?, cfg, None)?,
        Mechanism::MdmMfm => render_mdm(need_layout()?, cfg, bg)?,
        Mechanism::ImmMfm => render_tir(depth, cfg, bg.context("TIR rendering needs a background")?)?,
    })
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let cfg = a.source.load(None)?;
    ensure_valid(&cfg)?;
    let layout = match &a.layout {
        Some(p) => {
            let l = read_layout(p)?;
            let v = validate_layout(&l, &cfg);
            if has_errors(&v) {
                report(&v);
                bail!("layout does not fit the configuration");
            }
            Some(l)
        }
        None => cfg.marker_layout()?,
    };
    let c = cfg.area_rect().center();
    let pose = ContactPose::new(a.x.unwrap_or(c.x), a.y.unwrap_or(c.y), a.press, a.yaw);
    let frame = cfg.raster();
    let bg = if cfg.mechanism.uses_fusion() {
        let f = a.fabric.unwrap_or(Fabric::Cotton);
        Some(f.scene(&frame, (0.0, 0.0), a.seed, 1.0))
    } else {
        if a.fabric.is_some() {
            bail!("{} has an opaque skin; --fabric needs a clear-skin variant", cfg.name);
        }
        None
    };

    let depth = compute_depth_field(&a.shape.default_shape(), &pose, &cfg)?;
    let field = compute_displacement_field(&depth, &cfg.elastomer, &cfg.mechanics);
    let moved = layout.as_ref().map(|l| displace_markers(l, &field, &cfg.mechanics));
    let rest = tactsim::contact::DepthField::zeros(frame);
    let mut reference = render_frame(&cfg, &rest, layout.as_ref(), bg.as_ref())?;
    let mut contact = render_frame(&cfg, &depth, moved.as_ref(), bg.as_ref())?;
    reference.frame_id = 0;
    contact.frame_id = 1;

    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let out = |name: &str| a.out.join(name);
    let ref_name = frame_filename("reference", 0, cfg.mechanism);
    let con_name = frame_filename("contact", 1, cfg.mechanism);
    write_png(&reference, &out(&ref_name))?;
    write_png(&contact, &out(&con_name))?;
    write_depth_pfm(&depth, &out("depth.pfm"))?;
    for (k, axis) in ["ux", "uy", "uz"].iter().enumerate() {
        let data: Vec<f64> = field.data.iter().map(|v| v[k]).collect();
        write_pfm(frame.width, frame.height, &data, &out(&format!("deformation_{axis}.pfm")))?;
    }
    let mut mask = TactileImage::filled(frame.width, frame.height, Rgb::BLACK, cfg.mechanism);
    for (p, &d) in mask.pixels.iter_mut().zip(&depth.data) {
        if d > 0.0 {
            *p = Rgb::WHITE;
        }
    }
    write_pgm(&mask, &out("contact_mask.pgm"))?;

    // Ground truth: marker motion in pixels.
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["marker_id", "layer", "ref_x_px", "ref_y_px", "dx_px", "dy_px"])?;
    let mut rows = 0;
    if let (Some(l), Some(m)) = (&layout, &moved) {
        for (r, c) in l.markers.iter().zip(&m.markers) {
            let p = frame.to_px(r.geometry.anchor());
            let d = frame.to_px(c.geometry.anchor()) - p;
            w.write_record([
                r.id.to_string(),
                r.layer.to_string(),
                format!("{:.6}", p.x),
                format!("{:.6}", p.y),
                format!("{:.6}", d.x),
                format!("{:.6}", d.y),
            ])?;
            rows += 1;
        }
    }
    let gt = w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?;
    write_atomic(&out("ground_truth.csv"), &gt)?;

    let mut info = KvDoc::new();
    info.push("sensor", &cfg.name);
    info.push("mechanism", cfg.mechanism);
    info.push("indenter", a.shape);
    info.push("center_mm", format!("{},{}", pose.center.x, pose.center.y));
    info.push("press_depth_mm", pose.press_depth);
    info.push("yaw_rad", pose.yaw);
    info.push("fabric", a.fabric.map(|f| f.to_string()).unwrap_or_else(|| "none".into()));
    info.push("seed", a.seed);
    info.push("reference_image", &ref_name);
    info.push("contact_image", &con_name);
    info.push("contact_pixels", depth.data.iter().filter(|&&d| d > 0.0).count());
    info.push("marker_rows", rows);
    write_atomic(&out("simulation.txt"), info.render().as_bytes())?;
    println!("wrote {} ({} ground-truth rows)", a.out.display(), rows);
    Ok(())
}

fn cmd_dataset(a: DatasetArgs) -> Result<()> {
    let recipe = match &a.recipe {
        Some(p) => Recipe::from_text(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => {
            let mut r = match a.mode {
                Task::Object => Recipe::object(a.samples_per_class, a.seed),
                Task::Hybrid => Recipe::hybrid(a.samples_per_class, a.seed),
            };
            if let Some(c) = a.center_jitter {
                r.jitter.center_mm = c;
            }
            r.jitter.press_mm = (a.press_min.unwrap_or(r.jitter.press_mm.0), a.press_max.unwrap_or(r.jitter.press_mm.1));
            r
        }
    };
    recipe.validate()?;
    let rows = generate_dataset(&recipe, &a.out)?;
    let mode = match recipe.mode {
        DatasetMode::Object => "object",
        DatasetMode::Hybrid => "hybrid",
    };
    println!("{} {mode} samples written to {} (seed {})", rows.len(), a.out.display(), recipe.seed);
    Ok(())
}

fn cmd_track(a: TrackArgs) -> Result<()> {
    let cfg = a.source.load(Some(SensorVariant::CTac))?;
    let r = read_png(&a.reference, cfg.mechanism).with_context(|| format!("reading {}", a.reference.display()))?;
    let c = read_png(&a.contact, cfg.mechanism).with_context(|| format!("reading {}", a.contact.display()))?;
    let corr = track(&cfg, &r, &c)?;
    emit(a.out.as_deref(), &correspondences_csv(&corr)?)?;
    if let Some(p) = &a.overlay {
        write_png(&displacement_overlay(&r, &c, &corr)?, p)?;
    }
    let mags: Vec<f64> = corr.iter().map(|c| c.displacement().norm()).collect();
    let mean = mags.iter().sum::<f64>() / mags.len().max(1) as f64;
    let max = mags.iter().cloned().fold(0.0, f64::max);
    eprintln!("{} markers matched, mean displacement {mean:.3} px, max {max:.3} px", corr.len());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&a.manifest).with_context(|| format!("reading {}", a.manifest.display()))?;
    let rows = manifest_from_csv(&text)?;
    if rows.is_empty() {
        bail!("manifest has no rows");
    }
    let dir = a.manifest.parent().unwrap_or(Path::new("."));
    let (objects, textures) = manifest_labels(&rows)?;
    let textures = match a.task {
        Task::Object => None,
        Task::Hybrid if textures.is_empty() => bail!("hybrid evaluation needs texture labels in the manifest"),
        Task::Hybrid => Some(textures),
    };
    let feats = features_from_manifest(&rows, dir)?;
    let reports = evaluate(&feats, objects, textures, a.train_frac, a.seed)?;
    println!("# split seed {}, train fraction {}", a.seed, a.train_frac);
    for r in reports {
        print!("{}", r.render());
    }
    Ok(())
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

fn cmd_ssim(a: SsimArgs) -> Result<()> {
    let load = |p: &PathBuf| read_png(p, Mechanism::Imm).with_context(|| format!("reading {}", p.display()));
    if a.lens_sweep {
        if a.b.is_some() {
            bail!("--lens-sweep takes at most one image");
        }
        let clean = match &a.a {
            Some(p) => load(p)?,
            None => checkerboard(128, 16),
        };
        let orientation = match a.orientation {
            Orientation::X => StripeOrientation::X,
            Orientation::Y => StripeOrientation::Y,
        };
        println!("# pitch {} px, seed {}", a.pitch, a.seed);
        println!("amplitude_px,ssim");
        let steps = a.steps.max(1);
        for k in 0..=steps {
            let amp = a.max_amplitude * k as f64 / steps as f64;
            let params = LensTextureParams {
                stripe_pitch_px: a.pitch,
                amplitude_px: amp,
                orientation,
                seed: a.seed,
            };
            let d = apply_lens_distortion(&clean, &params)?;
            println!("{amp:.4},{:.6}", ssim(&clean, &d, a.window)?);
        }
        return Ok(());
    }
    let (Some(pa), Some(pb)) = (&a.a, &a.b) else {
        bail!("give two images, or --lens-sweep");
    };
    println!("{:.6}", ssim(&load(pa)?, &load(pb)?, a.window)?);
    Ok(())
}

fn cost_record(table: &[CostRecord], sensor: &str) -> Result<CostRecord> {
    let by_variant = sensor.parse::<SensorVariant>().ok().and_then(|v| find_record(table, v));
    by_variant
        .or_else(|| table.iter().find(|r| r.name.eq_ignore_ascii_case(sensor)))
        .cloned()
        .with_context(|| format!("sensor {sensor:?} is not in the cost table"))
}

fn cmd_cost(a: CostArgs) -> Result<()> {
    let table = match &a.table {
        Some(p) => parse_table(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => bundled_table(),
    };
    let rec = cost_record(&table, &a.sensor)?;
    let cal = Calibration::for_record(&rec);
    if a.sweep {
        return emit(a.out.as_deref(), &sweep_csv(&sweep(&rec, &cal))?);
    }
    let max = record_capacity(&rec);
    let plan = batch_plan(&rec, a.capacity, max, &cal).map_err(|e| {
        let base = if max == 48 { "Digit base, 8 x 6 tray" } else { "custom base, 8 x 8 tray" };
        anyhow::anyhow!("{e}: {} fits at most {max} units per print ({base})", rec.name)
    })?;
    let m = unit_metrics(&rec);
    println!("{}: T/V {:.3} min/cm^3, C/V {:.3} GBP/cm^3", rec.name, m.t_per_v, m.c_per_v);
    println!(
        "capacity {}: {:.2} min/unit, £{:.2}/unit (batch {:.1} min, £{:.2})",
        plan.capacity, plan.avg_time, plan.avg_cost, plan.total_time, plan.total_cost
    );
    Ok(())
}
