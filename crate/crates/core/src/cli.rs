//! Command-line driver.
//!
//! Every command prints `key=value` tokens on standard output. Exit status is
//! 0 on success, 1 for usage errors, 2 for I/O failures and 3 for domain
//! errors such as capacity or dimension mismatches.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::attacks::{Attack, CropRect};
use crate::error::{Error, ErrorKind, Result};
use crate::fixtures;
use crate::imagecodec::{
    load_key, load_rgb_image, load_watermark, save_key, save_rgb_image, save_watermark, ColorMode, RgbImage,
    WatermarkBits,
};
use crate::metrics::{self, payload_percent, MetricReport};
use crate::watermark::{embed, extract, EmbedConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

pub const CSV_HEADER: &str = "image,mode,attack,psnr_db,corr,nc,error_bits,payload_percent";

#[derive(Debug, Parser)]
#[command(name = "dwtmark", version, about = "Blind DWT watermarking of color images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct EmbedParams {
    #[arg(long, default_value_t = ColorMode::Ycbcr)]
    pub mode: ColorMode,
    #[arg(long, default_value_t = 3)]
    pub levels: u32,
    #[arg(long = "quant-step", default_value_t = 1.0)]
    pub quant_step: f64,
}

impl EmbedParams {
    fn config(&self) -> EmbedConfig {
        EmbedConfig {
            color_mode: self.mode,
            levels: self.levels,
            quant_step: self.quant_step,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Embed a binary watermark into a host image.
    Embed {
        host: PathBuf,
        watermark: PathBuf,
        /// Watermarked image (.png or .ppm).
        #[arg(long)]
        out: PathBuf,
        /// Key file (JSON).
        #[arg(long)]
        key: PathBuf,
        #[command(flatten)]
        params: EmbedParams,
    },
    /// Recover the watermark from an image using its key.
    Extract {
        image: PathBuf,
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Original watermark; prints NC and error bits when given.
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// Apply `compress:<t>` or `crop:<x>,<y>,<w>,<h>[,fill]` to an image.
    Attack {
        image: PathBuf,
        spec: Option<String>,
        #[arg(long, conflicts_with_all = ["spec", "crop"])]
        threshold: Option<f64>,
        #[arg(long, conflicts_with = "spec")]
        crop: Option<CropRect>,
        #[arg(long)]
        out: PathBuf,
        /// Decomposition depth of the compression attack.
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Run embed, attacks, extract and metrics over hosts and modes; write CSV.
    Report {
        #[arg(required = true)]
        hosts: Vec<PathBuf>,
        #[arg(long)]
        watermark: PathBuf,
        #[arg(long = "mode", value_delimiter = ',', default_values_t = [ColorMode::Ycbcr, ColorMode::Rgb])]
        modes: Vec<ColorMode>,
        #[arg(long = "threshold", value_delimiter = ';', default_values_t = [1.0, 3.0, 6.0])]
        thresholds: Vec<f64>,
        #[arg(long = "crop", value_delimiter = ';', default_values_t = default_crops())]
        crops: Vec<CropRect>,
        #[arg(long, default_value_t = 3)]
        levels: u32,
        #[arg(long = "quant-step", default_value_t = 1.0)]
        quant_step: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the synthetic hosts and the logo watermark to a directory.
    GenFixtures {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = fixtures::DEFAULT_SEED)]
        seed: u64,
    },
}

fn default_crops() -> Vec<CropRect> {
    vec![CropRect::new(0, 0, 64, 64), CropRect::new(0, 0, 128, 128)]
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e.kind() {
        ErrorKind::Io => EXIT_IO,
        ErrorKind::Domain => EXIT_DOMAIN,
    }
}

fn fmt4(v: f64) -> String {
    if v.is_infinite() && v > 0.0 {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

/// Runs a parsed command and returns its output lines.
pub fn execute(command: Command) -> Result<Vec<String>> {
    match command {
        Command::Embed {
            host,
            watermark,
            out,
            key,
            params,
        } => cmd_embed(&host, &watermark, &out, &key, &params.config()).map(|l| vec![l]),
        Command::Extract {
            image,
            key,
            out,
            reference,
        } => cmd_extract(&image, &key, &out, reference.as_deref()).map(|l| vec![l]),
        Command::Attack {
            image,
            spec,
            threshold,
            crop,
            out,
            levels,
        } => {
            let attack = match (spec, threshold, crop) {
                (Some(s), _, _) => s.parse()?,
                (None, Some(threshold), None) => format!("compress:{threshold}").parse()?,
                (None, None, Some(rect)) => Attack::Crop(rect),
                _ => {
                    return Err(Error::InvalidConfig(
                        "attack needs a spec, --threshold or --crop".into(),
                    ))
                }
            };
            cmd_attack(&image, &out, &attack, levels).map(|l| vec![l])
        }
        Command::Report {
            hosts,
            watermark,
            modes,
            thresholds,
            crops,
            levels,
            quant_step,
            out,
        } => {
            let plan = ReportPlan {
                modes,
                thresholds,
                crops,
                levels,
                quant_step,
            };
            cmd_report(&hosts, &watermark, &plan, &out)
        }
        Command::GenFixtures { out, seed } => cmd_gen_fixtures(&out, seed),
    }
}

pub fn cmd_embed(host: &Path, wm: &Path, out_image: &Path, out_key: &Path, cfg: &EmbedConfig) -> Result<String> {
    let host_img = load_rgb_image(host)?;
    let wm_bits = load_watermark(wm)?;
    let (marked, key) = embed(&host_img, &wm_bits, cfg)?;
    save_rgb_image(&marked, out_image)?;
    save_key(&key, out_key)?;
    let (sw, sh) = key.subband_dims();
    Ok(format!(
        "psnr_db={} corr={} payload_percent={} sites={}",
        fmt4(metrics::psnr(&host_img, &marked)?),
        fmt4(metrics::correlation(&host_img, &marked)?),
        fmt4(payload_percent(wm_bits.len(), sw, sh)),
        key.site_indices.len()
    ))
}

pub fn cmd_extract(image: &Path, key: &Path, out_wm: &Path, reference: Option<&Path>) -> Result<String> {
    let img = load_rgb_image(image)?;
    let key = load_key(key)?;
    let recovered = extract(&img, &key)?;
    save_watermark(&recovered, out_wm)?;
    let mut line = format!("wm_width={} wm_height={}", recovered.width(), recovered.height());
    if let Some(path) = reference {
        let original = load_watermark(path)?;
        let _ = write!(
            line,
            " nc={} error_bits={}",
            fmt4(metrics::normalized_correlation(&original, &recovered)?),
            metrics::error_bits(&original, &recovered)?
        );
    }
    Ok(line)
}

pub fn cmd_attack(image: &Path, out: &Path, attack: &Attack, levels: u32) -> Result<String> {
    let img = load_rgb_image(image)?;
    let attacked = attack.apply(&img, levels)?;
    save_rgb_image(&attacked, out)?;
    Ok(format!("out={}", out.display()))
}

/// The experiment matrix run for every host.
#[derive(Debug, Clone)]
pub struct ReportPlan {
    pub modes: Vec<ColorMode>,
    pub thresholds: Vec<f64>,
    pub crops: Vec<CropRect>,
    pub levels: u32,
    pub quant_step: f64,
}

impl Default for ReportPlan {
    fn default() -> Self {
        Self {
            modes: vec![ColorMode::Ycbcr, ColorMode::Rgb],
            thresholds: vec![1.0, 3.0, 6.0],
            crops: default_crops(),
            levels: 3,
            quant_step: 1.0,
        }
    }
}

impl ReportPlan {
    /// `None` stands for the unattacked row.
    fn attacks(&self) -> Vec<Option<Attack>> {
        let compress = self
            .thresholds
            .iter()
            .map(|&threshold| Some(Attack::Compress { threshold }));
        let crops = self.crops.iter().map(|&rect| Some(Attack::Crop(rect)));
        std::iter::once(None).chain(compress).chain(crops).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub image_label: String,
    pub mode: ColorMode,
    pub attack: String,
    /// Failed rows keep the error message.
    pub outcome: std::result::Result<MetricReport, String>,
}

impl ReportRow {
    pub fn to_csv(&self) -> String {
        let head = format!(
            "{},{},{}",
            csv_field(&self.image_label),
            self.mode,
            csv_field(&self.attack)
        );
        match &self.outcome {
            Ok(m) => format!(
                "{head},{},{},{},{},{}",
                fmt4(m.psnr_db),
                fmt4(m.corr),
                fmt4(m.nc),
                m.error_bits,
                fmt4(m.payload_percent)
            ),
            Err(_) => format!("{head},failed,failed,failed,failed,failed"),
        }
    }
}

/// All rows for one host and mode, in plan order.
pub fn report_rows(
    label: &str,
    host: &RgbImage,
    wm: &WatermarkBits,
    mode: ColorMode,
    plan: &ReportPlan,
) -> Vec<ReportRow> {
    let attacks = plan.attacks();
    let row = |attack: &Option<Attack>, outcome| ReportRow {
        image_label: label.to_string(),
        mode,
        attack: attack.map_or("none".to_string(), |a| a.to_string()),
        outcome,
    };
    let cfg = EmbedConfig {
        color_mode: mode,
        levels: plan.levels,
        quant_step: plan.quant_step,
    };
    let (marked, key) = match embed(host, wm, &cfg) {
        Ok(v) => v,
        Err(e) => return attacks.iter().map(|a| row(a, Err(e.to_string()))).collect(),
    };
    let (sw, sh) = key.subband_dims();
    let payload = payload_percent(wm.len(), sw, sh);
    attacks
        .iter()
        .map(|attack| {
            let outcome = (|| {
                let attacked = match attack {
                    Some(a) => a.apply(&marked, plan.levels)?,
                    None => marked.clone(),
                };
                let recovered = extract(&attacked, &key)?;
                MetricReport::compute(host, &attacked, wm, &recovered, payload)
            })();
            row(attack, outcome.map_err(|e| e.to_string()))
        })
        .collect()
}

/// Runs every (host, mode) pair concurrently and renders the CSV.
pub fn render_report(hosts: &[(String, RgbImage)], wm: &WatermarkBits, plan: &ReportPlan) -> (String, Vec<ReportRow>) {
    let rows: Vec<ReportRow> = std::thread::scope(|s| {
        let handles: Vec<_> = hosts
            .iter()
            .flat_map(|(label, host)| {
                plan.modes
                    .iter()
                    .map(move |&mode| s.spawn(move || report_rows(label, host, wm, mode, plan)))
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("report worker panicked"))
            .collect()
    });
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv());
        csv.push('\n');
    }
    (csv, rows)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn label_of(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Writes the CSV even when some rows fail; the first failure is then
/// returned as the error.
pub fn cmd_report(hosts: &[PathBuf], wm: &Path, plan: &ReportPlan, out_csv: &Path) -> Result<Vec<String>> {
    let wm_bits = load_watermark(wm)?;
    let images = hosts
        .iter()
        .map(|p| Ok((label_of(p), load_rgb_image(p)?)))
        .collect::<Result<Vec<_>>>()?;
    let (csv, rows) = render_report(&images, &wm_bits, plan);
    std::fs::write(out_csv, csv).map_err(|e| Error::io(out_csv, e))?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if let Some(Err(msg)) = rows.iter().map(|r| &r.outcome).find(|o| o.is_err()) {
        return Err(Error::InvalidConfig(format!(
            "{failed} report rows failed; first: {msg}"
        )));
    }
    Ok(vec![format!("rows={} failed=0 out={}", rows.len(), out_csv.display())])
}

pub fn cmd_gen_fixtures(dir: &Path, seed: u64) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut lines = Vec::new();
    for (label, image) in fixtures::hosts(seed) {
        let path = dir.join(format!("{label}.png"));
        save_rgb_image(&image, &path)?;
        lines.push(format!("host={}", path.display()));
    }
    let path = dir.join("watermark.png");
    save_watermark(&fixtures::logo_watermark(), &path)?;
    lines.push(format!("watermark={}", path.display()));
    Ok(lines)
}
