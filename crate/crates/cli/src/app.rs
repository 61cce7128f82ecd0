//! Command definitions and orchestration. All heavy lifting lives in the
//! library crate; this module wires flags, config files and artifacts.

use clap::{Args, Parser, Subcommand};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ldcap::dynamics::{kepler_energy, lagrange_points, to_secondary_relative};
use ldcap::model::{GridSpec, SystemParams};
use ldcap::propagate::{physical_radius, propagate_sampled, IntegratorConfig};
use ldcap::survey::{
    capture_set, compute_label_field, compute_ld_field, generate_ic, Leg, SurveyRequest,
    SAMPLE_ICS,
};
use ldcap::validate::{agreement, class_boundaries};

use crate::config::Config;
use crate::io::{self, Header, IoError, Kind};
use crate::render;

/// Command failure with the process exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags, config entries or incompatible inputs (exit 1).
    Usage(String),
    /// The computation itself failed (exit 2).
    Numerical(String),
    /// Missing or malformed files (exit 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ldcap::Error> for CliError {
    fn from(e: ldcap::Error) -> Self {
        use ldcap::Error::*;
        match e {
            Parameter { .. } | GridMismatch(_) | DegenerateRadius | DegenerateRange => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ldcap",
    version,
    about = "Ballistic-capture surveys via Lagrangian descriptors in the Sun-Mars elliptic three-body problem"
)]
pub struct Cli {
    /// Optional key=value config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct GridArgs {
    /// Grid resolution per axis.
    #[arg(long)]
    n: Option<usize>,
    /// Grid half-width around the secondary [normalized length].
    #[arg(long)]
    eps: Option<f64>,
    /// Initial true anomaly [rad].
    #[arg(long, allow_negative_numbers = true)]
    f0: Option<f64>,
    /// Osculating eccentricity of the generated initial conditions.
    #[arg(long)]
    e0: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct TolArgs {
    /// Integrator relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Integrator absolute tolerance.
    #[arg(long)]
    abs_tol: Option<f64>,
}

impl TolArgs {
    fn integrator(&self, cfg: &Config) -> Result<IntegratorConfig, CliError> {
        let defaults = IntegratorConfig::default();
        let ic = IntegratorConfig {
            rel_tol: cfg.resolve(self.rel_tol, "rel-tol", defaults.rel_tol)?,
            abs_tol: cfg.resolve(self.abs_tol, "abs-tol", defaults.abs_tol)?,
            ..defaults
        };
        ic.validate()?;
        Ok(ic)
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a descriptor scalar field over a grid of initial conditions.
    Field {
        #[command(flatten)]
        grid: GridArgs,
        /// Backward integration extent, <= 0 [rad].
        #[arg(long, allow_negative_numbers = true)]
        fb: Option<f64>,
        /// Forward integration extent, >= 0 [rad].
        #[arg(long, allow_negative_numbers = true)]
        ff: Option<f64>,
        /// Descriptor norm exponent.
        #[arg(long)]
        gamma: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
        /// Output field file (.bcf).
        #[arg(long)]
        out: PathBuf,
        /// Also write the field as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Also render the field (grayscale PNG/PGM).
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Classify every grid point over one integration leg.
    Classify {
        #[command(flatten)]
        grid: GridArgs,
        /// Signed leg extent [rad]; negative integrates backward.
        #[arg(long, allow_negative_numbers = true)]
        extent: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
        /// Output label file.
        #[arg(long)]
        out: PathBuf,
        /// Also write the event anomalies as a field file.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Also render the labels (palette PNG/PGM).
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Intersect a backward and a forward label file into a capture mask.
    Capture {
        /// Label file of the backward leg.
        #[arg(long)]
        back: PathBuf,
        /// Label file of the forward leg.
        #[arg(long)]
        fwd: PathBuf,
        /// Output mask file.
        #[arg(long)]
        out: PathBuf,
        /// Also render the mask (PNG/PGM).
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Extract separatrices from a field file by thresholded Roberts gradient.
    Edges {
        /// Input field file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Gradient sensitivity threshold on the normalized field.
        #[arg(long)]
        sigma: Option<f64>,
        /// Output edge file.
        #[arg(long)]
        out: PathBuf,
        /// Also render the edges (PNG/PGM).
        #[arg(long)]
        png: Option<PathBuf>,
    },
    /// Score an edge file against the class boundaries of a label file.
    Validate {
        /// Edge file to score.
        #[arg(long)]
        edges: PathBuf,
        /// Label file providing the reference boundaries.
        #[arg(long)]
        labels: PathBuf,
        /// Pixel tolerance (Chebyshev metric).
        #[arg(long)]
        d: Option<usize>,
        /// Also write the metrics as a key=value file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export one trajectory, sampled at fixed anomaly spacing, in both the
    /// synodic and the secondary-centered non-rotating frame.
    Orbit {
        /// Named reference initial condition (a through l).
        #[arg(long, conflicts_with_all = ["x0", "y0"])]
        ic: Option<String>,
        /// Grid x-offset of the initial condition.
        #[arg(long, requires = "y0", allow_negative_numbers = true)]
        x0: Option<f64>,
        /// Grid y-offset of the initial condition.
        #[arg(long, requires = "x0", allow_negative_numbers = true)]
        y0: Option<f64>,
        /// Initial true anomaly [rad].
        #[arg(long, allow_negative_numbers = true)]
        f0: Option<f64>,
        /// Osculating eccentricity of the generated initial condition.
        #[arg(long)]
        e0: Option<f64>,
        /// Backward extent, <= 0 [rad].
        #[arg(long, allow_negative_numbers = true)]
        fb: Option<f64>,
        /// Forward extent, >= 0 [rad].
        #[arg(long, allow_negative_numbers = true)]
        ff: Option<f64>,
        /// Sampling interval [rad].
        #[arg(long)]
        df: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
        /// Output trajectory CSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Render any stored artifact (field, labels, edges or mask) to PNG/PGM.
    Render {
        /// Input .bcf file of any kind.
        #[arg(long = "in")]
        input: PathBuf,
        /// Output image.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the collinear equilibria and their Jacobi constants.
    Landmarks,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = Config::load(cli.config.as_deref())?;
    let params = SystemParams::sun_mars();
    match cli.command {
        Command::Field {
            grid,
            fb,
            ff,
            gamma,
            tol,
            out,
            csv,
            png,
        } => cmd_field(&cfg, &params, &grid, fb, ff, gamma, &tol, &out, csv, png),
        Command::Classify {
            grid,
            extent,
            tol,
            out,
            events,
            png,
        } => cmd_classify(&cfg, &params, &grid, extent, &tol, &out, events, png),
        Command::Capture {
            back,
            fwd,
            out,
            png,
        } => cmd_capture(&back, &fwd, &out, png),
        Command::Edges {
            input,
            sigma,
            out,
            png,
        } => cmd_edges(&cfg, &input, sigma, &out, png),
        Command::Validate {
            edges,
            labels,
            d,
            out,
        } => cmd_validate(&cfg, &edges, &labels, d, out),
        Command::Orbit {
            ic,
            x0,
            y0,
            f0,
            e0,
            fb,
            ff,
            df,
            tol,
            out,
        } => cmd_orbit(&cfg, &params, ic, x0, y0, f0, e0, fb, ff, df, &tol, &out),
        Command::Render { input, out } => cmd_render(&input, &out),
        Command::Landmarks => cmd_landmarks(&params),
    }
}

fn survey_request(
    cfg: &Config,
    grid: &GridArgs,
    f_b: f64,
    f_f: f64,
    gamma: f64,
) -> Result<SurveyRequest, CliError> {
    let n = cfg.resolve(grid.n, "n", 100)?;
    let eps = cfg.resolve(grid.eps, "eps", 6e-4)?;
    let req = SurveyRequest {
        grid: GridSpec::new(eps, n)?,
        f0: cfg.resolve(grid.f0, "f0", 0.0)?,
        f_b,
        f_f,
        e0: cfg.resolve(grid.e0, "e0", 0.9)?,
        gamma,
    };
    req.validate()?;
    Ok(req)
}

fn render_err(r: Result<(), String>) -> Result<(), CliError> {
    r.map_err(CliError::Io)
}

#[allow(clippy::too_many_arguments)]
fn cmd_field(
    cfg: &Config,
    params: &SystemParams,
    grid: &GridArgs,
    fb: Option<f64>,
    ff: Option<f64>,
    gamma: Option<f64>,
    tol: &TolArgs,
    out: &Path,
    csv: Option<PathBuf>,
    png: Option<PathBuf>,
) -> Result<(), CliError> {
    let f_b = cfg.resolve(fb, "fb", 0.0)?;
    let f_f = cfg.resolve(ff, "ff", 2.0 * PI)?;
    let gamma = cfg.resolve(gamma, "gamma", 0.5)?;
    let req = survey_request(cfg, grid, f_b, f_f, gamma)?;
    let config = tol.integrator(cfg)?;

    let fields = compute_ld_field(&req, &config, params)?;
    io::write_scalar_field(out, &fields.total, params)?;
    if let Some(csv) = csv {
        io::write_field_csv(&csv, &fields.total)?;
    }
    if let Some(png) = png {
        render_err(render::render_field(&fields.total, &png))?;
    }
    println!(
        "field n={} eps={} f0={} fb={} ff={} gamma={} -> {}",
        req.grid.n,
        req.grid.eps,
        req.f0,
        req.f_b,
        req.f_f,
        req.gamma,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_classify(
    cfg: &Config,
    params: &SystemParams,
    grid: &GridArgs,
    extent: Option<f64>,
    tol: &TolArgs,
    out: &Path,
    events: Option<PathBuf>,
    png: Option<PathBuf>,
) -> Result<(), CliError> {
    let extent = cfg.resolve(extent, "extent", 2.0 * PI)?;
    if extent == 0.0 {
        return Err(CliError::Usage(
            "field `extent`: leg extent must be nonzero".to_string(),
        ));
    }
    let leg = if extent < 0.0 { Leg::Backward } else { Leg::Forward };
    let req = survey_request(cfg, grid, extent.min(0.0), extent.max(0.0), 0.5)?;
    let config = tol.integrator(cfg)?;

    let labels = compute_label_field(&req, leg, &config, params)?;
    io::write_label_field(out, &labels, params)?;
    if let Some(events) = events {
        let ev_field = ldcap::model::ScalarField {
            spec: labels.spec,
            values: labels.event_anomaly.clone(),
            f0: labels.f0,
            f_b: req.f_b,
            f_f: req.f_f,
            gamma: 0.0,
        };
        io::write_scalar_field(&events, &ev_field, params)?;
    }
    if let Some(png) = png {
        render_err(render::render_labels(&labels, &png))?;
    }
    let mut counts = [0usize; 5];
    for l in &labels.labels {
        counts[l.code() as usize] += 1;
    }
    println!(
        "classify n={} extent={} -> {} (stable={} unstable={} crash={} inside={} error={})",
        req.grid.n,
        extent,
        out.display(),
        counts[0],
        counts[1],
        counts[2],
        counts[3],
        counts[4]
    );
    Ok(())
}

fn cmd_capture(
    back: &Path,
    fwd: &Path,
    out: &Path,
    png: Option<PathBuf>,
) -> Result<(), CliError> {
    let (hb, lb) = io::read_label_field(back)?;
    let (hf, lf) = io::read_label_field(fwd)?;
    if !hb.compatible_grid(&hf) {
        return Err(CliError::Usage(format!(
            "label files disagree on grid or f0: {} vs {}",
            back.display(),
            fwd.display()
        )));
    }
    if hb.f_b >= 0.0 || hf.f_f <= 0.0 {
        return Err(CliError::Usage(
            "capture needs a backward label file (--back) and a forward one (--fwd)".to_string(),
        ));
    }
    let cap = capture_set(&lb, &lf)?;
    let meta = Header {
        f_b: cap.f_b,
        f_f: cap.f_f,
        ..hb
    };
    io::write_mask(out, &cap.mask, &meta)?;
    if let Some(png) = png {
        render_err(render::render_mask(&cap.mask, cap.spec.n, &png))?;
    }
    let size = cap.mask.iter().filter(|&&m| m).count();
    println!(
        "capture fb={} ff={} -> {} ({size} pixels)",
        cap.f_b,
        cap.f_f,
        out.display()
    );
    Ok(())
}

fn cmd_edges(
    cfg: &Config,
    input: &Path,
    sigma: Option<f64>,
    out: &Path,
    png: Option<PathBuf>,
) -> Result<(), CliError> {
    let sigma = cfg.resolve(sigma, "sigma", 2e-2)?;
    let (header, field) = io::read_scalar_field(input)?;
    let normalized = ldcap::edges::normalize_field(&field)?;
    let edges = ldcap::edges::detect_edges(&normalized, sigma)?;
    io::write_edge_map(out, &edges, &header)?;
    if let Some(png) = png {
        render_err(render::render_edges(&edges, &png))?;
    }
    let count = edges.mask.iter().filter(|&&m| m).count();
    println!("edges sigma={sigma} -> {} ({count} pixels)", out.display());
    Ok(())
}

fn cmd_validate(
    cfg: &Config,
    edges_path: &Path,
    labels_path: &Path,
    d: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let d = cfg.resolve(d, "d", 2)?;
    let (he, edges) = io::read_edge_map(edges_path)?;
    let (hl, labels) = io::read_label_field(labels_path)?;
    if !he.compatible_grid(&hl) {
        return Err(CliError::Usage(format!(
            "edge and label files disagree on grid or f0: {} vs {}",
            edges_path.display(),
            labels_path.display()
        )));
    }
    let boundary = class_boundaries(&labels);
    let a = agreement(&edges, &boundary, d)?;
    let median = a
        .median_distance
        .map_or("n/a".to_string(), |m| m.to_string());
    println!("edge_pixels     {}", a.edge_pixels);
    println!("boundary_pixels {}", a.boundary_pixels);
    println!("precision       {:.6}", a.precision);
    println!("recall          {:.6}", a.recall);
    println!("median_distance {median}");
    if let Some(out) = out {
        let report = format!(
            "d={d}\nedge_pixels={}\nboundary_pixels={}\nprecision={}\nrecall={}\nmedian_distance={median}\n",
            a.edge_pixels, a.boundary_pixels, a.precision, a.recall
        );
        std::fs::write(&out, report).map_err(|e| CliError::Io(e.to_string()))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_orbit(
    cfg: &Config,
    params: &SystemParams,
    ic: Option<String>,
    x0: Option<f64>,
    y0: Option<f64>,
    f0: Option<f64>,
    e0: Option<f64>,
    fb: Option<f64>,
    ff: Option<f64>,
    df: Option<f64>,
    tol: &TolArgs,
    out: &Path,
) -> Result<(), CliError> {
    let offset = match (ic, x0, y0) {
        (Some(name), None, None) => SAMPLE_ICS
            .iter()
            .find(|(id, ..)| *id == name)
            .map(|&(_, x, y, _, _)| (x, y))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "field `ic`: unknown initial condition {name:?} (expected a..l)"
                ))
            })?,
        (None, Some(x), Some(y)) => (x, y),
        _ => {
            return Err(CliError::Usage(
                "orbit needs either --ic NAME or both --x0 and --y0".to_string(),
            ))
        }
    };
    let f0 = cfg.resolve(f0, "f0", 0.0)?;
    let e0 = cfg.resolve(e0, "e0", 0.9)?;
    let f_b = cfg.resolve(fb, "fb", 0.0)?;
    let f_f = cfg.resolve(ff, "ff", 0.0)?;
    let df = cfg.resolve(df, "df", 2.0 * PI / 1000.0)?;
    if f_b > 0.0 || f_f < 0.0 {
        return Err(CliError::Usage(
            "field `fb`/`ff`: backward extent must be <= 0 and forward extent >= 0".to_string(),
        ));
    }
    if f_b == 0.0 && f_f == 0.0 {
        return Err(CliError::Usage(
            "orbit needs a nonzero --fb or --ff".to_string(),
        ));
    }
    let config = tol.integrator(cfg)?;
    let state0 = generate_ic(offset, f0, e0, params)?;

    // backward samples collected then reversed, so rows ascend in f
    let mut rows: Vec<String> = Vec::new();
    let push = |rows: &mut Vec<String>, s: &ldcap::model::SynodicState<f64>| {
        let rel = to_secondary_relative(s, f0, params);
        let h = kepler_energy(&rel, params).unwrap_or(f64::NAN);
        rows.push(format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            s.f,
            s.x,
            s.y,
            s.xp,
            s.yp,
            rel.x,
            rel.y,
            rel.vx,
            rel.vy,
            physical_radius(s.f, s.x, s.y, params),
            h
        ));
    };
    if f_b < 0.0 {
        let mut back = Vec::new();
        propagate_sampled(&state0, f0, f0 + f_b, df, &config, params, |s| {
            push(&mut back, s)
        })?;
        back.reverse();
        // drop the duplicated start sample; the forward leg (or the single
        // start row below) re-adds it
        back.pop();
        rows.extend(back);
    }
    if f_f > 0.0 {
        propagate_sampled(&state0, f0, f0 + f_f, df, &config, params, |s| {
            push(&mut rows, s)
        })?;
    } else {
        push(&mut rows, &state0);
    }

    let mut text =
        String::from("f,x,y,xp,yp,rel_x,rel_y,rel_vx,rel_vy,r_phys,kepler_energy\n");
    for row in &rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(out, text).map_err(|e| CliError::Io(e.to_string()))?;
    println!(
        "orbit f0={f0} fb={f_b} ff={f_f} df={df} -> {} ({} samples)",
        out.display(),
        rows.len()
    );
    Ok(())
}

fn cmd_render(input: &Path, out: &Path) -> Result<(), CliError> {
    let (header, _) = {
        // peek at the kind, then re-read through the typed reader
        let bytes = std::fs::read(input).map_err(|e| CliError::Io(e.to_string()))?;
        let line_end = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| CliError::Io("missing header newline".to_string()))?;
        let line = std::str::from_utf8(&bytes[..line_end])
            .map_err(|_| CliError::Io("header is not UTF-8".to_string()))?;
        (Header::parse_line(line)?, ())
    };
    match header.kind {
        Kind::Field => {
            let (_, field) = io::read_scalar_field(input)?;
            render_err(render::render_field(&field, out))
        }
        Kind::Labels => {
            let (_, labels) = io::read_label_field(input)?;
            render_err(render::render_labels(&labels, out))
        }
        Kind::Edges => {
            let (_, edges) = io::read_edge_map(input)?;
            render_err(render::render_edges(&edges, out))
        }
        Kind::Mask => {
            let (h, mask) = io::read_mask(input)?;
            render_err(render::render_mask(&mask, h.n, out))
        }
    }?;
    println!("render {} -> {}", input.display(), out.display());
    Ok(())
}

fn cmd_landmarks(params: &SystemParams) -> Result<(), CliError> {
    let lm = lagrange_points(params)?;
    println!("L1 x={:.15} CJ={:.6}", lm.x_l1, lm.cj1);
    println!("L2 x={:.15} CJ={:.6}", lm.x_l2, lm.cj2);
    println!("L3 x={:.15} CJ={:.6}", lm.x_l3, lm.cj3);
    Ok(())
}
