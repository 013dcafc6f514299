// `!(a < b)` is used on purpose so that NaN arguments are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use bilat::bands::{
    bloch_cos_phi, double_cell_kard, find_band_edges, kard_at, log_derivatives, z_squared,
};
use bilat::deltamodel::{delta_bragg_point, delta_gap_edges, delta_half_cell, DeltaSpec};
use bilat::device::{parse_config, Device, HalfCellSpec, Ordering, ParsedConfig};
use bilat::oracle::{convergence_table, ConvergenceRow};
use bilat::tmatrix::{device_m, device_w};
use bilat::transmission::{
    find_transparent, sweep_device_point, sweep_point, Biperiodic, SweepRecord,
};

/// Finest-level oracle tolerance for `validate`.
const ORACLE_TOL: f64 = 1e-8;
const IDENTITY_TOL: f64 = 1e-9;
const DEFAULT_WIDTHS: [f64; 5] = [1e-2, 5e-3, 2.5e-3, 1.25e-3, 1e-3];

#[derive(Parser)]
#[command(
    name = "bilat",
    version,
    about = "Transmission through biperiodic superlattices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission and Kard parameters over an energy grid.
    Sweep(SweepArgs),
    /// Band edges, split gap and transparent states.
    Bands(BandsArgs),
    /// Dimensionless delta-barrier half-cell over a kd grid.
    Delta(DeltaArgs),
    /// Oracle convergence table and identity checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Order {
    Wide,
    Narrow,
}

impl From<Order> for Ordering {
    fn from(o: Order) -> Self {
        match o {
            Order::Wide => Ordering::WideFirst,
            Order::Narrow => Ordering::NarrowFirst,
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Lowest energy (meV).
    #[arg(long, default_value_t = 85.0)]
    emin: f64,
    /// Highest energy (meV).
    #[arg(long, default_value_t = 130.0)]
    emax: f64,
    #[arg(long, default_value_t = 4501)]
    points: usize,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    device: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Overrides the number of half-cells in a biperiodic config.
    #[arg(long)]
    half_cells: Option<usize>,
    #[arg(long, value_enum)]
    order: Option<Order>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct BandsArgs {
    #[arg(long)]
    device: PathBuf,
    #[arg(long, default_value_t = 60.0)]
    emin: f64,
    #[arg(long, default_value_t = 140.0)]
    emax: f64,
    #[arg(long, default_value_t = 4001)]
    points: usize,
    #[arg(long, value_enum)]
    order: Option<Order>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DeltaArgs {
    /// Barrier strength Ωd in units of π.
    #[arg(long, default_value_t = 1.403)]
    omega_d_pi: f64,
    /// Asymmetry s/d.
    #[arg(long, default_value_t = 0.10)]
    asym: f64,
    #[arg(long, default_value_t = 0.01)]
    kdmin_pi: f64,
    #[arg(long, default_value_t = 1.0)]
    kdmax_pi: f64,
    #[arg(long, default_value_t = 991)]
    points: usize,
    /// Report gap edges and the Bragg point instead of the table.
    #[arg(long)]
    edges: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    /// Device to slice; the two-half-cell reference cell if omitted.
    #[arg(long)]
    device: Option<PathBuf>,
    #[arg(long, default_value_t = 100.0)]
    energy: f64,
    /// Slice widths (nm), coarsest first. Repeatable.
    #[arg(long = "slice-width")]
    slice_width: Vec<f64>,
}

enum Failure {
    Validation(String),
    Config(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<bilat::Error> for Failure {
    fn from(e: bilat::Error) -> Self {
        use bilat::Error::*;
        match e {
            Syntax { .. } | InvalidDevice(_) | InvalidArgument(_) => Failure::Config(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }
    let result = match cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::Bands(a) => cmd_bands(a),
        Command::Delta(a) => cmd_delta(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("BILAT_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| {
        Failure::Config(format!(
            "BILAT_THREADS must be a positive integer (got {v:?})"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(e.to_string()))
}

fn load(path: &PathBuf) -> Outcome<ParsedConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn linspace(lo: f64, hi: f64, points: usize) -> Outcome<Vec<f64>> {
    if points < 2 || !(lo < hi) {
        return Err(Failure::Config(format!(
            "grid needs min < max and at least 2 points (got [{lo}, {hi}], {points})"
        )));
    }
    Ok((0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (points - 1) as f64
            }
        })
        .collect())
}

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome<()> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Numerical(e.to_string())),
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn json_rows(header: &[&str], rows: impl Iterator<Item = Vec<Value>>) -> String {
    let v: Vec<Value> = rows
        .map(|r| {
            let obj: serde_json::Map<String, Value> =
                header.iter().map(|h| h.to_string()).zip(r).collect();
            Value::Object(obj)
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&v).expect("serialisable");
    s.push('\n');
    s
}

/// The biperiodic view of a config, with command-line overrides applied.
fn biperiodic(
    cfg: &ParsedConfig,
    half_cells: Option<usize>,
    order: Option<Order>,
) -> Outcome<Option<(Biperiodic, Device)>> {
    let Some(bp) = cfg.biperiodic else {
        if half_cells.is_some() || order.is_some() {
            return Err(Failure::Config(
                "--half-cells and --order need a biperiodic config".into(),
            ));
        }
        return Ok(None);
    };
    let n = half_cells.unwrap_or(bp.half_cells);
    if n == 0 {
        return Err(Failure::Config("--half-cells must be >= 1".into()));
    }
    let bip = Biperiodic::new(bp.spec(), n, order.map_or(bp.order, Ordering::from));
    let mut device = bip.device();
    device.exterior_mass = cfg.device.exterior_mass;
    device.exterior_potential = cfg.device.exterior_potential;
    Ok(Some((bip, device)))
}

fn cmd_sweep(a: SweepArgs) -> Outcome<()> {
    let cfg = load(&a.device)?;
    let grid = linspace(a.grid.emin, a.grid.emax, a.grid.points)?;
    let view = biperiodic(&cfg, a.half_cells, a.order)?;
    let rows: Vec<bilat::Result<Option<SweepRecord>>> = grid
        .par_iter()
        .map(|&e| match &view {
            Some((bip, device)) => sweep_point(bip, device, e),
            None => sweep_device_point(&cfg.device, e),
        })
        .collect();
    let records: Vec<SweepRecord> = rows
        .into_iter()
        .collect::<bilat::Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let header = SweepRecord::HEADER;
    let text = match a.format {
        Format::Csv => csv(
            &header,
            records.iter().map(|r| {
                let mut v = vec![num(r.energy), r.zone_label()];
                v.extend(
                    [
                        r.cos_phi_h,
                        r.cos_phi,
                        r.alpha,
                        r.eta,
                        r.mu_or_xi,
                        r.t_n,
                        r.env_min,
                        r.env_max,
                        r.t_closed,
                        r.discrepancy,
                    ]
                    .map(num),
                );
                v
            }),
        ),
        Format::Json => json_rows(
            &header,
            records.iter().map(|r| {
                vec![
                    json!(r.energy),
                    json!(r.zone_label()),
                    json!(r.cos_phi_h),
                    json!(r.cos_phi),
                    json!(r.alpha),
                    json!(r.eta),
                    json!(r.mu_or_xi),
                    json!(r.t_n),
                    json!(r.env_min),
                    json!(r.env_max),
                    json!(r.t_closed),
                    json!(r.discrepancy),
                ]
            }),
        ),
    };
    emit(&a.out, &text)
}

fn cmd_bands(a: BandsArgs) -> Outcome<()> {
    let cfg = load(&a.device)?;
    let Some((bip, _)) = biperiodic(&cfg, None, a.order)? else {
        return Err(Failure::Config("bands needs a biperiodic config".into()));
    };
    let spec = bip.half_cell();
    let scan = find_band_edges(&spec, (a.emin, a.emax), a.points)?;
    let edges: Vec<Value> = scan
        .edges
        .iter()
        .map(|e| json!({"energy": e.energy, "kind": format!("{:?}", e.kind), "which": format!("{:?}", e.which)}))
        .collect();
    let gap = scan.split_gaps().first().copied();
    let mut transparent = Value::Null;
    let bands = scan.allowed_bands();
    for (i, band) in bands.iter().enumerate() {
        if let Some(e) = find_transparent(&spec, *band)? {
            let which = match gap {
                Some((lo, _)) if band.1 <= lo => "lower",
                Some(_) => "upper",
                None => "none",
            };
            transparent = json!({"energy": e, "band": which, "band_index": i});
            break;
        }
    }
    let report = json!({
        "order": format!("{:?}", bip.ordering),
        "edges": edges,
        "gap": gap.map(|(lo, hi)| json!({"lo": lo, "hi": hi, "width": hi - lo})),
        "allowed": bands.iter().map(|b| json!([b.0, b.1])).collect::<Vec<_>>(),
        "transparent": transparent,
        "warnings": scan.warnings,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("serialisable");
    text.push('\n');
    emit(&a.out, &text)
}

fn cmd_delta(a: DeltaArgs) -> Outcome<()> {
    let spec = DeltaSpec::new(a.omega_d_pi * PI, a.asym)?;
    if a.edges {
        let window = (a.kdmin_pi * PI, a.kdmax_pi * PI);
        let (g, up) = delta_gap_edges(&spec, window)?;
        let bragg = delta_bragg_point(&spec, (g.min(up), g.max(up)))?;
        let report = json!({
            "omega_d_pi": a.omega_d_pi,
            "asym": a.asym,
            "g_node_pi": g / PI,
            "up_node_pi": up / PI,
            "bragg_pi": bragg / PI,
        });
        let mut text = serde_json::to_string_pretty(&report).expect("serialisable");
        text.push('\n');
        return emit(&a.out, &text);
    }
    let grid = linspace(a.kdmin_pi, a.kdmax_pi, a.points)?;
    if grid[0] <= 0.0 {
        return Err(Failure::Config("--kdmin-pi must be > 0".into()));
    }
    let header = [
        "kd_over_pi",
        "gamma",
        "lambda",
        "cos_phi_h",
        "cos_phi",
        "z2",
        "z2_tilde",
        "tan2_half_phi",
    ];
    let mut rows = Vec::with_capacity(grid.len());
    for &x in &grid {
        let w = delta_half_cell(x * PI, &spec)?;
        let ld = log_derivatives(&w);
        let ph = bloch_cos_phi(&w);
        let z = z_squared(&w);
        rows.push([
            x,
            ld.gamma,
            ld.lambda,
            ph.cos_phi_h,
            ph.cos_phi,
            z.z2,
            z.z2_tilde,
            ld.tan2_half_phi(),
        ]);
    }
    let text = match a.format {
        Format::Csv => csv(&header, rows.iter().map(|r| r.map(num).to_vec())),
        Format::Json => json_rows(&header, rows.iter().map(|r| r.map(|x| json!(x)).to_vec())),
    };
    emit(&a.out, &text)
}

fn cmd_validate(a: ValidateArgs) -> Outcome<()> {
    let device = match &a.device {
        Some(p) => load(p)?.device,
        None => HalfCellSpec::gaas_reference().build_biperiodic(2, Ordering::WideFirst),
    };
    let widths = if a.slice_width.is_empty() {
        DEFAULT_WIDTHS.to_vec()
    } else {
        a.slice_width.clone()
    };
    let analytic = device_w(&device, a.energy);
    let rows = convergence_table(&device, a.energy, &analytic, &widths)?;
    println!(
        "{:>12} {:>12} {:>12} {:>8}",
        "slice_nm", "raw_diff", "richardson", "ratio"
    );
    for ConvergenceRow {
        slice_width,
        raw_diff,
        richardson_diff,
        ratio,
    } in &rows
    {
        let ratio = ratio.map_or_else(|| "-".to_string(), |r| format!("{r:.3}"));
        println!("{slice_width:>12.3e} {raw_diff:>12.3e} {richardson_diff:>12.3e} {ratio:>8}");
    }

    let spec = HalfCellSpec::gaas_reference().oriented(Ordering::WideFirst);
    let sweep_dev = spec.build_biperiodic(6, Ordering::WideFirst);
    let (mut mu_res, mut flux) = (0.0_f64, 0.0_f64);
    for e in linspace(85.0, 130.0, 4501)? {
        if let Ok(kp) = kard_at(&spec, e) {
            if kp.zone.is_allowed() {
                mu_res = mu_res.max(double_cell_kard(&kp).residual());
            }
        }
        let m = device_m(&sweep_dev, e)?;
        flux = flux.max((m.flux() - 1.0).abs() / m.m11.norm_sqr().max(1.0));
    }
    println!("max μ dual-formula residual {mu_res:.3e}");
    println!("max relative flux defect    {flux:.3e}");

    let finest = rows.last().expect("at least one width").richardson_diff;
    let mut failures = Vec::new();
    if !(finest < ORACLE_TOL) {
        failures.push(format!(
            "finest oracle level differs by {finest:.3e} (limit {ORACLE_TOL:e})"
        ));
    }
    if !(mu_res < IDENTITY_TOL) {
        failures.push(format!("μ residual {mu_res:.3e} exceeds {IDENTITY_TOL:e}"));
    }
    if !(flux < IDENTITY_TOL) {
        failures.push(format!("flux defect {flux:.3e} exceeds {IDENTITY_TOL:e}"));
    }
    if failures.is_empty() {
        println!("ok");
        Ok(())
    } else {
        Err(Failure::Validation(failures.join("; ")))
    }
}
