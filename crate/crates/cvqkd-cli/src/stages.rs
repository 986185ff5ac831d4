//! Stage implementations behind the CLI subcommands.
//!
//! Every stage reads its inputs from the output directory (or the config),
//! writes CSV/JSON artifacts there and records digests in the manifest.
//! Exit-code contract: 0 success, 2 input/config error, 3 numerical/fit
//! error, 4 Monte-Carlo budget exhausted with an incomplete table.

use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};

use cvqkd_core::channel::{holevo_bound_be, mutual_information_ab, secret_key_rate};
use cvqkd_core::ldpc::{
    default_protograph, extend_to_rate, lift, parse_protograph, LiftOptions, RateAdaptiveCode,
};
use cvqkd_core::optimizer::{
    distance_sweep, fixed_beta_baseline, grid_search, local_refine, Improvement, OptimizerError,
    OptimumPoint,
};
use cvqkd_core::sim::{
    point_seed, read_samples_csv, run_fer_grid, run_fer_point, write_samples_csv, FerSample,
    RateFerTable, SimConfig,
};
use cvqkd_core::surface::{
    build_surface, fit_rate_curve, read_surface_json, write_surface_json, FerSurface,
};

use crate::config::Config;
use crate::manifest::{RunManifest, StageTimer};

/// Error wrapper carrying the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Input or configuration problem (exit 2).
    Config(anyhow::Error),
    /// Numerical or fitting failure (exit 3).
    Numerical(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e:#}"),
            CliError::Numerical(e) => write!(f, "numerical error: {e:#}"),
        }
    }
}

pub type StageResult = Result<StageStatus, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageStatus {
    Ok,
    /// Outputs written, but an MC budget ran out before the FER window was
    /// bracketed (exit 4).
    Partial,
}

impl StageStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            StageStatus::Ok => "ok",
            StageStatus::Partial => "partial",
        }
    }

    fn merge(self, other: StageStatus) -> StageStatus {
        if self == StageStatus::Partial || other == StageStatus::Partial {
            StageStatus::Partial
        } else {
            StageStatus::Ok
        }
    }
}

fn cfg_err<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Config(e.into())
}

fn num_err<E: Into<anyhow::Error>>(e: E) -> CliError {
    CliError::Numerical(e.into())
}

/// Everything a stage needs.
pub struct Ctx {
    pub config: Config,
    pub config_path: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub workers: usize,
}

impl Ctx {
    fn sim_config(&self) -> SimConfig {
        SimConfig {
            seed: self.seed,
            max_frames: self.config.mc.max_frames,
            target_errors: self.config.mc.target_errors,
            max_iterations: self.config.mc.max_iterations,
            llr_clip: self.config.mc.llr_clip,
            workers: self.workers,
        }
    }

    fn build_code(&self) -> Result<Arc<RateAdaptiveCode>, CliError> {
        let proto = match self.config.protograph_path(&self.config_path) {
            Some(path) => {
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("cannot read protograph {}", path.display()))
                    .map_err(CliError::Config)?;
                parse_protograph(&text)
                    .with_context(|| format!("invalid protograph {}", path.display()))
                    .map_err(CliError::Config)?
            }
            None => default_protograph(),
        };
        let opts = LiftOptions {
            ext_degree: self.config.code.ext_degree,
            max_extension: self.config.code.max_extension,
        };
        let code = lift(&proto, self.config.code.lifting_factor, self.seed, &opts)
            .context("lifting the protograph failed")
            .map_err(CliError::Config)?;
        Ok(Arc::new(code))
    }

    fn surface_path(&self) -> PathBuf {
        self.out_dir.join("surface.json")
    }

    fn load_surface(&self) -> Result<FerSurface, CliError> {
        let path = self.surface_path();
        let file = File::open(&path)
            .with_context(|| format!("cannot open {} (run `fit` first)", path.display()))
            .map_err(CliError::Config)?;
        read_surface_json(BufReader::new(file)).map_err(num_err)
    }
}

fn create_out_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    let f = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))
        .map_err(CliError::Config)?;
    Ok(BufWriter::new(f))
}

// ---------------------------------------------------------------------------
// simulate

pub fn stage_simulate(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut timer = StageTimer::start("simulate", &ctx.out_dir);
    let code = ctx.build_code()?;
    for &r in &ctx.config.mc.rates {
        // Surface rates must exist in the code family.
        extend_to_rate(&code, r)
            .with_context(|| format!("configured rate {r} is not achievable"))
            .map_err(CliError::Config)?;
    }
    let tables = run_fer_grid(
        &code,
        &ctx.config.mc.rates,
        &ctx.config.ladder_policy(),
        &ctx.sim_config(),
    )
    .map_err(cfg_err)?;
    let mut status = StageStatus::Ok;
    for table in &tables {
        let path = ctx.out_dir.join(format!("samples_r{}.csv", table.rate));
        let mut w = create_out_file(&path)?;
        write_samples_csv(&mut w, table).map_err(num_err)?;
        w.flush().map_err(cfg_err)?;
        timer.add_output(&path).map_err(CliError::Config)?;
        if !table.window_covered {
            eprintln!(
                "warning: rate {} table does not bracket the FER window (budget exhausted)",
                table.rate
            );
            status = StageStatus::Partial;
        }
        println!(
            "simulate: rate {} -> {} points, window_covered={}",
            table.rate,
            table.samples.len(),
            table.window_covered
        );
    }
    manifest.record_stage(timer.finish(status.as_str()));
    Ok(status)
}

// ---------------------------------------------------------------------------
// fit

fn read_all_sample_tables(ctx: &Ctx) -> Result<Vec<RateFerTable>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&ctx.out_dir)
        .with_context(|| format!("cannot list {}", ctx.out_dir.display()))
        .map_err(CliError::Config)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|x| x.to_str())
                .map(|x| x.starts_with("samples_") && x.ends_with(".csv"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Config(anyhow!(
            "no samples_*.csv in {} (run `simulate` first)",
            ctx.out_dir.display()
        )));
    }
    let mut tables: Vec<RateFerTable> = Vec::new();
    for path in &paths {
        let file = File::open(path)
            .with_context(|| format!("cannot open {}", path.display()))
            .map_err(CliError::Config)?;
        for table in read_samples_csv(BufReader::new(file)).map_err(cfg_err)? {
            match tables.iter_mut().find(|t| t.rate == table.rate) {
                Some(existing) => existing.samples.extend(table.samples),
                None => tables.push(table),
            }
        }
    }
    Ok(tables)
}

pub fn stage_fit(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut timer = StageTimer::start("fit", &ctx.out_dir);
    let tables = read_all_sample_tables(ctx)?;
    if tables.len() < 2 {
        return Err(CliError::Config(anyhow!(
            "surface fitting needs samples for at least 2 rates, found {}",
            tables.len()
        )));
    }
    let mut fits = Vec::new();
    let mut report_rows = Vec::new();
    for table in &tables {
        let fit = fit_rate_curve(&table.samples, ctx.config.fit.degree, ctx.config.fit.transform)
            .with_context(|| format!("fit failed for rate {}", table.rate))
            .map_err(CliError::Numerical)?;
        let fer_min = table.samples.iter().map(|s| s.fer).fold(1.0, f64::min);
        let fer_max = table.samples.iter().map(|s| s.fer).fold(0.0, f64::max);
        if fer_min > 0.02 || fer_max < 0.8 {
            eprintln!(
                "warning: rate {} samples span FER [{fer_min}, {fer_max}], \
                 narrower than the recommended [0.02, 0.8]",
                table.rate
            );
        }
        report_rows.push((
            table.rate,
            table.samples.len(),
            fit.domain,
            fer_min,
            fer_max,
            fit.residual_rms,
        ));
        fits.push(fit);
    }
    let surface = build_surface(fits).map_err(num_err)?;
    let spath = ctx.surface_path();
    let mut w = create_out_file(&spath)?;
    write_surface_json(&mut w, &surface).map_err(num_err)?;
    w.flush().map_err(cfg_err)?;
    timer.add_output(&spath).map_err(CliError::Config)?;

    let rpath = ctx.out_dir.join("fit_report.csv");
    let mut w = create_out_file(&rpath)?;
    writeln!(w, "rate,samples,s_min,s_max,fer_min,fer_max,residual_rms").map_err(cfg_err)?;
    for (rate, n, (s_min, s_max), fmin, fmax, rms) in report_rows {
        writeln!(w, "{rate},{n},{s_min},{s_max},{fmin},{fmax},{rms}").map_err(cfg_err)?;
    }
    w.flush().map_err(cfg_err)?;
    timer.add_output(&rpath).map_err(CliError::Config)?;
    println!(
        "fit: surface over rates [{}, {}] -> {}",
        surface.rate_range().0,
        surface.rate_range().1,
        spath.display()
    );
    manifest.record_stage(timer.finish("ok"));
    Ok(StageStatus::Ok)
}

// ---------------------------------------------------------------------------
// optimum CSV helpers

pub const SWEEP_CSV_HEADER: &str = "d_km,v_a_star,beta_star,s_linear,rate,fer,skr,feasible";

fn write_point_row<W: Write>(w: &mut W, p: &OptimumPoint) -> std::io::Result<()> {
    writeln!(
        w,
        "{},{},{},{},{},{},{},{}",
        p.d_km, p.v_a_star, p.beta_star, p.s, p.rate, p.fer, p.skr, p.feasible
    )
}

/// Parses sweep.csv rows back into points (used by `validate`).
fn read_sweep_csv(path: &Path) -> Result<Vec<OptimumPoint>, CliError> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {} (run `sweep` first)", path.display()))
        .map_err(CliError::Config)?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(CliError::Config(anyhow!(
                "{}: line {} has {} fields, expected 8",
                path.display(),
                i + 1,
                f.len()
            )));
        }
        let parse = |s: &str| -> Result<f64, CliError> {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(anyhow!("bad float '{s}' in {}", path.display())))
        };
        points.push(OptimumPoint {
            d_km: parse(f[0])?,
            v_a_star: parse(f[1])?,
            beta_star: parse(f[2])?,
            s: parse(f[3])?,
            rate: parse(f[4])?,
            fer: parse(f[5])?,
            skr: parse(f[6])?,
            feasible: f[7] == "true",
        });
    }
    Ok(points)
}

// ---------------------------------------------------------------------------
// optimize / sweep / compare

pub fn stage_optimize(
    ctx: &Ctx,
    manifest: &mut RunManifest,
    distance: Option<f64>,
) -> StageResult {
    let mut timer = StageTimer::start("optimize", &ctx.out_dir);
    let surface = ctx.load_surface()?;
    let d = distance
        .or(ctx.config.optimize.distance_km)
        .unwrap_or(ctx.config.sweep.distances_km[0]);
    let params = ctx.config.system_params(d).validated().map_err(cfg_err)?;
    let space = ctx.config.search_space();
    let grid = grid_search(&params, &surface, &space).map_err(num_err)?;
    let refined = if space.refine && grid.feasible {
        local_refine(&params, &surface, &space, &grid).map_err(num_err)?
    } else {
        grid
    };
    println!(
        "optimize d={d} km: grid (V_A*={}, beta*={}, SKR={}), refined (V_A*={}, beta*={}, SKR={})",
        grid.v_a_star, grid.beta_star, grid.skr, refined.v_a_star, refined.beta_star, refined.skr
    );
    let path = ctx.out_dir.join("optimum.csv");
    let mut w = create_out_file(&path)?;
    writeln!(w, "{SWEEP_CSV_HEADER}").map_err(cfg_err)?;
    write_point_row(&mut w, &refined).map_err(cfg_err)?;
    w.flush().map_err(cfg_err)?;
    timer.add_output(&path).map_err(CliError::Config)?;
    manifest.record_stage(timer.finish("ok"));
    Ok(StageStatus::Ok)
}

pub fn stage_sweep(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut timer = StageTimer::start("sweep", &ctx.out_dir);
    let surface = ctx.load_surface()?;
    let params = ctx.config.system_params(0.0).validated().map_err(cfg_err)?;
    let space = ctx.config.search_space();
    let records = distance_sweep(&params, &ctx.config.sweep.distances_km, &surface, &space)
        .map_err(num_err)?;
    let final_path = ctx.out_dir.join("sweep.csv");
    let grid_path = ctx.out_dir.join("sweep_grid.csv");
    let mut wf = create_out_file(&final_path)?;
    let mut wg = create_out_file(&grid_path)?;
    writeln!(wf, "{SWEEP_CSV_HEADER}").map_err(cfg_err)?;
    writeln!(wg, "{SWEEP_CSV_HEADER}").map_err(cfg_err)?;
    for rec in &records {
        write_point_row(&mut wf, rec.final_point()).map_err(cfg_err)?;
        write_point_row(&mut wg, &rec.grid).map_err(cfg_err)?;
        let p = rec.final_point();
        println!(
            "sweep d={} km: feasible={} V_A*={} beta*={} R={} FER={} SKR={}",
            p.d_km, p.feasible, p.v_a_star, p.beta_star, p.rate, p.fer, p.skr
        );
    }
    wf.flush().map_err(cfg_err)?;
    wg.flush().map_err(cfg_err)?;
    timer.add_output(&final_path).map_err(CliError::Config)?;
    timer.add_output(&grid_path).map_err(CliError::Config)?;
    manifest.record_stage(timer.finish("ok"));
    Ok(StageStatus::Ok)
}

pub fn stage_compare(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut timer = StageTimer::start("compare", &ctx.out_dir);
    let surface = ctx.load_surface()?;
    let params = ctx.config.system_params(0.0).validated().map_err(cfg_err)?;
    let space = ctx.config.search_space();
    let records = fixed_beta_baseline(
        &params,
        &ctx.config.sweep.distances_km,
        &surface,
        ctx.config.sweep.baseline_beta,
        &space,
    )
    .map_err(|e| match e {
        OptimizerError::BaselineOffGrid { .. } => cfg_err(e),
        other => num_err(other),
    })?;
    let path = ctx.out_dir.join("compare.csv");
    let mut w = create_out_file(&path)?;
    writeln!(w, "{SWEEP_CSV_HEADER},skr_baseline,improvement").map_err(cfg_err)?;
    for rec in &records {
        let imp = match rec.improvement {
            Improvement::Finite(x) => format!("{x}"),
            Improvement::Unbounded => "inf".to_string(),
        };
        let p = &rec.joint;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            p.d_km,
            p.v_a_star,
            p.beta_star,
            p.s,
            p.rate,
            p.fer,
            p.skr,
            p.feasible,
            rec.baseline.skr,
            imp
        )
        .map_err(cfg_err)?;
        println!(
            "compare d={} km: joint SKR={} baseline SKR={} improvement={}",
            rec.d_km, rec.joint.skr, rec.baseline.skr, imp
        );
    }
    w.flush().map_err(cfg_err)?;
    timer.add_output(&path).map_err(CliError::Config)?;
    manifest.record_stage(timer.finish("ok"));
    Ok(StageStatus::Ok)
}

// ---------------------------------------------------------------------------
// validate

pub const VALIDATE_CSV_HEADER: &str = "d_km,v_a_star,beta_star,s_linear,rate,fer_predicted,\
fer_simulated,frames,errors,ci_low,ci_high,skr_predicted,skr_simulated";

pub fn stage_validate(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut timer = StageTimer::start("validate", &ctx.out_dir);
    let sweep_points = read_sweep_csv(&ctx.out_dir.join("sweep.csv"))?;
    let code = ctx.build_code()?;
    let base_cfg = ctx.sim_config();
    let path = ctx.out_dir.join("validate.csv");
    let mut w = create_out_file(&path)?;
    writeln!(w, "{VALIDATE_CSV_HEADER}").map_err(cfg_err)?;
    let mut status = StageStatus::Ok;
    for (idx, p) in sweep_points.iter().enumerate() {
        if !p.feasible {
            continue;
        }
        let view = extend_to_rate(&code, p.rate)
            .with_context(|| format!("optimum rate {} not achievable", p.rate))
            .map_err(CliError::Numerical)?;
        let mut cfg = base_cfg;
        // Disjoint seed space from the simulate stage's ladder points.
        cfg.seed = point_seed(ctx.seed, 1 << 20, idx);
        let sample: FerSample = run_fer_point(&view, p.s, &cfg).map_err(cfg_err)?;
        if sample.frames == cfg.max_frames && sample.frame_errors < cfg.target_errors {
            status = status.merge(StageStatus::Ok); // floor points are expected
        }
        let params = ctx
            .config
            .system_params(p.d_km)
            .validated()
            .map_err(cfg_err)?;
        let i_ab = mutual_information_ab(&params, p.v_a_star);
        let chi = holevo_bound_be(&params, p.v_a_star).map_err(cfg_err)?;
        let skr_sim = secret_key_rate(i_ab, chi, p.beta_star, sample.fer);
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            p.d_km,
            p.v_a_star,
            p.beta_star,
            p.s,
            p.rate,
            p.fer,
            sample.fer,
            sample.frames,
            sample.frame_errors,
            sample.ci_low,
            sample.ci_high,
            p.skr,
            skr_sim
        )
        .map_err(cfg_err)?;
        println!(
            "validate d={} km: predicted FER={} simulated FER={} ({} frames)",
            p.d_km, p.fer, sample.fer, sample.frames
        );
    }
    w.flush().map_err(cfg_err)?;
    timer.add_output(&path).map_err(CliError::Config)?;
    manifest.record_stage(timer.finish(status.as_str()));
    Ok(status)
}

// ---------------------------------------------------------------------------
// pipeline

pub fn stage_pipeline(ctx: &Ctx, manifest: &mut RunManifest) -> StageResult {
    let mut status = stage_simulate(ctx, manifest)?;
    status = status.merge(stage_fit(ctx, manifest)?);
    status = status.merge(stage_sweep(ctx, manifest)?);
    status = status.merge(stage_compare(ctx, manifest)?);
    status = status.merge(stage_validate(ctx, manifest)?);
    Ok(status)
}
