//! Batch driver for the multiscale Lipschitz-map analyses.
//!
//! Commands:
//!   corpus-list    print the synthetic map families and their parameters
//!   analyze-md     packing report: volume of cubes with md(3Q) > delta L
//!   analyze-beta   multiscale sum of beta(3Q^N)^2 vol(Q)
//!   scan-point     md decay profile of the cubes containing a point
//!   beta-md        per-cube table pairing lifted beta(3Q^N) with md(Q)
//!
//! Flags mirror a flat key=value config file (`--config path`); flags
//! override file values. `METRICDIFF_SEED` is the seed fallback. Reports
//! are deterministic given (config, seed); wall-clock metadata lands in a
//! `.meta.txt` sidecar.

use metricdiff_core::beta::{carleson_beta_sum, QuadratureSpec};
use metricdiff_core::carleson::{
    beta_vs_md_table, md_profile, packing_from_profile, pointwise_decay_scan,
};
use metricdiff_core::corpus::{
    default_resolution, lift_map, margin_for, sample_map, MapSpec, SampledMap,
};
use metricdiff_core::dyadic::Grid;
use metricdiff_core::error::{Error, Result};
use metricdiff_core::exec;
use metricdiff_core::report;
use metricdiff_core::seminorm::{AnalysisParams, PolyhedralSeminorm};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    fn parse(args: &[String]) -> Result<(String, Config)> {
        let command = args
            .first()
            .cloned()
            .ok_or_else(|| Error::Config(usage()))?;
        let mut values = BTreeMap::new();
        let mut i = 1;
        let mut flags: Vec<(String, String)> = Vec::new();
        while i < args.len() {
            let arg = &args[i];
            let Some(stripped) = arg.strip_prefix("--") else {
                return Err(Error::Config(format!("unexpected argument `{arg}`")));
            };
            let (key, value) = match stripped.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = args
                        .get(i + 1)
                        .ok_or_else(|| Error::Config(format!("flag --{stripped} needs a value")))?;
                    i += 1;
                    (stripped.to_string(), v.clone())
                }
            };
            flags.push((key, value));
            i += 1;
        }
        // config file first, flags override
        if let Some((_, path)) = flags.iter().find(|(k, _)| k == "config") {
            let text = std::fs::read_to_string(path)?;
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("bad config line `{line}`")))?;
                values.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for (k, v) in flags {
            values.insert(k, v);
        }
        Ok((command, Config { values }))
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    fn parse_num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| Error::Config(format!("flag --{key}: cannot parse `{raw}`"))),
        }
    }

    fn seed(&self) -> Result<u64> {
        if let Some(raw) = self.get("seed") {
            return raw
                .parse()
                .map_err(|_| Error::Config(format!("bad --seed `{raw}`")));
        }
        if let Ok(raw) = std::env::var("METRICDIFF_SEED") {
            return raw
                .parse()
                .map_err(|_| Error::Config(format!("bad METRICDIFF_SEED `{raw}`")));
        }
        Ok(0)
    }
}

fn usage() -> String {
    "usage: metricdiff <corpus-list|analyze-md|analyze-beta|scan-point|beta-md> [--flags]\n\
     common flags: --map --n --depth --delta --alpha --N --seed --lines --m \
     --pairs --directions --out --format {record,csv,both} --workers --config"
        .to_string()
}

fn parse_points(raw: &str) -> Result<Vec<Vec<f64>>> {
    raw.split(';')
        .map(|p| {
            p.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad coordinate `{t}`")))
                })
                .collect()
        })
        .collect()
}

/// Builds the map family plus its default analysis root.
fn build_map(cfg: &Config) -> Result<(MapSpec, Grid)> {
    let family = cfg.get("map").unwrap_or("corner");
    let n: usize = cfg.parse_num("n", 1)?;
    if n == 0 || n > 3 {
        return Err(Error::Config("supported dimensions: 1 <= n <= 3".into()));
    }
    let spec = match family {
        "corner" => {
            if n != 1 {
                return Err(Error::Config("corner is a 1-D family".into()));
            }
            MapSpec::Corner { corner: cfg.parse_num("c", 0.0)? }
        }
        "affine" => {
            let a: f64 = cfg.parse_num("A", 1.0)?;
            let matrix = (0..n)
                .map(|i| {
                    let mut row = vec![0.0; n];
                    row[i] = a;
                    row
                })
                .collect();
            MapSpec::Affine { matrix }
        }
        "sawtooth" => {
            if n != 1 {
                return Err(Error::Config("sawtooth is a 1-D family".into()));
            }
            MapSpec::sawtooth_default(cfg.parse_num("K", 3usize)?)
        }
        "normpullback" => {
            let gauge = match cfg.get("gauge").unwrap_or("l1") {
                "l1" => PolyhedralSeminorm::l1(n),
                "linf" => PolyhedralSeminorm::linf(n),
                other => return Err(Error::Config(format!("unknown gauge `{other}`"))),
            };
            MapSpec::NormPullback { gauge }
        }
        "distancecoords" => {
            let sites = match cfg.get("sites") {
                Some(raw) => parse_points(raw)?,
                None => match n {
                    1 => vec![vec![0.25], vec![0.8]],
                    2 => vec![vec![0.3, 0.3], vec![0.8, 0.6], vec![0.1, 0.8]],
                    _ => vec![vec![0.3, 0.3, 0.2], vec![0.8, 0.6, 0.7]],
                },
            };
            if sites.iter().any(|s| s.len() != n) {
                return Err(Error::Config("site dimension mismatch".into()));
            }
            MapSpec::DistanceCoords { sites }
        }
        "brokencurve" => {
            if n != 1 {
                return Err(Error::Config("brokencurve is a 1-D family".into()));
            }
            let vertices = match cfg.get("vertices") {
                Some(raw) => parse_points(raw)?,
                None => vec![
                    vec![0.0, 0.0],
                    vec![0.4, 0.5],
                    vec![0.1, 0.9],
                    vec![0.8, 1.0],
                ],
            };
            MapSpec::BrokenCurve { vertices, t_lo: 0.0, t_hi: 1.0 }
        }
        other => return Err(Error::Config(format!("unknown map family `{other}`"))),
    };
    let grid = match spec {
        MapSpec::Corner { .. } => Grid::new(vec![-1.0], 2.0)?,
        _ => Grid::unit(n),
    };
    Ok((spec, grid))
}

fn build_sampled(cfg: &Config, n_up: u32) -> Result<SampledMap> {
    let (spec, grid) = build_map(cfg)?;
    let resolution = cfg.parse_num("resolution", default_resolution(grid.n()))?;
    let margin = cfg.parse_num("margin", margin_for(n_up))?;
    sample_map(&spec, &grid, resolution, margin)
}

fn analysis_params(cfg: &Config, n: usize, delta_for_alpha: f64) -> Result<AnalysisParams> {
    let mut p = AnalysisParams::auto_for_delta(n, delta_for_alpha);
    if let Some(raw) = cfg.get("alpha") {
        if raw != "auto" {
            p.alpha = raw
                .parse()
                .map_err(|_| Error::Config(format!("bad --alpha `{raw}`")))?;
        }
    }
    p.ancestor_levels = cfg.parse_num("N", 2u32)?;
    p.directions = cfg.parse_num("directions", p.directions)?;
    p.chord_points = cfg.parse_num("chord", p.chord_points)?;
    p.pair_count = cfg.parse_num("pairs", p.pair_count)?;
    p.seed = cfg.seed()?;
    p.validate()?;
    Ok(p)
}

fn quadrature(cfg: &Config) -> Result<QuadratureSpec> {
    let m = cfg.parse_num("m", 32usize)?;
    let lines = cfg.parse_num("lines", 128usize)?;
    QuadratureSpec::new(m, lines, cfg.seed()?)
}

#[derive(Clone, Copy, PartialEq)]
enum Format {
    Record,
    Csv,
    Both,
}

fn format_flag(cfg: &Config) -> Result<Format> {
    match cfg.get("format").unwrap_or("both") {
        "record" => Ok(Format::Record),
        "csv" => Ok(Format::Csv),
        "both" => Ok(Format::Both),
        other => Err(Error::Config(format!("unknown format `{other}`"))),
    }
}

fn out_dir(cfg: &Config) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.get("out").unwrap_or("out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn emit<T: serde::Serialize>(
    dir: &Path,
    stem: &str,
    format: Format,
    record: &T,
    csv: &str,
) -> Result<()> {
    if format != Format::Csv {
        report::write_json(&dir.join(format!("{stem}.json")), record)?;
    }
    if format != Format::Record {
        report::write_text(&dir.join(format!("{stem}.csv")), csv)?;
    }
    report::write_sidecar(&dir.join(format!("{stem}.meta.txt")))?;
    Ok(())
}

fn workers(cfg: &Config) -> Result<Option<usize>> {
    Ok(match cfg.get("workers") {
        None => None,
        Some(raw) => Some(
            raw.parse()
                .map_err(|_| Error::Config(format!("bad --workers `{raw}`")))?,
        ),
    })
}

fn run(args: &[String]) -> Result<()> {
    let (command, cfg) = Config::parse(args)?;
    match command.as_str() {
        "corpus-list" => corpus_list(),
        "analyze-md" => exec::with_workers(workers(&cfg)?, || analyze_md(&cfg)),
        "analyze-beta" => exec::with_workers(workers(&cfg)?, || analyze_beta(&cfg)),
        "scan-point" => exec::with_workers(workers(&cfg)?, || scan_point(&cfg)),
        "beta-md" => exec::with_workers(workers(&cfg)?, || beta_md(&cfg)),
        other => Err(Error::Config(format!("unknown command `{other}`\n{}", usage()))),
    }
}

fn corpus_list() -> Result<()> {
    println!("affine          --A <scale>                 x -> A x into sup-norm R^n  (L = |A|)");
    println!("normpullback    --gauge {{l1,linf}}           identity into a polyhedral norm");
    println!("corner          --c <location>              t -> |t - c| into R  (n = 1)");
    println!("sawtooth        --K <levels>                sum of K unit-slope triangle waves (n = 1)");
    println!("distancecoords  --sites x,y;x,y;...         x -> (|x - p|_2)_p into sup-norm");
    println!("brokencurve     --vertices x,y;x,y;...      piecewise-linear curve into sup-norm (n = 1)");
    Ok(())
}

fn parse_deltas(cfg: &Config) -> Result<Vec<f64>> {
    let raw = cfg.get("delta").unwrap_or("0.25");
    raw.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad --delta `{t}`")))
        })
        .collect()
}

fn map_dim(cfg: &Config) -> Result<usize> {
    let (spec, _) = build_map(cfg)?;
    Ok(spec.domain_dim())
}

fn map_name(cfg: &Config) -> String {
    cfg.get("map").unwrap_or("corner").to_string()
}

fn analyze_md(cfg: &Config) -> Result<()> {
    let deltas = parse_deltas(cfg)?;
    let delta_min = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let depth: u32 = cfg.parse_num("depth", 6)?;
    let p = analysis_params(cfg, map_dim(cfg)?, delta_min)?;
    let map = build_sampled(cfg, p.ancestor_levels)?;
    let dir = out_dir(cfg)?;
    let format = format_flag(cfg)?;
    let profile = md_profile(&map, None, depth, &p)?;
    let mut summaries = Vec::new();
    for &delta in &deltas {
        let rep = packing_from_profile(&profile, &map, None, delta, depth, &p);
        let stem = format!(
            "packing-{}-d{}",
            map_name(cfg),
            delta.to_string().replace('.', "p")
        );
        emit(&dir, &stem, format, &rep, &report::packing_csv(&rep))?;
        summaries.push(format!("delta={delta}:ratio={:.6}", rep.ratio));
    }
    println!(
        "analyze-md map={} depth={} l_hat={:.6} {}",
        map_name(cfg),
        depth,
        map.l_hat(),
        summaries.join(" ")
    );
    Ok(())
}

fn analyze_beta(cfg: &Config) -> Result<()> {
    let depth: u32 = cfg.parse_num("depth", 6)?;
    let n_up: u32 = cfg.parse_num("N", 2)?;
    let quad = quadrature(cfg)?;
    let mut map = build_sampled(cfg, n_up)?;
    if cfg.parse_num("lift", 0u8)? == 1 {
        map = lift_map(&map);
    }
    let rep = carleson_beta_sum(&map, depth, n_up, &quad)?;
    let dir = out_dir(cfg)?;
    emit(
        &dir,
        &format!("beta-sum-{}", map_name(cfg)),
        format_flag(cfg)?,
        &rep,
        &report::beta_sum_csv(&rep),
    )?;
    println!(
        "analyze-beta map={} depth={} N={} total={:.3e} ratio_to_l_hat={:.3e} clamped={}",
        map_name(cfg),
        depth,
        n_up,
        rep.total,
        rep.ratio_to_l_hat,
        rep.clamped_count
    );
    Ok(())
}

fn scan_point(cfg: &Config) -> Result<()> {
    let p = analysis_params(cfg, map_dim(cfg)?, 0.25)?;
    let map = build_sampled(cfg, p.ancestor_levels)?;
    let max_level: u32 = cfg.parse_num("max-level", 8)?;
    let z: Vec<f64> = cfg
        .get("z")
        .unwrap_or("0.3")
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("bad --z `{t}`")))
        })
        .collect::<Result<_>>()?;
    if z.len() != map.n() {
        return Err(Error::Config("--z dimension mismatch".into()));
    }
    let rows = pointwise_decay_scan(&map, &z, max_level, &p)?;
    let dir = out_dir(cfg)?;
    let record = report::ScanReport {
        schema_version: 1,
        point: z.clone(),
        max_level,
        rows: rows.clone(),
        params: p,
    };
    emit(
        &dir,
        &format!("scan-{}", map_name(cfg)),
        format_flag(cfg)?,
        &record,
        &report::scan_csv(&rows),
    )?;
    let last = rows.last().map_or(0.0, |r| r.md);
    println!(
        "scan-point map={} z={:?} levels={} md_finest={:.6}",
        map_name(cfg),
        z,
        rows.len(),
        last
    );
    Ok(())
}

fn beta_md(cfg: &Config) -> Result<()> {
    let depth: u32 = cfg.parse_num("depth", 6)?;
    let p = analysis_params(cfg, map_dim(cfg)?, 0.25)?;
    let quad = quadrature(cfg)?;
    let map = build_sampled(cfg, p.ancestor_levels)?;
    let rows = beta_vs_md_table(&map, depth, &p, &quad)?;
    let dir = out_dir(cfg)?;
    let record = report::BetaMdReport {
        schema_version: 1,
        depth,
        quadrature_m: quad.m,
        quadrature_lines: quad.mc_lines,
        rows: rows.clone(),
        params: p.clone(),
    };
    emit(
        &dir,
        &format!("beta-md-{}", map_name(cfg)),
        format_flag(cfg)?,
        &record,
        &report::beta_md_csv(&rows),
    )?;
    let low_beta_md_max = rows
        .iter()
        .filter(|r| r.beta_lifted < p.beta_eps)
        .fold(0.0_f64, |m, r| m.max(r.md));
    println!(
        "beta-md map={} depth={} rows={} max_md_below_beta_eps={:.6}",
        map_name(cfg),
        depth,
        rows.len(),
        low_beta_md_max
    );
    Ok(())
}
