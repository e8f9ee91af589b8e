//! Parameter sweeps driven by a JSON run configuration, emitting CSV tables and SVG maps.
//!
//! Every command takes the same [`RunConfig`] document; each reads the sections it needs
//! and rejects the run if one is missing or out of range. Numbers are written with 17
//! significant digits so that tables round-trip to the exact doubles.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::decoherence::{
    factor_product, r_bound_homogeneous, r_continuum_with_tol, r_sum, FactorMode, SpectralDensity,
    R_CONTINUUM_REL_TOL,
};
use crate::density::{
    apply_ensemble_decoherence, peak_heights, MIN_POINTS_PER_WIDTH, rho_gaussian, rho_plane_waves, DensityGrid, GaussianPair, GridSpec,
    PlaneWavePair,
};
use crate::dissipation::{deformed_time, limit_width, width_damped, width_free, PacketParams};
use crate::error::Error;
use crate::model::{CouplingForm, TwoLevelParticle};
use crate::verify::{self, VerifyOptions};

/// Seed used by `verify` when neither the config nor the command line sets one.
pub const DEFAULT_SEED: u64 = 20_011;

const DEFAULT_BAND_SAMPLES: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] Error),
    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed => 1,
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Output { .. } => 4,
        }
    }

    fn config(field: &str, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{field}: {err}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ensemble: Option<EnsembleConfig>,
    pub grid: Option<GridConfig>,
    pub times: Option<TimesConfig>,
    pub initial: Option<InitialConfig>,
    pub mode: Option<ModeConfig>,
    /// Localization rate for the `gamma_effective` mode.
    pub gamma: Option<f64>,
    /// Phase coefficient `s` in `exp(i(x² − x′²)s)` for Gaussian-pair runs.
    pub s_phase: Option<f64>,
    /// `(x, x′)` pairs sampled by `factor`.
    pub positions: Option<Vec<[f64; 2]>>,
    pub packet: Option<PacketConfig>,
    pub band_condition: Option<BandCondition>,
    /// Relative tolerance of the R(t) quadrature.
    pub tolerance: Option<f64>,
    pub output: Option<OutputConfig>,
    pub seed: Option<u64>,
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleConfig {
    Particles(Vec<ParticleConfig>),
    Spectrum(SpectrumConfig),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ParticleConfig {
    pub omega: f64,
    pub g: f64,
    #[serde(default)]
    pub ell: f64,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    Discrete {
        pairs: Vec<[f64; 2]>,
    },
    HomogeneousBand {
        omega1: f64,
        omega2: f64,
        n: f64,
        g: f64,
        /// Number of sampled particles when the band feeds `factor` or `rho`.
        samples: Option<usize>,
    },
    OhmicLike {
        gamma: f64,
        g: f64,
    },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum TimesConfig {
    List(Vec<f64>),
    Range(TimeRange),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeRange {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    GaussianPair { d: f64, a: f64 },
    PlaneWaves { k1: f64, k2: f64, m: f64 },
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Exact,
    Weak,
    GammaEffective,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub a0: f64,
    pub mass: f64,
    #[serde(default)]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BandCondition {
    pub omega3: f64,
    pub omega4: f64,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<String>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Replaces every check tolerance (0 forces the failure path).
    pub tolerance_override: Option<f64>,
}

/// Parses a config document after applying `key.path=value` overrides.
pub fn parse_config(text: &str, overrides: &[String]) -> CliResult<RunConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    if overrides.is_empty() {
        // Straight from the text so the diagnostic carries a line and column.
        return serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()));
    }
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    serde_json::from_value(doc).map_err(|e| CliError::Config(format!("{e} (after --set overrides)")))
}

pub fn load_config(path: Option<&Path>, overrides: &[String]) -> CliResult<RunConfig> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::config(&p.display().to_string(), e))?,
        None => "{}".to_owned(),
    };
    parse_config(&text, overrides)
}

/// Sets `doc[a][b]…` from `a.b…=value`. The value is read as JSON, falling back to a
/// plain string; intermediate objects are created as needed.
pub fn apply_override(doc: &mut Value, assignment: &str) -> CliResult<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{assignment}` is not of the form key.path=value")))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Config(format!("override `{assignment}` has an empty key")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    let mut cursor = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (depth, key) in keys.iter().enumerate() {
        if !cursor.is_object() {
            *cursor = Value::Object(Default::default());
        }
        let map = cursor.as_object_mut().expect("object");
        if depth + 1 == keys.len() {
            map.insert((*key).to_owned(), value);
            return Ok(());
        }
        cursor = map.entry((*key).to_owned()).or_insert_with(|| Value::Object(Default::default()));
    }
    Ok(())
}

/// Header plus rows of optional numbers (`None` prints as an empty field).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.header.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.header.iter().position(|h| *h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.map(format_number).unwrap_or_default()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.16e}")
}

fn times(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    let ts = match cfg.times.as_ref().ok_or_else(|| CliError::Config("times: missing".into()))? {
        TimesConfig::List(v) => v.clone(),
        TimesConfig::Range(r) => {
            if r.count == 0 {
                return Err(CliError::config("times.count", "must be >= 1"));
            }
            if r.count == 1 {
                vec![r.start]
            } else {
                let step = (r.stop - r.start) / (r.count - 1) as f64;
                (0..r.count)
                    .map(|k| if k + 1 == r.count { r.stop } else { r.start + k as f64 * step })
                    .collect()
            }
        }
    };
    if ts.is_empty() {
        return Err(CliError::config("times", "list is empty"));
    }
    if let Some(bad) = ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::config("times", format!("every time must be finite and >= 0, got {bad}")));
    }
    Ok(ts)
}

fn spectrum(cfg: &RunConfig) -> CliResult<Option<(SpectralDensity, usize)>> {
    let Some(EnsembleConfig::Spectrum(s)) = &cfg.ensemble else {
        return Ok(None);
    };
    let (spec, samples) = match *s {
        SpectrumConfig::Discrete { ref pairs } => {
            (SpectralDensity::Discrete(pairs.iter().map(|p| (p[0], p[1])).collect()), pairs.len())
        }
        SpectrumConfig::HomogeneousBand { omega1, omega2, n, g, samples } => (
            SpectralDensity::HomogeneousBand { omega1, omega2, n, g },
            samples.unwrap_or(DEFAULT_BAND_SAMPLES),
        ),
        SpectrumConfig::OhmicLike { gamma, g } => (SpectralDensity::OhmicLike { gamma, g }, 0),
    };
    spec.validate().map_err(|e| CliError::config("ensemble.spectrum", e))?;
    Ok(Some((spec, samples)))
}

fn particles(cfg: &RunConfig) -> CliResult<Option<Vec<TwoLevelParticle>>> {
    match &cfg.ensemble {
        None => Ok(None),
        Some(EnsembleConfig::Particles(list)) => {
            if list.is_empty() {
                return Err(CliError::config("ensemble.particles", "list is empty"));
            }
            list.iter()
                .enumerate()
                .map(|(k, p)| {
                    TwoLevelParticle::with_offset(p.omega, p.g, p.ell)
                        .map_err(|e| CliError::config(&format!("ensemble.particles[{k}]"), e))
                })
                .collect::<CliResult<Vec<_>>>()
                .map(Some)
        }
        Some(EnsembleConfig::Spectrum(_)) => {
            let (spec, samples) = spectrum(cfg)?.expect("spectrum ensemble");
            match spec {
                SpectralDensity::OhmicLike { .. } => Ok(None),
                _ => spec
                    .particles(samples)
                    .map(Some)
                    .map_err(|e| CliError::config("ensemble.spectrum", e)),
            }
        }
    }
}

/// Localization rate from the config: the `gamma` field, else an Ohmic-like spectrum.
fn effective_gamma(cfg: &RunConfig) -> CliResult<f64> {
    let gamma = match (cfg.gamma, spectrum(cfg)?) {
        (Some(g), _) => g,
        (None, Some((SpectralDensity::OhmicLike { gamma, .. }, _))) => gamma,
        _ => return Err(CliError::Config("gamma: missing (set `gamma` or use an ohmic_like spectrum)".into())),
    };
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(CliError::config("gamma", format!("must be >= 0, got {gamma}")));
    }
    Ok(gamma)
}

fn factor_mode(mode: ModeConfig) -> Option<FactorMode> {
    match mode {
        ModeConfig::Exact => Some(FactorMode::Exact),
        ModeConfig::Weak => Some(FactorMode::Weak),
        ModeConfig::GammaEffective => None,
    }
}

/// Columns `t, x, x_prime, re_F, im_F, abs_F, abs_F_weak, r_sum`.
pub fn cmd_factor(cfg: &RunConfig) -> CliResult<CsvTable> {
    let ts = times(cfg)?;
    let positions = cfg
        .positions
        .clone()
        .ok_or_else(|| CliError::Config("positions: missing".into()))?;
    if positions.is_empty() {
        return Err(CliError::config("positions", "list is empty"));
    }
    if positions.iter().flatten().any(|v| !v.is_finite()) {
        return Err(CliError::config("positions", "coordinates must be finite"));
    }
    let mode = cfg.mode.unwrap_or(ModeConfig::Exact);
    let ensemble = particles(cfg)?;
    let gamma = match (mode, &ensemble) {
        (ModeConfig::GammaEffective, _) => Some(effective_gamma(cfg)?),
        (_, None) => return Err(CliError::Config("ensemble: a particle list or band spectrum is required".into())),
        _ => None,
    };
    let weak_ok = ensemble.as_ref().is_some_and(|ps| ps.iter().all(|p| p.ell == 0.0));
    if mode == ModeConfig::Weak && !weak_ok {
        return Err(CliError::config("mode", "weak mode needs particles with ell = 0"));
    }
    let coupling = CouplingForm::Linear;

    let mut table = CsvTable::new(vec!["t", "x", "x_prime", "re_F", "im_F", "abs_F", "abs_F_weak", "r_sum"]);
    for &t in &ts {
        let r = match (&ensemble, gamma) {
            (_, Some(g)) => g * t,
            (Some(ps), None) => r_sum(ps, t),
            (None, None) => unreachable!(),
        };
        for &[x, xp] in &positions {
            let value = match (factor_mode(mode), &ensemble) {
                (Some(m), Some(ps)) => factor_product(ps, &coupling, x, xp, t, m)?.factor.value,
                _ => Complex64::new((-r * (x - xp).powi(2)).exp(), 0.0),
            };
            let weak = match (&ensemble, gamma) {
                (_, Some(_)) => Some((-r * (x - xp).powi(2)).exp()),
                (Some(ps), None) if weak_ok => {
                    Some(factor_product(ps, &coupling, x, xp, t, FactorMode::Weak)?.factor.magnitude)
                }
                _ => None,
            };
            table.push(vec![
                Some(t),
                Some(x),
                Some(xp),
                Some(value.re),
                Some(value.im),
                Some(value.norm()),
                weak,
                Some(r),
            ]);
        }
    }
    Ok(table)
}

/// One time slice of a `rho` run.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoSlice {
    pub t: f64,
    pub table: CsvTable,
    pub svg: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RhoOutput {
    pub slices: Vec<RhoSlice>,
    /// Columns `t, p11, p10, p01, p00, ratio` for Gaussian-pair runs.
    pub peaks: Option<CsvTable>,
}

pub fn cmd_rho(cfg: &RunConfig) -> CliResult<RhoOutput> {
    let ts = times(cfg)?;
    let initial = cfg.initial.ok_or_else(|| CliError::Config("initial: missing".into()))?;
    let mode = cfg.mode.unwrap_or(ModeConfig::GammaEffective);
    let grid = match (cfg.grid, initial) {
        (Some(g), _) => GridSpec::new(g.x_min, g.x_max, g.n).map_err(|e| CliError::config("grid", e))?,
        (None, InitialConfig::GaussianPair { d, a }) => {
            let pair = GaussianPair::new(d, a).map_err(|e| CliError::config("initial.gaussian_pair", e))?;
            let (lo, hi) = pair.support();
            // Twice the minimum resolution the peak diagnostics accept.
            let n = ((2.0 * MIN_POINTS_PER_WIDTH * (hi - lo) / d).ceil() as usize + 1).max(128);
            GridSpec::new(lo, hi, n).map_err(|e| CliError::config("grid", e))?
        }
        (None, InitialConfig::PlaneWaves { .. }) => return Err(CliError::Config("grid: missing".into())),
    };
    let want_svg = cfg.output.as_ref().is_some_and(|o| o.svg);
    let (gamma, ensemble) = match mode {
        ModeConfig::GammaEffective => (effective_gamma(cfg)?, None),
        _ => {
            let ps = particles(cfg)?
                .ok_or_else(|| CliError::Config("ensemble: a particle list or band spectrum is required".into()))?;
            (0.0, Some(ps))
        }
    };

    let mut slices = Vec::with_capacity(ts.len());
    let mut peaks = None;
    for &t in &ts {
        let rho = match initial {
            InitialConfig::GaussianPair { d, a } => {
                let pair = GaussianPair::new(d, a).map_err(|e| CliError::config("initial.gaussian_pair", e))?;
                let rho = match (&ensemble, factor_mode(mode)) {
                    (Some(ps), Some(m)) => {
                        let base = DensityGrid::pure(grid, |x| Complex64::new(pair.amplitude(x), 0.0))?;
                        apply_ensemble_decoherence(&base, ps, &CouplingForm::Linear, t, m)?
                    }
                    _ => rho_gaussian(&pair, gamma, cfg.s_phase.unwrap_or(0.0), t, grid).map_err(|e| match e {
                        Error::GridTooNarrow { .. } => CliError::config("grid", e),
                        other => CliError::Numeric(other),
                    })?,
                };
                let h = peak_heights(&rho, &pair)?;
                peaks
                    .get_or_insert_with(|| CsvTable::new(vec!["t", "p11", "p10", "p01", "p00", "ratio"]))
                    .push(vec![Some(t), Some(h.p11), Some(h.p10), Some(h.p01), Some(h.p00), Some(h.coherence_ratio())]);
                rho
            }
            InitialConfig::PlaneWaves { k1, k2, m } => {
                let pair = PlaneWavePair::new(k1, k2, m).map_err(|e| CliError::config("initial.plane_waves", e))?;
                match (&ensemble, factor_mode(mode)) {
                    (Some(ps), Some(fm)) => {
                        let base = DensityGrid::pure(grid, |x| pair.amplitude(x, t))?;
                        apply_ensemble_decoherence(&base, ps, &CouplingForm::Linear, t, fm)?
                    }
                    _ => rho_plane_waves(&pair, gamma, t, grid)?,
                }
            }
        };
        let table = rho_table(&rho);
        let svg = want_svg.then(|| render_svg(&rho));
        slices.push(RhoSlice { t, table, svg });
    }
    Ok(RhoOutput { slices, peaks })
}

fn rho_table(rho: &DensityGrid) -> CsvTable {
    let xs = rho.grid.points();
    let mut table = CsvTable::new(vec!["x", "x_prime", "abs_rho", "re_rho", "im_rho"]);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &xp) in xs.iter().enumerate() {
            let v = rho.get(i, j);
            table.push(vec![Some(x), Some(xp), Some(v.norm()), Some(v.re), Some(v.im)]);
        }
    }
    table
}

/// Grayscale heat map of `|ρ|`, black at 0 and white at `max |ρ|`; `x` runs to the
/// right and `x′` upwards.
pub fn render_svg(rho: &DensityGrid) -> String {
    let n = rho.n();
    let max = rho.max_abs();
    let plot = 512.0;
    let cell = plot / n as f64;
    let (left, top) = (60.0, 30.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = plot + left + 20.0,
        h = plot + top + 50.0
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">|rho(x, x')| at t = {}</text>"#,
        left + plot / 2.0,
        format_number(rho.t)
    );
    let _ = writeln!(s, r#"<g shape-rendering="crispEdges">"#);
    for i in 0..n {
        for j in 0..n {
            let level = if max > 0.0 { rho.get(i, j).norm() / max } else { 0.0 };
            let v = (255.0 * level).round() as u8;
            let _ = writeln!(
                s,
                r#"<rect x="{:.4}" y="{:.4}" width="{:.4}" height="{:.4}" fill="rgb({v},{v},{v})"/>"#,
                left + i as f64 * cell,
                top + (n - 1 - j) as f64 * cell,
                cell,
                cell
            );
        }
    }
    let _ = writeln!(s, "</g>");
    let (lo, hi) = (rho.grid.x_min, rho.grid.x_max);
    let axis_y = top + plot + 16.0;
    let _ = writeln!(s, r#"<text x="{left}" y="{axis_y}" font-family="sans-serif" font-size="12">{lo}</text>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{axis_y}" font-family="sans-serif" font-size="12" text-anchor="end">{hi}</text>"#,
        left + plot
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">x</text>"#,
        left + plot / 2.0,
        axis_y + 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{lo}</text>"#,
        left - 4.0,
        top + plot
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="end">{hi}</text>"#,
        left - 4.0,
        top + 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" font-family="sans-serif" font-size="14" text-anchor="middle">x'</text>"#,
        top + plot / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Columns `t, r_value, r_error_estimate, r_bound, gamma_fit`.
pub fn cmd_spectrum(cfg: &RunConfig) -> CliResult<CsvTable> {
    let ts = times(cfg)?;
    let spec = match (spectrum(cfg)?, &cfg.ensemble) {
        (Some((s, _)), _) => s,
        (None, Some(EnsembleConfig::Particles(list))) => {
            let s = SpectralDensity::Discrete(list.iter().map(|p| (p.omega, p.g)).collect());
            s.validate().map_err(|e| CliError::config("ensemble.particles", e))?;
            s
        }
        (None, _) => return Err(CliError::Config("ensemble: missing".into())),
    };
    let tol = cfg.tolerance.unwrap_or(R_CONTINUUM_REL_TOL);
    if !(tol > 0.0) {
        return Err(CliError::config("tolerance", "must be > 0"));
    }
    if let Some(b) = cfg.band_condition {
        // Validate once up front so a bad band is a config error, not a numeric one.
        r_bound_homogeneous(&spec, 0.0, b.omega3, b.omega4).map_err(|e| CliError::config("band_condition", e))?;
    }
    let mut rows = Vec::with_capacity(ts.len());
    for &t in &ts {
        let r = r_continuum_with_tol(&spec, t, tol)?;
        let bound = match cfg.band_condition {
            Some(b) => Some(r_bound_homogeneous(&spec, t, b.omega3, b.omega4)?),
            None => None,
        };
        rows.push((t, r.value, r.error_estimate, bound));
    }
    let fit = least_squares_slope(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>());
    let mut table = CsvTable::new(vec!["t", "r_value", "r_error_estimate", "r_bound", "gamma_fit"]);
    for (t, v, e, b) in rows {
        table.push(vec![Some(t), Some(v), Some(e), b, Some(fit)]);
    }
    Ok(table)
}

/// Ordinary least-squares slope; through the origin when there is a single distinct time.
pub fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mt = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mr = points.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = points.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if stt == 0.0 {
        let tt: f64 = points.iter().map(|p| p.0 * p.0).sum();
        return if tt == 0.0 { 0.0 } else { points.iter().map(|p| p.0 * p.1).sum::<f64>() / tt };
    }
    points.iter().map(|p| (p.0 - mt) * (p.1 - mr)).sum::<f64>() / stt
}

/// Columns `t, t_eta, w_free, w_damped, w_limit`.
pub fn cmd_dissipation(cfg: &RunConfig) -> CliResult<CsvTable> {
    let ts = times(cfg)?;
    let pk = cfg.packet.ok_or_else(|| CliError::Config("packet: missing".into()))?;
    let p = PacketParams::new(pk.a0, pk.mass, pk.eta).map_err(|e| CliError::config("packet", e))?;
    let limit = if p.eta > 0.0 { Some(limit_width(&p)?) } else { None };
    let mut table = CsvTable::new(vec!["t", "t_eta", "w_free", "w_damped", "w_limit"]);
    for &t in &ts {
        table.push(vec![
            Some(t),
            Some(deformed_time(&p, t)?),
            Some(width_free(&p, t)?),
            Some(width_damped(&p, t)?),
            limit,
        ]);
    }
    Ok(table)
}

/// Runs the verification suite; the report has one line per check.
pub fn cmd_verify(cfg: &RunConfig, seed_override: Option<u64>) -> CliResult<verify::VerifyReport> {
    let seed = seed_override.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let tolerance_override = cfg.verify.and_then(|v| v.tolerance_override);
    Ok(verify::run(&VerifyOptions { seed, tolerance_override })?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Factor,
    Rho,
    Spectrum,
    Dissipation,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Factor => "factor",
            Command::Rho => "rho",
            Command::Spectrum => "spectrum",
            Command::Dissipation => "dissipation",
            Command::Verify => "verify",
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Output { path: path.clone(), source })?;
    Ok(path)
}

/// Runs `command`, writes its files into `out` (or the config's `output.dir`, else the
/// working directory) and returns the text to print on stdout.
pub fn run(command: Command, cfg: &RunConfig, out: Option<&Path>, seed: Option<u64>) -> CliResult<String> {
    let dir: PathBuf = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.as_ref().and_then(|o| o.dir.as_ref()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let ensure_dir = || fs::create_dir_all(&dir).map_err(|source| CliError::Output { path: dir.clone(), source });
    let mut written = Vec::new();
    match command {
        Command::Factor | Command::Spectrum | Command::Dissipation => {
            let table = match command {
                Command::Factor => cmd_factor(cfg)?,
                Command::Spectrum => cmd_spectrum(cfg)?,
                _ => cmd_dissipation(cfg)?,
            };
            ensure_dir()?;
            written.push(write_file(&dir, &format!("{}.csv", command.name()), &table.render())?);
        }
        Command::Rho => {
            let result = cmd_rho(cfg)?;
            ensure_dir()?;
            for (k, slice) in result.slices.iter().enumerate() {
                written.push(write_file(&dir, &format!("rho_t{k}.csv"), &slice.table.render())?);
                if let Some(svg) = &slice.svg {
                    written.push(write_file(&dir, &format!("rho_t{k}.svg"), svg)?);
                }
            }
            if let Some(peaks) = &result.peaks {
                written.push(write_file(&dir, "rho_peaks.csv", &peaks.render())?);
            }
        }
        Command::Verify => {
            let report = cmd_verify(cfg, seed)?;
            let text = report.to_string();
            if out.is_some() {
                ensure_dir()?;
                write_file(&dir, "verify_report.txt", &text)?;
            }
            if !report.all_passed() {
                print!("{text}");
                return Err(CliError::VerifyFailed);
            }
            return Ok(text);
        }
    }
    Ok(written.iter().map(|p| format!("wrote {}\n", p.display())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_create_nested_keys() {
        let mut v: Value = serde_json::json!({"grid": {"n": 4}});
        apply_override(&mut v, "grid.n=64").unwrap();
        apply_override(&mut v, "packet.a0=0.5").unwrap();
        apply_override(&mut v, "mode=weak").unwrap();
        assert_eq!(v["grid"]["n"], 64);
        assert_eq!(v["packet"]["a0"], 0.5);
        assert_eq!(v["mode"], "weak");
        assert!(apply_override(&mut v, "novalue").is_err());
        assert!(apply_override(&mut v, "a..b=1").is_err());
    }

    #[test]
    fn strict_parsing() {
        let err = parse_config(r#"{"grid": {"x_min": 0, "x_max": 1, "n": 3, "extra": 1}}"#, &[]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = parse_config("{\n  \"bogus\": 1\n}", &[]).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let cfg = parse_config(r#"{"times": {"start": 0, "stop": 1, "count": 3}}"#, &[]).unwrap();
        assert_eq!(times(&cfg).unwrap(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn number_format_round_trips() {
        for v in [1.0, 0.1, std::f64::consts::PI, 1e-300, -2.5e17] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn slope_fit() {
        assert!((least_squares_slope(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]) - 2.0).abs() < 1e-15);
        assert_eq!(least_squares_slope(&[(2.0, 3.0)]), 1.5);
    }
}
