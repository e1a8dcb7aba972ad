//! Run configuration and orchestration behind the `hyper2d` binary.
//!
//! Every numeric CSV field is written with 12 significant digits; the JSON
//! manifest additionally carries exact hexadecimal floats for the inputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adiabatic::{build_basis_with, BasisConfig, SymmetrySpec};
use crate::channels::{
    allowed_thresholds, classify_tails, compute_surface, ChannelSurface, SurfaceOptions, TailClass, TailOptions,
};
use crate::geometry::MassGeometry;
use crate::harmonics::{enumerate_allowed, SymmetryClass};
use crate::threshold::{m2b_letter, threshold_table, wkb_scaling_power, ThresholdReport};
use crate::twobody::{bound_states, BoundState, PairPotential};
use crate::{Error, Result};

pub const UNITS: &str = "hbar = m = r0 = 1; lengths in r0, energies in hbar^2/(m r0^2)";

/// Environment variable overriding [`RunConfig::workers`].
pub const WORKERS_ENV: &str = "HYPER2D_WORKERS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Geometric,
}

/// Hyperradial grid `start:stop:count[:geom]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub spacing: GridSpacing,
}

impl RGrid {
    pub fn points(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|i| {
                let t = i as f64 / (n - 1) as f64;
                if i + 1 == n {
                    return self.stop;
                }
                match self.spacing {
                    GridSpacing::Linear => self.start + (self.stop - self.start) * t,
                    GridSpacing::Geometric => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

impl std::str::FromStr for RGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 && parts.len() != 4 {
            return Err(Error::config(
                "R_grid",
                format!("expected start:stop:count[:geom], got '{s}'"),
            ));
        }
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::config("R_grid", format!("'{x}': {e}")))
        };
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|e| Error::config("R_grid", format!("count '{}': {e}", parts[2])))?;
        let spacing = match parts.get(3).map(|x| x.trim()) {
            None | Some("lin") | Some("linear") => GridSpacing::Linear,
            Some("geom") | Some("geometric") => GridSpacing::Geometric,
            Some(other) => return Err(Error::config("R_grid", format!("unknown spacing '{other}'"))),
        };
        Ok(Self {
            start: num(parts[0])?,
            stop: num(parts[1])?,
            count,
            spacing,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSize {
    pub n_theta: usize,
    pub n_phi: usize,
    pub order: usize,
}

impl Default for BasisSize {
    fn default() -> Self {
        let c = BasisConfig::default();
        Self {
            n_theta: c.n_theta,
            n_phi: c.n_phi,
            order: c.order,
        }
    }
}

/// Parses a reflection index: `s`/`0` or `a`/`1`.
pub fn parse_reflection(s: &str) -> Result<u8> {
    match s.trim() {
        "s" | "0" => Ok(0),
        "a" | "1" => Ok(1),
        other => Err(Error::config("r", format!("expected s or a, got '{other}'"))),
    }
}

/// Everything a surface or threshold run depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub class: SymmetryClass,
    /// |M| values.
    pub m: Vec<i32>,
    /// Reflection indices (0 = s, 1 = a).
    pub r: Vec<u8>,
    pub masses: [f64; 3],
    pub depth: f64,
    pub range: f64,
    pub grid: RGrid,
    pub basis: BasisSize,
    pub channels: usize,
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            class: SymmetryClass::Bbb,
            m: vec![0],
            r: vec![0],
            masses: [1.0; 3],
            depth: -30.0,
            range: 1.0,
            grid: RGrid {
                start: 0.5,
                stop: 15.0,
                count: 200,
                spacing: GridSpacing::Linear,
            },
            basis: BasisSize::default(),
            channels: 10,
            output_dir: PathBuf::from("out"),
            workers: None,
        }
    }
}

impl RunConfig {
    /// Field-level checks, run before any computation.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.count < 2 {
            return Err(Error::config(
                "grid.count",
                format!("need at least 2 points, got {}", g.count),
            ));
        }
        if !(g.start > 0.0) || !g.start.is_finite() {
            return Err(Error::config(
                "grid.start",
                format!("must be positive, got {}", g.start),
            ));
        }
        if !(g.stop > g.start) || !g.stop.is_finite() {
            return Err(Error::config(
                "grid.stop",
                format!("must exceed start {}, got {}", g.start, g.stop),
            ));
        }
        if self.channels < 1 {
            return Err(Error::config("channels", "need at least one channel"));
        }
        if !(self.range > 0.0) || !self.range.is_finite() {
            return Err(Error::config("range", format!("must be positive, got {}", self.range)));
        }
        if !self.depth.is_finite() {
            return Err(Error::config("depth", "must be finite"));
        }
        let b = &self.basis;
        if b.order < 2 {
            return Err(Error::config(
                "basis.order",
                format!("need order >= 2, got {}", b.order),
            ));
        }
        if b.n_theta < b.order + 1 || b.n_phi < b.order + 1 {
            return Err(Error::config(
                "basis",
                format!("need more than {} splines per direction", b.order),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        MassGeometry::new(self.masses[0], self.masses[1], self.masses[2])
            .map_err(|e| Error::config("masses", e.to_string()))?;
        let [_, m2, m3] = self.masses;
        let equal = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
        let ok = match self.class.identical_count() {
            3 => self.masses.iter().all(|&x| equal(x, m2)),
            2 => equal(m2, m3),
            _ => true,
        };
        if !ok {
            return Err(Error::config(
                "masses",
                format!(
                    "identical particles of class {} need equal masses (particles 2 and 3 are the identical pair)",
                    self.class
                ),
            ));
        }
        if self.m.is_empty() {
            return Err(Error::config("m", "empty list"));
        }
        if self.r.is_empty() {
            return Err(Error::config("r", "empty list"));
        }
        for spec in self.specs_unchecked() {
            spec.map_err(|e| Error::config("m/r", e.to_string()))?;
        }
        Ok(())
    }

    fn specs_unchecked(&self) -> impl Iterator<Item = Result<SymmetrySpec>> + '_ {
        self.m
            .iter()
            .flat_map(move |&m| self.r.iter().map(move |&r| SymmetrySpec::new(self.class, m, r)))
    }

    pub fn specs(&self) -> Result<Vec<SymmetrySpec>> {
        self.specs_unchecked().collect()
    }

    pub fn geometry(&self) -> Result<MassGeometry> {
        MassGeometry::new(self.masses[0], self.masses[1], self.masses[2])
    }

    pub fn potential(&self) -> Result<PairPotential> {
        PairPotential::new(self.depth, self.range)
    }

    pub fn basis_config(&self) -> BasisConfig {
        BasisConfig::with_size(self.basis.n_theta, self.basis.n_phi, self.basis.order)
    }

    /// Worker count, with [`WORKERS_ENV`] taking precedence.
    pub fn resolved_workers(&self) -> Result<Option<usize>> {
        match std::env::var(WORKERS_ENV) {
            Ok(v) => {
                let n: usize = v
                    .trim()
                    .parse()
                    .map_err(|e| Error::config(WORKERS_ENV, format!("'{v}': {e}")))?;
                if n == 0 {
                    return Err(Error::config(WORKERS_ENV, "must be at least 1"));
                }
                Ok(Some(n))
            }
            Err(_) => Ok(self.workers),
        }
    }

    /// SHA-256 of the canonical JSON form, without the worker count and
    /// output directory (neither affects results).
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Fixed 12-significant-digit formatting.
pub fn fmt12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.11e}")
}

/// Exact hexadecimal form of a double, `0x1.<13 hex digits>p<exp>`.
pub fn hex_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0x0p+0" } else { "0x0p+0" }.into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { "-" } else { "" };
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        format!("{sign}0x0.{frac:013x}p-1022")
    } else {
        format!("{sign}0x1.{frac:013x}p{:+}", exp - 1023)
    }
}

/// Inverse of [`hex_float`].
pub fn parse_hex_float(s: &str) -> Option<f64> {
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let rest = rest.strip_prefix("0x")?;
    let (mant, exp) = rest.split_once('p')?;
    let exp: i32 = exp.parse().ok()?;
    let (lead, frac) = mant.split_once('.').unwrap_or((mant, "0"));
    let lead: u64 = lead.parse().ok()?;
    let frac = u64::from_str_radix(frac, 16).ok()?;
    let v = if lead == 0 && frac == 0 {
        0.0
    } else if lead == 0 {
        f64::from_bits(frac)
    } else {
        f64::from_bits((((exp + 1023) as u64) << 52) | frac)
    };
    Some(if neg { -v } else { v })
}

/// Wall time of one stage.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Written next to every set of output files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub units: String,
    pub version: String,
    pub command: String,
    pub status: String,
    pub config_hash: String,
    pub config: RunConfig,
    /// Exact values of the numeric inputs and derived thresholds.
    pub exact: Vec<(String, String)>,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let mut exact = vec![
            ("depth".into(), hex_float(config.depth)),
            ("range".into(), hex_float(config.range)),
        ];
        for (i, m) in config.masses.iter().enumerate() {
            exact.push((format!("m{}", i + 1), hex_float(*m)));
        }
        for (i, r) in config.grid.points().iter().enumerate() {
            exact.push((format!("R[{i}]"), hex_float(*r)));
        }
        Self {
            units: UNITS.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            status: "running".into(),
            config_hash: config.hash(),
            config: config.clone(),
            exact,
            stages: Vec::new(),
            outputs: Vec::new(),
        }
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.stages.push(StageTiming {
            stage: stage.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(format!("{}_manifest.json", self.command));
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Runs `f` on a pool of the configured size (the global pool otherwise).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

/// `enumerate` output: one row per λ with the space-separated |ω| list.
pub fn enumerate_csv(class: SymmetryClass, m: i32, lambda_max: i32) -> Result<String> {
    if lambda_max < m.abs() {
        return Err(Error::config(
            "lambda_max",
            format!("must be at least |M| = {}", m.abs()),
        ));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["lambda", "omega_list"])?;
    for (lambda, omegas) in enumerate_allowed(class, m, lambda_max) {
        let list: Vec<String> = omegas.iter().map(|o| o.to_string()).collect();
        w.write_record([lambda.to_string(), list.join(" ")])?;
    }
    finish(w)
}

/// `twobody` output: bound levels for each |m2b| in `m2b`.
pub fn twobody_csv(pp: &PairPotential, m2b: &[i32], pair_reduced_mass: f64) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m2b", "v", "energy"])?;
    for &m in m2b {
        for b in bound_states(pp, m, pair_reduced_mass)? {
            w.write_record([b.m2b.to_string(), b.v.to_string(), fmt12(b.energy)])?;
        }
    }
    finish(w)
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Tail columns: kind, then (λ, 0) for continua, (m_AD, threshold energy)
/// for atom-diatom channels, empty otherwise.
fn tail_fields(t: &TailClass) -> [String; 3] {
    match t {
        TailClass::Continuum { lambda } => ["continuum".into(), lambda.to_string(), "0".into()],
        TailClass::AtomDiatom { energy, m_ad, .. } => ["atom_diatom".into(), m_ad.to_string(), fmt12(*energy)],
        TailClass::Unresolved => ["unresolved".into(), String::new(), String::new()],
    }
}

/// Surface CSV: one row per (R, ν).
pub fn surface_csv(s: &ChannelSurface) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "R",
        "nu",
        "U",
        "W",
        "Qdiag",
        "tail_kind",
        "tail_param1",
        "tail_param2",
        "fit_residual",
    ])?;
    for (i, &r) in s.r.iter().enumerate() {
        for nu in 0..s.channels() {
            let [kind, p1, p2] = tail_fields(&s.tails[nu]);
            let res = s.fits[nu].map(|f| fmt12(f.residual)).unwrap_or_default();
            w.write_record([
                fmt12(r),
                nu.to_string(),
                fmt12(s.u[i][nu]),
                fmt12(s.w[i][nu]),
                fmt12(s.q[i][(nu, nu)]),
                kind,
                p1,
                p2,
                res,
            ])?;
        }
    }
    finish(w)
}

/// Coupling CSV: one row per (R, ν, ν') with P and Q.
pub fn couplings_csv(s: &ChannelSurface) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["R", "nu", "nu_prime", "P", "Q"])?;
    let n = s.channels();
    for (i, &r) in s.r.iter().enumerate() {
        for a in 0..n {
            for b in 0..n {
                w.write_record([
                    fmt12(r),
                    a.to_string(),
                    b.to_string(),
                    fmt12(s.p[i][(a, b)]),
                    fmt12(s.q[i][(a, b)]),
                ])?;
            }
        }
    }
    finish(w)
}

/// Threshold-law rows in the summary-table layout.
pub fn threshold_csv(reports: &[ThresholdReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "class",
        "M",
        "r",
        "parity",
        "K_AD",
        "lambda_min",
        "K3",
        "D3",
        "K3_dominant",
        "warnings",
    ])?;
    for rep in reports {
        let kad: Vec<String> = rep
            .atom_diatom
            .iter()
            .map(|a| {
                format!(
                    "{}({}):k^{}{}",
                    m2b_letter(a.m2b),
                    a.m_ad,
                    a.exponent,
                    if a.dominant { "*" } else { "" }
                )
            })
            .collect();
        w.write_record([
            rep.class.to_string(),
            rep.m.to_string(),
            if rep.r == 0 { "s" } else { "a" }.to_string(),
            if rep.m % 2 == 0 { "+" } else { "-" }.to_string(),
            kad.join(" "),
            rep.lambda_min.to_string(),
            format!("k^{}", rep.k3_exponent),
            format!("k^{}", rep.d3_exponent),
            rep.k3_dominant.to_string(),
            rep.warnings.join("; "),
        ])?;
    }
    finish(w)
}

/// One surface computed by [`run_surfaces`].
pub struct SectorResult {
    pub spec: SymmetrySpec,
    pub surface: ChannelSurface,
    pub thresholds: Vec<BoundState>,
}

/// Which files a surface run writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceOutput {
    Surfaces,
    SurfacesAndCouplings,
}

fn write_output(dir: &Path, name: &str, body: &str, manifest: &mut Manifest) -> Result<()> {
    fs::write(dir.join(name), body)?;
    manifest.outputs.push(name.into());
    Ok(())
}

/// Computes and classifies surfaces for every (M, r) of the config and
/// writes CSV files plus a manifest into the output directory. On a solver
/// failure the manifest is still written, marked failed, and the files of
/// completed sectors are kept.
pub fn run_surfaces(config: &RunConfig, output: SurfaceOutput) -> Result<Vec<SectorResult>> {
    config.validate()?;
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let command = match output {
        SurfaceOutput::Surfaces => "surfaces",
        SurfaceOutput::SurfacesAndCouplings => "couplings",
    };
    let mut manifest = Manifest::new(command, config);
    let workers = config.resolved_workers()?;
    let outcome = with_workers(workers, || surfaces_inner(config, output, &mut manifest))?;
    manifest.status = match &outcome {
        Ok(_) => "ok".into(),
        Err(e) => format!("failed: {e}"),
    };
    manifest.write(dir)?;
    outcome
}

fn surfaces_inner(config: &RunConfig, output: SurfaceOutput, manifest: &mut Manifest) -> Result<Vec<SectorResult>> {
    let g = config.geometry()?;
    let pp = config.potential()?;
    let grid = config.grid.points();
    let bcfg = config.basis_config();
    let mut out = Vec::new();
    for spec in config.specs()? {
        let label = format!("{}_{}", spec.class, spec.label());
        let basis = manifest.time(&format!("{label}: basis"), || build_basis_with(spec, &bcfg, &g))?;
        let basis = Arc::new(basis);
        let mut surface = manifest.time(&format!("{label}: solve"), || {
            compute_surface(
                &spec,
                &basis,
                &grid,
                &g,
                &pp,
                config.channels,
                &SurfaceOptions::default(),
            )
        })?;
        let thresholds = allowed_thresholds(&spec, &g, &pp)?;
        manifest.time(&format!("{label}: classify"), || {
            classify_tails(&mut surface, &thresholds, &TailOptions::default())
        });
        for b in &thresholds {
            manifest
                .exact
                .push((format!("{label}: E(m2b={}, v={})", b.m2b, b.v), hex_float(b.energy)));
        }
        write_output(
            &config.output_dir,
            &format!("surfaces_{label}.csv"),
            &surface_csv(&surface)?,
            manifest,
        )?;
        if output == SurfaceOutput::SurfacesAndCouplings {
            write_output(
                &config.output_dir,
                &format!("couplings_{label}.csv"),
                &couplings_csv(&surface)?,
                manifest,
            )?;
        }
        out.push(SectorResult {
            spec,
            surface,
            thresholds,
        });
    }
    Ok(out)
}

/// One WKB check against a classified channel tail.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WkbCheck {
    pub sector: String,
    pub nu: usize,
    pub kind: String,
    /// Fitted coefficient of 1/(2μR²) relative to the threshold.
    pub c2: f64,
    /// 2ℓ_eff + 1 implied by the integer classification.
    pub expected_power: f64,
    /// Local power of the WKB probability over one decade of k.
    pub wkb_power: f64,
    pub passed: bool,
}

/// Relative tolerance of the WKB power-law check.
pub const WKB_TOLERANCE: f64 = 0.05;

/// Runs the WKB scaling check on every classified channel of the surfaces.
/// Each classified tail is fed to the WKB integral through its fitted
/// coefficient; k spans [1e−3, 1e−2] in units of 1/r0.
pub fn validate_wkb(results: &[SectorResult]) -> Result<Vec<WkbCheck>> {
    let mut out = Vec::new();
    for res in results {
        let s = &res.surface;
        for nu in 0..s.channels() {
            let Some(fit) = s.fits[nu] else { continue };
            let (kind, ideal) = match s.tails[nu] {
                TailClass::Continuum { lambda } => ("continuum", ((lambda + 1) * (lambda + 1)) as f64 - 0.25),
                TailClass::AtomDiatom { m_ad, .. } => ("atom_diatom", (m_ad * m_ad) as f64 - 0.25),
                TailClass::Unresolved => continue,
            };
            let expected_power = 2.0 * (ideal + 0.25).sqrt();
            let c2 = fit.c2.max(-0.25);
            let wkb_power = wkb_scaling_power(c2, s.mu, 1e-3, 1e-2, 1.0)?;
            let passed = if expected_power == 0.0 {
                wkb_power.abs() < WKB_TOLERANCE
            } else {
                ((wkb_power - expected_power) / expected_power).abs() < WKB_TOLERANCE
            };
            out.push(WkbCheck {
                sector: format!("{}_{}", s.spec.class, s.spec.label()),
                nu,
                kind: kind.into(),
                c2: fit.c2,
                expected_power,
                wkb_power,
                passed,
            });
        }
    }
    Ok(out)
}

pub fn wkb_csv(checks: &[WkbCheck]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sector", "nu", "kind", "c2", "expected_power", "wkb_power", "passed"])?;
    for c in checks {
        w.write_record([
            c.sector.clone(),
            c.nu.to_string(),
            c.kind.clone(),
            fmt12(c.c2),
            fmt12(c.expected_power),
            fmt12(c.wkb_power),
            c.passed.to_string(),
        ])?;
    }
    finish(w)
}

/// Threshold table for a class; distinguishable particles need explicit |M|.
pub fn threshold_rows(class: SymmetryClass, m_max: i32) -> Result<Vec<ThresholdReport>> {
    if m_max < 0 {
        return Err(Error::config("M_max", "must be non-negative"));
    }
    threshold_table(class, m_max)
}

/// Result of one built-in self-check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Fast internal consistency checks of every module.
pub fn validate_all() -> Vec<Check> {
    use crate::adiabatic::{build_basis, solve_channels};
    use crate::geometry::HyperPoint;
    use crate::harmonics::{free_spectrum, verify_operator_pointwise, HarmonicLabel, SymmetryOp};
    use crate::threshold::{wkb_action_exact, wkb_probability};

    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.into(),
            passed,
            detail,
        })
    };

    // Symmetry phases on a fixed point set.
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for lambda in 0..=6 {
        for omega in (-lambda..=lambda).step_by(2) {
            for m in (-lambda..=lambda).step_by(2) {
                let Ok(h) = HarmonicLabel::new(lambda, omega, m) else {
                    continue;
                };
                for k in 0..5 {
                    let t = k as f64;
                    let p = HyperPoint::wrapped(1.0, 0.1 + 0.3 * t, 0.4 + 1.1 * t, 0.2 + 0.7 * t);
                    for op in SymmetryOp::ALL {
                        match verify_operator_pointwise(op, h, &p) {
                            Ok(r) => worst = worst.max(r),
                            Err(_) => failures += 1,
                        }
                    }
                }
            }
        }
    }
    push(
        "symmetry phases",
        failures == 0 && worst < 1e-12,
        format!("max residual {worst:.2e}"),
    );

    let pp = PairPotential::new(-30.0, 1.0).expect("valid");
    let counts: Vec<usize> = (0..4)
        .map(|m| bound_states(&pp, m, 0.5).map(|v| v.len()).unwrap_or(0))
        .collect();
    push(
        "two-body counts at D = -30",
        counts == [3, 2, 1, 1],
        format!("{counts:?}"),
    );

    let spec = SymmetrySpec::new(SymmetryClass::Bbb, 0, 0).expect("valid");
    let free = PairPotential::new(0.0, 1.0).expect("valid");
    let detail = build_basis(spec, 20, 20, 6)
        .map(Arc::new)
        .and_then(|b| solve_channels(&spec, &b, 1.0, &MassGeometry::equal(), &free, 3))
        .map(|sol| {
            let want: Vec<f64> = free_spectrum(spec.class, 0, 0, 12)
                .iter()
                .flat_map(|&(l, n)| std::iter::repeat_n((l * (l + 2)) as f64, n))
                .take(3)
                .collect();
            sol.reduced
                .iter()
                .zip(&want)
                .map(|(g, w)| (g - 0.75 - w).abs() / w.max(1.0))
                .fold(0.0, f64::max)
        });
    match detail {
        Ok(err) => push(
            "free-space spectrum BBB 0+_s",
            err < 1e-6,
            format!("max relative error {err:.2e}"),
        ),
        Err(e) => push("free-space spectrum BBB 0+_s", false, e.to_string()),
    }

    let mut table_ok = true;
    for class in [
        SymmetryClass::Bbb,
        SymmetryClass::Bbx,
        SymmetryClass::Fff,
        SymmetryClass::Ffx,
    ] {
        match threshold_table(class, 2) {
            Ok(rows) => {
                table_ok &= rows.len() == 4;
                table_ok &= rows.iter().all(|r| r.d3_exponent == r.k3_exponent + 2);
                table_ok &= rows.iter().any(|r| r.atom_diatom.iter().any(|a| a.exponent == 0));
            }
            Err(_) => table_ok = false,
        }
    }
    push("threshold table relations", table_ok, String::new());

    let mu = 1.0 / 3f64.sqrt();
    let mut wkb_err: f64 = 0.0;
    for c2 in [-0.25, 0.75, 3.75] {
        let e = 1e-4 / (2.0 * mu);
        let (Ok(w), Ok(x)) = (wkb_probability(c2, mu, e, 1.0), wkb_action_exact(c2, mu, e, 1.0)) else {
            wkb_err = f64::INFINITY;
            continue;
        };
        wkb_err = wkb_err.max((w.exponent - 2.0 * x).abs());
    }
    push(
        "WKB quadrature vs closed form",
        wkb_err < 1e-8,
        format!("max deviation {wkb_err:.2e}"),
    );
    checks
}
