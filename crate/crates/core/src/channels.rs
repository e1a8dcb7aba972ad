//! Channel surfaces over a hyperradial grid: sign-continuous channel
//! functions, nonadiabatic couplings P and Q, effective potentials W and
//! large-R tail classification.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adiabatic::{solve_channels, AdiabaticSolution, SplineBasis2D, SymmetrySpec};
use crate::geometry::{interparticle_distances, HyperPoint, MassGeometry, Pair};
use crate::harmonics::free_spectrum;
use crate::linalg::BandedSym;
use crate::twobody::{allowed_m2b, bound_states, diatom_pairs, BoundState, DiatomPair, PairPotential};
use crate::{Error, Result};

/// Overlaps closer than this make a maximal-overlap assignment ambiguous.
pub const AMBIGUITY_GAP: f64 = 1e-3;

/// Two candidate continuations of one channel with nearly equal overlap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ambiguity {
    /// Grid index of the later point.
    pub step: usize,
    pub channel: usize,
    pub candidates: [usize; 2],
    pub overlaps: [f64; 2],
}

/// Outcome of [`align_vectors`].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AlignReport {
    /// Signed overlap of each channel with its predecessor after alignment.
    pub overlaps: Vec<Vec<f64>>,
    /// Channel reached by maximal overlap from channel ν at the previous point.
    pub tracking: Vec<Vec<usize>>,
    pub ambiguities: Vec<Ambiguity>,
    /// ±1 applied to each vector.
    pub signs: Vec<Vec<f64>>,
}

fn s_dot(s: &BandedSym, a: &[f64], b: &[f64], work: &mut [f64]) -> f64 {
    s.matvec(b, work);
    a.iter().zip(work.iter()).map(|(x, y)| x * y).sum()
}

/// Aligns the signs of a series of channel-vector sets under the inner
/// product `s`, keeping the energy ordering. `series[i][ν]` is channel ν at
/// grid point i.
pub fn align_vectors(series: &mut [Vec<Vec<f64>>], s: &BandedSym) -> AlignReport {
    let mut report = AlignReport::default();
    if series.is_empty() {
        return report;
    }
    let n = s.dim();
    let mut work = vec![0.0; n];
    report.signs.push(vec![1.0; series[0].len()]);
    report.overlaps.push(vec![1.0; series[0].len()]);
    report.tracking.push((0..series[0].len()).collect());
    for i in 1..series.len() {
        let (prev, cur) = series.split_at_mut(i);
        let prev = &prev[i - 1];
        let cur = &mut cur[0];
        let kp = prev.len();
        let kc = cur.len();
        let mut o = vec![vec![0.0; kc]; kp];
        for (a, pa) in prev.iter().enumerate() {
            for (b, cb) in cur.iter().enumerate() {
                o[a][b] = s_dot(s, pa, cb, &mut work);
            }
        }
        let mut signs = vec![1.0; kc];
        let mut diag = vec![0.0; kc];
        for nu in 0..kc.min(kp) {
            if o[nu][nu] < 0.0 {
                signs[nu] = -1.0;
                cur[nu].iter_mut().for_each(|x| *x = -*x);
            }
            diag[nu] = o[nu][nu] * signs[nu];
        }
        let mut track = Vec::with_capacity(kp);
        for (a, row) in o.iter().enumerate() {
            let mut idx: Vec<usize> = (0..kc).collect();
            idx.sort_by(|&x, &y| row[y].abs().total_cmp(&row[x].abs()));
            track.push(idx[0]);
            if kc > 1 && row[idx[0]].abs() - row[idx[1]].abs() < AMBIGUITY_GAP {
                log::warn!(
                    "ambiguous channel continuation at grid index {i}: channel {a} overlaps {:.6} with {} and {:.6} with {}",
                    row[idx[0]].abs(),
                    idx[0],
                    row[idx[1]].abs(),
                    idx[1]
                );
                report.ambiguities.push(Ambiguity {
                    step: i,
                    channel: a,
                    candidates: [idx[0], idx[1]],
                    overlaps: [row[idx[0]].abs(), row[idx[1]].abs()],
                });
            }
        }
        report.signs.push(signs);
        report.overlaps.push(diag);
        report.tracking.push(track);
    }
    report
}

/// Aligns the channel vectors of solutions computed on one basis.
pub fn phase_align(solutions: &mut [AdiabaticSolution]) -> Result<AlignReport> {
    let Some(first) = solutions.first() else {
        return Ok(AlignReport::default());
    };
    let basis = Arc::clone(&first.basis);
    if solutions.iter().any(|s| !Arc::ptr_eq(&s.basis, &basis)) {
        return Err(Error::Phase("solutions were computed on different bases".into()));
    }
    let mut series: Vec<Vec<Vec<f64>>> = solutions.iter_mut().map(|s| std::mem::take(&mut s.vectors)).collect();
    let report = align_vectors(&mut series, basis.overlap());
    for (s, v) in solutions.iter_mut().zip(series) {
        s.vectors = v;
    }
    Ok(report)
}

/// Central-difference step used for the couplings at hyperradius R.
pub fn coupling_step(r: f64) -> f64 {
    (0.01 * r).min(0.02)
}

/// P and Q at one hyperradius.
#[derive(Debug, Clone)]
pub struct Couplings {
    /// Antisymmetric first-derivative coupling.
    pub p: DMatrix<f64>,
    /// Symmetric second-derivative coupling.
    pub q: DMatrix<f64>,
    /// Largest entry of the symmetric part removed from the raw difference
    /// quotient for P (a measure of the differencing error).
    pub p_symmetric_part: f64,
}

/// Couplings from channel vectors at R − h, R and R + h. The neighbour sets
/// must already be sign-aligned with the centre set.
pub fn couplings(
    minus: &[Vec<f64>],
    center: &[Vec<f64>],
    plus: &[Vec<f64>],
    s: &BandedSym,
    h: f64,
) -> Result<Couplings> {
    let k = center.len();
    if minus.len() < k || plus.len() < k {
        return Err(Error::Phase(
            "neighbouring solutions carry fewer channels than the centre".into(),
        ));
    }
    if !(h > 0.0) {
        return Err(Error::domain("coupling step must be positive"));
    }
    let n = s.dim();
    let mut work = vec![0.0; n];
    for nu in 0..k {
        for side in [minus, plus] {
            if s_dot(s, &center[nu], &side[nu], &mut work) <= 0.0 {
                return Err(Error::Phase(format!(
                    "channel {nu} is not sign-aligned with its neighbour"
                )));
            }
        }
    }
    let deriv: Vec<Vec<f64>> = (0..k)
        .map(|nu| {
            plus[nu]
                .iter()
                .zip(&minus[nu])
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect()
        })
        .collect();
    let sd: Vec<Vec<f64>> = deriv
        .iter()
        .map(|d| {
            let mut y = vec![0.0; n];
            s.matvec(d, &mut y);
            y
        })
        .collect();
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut raw = DMatrix::zeros(k, k);
    let mut q = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            raw[(a, b)] = dot(&center[a], &sd[b]);
        }
        for b in 0..=a {
            let v = dot(&deriv[a], &sd[b]);
            q[(a, b)] = v;
            q[(b, a)] = v;
        }
    }
    let p = (&raw - raw.transpose()) * 0.5;
    let sym = (&raw + raw.transpose()) * 0.5;
    Ok(Couplings {
        p,
        q,
        p_symmetric_part: sym.amax(),
    })
}

/// Asymptotic character of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailClass {
    Continuum { lambda: i32 },
    AtomDiatom { energy: f64, v: usize, m2b: i32, m_ad: i32 },
    Unresolved,
}

/// Least-squares fit W ≈ c0 + c2/(2μR²) over the tail window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c0: f64,
    pub c2: f64,
    /// Weighted rms deviation, in units of 1/(2μR_max²).
    pub residual: f64,
}

/// Tail-fit settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailOptions {
    /// Points with R ≥ R_max · window_fraction enter the fit.
    pub window_fraction: f64,
    /// Largest accepted fit residual.
    pub max_residual: f64,
    /// Largest accepted distance of m_AD² or λ(λ+2) from the fitted value.
    pub integer_tolerance: f64,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            window_fraction: 0.5,
            max_residual: 0.25,
            integer_tolerance: 0.5,
        }
    }
}

/// Channel surfaces over a hyperradial grid.
#[derive(Debug, Clone)]
pub struct ChannelSurface {
    pub spec: SymmetrySpec,
    pub mu: f64,
    pub r: Vec<f64>,
    /// `u[i][ν]` = U_ν(R_i).
    pub u: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub p: Vec<DMatrix<f64>>,
    pub q: Vec<DMatrix<f64>>,
    pub tails: Vec<TailClass>,
    pub fits: Vec<Option<TailFit>>,
    /// Below this R all three pair distances can be smaller than r0.
    pub overlap_radius: f64,
    pub alignment: AlignReport,
    pub max_p_symmetric_part: f64,
}

impl ChannelSurface {
    pub fn channels(&self) -> usize {
        self.u.first().map_or(0, Vec::len)
    }

    /// Q_νν along the grid.
    pub fn q_diagonal(&self, nu: usize) -> Vec<f64> {
        self.q.iter().map(|q| q[(nu, nu)]).collect()
    }

    /// W_ν along the grid.
    pub fn w_channel(&self, nu: usize) -> Vec<f64> {
        self.w.iter().map(|w| w[nu]).collect()
    }
}

/// Options for [`compute_surface`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceOptions {
    /// Channels solved beyond the retained ones at the neighbouring points.
    pub extra_channels: usize,
    /// Overrides [`coupling_step`].
    pub step: Option<f64>,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self {
            extra_channels: 2,
            step: None,
        }
    }
}

struct PointResult {
    u: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    coupl: Couplings,
}

fn point(
    spec: &SymmetrySpec,
    basis: &Arc<SplineBasis2D>,
    r: f64,
    g: &MassGeometry,
    pp: &PairPotential,
    n: usize,
    opts: &SurfaceOptions,
) -> Result<PointResult> {
    let h = opts.step.unwrap_or_else(|| coupling_step(r));
    let m = (n + opts.extra_channels).min(basis.dim());
    let center = solve_channels(spec, basis, r, g, pp, n)?;
    let mut minus = solve_channels(spec, basis, r - h, g, pp, m)?.vectors;
    let mut plus = solve_channels(spec, basis, r + h, g, pp, m)?.vectors;
    let s = basis.overlap();
    let mut work = vec![0.0; s.dim()];
    for side in [&mut minus, &mut plus] {
        for (nu, c) in center.vectors.iter().enumerate() {
            if s_dot(s, c, &side[nu], &mut work) < 0.0 {
                side[nu].iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    let coupl = couplings(&minus[..n], &center.vectors, &plus[..n], s, h)?;
    Ok(PointResult {
        u: center.values,
        vectors: center.vectors,
        coupl,
    })
}

/// Solves, aligns and differentiates the lowest `n` channels over `grid`.
/// Grid points are processed in parallel.
pub fn compute_surface(
    spec: &SymmetrySpec,
    basis: &Arc<SplineBasis2D>,
    grid: &[f64],
    g: &MassGeometry,
    pp: &PairPotential,
    n: usize,
    opts: &SurfaceOptions,
) -> Result<ChannelSurface> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::domain("R grid must hold at least two ascending points"));
    }
    if grid[0] - opts.step.unwrap_or_else(|| coupling_step(grid[0])) <= 0.0 {
        return Err(Error::domain("R grid must stay positive after the coupling step"));
    }
    let results: Vec<PointResult> = grid
        .par_iter()
        .map(|&r| point(spec, basis, r, g, pp, n, opts))
        .collect::<Result<_>>()?;
    let mut series: Vec<Vec<Vec<f64>>> = results.iter().map(|p| p.vectors.clone()).collect();
    let alignment = align_vectors(&mut series, basis.overlap());
    let mut u = Vec::with_capacity(grid.len());
    let mut w = Vec::with_capacity(grid.len());
    let mut p = Vec::with_capacity(grid.len());
    let mut q = Vec::with_capacity(grid.len());
    let mut max_sym: f64 = 0.0;
    for (i, res) in results.into_iter().enumerate() {
        let signs = &alignment.signs[i];
        let flip = DMatrix::from_fn(n, n, |a, b| signs[a] * signs[b]);
        let pi = res.coupl.p.component_mul(&flip);
        let qi = res.coupl.q.component_mul(&flip);
        max_sym = max_sym.max(res.coupl.p_symmetric_part);
        w.push(effective_potential_row(&res.u, &qi, g.mu));
        u.push(res.u);
        p.push(pi);
        q.push(qi);
    }
    Ok(ChannelSurface {
        spec: *spec,
        mu: g.mu,
        r: grid.to_vec(),
        u,
        w,
        p,
        q,
        tails: vec![TailClass::Unresolved; n],
        fits: vec![None; n],
        overlap_radius: overlap_radius(g, 1.0),
        alignment,
        max_p_symmetric_part: max_sym,
    })
}

// With Q = ⟨⟨Φ'|Φ'⟩⟩ the diagonal second-derivative term of the radial
// equation is ⟨⟨Φ|Φ''⟩⟩ = −Q_νν, which enters W with a plus sign.
fn effective_potential_row(u: &[f64], q: &DMatrix<f64>, mu: f64) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(nu, x)| x + q[(nu, nu)] / (2.0 * mu))
        .collect()
}

/// Recomputes W_ν = U_ν + Q_νν/(2μ), Q_νν = ⟨⟨Φ_ν'|Φ_ν'⟩⟩ ≥ 0.
pub fn effective_potentials(surface: &mut ChannelSurface) {
    surface.w = surface
        .u
        .iter()
        .zip(&surface.q)
        .map(|(u, q)| effective_potential_row(u, q, surface.mu))
        .collect();
}

/// Largest R at which all three pair distances can be below `r0` at once.
pub fn overlap_radius(g: &MassGeometry, r0: f64) -> f64 {
    let mut best = f64::INFINITY;
    let (nt, np) = (200, 720);
    for i in 0..=nt {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / nt as f64;
        for j in 0..np {
            let phi = std::f64::consts::TAU * j as f64 / np as f64;
            let p = HyperPoint {
                r: 1.0,
                theta,
                phi,
                gamma: 0.0,
            };
            let d = interparticle_distances(&p, g);
            best = best.min(d[0].max(d[1]).max(d[2]));
        }
    }
    r0 / best
}

/// Diatom thresholds reachable in a class: bound states of every pair type
/// with permitted m2b (m2b ≥ 0 listed once).
pub fn allowed_thresholds(spec: &SymmetrySpec, g: &MassGeometry, pp: &PairPotential) -> Result<Vec<BoundState>> {
    let mut out: Vec<BoundState> = Vec::new();
    for &pair in diatom_pairs(spec.class) {
        let mu2 = match pair {
            DiatomPair::Identical => g.pair_reduced_mass(identical_pair(spec)),
            DiatomPair::Mixed => g.pair_reduced_mass(mixed_pair(spec)),
        };
        for m2b in 0..64 {
            // Binding weakens with |m2b|, so the first empty set ends the scan.
            let states = bound_states(pp, m2b, mu2)?;
            if states.is_empty() {
                break;
            }
            if !allowed_m2b(spec.class, pair, m2b) {
                continue;
            }
            for s in states {
                if !out.iter().any(|o| o.m2b == s.m2b && (o.energy - s.energy).abs() < 1e-9) {
                    out.push(s);
                }
            }
        }
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

// With two identical particles they carry labels 2 and 3 in the distance
// convention (φ23 = 0).
fn identical_pair(_spec: &SymmetrySpec) -> Pair {
    Pair::P23
}

fn mixed_pair(_spec: &SymmetrySpec) -> Pair {
    Pair::P12
}

/// Weighted least-squares fit of c0 + c2/(2μR²) with weights ∝ R².
pub fn fit_tail(r: &[f64], w: &[f64], mu: f64) -> Option<TailFit> {
    if r.len() < 3 {
        return None;
    }
    let (mut s00, mut s01, mut s11, mut b0, mut b1) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ri, &wi) in r.iter().zip(w) {
        let x = 1.0 / (2.0 * mu * ri * ri);
        let wt = ri * ri;
        s00 += wt;
        s01 += wt * x;
        s11 += wt * x * x;
        b0 += wt * wi;
        b1 += wt * x * wi;
    }
    let det = s00 * s11 - s01 * s01;
    if det.abs() < 1e-300 {
        return None;
    }
    let c0 = (s11 * b0 - s01 * b1) / det;
    let c2 = (s00 * b1 - s01 * b0) / det;
    let mut ss = 0.0;
    for (&ri, &wi) in r.iter().zip(w) {
        let d = wi - c0 - c2 / (2.0 * mu * ri * ri);
        ss += ri * ri * d * d;
    }
    let rmax = r.iter().cloned().fold(0.0, f64::max);
    let residual = (ss / s00).sqrt() * 2.0 * mu * rmax * rmax;
    Some(TailFit { c0, c2, residual })
}

/// Threshold-matching tolerance for a diatom energy.
pub fn threshold_tolerance(energy: f64) -> f64 {
    (1e-2 * energy.abs()).max(1e-4)
}

/// Classifies one fitted tail.
pub fn classify_fit(
    fit: &TailFit,
    m: i32,
    bound: &[BoundState],
    allowed_lambda: &[i32],
    opts: &TailOptions,
) -> TailClass {
    if fit.residual > opts.max_residual {
        return TailClass::Unresolved;
    }
    if let Some(b) = bound
        .iter()
        .filter(|b| (fit.c0 - b.energy).abs() <= threshold_tolerance(b.energy))
        .min_by(|a, b| (fit.c0 - a.energy).abs().total_cmp(&(fit.c0 - b.energy).abs()))
    {
        let target = fit.c2 + 0.25;
        let mut best: Option<(i32, i32, f64)> = None;
        let m2bs = if b.m2b == 0 {
            vec![0]
        } else {
            vec![b.m2b.abs(), -b.m2b.abs()]
        };
        for m2b in m2bs {
            let m_ad = m - m2b;
            let err = (target - (m_ad * m_ad) as f64).abs();
            if best.is_none_or(|(_, _, e)| err < e) {
                best = Some((m2b, m_ad, err));
            }
        }
        let (m2b, m_ad, err) = best.expect("at least one candidate");
        if err > opts.integer_tolerance {
            return TailClass::Unresolved;
        }
        return TailClass::AtomDiatom {
            energy: b.energy,
            v: b.v,
            m2b,
            m_ad,
        };
    }
    if fit.c0.abs() <= threshold_tolerance(0.0) {
        let target = fit.c2 - 0.75;
        if let Some(&lambda) = allowed_lambda.iter().min_by(|&&a, &&b| {
            let ea = (target - (a * (a + 2)) as f64).abs();
            let eb = (target - (b * (b + 2)) as f64).abs();
            ea.total_cmp(&eb)
        }) {
            if (target - (lambda * (lambda + 2)) as f64).abs() <= opts.integer_tolerance.max(0.05 * target.abs()) {
                return TailClass::Continuum { lambda };
            }
        }
    }
    TailClass::Unresolved
}

/// Fits and classifies every channel of a surface.
pub fn classify_tails(surface: &mut ChannelSurface, bound: &[BoundState], opts: &TailOptions) {
    let spec = surface.spec;
    let rmax = surface.r.last().copied().unwrap_or(0.0);
    let allowed: Vec<i32> = free_spectrum(spec.class, spec.m, spec.r, spec.m + 60)
        .into_iter()
        .map(|(l, _)| l)
        .collect();
    let idx: Vec<usize> = (0..surface.r.len())
        .filter(|&i| surface.r[i] >= opts.window_fraction * rmax)
        .collect();
    let rr: Vec<f64> = idx.iter().map(|&i| surface.r[i]).collect();
    for nu in 0..surface.channels() {
        let ww: Vec<f64> = idx.iter().map(|&i| surface.w[i][nu]).collect();
        let fit = fit_tail(&rr, &ww, surface.mu);
        surface.tails[nu] = match &fit {
            Some(f) => classify_fit(f, spec.m, bound, &allowed, opts),
            None => TailClass::Unresolved,
        };
        surface.fits[nu] = fit;
    }
}

/// Slope of log y against log x by least squares.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(a, b)| (a.ln(), b.abs().ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_tail() {
        let mu = 0.5;
        let r: Vec<f64> = (0..20).map(|i| 5.0 + i as f64 * 0.5).collect();
        let w: Vec<f64> = r.iter().map(|x| -3.0 + 8.75 / (2.0 * mu * x * x)).collect();
        let f = fit_tail(&r, &w, mu).unwrap();
        assert!((f.c0 + 3.0).abs() < 1e-12);
        assert!((f.c2 - 8.75).abs() < 1e-9);
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn classification_of_synthetic_fits() {
        let bound = vec![BoundState {
            v: 0,
            m2b: 2,
            energy: -5.0,
        }];
        let opts = TailOptions::default();
        let f = TailFit {
            c0: -5.001,
            c2: 0.75,
            residual: 0.0,
        };
        assert_eq!(
            classify_fit(&f, 1, &bound, &[1, 3], &opts),
            TailClass::AtomDiatom {
                energy: -5.0,
                v: 0,
                m2b: 2,
                m_ad: -1
            }
        );
        let f = TailFit {
            c0: 1e-5,
            c2: 3.75,
            residual: 0.0,
        };
        assert_eq!(
            classify_fit(&f, 1, &bound, &[1, 3], &opts),
            TailClass::Continuum { lambda: 1 }
        );
        let f = TailFit {
            c0: 1e-5,
            c2: 3.75,
            residual: 1.0,
        };
        assert_eq!(classify_fit(&f, 1, &bound, &[1, 3], &opts), TailClass::Unresolved);
    }
}
