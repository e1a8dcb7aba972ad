//! Fixed-R hyperangular eigenproblem.
//!
//! Channel functions are written as Φ = φ_s(θ,φ) sin Mγ + φ_c(θ,φ) cos Mγ and
//! expanded in products of B-splines on the irreducible domain
//! θ ∈ [0, π/2], φ ∈ [0, φ_max]. Reflection and permutation symmetry enter
//! only through the edge conditions of the spline spaces.
//!
//! Near the equilateral pole θ = 0 a regular channel function reduces to a
//! combination of cos(M(φ/2+γ)) and sin(M(φ/2+γ)). Two extra basis functions
//! B₀(θ)·T(φ) carry exactly these traces; every other function vanishes at
//! θ = 0, which keeps all 1/sinθ integrals finite.
//!
//! The pencil (H, S) uses the volume weight sinθ/4 and is scaled so that its
//! eigenvalues are 2μR²U(R).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bspline::{clustered_breaks, EndCondition, SplineSpace};
use crate::geometry::{interparticle_distances, HyperPoint, MassGeometry, Pair};
use crate::harmonics::SymmetryClass;
use crate::linalg::{lowest_eigenpairs, BandedSym, LanczosOptions};
use crate::quadrature::GaussLegendre;
use crate::twobody::PairPotential;
use crate::{Error, Result};

/// Symmetry sector |M|^π_r of a class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetrySpec {
    pub class: SymmetryClass,
    /// |M|.
    pub m: i32,
    /// Reflection index: 0 symmetric, 1 antisymmetric under R_x.
    pub r: u8,
    /// Statistics index: 0 bosons, 1 fermions, `None` without identical particles.
    pub s: Option<u8>,
}

impl SymmetrySpec {
    pub fn new(class: SymmetryClass, m: i32, r: u8) -> Result<Self> {
        Self::with_statistics(class, m, r, class.statistics())
    }

    pub fn with_statistics(class: SymmetryClass, m: i32, r: u8, s: Option<u8>) -> Result<Self> {
        if m < 0 {
            return Err(Error::Symmetry(format!("M must be given as |M| >= 0, got {m}")));
        }
        if r > 1 {
            return Err(Error::Symmetry(format!("reflection index must be 0 or 1, got {r}")));
        }
        if s != class.statistics() {
            return Err(Error::Symmetry(format!(
                "statistics index {s:?} inconsistent with class {class}"
            )));
        }
        Ok(Self { class, m, r, s })
    }

    /// Parity (−1)^M.
    pub fn parity(&self) -> i32 {
        if self.m % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Label such as `0+_s` or `1-_a`.
    pub fn label(&self) -> String {
        format!(
            "{}{}_{}",
            self.m,
            if self.parity() > 0 { '+' } else { '-' },
            if self.r == 0 { 's' } else { 'a' }
        )
    }
}

/// Condition imposed on one component along one edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EdgeCondition {
    /// The component vanishes.
    Value,
    /// Its normal derivative vanishes.
    Derivative,
    /// φ = 0 and φ = 2π are identified with this sign on values and derivatives.
    Periodic(f64),
}

/// Conditions for (φ_s, φ_c) on the three constrained edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeTags {
    pub theta_half: [EdgeCondition; 2],
    pub phi_zero: [EdgeCondition; 2],
    pub phi_max: [EdgeCondition; 2],
}

const VALUE_S: [EdgeCondition; 2] = [EdgeCondition::Value, EdgeCondition::Derivative];
const VALUE_C: [EdgeCondition; 2] = [EdgeCondition::Derivative, EdgeCondition::Value];

/// Edge conditions of a symmetry sector.
pub fn edge_tags(spec: &SymmetrySpec) -> EdgeTags {
    let r = spec.r as i32;
    let m = spec.m;
    let theta_half = if r == 0 { VALUE_S } else { VALUE_C };
    match spec.s {
        Some(s) => {
            let s = s as i32;
            let phi_zero = if (r + s + m) % 2 == 0 { VALUE_S } else { VALUE_C };
            let phi_max = if (r + s) % 2 == 0 { VALUE_S } else { VALUE_C };
            EdgeTags {
                theta_half,
                phi_zero,
                phi_max,
            }
        }
        None => {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            let p = [EdgeCondition::Periodic(sign); 2];
            EdgeTags {
                theta_half,
                phi_zero: p,
                phi_max: p,
            }
        }
    }
}

/// Resolution and clustering of the spline basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    pub n_theta: usize,
    pub n_phi: usize,
    pub order: usize,
    /// Gauss–Legendre points per span.
    pub quad_points: usize,
    pub theta_cluster: f64,
    pub theta_width: f64,
    pub phi_cluster: f64,
    pub phi_width: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            n_theta: 50,
            n_phi: 50,
            order: 6,
            quad_points: 10,
            theta_cluster: 3.0,
            theta_width: 0.25,
            phi_cluster: 3.0,
            phi_width: 0.3,
        }
    }
}

impl BasisConfig {
    pub fn with_size(n_theta: usize, n_phi: usize, order: usize) -> Self {
        Self {
            n_theta,
            n_phi,
            order,
            quad_points: order + 4,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Comp {
    S,
    C,
}

/// One global basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisFn {
    /// B₀(θ) times the pole trace with this index.
    Pole(usize),
    /// θ-spline × φ-spline for one component.
    Product { comp: Comp, theta: usize, phi: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum ThetaId {
    Pole,
    S(usize),
    C(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PhiId {
    Pole(usize),
    S(usize),
    C(usize),
}

/// Tabulated values on one span.
#[derive(Debug, Clone)]
struct ThetaTab {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    fns: Vec<(ThetaId, Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone)]
struct PhiFnTab {
    id: PhiId,
    sv: Vec<f64>,
    sd: Vec<f64>,
    cv: Vec<f64>,
    cd: Vec<f64>,
}

#[derive(Debug, Clone)]
struct PhiTab {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    fns: Vec<PhiFnTab>,
}

/// Pole trace index: 0 → (−sin x, cos x), 1 → (cos x, sin x), x = Mφ/2.
fn pole_trace(kind: usize, m: i32, phi: f64) -> ([f64; 2], [f64; 2]) {
    let h = 0.5 * m as f64;
    let (sx, cx) = (h * phi).sin_cos();
    match kind {
        0 => ([-sx, cx], [-h * cx, -h * sx]),
        _ => ([cx, sx], [-h * sx, h * cx]),
    }
}

fn satisfies(cond: &[EdgeCondition; 2], val: [f64; 2], der: [f64; 2]) -> bool {
    let tol = 1e-12;
    (0..2).all(|c| match cond[c] {
        EdgeCondition::Value => val[c].abs() < tol,
        EdgeCondition::Derivative => der[c].abs() < tol,
        EdgeCondition::Periodic(_) => true,
    })
}

/// The 2D spline basis of one symmetry sector, with its R-independent
/// kinetic and overlap matrices.
#[derive(Debug, Clone)]
pub struct SplineBasis2D {
    pub spec: SymmetrySpec,
    pub config: BasisConfig,
    pub phi_max: f64,
    pub tags: EdgeTags,
    pub theta_breaks: Vec<f64>,
    pub phi_breaks: Vec<f64>,
    theta_raw: SplineSpace,
    theta_s: SplineSpace,
    theta_c: SplineSpace,
    phi_s: Option<SplineSpace>,
    phi_c: SplineSpace,
    poles: Vec<usize>,
    functions: Vec<BasisFn>,
    theta_tabs: Vec<ThetaTab>,
    phi_tabs: Vec<PhiTab>,
    /// Global index lookup for element assembly.
    index_s: Vec<Vec<usize>>,
    index_c: Vec<Vec<usize>>,
    index_pole: Vec<usize>,
    bandwidth: usize,
    kinetic_asymmetry: f64,
    kinetic: BandedSym,
    overlap: BandedSym,
}

fn to_end(cond: EdgeCondition) -> EndCondition {
    match cond {
        EdgeCondition::Value => EndCondition::Value,
        EdgeCondition::Derivative => EndCondition::Derivative,
        EdgeCondition::Periodic(_) => EndCondition::Free,
    }
}

/// Basis for a sector with equal-mass knot clustering.
pub fn build_basis(spec: SymmetrySpec, n_theta: usize, n_phi: usize, order: usize) -> Result<SplineBasis2D> {
    build_basis_with(
        spec,
        &BasisConfig::with_size(n_theta, n_phi, order),
        &MassGeometry::equal(),
    )
}

/// Basis for a sector, clustering φ knots around the coalescence angles of `g`.
pub fn build_basis_with(spec: SymmetrySpec, config: &BasisConfig, g: &MassGeometry) -> Result<SplineBasis2D> {
    let k = config.order;
    if k < 3 || config.n_theta < k + 2 || config.n_phi < k + 2 {
        return Err(Error::Basis(format!(
            "need n_theta, n_phi >= order + 2 and order >= 3 (got {}, {}, {})",
            config.n_theta, config.n_phi, k
        )));
    }
    if config.quad_points < k {
        return Err(Error::Basis("need at least `order` quadrature points per span".into()));
    }
    let tags = edge_tags(&spec);
    let phi_max = spec.class.phi_max();
    let periodic = spec.s.is_none();

    let theta_spans = config.n_theta - k + 1;
    let theta_breaks = clustered_breaks(
        0.0,
        PI / 2.0,
        theta_spans,
        &[PI / 2.0],
        config.theta_cluster,
        config.theta_width,
    );
    // Coalescence angles and their mirror images around the domain edges.
    let mut centres = Vec::new();
    for pair in Pair::ALL {
        let c = g.coalescence_angle(pair);
        for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
            let x = c + shift;
            centres.push(x);
            if !periodic {
                centres.push(-x);
                centres.push(2.0 * phi_max - x);
            }
        }
    }
    centres.retain(|x| *x > -1.0 && *x < phi_max + 1.0);
    let phi_spans = if periodic { config.n_phi } else { config.n_phi - k + 1 };
    let phi_breaks = clustered_breaks(0.0, phi_max, phi_spans, &centres, config.phi_cluster, config.phi_width);

    let theta_raw = SplineSpace::clamped(theta_breaks.clone(), k, EndCondition::Free, EndCondition::Free)?;
    let theta_s = SplineSpace::clamped(theta_breaks.clone(), k, EndCondition::Drop, to_end(tags.theta_half[0]))?;
    let theta_c = SplineSpace::clamped(theta_breaks.clone(), k, EndCondition::Drop, to_end(tags.theta_half[1]))?;
    let make_phi = |comp: usize| -> Result<SplineSpace> {
        if periodic {
            let sign = match tags.phi_zero[comp] {
                EdgeCondition::Periodic(s) => s,
                _ => 1.0,
            };
            SplineSpace::periodic(phi_breaks.clone(), k, sign)
        } else {
            SplineSpace::clamped(
                phi_breaks.clone(),
                k,
                to_end(tags.phi_zero[comp]),
                to_end(tags.phi_max[comp]),
            )
        }
    };
    let phi_s = if spec.m == 0 { None } else { Some(make_phi(0)?) };
    let phi_c = make_phi(1)?;

    // Pole traces compatible with the φ edges.
    let poles: Vec<usize> = if spec.m == 0 {
        let (v0, d0) = pole_trace(0, 0, 0.0);
        let (v1, d1) = pole_trace(0, 0, phi_max);
        if periodic || (satisfies(&tags.phi_zero, v0, d0) && satisfies(&tags.phi_max, v1, d1)) {
            vec![0]
        } else {
            vec![]
        }
    } else {
        (0..2)
            .filter(|&kind| {
                let (v0, d0) = pole_trace(kind, spec.m, 0.0);
                let (v1, d1) = pole_trace(kind, spec.m, phi_max);
                if periodic {
                    let sign = if spec.m % 2 == 0 { 1.0 } else { -1.0 };
                    (0..2).all(|c| (v1[c] - sign * v0[c]).abs() < 1e-12 && (d1[c] - sign * d0[c]).abs() < 1e-12)
                } else {
                    satisfies(&tags.phi_zero, v0, d0) && satisfies(&tags.phi_max, v1, d1)
                }
            })
            .collect()
    };

    // Global ordering: poles, then θ-major with interleaved components.
    let n_th = theta_s.len();
    debug_assert_eq!(n_th, theta_c.len());
    let n_ph = phi_c.len();
    let mut functions = Vec::new();
    let mut index_pole = vec![usize::MAX; 2];
    for &p in &poles {
        index_pole[p] = functions.len();
        functions.push(BasisFn::Pole(p));
    }
    let mut index_s = vec![vec![usize::MAX; n_ph]; n_th];
    let mut index_c = vec![vec![usize::MAX; n_ph]; n_th];
    for i in 0..n_th {
        for p in 0..n_ph {
            if let Some(ps) = &phi_s {
                if p < ps.len() {
                    index_s[i][p] = functions.len();
                    functions.push(BasisFn::Product {
                        comp: Comp::S,
                        theta: i,
                        phi: p,
                    });
                }
            }
            index_c[i][p] = functions.len();
            functions.push(BasisFn::Product {
                comp: Comp::C,
                theta: i,
                phi: p,
            });
        }
    }

    let gl = GaussLegendre::new(config.quad_points);
    let theta_tabs = tabulate_theta(&theta_raw, &theta_s, &theta_c, !poles.is_empty(), &gl);
    let phi_tabs = tabulate_phi(phi_s.as_ref(), &phi_c, &poles, spec.m, &gl);

    let mut basis = SplineBasis2D {
        spec,
        config: *config,
        phi_max,
        tags,
        theta_breaks,
        phi_breaks,
        theta_raw,
        theta_s,
        theta_c,
        phi_s,
        phi_c,
        poles,
        functions,
        theta_tabs,
        phi_tabs,
        index_s,
        index_c,
        index_pole,
        bandwidth: 0,
        kinetic_asymmetry: 0.0,
        kinetic: BandedSym::zeros(1, 0),
        overlap: BandedSym::zeros(1, 0),
    };
    basis.bandwidth = basis.compute_bandwidth();
    let (kinetic, overlap, asym) = basis.assemble_static()?;
    basis.kinetic = kinetic;
    basis.overlap = overlap;
    basis.kinetic_asymmetry = asym;
    let f = basis.overlap.ldlt()?;
    if f.negative_pivots() > 0 || !(f.min_pivot() > 0.0) {
        return Err(Error::Basis(format!(
            "overlap matrix is not positive definite (min pivot {:e})",
            f.min_pivot()
        )));
    }
    Ok(basis)
}

fn tabulate_theta(
    raw: &SplineSpace,
    ts: &SplineSpace,
    tc: &SplineSpace,
    with_pole: bool,
    gl: &GaussLegendre,
) -> Vec<ThetaTab> {
    let map_s = ts.span_map();
    let map_c = tc.span_map();
    let map_raw = raw.span_map();
    (0..raw.spans())
        .map(|e| {
            let (a, b) = (raw.breaks[e], raw.breaks[e + 1]);
            let (nodes, weights): (Vec<f64>, Vec<f64>) = gl.on(a, b).unzip();
            let mut fns: Vec<(ThetaId, Vec<f64>, Vec<f64>)> = Vec::new();
            let mut push = |id: ThetaId, q: usize, v: f64, d: f64, n: usize| {
                if let Some(entry) = fns.iter_mut().find(|(i, _, _)| *i == id) {
                    entry.1[q] = v;
                    entry.2[q] = d;
                } else {
                    let mut vv = vec![0.0; n];
                    let mut dd = vec![0.0; n];
                    vv[q] = v;
                    dd[q] = d;
                    fns.push((id, vv, dd));
                }
            };
            let n = nodes.len();
            for (q, &x) in nodes.iter().enumerate() {
                if with_pole {
                    for (f, v, d) in raw.eval_span(e, x, &map_raw) {
                        if f == 0 {
                            push(ThetaId::Pole, q, v, d, n);
                        }
                    }
                }
                for (f, v, d) in ts.eval_span(e, x, &map_s) {
                    push(ThetaId::S(f), q, v, d, n);
                }
                for (f, v, d) in tc.eval_span(e, x, &map_c) {
                    push(ThetaId::C(f), q, v, d, n);
                }
            }
            ThetaTab { nodes, weights, fns }
        })
        .collect()
}

fn tabulate_phi(
    ps: Option<&SplineSpace>,
    pc: &SplineSpace,
    poles: &[usize],
    m: i32,
    gl: &GaussLegendre,
) -> Vec<PhiTab> {
    let map_s = ps.map(|s| s.span_map());
    let map_c = pc.span_map();
    (0..pc.spans())
        .map(|f| {
            let (a, b) = (pc.breaks[f], pc.breaks[f + 1]);
            let (nodes, weights): (Vec<f64>, Vec<f64>) = gl.on(a, b).unzip();
            let n = nodes.len();
            let mut fns: Vec<PhiFnTab> = Vec::new();
            for &p in poles {
                let mut t = PhiFnTab {
                    id: PhiId::Pole(p),
                    sv: vec![0.0; n],
                    sd: vec![0.0; n],
                    cv: vec![0.0; n],
                    cd: vec![0.0; n],
                };
                for (q, &x) in nodes.iter().enumerate() {
                    let (v, d) = pole_trace(p, m, x);
                    t.sv[q] = v[0];
                    t.cv[q] = v[1];
                    t.sd[q] = d[0];
                    t.cd[q] = d[1];
                }
                fns.push(t);
            }
            let add = |id: PhiId, q: usize, v: f64, d: f64, comp: Comp, fns: &mut Vec<PhiFnTab>| {
                let pos = match fns.iter().position(|t| t.id == id) {
                    Some(p) => p,
                    None => {
                        fns.push(PhiFnTab {
                            id,
                            sv: vec![0.0; n],
                            sd: vec![0.0; n],
                            cv: vec![0.0; n],
                            cd: vec![0.0; n],
                        });
                        fns.len() - 1
                    }
                };
                match comp {
                    Comp::S => {
                        fns[pos].sv[q] = v;
                        fns[pos].sd[q] = d;
                    }
                    Comp::C => {
                        fns[pos].cv[q] = v;
                        fns[pos].cd[q] = d;
                    }
                }
            };
            for (q, &x) in nodes.iter().enumerate() {
                if let (Some(ps), Some(map_s)) = (ps, map_s.as_ref()) {
                    for (i, v, d) in ps.eval_span(f, x, map_s) {
                        add(PhiId::S(i), q, v, d, Comp::S, &mut fns);
                    }
                }
                for (i, v, d) in pc.eval_span(f, x, &map_c) {
                    add(PhiId::C(i), q, v, d, Comp::C, &mut fns);
                }
            }
            PhiTab { nodes, weights, fns }
        })
        .collect()
}

/// (global index, θ-local index, φ-local index) of the functions active on an element.
type ActiveSet = Vec<(usize, usize, usize)>;

impl SplineBasis2D {
    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn pole_traces(&self) -> &[usize] {
        &self.poles
    }

    /// R-independent overlap matrix (weight sinθ/4).
    pub fn overlap(&self) -> &BandedSym {
        &self.overlap
    }

    /// max |K_ij − K_ji| / max |K| of the kinetic form, with the two
    /// triangles integrated independently.
    pub fn kinetic_asymmetry(&self) -> f64 {
        self.kinetic_asymmetry
    }

    /// Whether φ_s is represented (false for M = 0).
    pub fn has_sine_component(&self) -> bool {
        self.phi_s.is_some()
    }

    /// R-independent matrix of Λ² + 3/4.
    pub fn kinetic(&self) -> &BandedSym {
        &self.kinetic
    }

    fn global(&self, th: ThetaId, ph: PhiId) -> Option<usize> {
        let idx = match (th, ph) {
            (ThetaId::Pole, PhiId::Pole(p)) => self.index_pole[p],
            (ThetaId::S(i), PhiId::S(p)) => self.index_s[i][p],
            (ThetaId::C(i), PhiId::C(p)) => self.index_c[i][p],
            _ => usize::MAX,
        };
        (idx != usize::MAX).then_some(idx)
    }

    fn active(&self, e: usize, f: usize) -> ActiveSet {
        let mut out = Vec::new();
        for (a, (th, _, _)) in self.theta_tabs[e].fns.iter().enumerate() {
            for (b, ph) in self.phi_tabs[f].fns.iter().enumerate() {
                if let Some(gi) = self.global(*th, ph.id) {
                    out.push((gi, a, b));
                }
            }
        }
        out
    }

    fn compute_bandwidth(&self) -> usize {
        let mut bw = 0;
        for e in 0..self.theta_tabs.len() {
            for f in 0..self.phi_tabs.len() {
                let act = self.active(e, f);
                if let (Some(lo), Some(hi)) = (act.iter().map(|x| x.0).min(), act.iter().map(|x| x.0).max()) {
                    bw = bw.max(hi - lo);
                }
            }
        }
        bw
    }

    fn assemble_static(&self) -> Result<(BandedSym, BandedSym, f64)> {
        let n = self.dim();
        let m = self.spec.m as f64;
        let mut kin = BandedSym::zeros(n, self.bandwidth);
        let mut ovl = BandedSym::zeros(n, self.bandwidth);
        let mut transposed = BandedSym::zeros(n, self.bandwidth);
        for (e, tt) in self.theta_tabs.iter().enumerate() {
            let nt = tt.fns.len();
            // θ pair integrals on this span.
            let mut t1 = vec![0.0; nt * nt];
            let mut t2 = vec![0.0; nt * nt];
            let mut ttan = vec![0.0; nt * nt];
            let mut ts = vec![0.0; nt * nt];
            for (q, (&x, &w)) in tt.nodes.iter().zip(&tt.weights).enumerate() {
                let (sn, tn) = (x.sin(), (0.5 * x).tan());
                for a in 0..nt {
                    for b in 0..nt {
                        let fa = &tt.fns[a];
                        let fb = &tt.fns[b];
                        t1[a * nt + b] += w * sn * fa.2[q] * fb.2[q];
                        t2[a * nt + b] += w * fa.1[q] * fb.1[q] / sn;
                        ttan[a * nt + b] += w * tn * fa.1[q] * fb.1[q];
                        ts[a * nt + b] += w * sn * fa.1[q] * fb.1[q];
                    }
                }
            }
            for (f, pt) in self.phi_tabs.iter().enumerate() {
                let act = self.active(e, f);
                if act.is_empty() {
                    continue;
                }
                let np = pt.fns.len();
                let mut a0 = vec![0.0; np * np];
                let mut a1 = vec![0.0; np * np];
                let mut ac = vec![0.0; np * np];
                for (q, &w) in pt.weights.iter().enumerate() {
                    for a in 0..np {
                        let u = &pt.fns[a];
                        for b in 0..np {
                            let v = &pt.fns[b];
                            let gg = u.sv[q] * v.sv[q] + u.cv[q] * v.cv[q];
                            let dd = u.sd[q] * v.sd[q] + u.cd[q] * v.cd[q];
                            // Test function u, trial function v.
                            let cc = u.cv[q] * v.sd[q] - u.sv[q] * v.cd[q];
                            a0[a * np + b] += w * gg;
                            a1[a * np + b] += w * (4.0 * dd + m * m * gg + 4.0 * m * cc);
                            ac[a * np + b] += w * cc;
                        }
                    }
                }
                for &(gi, ta, pa) in &act {
                    for &(gj, tb, pb) in &act {
                        if gj > gi {
                            continue;
                        }
                        let both_pole = tt.fns[ta].0 == ThetaId::Pole && tt.fns[tb].0 == ThetaId::Pole;
                        let th = ta * nt + tb;
                        let ph = pa * np + pb;
                        let mut k = t1[th] * a0[ph] - m * ttan[th] * ac[ph];
                        if both_pole {
                            // The 1/sinθ integrand vanishes identically for pole traces.
                            debug_assert!(a1[ph].abs() < 1e-10 * (1.0 + m * m));
                        } else {
                            k += 0.25 * t2[th] * a1[ph];
                        }
                        let s = 0.25 * ts[th] * a0[ph];
                        kin.add_lower(gi, gj, k + 0.75 * s);
                        ovl.add_lower(gi, gj, s);
                        if gj < gi {
                            // Same entry with test and trial roles exchanged.
                            let th = tb * nt + ta;
                            let ph = pb * np + pa;
                            let mut k = t1[th] * a0[ph] - m * ttan[th] * ac[ph];
                            if !both_pole {
                                k += 0.25 * t2[th] * a1[ph];
                            }
                            transposed.add_lower(gi, gj, k + 0.75 * 0.25 * ts[th] * a0[ph]);
                        } else {
                            transposed.add_lower(gi, gj, k + 0.75 * s);
                        }
                    }
                }
            }
        }
        let asym = kin.axpy(-1.0, &transposed).max_abs() / kin.max_abs();
        Ok((kin, ovl, asym))
    }

    /// Potential matrix ⟨⟨u|V|w⟩⟩ (weight sinθ/4) at hyperradius R.
    pub fn potential_matrix(&self, r: f64, g: &MassGeometry, pp: &PairPotential) -> BandedSym {
        let n = self.dim();
        let mut out = BandedSym::zeros(n, self.bandwidth);
        if pp.depth == 0.0 {
            return out;
        }
        for (e, tt) in self.theta_tabs.iter().enumerate() {
            let nt = tt.fns.len();
            let nq = tt.nodes.len();
            for (f, pt) in self.phi_tabs.iter().enumerate() {
                let act = self.active(e, f);
                if act.is_empty() {
                    continue;
                }
                let np = pt.fns.len();
                let npq = pt.nodes.len();
                let mut vq = vec![0.0; nq * npq];
                let mut any = false;
                for (q, &th) in tt.nodes.iter().enumerate() {
                    for (p, &ph) in pt.nodes.iter().enumerate() {
                        let v = potential_value(r, th, ph, g, pp);
                        vq[q * npq + p] = v;
                        any |= v.abs() > 1e-300;
                    }
                }
                if !any {
                    continue;
                }
                // W[q][a][b] = Σ_p w_p (g_a·g_b) V(q,p).
                let mut wqab = vec![0.0; nq * np * np];
                for q in 0..nq {
                    for (p, &wp) in pt.weights.iter().enumerate() {
                        let vv = wp * vq[q * npq + p];
                        if vv == 0.0 {
                            continue;
                        }
                        for a in 0..np {
                            let u = &pt.fns[a];
                            let (us, uc) = (u.sv[p], u.cv[p]);
                            if us == 0.0 && uc == 0.0 {
                                continue;
                            }
                            for b in 0..=a {
                                let w = &pt.fns[b];
                                let gg = us * w.sv[p] + uc * w.cv[p];
                                wqab[(q * np + a) * np + b] += vv * gg;
                            }
                        }
                    }
                }
                for &(gi, ta, pa) in &act {
                    for &(gj, tb, pb) in &act {
                        if gj > gi {
                            continue;
                        }
                        let (a, b) = if pa >= pb { (pa, pb) } else { (pb, pa) };
                        let mut acc = 0.0;
                        for q in 0..nq {
                            let wt = tt.weights[q] * tt.nodes[q].sin() * tt.fns[ta].1[q] * tt.fns[tb].1[q];
                            acc += wt * wqab[(q * np + a) * np + b];
                        }
                        if acc != 0.0 {
                            out.add_lower(gi, gj, 0.25 * acc);
                        }
                    }
                }
                let _ = nt;
            }
        }
        out
    }

    /// Values (φ_s, φ_c) and their θ and φ derivatives of a coefficient
    /// vector at one point: returns [s, c, ∂θs, ∂θc, ∂φs, ∂φc].
    pub fn evaluate(&self, coeffs: &[f64], theta: f64, phi: f64) -> [f64; 6] {
        let th_s: Vec<(f64, f64)> = (0..self.theta_s.len())
            .map(|i| self.theta_s.eval_function(i, theta))
            .collect();
        let th_c: Vec<(f64, f64)> = (0..self.theta_c.len())
            .map(|i| self.theta_c.eval_function(i, theta))
            .collect();
        let ph_s: Vec<(f64, f64)> = self
            .phi_s
            .as_ref()
            .map(|ps| (0..ps.len()).map(|i| ps.eval_function(i, phi)).collect())
            .unwrap_or_default();
        let ph_c: Vec<(f64, f64)> = (0..self.phi_c.len())
            .map(|i| self.phi_c.eval_function(i, phi))
            .collect();
        let b0 = self.theta_raw.eval_function(0, theta);
        let mut out = [0.0; 6];
        for (idx, f) in self.functions.iter().enumerate() {
            let c = coeffs[idx];
            if c == 0.0 {
                continue;
            }
            match *f {
                BasisFn::Pole(p) => {
                    let (v, d) = pole_trace(p, self.spec.m, phi);
                    for comp in 0..2 {
                        out[comp] += c * b0.0 * v[comp];
                        out[2 + comp] += c * b0.1 * v[comp];
                        out[4 + comp] += c * b0.0 * d[comp];
                    }
                }
                BasisFn::Product { comp, theta: i, phi: p } => {
                    let (t, ph, k) = match comp {
                        Comp::S => (th_s[i], ph_s[p], 0),
                        Comp::C => (th_c[i], ph_c[p], 1),
                    };
                    out[k] += c * t.0 * ph.0;
                    out[2 + k] += c * t.1 * ph.0;
                    out[4 + k] += c * t.0 * ph.1;
                }
            }
        }
        out
    }
}

/// Pairwise sum V(R, θ, φ) for a common pair potential.
pub fn potential_value(r: f64, theta: f64, phi: f64, g: &MassGeometry, pp: &PairPotential) -> f64 {
    let p = HyperPoint {
        r,
        theta,
        phi,
        gamma: 0.0,
    };
    interparticle_distances(&p, g).iter().map(|&d| pp.value(d)).sum()
}

/// Generalized pencil H x = 2μR²U S x.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub h: BandedSym,
    pub s: BandedSym,
}

fn check_spec(spec: &SymmetrySpec, basis: &SplineBasis2D) -> Result<()> {
    if *spec != basis.spec {
        return Err(Error::Symmetry(format!(
            "basis built for {} {} but {} {} requested",
            basis.spec.class,
            basis.spec.label(),
            spec.class,
            spec.label()
        )));
    }
    Ok(())
}

/// Galerkin matrices of 2μR² H_ad and of the overlap.
pub fn assemble_operator(
    spec: &SymmetrySpec,
    basis: &SplineBasis2D,
    r: f64,
    g: &MassGeometry,
    pp: &PairPotential,
) -> Result<Pencil> {
    check_spec(spec, basis)?;
    if !(r > 0.0) {
        return Err(Error::domain(format!("hyperradius must be positive, got {r}")));
    }
    let scale = 2.0 * g.mu * r * r;
    let v = basis.potential_matrix(r, g, pp);
    Ok(Pencil {
        h: basis.kinetic.axpy(scale, &v),
        s: basis.overlap.clone(),
    })
}

/// Lowest channels at one hyperradius.
#[derive(Debug, Clone)]
pub struct AdiabaticSolution {
    pub r: f64,
    /// U_ν(R), ascending.
    pub values: Vec<f64>,
    /// Pencil eigenvalues 2μR²U_ν.
    pub reduced: Vec<f64>,
    /// S-orthonormal coefficient vectors, one per channel.
    pub vectors: Vec<Vec<f64>>,
    pub basis: Arc<SplineBasis2D>,
    pub iterations: usize,
    pub residual: f64,
}

/// Options for the eigen solver.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub lanczos: LanczosOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            lanczos: LanczosOptions::default(),
        }
    }
}

/// Lowest `n_channels` eigenpairs of the pencil at R.
pub fn solve_channels(
    spec: &SymmetrySpec,
    basis: &Arc<SplineBasis2D>,
    r: f64,
    g: &MassGeometry,
    pp: &PairPotential,
    n_channels: usize,
) -> Result<AdiabaticSolution> {
    solve_channels_with(spec, basis, r, g, pp, n_channels, &SolveOptions::default())
}

pub fn solve_channels_with(
    spec: &SymmetrySpec,
    basis: &Arc<SplineBasis2D>,
    r: f64,
    g: &MassGeometry,
    pp: &PairPotential,
    n_channels: usize,
    opts: &SolveOptions,
) -> Result<AdiabaticSolution> {
    if n_channels == 0 || n_channels > basis.dim() {
        return Err(Error::domain(format!(
            "n_channels = {n_channels} outside 1..={}",
            basis.dim()
        )));
    }
    let pencil = assemble_operator(spec, basis, r, g, pp)?;
    let scale = 2.0 * g.mu * r * r;
    // Λ² is non-negative, so the spectrum lies above 3/4 + 2μR² min V.
    let vmin = 3.0 * pp.depth.min(0.0);
    let floor = 0.75 + scale * vmin;
    let mut sigma = refine_shift(&pencil, floor - 1.0 - 1e-3 * floor.abs())?;
    let mut last_err = None;
    for _ in 0..6 {
        match lowest_eigenpairs(&pencil.h, &pencil.s, sigma, n_channels, opts.lanczos) {
            Ok(mut pairs) => {
                for v in pairs.vectors.iter_mut() {
                    fix_sign(v);
                }
                let values = pairs.values.iter().map(|x| x / scale).collect();
                return Ok(AdiabaticSolution {
                    r,
                    values,
                    reduced: pairs.values,
                    vectors: pairs.vectors,
                    basis: Arc::clone(basis),
                    iterations: pairs.iterations,
                    residual: pairs.max_residual,
                });
            }
            Err(Error::Numerical { message, diagnostics }) if message.contains("shift") => {
                sigma -= 1.0 + sigma.abs();
                last_err = Some(Error::Numerical { message, diagnostics });
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::numerical("eigen solve failed", "no shift below the spectrum found")))
}

/// Moves a shift known to lie below the spectrum up towards the lowest
/// eigenvalue by inertia bisection, which speeds up shift-invert Lanczos.
fn refine_shift(pencil: &Pencil, lower: f64) -> Result<f64> {
    let n = pencil.h.dim();
    // Rayleigh quotients of unit vectors bound the lowest eigenvalue from above.
    let mut hi = (0..n)
        .map(|i| pencil.h.get(i, i) / pencil.s.get(i, i))
        .fold(f64::INFINITY, f64::min);
    let mut lo = lower;
    for _ in 0..4 {
        if hi - lo < 0.05 * lo.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let below = pencil.h.axpy(-mid, &pencil.s).ldlt()?.negative_pivots();
        if below == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo - 0.1 * (hi - lo))
}

/// Makes the largest-magnitude coefficient positive.
pub fn fix_sign(v: &mut [f64]) {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v.iter() {
        if x.abs() > best * (1.0 + 1e-12) {
            best = x.abs();
            sign = x.signum();
        }
    }
    if sign < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
