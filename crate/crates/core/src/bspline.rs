//! One-dimensional B-spline bases with boundary conditions imposed by
//! construction (dropping or merging end functions, or periodic wrapping).

use crate::{Error, Result};

/// Condition imposed at one end of a clamped interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndCondition {
    /// No constraint: all end functions kept.
    Free,
    /// Function value vanishes.
    Value,
    /// First derivative vanishes.
    Derivative,
    /// The end function is removed together with its value; used at θ = 0
    /// where the pole is handled separately.
    Drop,
}

/// A basis of linear combinations of raw B-splines over a breakpoint set.
#[derive(Debug, Clone)]
pub struct SplineSpace {
    pub order: usize,
    /// Breakpoints b_0 < … < b_N (spans are [b_s, b_{s+1}]).
    pub breaks: Vec<f64>,
    knots: Vec<f64>,
    /// Offset so that span s corresponds to knot interval `s + offset`.
    offset: usize,
    /// Each final function as (raw index, coefficient) pairs.
    pub functions: Vec<Vec<(usize, f64)>>,
}

impl SplineSpace {
    /// Clamped basis on [b_0, b_N] with the given end conditions.
    pub fn clamped(breaks: Vec<f64>, order: usize, left: EndCondition, right: EndCondition) -> Result<Self> {
        check_breaks(&breaks, order)?;
        let k = order;
        let a = breaks[0];
        let b = *breaks.last().unwrap();
        let mut knots = vec![a; k - 1];
        knots.extend_from_slice(&breaks);
        knots.extend(std::iter::repeat_n(b, k - 1));
        let n_raw = knots.len() - k;
        if n_raw < 4 {
            return Err(Error::Basis("too few spline functions".into()));
        }
        let mut functions: Vec<Vec<(usize, f64)>> = Vec::new();
        let lo = match left {
            EndCondition::Free => 0,
            EndCondition::Value | EndCondition::Drop => 1,
            EndCondition::Derivative => {
                functions.push(vec![(0, 1.0), (1, 1.0)]);
                2
            }
        };
        let hi = match right {
            EndCondition::Free => n_raw,
            EndCondition::Value | EndCondition::Drop | EndCondition::Derivative => n_raw - 1,
        };
        let hi = if right == EndCondition::Derivative { hi - 1 } else { hi };
        for r in lo..hi {
            functions.push(vec![(r, 1.0)]);
        }
        if right == EndCondition::Derivative {
            functions.push(vec![(n_raw - 2, 1.0), (n_raw - 1, 1.0)]);
        }
        Ok(Self {
            order,
            breaks,
            knots,
            offset: k - 1,
            functions,
        })
    }

    /// Periodic basis on [b_0, b_N] with f(b_N) = sign · f(b_0) (all derivatives).
    pub fn periodic(breaks: Vec<f64>, order: usize, sign: f64) -> Result<Self> {
        check_breaks(&breaks, order)?;
        let k = order;
        let n = breaks.len() - 1;
        if n < k + 1 {
            return Err(Error::Basis("periodic basis needs more spans than the order".into()));
        }
        let period = breaks[n] - breaks[0];
        // Extended knots t_j for j = −(k−1) ..= n + k − 1.
        let mut knots = Vec::with_capacity(n + 2 * k - 1);
        for j in -(k as i64 - 1)..=(n as i64 + k as i64 - 1) {
            let q = j.div_euclid(n as i64);
            let rmd = j.rem_euclid(n as i64) as usize;
            knots.push(breaks[rmd] + q as f64 * period);
        }
        let shift = k - 1;
        let mut functions = Vec::with_capacity(n);
        for j in 0..n {
            // Raw function with support starting at t_j has raw index j + shift.
            if j + k <= n {
                functions.push(vec![(j + shift, 1.0)]);
            } else {
                functions.push(vec![(j + shift, 1.0), (j + shift - n, sign)]);
            }
        }
        Ok(Self {
            order,
            breaks,
            knots,
            offset: shift,
            functions,
        })
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn spans(&self) -> usize {
        self.breaks.len() - 1
    }

    /// Span index containing x (closed at the right end).
    pub fn span_of(&self, x: f64) -> usize {
        let n = self.spans();
        match self.breaks.binary_search_by(|b| b.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Raw B-splines of order k nonzero on span `s` at x: (first raw index,
    /// values, first derivatives).
    pub fn raw_at(&self, s: usize, x: f64) -> (usize, Vec<f64>, Vec<f64>) {
        let k = self.order;
        let mu = s + self.offset;
        let t = &self.knots;
        // Values of order 1..k via the Cox–de Boor triangle.
        let mut vals = vec![0.0; k];
        vals[0] = 1.0;
        let mut left = vec![0.0; k];
        let mut right = vec![0.0; k];
        let mut lower = vec![0.0; k];
        for j in 1..k {
            left[j] = x - t[mu + 1 - j];
            right[j] = t[mu + j] - x;
            let mut saved = 0.0;
            for r in 0..j {
                let temp = vals[r] / (right[r + 1] + left[j - r]);
                vals[r] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            vals[j] = saved;
            if j == k - 2 {
                lower[..k - 1].copy_from_slice(&vals[..k - 1]);
            }
        }
        if k == 1 {
            return (mu, vals, vec![0.0]);
        }
        if k == 2 {
            lower[0] = 1.0;
        }
        // Derivative from order k−1 values: B'_{i,k} = (k−1)[B_{i,k−1}/(t_{i+k−1}−t_i) − B_{i+1,k−1}/(t_{i+k}−t_{i+1})].
        let first = mu + 1 - k;
        let mut ders = vec![0.0; k];
        for (idx, d) in ders.iter_mut().enumerate() {
            let i = first + idx;
            let a = if idx >= 1 {
                let den = t[i + k - 1] - t[i];
                if den > 0.0 {
                    lower[idx - 1] / den
                } else {
                    0.0
                }
            } else {
                0.0
            };
            let b = if idx < k - 1 {
                let den = t[i + k] - t[i + 1];
                if den > 0.0 {
                    lower[idx] / den
                } else {
                    0.0
                }
            } else {
                0.0
            };
            *d = (k - 1) as f64 * (a - b);
        }
        (first, vals, ders)
    }

    /// Final functions active on span `s` with their (value, derivative) at x.
    pub fn eval_span(&self, s: usize, x: f64, map: &SpanMap) -> Vec<(usize, f64, f64)> {
        let (first, vals, ders) = self.raw_at(s, x);
        map.active[s]
            .iter()
            .map(|(f, terms)| {
                let mut v = 0.0;
                let mut d = 0.0;
                for &(raw, c) in terms {
                    let local = raw - first;
                    v += c * vals[local];
                    d += c * ders[local];
                }
                (*f, v, d)
            })
            .collect()
    }

    /// For each span, the final functions supported there and their raw terms.
    pub fn span_map(&self) -> SpanMap {
        let k = self.order;
        let mut active = vec![Vec::new(); self.spans()];
        for (f, terms) in self.functions.iter().enumerate() {
            for s in 0..self.spans() {
                let mu = s + self.offset;
                let first = mu + 1 - k;
                let local: Vec<(usize, f64)> = terms
                    .iter()
                    .filter(|(raw, _)| *raw >= first && *raw <= mu)
                    .cloned()
                    .collect();
                if !local.is_empty() {
                    active[s].push((f, local));
                }
            }
        }
        SpanMap { active }
    }

    /// Value and derivative of a single final function at x.
    pub fn eval_function(&self, f: usize, x: f64) -> (f64, f64) {
        let s = self.span_of(x);
        let (first, vals, ders) = self.raw_at(s, x);
        let mut v = 0.0;
        let mut d = 0.0;
        for &(raw, c) in &self.functions[f] {
            if raw >= first && raw < first + self.order {
                v += c * vals[raw - first];
                d += c * ders[raw - first];
            }
        }
        (v, d)
    }
}

/// Active final functions per span.
#[derive(Debug, Clone)]
pub struct SpanMap {
    pub active: Vec<Vec<(usize, Vec<(usize, f64)>)>>,
}

fn check_breaks(breaks: &[f64], order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::Basis("spline order must be at least 2".into()));
    }
    if breaks.len() < 3 {
        return Err(Error::Basis("need at least two spans".into()));
    }
    if breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Basis("breakpoints must be strictly increasing".into()));
    }
    Ok(())
}

/// Breakpoints on [a, b] whose local density is proportional to
/// 1 + Σ amplitude·exp(−(x−c)²/(2 width²)) over `centres`.
pub fn clustered_breaks(a: f64, b: f64, spans: usize, centres: &[f64], amplitude: f64, width: f64) -> Vec<f64> {
    let density = |x: f64| {
        1.0 + centres
            .iter()
            .map(|c| amplitude * (-(x - c).powi(2) / (2.0 * width * width)).exp())
            .sum::<f64>()
    };
    // Cumulative density on a fine grid, then inverse interpolation.
    let fine = 20_000;
    let h = (b - a) / fine as f64;
    let mut cdf = vec![0.0; fine + 1];
    for i in 0..fine {
        let x0 = a + i as f64 * h;
        cdf[i + 1] = cdf[i] + 0.5 * h * (density(x0) + density(x0 + h));
    }
    let total = cdf[fine];
    let mut out = Vec::with_capacity(spans + 1);
    out.push(a);
    let mut j = 0;
    for s in 1..spans {
        let target = total * s as f64 / spans as f64;
        while cdf[j + 1] < target {
            j += 1;
        }
        let frac = (target - cdf[j]) / (cdf[j + 1] - cdf[j]);
        out.push(a + (j as f64 + frac) * h);
    }
    out.push(b);
    out
}
