//! Root of the rational secular equation `λ d − r = Σ w_i / (λ − λ_i)` above
//! the largest pole.

use crate::error::{Error, Result};

/// Relative width of the cluster of poles treated as one dominant group.
pub const POLE_CLUSTER_TOL: f64 = 1e-9;

const BISECTION_WIDTH: f64 = 1e-8;
const MAX_NEWTON: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct SecularProblem {
    /// Poles `λ_i`, non-increasing.
    pub poles: Vec<f64>,
    /// `|q_i|²`, one per pole.
    pub weights: Vec<f64>,
    pub d: f64,
    pub r: f64,
}

impl SecularProblem {
    pub fn new(poles: Vec<f64>, weights: Vec<f64>, d: f64, r: f64) -> Result<Self> {
        if poles.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} poles but {} weights",
                poles.len(),
                weights.len()
            )));
        }
        if poles.iter().chain(&weights).any(|x| !x.is_finite()) || !d.is_finite() || !r.is_finite() {
            return Err(Error::NonFinite);
        }
        if d <= 0.0 {
            return Err(Error::Input(format!("d must be positive, got {d}")));
        }
        if r < 0.0 {
            return Err(Error::Input(format!("r must be non-negative, got {r}")));
        }
        if weights.iter().any(|&w| w < 0.0) {
            return Err(Error::Input("weights must be non-negative".into()));
        }
        if poles.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Input("poles must be non-increasing".into()));
        }
        Ok(Self { poles, weights, d, r })
    }

    pub fn largest_pole(&self) -> Option<f64> {
        self.poles.first().copied()
    }

    /// `f(λ) = λ d − r − Σ w_i / (λ − λ_i)`.
    pub fn f(&self, lambda: f64) -> f64 {
        lambda * self.d
            - self.r
            - self
                .poles
                .iter()
                .zip(&self.weights)
                .map(|(&p, &w)| if w == 0.0 { 0.0 } else { w / (lambda - p) })
                .sum::<f64>()
    }

    pub fn derivative(&self, lambda: f64) -> f64 {
        self.d
            + self
                .poles
                .iter()
                .zip(&self.weights)
                .map(|(&p, &w)| {
                    let g = lambda - p;
                    w / (g * g)
                })
                .sum::<f64>()
    }

    /// Number of poles in the dominant cluster.
    pub fn dominant_multiplicity(&self) -> usize {
        dominant_multiplicity(&self.poles)
    }

    /// Interval `(λ_1, (dλ_1 + r + √((dλ_1 − r)² + 4d Σw)) / 2d]` that holds the root.
    pub fn interval(&self) -> Option<(f64, f64)> {
        let l1 = self.largest_pole()?;
        let total: f64 = self.weights.iter().sum();
        let a = self.d * l1 - self.r;
        let upper = (self.d * l1 + self.r + (a * a + 4.0 * self.d * total).sqrt()) / (2.0 * self.d);
        Some((l1, upper))
    }
}

/// Count of leading poles within `POLE_CLUSTER_TOL·(1 + |λ_1|)` of `λ_1`.
pub fn dominant_multiplicity(poles: &[f64]) -> usize {
    let Some(&l1) = poles.first() else {
        return 0;
    };
    let tol = POLE_CLUSTER_TOL * (1.0 + l1.abs());
    poles.iter().take_while(|&&p| l1 - p <= tol).count()
}

/// Solve the secular equation for its unique root in the interval above the
/// largest pole.
///
/// Bisection brackets the root to a relative width of `1e-8`, then a
/// safeguarded Newton iteration polishes it. With no poles the equation is
/// linear and the root is `r/d`.
pub fn solve_secular(prob: &SecularProblem) -> Result<f64> {
    let Some((l1, upper)) = prob.interval() else {
        return Ok(prob.r / prob.d);
    };

    let mut lo = l1 + 1e-12 * l1.abs() + 1e-300;
    let f_lo = prob.f(lo);
    if f_lo >= 0.0 {
        return Err(Error::NoRoot { lower: l1, upper });
    }
    // rounding can leave f(upper) marginally negative
    let mut hi = upper;
    if prob.f(hi) < 0.0 {
        hi = upper + 8.0 * f64::EPSILON * upper.abs().max(1.0);
        if prob.f(hi) < 0.0 {
            return Err(Error::NoRoot { lower: l1, upper });
        }
    }
    if hi <= lo {
        // degenerate bracket: the root sits on the lower edge
        return Ok(upper.max(lo).min(hi));
    }

    while hi - lo > BISECTION_WIDTH * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = prob.f(mid);
        if fm == 0.0 {
            return Ok(mid.min(upper));
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Polish with Newton inside the bracket. Near a pole Newton from the
    // left only doubles the gap per step, so a step that fails to halve the
    // bracket hands over to bisection, which runs until the bracket is two
    // adjacent doubles.
    let mut x = lo;
    let mut newton = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let width = hi - lo;
        let mut next = mid;
        if newton < MAX_NEWTON {
            newton += 1;
            let cand = x - prob.f(x) / prob.derivative(x);
            if cand > lo && cand < hi {
                next = cand;
            }
        }
        let fn_ = prob.f(next);
        if fn_ == 0.0 {
            return Ok(next.min(upper));
        }
        if fn_ < 0.0 {
            lo = next;
        } else {
            hi = next;
        }
        x = next;
        if hi - lo > 0.5 * width {
            newton = MAX_NEWTON;
        }
    }
    let best = if prob.f(hi).abs() < prob.f(lo).abs() { hi } else { lo };
    Ok(best.min(upper))
}
