//! Network parameters, lattice points and the two walks.
//!
//! `X` is the queue-length walk, constrained to the nonnegative orthant.
//! `Y = T_n(X)` is the same walk seen from the exit corner `(n, 0, ..)`;
//! as `n → ∞` its first coordinate becomes unconstrained.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative gap under which `μ1` and `μ2` are treated as equal.
pub const EQUAL_RATES_TOL: f64 = 1e-9;

/// Arrival and service rates, normalized so that `λ + Σ μ_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates {
    lambda: f64,
    mu: Vec<f64>,
}

/// JSON form of [`Rates`]: `{"lambda": r, "mu": [r, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesConfig {
    pub lambda: f64,
    pub mu: Vec<f64>,
}

impl Rates {
    /// Builds normalized rates from arbitrary positive weights.
    ///
    /// Unstable parameter sets are accepted here; operations that need
    /// stability call [`Rates::require_stable`].
    pub fn new(lambda: f64, mu: &[f64]) -> Result<Self> {
        if !(2..=3).contains(&mu.len()) {
            return Err(Error::InvalidRates(format!(
                "need 2 or 3 service rates, got {}",
                mu.len()
            )));
        }
        let all = std::iter::once(&lambda).chain(mu);
        if let Some(bad) = all.clone().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::InvalidRates(format!(
                "rates must be finite and positive, got {bad}"
            )));
        }
        let total: f64 = all.sum();
        Ok(Self {
            lambda: lambda / total,
            mu: mu.iter().map(|m| m / total).collect(),
        })
    }

    pub fn two(lambda: f64, mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(lambda, &[mu1, mu2])
    }

    pub fn three(lambda: f64, mu1: f64, mu2: f64, mu3: f64) -> Result<Self> {
        Self::new(lambda, &[mu1, mu2, mu3])
    }

    pub fn from_config(cfg: &RatesConfig) -> Result<Self> {
        Self::new(cfg.lambda, &cfg.mu)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RatesConfig = serde_json::from_str(text)
            .map_err(|e| Error::InvalidRates(format!("bad rates JSON: {e}")))?;
        Self::from_config(&cfg)
    }

    pub fn to_config(&self) -> RatesConfig {
        RatesConfig {
            lambda: self.lambda,
            mu: self.mu.clone(),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Service rate of station `i` (zero-based).
    pub fn mu(&self, i: usize) -> f64 {
        self.mu[i]
    }

    pub fn mus(&self) -> &[f64] {
        &self.mu
    }

    pub fn stations(&self) -> usize {
        self.mu.len()
    }

    /// Utilization `ρ_i = λ/μ_i` of station `i` (zero-based).
    pub fn rho(&self, i: usize) -> f64 {
        self.lambda / self.mu[i]
    }

    pub fn total(&self) -> f64 {
        self.lambda + self.mu.iter().sum::<f64>()
    }

    pub fn stable(&self) -> bool {
        self.mu.iter().all(|&m| self.lambda < m)
    }

    pub fn require_stable(&self) -> Result<()> {
        if self.stable() {
            Ok(())
        } else {
            Err(Error::UnstableRates {
                lambda: self.lambda,
                mu: self.mu.clone(),
            })
        }
    }

    pub fn require_stations(&self, expected: usize) -> Result<()> {
        if self.stations() == expected {
            Ok(())
        } else {
            Err(Error::StationCount {
                expected,
                got: self.stations(),
            })
        }
    }

    /// True when `|μ1 − μ2| / (μ1 + μ2)` is below [`EQUAL_RATES_TOL`].
    pub fn equal_service(&self) -> bool {
        let (a, b) = (self.mu[0], self.mu[1]);
        (a - b).abs() / (a + b) < EQUAL_RATES_TOL
    }
}

/// Integer point of dimension 2 or 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticePoint {
    coords: [i64; 3],
    dim: usize,
}

impl LatticePoint {
    pub fn new(coords: &[i64]) -> Result<Self> {
        match coords.len() {
            2 => Ok(Self::d2(coords[0], coords[1])),
            3 => Ok(Self::d3(coords[0], coords[1], coords[2])),
            n => Err(Error::InvalidPoint(format!("{coords:?} has dimension {n}"))),
        }
    }

    pub const fn d2(a: i64, b: i64) -> Self {
        Self {
            coords: [a, b, 0],
            dim: 2,
        }
    }

    pub const fn d3(a: i64, b: i64, c: i64) -> Self {
        Self {
            coords: [a, b, c],
            dim: 3,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim]
    }

    /// Zero-based coordinate access.
    pub fn get(&self, i: usize) -> i64 {
        self.coords()[i]
    }

    pub fn sum(&self) -> i64 {
        self.coords().iter().sum()
    }

    /// `y(1) − Σ_{i≥2} y(i)`: signed distance to the exit face `∂B`.
    pub fn gap(&self) -> i64 {
        self.coords[0] - self.coords[1..self.dim].iter().sum::<i64>()
    }

    pub fn is_origin(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    pub fn add(&self, v: &Increment) -> Self {
        let mut out = *self;
        for i in 0..self.dim {
            out.coords[i] += v.delta[i];
        }
        out
    }

    pub fn in_domain(&self, kind: WalkKind) -> bool {
        let first = match kind {
            WalkKind::ConstrainedX => 0,
            WalkKind::LimitY => 1,
        };
        self.coords()[first..].iter().all(|&c| c >= 0)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WalkKind {
    /// Queue lengths; every coordinate is kept nonnegative.
    ConstrainedX,
    /// Limit walk; only coordinates `2..d` are kept nonnegative.
    LimitY,
}

/// One jump of a walk together with its probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Increment {
    pub delta: [i64; 3],
    pub prob: f64,
}

const X2: [[i64; 3]; 3] = [[1, 0, 0], [-1, 1, 0], [0, -1, 0]];
const X3: [[i64; 3]; 4] = [[1, 0, 0], [-1, 1, 0], [0, -1, 1], [0, 0, -1]];
const Y2: [[i64; 3]; 3] = [[-1, 0, 0], [1, 1, 0], [0, -1, 0]];
const Y3: [[i64; 3]; 4] = [[-1, 0, 0], [1, 1, 0], [0, -1, 1], [0, 0, -1]];

impl WalkKind {
    /// Increments in the order arrival, station 1, station 2[, station 3],
    /// weighted by the matching rate.
    pub fn increments(self, rates: &Rates) -> Vec<Increment> {
        let deltas: &[[i64; 3]] = match (self, rates.stations()) {
            (WalkKind::ConstrainedX, 2) => &X2,
            (WalkKind::ConstrainedX, _) => &X3,
            (WalkKind::LimitY, 2) => &Y2,
            (WalkKind::LimitY, _) => &Y3,
        };
        let probs = std::iter::once(rates.lambda()).chain(rates.mus().iter().copied());
        deltas
            .iter()
            .zip(probs)
            .map(|(&delta, prob)| Increment { delta, prob })
            .collect()
    }
}

/// `y + v` if it stays in the walk's domain, otherwise `y` (frozen step).
pub fn constrained_step(kind: WalkKind, y: &LatticePoint, v: &Increment) -> LatticePoint {
    let next = y.add(v);
    if next.in_domain(kind) {
        next
    } else {
        *y
    }
}

/// `T_n`: maps the first coordinate to `n − x(1)` and copies the rest.
/// It is an involution.
pub fn transform_tn(n: i64, x: &LatticePoint) -> LatticePoint {
    let mut y = *x;
    y.coords[0] = n - x.coords[0];
    y
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Membership {
    Interior,
    ExitBoundary,
    Origin,
    OutOfDomain,
}

/// Classifies a nonnegative point against `A_n = {x: Σ x(i) ≤ n}`.
pub fn boundary_membership(n: i64, p: &LatticePoint) -> Membership {
    let s = p.sum();
    if p.is_origin() {
        Membership::Origin
    } else if s == n {
        Membership::ExitBoundary
    } else if s > n {
        Membership::OutOfDomain
    } else {
        Membership::Interior
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inc(kind: WalkKind, rates: &Rates, delta: [i64; 3]) -> Increment {
        *kind
            .increments(rates)
            .iter()
            .find(|v| v.delta == delta)
            .unwrap()
    }

    #[test]
    fn frozen_and_free_steps() {
        let r = Rates::two(0.1, 0.4, 0.5).unwrap();
        let x = WalkKind::ConstrainedX;
        let y = WalkKind::LimitY;
        assert_eq!(
            constrained_step(x, &LatticePoint::d2(1, 0), &inc(x, &r, [0, -1, 0])),
            LatticePoint::d2(1, 0)
        );
        assert_eq!(
            constrained_step(y, &LatticePoint::d2(-3, 2), &inc(y, &r, [-1, 0, 0])),
            LatticePoint::d2(-4, 2)
        );
        assert_eq!(
            constrained_step(y, &LatticePoint::d2(5, 0), &inc(y, &r, [0, -1, 0])),
            LatticePoint::d2(5, 0)
        );
    }

    #[test]
    fn tn_examples() {
        assert_eq!(
            transform_tn(60, &LatticePoint::d2(1, 0)),
            LatticePoint::d2(59, 0)
        );
        assert_eq!(
            transform_tn(10, &LatticePoint::d2(10, 0)),
            LatticePoint::d2(0, 0)
        );
        assert_eq!(
            transform_tn(7, &LatticePoint::d3(2, 3, 1)),
            LatticePoint::d3(5, 3, 1)
        );
    }

    #[test]
    fn tn_involution_exhaustive() {
        for n in 1..12 {
            for a in -3..15 {
                for b in 0..15 {
                    let p = LatticePoint::d2(a, b);
                    assert_eq!(transform_tn(n, &transform_tn(n, &p)), p);
                    let q = LatticePoint::d3(a, b, n - 1);
                    assert_eq!(transform_tn(n, &transform_tn(n, &q)), q);
                }
            }
        }
    }

    #[test]
    fn membership_examples() {
        assert_eq!(
            boundary_membership(60, &LatticePoint::d2(30, 30)),
            Membership::ExitBoundary
        );
        assert_eq!(
            boundary_membership(60, &LatticePoint::d2(0, 0)),
            Membership::Origin
        );
        assert_eq!(
            boundary_membership(60, &LatticePoint::d2(9, 0)),
            Membership::Interior
        );
        assert_eq!(
            boundary_membership(5, &LatticePoint::d3(2, 2, 2)),
            Membership::OutOfDomain
        );
    }

    #[test]
    fn normalization() {
        let r = Rates::new(2.0, &[8.0, 10.0]).unwrap();
        assert!((r.total() - 1.0).abs() <= f64::EPSILON);
        assert!((r.rho(0) - 0.25).abs() < 1e-15);
        assert!((r.rho(1) - 0.2).abs() < 1e-15);
        for kind in [WalkKind::ConstrainedX, WalkKind::LimitY] {
            let s: f64 = kind.increments(&r).iter().map(|v| v.prob).sum();
            assert!((s - 1.0).abs() <= f64::EPSILON);
        }
        let r3 = Rates::three(0.1, 0.4, 0.5, 0.3).unwrap();
        assert_eq!(WalkKind::LimitY.increments(&r3).len(), 4);
    }

    #[test]
    fn rejects_bad_rates() {
        assert!(Rates::new(0.0, &[1.0, 1.0]).is_err());
        assert!(Rates::new(0.1, &[1.0]).is_err());
        assert!(Rates::new(0.1, &[1.0, f64::NAN]).is_err());
        let unstable = Rates::two(0.5, 0.4, 0.6).unwrap();
        assert!(!unstable.stable());
        assert!(matches!(
            unstable.require_stable(),
            Err(Error::UnstableRates { .. })
        ));
    }

    #[test]
    fn json_config() {
        let r = Rates::from_json(r#"{"lambda": 0.1, "mu": [0.4, 0.5]}"#).unwrap();
        assert_eq!(r, Rates::two(0.1, 0.4, 0.5).unwrap());
        assert!(Rates::from_json(r#"{"lambda": 0.1}"#).is_err());
    }

    #[test]
    fn equal_rates_detection() {
        assert!(Rates::two(0.1, 0.45, 0.45 * (1.0 + 1e-12))
            .unwrap()
            .equal_service());
        assert!(!Rates::two(0.1, 0.45, 0.45 * (1.0 + 1e-5))
            .unwrap()
            .equal_service());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn steps_stay_in_domain(a in -20i64..20, b in 0i64..20, c in 0i64..20, k in 0usize..4) {
                let r = Rates::three(0.1, 0.4, 0.5, 0.3).unwrap();
                let x = LatticePoint::d3(a.abs(), b, c);
                let vx = WalkKind::ConstrainedX.increments(&r)[k];
                let nx = constrained_step(WalkKind::ConstrainedX, &x, &vx);
                prop_assert!(nx.coords().iter().all(|&v| v >= 0));

                let y = LatticePoint::d3(a, b, c);
                let vy = WalkKind::LimitY.increments(&r)[k];
                let ny = constrained_step(WalkKind::LimitY, &y, &vy);
                prop_assert!(ny.get(1) >= 0 && ny.get(2) >= 0);
            }
        }
    }
}
