//! Characteristic surface of the two-station limit walk.
//!
//! For `(β, α)` the rational function
//!
//! ```text
//! p(β, α)  = λ/β + μ1·α + μ2·β/α
//! p₂(β, α) = λ/β + μ1·α + μ2
//! ```
//!
//! gives the one-step expectation of the bracket `[(β,α), y] = β^{y1−y2} α^{y2}`
//! away from (resp. on) the constrained axis `y2 = 0`. The surface
//! `ℋ = {p = 1}` is quadratic in `α` for fixed `β`; its two roots are the
//! conjugate points used to build harmonic functions.
//!
//! Root solving works on the polynomial `μ1α² + (λ/β − 1)α + μ2β = 0`
//! obtained by multiplying `p = 1` by `α`. Its discriminant is `Δ(β)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Rates;
use crate::C64;

/// Residual tolerance for surface membership.
pub const SURFACE_TOL: f64 = 1e-12;

fn nonzero(z: C64, name: &'static str) -> Result<()> {
    if z == C64::new(0.0, 0.0) {
        Err(Error::ZeroArgument(name))
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub beta: C64,
    pub alpha: C64,
}

impl SurfacePoint {
    pub fn new(beta: C64, alpha: C64) -> Self {
        Self { beta, alpha }
    }

    pub fn real(beta: f64, alpha: f64) -> Self {
        Self::new(C64::new(beta, 0.0), C64::new(alpha, 0.0))
    }

    pub fn on_h(&self, rates: &Rates) -> bool {
        eval_p(rates, self.beta, self.alpha).is_ok_and(|p| (p - 1.0).norm() <= SURFACE_TOL)
    }

    pub fn on_h2(&self, rates: &Rates) -> bool {
        eval_p2(rates, self.beta, self.alpha).is_ok_and(|p| (p - 1.0).norm() <= SURFACE_TOL)
    }
}

/// Two points of `ℋ` sharing `β`. `alpha1` is the root of larger modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugatePair {
    pub beta: C64,
    pub alpha1: C64,
    pub alpha2: C64,
}

impl ConjugatePair {
    /// Same pair with the roles of the two roots exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            beta: self.beta,
            alpha1: self.alpha2,
            alpha2: self.alpha1,
        }
    }
}

pub fn eval_p(rates: &Rates, beta: C64, alpha: C64) -> Result<C64> {
    rates.require_stations(2)?;
    nonzero(beta, "beta")?;
    nonzero(alpha, "alpha")?;
    Ok(rates.lambda() / beta + rates.mu(0) * alpha + rates.mu(1) * beta / alpha)
}

pub fn eval_p2(rates: &Rates, beta: C64, alpha: C64) -> Result<C64> {
    rates.require_stations(2)?;
    nonzero(beta, "beta")?;
    Ok(rates.lambda() / beta + rates.mu(0) * alpha + rates.mu(1))
}

/// `Δ(β) = (λ/β − 1)² − 4μ1μ2β`.
pub fn discriminant(rates: &Rates, beta: C64) -> Result<C64> {
    rates.require_stations(2)?;
    nonzero(beta, "beta")?;
    let b = rates.lambda() / beta - 1.0;
    Ok(b * b - 4.0 * rates.mu(0) * rates.mu(1) * beta)
}

/// Conjugate roots `α1, α2` of `p(β, ·) = 1`.
///
/// The larger-modulus root comes from the cancellation-free branch of the
/// quadratic formula; the other follows from `α1·α2 = μ2β/μ1`.
pub fn solve_alpha(rates: &Rates, beta: C64) -> Result<ConjugatePair> {
    let delta = discriminant(rates, beta)?;
    let b = rates.lambda() / beta - 1.0;
    if delta.norm() < 1e-12 * (1.0 + b.norm_sqr()) {
        return Err(Error::DegenerateDiscriminant { beta, delta });
    }
    let sq = delta.sqrt();
    // pick the sign that adds |b| and |sqrt Δ| constructively
    let s = if (b.conj() * sq).re >= 0.0 { sq } else { -sq };
    let q = -(b + s) / 2.0;
    let alpha1 = q / rates.mu(0);
    let alpha2 = rates.mu(1) * beta / q;
    Ok(ConjugatePair {
        beta,
        alpha1,
        alpha2,
    })
}

/// The conjugate of `α` on the same `β`-slice: `μ2β / (μ1α)`.
pub fn conjugate_of(rates: &Rates, beta: C64, alpha: C64) -> Result<C64> {
    rates.require_stations(2)?;
    nonzero(beta, "beta")?;
    nonzero(alpha, "alpha")?;
    Ok(rates.mu(1) * beta / (rates.mu(0) * alpha))
}

/// `ℋ ∩ ℋ₂ = {(0,0), (1,1), (ρ1,ρ1)}`.
pub fn h_intersection(rates: &Rates) -> Result<Vec<SurfacePoint>> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    let r1 = rates.rho(0);
    Ok(vec![
        SurfacePoint::real(0.0, 0.0),
        SurfacePoint::real(1.0, 1.0),
        SurfacePoint::real(r1, r1),
    ])
}

/// Increment indices of the queue-length walk that may be frozen: station 1
/// (`(−1,1)`, frozen on `x1 = 0`) and station 2 (`(0,−1)`, frozen on `x2 = 0`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Frozen {
    pub station1: bool,
    pub station2: bool,
}

impl Frozen {
    pub const NONE: Frozen = Frozen {
        station1: false,
        station2: false,
    };

    /// Builds the set from indices in `{1, 2}`.
    pub fn from_indices(idx: &[usize]) -> Result<Self> {
        let mut out = Self::NONE;
        for &i in idx {
            match i {
                1 => out.station1 = true,
                2 => out.station2 = true,
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "frozen index {i} not in {{1,2}}"
                    )))
                }
            }
        }
        Ok(out)
    }
}

/// `H_a(q) = −log(Σ_{i∉a} p(v_i) e^{−⟨v_i,q⟩} + Σ_{i∈a} p(v_i))` with
/// `v0 = (1,0)`, `v1 = (−1,1)`, `v2 = (0,−1)`.
pub fn hamiltonian(rates: &Rates, q: [f64; 2], frozen: Frozen) -> Result<f64> {
    rates.require_stations(2)?;
    let term = |p: f64, v: [f64; 2], is_frozen: bool| {
        if is_frozen {
            p
        } else {
            p * (-(v[0] * q[0] + v[1] * q[1])).exp()
        }
    };
    let s = term(rates.lambda(), [1.0, 0.0], false)
        + term(rates.mu(0), [-1.0, 1.0], frozen.station1)
        + term(rates.mu(1), [0.0, -1.0], frozen.station2);
    Ok(-s.ln())
}

/// Real roots `β` of `p(β, α) = 1` for each `α` of the grid, as
/// `(α, β)` pairs in grid order, `β` ascending within one `α`.
///
/// Multiplying by `αβ` gives `μ2β² + (μ1α² − α)β + λα = 0`.
pub fn real_section(rates: &Rates, alpha_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    let mut out = Vec::new();
    for &a in alpha_grid {
        if a <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "alpha grid values must be positive, got {a}"
            )));
        }
        let (qa, qb, qc) = (rates.mu(1), rates.mu(0) * a * a - a, rates.lambda() * a);
        out.extend(real_quadratic_roots(qa, qb, qc).into_iter().map(|b| (a, b)));
    }
    Ok(out)
}

/// Real roots of `ax² + bx + c` with `a > 0`, ascending.
fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    let (x1, x2) = (q / a, c / q);
    let mut r = vec![x1.min(x2), x1.max(x2)];
    r.dedup();
    r
}
