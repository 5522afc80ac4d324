//! Log-linear harmonic functions of the limit walk `Y` and the closed-form
//! hitting probability `W*(y) = P_y(τ < ∞)`.
//!
//! A bracket `[(β, α), y] = β^{y(1)−y(2)} α^{y(2)}` solves the interior
//! equation `V(y) = E_y V(Y_1)` whenever `(β, α)` lies on the characteristic
//! surface. The boundary equation on `∂₂ = {y(2) = 0}` picks out special
//! combinations:
//!
//! * single brackets with `(β, α) ∈ ℋ ∩ ℋ₂`, i.e. `(ρ1, ρ1)`;
//! * conjugate pairs `h_β = C(β,α2)[(β,α1),·] − C(β,α1)[(β,α2),·]` with
//!   `C(β,α) = μ2(1 − β/α)`.
//!
//! `W*` is the superposition of `h_{ρ2}` and `[(ρ1,ρ1),·]` that equals one on
//! `∂B = {y(1) = y(2)}`.

use std::ops::{Add, Mul};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::charsurface::{self, ConjugatePair, SurfacePoint};
use crate::error::{Error, Result};
use crate::model::{constrained_step, LatticePoint, Rates, WalkKind, EQUAL_RATES_TOL};
use crate::C64;

/// Tolerance on the imaginary part (relative to the modulus) when a complex
/// combination is read as a real number.
pub const IMAG_TOL: f64 = 1e-12;

/// `coeff · β^{y(1) − Σ_{i≥2} y(i)} · Π α_i^{y(i+1)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearTerm {
    pub coeff: C64,
    pub beta: C64,
    pub alphas: Vec<C64>,
}

impl LogLinearTerm {
    pub fn new(coeff: C64, beta: C64, alphas: Vec<C64>) -> Self {
        Self {
            coeff,
            beta,
            alphas,
        }
    }

    pub fn real(coeff: f64, beta: f64, alphas: &[f64]) -> Self {
        Self::new(
            C64::new(coeff, 0.0),
            C64::new(beta, 0.0),
            alphas.iter().map(|&a| C64::new(a, 0.0)).collect(),
        )
    }

    pub fn eval(&self, y: &LatticePoint) -> C64 {
        debug_assert_eq!(self.alphas.len() + 1, y.dim());
        let mut v = self.coeff * ipow(self.beta, y.gap());
        for (i, a) in self.alphas.iter().enumerate() {
            v *= ipow(*a, y.get(i + 1));
        }
        v
    }
}

fn ipow(z: C64, k: i64) -> C64 {
    if z.im == 0.0 {
        C64::new(z.re.powi(k as i32), 0.0)
    } else {
        z.powi(k as i32)
    }
}

/// Finite sum of [`LogLinearTerm`]s over points of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLinearCombination {
    dim: usize,
    terms: Vec<LogLinearTerm>,
}

impl LogLinearCombination {
    pub fn new(dim: usize, terms: Vec<LogLinearTerm>) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidArgument(format!("dimension {dim}")));
        }
        if let Some(t) = terms.iter().find(|t| t.alphas.len() + 1 != dim) {
            return Err(Error::InvalidArgument(format!(
                "term with {} alphas in a {dim}-dimensional combination",
                t.alphas.len()
            )));
        }
        Ok(Self { dim, terms })
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: Vec::new(),
        }
    }

    /// The bracket `[(β, α), ·]` in two dimensions.
    pub fn bracket(beta: C64, alpha: C64) -> Self {
        Self {
            dim: 2,
            terms: vec![LogLinearTerm::new(C64::new(1.0, 0.0), beta, vec![alpha])],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[LogLinearTerm] {
        &self.terms
    }

    pub fn eval(&self, y: &LatticePoint) -> C64 {
        self.terms.iter().map(|t| t.eval(y)).sum()
    }

    /// Real value; fails if the imaginary part is not negligible.
    pub fn eval_real(&self, y: &LatticePoint) -> Result<f64> {
        let v = self.eval(y);
        if v.im.abs() <= IMAG_TOL * v.norm() {
            Ok(v.re)
        } else {
            Err(Error::ComplexValue(v))
        }
    }

    pub fn scale(mut self, k: C64) -> Self {
        for t in &mut self.terms {
            t.coeff *= k;
        }
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("combination serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

impl Add for LogLinearCombination {
    type Output = LogLinearCombination;

    fn add(mut self, rhs: Self) -> Self {
        assert_eq!(
            self.dim, rhs.dim,
            "adding combinations of different dimension"
        );
        self.terms.extend(rhs.terms);
        self
    }
}

impl Mul<C64> for LogLinearCombination {
    type Output = LogLinearCombination;

    fn mul(self, k: C64) -> Self {
        self.scale(k)
    }
}

impl Mul<f64> for LogLinearCombination {
    type Output = LogLinearCombination;

    fn mul(self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coeff: [f64; 2],
    beta: [f64; 2],
    alphas: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CombinationRepr {
    terms: Vec<TermRepr>,
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

fn unpair(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

impl Serialize for LogLinearCombination {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CombinationRepr {
            terms: self
                .terms
                .iter()
                .map(|t| TermRepr {
                    coeff: pair(t.coeff),
                    beta: pair(t.beta),
                    alphas: t.alphas.iter().copied().map(pair).collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LogLinearCombination {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = CombinationRepr::deserialize(d)?;
        let terms: Vec<LogLinearTerm> = repr
            .terms
            .into_iter()
            .map(|t| {
                LogLinearTerm::new(
                    unpair(t.coeff),
                    unpair(t.beta),
                    t.alphas.into_iter().map(unpair).collect(),
                )
            })
            .collect();
        // dimension comes from the terms; an empty sum defaults to 2
        let dim = terms.first().map_or(2, |t| t.alphas.len() + 1);
        LogLinearCombination::new(dim, terms).map_err(D::Error::custom)
    }
}

/// `C(β, α) = μ2(1 − β/α)`.
pub fn coeff_c(rates: &Rates, beta: C64, alpha: C64) -> Result<C64> {
    rates.require_stations(2)?;
    if alpha == C64::new(0.0, 0.0) {
        return Err(Error::ZeroArgument("alpha"));
    }
    Ok(rates.mu(1) * (1.0 - beta / alpha))
}

/// `h_β` built from an explicit conjugate pair; exchanging the roots negates it.
pub fn h_from_pair(rates: &Rates, pair: &ConjugatePair) -> Result<LogLinearCombination> {
    let c1 = coeff_c(rates, pair.beta, pair.alpha1)?;
    let c2 = coeff_c(rates, pair.beta, pair.alpha2)?;
    Ok(LogLinearCombination::bracket(pair.beta, pair.alpha1) * c2
        + LogLinearCombination::bracket(pair.beta, pair.alpha2) * (-c1))
}

/// `h_β = C(β,α2)[(β,α1),·] − C(β,α1)[(β,α2),·]` for the roots of
/// [`charsurface::solve_alpha`] (`α1` the larger in modulus).
pub fn make_h_beta(rates: &Rates, beta: C64) -> Result<LogLinearCombination> {
    let pair = charsurface::solve_alpha(rates, beta)?;
    h_from_pair(rates, &pair)
}

fn check_b_point(y: &LatticePoint) -> Result<()> {
    if y.dim() != 2 || y.get(1) < 0 || y.gap() < 0 {
        return Err(Error::InvalidPoint(format!("{y}: need y(1) >= y(2) >= 0")));
    }
    Ok(())
}

fn require_distinct_2(rates: &Rates) -> Result<()> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    if rates.equal_service() {
        return Err(Error::EqualRates);
    }
    Ok(())
}

/// `W*` as a log-linear combination:
/// `h_{ρ2}/C(ρ2,ρ1) + C(ρ2,1)/C(ρ2,ρ1)·[(ρ1,ρ1),·]`.
pub fn w_star_combination(rates: &Rates) -> Result<LogLinearCombination> {
    require_distinct_2(rates)?;
    let (r1, r2) = (C64::new(rates.rho(0), 0.0), C64::new(rates.rho(1), 0.0));
    let one = C64::new(1.0, 0.0);
    let h = h_from_pair(
        rates,
        &ConjugatePair {
            beta: r2,
            alpha1: one,
            alpha2: r1,
        },
    )?;
    let c21 = coeff_c(rates, r2, r1)?;
    let c2one = coeff_c(rates, r2, one)?;
    Ok(h * (one / c21) + LogLinearCombination::bracket(r1, r1) * (c2one / c21))
}

/// `P_y(τ < ∞)` for the two-station limit walk, `μ1 ≠ μ2`.
///
/// Evaluated as `ρ2^d + c·ρ1^{y2}(ρ1^d − ρ2^d)` with `d = y1 − y2` and
/// `c = (μ2 − λ)/(μ2 − μ1)`, which is exactly one on `∂B`.
pub fn w_star_2d(rates: &Rates, y: &LatticePoint) -> Result<f64> {
    require_distinct_2(rates)?;
    check_b_point(y)?;
    let (r1, r2) = (rates.rho(0), rates.rho(1));
    let (lam, m1, m2) = (rates.lambda(), rates.mu(0), rates.mu(1));
    let c = (m2 - lam) / (m2 - m1);
    let d = y.gap() as i32;
    Ok(r2.powi(d) + c * r1.powi(y.get(1) as i32) * (r1.powi(d) - r2.powi(d)))
}

/// `ln W*(y)`, usable where `W*` underflows. Diagnostic only; the linear
/// evaluation in [`w_star_2d`] is the reference.
pub fn w_star_2d_ln(rates: &Rates, y: &LatticePoint) -> Result<f64> {
    require_distinct_2(rates)?;
    check_b_point(y)?;
    let (l1, l2) = (rates.rho(0).ln(), rates.rho(1).ln());
    let (lam, m1, m2) = (rates.lambda(), rates.mu(0), rates.mu(1));
    let d = y.gap() as f64;
    if d == 0.0 {
        return Ok(0.0);
    }
    // c and (ρ1^d − ρ2^d) always share a sign, so both summands are positive
    let c = ((m2 - lam) / (m2 - m1)).abs();
    let (hi, lo) = (l1.max(l2), l1.min(l2));
    let ln_diff = d * hi + (-(d * (lo - hi)).exp()).ln_1p();
    let a = d * l2;
    let b = c.ln() + y.get(1) as f64 * l1 + ln_diff;
    let m = a.max(b);
    Ok(m + ((a - m).exp() + (b - m).exp()).ln())
}

/// `P_y(τ < ∞)` when `μ1 = μ2 = μ`:
/// `ρ^{y1−y2} + (μ−λ)/μ · ρ^{y1} · (y1 − y2)`.
pub fn w_equal_rates(rates: &Rates, y: &LatticePoint) -> Result<f64> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    if !rates.equal_service() {
        return Err(Error::RatesNotEqual);
    }
    check_b_point(y)?;
    let mu = 0.5 * (rates.mu(0) + rates.mu(1));
    let rho = rates.lambda() / mu;
    let d = y.gap();
    Ok(rho.powi(d as i32) + (mu - rates.lambda()) / mu * rho.powi(y.get(0) as i32) * d as f64)
}

/// Routes to [`w_equal_rates`] or [`w_star_2d`] on the `μ1 = μ2` test.
pub fn w_approx(rates: &Rates, y: &LatticePoint) -> Result<f64> {
    if rates.stations() == 2 && rates.equal_service() {
        w_equal_rates(rates, y)
    } else {
        w_star_2d(rates, y)
    }
}

struct Tandem3 {
    rho: [f64; 3],
    c1: f64,
    c2: f64,
    c3: f64,
}

impl Tandem3 {
    fn new(rates: &Rates) -> Result<Self> {
        rates.require_stations(3)?;
        rates.require_stable()?;
        let m = rates.mus();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            if (m[i] - m[j]).abs() / (m[i] + m[j]) < EQUAL_RATES_TOL {
                return Err(Error::EqualRates3d);
            }
        }
        let lam = rates.lambda();
        let c2 = (m[1] - lam) / (m[1] - m[0]);
        let c3 = (m[2] - lam) / (m[2] - m[1]);
        // forced by the boundary equation on {y(3) = 0}
        let c1 = c2 * (m[2] - m[1]) / (m[2] - m[0]);
        Ok(Self {
            rho: [rates.rho(0), rates.rho(1), rates.rho(2)],
            c1,
            c2,
            c3,
        })
    }
}

fn check_b3_point(y: &LatticePoint) -> Result<()> {
    if y.dim() != 3 || y.get(1) < 0 || y.get(2) < 0 || y.gap() < 0 {
        return Err(Error::InvalidPoint(format!(
            "{y}: need y(1) >= y(2) + y(3), y(2), y(3) >= 0"
        )));
    }
    Ok(())
}

/// `h_{ρ3} + c3·h_{ρ2} + c1·c3·h_{ρ1}` for three tandem stations, as a
/// seven-term combination.
pub fn w_star_3d_combination(rates: &Rates) -> Result<LogLinearCombination> {
    let t = Tandem3::new(rates)?;
    let [r1, r2, r3] = t.rho;
    let (c1, c2, c3) = (t.c1, t.c2, t.c3);
    LogLinearCombination::new(
        3,
        vec![
            LogLinearTerm::real(1.0, r3, &[1.0, 1.0]),
            LogLinearTerm::real(-c3, r3, &[1.0, r2]),
            LogLinearTerm::real(-c3 * c1, r3, &[r1, r1]),
            LogLinearTerm::real(c3 * c2, r3, &[r1, r2]),
            LogLinearTerm::real(c3, r2, &[1.0, r2]),
            LogLinearTerm::real(-c3 * c2, r2, &[r1, r2]),
            LogLinearTerm::real(c1 * c3, r1, &[r1, r1]),
        ],
    )
}

/// `P_y(τ < ∞)` for three tandem stations with pairwise distinct rates.
pub fn w_star_3d(rates: &Rates, y: &LatticePoint) -> Result<f64> {
    let t = Tandem3::new(rates)?;
    check_b3_point(y)?;
    let [r1, r2, r3] = t.rho;
    let d = y.gap() as i32;
    let (y2, y3) = (y.get(1) as i32, y.get(2) as i32);
    let (p1, p2, p3) = (r1.powi(d), r2.powi(d), r3.powi(d));
    Ok(
        p3 + t.c3 * r2.powi(y3) * (p2 - p3) - t.c3 * t.c2 * r1.powi(y2) * r2.powi(y3) * (p2 - p3)
            + t.c3 * t.c1 * r1.powi(y2 + y3) * (p1 - p3),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisResidual {
    /// One-based coordinate index of the constrained axis.
    pub axis: usize,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_interior_residual: f64,
    pub max_boundary_residual: Vec<AxisResidual>,
    pub points_checked: usize,
}

impl ResidualReport {
    pub fn max_residual(&self) -> f64 {
        self.max_boundary_residual
            .iter()
            .map(|a| a.max)
            .fold(self.max_interior_residual, f64::max)
    }

    pub fn is_harmonic(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Exhaustive default box: `{0 ≤ y2 ≤ 30, y2 ≤ y1 ≤ y2 + 60}` in two
/// dimensions, `{0 ≤ y2, y3 ≤ 15, 0 ≤ y1 − y2 − y3 ≤ 30}` in three.
pub fn default_sample(dim: usize) -> Vec<LatticePoint> {
    match dim {
        2 => (0..=30)
            .flat_map(|y2| (0..=60).map(move |d| LatticePoint::d2(y2 + d, y2)))
            .collect(),
        _ => (0..=15)
            .flat_map(|y2| {
                (0..=15).flat_map(move |y3| {
                    (0..=30).map(move |d| LatticePoint::d3(d + y2 + y3, y2, y3))
                })
            })
            .collect(),
    }
}

/// Per-point `|f(y) − Σ_v p(v) f(π(y + v))|`, split by boundary stratum.
///
/// A point counts towards every constrained axis on which it sits; points
/// on no constrained axis are interior.
pub fn residual_check(
    rates: &Rates,
    kind: WalkKind,
    f: &LogLinearCombination,
    sample: &[LatticePoint],
) -> ResidualReport {
    let incs = kind.increments(rates);
    let dim = rates.stations();
    let first_axis = match kind {
        WalkKind::ConstrainedX => 0,
        WalkKind::LimitY => 1,
    };
    let axes: Vec<usize> = (first_axis..dim).collect();

    let per_point: Vec<(f64, Vec<bool>)> = sample
        .par_iter()
        .map(|y| {
            let expected: C64 = incs
                .iter()
                .map(|v| v.prob * f.eval(&constrained_step(kind, y, v)))
                .sum();
            let res = (f.eval(y) - expected).norm();
            let on: Vec<bool> = axes.iter().map(|&i| y.get(i) == 0).collect();
            (res, on)
        })
        .collect();

    let mut interior = 0.0f64;
    let mut bnd: Vec<AxisResidual> = axes
        .iter()
        .map(|&i| AxisResidual {
            axis: i + 1,
            max: 0.0,
            points: 0,
        })
        .collect();
    for (res, on) in &per_point {
        if on.iter().any(|&b| b) {
            for (slot, _) in bnd.iter_mut().zip(on).filter(|(_, &b)| b) {
                slot.max = slot.max.max(*res);
                slot.points += 1;
            }
        } else {
            interior = interior.max(*res);
        }
    }
    ResidualReport {
        max_interior_residual: interior,
        max_boundary_residual: bnd,
        points_checked: sample.len(),
    }
}

/// Candidate function for a Balayage fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisElement {
    /// `h_β` from the conjugate roots of `β`.
    Conjugate(C64),
    /// A single bracket `[(β, α), ·]`; needs `(β, α) ∈ ℋ ∩ ℋ₂`.
    Bracket { beta: C64, alpha: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BalayageFit {
    pub weights: Vec<C64>,
    /// `max_{y ∈ samples} |Σ w_i f_i(y) − target(y)|`.
    pub max_boundary_error: f64,
    pub combination: LogLinearCombination,
}

const MODULUS_SLACK: f64 = 1e-12;

/// `h_β` if `|β| < 1` and both conjugate roots satisfy `|α| ≤ 1`, the
/// condition under which it is bounded on `B`.
pub fn admissible_h_beta(rates: &Rates, beta: C64) -> Result<LogLinearCombination> {
    admissible(rates, &BasisElement::Conjugate(beta))
}

fn admissible(rates: &Rates, el: &BasisElement) -> Result<LogLinearCombination> {
    let beta = match *el {
        BasisElement::Conjugate(b) | BasisElement::Bracket { beta: b, .. } => b,
    };
    let reject = |reason: String| Error::InadmissibleBasisElement { beta, reason };
    if beta.norm() >= 1.0 {
        return Err(reject(format!("|beta| = {} is not below 1", beta.norm())));
    }
    match *el {
        BasisElement::Conjugate(_) => {
            let pair = charsurface::solve_alpha(rates, beta).map_err(|e| reject(e.to_string()))?;
            for a in [pair.alpha1, pair.alpha2] {
                if a.norm() > 1.0 + MODULUS_SLACK {
                    return Err(reject(format!("conjugate root {a} has modulus above 1")));
                }
            }
            h_from_pair(rates, &pair)
        }
        BasisElement::Bracket { alpha, .. } => {
            if alpha.norm() > 1.0 + MODULUS_SLACK {
                return Err(reject(format!("alpha {alpha} has modulus above 1")));
            }
            let pt = SurfacePoint::new(beta, alpha);
            if !(pt.on_h(rates) && pt.on_h2(rates)) {
                return Err(reject(format!("({beta}, {alpha}) is not on H ∩ H2")));
            }
            Ok(LogLinearCombination::bracket(beta, alpha))
        }
    }
}

/// Least-squares superposition of `Y`-harmonic basis functions matching
/// `target` on boundary samples `y(1) = y(2)`.
///
/// The maximum deviation on the samples bounds the error of the fitted
/// function as an approximation of `E_y[f(Y_τ) 1{τ<∞}]` throughout `B`.
pub fn balayage_fit(
    rates: &Rates,
    basis: &[BasisElement],
    target: &[f64],
    samples: &[LatticePoint],
) -> Result<BalayageFit> {
    rates.require_stations(2)?;
    if target.len() != samples.len() {
        return Err(Error::InvalidArgument(format!(
            "{} targets for {} samples",
            target.len(),
            samples.len()
        )));
    }
    if let Some(y) = samples
        .iter()
        .find(|y| y.dim() != 2 || y.gap() != 0 || y.get(1) < 0)
    {
        return Err(Error::InvalidPoint(format!("{y} is not on the exit face")));
    }
    let funcs = basis
        .iter()
        .map(|el| admissible(rates, el))
        .collect::<Result<Vec<_>>>()?;
    let (m, k) = (samples.len(), funcs.len());
    if k == 0 || m < k {
        return Err(Error::RankDeficientBasis);
    }

    let a = DMatrix::from_fn(m, k, |i, j| funcs[j].eval(&samples[i]));
    let b = DVector::from_iterator(m, target.iter().map(|&t| C64::new(t, 0.0)));
    let qr = a.qr();
    let r = qr.r();
    let diag_max = (0..k).map(|i| r[(i, i)].norm()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].norm() <= 1e-12 * diag_max) || diag_max == 0.0 {
        return Err(Error::RankDeficientBasis);
    }
    let qtb = qr.q().adjoint() * &b;
    let w = r
        .solve_upper_triangular(&qtb)
        .ok_or(Error::RankDeficientBasis)?;

    let weights: Vec<C64> = w.iter().copied().collect();
    let combination = funcs
        .into_iter()
        .zip(&weights)
        .fold(LogLinearCombination::zero(2), |acc, (f, &wi)| acc + f * wi);
    let max_boundary_error = samples
        .iter()
        .zip(target)
        .map(|(y, &t)| (combination.eval(y) - t).norm())
        .fold(0.0, f64::max);
    Ok(BalayageFit {
        weights,
        max_boundary_error,
        combination,
    })
}

/// Exit probability of a constrained diffusion on `ℝ × ℝ₊` with drift
/// `(2a+b, a−b)` and covariance `(1/3)[[2,1],[1,2]]`:
///
/// ```text
/// V(x) = e^{−3(a+2b)(x1−x2)} + k e^{−3(a+2b)(x1−x2)} e^{−3(2a+b)x2} − k e^{−3(2a+b)x1},
/// k = (a+2b)/(a−b)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionAnalog {
    a: f64,
    b: f64,
}

impl DiffusionAnalog {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "diffusion parameters must be positive, got a={a}, b={b}"
            )));
        }
        if a == b {
            return Err(Error::InvalidArgument("a = b is degenerate".into()));
        }
        Ok(Self { a, b })
    }

    /// The formula itself, without the domain check; it extends smoothly
    /// past `∂B` and `x2 = 0`.
    pub fn value(&self, x: [f64; 2]) -> f64 {
        let (a, b) = (self.a, self.b);
        let k = (a + 2.0 * b) / (a - b);
        let e1 = (-3.0 * (a + 2.0 * b) * (x[0] - x[1])).exp();
        let e2 = (-3.0 * (2.0 * a + b) * x[1]).exp();
        let e3 = (-3.0 * (2.0 * a + b) * x[0]).exp();
        e1 + k * e1 * e2 - k * e3
    }

    /// `L V(x)` by fourth-order central differences with step `h`, where
    /// `L f = (2a+b) ∂1 f + (a−b) ∂2 f + (∂11 f + ∂12 f + ∂22 f)/3`.
    pub fn generator_residual(&self, x: [f64; 2], h: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        let along1 = |t: f64| self.value([t, x[1]]);
        let along2 = |t: f64| self.value([x[0], t]);
        let f1 = fd_first(along1, x[0], h);
        let f2 = fd_first(along2, x[1], h);
        let f11 = fd_second(along1, x[0], h);
        let f22 = fd_second(along2, x[1], h);
        let f12 = fd_first(|s| fd_first(|t| self.value([t, s]), x[0], h), x[1], h);
        (2.0 * a + b) * f1 + (a - b) * f2 + (f11 + f12 + f22) / 3.0
    }

    /// `∂2 V(x1, 0)` by fourth-order central differences.
    pub fn neumann_residual(&self, x1: f64, h: f64) -> f64 {
        fd_first(|t| self.value([x1, t]), 0.0, h)
    }
}

fn fd_first(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn fd_second(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// [`DiffusionAnalog::value`] restricted to `x(1) ≥ x(2) ≥ 0`.
pub fn diffusion_w(a: f64, b: f64, x: [f64; 2]) -> Result<f64> {
    let d = DiffusionAnalog::new(a, b)?;
    if !(x[1] >= 0.0 && x[0] >= x[1]) {
        return Err(Error::InvalidPoint(format!("{x:?}")));
    }
    Ok(d.value(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn sec5() -> Rates {
        Rates::two(0.1, 0.4, 0.5).unwrap()
    }

    #[test]
    fn coeff_c_values() {
        let r = sec5();
        assert_eq!(coeff_c(&r, c(0.7), c(0.7)).unwrap(), c(0.0));
        let v = coeff_c(&r, c(r.rho(1)), c(1.0)).unwrap();
        assert!((v.re - 0.5 * (1.0 - 0.2)).abs() < 1e-15);
        let v = coeff_c(&r, c(r.rho(1)), c(r.rho(0))).unwrap();
        assert!((v.re - (r.mu(1) - r.mu(0))).abs() < 1e-15);
        assert!(coeff_c(&r, c(0.5), c(0.0)).is_err());
    }

    #[test]
    fn h_rho2_expansion() {
        let r = sec5();
        let (l, m1, m2) = (r.lambda(), r.mu(0), r.mu(1));
        let (r1, r2) = (r.rho(0), r.rho(1));
        let h = make_h_beta(&r, c(r2)).unwrap();
        for y in default_sample(2).iter().step_by(37) {
            let d = y.gap() as i32;
            let want = (m2 - m1) * r2.powi(d) - (m2 - l) * r2.powi(d) * r1.powi(y.get(1) as i32);
            let got = h.eval_real(y).unwrap();
            assert!((got - want).abs() <= 1e-15 * (1.0 + want.abs()), "{y}");
        }
    }

    #[test]
    fn h_beta_antisymmetric() {
        let r = sec5();
        let beta = C64::new(0.15, 0.1);
        let pair = charsurface::solve_alpha(&r, beta).unwrap();
        let h = h_from_pair(&r, &pair).unwrap();
        let g = h_from_pair(&r, &pair.swapped()).unwrap();
        for y in default_sample(2).iter().step_by(53) {
            assert!((h.eval(y) + g.eval(y)).norm() <= 1e-14 * (1.0 + h.eval(y).norm()));
        }
    }

    #[test]
    fn w_star_golden_values() {
        let r = sec5();
        let w = w_star_2d(&r, &LatticePoint::d2(59, 0)).unwrap();
        assert!((w / 1.2037e-35 - 1.0).abs() < 1e-4, "{w}");
        let w = w_star_2d(&r, &LatticePoint::d2(51, 0)).unwrap();
        assert!((w / 7.8885e-31 - 1.0).abs() < 1e-4, "{w}");
        for k in 0..40 {
            assert_eq!(w_star_2d(&r, &LatticePoint::d2(k, k)).unwrap(), 1.0);
        }
    }

    #[test]
    fn w_star_errors() {
        let eq = Rates::two(0.1, 0.45, 0.45).unwrap();
        assert_eq!(
            w_star_2d(&eq, &LatticePoint::d2(3, 1)),
            Err(Error::EqualRates)
        );
        let unstable = Rates::two(0.5, 0.4, 0.6).unwrap();
        assert!(matches!(
            w_star_2d(&unstable, &LatticePoint::d2(3, 1)),
            Err(Error::UnstableRates { .. })
        ));
        assert!(w_star_2d(&sec5(), &LatticePoint::d2(1, 2)).is_err());
        assert_eq!(
            w_equal_rates(&sec5(), &LatticePoint::d2(3, 1)),
            Err(Error::RatesNotEqual)
        );
    }

    #[test]
    fn combination_matches_closed_form() {
        let r = sec5();
        let f = w_star_combination(&r).unwrap();
        for y in default_sample(2) {
            let a = f.eval_real(&y).unwrap();
            let b = w_star_2d(&r, &y).unwrap();
            assert!(
                (a - b).abs() <= 1e-14 * b.max(1e-300) + 1e-300,
                "{y}: {a} vs {b}"
            );
        }
    }

    #[test]
    fn ln_path_agrees() {
        let r = sec5();
        for y in [(59, 0), (51, 0), (3, 1), (30, 12)] {
            let y = LatticePoint::d2(y.0, y.1);
            let lin = w_star_2d(&r, &y).unwrap();
            let ln = w_star_2d_ln(&r, &y).unwrap();
            assert!((ln - lin.ln()).abs() < 1e-12, "{y}");
        }
        let far = w_star_2d_ln(&r, &LatticePoint::d2(5000, 3)).unwrap();
        assert!(far.is_finite() && far < -5000.0);
        let flipped = Rates::two(0.1, 0.5, 0.4).unwrap();
        let y = LatticePoint::d2(20, 4);
        let lin = w_star_2d(&flipped, &y).unwrap();
        assert!((w_star_2d_ln(&flipped, &y).unwrap() - lin.ln()).abs() < 1e-12);
    }

    #[test]
    fn equal_rates_examples() {
        let r = Rates::two(0.1, 0.45, 0.45).unwrap();
        let rho = 0.1 / 0.45;
        for k in 0..10 {
            assert_eq!(w_equal_rates(&r, &LatticePoint::d2(k, k)).unwrap(), 1.0);
        }
        let v = w_equal_rates(&r, &LatticePoint::d2(1, 0)).unwrap();
        assert!((v - (rho + (0.45 - 0.1) / 0.45 * rho)).abs() < 1e-15);
        assert_eq!(
            w_approx(&r, &LatticePoint::d2(1, 0)).unwrap(),
            w_equal_rates(&r, &LatticePoint::d2(1, 0)).unwrap()
        );
    }

    #[test]
    fn equal_rates_is_the_limit() {
        // Richardson-style: the gap shrinks linearly with ε
        let y = LatticePoint::d2(5, 2);
        let base = w_equal_rates(&Rates::two(0.1, 0.45, 0.45).unwrap(), &y).unwrap();
        let gaps: Vec<f64> = [1e-3, 1e-4, 1e-5]
            .iter()
            .map(|e| {
                let r = Rates::two(0.1, 0.45, 0.45 * (1.0 + e)).unwrap();
                (w_star_2d(&r, &y).unwrap() - base).abs() / e
            })
            .collect();
        assert!((gaps[1] / gaps[0] - 1.0).abs() < 0.05 && (gaps[2] / gaps[1] - 1.0).abs() < 0.05);
    }

    #[test]
    fn w3_boundary_and_errors() {
        let r = Rates::three(0.1, 0.4, 0.5, 0.3).unwrap();
        for (a, b) in [(0, 0), (1, 2), (4, 0), (7, 3)] {
            let y = LatticePoint::d3(a + b, a, b);
            assert_eq!(w_star_3d(&r, &y).unwrap(), 1.0);
        }
        let f = w_star_3d_combination(&r).unwrap();
        assert_eq!(f.terms().len(), 7);
        for y in default_sample(3).iter().step_by(11) {
            let v = w_star_3d(&r, y).unwrap();
            assert!((0.0..=1.0).contains(&v));
            assert!((f.eval_real(y).unwrap() - v).abs() < 1e-14);
        }
        let eq = Rates::three(0.1, 0.4, 0.4, 0.3).unwrap();
        assert!(matches!(
            w_star_3d(&eq, &LatticePoint::d3(3, 1, 1)),
            Err(Error::EqualRates3d)
        ));
        assert!(w_star_3d(&r, &LatticePoint::d3(1, 1, 1)).is_err());
    }

    #[test]
    fn residuals_of_basic_functions() {
        let r = sec5();
        let sample = default_sample(2);
        let one = LogLinearCombination::bracket(c(1.0), c(1.0));
        let rep = residual_check(&r, WalkKind::LimitY, &one, &sample);
        assert_eq!(rep.max_residual(), 0.0);
        assert_eq!(rep.points_checked, 31 * 61);
        assert_eq!(rep.max_boundary_residual[0].points, 61);

        let single = LogLinearCombination::bracket(c(r.rho(0)), c(r.rho(0)));
        assert!(residual_check(&r, WalkKind::LimitY, &single, &sample).is_harmonic(1e-12));

        let bad = LogLinearCombination::bracket(c(r.rho(1)), c(1.0));
        let rep = residual_check(&r, WalkKind::LimitY, &bad, &sample);
        assert!(rep.max_interior_residual <= 1e-12);
        assert!(rep.max_boundary_residual[0].max > 1e-6);
    }

    #[test]
    fn balayage_examples() {
        let r = sec5();
        let (r1, r2) = (r.rho(0), r.rho(1));
        let samples: Vec<_> = (0..50).map(|k| LatticePoint::d2(k, k)).collect();
        let basis = [
            BasisElement::Conjugate(c(r2)),
            BasisElement::Bracket {
                beta: c(r1),
                alpha: c(r1),
            },
        ];
        let zero = balayage_fit(&r, &basis, &[0.0; 50], &samples).unwrap();
        assert!(zero.weights.iter().all(|w| w.norm() == 0.0));

        let too_big = [BasisElement::Conjugate(c(1.2))];
        assert!(matches!(
            balayage_fit(&r, &too_big, &[1.0; 50], &samples),
            Err(Error::InadmissibleBasisElement { .. })
        ));
        // between ρ2 and 1 the larger root leaves the unit disk
        let outside = [BasisElement::Conjugate(c(0.5))];
        assert!(matches!(
            balayage_fit(&r, &outside, &[1.0; 50], &samples),
            Err(Error::InadmissibleBasisElement { .. })
        ));
        let dup = [basis[1], basis[1]];
        assert_eq!(
            balayage_fit(&r, &dup, &[1.0; 50], &samples),
            Err(Error::RankDeficientBasis)
        );
        assert!(balayage_fit(&r, &basis, &[1.0], &samples[..1]).is_err());
    }

    #[test]
    fn diffusion_basics() {
        for t in [0.0, 0.3, 2.0] {
            assert!((diffusion_w(1.0, 2.0, [t, t]).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!(diffusion_w(1.0, 1.0, [1.0, 0.0]).is_err());
        assert!(diffusion_w(-1.0, 1.0, [1.0, 0.0]).is_err());
        assert!(diffusion_w(1.0, 2.0, [0.0, 1.0]).is_err());
    }

    #[test]
    fn diffusion_pde() {
        let d = DiffusionAnalog::new(1.0, 2.0).unwrap();
        for (x1, x2) in [(0.3, 0.1), (1.0, 0.5), (0.2, 0.19), (2.0, 0.0)] {
            assert!(d.generator_residual([x1, x2], 1e-4).abs() < 1e-6);
        }
        for x1 in [0.05, 0.5, 1.5] {
            assert!(d.neumann_residual(x1, 1e-4).abs() < 1e-6);
        }
        let bent = DiffusionAnalog::new(2.0, 1.0).unwrap();
        assert!(bent.generator_residual([0.3, 0.1], 1e-4).abs() < 1e-6);
    }

    #[test]
    fn json_shape() {
        let f = LogLinearCombination::bracket(C64::new(0.5, -0.25), c(0.2)) * 2.0;
        let text = f.to_json();
        assert_eq!(
            text,
            r#"{"terms":[{"coeff":[2.0,0.0],"beta":[0.5,-0.25],"alphas":[[0.2,0.0]]}]}"#
        );
        assert_eq!(LogLinearCombination::from_json(&text).unwrap(), f);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn json_roundtrip(re in -1.0f64..1.0, im in -1.0f64..1.0, k in -3.0f64..3.0) {
                let f = make_h_beta(&sec5(), C64::new(0.9 * re + 0.01, 0.9 * im));
                if let Ok(f) = f {
                    let f = f * k;
                    prop_assert_eq!(LogLinearCombination::from_json(&f.to_json()).unwrap(), f);
                }
            }

            #[test]
            fn w_star_is_probability(
                lam in 0.05f64..0.3, m1 in 0.31f64..1.0, m2 in 0.31f64..1.0,
                y2 in 0i64..30, d in 0i64..60,
            ) {
                let r = Rates::two(lam, m1, m2).unwrap();
                prop_assume!(!r.equal_service());
                let v = w_star_2d(&r, &LatticePoint::d2(y2 + d, y2)).unwrap();
                prop_assert!((0.0..=1.0).contains(&v), "{}", v);
                if d == 0 {
                    prop_assert_eq!(v, 1.0);
                }
            }
        }
    }
}
