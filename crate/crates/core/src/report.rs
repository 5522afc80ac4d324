//! Tabular and JSON reports: relative-error sweeps, large-deviation rates,
//! characteristic-surface dumps and a self-check suite.

use serde::Serialize;

use crate::charsurface;
use crate::error::{Error, Result};
use crate::exactsolve::{self, SolverOptions};
use crate::harmonic;
use crate::model::{constrained_step, transform_tn, LatticePoint, Rates, WalkKind};
use crate::C64;

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub const SWEEP_HEADER: &str = "x1,x2,n,p_exact,w_star,v_n,w_n,rel_err";
pub const CHARSURF_HEADER: &str = "alpha,beta";

/// Exact and approximate overflow probabilities at one grid point, with
/// their `−(1/n) log` transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub x1: i64,
    pub x2: i64,
    pub n: i64,
    pub p_exact: f64,
    pub w_star: f64,
    pub v_n: f64,
    pub w_n: f64,
    /// `(w_star − p_exact) / p_exact`.
    pub rel_err: f64,
}

impl SweepRow {
    pub fn new(x: &LatticePoint, n: i64, p_exact: f64, w_star: f64) -> Self {
        let nf = n as f64;
        Self {
            x1: x.get(0),
            x2: x.get(1),
            n,
            p_exact,
            w_star,
            v_n: -p_exact.ln() / nf,
            w_n: -w_star.ln() / nf,
            rel_err: (w_star - p_exact) / p_exact,
        }
    }

    /// `(W_n − V_n) / V_n`, the relative error on the `−(1/n) log` scale.
    pub fn log_rel_err(&self) -> f64 {
        (self.w_n - self.v_n) / self.v_n
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.x1,
            self.x2,
            self.n,
            fmt_f64(self.p_exact),
            fmt_f64(self.w_star),
            fmt_f64(self.v_n),
            fmt_f64(self.w_n),
            fmt_f64(self.rel_err)
        )
    }
}

/// Rows for every interior point of `A_n` whose coordinates are multiples
/// of `stride`, in row-major order (`x1` outer, `x2` inner).
pub fn sweep_rows(
    rates: &Rates,
    n: i64,
    stride: i64,
    opts: &SolverOptions,
) -> Result<Vec<SweepRow>> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    if rates.equal_service() {
        return Err(Error::EqualRates);
    }
    if stride < 1 {
        return Err(Error::InvalidArgument(format!(
            "stride must be >= 1, got {stride}"
        )));
    }
    let field = exactsolve::solve_pn(rates, n, opts)?;
    let mut rows = Vec::new();
    for x1 in (0..n).step_by(stride as usize) {
        for x2 in (0..n - x1).step_by(stride as usize) {
            let x = LatticePoint::d2(x1, x2);
            if x.is_origin() {
                continue;
            }
            let p = field.get(&x).expect("interior point in field");
            let w = harmonic::w_star_2d(rates, &transform_tn(n, &x))
                .map_err(|e| Error::InvalidPoint(format!("{x}: {e}")))?;
            rows.push(SweepRow::new(&x, n, p, w));
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

/// Largest `|rel_err|` and `|log_rel_err|` over rows with `x1 + x2 ≥ band`.
pub fn sweep_max_errors(rows: &[SweepRow], band: i64) -> (f64, f64) {
    rows.iter()
        .filter(|r| r.x1 + r.x2 >= band)
        .fold((0.0f64, 0.0f64), |(p, l), r| {
            (p.max(r.rel_err.abs()), l.max(r.log_rel_err().abs()))
        })
}

/// Large-deviation decay rate of `p_n(⌊nx⌋)` and its ingredients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdRateReport {
    /// `min(−log ρ1, −log ρ2)`.
    pub gamma: f64,
    pub v_of_x: f64,
    /// `−γ (1, 0)`.
    pub r1: [f64; 2],
    /// `log ρ2 (1, 1)`.
    pub r3: [f64; 2],
}

/// `V(x) = min(−log ρ1 + ⟨r1, x⟩, −log ρ2 + ⟨r3, x⟩)`.
pub fn ld_rate(rates: &Rates, x: [f64; 2]) -> Result<LdRateReport> {
    rates.require_stations(2)?;
    rates.require_stable()?;
    if !(x[0] >= 0.0 && x[1] >= 0.0 && x[0] + x[1] > 0.0 && x[0] + x[1] < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "x = ({}, {}) must be nonnegative with 0 < x1 + x2 < 1",
            x[0], x[1]
        )));
    }
    let (l1, l2) = (-rates.rho(0).ln(), -rates.rho(1).ln());
    let gamma = l1.min(l2);
    let r1 = [-gamma, 0.0];
    let r3 = [-l2, -l2];
    let dot = |r: [f64; 2]| r[0] * x[0] + r[1] * x[1];
    Ok(LdRateReport {
        gamma,
        v_of_x: (l1 + dot(r1)).min(l2 + dot(r3)),
        r1,
        r3,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdCheck {
    pub n: i64,
    /// `−(1/n) log p_n(⌊nx⌋)`.
    pub empirical: f64,
    pub abs_diff: f64,
}

/// Compares `−(1/n) log p_n(⌊nx⌋)` with `V(x)` for each `n`.
pub fn ld_cross_check(
    rates: &Rates,
    x: [f64; 2],
    n_list: &[i64],
    opts: &SolverOptions,
) -> Result<Vec<LdCheck>> {
    let v = ld_rate(rates, x)?.v_of_x;
    n_list
        .iter()
        .map(|&n| {
            let xn = LatticePoint::d2(
                (n as f64 * x[0]).floor() as i64,
                (n as f64 * x[1]).floor() as i64,
            );
            let p = exactsolve::solve_pn(rates, n, opts)?
                .get(&xn)
                .ok_or_else(|| Error::InvalidPoint(format!("{xn} not in A_{n}")))?;
            let empirical = -p.ln() / n as f64;
            Ok(LdCheck {
                n,
                empirical,
                abs_diff: (empirical - v).abs(),
            })
        })
        .collect()
}

/// Evenly spaced `α` grid on `[lo, hi]`.
pub fn alpha_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Real section of the characteristic surface as CSV `alpha,beta`.
pub fn charsurf_csv(rates: &Rates, alphas: &[f64]) -> Result<String> {
    let mut out = String::from(CHARSURF_HEADER);
    out.push('\n');
    for (a, b) in charsurface::real_section(rates, alphas)? {
        out.push_str(&format!("{},{}\n", fmt_f64(a), fmt_f64(b)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notices: Vec<String>,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

const VERIFY_TOL: f64 = 1e-12;

struct Suite {
    checks: Vec<Check>,
    notices: Vec<String>,
}

impl Suite {
    fn record(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    fn run(&mut self, name: &str, body: impl FnOnce() -> Result<(bool, String)>) {
        match body() {
            Ok((ok, detail)) => self.record(name, ok, detail),
            Err(e) => self.record(name, false, e.to_string()),
        }
    }
}

/// Max `|f(y) − E_y f(Y_1)|` of a real function on the sample points off
/// the exit face.
fn scalar_residual(
    rates: &Rates,
    f: impl Fn(&LatticePoint) -> Result<f64>,
    sample: &[LatticePoint],
) -> Result<f64> {
    let incs = WalkKind::LimitY.increments(rates);
    let mut worst = 0.0f64;
    for y in sample.iter().filter(|y| y.gap() > 0) {
        let mut e = 0.0;
        for v in &incs {
            e += v.prob * f(&constrained_step(WalkKind::LimitY, y, v))?;
        }
        worst = worst.max((f(y)? - e).abs());
    }
    Ok(worst)
}

/// Runs the invariant suite for the given rates. Never fails; problems are
/// reported as failed checks.
pub fn verify(rates: &Rates) -> VerifyReport {
    let mut s = Suite {
        checks: Vec::new(),
        notices: Vec::new(),
    };
    let stable = rates.stable();
    s.record(
        "stability",
        stable,
        format!(
            "rho = {:?}",
            (0..rates.stations())
                .map(|i| rates.rho(i))
                .collect::<Vec<_>>()
        ),
    );
    if stable {
        match rates.stations() {
            2 if rates.equal_service() => verify_equal(rates, &mut s),
            2 => verify_2d(rates, &mut s),
            _ => verify_3d(rates, &mut s),
        }
    }
    VerifyReport {
        lambda: rates.lambda(),
        mu: rates.mus().to_vec(),
        passed: s.checks.iter().all(|c| c.passed),
        checks: s.checks,
        notices: s.notices,
    }
}

fn verify_equal(rates: &Rates, s: &mut Suite) {
    s.notices
        .push("mu1 = mu2: closed-form W* branch skipped, equal-rates formula checked".into());
    let sample = harmonic::default_sample(2);
    s.run("equal_rates_harmonic", || {
        let r = scalar_residual(rates, |y| harmonic::w_equal_rates(rates, y), &sample)?;
        Ok((r <= VERIFY_TOL, format!("max residual {r:e}")))
    });
    s.run("equal_rates_exit_boundary", || {
        let worst = (0..=30)
            .map(|a| {
                harmonic::w_equal_rates(rates, &LatticePoint::d2(a, a)).map(|w| (w - 1.0).abs())
            })
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
        Ok((
            worst <= VERIFY_TOL,
            format!("max |W - 1| on exit face {worst:e}"),
        ))
    });
    verify_dp_bracket(rates, s, LatticePoint::d2(3, 1), 200);
}

fn verify_2d(rates: &Rates, s: &mut Suite) {
    let sample = harmonic::default_sample(2);
    s.run("w_star_harmonic", || {
        let rep = harmonic::residual_check(
            rates,
            WalkKind::LimitY,
            &harmonic::w_star_combination(rates)?,
            &sample,
        );
        Ok((
            rep.is_harmonic(VERIFY_TOL),
            format!("max residual {:e}", rep.max_residual()),
        ))
    });
    s.run("bracket_rho1_harmonic", || {
        let r1 = C64::new(rates.rho(0), 0.0);
        let rep = harmonic::residual_check(
            rates,
            WalkKind::LimitY,
            &harmonic::LogLinearCombination::bracket(r1, r1),
            &sample,
        );
        Ok((
            rep.is_harmonic(VERIFY_TOL),
            format!("max residual {:e}", rep.max_residual()),
        ))
    });
    s.run("w_star_exit_boundary", || {
        let worst = (0..=30)
            .map(|a| harmonic::w_star_2d(rates, &LatticePoint::d2(a, a)).map(|w| (w - 1.0).abs()))
            .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))?;
        Ok((
            worst <= VERIFY_TOL,
            format!("max |W* - 1| on exit face {worst:e}"),
        ))
    });
    s.run("root_identities", || {
        let mut worst = 0.0f64;
        for k in 0..64 {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
            let beta = C64::from_polar(0.3 + 0.6 * (k % 7) as f64 / 7.0, theta);
            let pair = match charsurface::solve_alpha(rates, beta) {
                Ok(p) => p,
                Err(Error::DegenerateDiscriminant { .. }) => continue,
                Err(e) => return Err(e),
            };
            for a in [pair.alpha1, pair.alpha2] {
                worst = worst.max((charsurface::eval_p(rates, beta, a)? - 1.0).norm());
            }
            let product = rates.mu(1) * beta / rates.mu(0);
            worst = worst.max((pair.alpha1 * pair.alpha2 - product).norm());
        }
        Ok((worst <= VERIFY_TOL, format!("max identity error {worst:e}")))
    });
    s.run("discriminant_at_rho2", || {
        let d = charsurface::discriminant(rates, C64::new(rates.rho(1), 0.0))?;
        let want = (rates.mu(0) - rates.lambda()).powi(2);
        let err = (d - want).norm();
        Ok((err <= VERIFY_TOL, format!("|Δ(ρ2) − (μ1−λ)²| = {err:e}")))
    });
    s.run("balayage_recovery", || {
        let r1 = C64::new(rates.rho(0), 0.0);
        let basis = [
            harmonic::BasisElement::Conjugate(C64::new(rates.rho(1), 0.0)),
            harmonic::BasisElement::Bracket {
                beta: r1,
                alpha: r1,
            },
        ];
        let samples: Vec<_> = (0..50).map(|a| LatticePoint::d2(a, a)).collect();
        let fit = harmonic::balayage_fit(rates, &basis, &vec![1.0; samples.len()], &samples)?;
        Ok((
            fit.max_boundary_error <= 1e-10,
            format!("max boundary error {:e}", fit.max_boundary_error),
        ))
    });
    verify_dp_bracket(rates, s, LatticePoint::d2(3, 1), 200);
    s.run("exact_vs_dense", || {
        let gs = exactsolve::solve_pn(rates, 12, &SolverOptions::default())?;
        let dense = exactsolve::solve_pn_dense(rates, 12)?;
        let worst = gs
            .iter()
            .map(|(x, v)| {
                ((v - dense.get(&x).unwrap_or(f64::NAN)) / v.max(f64::MIN_POSITIVE)).abs()
            })
            .fold(0.0f64, f64::max);
        Ok((worst <= 1e-9, format!("max relative difference {worst:e}")))
    });
}

fn verify_3d(rates: &Rates, s: &mut Suite) {
    s.run("w_star_3d_harmonic", || {
        let rep = harmonic::residual_check(
            rates,
            WalkKind::LimitY,
            &harmonic::w_star_3d_combination(rates)?,
            &harmonic::default_sample(3),
        );
        Ok((
            rep.is_harmonic(VERIFY_TOL),
            format!("max residual {:e}", rep.max_residual()),
        ))
    });
    verify_dp_bracket(rates, s, LatticePoint::d3(6, 1, 2), 40);
}

fn verify_dp_bracket(rates: &Rates, s: &mut Suite, y: LatticePoint, horizon: usize) {
    s.run("dp_bracket", || {
        let w = match y.dim() {
            2 => harmonic::w_approx(rates, &y)?,
            _ => harmonic::w_star_3d(rates, &y)?,
        };
        let dp = exactsolve::horizon_dp(rates, &y, horizon)?;
        Ok((
            dp <= w * (1.0 + 1e-12),
            format!("horizon {horizon} at {y}: dp {dp:e} vs closed form {w:e}"),
        ))
    });
}
