//! Explicit family of generalized Mannheim curves
//!
//! ```text
//! c(u) = alpha * integral f(u) (sinh u, cosh u, g(u), h(u)) du
//! ```
//!
//! with `f` built from `g`, `h` and their first two derivatives. The closed
//! forms below use the abbreviations
//!
//! ```text
//! A = 1 + g² + h²   B = g ġ + h ḣ   C = ġ² + ḣ²
//! D = g g̈ + h ḧ     E = ġ g̈ + ḣ ḧ   F = g̈² + ḧ²
//! ```
//!
//! and the inner factor `Q̃ = -A + AC - B²`, which expands to
//! `-1 - g² - h² + ġ² + ḣ² + (ġh - gḣ)²`.

use rayon::prelude::*;

use crate::curve::{integrate, Curve, VecJet};
use crate::error::{Error, Result};
use crate::expr::{Expr, Jet};
use crate::frenet::{frenet_at_u, Case, FrenetTol};
use crate::lorentz::Vec4;
use crate::report::{Json, Verdict};

/// `|Q̃|` below this fraction of `A + AC + B²` counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

pub const DEFAULT_NODES: usize = 1024;

/// Closed-form route: normalized residual bound for a `Holds` verdict.
pub const CLOSED_TOL: f64 = 1e-9;
/// Numerical Frenet route: normalized residual bound for a `Holds` verdict.
pub const NUMERIC_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct FamilyParams {
    pub alpha: f64,
    pub g: Expr,
    pub h: Expr,
    pub domain: (f64, f64),
    pub n_nodes: usize,
}

impl FamilyParams {
    pub fn new(alpha: f64, g: Expr, h: Expr, domain: (f64, f64), n_nodes: usize) -> Result<Self> {
        if !(alpha.is_finite() && alpha != 0.0) {
            return Err(Error::InvalidInput(format!("alpha must be finite and nonzero, got {alpha}")));
        }
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("range [{lo}, {hi}] must satisfy lo < hi")));
        }
        if n_nodes < 2 {
            return Err(Error::InvalidInput("at least two quadrature nodes are needed".into()));
        }
        for e in [&g, &h] {
            if e.var_names().len() > 1 {
                return Err(Error::InvalidInput(format!("`{e}` mixes parameter names")));
            }
        }
        let p = FamilyParams { alpha, g, h, domain, n_nodes };
        for i in 0..=64 {
            let u = lo + (hi - lo) * i as f64 / 64.0;
            p.gh(u, 2)?;
        }
        Ok(p)
    }

    pub fn parse(alpha: f64, g: &str, h: &str, domain: (f64, f64)) -> Result<Self> {
        FamilyParams::new(alpha, Expr::parse(g)?, Expr::parse(h)?, domain, DEFAULT_NODES)
    }

    fn gh(&self, u: f64, order: usize) -> Result<(Jet, Jet)> {
        Ok((self.g.eval_jet(u, order)?, self.h.eval_jet(u, order)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abbrevs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl Abbrevs {
    /// From `(g, ġ, g̈)` and `(h, ḣ, ḧ)`.
    pub fn from_values(g: [f64; 3], h: [f64; 3]) -> Self {
        Abbrevs {
            a: 1.0 + g[0] * g[0] + h[0] * h[0],
            b: g[0] * g[1] + h[0] * h[1],
            c: g[1] * g[1] + h[1] * h[1],
            d: g[0] * g[2] + h[0] * h[2],
            e: g[1] * g[2] + h[1] * h[2],
            f: g[2] * g[2] + h[2] * h[2],
        }
    }

    /// `Q̃ = -A + AC - B²`.
    pub fn qtilde(&self) -> f64 {
        -self.a + self.a * self.c - self.b * self.b
    }

    /// The bracket `Q̃(1+F) + (1-C)(1+D)² + 2BE(1+D) - AE²`.
    pub fn bracket(&self) -> f64 {
        let Abbrevs { a, b, c, d, e, f } = *self;
        self.qtilde() * (1.0 + f) + (1.0 - c) * (1.0 + d) * (1.0 + d) + 2.0 * b * e * (1.0 + d)
            - a * e * e
    }

    fn singular_scale(&self) -> f64 {
        self.a + self.a * self.c + self.b * self.b
    }
}

pub fn abbrevs_at(g: &Expr, h: &Expr, u: f64) -> Result<Abbrevs> {
    let gd = g.eval_jet(u, 2)?.derivatives();
    let hd = h.eval_jet(u, 2)?.derivatives();
    Ok(Abbrevs::from_values([gd[0], gd[1], gd[2]], [hd[0], hd[1], hd[2]]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pqr {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub p_tilde: f64,
    pub q_tilde: f64,
    pub r_tilde: f64,
}

pub fn pqr_at(ab: &Abbrevs) -> Pqr {
    let Abbrevs { a, b, c, d, e, .. } = *ab;
    let qt = ab.qtilde();
    let rt = -b + a * e - b * d;
    Pqr {
        p: qt * qt + qt * (b * b - a * c - a * d) + a * b * rt,
        q: a * a * qt,
        r: a * a * rt,
        p_tilde: 1.0 - c + b * e + d - c * d,
        q_tilde: qt,
        r_tilde: rt,
    }
}

/// `f` as a jet of the given order, from `g` and `h` jets two orders higher,
/// written exactly as the defining formula with its absolute values. Also
/// returns the inner factor value.
fn f_jet_from(g: Jet, h: Jet, order: usize, u: f64) -> Result<(Jet, f64)> {
    let gd = g.differentiate();
    let hd = h.differentiate();
    let gdd = gd.differentiate().truncate(order);
    let hdd = hd.differentiate().truncate(order);
    let (g, h, gd, hd) = (g.truncate(order), h.truncate(order), gd.truncate(order), hd.truncate(order));

    let a = g * g + h * h + 1.0;
    let cross = gd * h - g * hd;
    let inner = -a + gd * gd + hd * hd + cross * cross;

    let ab = Abbrevs::from_values([g.value(), gd.value(), gdd.value()], [h.value(), hd.value(), hdd.value()]);
    if !(inner.value().abs() > SINGULAR_TOL * ab.singular_scale()) {
        return Err(Error::SingularInner { at: u, value: inner.value() });
    }

    let t1 = g - gdd;
    let t2 = h - hdd;
    let t3 = (g * hd - gd * h) + (gd * hdd - gdd * hd);
    let t4 = g * hdd - gdd * h;
    let br = t1 * t1 + t2 * t2 - t3 * t3 + t4 * t4;
    let f = a.powf(-1.5) * inner.abs().powf(-2.5) * (inner.powi(3) - a.powi(3) * br).abs();
    if !f.is_finite() {
        return Err(Error::SingularInner { at: u, value: inner.value() });
    }
    Ok((f, inner.value()))
}

pub fn f_of_u(g: &Expr, h: &Expr, u: f64) -> Result<f64> {
    Ok(f_jet_from(g.eval_jet(u, 2)?, h.eval_jet(u, 2)?, 0, u)?.0.value())
}

/// The family member as a curve. Velocity jets come straight from the
/// integrand; positions need the quadrature table built by [`generate_curve`].
#[derive(Debug, Clone)]
pub struct FamilyCurve {
    pub params: FamilyParams,
    nodes: Vec<f64>,
    table: Vec<Vec4>,
}

impl FamilyCurve {
    /// A member without positions, enough for the Frenet apparatus.
    pub fn integrand_only(params: FamilyParams) -> Self {
        FamilyCurve { params, nodes: Vec::new(), table: Vec::new() }
    }

    pub fn has_positions(&self) -> bool {
        !self.table.is_empty()
    }

    fn integrand(&self, u: f64) -> Result<[f64; 4]> {
        Ok(self.velocity(u)?.to_array())
    }

    /// Table nodes and positions.
    pub fn table(&self) -> impl Iterator<Item = (f64, Vec4)> + '_ {
        self.nodes.iter().copied().zip(self.table.iter().copied())
    }
}

impl Curve for FamilyCurve {
    fn domain(&self) -> (f64, f64) {
        self.params.domain
    }

    fn position(&self, u: f64) -> Result<Vec4> {
        self.check_in_domain(u)?;
        if self.table.is_empty() {
            return Err(Error::InvalidInput("family positions were not tabulated".into()));
        }
        let (lo, hi) = self.params.domain;
        let n = self.nodes.len() - 1;
        let j = (((u - lo) / (hi - lo)) * n as f64).round().clamp(0.0, n as f64) as usize;
        let f = |t: f64| self.integrand(t);
        let d = integrate(&f, self.nodes[j], u, 1e-13, 1e-13)?;
        Ok(self.table[j] + Vec4::from_array(d))
    }

    fn velocity_jet(&self, u: f64, order: usize) -> Result<VecJet> {
        self.check_in_domain(u)?;
        let order = order.min(self.max_velocity_order());
        let (g, h) = self.params.gh(u, order + 2)?;
        let (f, _) = f_jet_from(g, h, order, u)?;
        let af = f.scale(self.params.alpha);
        let (sh, ch) = Jet::variable(u, order).sinh_cosh();
        Ok([af * sh, af * ch, af * g.truncate(order), af * h.truncate(order)])
    }

    fn max_velocity_order(&self) -> usize {
        3
    }
}

/// Tabulates `c(u)` by cumulative adaptive quadrature on `n_nodes` cells.
pub fn generate_curve(p: &FamilyParams) -> Result<FamilyCurve> {
    let (lo, hi) = p.domain;
    let n = p.n_nodes;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
        .collect();
    for &u in &nodes {
        f_of_u(&p.g, &p.h, u)?;
    }
    let mut curve = FamilyCurve::integrand_only(p.clone());
    let f = |t: f64| curve.integrand(t);
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = Vec4::ZERO;
    table.push(acc);
    for w in nodes.windows(2) {
        acc = acc + Vec4::from_array(integrate(&f, w[0], w[1], 1e-13, 1e-13)?);
        table.push(acc);
    }
    curve.nodes = nodes;
    curve.table = table;
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    pub f: f64,
    pub abbrevs: Abbrevs,
    pub k1: f64,
    pub ksq: f64,
    /// `Q̃ < 0`: the printed square root of `Q̃` is taken of `|Q̃|`.
    pub sign_inconsistent: bool,
}

impl ClosedForms {
    pub fn qtilde(&self) -> f64 {
        self.abbrevs.qtilde()
    }

    /// `k2² = (k1² + k2²) - k1²`.
    pub fn k2_sq(&self) -> f64 {
        self.ksq - self.k1 * self.k1
    }
}

/// Closed-form `f`, `k1` and `k1² + k2²` at `u`. `k1` uses `|alpha|` so that
/// it stays a nonnegative curvature for either sign of `alpha`.
pub fn closed_forms(p: &FamilyParams, u: f64) -> Result<ClosedForms> {
    let f = f_of_u(&p.g, &p.h, u)?;
    let ab = abbrevs_at(&p.g, &p.h, u)?;
    let qt = ab.qtilde();
    let a = ab.a;
    let alpha = p.alpha;
    let k1 = (alpha.abs() * f).recip() * a.powf(-1.5) * qt.abs().sqrt();
    let ksq = (alpha * alpha * f * f).recip() * a.powi(-3) * qt.abs().powi(-2)
        * (qt.powi(3) + a.powi(3) * ab.bracket()).abs();
    Ok(ClosedForms { f, abbrevs: ab, k1, ksq, sign_inconsistent: qt < 0.0 })
}

pub fn closed_form_k1(p: &FamilyParams, u: f64) -> Result<f64> {
    Ok(closed_forms(p, u)?.k1)
}

pub fn closed_form_ksq_sum(p: &FamilyParams, u: f64) -> Result<f64> {
    Ok(closed_forms(p, u)?.ksq)
}

/// Chebyshev points of the first kind on `[lo, hi]`, ascending.
pub fn chebyshev(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..n)
        .rev()
        .map(|j| mid + half * ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect()
}

/// `|k1 - alpha (k1² + k2²)| / (|k1| + |alpha| (k1² + k2²))`.
pub fn normalized_residual(k1: f64, ksq: f64, alpha: f64) -> f64 {
    let den = k1.abs() + alpha.abs() * ksq;
    if den == 0.0 {
        return 0.0;
    }
    (k1 - alpha * ksq).abs() / den
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyProbe {
    pub u: f64,
    pub f: f64,
    pub qtilde: f64,
    pub k1_closed: f64,
    pub ksq_closed: f64,
    pub k1_numeric: f64,
    pub ksq_numeric: f64,
    pub closed_residual: f64,
    pub numeric_residual: f64,
    pub case: Case,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub alpha: f64,
    pub probes: Vec<FamilyProbe>,
    pub max_closed_residual: f64,
    pub max_numeric_residual: f64,
    /// Largest relative disagreement of `k1` between the two routes.
    pub k1_agreement: f64,
    /// Largest relative disagreement of `k1² + k2²` between the two routes.
    pub ksq_agreement: f64,
    /// e4 timelike at every probe.
    pub case1_all: bool,
    pub case_counts: [usize; 3],
    /// Probes where `Q̃ < 0`.
    pub sign_inconsistent: usize,
    pub verdict: Verdict,
}

/// Checks `k1 = alpha (k1² + k2²)` at Chebyshev probes by the closed forms and
/// by the numerical Frenet apparatus of the generated curve.
pub fn verify_family(p: &FamilyParams, n_probe: usize) -> Result<FamilyReport> {
    if n_probe < 3 {
        return Err(Error::InvalidInput("at least 3 probes are required".into()));
    }
    let us = chebyshev(p.domain.0, p.domain.1, n_probe);
    let closed: Vec<ClosedForms> = us.iter().map(|&u| closed_forms(p, u)).collect::<Result<_>>()?;
    if closed.iter().all(|c| c.k2_sq() <= 1e-12 * c.ksq) {
        return Err(Error::DegenerateMember);
    }

    let curve = FamilyCurve::integrand_only(p.clone());
    // curvatures here can be tiny in absolute terms; only cancellation counts
    let tol = FrenetTol::new(0.0);
    let numeric: Vec<_> = us
        .par_iter()
        .map(|&u| frenet_at_u(&curve, u, &tol))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;

    let mut probes = Vec::with_capacity(n_probe);
    let mut case_counts = [0usize; 3];
    for ((&u, cf), app) in us.iter().zip(&closed).zip(&numeric) {
        let [k1n, k2n, _] = app.k;
        let ksqn = k1n * k1n + k2n * k2n;
        case_counts[app.case as usize] += 1;
        probes.push(FamilyProbe {
            u,
            f: cf.f,
            qtilde: cf.qtilde(),
            k1_closed: cf.k1,
            ksq_closed: cf.ksq,
            k1_numeric: k1n,
            ksq_numeric: ksqn,
            closed_residual: normalized_residual(cf.k1, cf.ksq, p.alpha),
            numeric_residual: normalized_residual(k1n, ksqn, p.alpha),
            case: app.case,
        });
    }
    let max = |f: &dyn Fn(&FamilyProbe) -> f64| probes.iter().map(f).fold(0.0, f64::max);
    let max_closed_residual = max(&|q| q.closed_residual);
    let max_numeric_residual = max(&|q| q.numeric_residual);
    let k1_agreement = max(&|q| (q.k1_numeric - q.k1_closed).abs() / q.k1_closed.abs());
    let ksq_agreement = max(&|q| (q.ksq_numeric - q.ksq_closed).abs() / q.ksq_closed.abs());
    let verdict = if max_closed_residual <= CLOSED_TOL && max_numeric_residual <= NUMERIC_TOL {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(FamilyReport {
        alpha: p.alpha,
        max_closed_residual,
        max_numeric_residual,
        k1_agreement,
        ksq_agreement,
        case1_all: case_counts[0] == probes.len(),
        case_counts,
        sign_inconsistent: probes.iter().filter(|q| q.qtilde < 0.0).count(),
        probes,
        verdict,
    })
}

impl FamilyReport {
    pub fn to_json(&self) -> Json {
        let probes: Vec<Json> = self
            .probes
            .iter()
            .map(|q| {
                Json::obj()
                    .with("u", q.u)
                    .with("f", q.f)
                    .with("qtilde", q.qtilde)
                    .with("k1_closed", q.k1_closed)
                    .with("ksq_closed", q.ksq_closed)
                    .with("k1_numeric", q.k1_numeric)
                    .with("ksq_numeric", q.ksq_numeric)
                    .with("closed_residual", q.closed_residual)
                    .with("numeric_residual", q.numeric_residual)
                    .with("case", q.case.name())
            })
            .collect();
        Json::obj()
            .with("verdict", self.verdict)
            .with("alpha", self.alpha)
            .with("max_closed_residual", self.max_closed_residual)
            .with("max_numeric_residual", self.max_numeric_residual)
            .with("k1_agreement", self.k1_agreement)
            .with("ksq_agreement", self.ksq_agreement)
            .with("case1_all", self.case1_all)
            .with(
                "cases",
                Json::obj()
                    .with("Case1", self.case_counts[0])
                    .with("Case2", self.case_counts[1])
                    .with("Case3", self.case_counts[2]),
            )
            .with("sign_inconsistent", self.sign_inconsistent)
            .with("probes", probes)
    }
}
