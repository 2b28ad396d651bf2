//! Generalized Mannheim curves: the curvature condition
//! `k1 = -alpha (mu1 k1² + mu2 k2²)`, mate construction `c* = c + alpha e2`,
//! the plane-inclusion check on a constructed pair, and the
//! constant-curvature criterion for mates whose `e4*` is parallel to `e2`.

use rayon::prelude::*;

use crate::curve::{arc_length, vj_compose, vj_diff, vj_value, ArcLengthMap, Curve};
use crate::error::{Error, Result};
use crate::frenet::{apparatus_along, frame_jets_at_u, frenet_at_u, s_grid, Case, FrenetApparatus, FrenetTol};
use crate::lorentz::{classify, inner, CausalKind, Vec4, NULL_TOL};
use crate::report::{Json, Verdict};
use crate::spline::SplineCurve;

/// `|mu1 k1² + mu2 k2²|` at or below this fraction of `k1² + k2²` is degenerate.
pub const DENOM_TOL: f64 = 1e-12;

pub const MIN_MATE_NODES: usize = 200;

/// `-k1 / (mu1 k1² + mu2 k2²)` with the case's signs.
pub fn alpha_pointwise(k1: f64, k2: f64, case: Case) -> Result<f64> {
    let [mu1, mu2, _] = case.mu();
    let den = mu1 * k1 * k1 + mu2 * k2 * k2;
    if !(den.abs() > DENOM_TOL * (k1 * k1 + k2 * k2)) {
        return Err(Error::DegenerateDenominator { value: den });
    }
    Ok(-k1 / den)
}

/// The condition written out for a case, as the case specializations read.
pub fn condition_text(case: Case) -> &'static str {
    match case {
        Case::Case1 => "k1 = alpha*(k1^2 + k2^2)",
        Case::Case2 => "k1 = alpha*(k1^2 - k2^2)",
        Case::Case3 => "k1 = -alpha*(k1^2 + k2^2)",
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Bound on `(max - min) / |median|` of the pointwise alpha.
    pub spread: f64,
    /// Bound on the normalized condition residual.
    pub residual: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { spread: 1e-3, residual: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionSample {
    pub s: f64,
    pub k1: f64,
    pub k2: f64,
    /// `None` where the denominator degenerates.
    pub alpha: Option<f64>,
    /// `k1 + alpha_hat (mu1 k1² + mu2 k2²)`.
    pub residual: f64,
    /// `residual / (|k1| + |alpha_hat| |mu1 k1² + mu2 k2²|)`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MannheimReport {
    pub samples: Vec<ConditionSample>,
    pub alpha_hat: f64,
    pub alpha_rel_spread: f64,
    pub case: Case,
    pub max_normalized_residual: f64,
    pub verdict: Verdict,
}

impl MannheimReport {
    pub fn to_json(&self) -> Json {
        let samples: Vec<Json> = self
            .samples
            .iter()
            .map(|x| {
                Json::obj()
                    .with("s", x.s)
                    .with("k1", x.k1)
                    .with("k2", x.k2)
                    .with("alpha", x.alpha)
                    .with("residual", x.residual)
            })
            .collect();
        Json::obj()
            .with("verdict", self.verdict)
            .with("alpha_hat", self.alpha_hat)
            .with("alpha_rel_spread", self.alpha_rel_spread)
            .with("case", self.case.name())
            .with("condition", condition_text(self.case))
            .with("max_normalized_residual", self.max_normalized_residual)
            .with("samples", samples)
    }
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Condition statistics from per-sample curvatures; the data core of
/// [`check_condition`].
pub fn condition_from_samples(samples: &[(f64, f64, f64)], case: Case, thr: &Thresholds) -> MannheimReport {
    let [mu1, mu2, _] = case.mu();
    let alphas: Vec<Option<f64>> = samples.iter().map(|&(_, k1, k2)| alpha_pointwise(k1, k2, case).ok()).collect();
    let finite: Vec<f64> = alphas.iter().flatten().copied().collect();
    let degenerate = finite.is_empty() || finite.len() * 2 < samples.len();
    let alpha_hat = if finite.is_empty() { f64::NAN } else { median(&finite) };
    let alpha_rel_spread = if finite.is_empty() {
        f64::NAN
    } else {
        let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (hi - lo) / alpha_hat.abs()
    };
    let out: Vec<ConditionSample> = samples
        .iter()
        .zip(&alphas)
        .map(|(&(s, k1, k2), &alpha)| {
            let den = mu1 * k1 * k1 + mu2 * k2 * k2;
            let residual = k1 + alpha_hat * den;
            let scale = k1.abs() + alpha_hat.abs() * den.abs();
            let normalized = if scale > 0.0 { residual.abs() / scale } else { 0.0 };
            ConditionSample { s, k1, k2, alpha, residual, normalized }
        })
        .collect();
    let max_normalized_residual = out.iter().map(|x| x.normalized).fold(0.0, f64::max);
    let verdict = if degenerate || !alpha_hat.is_finite() {
        Verdict::Degenerate
    } else if alpha_rel_spread <= thr.spread && max_normalized_residual <= thr.residual {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    MannheimReport {
        samples: out,
        alpha_hat,
        alpha_rel_spread,
        case,
        max_normalized_residual,
        verdict,
    }
}

/// Decides the condition on `n` equally spaced arc-length samples.
pub fn check_condition(c: &dyn Curve, n: usize, thr: &Thresholds, tol: &FrenetTol) -> Result<MannheimReport> {
    if n < 3 {
        return Err(Error::InvalidInput("at least 3 samples are required".into()));
    }
    let m = ArcLengthMap::new(c)?;
    let along = apparatus_along(c, &m, &s_grid(&m, n), tol);
    let mut samples = Vec::with_capacity(n);
    let mut case = None;
    for a in along {
        let app = a.result?;
        match case {
            None => case = Some(app.case),
            Some(k) if k != app.case => {
                return Err(Error::CaseChange(format!("{} then {} at s = {}", k, app.case, a.s)))
            }
            _ => {}
        }
        samples.push((a.s, app.k[0], app.k[1]));
    }
    let case = case.expect("n >= 3 samples");
    let report = condition_from_samples(&samples, case, thr);
    log::info!(
        "condition: alpha_hat = {}, spread = {:e}, verdict {}",
        report.alpha_hat,
        report.alpha_rel_spread,
        report.verdict
    );
    Ok(report)
}

/// `sqrt|(1 + mu1 alpha k1)² + eps2 alpha'² + eps3 (alpha k2)²|`.
pub fn mate_speed(app: &FrenetApparatus, alpha: f64, alpha_prime: f64) -> f64 {
    let [k1, k2, _] = app.k;
    let a = 1.0 + app.mu[0] * alpha * k1;
    (a * a + app.eps[1] * alpha_prime * alpha_prime + app.eps[2] * (alpha * k2).powi(2))
        .abs()
        .sqrt()
}

/// Minkowski length of `d(c + alpha e2)/ds = e1 + alpha e2'` from the frame
/// jets, the brute-force counterpart of [`mate_speed`].
pub fn mate_speed_direct(c: &dyn Curve, u: f64, alpha: f64, tol: &FrenetTol) -> Result<f64> {
    let (_, fj) = frame_jets_at_u(c, u, tol)?;
    let d = vj_value(&fj.e1) + alpha * vj_value(&vj_diff(&fj.e2));
    Ok(inner(d, d).abs().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correspondence {
    pub u: f64,
    pub s: f64,
    pub s_star: f64,
}

/// A base curve with its mate `c + alpha e2`, represented as a Hermite spline
/// in the base parameter.
pub struct MatePair<'a> {
    pub base: &'a dyn Curve,
    pub map: ArcLengthMap<'a>,
    pub mate: SplineCurve,
    pub alpha: f64,
    pub table: Vec<Correspondence>,
}

impl<'a> MatePair<'a> {
    /// `ds*/ds` at base parameter `u`, from the spline.
    pub fn mate_speed_at(&self, u: f64) -> Result<f64> {
        let vm = self.mate.velocity(u)?;
        let vb = self.base.velocity(u)?;
        Ok((inner(vm, vm).abs() / inner(vb, vb)).sqrt())
    }

    pub fn to_json(&self) -> Result<Json> {
        let mut rows = Vec::with_capacity(self.table.len());
        for t in &self.table {
            rows.push(
                Json::obj()
                    .with("u", t.u)
                    .with("s", t.s)
                    .with("s_star", t.s_star)
                    .with("x", self.mate.position(t.u)?)
                    .with("speed", self.mate_speed_at(t.u)?),
            );
        }
        Ok(Json::obj()
            .with("alpha", self.alpha)
            .with("nodes", self.table.len())
            .with("exact_order", self.mate.exact_order())
            .with("samples", rows))
    }
}

/// Samples `c + alpha e2` with derivatives at `max(n, 200)` uniform parameter
/// nodes and fits a Hermite spline through them.
pub fn construct_mate<'a>(c: &'a dyn Curve, alpha: f64, n: usize, tol: &FrenetTol) -> Result<MatePair<'a>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("alpha = {alpha} must be finite")));
    }
    let map = ArcLengthMap::new(c)?;
    let n = n.max(MIN_MATE_NODES);
    let (lo, hi) = c.domain();
    let us: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();

    let stacks: Vec<(usize, [Vec<f64>; 4])> = us
        .par_iter()
        .map(|&u| -> Result<(usize, [Vec<f64>; 4])> {
            let (_, fj) = frame_jets_at_u(c, u, tol)?;
            let e2u = vj_compose(&fj.e2, &fj.psi);
            let m = e2u[0].order().min(3);
            let cj = c.jet(u, m)?;
            let stack = [0, 1, 2, 3].map(|i| {
                (0..=m).map(|k| cj[i].derivative(k) + alpha * e2u[i].derivative(k)).collect::<Vec<f64>>()
            });
            let v = Vec4::new(stack[0][1], stack[1][1], stack[2][1], stack[3][1]);
            if classify(v, NULL_TOL).kind == CausalKind::Null {
                return Err(Error::MateIrregular { at: u, speed: inner(v, v).abs().sqrt() });
            }
            Ok((m, stack))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    let depth = stacks.iter().map(|(m, _)| *m).min().expect("nodes") + 1;
    let data: Vec<[Vec<f64>; 4]> = stacks
        .into_iter()
        .map(|(_, st)| st.map(|mut v| {
            v.truncate(depth);
            v
        }))
        .collect();
    let mate = SplineCurve::hermite(&us, &data)?;

    let mut table = Vec::with_capacity(n);
    let mut s_star = 0.0;
    for (i, &u) in us.iter().enumerate() {
        if i > 0 {
            s_star += arc_length(&mate, us[i - 1], u)?;
        }
        table.push(Correspondence { u, s: map.arc_length_at(u)?, s_star });
    }
    log::debug!("mate: {n} nodes, Hermite depth {depth}, total s* = {s_star}");
    Ok(MatePair { base: c, map, mate, alpha, table })
}

/// Interior probe parameters: midpoints of `n` equal cells.
fn probe_points(domain: (f64, f64), n: usize) -> Vec<f64> {
    let (lo, hi) = domain;
    (0..n).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub u: f64,
    pub s: f64,
    pub s_star: f64,
    /// `|<e2, e1*>|`
    pub r1: f64,
    /// `|<e2, e2*>|`
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub samples: Vec<PairSample>,
    pub max_r1: f64,
    pub max_r2: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl PairReport {
    pub fn to_json(&self) -> Json {
        let samples: Vec<Json> = self
            .samples
            .iter()
            .map(|x| {
                Json::obj()
                    .with("u", x.u)
                    .with("s", x.s)
                    .with("s_star", x.s_star)
                    .with("e2_e1star", x.r1)
                    .with("e2_e2star", x.r2)
            })
            .collect();
        Json::obj()
            .with("verdict", self.verdict)
            .with("tol", self.tol)
            .with("max_e2_e1star", self.max_r1)
            .with("max_e2_e2star", self.max_r2)
            .with("samples", samples)
    }
}

/// Residuals of `e2` against the mate's `e1*` and `e2*`; the data core of
/// [`verify_pair`].
pub fn pair_from_samples(pts: &[(f64, f64, f64)], e2: &[Vec4], e1s: &[Vec4], e2s: &[Vec4], tol: f64) -> PairReport {
    let samples: Vec<PairSample> = pts
        .iter()
        .enumerate()
        .map(|(i, &(u, s, s_star))| PairSample {
            u,
            s,
            s_star,
            r1: inner(e2[i], e1s[i]).abs(),
            r2: inner(e2[i], e2s[i]).abs(),
        })
        .collect();
    let max_r1 = samples.iter().map(|x| x.r1).fold(0.0, f64::max);
    let max_r2 = samples.iter().map(|x| x.r2).fold(0.0, f64::max);
    let verdict = if max_r1 <= tol && max_r2 <= tol { Verdict::Holds } else { Verdict::Fails };
    PairReport { samples, max_r1, max_r2, tol, verdict }
}

struct Probe {
    u: f64,
    s: f64,
    s_star: f64,
    base: FrenetApparatus,
    mate: FrenetApparatus,
    k1p: f64,
    k2p: f64,
}

/// Base and mate apparatus at interior probes. Every mate failure is collected
/// into a single `MateNotFrenet`.
fn probe_pair(pair: &MatePair<'_>, n: usize, tol: &FrenetTol) -> Result<Vec<Probe>> {
    if n == 0 {
        return Err(Error::InvalidInput("at least one probe point is required".into()));
    }
    let us = probe_points(pair.base.domain(), n);
    let base: Vec<_> = us.par_iter().map(|&u| frame_jets_at_u(pair.base, u, tol)).collect();
    let mate: Vec<_> = us.par_iter().map(|&u| frenet_at_u(&pair.mate, u, tol)).collect();
    let mut out = Vec::with_capacity(n);
    let mut failures = Vec::new();
    for ((&u, b), m) in us.iter().zip(base).zip(mate) {
        let (b, fj) = b?;
        let s = pair.map.arc_length_at(u)?;
        let s_star = arc_length(&pair.mate, pair.mate.domain().0, u)?;
        match m {
            Ok(m) => out.push(Probe {
                u,
                s,
                s_star,
                base: b,
                mate: m,
                k1p: fj.k1.derivative(1),
                k2p: fj.k2.derivative(1),
            }),
            Err(e) => failures.push(format!("u = {u}, s* = {s_star}: {e}")),
        }
    }
    if !failures.is_empty() {
        return Err(Error::MateNotFrenet(failures.join("; ")));
    }
    Ok(out)
}

/// Checks that `e2` lies in the span of `e3*, e4*` at `n` interior points by
/// metric orthogonality to `e1*` and `e2*`.
pub fn verify_pair(pair: &MatePair<'_>, n: usize, tol: f64, ftol: &FrenetTol) -> Result<PairReport> {
    let probes = probe_pair(pair, n, ftol)?;
    let pts: Vec<_> = probes.iter().map(|p| (p.u, p.s, p.s_star)).collect();
    let e2: Vec<_> = probes.iter().map(|p| p.base.e[1]).collect();
    let e1s: Vec<_> = probes.iter().map(|p| p.mate.e[0]).collect();
    let e2s: Vec<_> = probes.iter().map(|p| p.mate.e[1]).collect();
    Ok(pair_from_samples(&pts, &e2, &e1s, &e2s, tol))
}

/// One probe of the constant-curvature criterion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thm33Sample {
    pub s: f64,
    pub k1: f64,
    pub k2: f64,
    /// `dk1/ds`
    pub k1p: f64,
    /// `dk2/ds`
    pub k2p: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub e2: Vec4,
    pub e4_star: Vec4,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Thm33Report {
    /// Largest `min over sign of |e4* -+ e2|` (Euclidean).
    pub hypothesis_defect: f64,
    pub max_k1p: f64,
    pub max_k2p: f64,
    /// Largest `|-k1'/2 - alpha (mu1 k1 k1' + mu2 k2 k2')|`.
    pub max_eq_residual: f64,
    pub verdict: Verdict,
}

impl Thm33Report {
    pub fn to_json(&self) -> Json {
        Json::obj()
            .with("verdict", self.verdict)
            .with("hypothesis_defect", self.hypothesis_defect)
            .with("max_k1_prime", self.max_k1p)
            .with("max_k2_prime", self.max_k2p)
            .with("max_derivative_identity_residual", self.max_eq_residual)
    }
}

/// `-k1'/2 - alpha (mu1 k1 k1' + mu2 k2 k2')`.
pub fn eq_residual(x: &Thm33Sample, alpha: f64) -> f64 {
    -0.5 * x.k1p - alpha * (x.mu1 * x.k1 * x.k1p + x.mu2 * x.k2 * x.k2p)
}

fn parallel_defect(a: Vec4, b: Vec4) -> f64 {
    (a - b).euclid_norm().min((a + b).euclid_norm())
}

/// Verdict of the criterion from samples; the data core of [`verify_thm33`].
pub fn thm33_from_samples(samples: &[Thm33Sample], alpha: f64, tol: f64, hyp_tol: f64) -> Result<Thm33Report> {
    let mut hypothesis_defect = 0.0f64;
    for x in samples {
        let d = parallel_defect(x.e4_star, x.e2);
        if !(d <= hyp_tol) {
            return Err(Error::HypothesisNotMet(format!(
                "e4* is not parallel to e2 at s = {} (defect {d:e})",
                x.s
            )));
        }
        hypothesis_defect = hypothesis_defect.max(d);
    }
    let max = |f: &dyn Fn(&Thm33Sample) -> f64| samples.iter().map(f).fold(0.0, f64::max);
    let max_k1p = max(&|x| x.k1p.abs());
    let max_k2p = max(&|x| x.k2p.abs());
    let max_eq_residual = max(&|x| eq_residual(x, alpha).abs());
    let scale = max(&|x| x.k1.abs().max(x.k2.abs())).max(1.0);
    let verdict = if max_k1p <= tol * scale && max_k2p <= tol * scale {
        Verdict::Holds
    } else {
        Verdict::Fails
    };
    Ok(Thm33Report { hypothesis_defect, max_k1p, max_k2p, max_eq_residual, verdict })
}

/// Checks the hypothesis `e4* = -+e2` and then the constancy of `k1`, `k2`.
pub fn verify_thm33(pair: &MatePair<'_>, n: usize, tol: f64, hyp_tol: f64, ftol: &FrenetTol) -> Result<Thm33Report> {
    let probes = probe_pair(pair, n, ftol)?;
    let samples: Vec<Thm33Sample> = probes
        .iter()
        .map(|p| Thm33Sample {
            s: p.s,
            k1: p.base.k[0],
            k2: p.base.k[1],
            k1p: p.k1p,
            k2p: p.k2p,
            mu1: p.base.mu[0],
            mu2: p.base.mu[1],
            e2: p.base.e[1],
            e4_star: p.mate.e[3],
        })
        .collect();
    thm33_from_samples(&samples, pair.alpha, tol, hyp_tol)
}

/// The derivative identity `-k1'/2 = alpha (mu1 k1 k1' + mu2 k2 k2')` on the
/// base curve alone, at the given parameters.
pub fn derivative_identity_residuals(c: &dyn Curve, alpha: f64, us: &[f64], tol: &FrenetTol) -> Result<Vec<f64>> {
    us.par_iter()
        .map(|&u| {
            let (app, fj) = frame_jets_at_u(c, u, tol)?;
            let x = Thm33Sample {
                s: u,
                k1: app.k[0],
                k2: app.k[1],
                k1p: fj.k1.derivative(1),
                k2p: fj.k2.derivative(1),
                mu1: app.mu[0],
                mu2: app.mu[1],
                e2: app.e[1],
                e4_star: Vec4::ZERO,
            };
            Ok(eq_residual(&x, alpha))
        })
        .collect()
}

/// `<c* - c, c* - c>` at the table nodes, which should equal `alpha² eps2`.
pub fn offset_norms(pair: &MatePair<'_>) -> Result<Vec<f64>> {
    pair.table
        .iter()
        .map(|t| {
            let d = pair.mate.position(t.u)? - pair.base.position(t.u)?;
            Ok(inner(d, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;
    use crate::family::{generate_curve, FamilyParams};
    use approx::assert_relative_eq;

    fn fixture() -> CurveSpec {
        CurveSpec::parse(["sinh(u)", "cosh(u)", "sqrt(2)*cos(u)", "sqrt(2)*sin(u)"], (0.0, 2.0), "u").unwrap()
    }

    #[test]
    fn alpha_pointwise_examples() {
        let a = alpha_pointwise(3f64.sqrt(), (8.0f64 / 3.0).sqrt(), Case::Case2).unwrap();
        assert_relative_eq!(a, 3.0 * 3f64.sqrt(), max_relative = 1e-12);
        assert_eq!(alpha_pointwise(1.0, 1.0, Case::Case1).unwrap(), 0.5);
        assert!(matches!(
            alpha_pointwise(1.0, 1.0, Case::Case2),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn alpha_pointwise_zeroes_the_residual() {
        for case in [Case::Case1, Case::Case2, Case::Case3] {
            let [mu1, mu2, _] = case.mu();
            for (k1, k2) in [(0.3, 1.7), (2.0, 0.1), (1.1, 0.9)] {
                let a = alpha_pointwise(k1, k2, case).unwrap();
                let r = k1 + a * (mu1 * k1 * k1 + mu2 * k2 * k2);
                assert!(r.abs() <= 8.0 * f64::EPSILON * k1);
            }
        }
    }

    #[test]
    fn fixture_condition_holds() {
        let c = fixture();
        let r = check_condition(&c, 100, &Thresholds::default(), &FrenetTol::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.case, Case::Case2);
        assert_relative_eq!(r.alpha_hat, 3.0 * 3f64.sqrt(), max_relative = 1e-10);
        assert!(r.alpha_rel_spread <= 1e-9);
        let j = r.to_json().to_string();
        assert!(j.starts_with(r#"{"verdict":"Holds","alpha_hat":5.1961524227066"#), "{j}");
    }

    #[test]
    fn family_condition_has_negative_alpha() {
        // e2 is timelike for this member, so the condition reads k1 = -alpha (k1² + k2²)
        let p = FamilyParams::parse(0.5, "u", "u^2/4", (0.5, 2.0)).unwrap();
        let c = generate_curve(&p).unwrap();
        let r = check_condition(&c, 40, &Thresholds::default(), &FrenetTol::new(0.0)).unwrap();
        assert_eq!(r.case, Case::Case3);
        assert_eq!(r.verdict, Verdict::Holds);
        assert_relative_eq!(r.alpha_hat, -0.5, max_relative = 1e-6);
    }

    #[test]
    fn generic_curve_fails() {
        let c = CurveSpec::parse(["sinh(u)/2", "2*u", "2*cos(u)", "u^3/3 + sin(u)"], (0.1, 1.0), "u").unwrap();
        let r = check_condition(&c, 30, &Thresholds::default(), &FrenetTol::default()).unwrap();
        assert_eq!(r.case, Case::Case1);
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.alpha_rel_spread > 1.0);
    }

    #[test]
    fn case_change_is_reported() {
        let c = CurveSpec::parse(["u^2/2", "cosh(2*u)", "3*sin(u)", "u^3"], (0.1, 1.0), "u").unwrap();
        assert!(matches!(
            check_condition(&c, 30, &Thresholds::default(), &FrenetTol::default()),
            Err(Error::CaseChange(_))
        ));
    }

    #[test]
    fn synthetic_condition_samples() {
        let thr = Thresholds::default();
        // k2 = k1 in Case 1 forces alpha = 1/(2 k1), which varies with k1
        let xs: Vec<_> = (0..10).map(|i| (i as f64, 1.0 + 0.1 * i as f64, 1.0 + 0.1 * i as f64)).collect();
        assert_eq!(condition_from_samples(&xs, Case::Case1, &thr).verdict, Verdict::Fails);
        assert_eq!(condition_from_samples(&xs, Case::Case2, &thr).verdict, Verdict::Degenerate);
        let xs: Vec<_> = (0..10).map(|i| (i as f64, 2.0, 3.0)).collect();
        let r = condition_from_samples(&xs, Case::Case3, &thr);
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.alpha_hat, -2.0 / 13.0);
    }

    #[test]
    fn mate_speed_examples() {
        let c = fixture();
        let app = frenet_at_u(&c, 0.7, &FrenetTol::default()).unwrap();
        let a = 3.0 * 3f64.sqrt();
        assert_relative_eq!(mate_speed(&app, a, 0.0), 2.0 * 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(mate_speed(&app, 0.0, 0.0), 1.0);
        let direct = mate_speed_direct(&c, 0.7, a, &FrenetTol::default()).unwrap();
        assert_relative_eq!(direct, 2.0 * 2f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn mate_speed_reduces_under_the_condition() {
        // Case 1 with k1 = alpha (k1² + k2²): speed = sqrt|1 - alpha k1|
        let p = FamilyParams::parse(0.5, "2*u", "u^2", (0.2, 2.0)).unwrap();
        let c = crate::family::FamilyCurve::integrand_only(p);
        for u in [0.4, 1.0, 1.6] {
            let app = frenet_at_u(&c, u, &FrenetTol::new(0.0)).unwrap();
            assert_eq!(app.case, Case::Case1);
            let want = (1.0 - 0.5 * app.k[0]).abs().sqrt();
            assert!((mate_speed(&app, 0.5, 0.0) - want).abs() < 1e-9);
        }
    }

    #[test]
    fn fixture_mate() {
        let c = fixture();
        let a = 3.0 * 3f64.sqrt();
        let pair = construct_mate(&c, a, 200, &FrenetTol::default()).unwrap();
        for u in [0.0, 0.3337, 1.0, 1.999, 2.0] {
            assert_relative_eq!(pair.mate_speed_at(u).unwrap(), 2.0 * 2f64.sqrt(), max_relative = 1e-9);
        }
        let last = pair.table.last().unwrap();
        assert_relative_eq!(last.s_star, 2.0 * 2f64.sqrt() * last.s, max_relative = 1e-9);
        for q in offset_norms(&pair).unwrap() {
            assert_relative_eq!(q, a * a, max_relative = 1e-12);
        }
        // the mate is timelike, so it has no spacelike Frenet frame
        assert!(matches!(
            verify_pair(&pair, 25, 1e-4, &FrenetTol::default()),
            Err(Error::MateNotFrenet(_))
        ));
    }

    #[test]
    fn zero_alpha_mate_is_the_base() {
        let c = fixture();
        let pair = construct_mate(&c, 0.0, 10, &FrenetTol::default()).unwrap();
        assert_eq!(pair.table.len(), MIN_MATE_NODES);
        for t in &pair.table {
            assert!((t.s_star - t.s).abs() <= 1e-12, "{t:?}");
        }
        let r = verify_pair(&pair, 10, 1e-4, &FrenetTol::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_relative_eq!(r.max_r2, 1.0, max_relative = 1e-6);
        assert!(r.max_r1 < 1e-6);
    }

    #[test]
    fn straight_line_mate_propagates() {
        let c = CurveSpec::parse(["0", "u", "2*u", "0"], (0.0, 1.0), "u").unwrap();
        assert!(matches!(
            construct_mate(&c, 1.0, 200, &FrenetTol::default()),
            Err(Error::DegenerateK1 { .. })
        ));
    }

    #[test]
    fn family_pair_inclusion() {
        let p = FamilyParams::parse(0.5, "u", "u^2/4", (0.5, 2.0)).unwrap();
        let c = generate_curve(&p).unwrap();
        let pair = construct_mate(&c, -0.5, 200, &FrenetTol::new(0.0)).unwrap();
        let r = verify_pair(&pair, 25, 1e-4, &FrenetTol::new(0.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{} {}", r.max_r1, r.max_r2);
        // the other sign of alpha is not a Mannheim mate
        let bad = construct_mate(&c, 0.5, 200, &FrenetTol::new(0.0)).unwrap();
        match verify_pair(&bad, 25, 1e-4, &FrenetTol::new(0.0)) {
            Ok(r) => assert_eq!(r.verdict, Verdict::Fails),
            Err(e) => assert!(matches!(e, Error::MateNotFrenet(_))),
        }
    }

    #[test]
    fn family_pair_thm33_hypothesis_absent() {
        let p = FamilyParams::parse(0.5, "u", "u^2/4", (0.5, 2.0)).unwrap();
        let c = generate_curve(&p).unwrap();
        let pair = construct_mate(&c, -0.5, 200, &FrenetTol::new(0.0)).unwrap();
        assert!(matches!(
            verify_thm33(&pair, 25, 1e-6, 1e-3, &FrenetTol::new(0.0)),
            Err(Error::HypothesisNotMet(_))
        ));
    }

    #[test]
    fn thm33_synthetic_contrapositive() {
        let e2 = Vec4::new(0.0, 0.0, 1.0, 0.0);
        let xs: Vec<Thm33Sample> = (0..20)
            .map(|i| {
                let s = i as f64 * 0.1;
                Thm33Sample {
                    s,
                    k1: 1.0 + 0.3 * s,
                    k2: 2.0,
                    k1p: 0.3,
                    k2p: 0.0,
                    mu1: -1.0,
                    mu2: 1.0,
                    e2,
                    e4_star: -e2,
                }
            })
            .collect();
        let r = thm33_from_samples(&xs, 0.5, 1e-6, 1e-3).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert_relative_eq!(r.max_k1p, 0.3);
        let mut ys = xs.clone();
        ys[3].e4_star = Vec4::new(0.0, 1.0, 0.0, 0.0);
        assert!(matches!(thm33_from_samples(&ys, 0.5, 1e-6, 1e-3), Err(Error::HypothesisNotMet(_))));
    }

    #[test]
    fn fixture_derivative_identity_vanishes() {
        let c = fixture();
        let us: Vec<f64> = (1..20).map(|i| i as f64 * 0.1).collect();
        let r = derivative_identity_residuals(&c, 3.0 * 3f64.sqrt(), &us, &FrenetTol::default()).unwrap();
        assert!(r.iter().all(|x| x.abs() <= 1e-10), "{r:?}");
    }
}
