//! The special spacelike Frenet apparatus: frame, curvatures, sign
//! bookkeeping and causal case, built in four steps from arc-length jets.
//!
//! Frenet system, with `eps_i = <e_i, e_i>`:
//!
//! ```text
//! e1' = k1 e2
//! e2' = mu1 k1 e1 + k2 e3
//! e3' = mu2 k2 e2 + k3 e4
//! e4' = mu3 k3 e3
//! ```
//!
//! `k3` is taken as `eps4 <e3', e4>` so that the third row holds as written.

use std::fmt;

use rayon::prelude::*;

use crate::curve::{
    curve_scale, local_unit_speed, vj_diff, vj_div, vj_inner, vj_mul, vj_sub,
    vj_value, ArcLengthMap, Curve, VecJet,
};
use crate::error::{Error, Result};
use crate::expr::{Jet, MAX_ORDER};
use crate::lorentz::{causal_sign, frame_det, inner, Vec4};

/// Projections farther than this from ±1 reject the apparatus.
pub const SIGN_SLACK: f64 = 0.1;

/// Curvatures whose squared Minkowski norm is below this fraction of the
/// squared Euclidean norm of the underlying vector are treated as zero.
pub const CANCELLATION_TOL: f64 = 1e-12;

pub const K3_CONVENTION: &str = "row-consistent: k3 = eps4 * <e3', e4>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    /// e4 timelike
    Case1,
    /// e3 timelike
    Case2,
    /// e2 timelike
    Case3,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Case1 => "Case1",
            Case::Case2 => "Case2",
            Case::Case3 => "Case3",
        }
    }

    /// `(mu1, mu2, mu3)`.
    pub fn mu(self) -> [f64; 3] {
        match self {
            Case::Case1 => [-1.0, -1.0, 1.0],
            Case::Case2 => [-1.0, 1.0, 1.0],
            Case::Case3 => [1.0, 1.0, -1.0],
        }
    }

    /// `(eps1, eps2, eps3, eps4)`.
    pub fn eps(self) -> [f64; 4] {
        match self {
            Case::Case1 => [1.0, 1.0, 1.0, -1.0],
            Case::Case2 => [1.0, 1.0, -1.0, 1.0],
            Case::Case3 => [1.0, -1.0, 1.0, 1.0],
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetApparatus {
    /// Arc length (or the raw parameter when no arc-length map is involved).
    pub s: f64,
    pub u: f64,
    pub e: [Vec4; 4],
    pub k: [f64; 3],
    pub mu: [f64; 3],
    pub eps: [f64; 4],
    /// Sign applied to the normalized fourth vector to make the frame positive.
    pub orient: f64,
    pub case: Case,
}

impl FrenetApparatus {
    pub fn det(&self) -> f64 {
        frame_det(self.e[0], self.e[1], self.e[2], self.e[3])
    }

    /// Right-hand side of the Frenet system, row `i`.
    pub fn row(&self, i: usize) -> Vec4 {
        let [e1, e2, e3, e4] = self.e;
        let [k1, k2, k3] = self.k;
        let [mu1, mu2, mu3] = self.mu;
        match i {
            0 => k1 * e2,
            1 => mu1 * k1 * e1 + k2 * e3,
            2 => mu2 * k2 * e2 + k3 * e4,
            3 => mu3 * k3 * e3,
            _ => panic!("Frenet row {i} out of range"),
        }
    }

    /// Largest `|<e_i, e_j> - eps_i delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { self.eps[i] } else { 0.0 };
                worst = worst.max((inner(self.e[i], self.e[j]) - want).abs());
            }
        }
        worst
    }
}

/// Frame vectors as arc-length jets, as far as the construction carries them.
/// With arc-length jets of `c` to order `n`, `e1` has order `n-1`, `e2` and
/// `k1` order `n-2`, `e3` and `k2` order `n-3`.
#[derive(Debug, Clone, Copy)]
pub struct FrameJets {
    pub e1: VecJet,
    pub e2: VecJet,
    pub e3: VecJet,
    pub k1: Jet,
    pub k2: Jet,
    /// Arc-length offset as a jet in the raw parameter offset.
    pub psi: Jet,
}

/// Degeneracy thresholds for `k1`, `k2`, `|k3|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrenetTol {
    pub abs: f64,
    pub cancellation: f64,
}

impl FrenetTol {
    pub fn new(abs: f64) -> Self {
        FrenetTol {
            abs,
            cancellation: CANCELLATION_TOL,
        }
    }

    /// `1e-8 * max(1, scale)` with scale the largest `|c|` on a probe grid.
    pub fn for_curve(c: &dyn Curve) -> Self {
        FrenetTol::new(1e-8 * curve_scale(c).max(1.0))
    }
}

impl Default for FrenetTol {
    fn default() -> Self {
        FrenetTol::new(1e-8)
    }
}

/// Minkowski length of `v` as a jet, or `None` when it falls under the
/// tolerance or is lost to cancellation.
fn length(v: &VecJet, tol: &FrenetTol) -> Option<Jet> {
    let q = vj_inner(v, v);
    let e2 = vj_value(v).euclid_norm_sq();
    let k = q.value().abs().sqrt();
    if !(k > tol.abs) || q.value().abs() <= tol.cancellation * e2 {
        return None;
    }
    let q = if q.value() < 0.0 { -q } else { q };
    Some(q.sqrt())
}

fn round_sign(which: &'static str, raw: f64, at: f64) -> Result<f64> {
    if (raw.abs() - 1.0).abs() > SIGN_SLACK || !raw.is_finite() {
        return Err(Error::InconsistentSign { which, at, value: raw });
    }
    Ok(raw.signum())
}

/// Four-step construction from the arc-length jets `cs` (order >= 4) taken at
/// parameter `u`.
fn construct(cs: &VecJet, psi: Jet, u: f64, tol: &FrenetTol) -> Result<(FrenetApparatus, FrameJets)> {
    // step 1
    let e1 = vj_diff(cs);
    let d1 = vj_diff(&e1);
    let k1 = length(&d1, tol).ok_or_else(|| Error::DegenerateK1 {
        at: u,
        k: inner(vj_value(&d1), vj_value(&d1)).abs().sqrt(),
    })?;
    let e2 = vj_div(&d1, &k1);

    // step 2
    let d2 = vj_diff(&e2);
    let e1v = vj_value(&e1);
    let mu1 = round_sign("mu1", inner(vj_value(&d2), e1v) / k1.value(), u)?;
    let r2 = vj_sub(&d2, &vj_mul(&e1, &k1.scale(mu1)));
    let k2 = length(&r2, tol).ok_or_else(|| Error::DegenerateK2 {
        at: u,
        k: inner(vj_value(&r2), vj_value(&r2)).abs().sqrt(),
    })?;
    let e3 = vj_div(&r2, &k2);

    // step 3
    let e2v = vj_value(&e2);
    let e3v = vj_value(&e3);
    let eps2 = causal_sign(e2v);
    let eps3 = causal_sign(e3v);
    let d3 = vj_value(&vj_diff(&e3));
    let mu2 = round_sign("mu2", inner(d3, e2v) / (k2.value() * eps2), u)?;
    let raw4 = d3 - mu2 * k2.value() * e2v;
    let q4 = inner(raw4, raw4);
    let n4 = q4.abs().sqrt();
    if !(n4 > tol.abs) || q4.abs() <= tol.cancellation * raw4.euclid_norm_sq() {
        return Err(Error::DegenerateK3 { at: u, k: n4 });
    }

    // step 4
    let unit4 = raw4 / n4;
    let orient = frame_det(e1v, e2v, e3v, unit4).signum();
    let e4 = orient * unit4;
    let eps4 = causal_sign(e4);
    let k3 = eps4 * inner(d3, e4);

    let case = match (eps2 < 0.0, eps3 < 0.0, eps4 < 0.0) {
        (false, false, true) => Case::Case1,
        (false, true, false) => Case::Case2,
        (true, false, false) => Case::Case3,
        _ => {
            return Err(Error::InconsistentSign {
                which: "causal case",
                at: u,
                value: eps2 + eps3 + eps4,
            })
        }
    };
    let mu = [mu1, mu2, -eps3 * eps4];
    if mu != case.mu() {
        return Err(Error::InconsistentSign {
            which: "mu table",
            at: u,
            value: mu1 * 4.0 + mu2 * 2.0 + mu[2],
        });
    }
    let app = FrenetApparatus {
        s: u,
        u,
        e: [e1v, e2v, e3v, e4],
        k: [k1.value(), k2.value(), k3],
        mu,
        eps: [1.0, eps2, eps3, eps4],
        orient,
        case,
    };
    Ok((app, FrameJets { e1, e2, e3, k1, k2, psi }))
}

/// Apparatus and frame jets at raw parameter `u` (the `s` field is set to `u`).
pub fn frame_jets_at_u(c: &dyn Curve, u: f64, tol: &FrenetTol) -> Result<(FrenetApparatus, FrameJets)> {
    c.check_in_domain(u)?;
    let (cs, psi) = local_unit_speed(c, u, MAX_ORDER)?;
    if cs[0].order() < 4 {
        return Err(Error::InvalidInput(format!(
            "curve supplies derivatives only to order {}",
            cs[0].order()
        )));
    }
    construct(&cs, psi, u, tol)
}

pub fn frenet_at_u(c: &dyn Curve, u: f64, tol: &FrenetTol) -> Result<FrenetApparatus> {
    Ok(frame_jets_at_u(c, u, tol)?.0)
}

/// Apparatus at arc length `s`.
pub fn frenet_apparatus(c: &dyn Curve, m: &ArcLengthMap<'_>, s: f64, tol: &FrenetTol) -> Result<FrenetApparatus> {
    let u = m.invert(s)?;
    let mut app = frenet_at_u(c, u, tol)?;
    app.s = s;
    Ok(app)
}

fn align(e: [Vec4; 4], to: &[Vec4; 4]) -> [Vec4; 4] {
    let mut out = e;
    for i in 0..4 {
        if out[i].to_array().iter().zip(to[i].to_array()).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
            out[i] = -out[i];
        }
    }
    out
}

/// Largest Euclidean defect over the four Frenet rows, with `d/ds` of the
/// frame taken by a fourth-order central difference of step `h`.
pub fn frenet_residual(c: &dyn Curve, m: &ArcLengthMap<'_>, s: f64, h: f64, tol: &FrenetTol) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("step h = {h} must be positive")));
    }
    let mid = frenet_apparatus(c, m, s, tol)?;
    let frames: Vec<[Vec4; 4]> = [-2.0, -1.0, 1.0, 2.0]
        .iter()
        .map(|o| frenet_apparatus(c, m, s + o * h, tol).map(|a| align(a.e, &mid.e)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in 0..4 {
        let d = (frames[0][i] - 8.0 * frames[1][i] + 8.0 * frames[2][i] - frames[3][i]) / (12.0 * h);
        worst = worst.max((d - mid.row(i)).euclid_norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone)]
pub struct AlongSample {
    pub s: f64,
    pub result: Result<FrenetApparatus>,
    /// The case differs from the previous successful sample.
    pub case_change: bool,
    /// Frame vectors whose Euclidean alignment with the previous successful
    /// sample is negative.
    pub misaligned: [bool; 4],
}

/// Apparatus on a grid of arc-length values. Per-sample failures are kept.
pub fn apparatus_along(c: &dyn Curve, m: &ArcLengthMap<'_>, grid: &[f64], tol: &FrenetTol) -> Vec<AlongSample> {
    let results: Vec<Result<FrenetApparatus>> =
        grid.par_iter().map(|&s| frenet_apparatus(c, m, s, tol)).collect();
    let mut out = Vec::with_capacity(grid.len());
    let mut prev: Option<FrenetApparatus> = None;
    for (&s, result) in grid.iter().zip(results) {
        let mut case_change = false;
        let mut misaligned = [false; 4];
        if let (Ok(a), Some(p)) = (&result, &prev) {
            case_change = a.case != p.case;
            for i in 0..4 {
                let dot: f64 = a.e[i].to_array().iter().zip(p.e[i].to_array()).map(|(x, y)| x * y).sum();
                misaligned[i] = dot < 0.0;
            }
        }
        if let Ok(a) = &result {
            prev = Some(*a);
        }
        out.push(AlongSample { s, result, case_change, misaligned });
    }
    out
}

/// `n` equally spaced arc-length values covering the whole curve.
pub fn s_grid(m: &ArcLengthMap<'_>, n: usize) -> Vec<f64> {
    let total = m.total();
    if n <= 1 {
        return vec![0.0];
    }
    (0..n).map(|i| total * i as f64 / (n - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;
    use approx::assert_relative_eq;

    fn fixture() -> CurveSpec {
        CurveSpec::parse(
            ["sinh(u)", "cosh(u)", "sqrt(2)*cos(u)", "sqrt(2)*sin(u)"],
            (0.0, 2.0),
            "u",
        )
        .unwrap()
    }

    #[test]
    fn fixture_at_zero() {
        let c = fixture();
        let m = ArcLengthMap::new(&c).unwrap();
        let a = frenet_apparatus(&c, &m, 0.0, &FrenetTol::for_curve(&c)).unwrap();
        let r2 = 2f64.sqrt();
        let r3 = 3f64.sqrt();
        assert_relative_eq!(a.k[0], r3, epsilon = 1e-12);
        assert_relative_eq!(a.k[1], (8.0f64 / 3.0).sqrt(), epsilon = 1e-12);
        assert_relative_eq!(a.k[2].abs(), 1.0 / r3, epsilon = 1e-12);
        let want_e1 = Vec4::new(1.0, 0.0, 0.0, r2);
        let want_e2 = Vec4::new(0.0, 1.0, -r2, 0.0) / r3;
        let want_e3 = Vec4::new(r2, 0.0, 0.0, 1.0);
        for (got, want) in [(a.e[0], want_e1), (a.e[1], want_e2), (a.e[2], want_e3)] {
            assert!((got - want).euclid_norm() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(a.case, Case::Case2);
        assert_eq!(a.mu, [-1.0, 1.0, 1.0]);
        assert_eq!(a.eps, [1.0, 1.0, -1.0, 1.0]);
        assert!((a.det() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fixture_e3_away_from_zero() {
        let c = fixture();
        let m = ArcLengthMap::new(&c).unwrap();
        let s = 1.3;
        let a = frenet_apparatus(&c, &m, s, &FrenetTol::default()).unwrap();
        let r2 = 2f64.sqrt();
        let want = Vec4::new(r2 * s.cosh(), r2 * s.sinh(), -s.sin(), s.cos());
        assert!((a.e[2] - want).euclid_norm() < 1e-9);
    }

    #[test]
    fn straight_line_degenerates() {
        let c = CurveSpec::parse(["0", "u", "0", "0"], (0.0, 1.0), "u").unwrap();
        let m = ArcLengthMap::new(&c).unwrap();
        assert!(matches!(
            frenet_apparatus(&c, &m, 0.5, &FrenetTol::default()),
            Err(Error::DegenerateK1 { .. })
        ));
        assert!(matches!(
            frenet_residual(&c, &m, 0.5, 1e-3, &FrenetTol::default()),
            Err(Error::DegenerateK1 { .. })
        ));
    }

    #[test]
    fn planar_curve_has_no_k2() {
        let c = CurveSpec::parse(["0", "cos(u)", "sin(u)", "0"], (0.0, 1.0), "u").unwrap();
        assert!(matches!(
            frenet_at_u(&c, 0.5, &FrenetTol::default()),
            Err(Error::DegenerateK2 { .. })
        ));
    }

    #[test]
    fn residual_on_fixture() {
        let c = fixture();
        let m = ArcLengthMap::new(&c).unwrap();
        let r = frenet_residual(&c, &m, 0.5, 1e-3, &FrenetTol::default()).unwrap();
        assert!(r <= 1e-6, "{r}");
    }

    #[test]
    fn residual_converges_at_coarse_steps() {
        // At steps where truncation dominates rounding, halving h gains about 2^4.
        let c = CurveSpec::parse(["sinh(u)", "cosh(u)", "2*cos(u)", "u + sin(u)"], (0.0, 3.0), "u")
            .unwrap();
        let m = ArcLengthMap::new(&c).unwrap();
        let tol = FrenetTol::default();
        let r1 = frenet_residual(&c, &m, 1.0, 0.1, &tol).unwrap();
        let r2 = frenet_residual(&c, &m, 1.0, 0.05, &tol).unwrap();
        assert!(r1 / r2 >= 8.0, "{r1} {r2}");
    }

    #[test]
    fn along_fixture() {
        let c = fixture();
        let m = ArcLengthMap::new(&c).unwrap();
        let grid: Vec<f64> = (0..10).map(|i| 2.0 * i as f64 / 9.0).collect();
        let out = apparatus_along(&c, &m, &grid, &FrenetTol::default());
        assert_eq!(out.len(), 10);
        for smp in &out {
            let a = smp.result.as_ref().unwrap();
            assert_eq!(a.case, Case::Case2);
            assert!((a.k[0] - 3f64.sqrt()).abs() < 1e-9);
            assert!(!smp.case_change && !smp.misaligned.iter().any(|x| *x));
        }
        assert_eq!(apparatus_along(&c, &m, &[0.3], &FrenetTol::default()).len(), 1);
    }

    #[test]
    fn along_keeps_errors_per_sample() {
        // k1 vanishes at u = 0 where the curve is locally straight
        let c = CurveSpec::parse(["sinh(u)", "cosh(u)", "2*u", "u^3"], (-1.0, 1.0), "u").unwrap();
        let m = ArcLengthMap::new(&c).unwrap();
        let s0 = m.arc_length_at(0.0).unwrap();
        let grid = [0.1, s0, m.total() - 0.1];
        let out = apparatus_along(&c, &m, &grid, &FrenetTol::default());
        assert!(out[0].result.is_ok());
        assert!(out[1].result.is_err());
        assert!(out[2].result.is_ok());
    }

    #[test]
    fn case_table_is_consistent() {
        for case in [Case::Case1, Case::Case2, Case::Case3] {
            let [_, e2, e3, e4] = case.eps();
            let mu = case.mu();
            assert_eq!(mu[0], -e2);
            assert_eq!(mu[1], -e2 * e3);
            assert_eq!(mu[2], -e3 * e4);
            assert_eq!([e2, e3, e4].iter().filter(|x| **x < 0.0).count(), 1);
        }
    }

    #[test]
    fn k3_matches_finite_difference_of_e3() {
        let c = fixture();
        let m = ArcLengthMap::new(&c).unwrap();
        let tol = FrenetTol::default();
        let s = 0.8;
        let h = 1e-4;
        let a = frenet_apparatus(&c, &m, s, &tol).unwrap();
        let p = frenet_apparatus(&c, &m, s + h, &tol).unwrap();
        let q = frenet_apparatus(&c, &m, s - h, &tol).unwrap();
        let d = (p.e[2] - q.e[2]) / (2.0 * h);
        assert!((inner(d, a.e[3]).abs() - a.k[2].abs()).abs() < 1e-5);
    }
}
