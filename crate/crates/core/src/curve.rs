//! Parametric curves in E₁⁴: jets, speed, arc length and its inverse, and
//! unit-speed reparametrization by series reversion.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet, MAX_ORDER};
use crate::lorentz::{classify, inner, CausalKind, Vec4, NULL_TOL};

/// Four scalar jets, one per coordinate.
pub type VecJet = [Jet; 4];

pub fn vj_value(a: &VecJet) -> Vec4 {
    Vec4::new(a[0].value(), a[1].value(), a[2].value(), a[3].value())
}

/// Minkowski inner product of two vector jets (x1 term first).
pub fn vj_inner(a: &VecJet, b: &VecJet) -> Jet {
    -(a[0] * b[0]) + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

pub fn vj_diff(a: &VecJet) -> VecJet {
    a.map(|j| j.differentiate())
}

pub fn vj_mul(a: &VecJet, k: &Jet) -> VecJet {
    a.map(|j| j * *k)
}

pub fn vj_div(a: &VecJet, k: &Jet) -> VecJet {
    a.map(|j| j / *k)
}

pub fn vj_sub(a: &VecJet, b: &VecJet) -> VecJet {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

pub fn vj_add(a: &VecJet, b: &VecJet) -> VecJet {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

pub fn vj_truncate(a: &VecJet, order: usize) -> VecJet {
    a.map(|j| j.truncate(order))
}

pub fn vj_compose(a: &VecJet, t: &Jet) -> VecJet {
    a.map(|j| j.compose(t))
}

/// A regular curve `u -> c(u)` on a closed parameter interval.
pub trait Curve: Send + Sync {
    fn domain(&self) -> (f64, f64);

    fn position(&self, u: f64) -> Result<Vec4>;

    /// Jets of `dc/du` at `u`, i.e. derivatives 1..=order+1 of the curve.
    fn velocity_jet(&self, u: f64, order: usize) -> Result<VecJet>;

    /// Highest velocity-jet order the curve can supply.
    fn max_velocity_order(&self) -> usize {
        MAX_ORDER - 1
    }

    /// Highest derivative of `c` that is represented faithfully. Spline-backed
    /// curves report less than the jet machinery can carry.
    fn exact_order(&self) -> usize {
        self.max_velocity_order() + 1
    }

    fn velocity(&self, u: f64) -> Result<Vec4> {
        Ok(vj_value(&self.velocity_jet(u, 0)?))
    }

    fn jet(&self, u: f64, order: usize) -> Result<VecJet> {
        let p = self.position(u)?;
        if order == 0 {
            return Ok([0, 1, 2, 3].map(|i| Jet::constant(p[i], 0)));
        }
        let v = self.velocity_jet(u, order - 1)?;
        Ok([0, 1, 2, 3].map(|i| v[i].integrate(p[i])))
    }

    fn check_in_domain(&self, u: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if u.is_finite() && u >= lo && u <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange { value: u, lo, hi })
        }
    }
}

/// A curve given by four closed-form coordinate expressions.
#[derive(Debug, Clone)]
pub struct CurveSpec {
    pub x: [Expr; 4],
    pub domain: (f64, f64),
    pub param: String,
}

const PROBES: usize = 65;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveDoc {
    #[serde(default = "default_param")]
    param: String,
    x1: String,
    x2: String,
    x3: String,
    x4: String,
    domain: [f64; 2],
}

fn default_param() -> String {
    "u".into()
}

impl CurveSpec {
    pub fn new(x: [Expr; 4], domain: (f64, f64), param: &str) -> Result<Self> {
        let (lo, hi) = domain;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!(
                "domain [{lo}, {hi}] must be a finite interval with lo < hi"
            )));
        }
        if param != "u" && param != "s" {
            return Err(Error::InvalidInput(format!(
                "parameter must be `u` or `s`, got `{param}`"
            )));
        }
        for e in &x {
            if let Some(v) = e.var_names().into_iter().find(|v| v != param) {
                return Err(Error::InvalidInput(format!(
                    "expression `{e}` uses `{v}` but the parameter is `{param}`"
                )));
            }
        }
        let spec = CurveSpec {
            x,
            domain,
            param: param.to_string(),
        };
        for i in 0..PROBES {
            let u = lo + (hi - lo) * i as f64 / (PROBES - 1) as f64;
            spec.position(u)?;
        }
        Ok(spec)
    }

    pub fn parse(x: [&str; 4], domain: (f64, f64), param: &str) -> Result<Self> {
        let exprs = [
            Expr::parse(x[0])?,
            Expr::parse(x[1])?,
            Expr::parse(x[2])?,
            Expr::parse(x[3])?,
        ];
        CurveSpec::new(exprs, domain, param)
    }

    /// Reads the curve JSON document `{"param","x1".."x4","domain"}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CurveDoc = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("curve JSON: {e}")))?;
        CurveSpec::parse(
            [&doc.x1, &doc.x2, &doc.x3, &doc.x4],
            (doc.domain[0], doc.domain[1]),
            &doc.param,
        )
    }
}

impl Curve for CurveSpec {
    fn domain(&self) -> (f64, f64) {
        self.domain
    }

    fn position(&self, u: f64) -> Result<Vec4> {
        Ok(Vec4::new(
            self.x[0].eval(u)?,
            self.x[1].eval(u)?,
            self.x[2].eval(u)?,
            self.x[3].eval(u)?,
        ))
    }

    fn velocity_jet(&self, u: f64, order: usize) -> Result<VecJet> {
        let order = order.min(MAX_ORDER - 1);
        let mut out = [Jet::constant(0.0, order); 4];
        for (slot, e) in out.iter_mut().zip(&self.x) {
            *slot = e.eval_jet(u, order + 1)?.differentiate();
        }
        Ok(out)
    }

    fn jet(&self, u: f64, order: usize) -> Result<VecJet> {
        let order = order.min(MAX_ORDER);
        let mut out = [Jet::constant(0.0, order); 4];
        for (slot, e) in out.iter_mut().zip(&self.x) {
            *slot = e.eval_jet(u, order)?;
        }
        Ok(out)
    }
}

/// Component-wise jets of `c` at `u`.
pub fn curve_jet(c: &dyn Curve, u: f64, order: usize) -> Result<VecJet> {
    c.check_in_domain(u)?;
    c.jet(u, order)
}

/// Minkowski norm of `dc/du`.
pub fn speed(c: &dyn Curve, u: f64) -> Result<f64> {
    Ok(crate::lorentz::norm(c.velocity(u)?))
}

/// Speed that refuses null velocities.
fn spacelike_speed(c: &dyn Curve, u: f64) -> Result<f64> {
    let v = c.velocity(u)?;
    let cls = classify(v, NULL_TOL);
    if cls.kind == CausalKind::Null {
        return Err(Error::NullSegment { at: u });
    }
    Ok(cls.q.abs().sqrt())
}

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const QUAD_ABS_TOL: f64 = 1e-10;
pub const QUAD_REL_TOL: f64 = 1e-10;
pub const QUAD_BUDGET: usize = 10_000;

fn gk15<const N: usize>(
    f: &dyn Fn(f64) -> Result<[f64; N]>,
    a: f64,
    b: f64,
) -> Result<([f64; N], f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = [0.0; N];
    let mut g = [0.0; N];
    for (i, &x) in XGK.iter().enumerate() {
        let pts: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
        for &t in pts {
            let y = f(c + h * t)?;
            for n in 0..N {
                k[n] += WGK[i] * y[n];
                if i % 2 == 1 {
                    g[n] += WG[i / 2] * y[n];
                }
            }
        }
    }
    let mut err = 0.0f64;
    for n in 0..N {
        k[n] *= h;
        g[n] *= h;
        err = err.max((k[n] - g[n]).abs());
    }
    Ok((k, err))
}

struct Piece<const N: usize> {
    a: f64,
    b: f64,
    val: [f64; N],
    err: f64,
}

impl<const N: usize> PartialEq for Piece<N> {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl<const N: usize> Eq for Piece<N> {}
impl<const N: usize> PartialOrd for Piece<N> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const N: usize> Ord for Piece<N> {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive G7/K15 quadrature of a vector integrand with interval
/// bisection. Stops when the summed error estimate drops below
/// `max(abs_tol, rel_tol * |I|)` (max-norm over components).
pub fn integrate<const N: usize>(
    f: &dyn Fn(f64) -> Result<[f64; N]>,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<[f64; N]> {
    if a == b {
        return Ok([0.0; N]);
    }
    let (val, err) = gk15(f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val, err });
    let mut pieces = 1usize;
    loop {
        let mut total = [0.0; N];
        let mut total_err = 0.0;
        for p in heap.iter() {
            for n in 0..N {
                total[n] += p.val[n];
            }
            total_err += p.err;
        }
        let mag = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if total_err <= abs_tol.max(rel_tol * mag) {
            return Ok(total);
        }
        if pieces >= QUAD_BUDGET {
            return Err(Error::NonConvergence { lo: a, hi: b });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::NonConvergence { lo: worst.a, hi: worst.b });
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (val, err) = gk15(f, lo, hi)?;
            heap.push(Piece { a: lo, b: hi, val, err });
        }
        pieces += 1;
    }
}

/// Arc length of `c` between `u0` and `u1` (signed by orientation).
pub fn arc_length(c: &dyn Curve, u0: f64, u1: f64) -> Result<f64> {
    c.check_in_domain(u0)?;
    c.check_in_domain(u1)?;
    let f = |u: f64| spacelike_speed(c, u).map(|v| [v]);
    Ok(integrate(&f, u0, u1, QUAD_ABS_TOL, QUAD_REL_TOL)?[0])
}

pub const CHECKPOINTS: usize = 256;

/// Checkpoint table `s = psi(u)` with monotone cubic interpolation of the
/// inverse, used to bracket Newton iterations on the exact arc length.
pub struct ArcLengthMap<'a> {
    curve: &'a dyn Curve,
    u: Vec<f64>,
    s: Vec<f64>,
    /// du/ds at the nodes after Fritsch-Carlson limiting.
    slope: Vec<f64>,
}

impl<'a> ArcLengthMap<'a> {
    pub fn new(curve: &'a dyn Curve) -> Result<Self> {
        let (lo, hi) = curve.domain();
        let n = CHECKPOINTS;
        let u: Vec<f64> = (0..n)
            .map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
            .collect();
        let mut s = vec![0.0; n];
        let mut speeds = vec![0.0; n];
        speeds[0] = spacelike_speed(curve, u[0])?;
        for i in 1..n {
            s[i] = s[i - 1] + arc_length(curve, u[i - 1], u[i])?;
            speeds[i] = spacelike_speed(curve, u[i])?;
            if s[i] <= s[i - 1] {
                return Err(Error::NullSegment { at: u[i] });
            }
        }
        let mut slope: Vec<f64> = speeds.iter().map(|v| 1.0 / v).collect();
        for i in 0..n - 1 {
            let delta = (u[i + 1] - u[i]) / (s[i + 1] - s[i]);
            let a = slope[i] / delta;
            let b = slope[i + 1] / delta;
            let r = a * a + b * b;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slope[i] = tau * a * delta;
                slope[i + 1] = tau * b * delta;
            }
        }
        Ok(ArcLengthMap { curve, u, s, slope })
    }

    pub fn curve(&self) -> &'a dyn Curve {
        self.curve
    }

    pub fn total(&self) -> f64 {
        *self.s.last().expect("table is nonempty")
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.s.iter().copied())
    }

    /// `psi(u)`, measured from the start of the domain.
    pub fn arc_length_at(&self, u: f64) -> Result<f64> {
        self.curve.check_in_domain(u)?;
        let j = self.u.partition_point(|&x| x <= u).saturating_sub(1);
        Ok(self.s[j] + arc_length(self.curve, self.u[j], u)?)
    }

    fn guess(&self, j: usize, s: f64) -> f64 {
        let h = self.s[j + 1] - self.s[j];
        let t = (s - self.s[j]) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.u[j]
            + (t3 - 2.0 * t2 + t) * h * self.slope[j]
            + (-2.0 * t3 + 3.0 * t2) * self.u[j + 1]
            + (t3 - t2) * h * self.slope[j + 1]
    }

    /// `phi(s)`: the parameter at arc length `s`.
    pub fn invert(&self, s: f64) -> Result<f64> {
        let total = self.total();
        let slack = 1e-12 * total.max(1.0);
        if !(s >= -slack && s <= total + slack) {
            return Err(Error::OutOfRange { value: s, lo: 0.0, hi: total });
        }
        let s = s.clamp(0.0, total);
        let j = self.s.partition_point(|&x| x <= s).saturating_sub(1).min(self.u.len() - 2);
        if s == self.s[j] {
            return Ok(self.u[j]);
        }
        if s == self.s[j + 1] {
            return Ok(self.u[j + 1]);
        }
        let (mut a, mut b) = (self.u[j], self.u[j + 1]);
        let mut u = self.guess(j, s).clamp(a, b);
        let goal = 1e-9 * s.max(1.0);
        let mut resid = f64::INFINITY;
        for _ in 0..60 {
            resid = self.s[j] + arc_length(self.curve, self.u[j], u)? - s;
            if resid.abs() <= 1e-3 * goal {
                return Ok(u);
            }
            if resid > 0.0 {
                b = u;
            } else {
                a = u;
            }
            let step = resid / spacelike_speed(self.curve, u)?;
            let next = u - step;
            u = if next > a && next < b { next } else { 0.5 * (a + b) };
            if b - a <= f64::EPSILON * u.abs().max(1.0) {
                break;
            }
        }
        if resid.abs() <= goal {
            Ok(u)
        } else {
            Err(Error::NonConvergence { lo: a, hi: b })
        }
    }
}

pub fn invert_arclength(m: &ArcLengthMap<'_>, s: f64) -> Result<f64> {
    m.invert(s)
}

/// Derivatives of `c` with respect to arc length about `u`, as jets in the
/// arc-length offset, together with `psi(u + t) - psi(u)` as a jet in `t`.
/// The position jets have zero constant term.
pub(crate) fn local_unit_speed(c: &dyn Curve, u: f64, order: usize) -> Result<(VecJet, Jet)> {
    let order = order.clamp(1, c.max_velocity_order() + 1);
    let v = c.velocity_jet(u, order - 1)?;
    let q = vj_inner(&v, &v);
    let cls = classify(vj_value(&v), NULL_TOL);
    if cls.kind != CausalKind::Spacelike || q.value() <= 0.0 {
        return Err(Error::NullTangent { at: u });
    }
    // psi(u + t) - psi(u) = integral of speed; phi is its series inverse.
    let psi = q.sqrt().integrate(0.0);
    let phi = psi.revert();
    let pos = v.map(|j| j.integrate(0.0));
    Ok((vj_compose(&pos, &phi), psi))
}

/// Arc-length jets of `c` at arc length `s` (order at most 4).
pub fn unit_speed_jet(c: &dyn Curve, m: &ArcLengthMap<'_>, s: f64, order: usize) -> Result<VecJet> {
    let u = m.invert(s)?;
    let (mut j, _) = local_unit_speed(c, u, order.min(4))?;
    let p = c.position(u)?;
    for i in 0..4 {
        let mut coeffs = [0.0; MAX_ORDER + 1];
        for (k, slot) in coeffs.iter_mut().enumerate().take(j[i].order() + 1) {
            *slot = j[i].taylor(k);
        }
        coeffs[0] = p[i];
        j[i] = Jet::from_taylor(&coeffs[..=j[i].order()]);
    }
    Ok(j)
}

/// Euclidean max over a uniform probe grid of `|c(u)|`.
pub fn curve_scale(c: &dyn Curve) -> f64 {
    let (lo, hi) = c.domain();
    (0..PROBES)
        .filter_map(|i| c.position(lo + (hi - lo) * i as f64 / (PROBES - 1) as f64).ok())
        .map(|p| p.euclid_norm())
        .fold(0.0, f64::max)
}

/// `<v, v>` of the velocity, used by callers that need the raw sign.
pub fn velocity_q(c: &dyn Curve, u: f64) -> Result<f64> {
    let v = c.velocity(u)?;
    Ok(inner(v, v))
}
