//! Piecewise-polynomial curves: natural cubic splines for sampled input and
//! two-point Hermite splines for curves whose derivatives are known at nodes.

use crate::curve::{Curve, VecJet};
use crate::error::{Error, Result};
use crate::expr::{Jet, MAX_ORDER};
use crate::lorentz::Vec4;

/// One scalar piecewise polynomial over sorted knots. Each cell stores
/// monomial coefficients in the local variable `t = (u - u_j) / h_j`.
#[derive(Debug, Clone)]
struct Piecewise {
    knots: Vec<f64>,
    coeffs: Vec<Vec<f64>>,
    /// Smooth stand-in for the third derivative of a cubic, supplying orders
    /// 4 and 5 that the cells themselves lack.
    tail: Option<Box<Piecewise>>,
}

impl Piecewise {
    fn cell(&self, u: f64) -> usize {
        self.knots.partition_point(|&x| x <= u).clamp(1, self.knots.len() - 1) - 1
    }

    /// `f, f', ..., f^(order)` at `u`.
    fn derivs(&self, u: f64, order: usize) -> [f64; MAX_ORDER + 1] {
        let j = self.cell(u);
        let h = self.knots[j + 1] - self.knots[j];
        let t = (u - self.knots[j]) / h;
        let mut poly = self.coeffs[j].clone();
        let mut out = [0.0; MAX_ORDER + 1];
        let mut scale = 1.0;
        for slot in out.iter_mut().take(order + 1) {
            *slot = poly.iter().rev().fold(0.0, |acc, c| acc * t + c) * scale;
            poly = poly.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect();
            scale /= h;
        }
        if let Some(tail) = &self.tail {
            if order > 3 {
                let d = tail.derivs(u, order - 3);
                out[4..=order].copy_from_slice(&d[1..=order - 3]);
            }
        }
        out
    }
}

fn check_knots(u: &[f64]) -> Result<()> {
    if u.len() < 2 {
        return Err(Error::InvalidInput("a spline needs at least two samples".into()));
    }
    if u.iter().any(|x| !x.is_finite()) || u.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("spline knots must be finite and strictly increasing".into()));
    }
    Ok(())
}

/// Natural cubic spline through `(u_i, y_i)`.
fn natural_cubic(u: &[f64], y: &[f64]) -> Piecewise {
    let n = u.len();
    let h: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    // second derivatives m_i with m_0 = m_{n-1} = 0; tridiagonal solve
    let mut m = vec![0.0; n];
    if n > 2 {
        let k = n - 2;
        let mut diag = vec![0.0; k];
        let mut rhs = vec![0.0; k];
        for i in 0..k {
            diag[i] = 2.0 * (h[i] + h[i + 1]);
            rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h[i + 1] - (y[i + 1] - y[i]) / h[i]);
        }
        for i in 1..k {
            let w = h[i] / diag[i - 1];
            diag[i] -= w * h[i];
            rhs[i] -= w * rhs[i - 1];
        }
        m[k] = rhs[k - 1] / diag[k - 1];
        for i in (0..k - 1).rev() {
            m[i + 1] = (rhs[i] - h[i + 1] * m[i + 2]) / diag[i];
        }
    }
    let coeffs = (0..n - 1)
        .map(|j| {
            let hj = h[j];
            let b = (y[j + 1] - y[j]) - hj * hj * (2.0 * m[j] + m[j + 1]) / 6.0;
            vec![y[j], b, hj * hj * m[j] / 2.0, hj * hj * (m[j + 1] - m[j]) / 6.0]
        })
        .collect();
    Piecewise { knots: u.to_vec(), coeffs, tail: None }
}

/// Natural cubic spline plus a tail fitted through the per-cell third
/// derivatives at cell midpoints, extended flat to the end knots.
fn natural_cubic_with_tail(u: &[f64], y: &[f64]) -> Piecewise {
    let mut p = natural_cubic(u, y);
    let n = u.len();
    if n >= 3 {
        let mut tu = Vec::with_capacity(n + 1);
        let mut ty = Vec::with_capacity(n + 1);
        tu.push(u[0]);
        for j in 0..n - 1 {
            let h = u[j + 1] - u[j];
            tu.push(0.5 * (u[j] + u[j + 1]));
            ty.push(6.0 * p.coeffs[j][3] / (h * h * h));
        }
        tu.push(u[n - 1]);
        ty.insert(0, ty[0]);
        ty.push(ty[ty.len() - 1]);
        p.tail = Some(Box::new(natural_cubic(&tu, &ty)));
    }
    p
}


fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("nonempty");
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Hermite interpolant of degree `2m+1` matching `d[i][0..=m]` (value and
/// `m` derivatives) at every knot.
fn hermite(u: &[f64], d: &[Vec<f64>]) -> Piecewise {
    let m = d[0].len() - 1;
    let deg = 2 * m + 1;
    let fall = |i: usize, k: usize| -> f64 { ((i + 1 - k)..=i).map(|x| x as f64).product() };
    let coeffs = (0..u.len() - 1)
        .map(|j| {
            let h = u[j + 1] - u[j];
            let mut c = vec![0.0; deg + 1];
            let mut hk = 1.0;
            let mut kfact = 1.0;
            for k in 0..=m {
                if k > 0 {
                    kfact *= k as f64;
                }
                c[k] = d[j][k] * hk / kfact;
                hk *= h;
            }
            // conditions at t = 1 for the upper m+1 coefficients
            let mut a = vec![vec![0.0; m + 1]; m + 1];
            let mut b = vec![0.0; m + 1];
            let mut hk = 1.0;
            for k in 0..=m {
                let known: f64 = (k..=m).map(|i| c[i] * fall(i, k)).sum();
                b[k] = d[j + 1][k] * hk - known;
                for (col, i) in (m + 1..=deg).enumerate() {
                    a[k][col] = fall(i, k);
                }
                hk *= h;
            }
            let x = solve_dense(a, b);
            c[m + 1..].copy_from_slice(&x);
            c
        })
        .collect();
    Piecewise { knots: u.to_vec(), coeffs, tail: None }
}

/// A curve whose coordinates are piecewise polynomials.
#[derive(Debug, Clone)]
pub struct SplineCurve {
    comps: [Piecewise; 4],
    /// Highest derivative the representation carries faithfully.
    exact: usize,
}

impl SplineCurve {
    /// Natural cubic spline through sampled points.
    pub fn natural_cubic(u: &[f64], x: &[Vec4]) -> Result<Self> {
        check_knots(u)?;
        if x.len() != u.len() {
            return Err(Error::InvalidInput("sample columns differ in length".into()));
        }
        if x.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("sample values must be finite".into()));
        }
        let comps = [0, 1, 2, 3].map(|i| {
            let y: Vec<f64> = x.iter().map(|p| p[i]).collect();
            natural_cubic_with_tail(u, &y)
        });
        Ok(SplineCurve { comps, exact: 3 })
    }

    /// Hermite spline from per-node derivative stacks: `d[j][k]` is the k-th
    /// derivative at knot `j` (k = 0 is the position). All stacks must have
    /// the same depth `m + 1` with `1 <= m <= 3`.
    pub fn hermite(u: &[f64], d: &[[Vec<f64>; 4]]) -> Result<Self> {
        check_knots(u)?;
        if d.len() != u.len() {
            return Err(Error::InvalidInput("derivative stacks differ from knots in length".into()));
        }
        let depth = d[0][0].len();
        if !(2..=4).contains(&depth) || d.iter().any(|s| s.iter().any(|c| c.len() != depth)) {
            return Err(Error::InvalidInput("inconsistent Hermite derivative depth".into()));
        }
        if d.iter().any(|s| s.iter().any(|c| c.iter().any(|x| !x.is_finite()))) {
            return Err(Error::InvalidInput("Hermite data must be finite".into()));
        }
        let comps = [0, 1, 2, 3].map(|i| {
            let di: Vec<Vec<f64>> = d.iter().map(|s| s[i].clone()).collect();
            hermite(u, &di)
        });
        // degree 2m+1 carries derivatives through 2m+1, but only m+1 are
        // interpolated; the rest converge at lower order
        Ok(SplineCurve { comps, exact: 2 * depth - 1 })
    }

    pub fn knots(&self) -> &[f64] {
        &self.comps[0].knots
    }
}

impl Curve for SplineCurve {
    fn domain(&self) -> (f64, f64) {
        let k = &self.comps[0].knots;
        (k[0], k[k.len() - 1])
    }

    fn position(&self, u: f64) -> Result<Vec4> {
        self.check_in_domain(u)?;
        Ok(Vec4::new(
            self.comps[0].derivs(u, 0)[0],
            self.comps[1].derivs(u, 0)[0],
            self.comps[2].derivs(u, 0)[0],
            self.comps[3].derivs(u, 0)[0],
        ))
    }

    fn velocity_jet(&self, u: f64, order: usize) -> Result<VecJet> {
        self.check_in_domain(u)?;
        let order = order.min(MAX_ORDER - 1);
        Ok([0, 1, 2, 3].map(|i| {
            let d = self.comps[i].derivs(u, order + 1);
            Jet::from_derivatives(&d[1..=order + 1])
        }))
    }

    fn exact_order(&self) -> usize {
        self.exact
    }
}
