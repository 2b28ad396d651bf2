//! The indefinite inner-product space E₁⁴ with signature (−,+,+,+).

use std::fmt;
use std::ops::{Add, Div, Index, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// Default relative tolerance for deciding that a vector is null.
pub const NULL_TOL: f64 = 1e-9;

/// A point or vector of E₁⁴. `x1` is the timelike coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec4 {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
    pub x4: f64,
}

impl Vec4 {
    pub const ZERO: Vec4 = Vec4::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Vec4 { x1, x2, x3, x4 }
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Vec4::new(a[0], a[1], a[2], a[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.x3, self.x4]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|x| x.is_finite())
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.x1 * self.x1 + self.x2 * self.x2 + self.x3 * self.x3 + self.x4 * self.x4
    }

    pub fn euclid_norm(&self) -> f64 {
        self.euclid_norm_sq().sqrt()
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x1,
            1 => &self.x2,
            2 => &self.x3,
            3 => &self.x4,
            _ => panic!("Vec4 index {i} out of range"),
        }
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 + o.x1, self.x2 + o.x2, self.x3 + o.x3, self.x4 + o.x4)
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4::new(self.x1 - o.x1, self.x2 - o.x2, self.x3 - o.x3, self.x4 - o.x4)
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4::new(-self.x1, -self.x2, -self.x3, -self.x4)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, a: f64) -> Vec4 {
        Vec4::new(self.x1 * a, self.x2 * a, self.x3 * a, self.x4 * a)
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

impl Div<f64> for Vec4 {
    type Output = Vec4;
    fn div(self, a: f64) -> Vec4 {
        Vec4::new(self.x1 / a, self.x2 / a, self.x3 / a, self.x4 / a)
    }
}

impl fmt::Display for Vec4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {}, {})", self.x1, self.x2, self.x3, self.x4)
    }
}

/// Parses a comma-separated 4-tuple such as `"1,0,0,2"`.
impl FromStr for Vec4 {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(Error::InvalidInput(format!(
                "expected 4 comma-separated components, got {}",
                parts.len()
            )));
        }
        let mut out = [0.0; 4];
        for (slot, p) in out.iter_mut().zip(&parts) {
            *slot = p
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad vector component `{p}`")))?;
        }
        let v = Vec4::from_array(out);
        if !v.is_finite() {
            return Err(Error::InvalidInput("vector components must be finite".into()));
        }
        Ok(v)
    }
}

/// Minkowski inner product. The x1 term is summed first.
pub fn inner(u: Vec4, v: Vec4) -> f64 {
    -u.x1 * v.x1 + u.x2 * v.x2 + u.x3 * v.x3 + u.x4 * v.x4
}

/// `sqrt(|<v,v>|)`.
pub fn norm(v: Vec4) -> f64 {
    inner(v, v).abs().sqrt()
}

/// Causal character. Returns `-1` for timelike, `+1` otherwise.
pub fn causal_sign(v: Vec4) -> f64 {
    if inner(v, v) < 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CausalKind {
    Spacelike,
    Timelike,
    Null,
}

impl CausalKind {
    pub fn name(self) -> &'static str {
        match self {
            CausalKind::Spacelike => "Spacelike",
            CausalKind::Timelike => "Timelike",
            CausalKind::Null => "Null",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausalClass {
    pub kind: CausalKind,
    /// The raw quadratic form `<v,v>`.
    pub q: f64,
}

/// Classifies `v` with a null band relative to its Euclidean size:
/// `|q| <= tol * max(1, |v|_E^2)`. The zero vector counts as spacelike.
pub fn classify(v: Vec4, tol: f64) -> CausalClass {
    let q = inner(v, v);
    let e2 = v.euclid_norm_sq();
    let kind = if e2 == 0.0 {
        CausalKind::Spacelike
    } else if q.abs() <= tol * e2.max(1.0) {
        CausalKind::Null
    } else if q > 0.0 {
        CausalKind::Spacelike
    } else {
        CausalKind::Timelike
    };
    CausalClass { kind, q }
}

/// Ordinary determinant of the 4x4 matrix with rows `e1..e4`.
pub fn frame_det(e1: Vec4, e2: Vec4, e3: Vec4, e4: Vec4) -> f64 {
    let m = [e1.to_array(), e2.to_array(), e3.to_array(), e4.to_array()];
    // Laplace expansion along the first two rows: complementary 2x2 minors.
    let minor = |r: usize, a: usize, b: usize| m[r][a] * m[r + 1][b] - m[r][b] * m[r + 1][a];
    let mut det = 0.0;
    for a in 0..4 {
        for b in a + 1..4 {
            let rest: Vec<usize> = (0..4).filter(|&c| c != a && c != b).collect();
            let sign = if (a + b + 1) % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * minor(0, a, b) * minor(2, rest[0], rest[1]);
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> Vec4 {
        let mut a = [0.0; 4];
        a[i] = 1.0;
        Vec4::from_array(a)
    }

    #[test]
    fn inner_examples() {
        assert_eq!(inner(e(0), e(0)), -1.0);
        assert_eq!(inner(e(1), e(2)), 0.0);
        assert_eq!(inner(Vec4::new(2.0, 1.0, 1.0, 1.0), Vec4::new(1.0, 1.0, 1.0, 1.0)), 1.0);
    }

    #[test]
    fn signature_is_diag() {
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i != j {
                    0.0
                } else if i == 0 {
                    -1.0
                } else {
                    1.0
                };
                assert_eq!(inner(e(i), e(j)), expect);
            }
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm(Vec4::new(1.0, 1.0, 0.0, 0.0)), 0.0);
        assert_eq!(norm(Vec4::new(0.0, 3.0, 4.0, 0.0)), 5.0);
        assert_eq!(norm(Vec4::new(2.0, 0.0, 0.0, 0.0)), 2.0);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(e(0), NULL_TOL).kind, CausalKind::Timelike);
        assert_eq!(classify(Vec4::new(1.0, 1.0, 0.0, 0.0), NULL_TOL).kind, CausalKind::Null);
        assert_eq!(classify(Vec4::new(0.0, 3.0, 4.0, 0.0), NULL_TOL).kind, CausalKind::Spacelike);
        assert_eq!(classify(Vec4::ZERO, NULL_TOL).kind, CausalKind::Spacelike);
    }

    #[test]
    fn null_band_is_relative() {
        // q = 1e-6 on a vector of Euclidean size ~1e6 is numerically null
        let v = Vec4::new(1e3, (1e6 + 1e-6f64).sqrt(), 0.0, 0.0);
        assert_eq!(classify(v, NULL_TOL).kind, CausalKind::Null);
    }

    #[test]
    fn frame_det_examples() {
        let id = frame_det(e(0), e(1), e(2), e(3));
        assert_eq!(id, 1.0);
        assert_eq!(frame_det(e(1), e(2), e(3), e(0)), -1.0);
        assert_eq!(frame_det(e(1), e(2), e(3), -e(0)), 1.0);
        assert_eq!(frame_det(e(1), e(0), e(2), e(3)), -1.0);
    }

    #[test]
    fn frame_det_matches_permutation_expansion() {
        let rows = [
            Vec4::new(1.0, 2.0, -1.0, 0.5),
            Vec4::new(0.3, -2.0, 4.0, 1.0),
            Vec4::new(2.0, 0.0, 1.0, -3.0),
            Vec4::new(-1.0, 1.5, 0.0, 2.0),
        ];
        // Leibniz formula over all 24 permutations
        let mut perm = [0usize, 1, 2, 3];
        let mut total = 0.0;
        let mut stack = vec![];
        fn permute(k: usize, p: &mut [usize; 4], out: &mut Vec<[usize; 4]>) {
            if k == 4 {
                out.push(*p);
                return;
            }
            for i in k..4 {
                p.swap(k, i);
                permute(k + 1, p, out);
                p.swap(k, i);
            }
        }
        permute(0, &mut perm, &mut stack);
        for p in stack {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * (0..4).map(|r| rows[r][p[r]]).product::<f64>();
        }
        let d = frame_det(rows[0], rows[1], rows[2], rows[3]);
        assert!((d - total).abs() < 1e-12, "{d} vs {total}");
    }

    #[test]
    fn parse_vector() {
        let v: Vec4 = "1, 0,0,2".parse().unwrap();
        assert_eq!(v, Vec4::new(1.0, 0.0, 0.0, 2.0));
        assert!("1,2,3".parse::<Vec4>().is_err());
        assert!("1,2,x,3".parse::<Vec4>().is_err());
    }
}
