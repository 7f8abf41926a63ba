use serde::Serialize;
use std::ops::{Add, Mul, Sub};

/// A real 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn det(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Operator 2-norm (largest singular value), in closed form.
    pub fn norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        ((a + d).hypot(b - c) + (a - d).hypot(b + c)) / 2.0
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[s * a, s * b], [s * c, s * d]])
    }

    pub fn adjugate(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2([[d, -b], [-c, a]])
    }

    pub fn inverse(&self) -> Mat2 {
        self.adjugate().scale(1.0 / self.det())
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let [[a, b], [c, d]] = self.0;
        [a * v[0] + b * v[1], c * v[0] + d * v[1]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|x| x.is_finite())
    }

    /// Largest entry-wise absolute difference.
    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        let [[e, f], [g, h]] = r.0;
        Mat2([[a * e + b * g, a * f + b * h], [c * e + d * g, c * f + d * h]])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += r.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        self + r.scale(-1.0)
    }
}

/// `e^{ln_scale} · m` with `‖m‖ = 1`, or zero (`ln_scale = −∞`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMat {
    pub m: Mat2,
    pub ln_scale: f64,
}

impl LogMat {
    pub const ZERO: LogMat = LogMat {
        m: Mat2::ZERO,
        ln_scale: f64::NEG_INFINITY,
    };
    pub const IDENTITY: LogMat = LogMat {
        m: Mat2::IDENTITY,
        ln_scale: 0.0,
    };

    pub fn new(m: Mat2, ln_scale: f64) -> Self {
        let s = m.norm();
        if s == 0.0 || ln_scale == f64::NEG_INFINITY {
            LogMat::ZERO
        } else {
            LogMat {
                m: m.scale(1.0 / s),
                ln_scale: ln_scale + s.ln(),
            }
        }
    }

    pub fn from_mat(m: Mat2) -> Self {
        LogMat::new(m, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.ln_scale == f64::NEG_INFINITY
    }

    pub fn ln_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.ln_scale + self.m.norm().ln()
        }
    }

    /// `ln‖M v‖`.
    pub fn ln_norm_applied(&self, v: [f64; 2]) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.ln_scale + vec_norm(self.m.apply(v)).ln()
    }

    pub fn mul(&self, r: &LogMat) -> LogMat {
        if self.is_zero() || r.is_zero() {
            return LogMat::ZERO;
        }
        LogMat::new(self.m * r.m, self.ln_scale + r.ln_scale)
    }

    /// Multiply by a real number.
    pub fn times(&self, c: f64) -> LogMat {
        if c == 0.0 {
            return LogMat::ZERO;
        }
        LogMat::new(self.m.scale(c.signum()), self.ln_scale + c.abs().ln())
    }

    pub fn add(&self, r: &LogMat) -> LogMat {
        if self.is_zero() {
            return *r;
        }
        if r.is_zero() {
            return *self;
        }
        let top = self.ln_scale.max(r.ln_scale);
        let m = self.m.scale((self.ln_scale - top).exp()) + r.m.scale((r.ln_scale - top).exp());
        LogMat::new(m, top)
    }

    pub fn sub(&self, r: &LogMat) -> LogMat {
        self.add(&r.times(-1.0))
    }

    /// The plain matrix (may overflow).
    pub fn to_mat(&self) -> Mat2 {
        if self.is_zero() {
            Mat2::ZERO
        } else {
            self.m.scale(self.ln_scale.exp())
        }
    }
}

/// Euclidean norm of a 2-vector.
pub fn vec_norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}
