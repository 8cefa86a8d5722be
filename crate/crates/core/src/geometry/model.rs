//! Normalized complex coordinates on the Poincaré chart.
//!
//! For curvature κ ≠ 0 a Poincaré-chart point `p` is represented by
//! `ζ = sqrt(|ℓ(κ)|) · p`, in which the metric reads
//! `(4/|κ|) |dζ|² / (1 + ε|ζ|²)²` with `ε = sign κ`. Isometries preserving
//! orientation are the Möbius maps `ζ ↦ e^{iφ}(ζ - a)/(1 + ε ā ζ)`, and for
//! κ = 0 (`ε = 0`, `ζ = p`) the same formulas reduce to rigid motions.

use num_complex::Complex64;

use super::Curvature;

pub(crate) type C64 = Complex64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Model {
    pub kappa: f64,
    /// sign of κ
    pub eps: f64,
    /// ζ = scale · p
    pub scale: f64,
}

impl Model {
    pub fn new(kappa: Curvature) -> Self {
        let k = kappa.value();
        if k == 0.0 {
            Model {
                kappa: 0.0,
                eps: 0.0,
                scale: 1.0,
            }
        } else {
            Model {
                kappa: k,
                eps: k.signum(),
                scale: kappa.ell().abs().sqrt(),
            }
        }
    }

    pub fn to_norm(&self, x: f64, y: f64) -> C64 {
        C64::new(x * self.scale, y * self.scale)
    }

    pub fn from_norm(&self, z: C64) -> (f64, f64) {
        (z.re / self.scale, z.im / self.scale)
    }

    /// Square root of the metric factor at ζ, i.e. metric length of a unit ζ-vector.
    pub fn norm_factor(&self, z: C64) -> f64 {
        if self.eps == 0.0 {
            1.0
        } else {
            2.0 / self.kappa.abs().sqrt() / (1.0 + self.eps * z.norm_sqr()).abs()
        }
    }

    pub fn distance(&self, z: C64, w: C64) -> f64 {
        let num = (z - w).norm();
        if self.eps == 0.0 {
            return num;
        }
        let den = (C64::new(1.0, 0.0) + self.eps * z.conj() * w).norm();
        let sk = self.kappa.abs().sqrt();
        if self.eps < 0.0 {
            2.0 * (num / den).atanh() / sk
        } else {
            2.0 * num.atan2(den) / sk
        }
    }

    /// Isometry sending `a` to the origin and `b` (if given) to the positive real axis.
    pub fn frame(&self, a: C64, b: Option<C64>) -> Mobius {
        let m = Mobius {
            a,
            rot: C64::new(1.0, 0.0),
            eps: self.eps,
        };
        match b {
            Some(b) => {
                let w = m.apply(b);
                let n = w.norm();
                if n == 0.0 {
                    m
                } else {
                    Mobius {
                        rot: w.conj() / n,
                        ..m
                    }
                }
            }
            None => m,
        }
    }

    /// Reflection across the geodesic through `a` and `b`.
    pub fn reflect(&self, a: C64, b: C64, z: C64) -> C64 {
        let m = self.frame(a, Some(b));
        m.invert(m.apply(z).conj())
    }

    /// Signed distance from `z` to the geodesic framed by `m` (positive on the
    /// side of positive imaginary part in the frame).
    pub fn signed_distance_to_axis(&self, m: &Mobius, z: C64) -> f64 {
        let w = m.apply(z);
        self.signed_distance_to_real_axis(w)
    }

    pub fn signed_distance_to_real_axis(&self, w: C64) -> f64 {
        if self.eps == 0.0 {
            return w.im;
        }
        let sk = self.kappa.abs().sqrt();
        let r2 = w.norm_sqr();
        if self.eps < 0.0 {
            (2.0 * w.im / (1.0 - r2)).asinh() / sk
        } else {
            let x2 = 2.0 * w.im / (1.0 + r2);
            x2.clamp(-1.0, 1.0).asin() / sk
        }
    }

    /// Point in the frame at arclength `s` along the real axis and signed
    /// distance `d` from it (moving along the perpendicular geodesic).
    pub fn frame_point(&self, s: f64, d: f64) -> C64 {
        if self.eps == 0.0 {
            return C64::new(s, d);
        }
        let sk = self.kappa.abs().sqrt();
        let (s, d) = (s * sk, d * sk);
        let (x1, x2, x3) = if self.eps < 0.0 {
            (d.cosh() * s.sinh(), d.sinh(), d.cosh() * s.cosh())
        } else {
            (d.cos() * s.sin(), d.sin(), d.cos() * s.cos())
        };
        C64::new(x1, x2) / (1.0 + x3)
    }
}

/// `ζ ↦ rot · (ζ - a) / (1 + ε ā ζ)`
#[derive(Debug, Clone, Copy)]
pub(crate) struct Mobius {
    pub a: C64,
    pub rot: C64,
    pub eps: f64,
}

impl Mobius {
    pub fn apply(&self, z: C64) -> C64 {
        self.rot * (z - self.a) / (1.0 + self.eps * self.a.conj() * z)
    }

    pub fn invert(&self, w: C64) -> C64 {
        let u = w / self.rot;
        (u + self.a) / (1.0 - self.eps * self.a.conj() * u)
    }

    pub fn derivative(&self, z: C64) -> C64 {
        let d = 1.0 + self.eps * self.a.conj() * z;
        self.rot * (1.0 + self.eps * self.a.norm_sqr()) / (d * d)
    }
}
