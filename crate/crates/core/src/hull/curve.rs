//! Two-variable sets `q·u·v + a·u + b·v + c = 0` in canonical form.

use serde::Serialize;

use crate::error::{Error, Result};

/// Relative threshold under which an effective coefficient counts as zero.
pub const COEF_ZERO: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum CurveKind {
    /// `(u - r)(v - s) = tau`.
    Hyperbola { r: f64, s: f64, tau: f64 },
    /// Along the line `v = (-c - a·u) / b` the product is `w = alpha·u + beta·u²`.
    Parabola { alpha: f64, beta: f64 },
    /// Exactly one of `a`, `b` is nonzero: a line parallel to an axis.
    Line,
    /// All coefficients vanish: every `(u, v)` qualifies.
    Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CanonicalCurve {
    pub q: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub kind: CurveKind,
}

pub fn canonicalize(q: f64, a: f64, b: f64, c: f64) -> Result<CanonicalCurve> {
    let scale = 1f64.max(q.abs()).max(a.abs()).max(b.abs()).max(c.abs());
    let zero = |v: f64| v.abs() <= COEF_ZERO * scale;
    let (q, a, b) = (if zero(q) { 0.0 } else { q }, if zero(a) { 0.0 } else { a }, if zero(b) { 0.0 } else { b });
    let kind = if q != 0.0 {
        let tau = (a * b - c * q) / (q * q);
        CurveKind::Hyperbola { r: -b / q, s: -a / q, tau: if zero(tau) { 0.0 } else { tau } }
    } else if a != 0.0 && b != 0.0 {
        CurveKind::Parabola { alpha: -c / b, beta: -a / b }
    } else if a != 0.0 || b != 0.0 {
        CurveKind::Line
    } else if zero(c) {
        CurveKind::Product
    } else {
        return Err(Error::InfeasibleCurve);
    };
    Ok(CanonicalCurve { q, a, b, c, kind })
}

impl CanonicalCurve {
    pub fn residual(&self, u: f64, v: f64) -> f64 {
        self.q * u * v + self.a * u + self.b * v + self.c
    }

    /// Coefficients recovered from the canonical parameters alone (plus `q`
    /// for a hyperbola and `b` for a parabola, which fix the scale).
    pub fn reconstruct(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            CurveKind::Hyperbola { r, s, tau } => {
                let q = self.q;
                (q, -q * s, -q * r, q * r * s - q * tau)
            }
            CurveKind::Parabola { alpha, beta } => {
                let b = self.b;
                (0.0, -beta * b, b, -alpha * b)
            }
            _ => (self.q, self.a, self.b, self.c),
        }
    }

    /// `v` on the curve as a function of `u`: the branch for a hyperbola, the
    /// line for a parabola.
    pub fn v_of_u(&self, u: f64) -> f64 {
        match self.kind {
            CurveKind::Hyperbola { r, s, tau } => s + tau / (u - r),
            _ => (-self.c - self.a * u) / self.b,
        }
    }

    /// Second plane coordinate: `v` for a hyperbola, `w = u·v` for a parabola.
    pub fn g(&self, u: f64) -> f64 {
        match self.kind {
            CurveKind::Hyperbola { r, s, tau } => s + tau / (u - r),
            CurveKind::Parabola { alpha, beta } => alpha * u + beta * u * u,
            _ => f64::NAN,
        }
    }

    pub fn dg(&self, u: f64) -> f64 {
        match self.kind {
            CurveKind::Hyperbola { r, tau, .. } => -tau / ((u - r) * (u - r)),
            CurveKind::Parabola { alpha, beta } => alpha + 2.0 * beta * u,
            _ => f64::NAN,
        }
    }

    /// Lift a plane point to `(u, v, w)`.
    pub fn lift(&self, p: [f64; 2]) -> [f64; 3] {
        match self.kind {
            CurveKind::Hyperbola { .. } => {
                let w = (-self.c - self.a * p[0] - self.b * p[1]) / self.q;
                [p[0], p[1], w]
            }
            CurveKind::Parabola { .. } => [p[0], self.v_of_u(p[0]), p[1]],
            _ => [p[0], p[1], p[0] * p[1]],
        }
    }

    pub fn is_curved(&self) -> bool {
        matches!(self.kind, CurveKind::Hyperbola { tau, .. } if tau != 0.0)
            || matches!(self.kind, CurveKind::Parabola { .. })
    }
}
