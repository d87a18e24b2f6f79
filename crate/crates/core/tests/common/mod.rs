//! Exact population moments by quadrature, shared by the integration tests.
//!
//! Covariates are rounded bivariate normals clamped to [-2, 2], so they live on
//! a 41 x 41 grid. Each cell's probability is a bivariate normal rectangle,
//! computed as a one-dimensional integral of the conditional normal CDF.
#![allow(dead_code)]

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

pub const GRID: usize = 41;
pub const RHO_X: f64 = 0.3;

pub fn cell_edges(k: usize) -> (f64, f64) {
    let v = -2.0 + 0.1 * k as f64;
    let lo = if k == 0 { f64::NEG_INFINITY } else { v - 0.05 };
    let hi = if k == GRID - 1 {
        f64::INFINITY
    } else {
        v + 0.05
    };
    (lo, hi)
}

pub fn rectangle_probability(a1: f64, b1: f64, a2: f64, b2: f64, rho: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).unwrap();
    let s = (1.0 - rho * rho).sqrt();
    let (lo, hi) = (a1.max(-9.0), b1.min(9.0));
    // Composite Simpson in z1, at most 0.01 per panel.
    let panels = 2 * ((hi - lo) / 0.02).ceil().max(32.0) as usize;
    let h = (hi - lo) / panels as f64;
    let f = |z: f64| {
        let upper = if b2.is_infinite() {
            1.0
        } else {
            std.cdf((b2 - rho * z) / s)
        };
        let lower = if a2.is_infinite() {
            0.0
        } else {
            std.cdf((a2 - rho * z) / s)
        };
        std.pdf(z) * (upper - lower)
    };
    let mut acc = f(lo) + f(hi);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + h * i as f64);
    }
    acc * h / 3.0
}

/// Conditional means of the effect modifiers.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    /// E[1 - x1/2 | treated]
    pub f10_treated: f64,
    /// E[(1 + x1/2) + (1 - c x2^2) | treated]
    pub f01_treated: f64,
    /// Same modifier among neighbour controls.
    pub f01_neighbor: f64,
    pub total_mass: f64,
}

/// `square_coef` is c in the spillover modifier: 2 for two periods, 1 for
/// the thirteen-period design.
pub fn moments(square_coef: f64) -> Moments {
    let (mut total, mut mass_t, mut mass_n) = (0.0, 0.0, 0.0);
    let (mut f10_t, mut f01_t, mut f01_n) = (0.0, 0.0, 0.0);
    for i in 0..GRID {
        let (a1, b1) = cell_edges(i);
        for j in 0..GRID {
            let (a2, b2) = cell_edges(j);
            let w = rectangle_probability(a1, b1, a2, b2, RHO_X);
            let (x1, x2) = (-2.0 + 0.1 * i as f64, -2.0 + 0.1 * j as f64);
            let et = (-0.5 + x1 + 0.5 * x2).exp();
            let en = (0.3 - 0.5 * x1 - 0.5 * x2).exp();
            let (pt, pn) = (et / (1.0 + et + en), en / (1.0 + et + en));
            let f10 = 1.0 - 0.5 * x1;
            let f01 = (1.0 + 0.5 * x1) + (1.0 - square_coef * x2 * x2);
            total += w;
            mass_t += w * pt;
            mass_n += w * pn;
            f10_t += w * pt * f10;
            f01_t += w * pt * f01;
            f01_n += w * pn * f01;
        }
    }
    Moments {
        f10_treated: f10_t / mass_t,
        f01_treated: f01_t / mass_t,
        f01_neighbor: f01_n / mass_n,
        total_mass: total,
    }
}

pub struct QuadratureTruth {
    pub att: f64,
    pub delta: f64,
    pub atn: f64,
}

/// Two-period ATT, delta and ATN.
pub fn quadrature_truth(theta01: f64, theta10: f64) -> QuadratureTruth {
    let m = moments(2.0);
    QuadratureTruth {
        att: theta10 * m.f10_treated,
        delta: theta01 * m.f01_treated,
        atn: theta01 * m.f01_neighbor,
    }
}
