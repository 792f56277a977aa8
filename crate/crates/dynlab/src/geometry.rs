//! Geometry kernel: cross-ratio of interval pairs, modulus in logarithmic
//! units for intervals and disks, and sampled Koebe distortion checks.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::maps::MapSpec;
use crate::pullback::PullbackComponent;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate pair: inner interval must be compactly contained in outer")]
    DegeneratePair,
    #[error("inner disk not compactly contained in outer disk")]
    Containment,
    #[error("component is not a diffeomorphic pull-back")]
    NotDiffeomorphic,
}

/// A nested pair of bounded open intervals, inner compactly inside outer.
#[derive(Debug, Clone, Copy)]
pub struct IntervalPair {
    pub outer: (f64, f64),
    pub inner: (f64, f64),
}

impl IntervalPair {
    pub fn new(outer: (f64, f64), inner: (f64, f64)) -> Result<Self, GeometryError> {
        let ok = outer.0 < inner.0 && inner.0 < inner.1 && inner.1 < outer.1;
        if !ok {
            return Err(GeometryError::DegeneratePair);
        }
        Ok(IntervalPair { outer, inner })
    }
}

/// Modulus of an annular region, in logarithmic units; always >= 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct ModulusValue(pub f64);

/// Cr(I, J) = |I||J| / (|L||R|) with L, R the components of I minus J.
pub fn cross_ratio(pair: &IntervalPair) -> f64 {
    let i_len = pair.outer.1 - pair.outer.0;
    let j_len = pair.inner.1 - pair.inner.0;
    let l_len = pair.inner.0 - pair.outer.0;
    let r_len = pair.outer.1 - pair.inner.1;
    (i_len * j_len) / (l_len * r_len)
}

/// mmod(I; J) = 2 log( sqrt(1/Cr) + sqrt(1 + 1/Cr) ).
pub fn interval_modulus(pair: &IntervalPair) -> ModulusValue {
    let cr = cross_ratio(pair);
    let inv = 1.0 / cr;
    ModulusValue(2.0 * (inv.sqrt() + (1.0 + inv).sqrt()).ln())
}

/// Modulus of a disk pair. Concentric: log(R/r) exactly. Off-center: the
/// certified lower bound log(R / (r + d)) with d the center distance.
pub fn disk_modulus(
    outer: (Complex64, f64),
    inner: (Complex64, f64),
) -> Result<ModulusValue, GeometryError> {
    let d = (outer.0 - inner.0).norm();
    if d + inner.1 >= outer.1 {
        if d == 0.0 && (inner.1 - outer.1).abs() == 0.0 {
            return Ok(ModulusValue(0.0));
        }
        return Err(GeometryError::Containment);
    }
    Ok(ModulusValue((outer.1 / (inner.1 + d)).ln().max(0.0)))
}

/// Measured distortion of f^n over the eps-subcomponent of a diffeomorphic
/// pull-back: max/min of |Df^n| over sampled points.
#[derive(Debug, Clone, Serialize)]
pub struct DistortionReport {
    pub eps: f64,
    pub samples: usize,
    pub max_deriv: f64,
    pub min_deriv: f64,
    pub distortion: f64,
}

pub fn koebe_distortion_check(
    map: &MapSpec,
    component: &PullbackComponent,
    eps: f64,
) -> Result<DistortionReport, GeometryError> {
    if !component.diffeomorphic {
        return Err(GeometryError::NotDiffeomorphic);
    }
    assert!(eps > 0.0 && eps < 1.0);
    let sub = crate::pullback::shrink_component(map, component, eps)
        .map_err(|_| GeometryError::NotDiffeomorphic)?;
    let pts = crate::pullback::sample_component_points(&sub, 64);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for p in pts.iter() {
        let mut d = 1.0;
        let mut x = *p;
        for _ in 0..component.depth {
            d *= map.differentiate(x);
            x = map.evaluate(x).map_err(|_| GeometryError::NotDiffeomorphic)?;
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok(DistortionReport {
        eps,
        samples: pts.len(),
        max_deriv: hi,
        min_deriv: lo,
        distortion: if lo > 0.0 { hi / lo } else { f64::INFINITY },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(outer: (f64, f64), inner: (f64, f64)) -> IntervalPair {
        IntervalPair::new(outer, inner).unwrap()
    }

    #[test]
    fn cross_ratio_symmetric_t() {
        // I = (-T, T), J = (-1, 1): Cr = 4T/(T-1)^2
        let t = 3.0;
        let cr = cross_ratio(&pair((-t, t), (-1.0, 1.0)));
        assert!((cr - 4.0 * t / ((t - 1.0) * (t - 1.0))).abs() < 1e-12);
        assert!((cr - 3.0).abs() < 1e-12);
    }

    #[test]
    fn cross_ratio_plain_arithmetic() {
        let cr = cross_ratio(&pair((0.0, 4.0), (1.0, 2.0)));
        assert!((cr - 2.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_is_log_t_for_symmetric_pairs() {
        let m = interval_modulus(&pair((-std::f64::consts::E, std::f64::consts::E), (-1.0, 1.0)));
        assert!((m.0 - 1.0).abs() < 1e-12);
        let t = std::f64::consts::E.powi(2);
        let m2 = interval_modulus(&pair((-t, t), (-1.0, 1.0)));
        assert!((m2.0 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn modulus_vanishes_as_inner_fills_outer() {
        let m = interval_modulus(&pair((-1.0, 1.0), (-0.999999, 0.999999)));
        assert!(m.0 < 1e-2);
        assert!(m.0 > 0.0);
    }

    #[test]
    fn degenerate_pair_rejected() {
        assert!(IntervalPair::new((0.0, 1.0), (0.0, 0.5)).is_err());
    }

    #[test]
    fn disk_modulus_cases() {
        let o = (Complex64::new(0.0, 0.0), 10.0);
        let m = disk_modulus(o, (Complex64::new(0.0, 0.0), 1.0)).unwrap();
        assert!((m.0 - 10.0f64.ln()).abs() < 1e-12);
        let m2 = disk_modulus(o, (Complex64::new(0.5, 0.0), 1.0)).unwrap();
        assert!((m2.0 - (10.0f64 / 1.5).ln()).abs() < 1e-12);
        assert!(disk_modulus(o, (Complex64::new(9.5, 0.0), 1.0)).is_err());
    }
}
