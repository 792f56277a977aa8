//! Nice sets and nice couples around the critical points in the Julia set,
//! their niceness certificates, the first-landing structure and return
//! domains with modulus lower bounds.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{disk_modulus, interval_modulus, IntervalPair};
use crate::maps::{MapSpec, Point};
use crate::pullback::{
    all_components, component_at, critical_ball, real_preimage_components, PullbackComponent,
    PullbackError, Region, Target, TruncationReport,
};

#[derive(Debug, Error)]
pub enum NiceError {
    #[error("no admissible boundary point found for critical point {crit:?} in band [{band_lo}, {band_hi}] after {attempts} candidates")]
    ConstructionFailure {
        crit: Point,
        band_lo: f64,
        band_hi: f64,
        attempts: usize,
    },
    #[error("niceness violated: boundary point {boundary:?} lands in the set at iterate {n} (landing point {landing:?})")]
    NicenessViolation {
        n: usize,
        boundary: Point,
        landing: Point,
    },
    #[error("couple check failed: pull-back at depth {depth} intersects V without being contained (interval [{lo}, {hi}])")]
    CoupleViolation { depth: usize, lo: f64, hi: f64 },
    #[error("unsupported map kind for this construction")]
    Unsupported,
    #[error(transparent)]
    Pullback(#[from] PullbackError),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
}

/// Certificate for one boundary point of a nice component.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryCert {
    pub point: Point,
    /// Length of the forward orbit checked against the set; for eventually
    /// periodic points, the preperiod plus one period.
    pub orbit_len: usize,
    /// True when the orbit lands exactly on a repelling periodic point, so
    /// the certificate holds for every n.
    pub eventually_periodic: bool,
}

/// One connected component of a nice set.
#[derive(Debug, Clone)]
pub struct NiceComponent {
    pub critical_point: Point,
    pub region: NiceRegion,
    pub boundary_certs: Vec<BoundaryCert>,
    /// Real tB-type components satisfy f(boundary V^c) inside boundary f(V^c).
    pub symmetric: bool,
}

#[derive(Debug, Clone)]
pub enum NiceRegion {
    Interval { lo: f64, hi: f64 },
    Disk { center: Complex64, radius: f64 },
}

impl NiceRegion {
    pub fn diam(&self) -> f64 {
        match self {
            NiceRegion::Interval { lo, hi } => hi - lo,
            NiceRegion::Disk { radius, .. } => 2.0 * radius,
        }
    }
    pub fn to_target(&self) -> Target {
        match self {
            NiceRegion::Interval { lo, hi } => Target::Interval(*lo, *hi),
            NiceRegion::Disk { center, radius } => Target::Disk {
                center_re: center.re,
                center_im: center.im,
                radius: *radius,
            },
        }
    }
    pub fn contains(&self, map: &MapSpec, p: Point) -> bool {
        self.to_target().contains_in(map, p)
    }
}

/// A nice set: one component per critical point of Crit'(f), with boundary
/// orbit certificates.
#[derive(Debug, Clone)]
pub struct NiceSet {
    pub components: Vec<NiceComponent>,
}

impl NiceSet {
    pub fn contains(&self, map: &MapSpec, p: Point) -> bool {
        self.components.iter().any(|c| c.region.contains(map, p))
    }
    pub fn component_index(&self, map: &MapSpec, p: Point) -> Option<usize> {
        self.components
            .iter()
            .position(|c| c.region.contains(map, p))
    }

    /// Builds a nice set from explicit intervals (real maps), verifying the
    /// defining conditions. Used for synthetic large-scale sets.
    pub fn from_intervals(
        map: &MapSpec,
        intervals: &[(f64, f64)],
        horizon: usize,
    ) -> Result<NiceSet, NiceError> {
        let crit = map.crit_in_julia();
        let m = match map {
            MapSpec::Real(m) => m,
            _ => return Err(NiceError::Unsupported),
        };
        assert_eq!(
            intervals.len(),
            crit.len(),
            "one interval per critical point of Crit'(f)"
        );
        let mut components = Vec::new();
        for (iv, c) in intervals.iter().zip(&crit) {
            assert!(
                c.location.as_real() > iv.0 && c.location.as_real() < iv.1,
                "interval must contain its critical point"
            );
            let mut certs = Vec::new();
            for &e in &[iv.0, iv.1] {
                if e <= m.domain.0 + 1e-14 || e >= m.domain.1 - 1e-14 {
                    continue; // domain endpoints are not boundary in dom(f)
                }
                certs.push(boundary_certificate(map, Point::Real(e), horizon));
            }
            components.push(NiceComponent {
                critical_point: c.location,
                region: NiceRegion::Interval { lo: iv.0, hi: iv.1 },
                boundary_certs: certs,
                symmetric: false,
            });
        }
        let set = NiceSet { components };
        verify_niceness(map, &set, horizon)?;
        Ok(set)
    }
}

/// A nice couple: nested nice sets with the absorption property checked to
/// a sampled depth.
#[derive(Debug, Clone)]
pub struct NiceCouple {
    pub outer: NiceSet,
    pub inner: NiceSet,
    pub couple_checked_depth: usize,
    /// Modulus lower bound per component pair (outer; inner).
    pub component_moduli: Vec<f64>,
    pub vacuous: bool,
}

fn orbit_of(map: &MapSpec, p: Point, n: usize) -> Vec<Point> {
    let mut out = vec![p];
    let mut x = p;
    for _ in 0..n {
        match map.evaluate(x) {
            Ok(y) => {
                x = y;
                out.push(x);
            }
            Err(_) => break,
        }
    }
    out
}

/// Detects an exact landing on a periodic cycle within the horizon.
fn boundary_certificate(map: &MapSpec, p: Point, horizon: usize) -> BoundaryCert {
    let orbit = orbit_of(map, p, horizon.max(16));
    let tol = 1e-11 * map.scale();
    for i in 0..orbit.len() {
        for period in 1..=8usize {
            if i + period < orbit.len() && orbit[i].dist(&orbit[i + period]) < tol {
                return BoundaryCert {
                    point: p,
                    orbit_len: i + period,
                    eventually_periodic: true,
                };
            }
        }
    }
    BoundaryCert {
        point: p,
        orbit_len: horizon,
        eventually_periodic: false,
    }
}

/// Checks f^n(boundary) against the set for every boundary point: exactly
/// for eventually-periodic boundaries, to the horizon otherwise. Disk
/// components are checked on sampled boundary points.
pub fn verify_niceness(map: &MapSpec, set: &NiceSet, horizon: usize) -> Result<(), NiceError> {
    for comp in &set.components {
        let points: Vec<Point> = match &comp.region {
            NiceRegion::Interval { .. } => comp.boundary_certs.iter().map(|c| c.point).collect(),
            NiceRegion::Disk { center, radius } => (0..64)
                .map(|k| {
                    let ang = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                    let z = center + Complex64::from_polar(*radius, ang);
                    Point::Complex(z.re, z.im)
                })
                .collect(),
        };
        for bp in points {
            let cert = boundary_certificate(map, bp, horizon);
            let steps = if cert.eventually_periodic {
                cert.orbit_len + 1
            } else {
                horizon
            };
            let orbit = orbit_of(map, bp, steps);
            for (n, q) in orbit.iter().enumerate().skip(1) {
                if set.contains(map, *q) {
                    return Err(NiceError::NicenessViolation {
                        n,
                        boundary: bp,
                        landing: *q,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Candidate boundary values on backward orbits of repelling fixed points,
/// so the resulting certificates are exact.
fn preorbit_candidates(map: &MapSpec, band: (f64, f64), depth: usize, budget: usize) -> Vec<f64> {
    let m = match map {
        MapSpec::Real(m) => m,
        _ => return vec![],
    };
    let mut fixed = Vec::new();
    let mut coeffs = m.coeffs.clone();
    if coeffs.len() < 2 {
        return vec![];
    }
    coeffs[1] -= 1.0;
    for r in crate::maps::real_roots_in(&coeffs, m.domain.0, m.domain.1) {
        if m.deriv(r).abs() > 1.0 + 1e-9 {
            fixed.push(r);
        }
    }
    let quantum = 1e-12 * m.scale();
    let key = |x: f64| (x / quantum).round() as i64;
    let mut seen: std::collections::BTreeSet<i64> = fixed.iter().map(|&x| key(x)).collect();
    let mut layer = fixed.clone();
    let mut all = fixed;
    let mut visited = 0usize;
    'bfs: for _ in 0..depth {
        let mut next = Vec::new();
        for &v in &layer {
            visited += 1;
            if visited > budget {
                break 'bfs;
            }
            if let Ok(pres) = crate::pullback::preimages(map, Point::Real(v)) {
                for (p, _) in pres {
                    let x = p.as_real();
                    // branches through critical points fold back onto
                    // critical values and are useless as boundaries
                    if m.deriv(x).abs() > 1e-9 && seen.insert(key(x)) {
                        next.push(x);
                        all.push(x);
                    }
                }
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    let mut out: Vec<f64> = all
        .into_iter()
        .filter(|x| *x >= band.0 && *x <= band.1)
        .collect();
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out
}

fn real_tb_interval(map: &MapSpec, c: Point, delta_eff: f64) -> Result<(f64, f64), NiceError> {
    let comp = critical_ball(map, c, delta_eff)?;
    match comp.region {
        Region::Interval(a, b) => Ok((a, b)),
        _ => unreachable!("real map produces interval regions"),
    }
}

/// Valid tB-type components for one critical point, self-avoidance already
/// checked, exact-boundary candidates first, largest scale first.
fn real_component_candidates(
    map: &MapSpec,
    c: Point,
    band: (f64, f64),
    horizon: usize,
    max_cands: usize,
) -> Result<Vec<NiceComponent>, NiceError> {
    let m = match map {
        MapSpec::Real(m) => m,
        _ => return Err(NiceError::Unsupported),
    };
    let v = map.evaluate(c)?.as_real();
    let candidates = preorbit_candidates(map, (v - band.1, v + band.1), 18, 20_000);
    let mut attempts = 0usize;
    let mut scored: Vec<f64> = candidates
        .iter()
        .map(|&a| (a - v).abs())
        .filter(|d| *d >= band.0 && *d <= band.1)
        .collect();
    scored.sort_by(|x, y| y.partial_cmp(x).unwrap());
    scored.dedup();
    let mut out = Vec::new();
    for delta_eff in scored {
        if out.len() >= max_cands {
            break;
        }
        attempts += 1;
        if let Ok((lo, hi)) = real_tb_interval(map, c, delta_eff) {
            // an exact certificate is not enough: the finite orbit prefix
            // must itself avoid the candidate interval
            let lo_cert = boundary_certificate(map, Point::Real(lo), horizon.max(48));
            let hi_cert = boundary_certificate(map, Point::Real(hi), horizon.max(48));
            let steps = lo_cert.orbit_len.max(hi_cert.orbit_len) + 8;
            let avoid = [lo, hi].iter().all(|&e| {
                orbit_of(map, Point::Real(e), steps)
                    .iter()
                    .skip(1)
                    .all(|q| {
                        let x = q.as_real();
                        x <= lo || x >= hi
                    })
            });
            if avoid && lo_cert.eventually_periodic && hi_cert.eventually_periodic {
                out.push(NiceComponent {
                    critical_point: c,
                    region: NiceRegion::Interval { lo, hi },
                    boundary_certs: vec![lo_cert, hi_cert],
                    symmetric: true,
                });
            }
        }
    }
    // grid fallback with horizon-limited certificates
    if out.is_empty() {
        for k in 0..512 {
            if out.len() >= max_cands {
                break;
            }
            attempts += 1;
            let delta_eff = band.1 - (band.1 - band.0) * (k as f64 + 0.5) / 512.0;
            if let Ok((lo, hi)) = real_tb_interval(map, c, delta_eff) {
                let mut ok = true;
                'bp: for &e in &[lo, hi] {
                    if e <= m.domain.0 + 1e-14 || e >= m.domain.1 - 1e-14 {
                        continue;
                    }
                    for q in orbit_of(map, Point::Real(e), horizon).iter().skip(1) {
                        let x = q.as_real();
                        if x > lo && x < hi {
                            ok = false;
                            break 'bp;
                        }
                    }
                }
                if ok {
                    out.push(NiceComponent {
                        critical_point: c,
                        region: NiceRegion::Interval { lo, hi },
                        boundary_certs: vec![
                            boundary_certificate(map, Point::Real(lo), horizon),
                            boundary_certificate(map, Point::Real(hi), horizon),
                        ],
                        symmetric: true,
                    });
                }
            }
        }
    }
    if out.is_empty() {
        return Err(NiceError::ConstructionFailure {
            crit: c,
            band_lo: band.0,
            band_hi: band.1,
            attempts,
        });
    }
    Ok(out)
}

fn build_complex_component(
    map: &MapSpec,
    c: Point,
    band: (f64, f64),
    horizon: usize,
) -> Result<NiceComponent, NiceError> {
    // disk approximation sandwiched between the sampled radii of
    // tB(c, band.0) and tB(c, band.1)
    let inner = critical_ball(map, c, band.0)?;
    let outer = critical_ball(map, c, band.1)?;
    let cz = c.as_complex();
    let r_in = match &inner.region {
        Region::Loop(s) => s.iter().map(|z| (z - cz).norm()).fold(0.0, f64::max),
        _ => unreachable!(),
    };
    let r_out = match &outer.region {
        Region::Loop(s) => s.iter().map(|z| (z - cz).norm()).fold(f64::INFINITY, f64::min),
        _ => unreachable!(),
    };
    let radius = if r_in < r_out { 0.5 * (r_in + r_out) } else { r_in };
    let mut certs = Vec::new();
    for k in 0..8 {
        let ang = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
        let z = cz + Complex64::from_polar(radius, ang);
        certs.push(boundary_certificate(
            map,
            Point::Complex(z.re, z.im),
            horizon,
        ));
    }
    Ok(NiceComponent {
        critical_point: c,
        region: NiceRegion::Disk { center: cz, radius },
        boundary_certs: certs,
        symmetric: false,
    })
}

/// Constructs a nice couple with V^c between tB(c, delta) and tB(c, 2 delta)
/// and outer components between tB(c, r delta / 2) and tB(c, r delta).
/// Real boundaries are taken on backward orbits of repelling fixed points
/// when possible, making their certificates exact.
pub fn construct_nice_couple(
    map: &MapSpec,
    delta: f64,
    r: f64,
    horizon: usize,
) -> Result<NiceCouple, NiceError> {
    let crit = map.crit_in_julia();
    if crit.is_empty() {
        return Ok(NiceCouple {
            outer: NiceSet { components: vec![] },
            inner: NiceSet { components: vec![] },
            couple_checked_depth: 0,
            component_moduli: vec![],
            vacuous: true,
        });
    }
    let mut inner_comps = Vec::new();
    let mut outer_comps = Vec::new();
    for c in &crit {
        let (ic, oc) = match map {
            MapSpec::Real(_) => (
                build_real_component(map, c.location, (delta, 2.0 * delta), horizon)?,
                build_real_component(map, c.location, (r * delta / 2.0, r * delta), horizon)?,
            ),
            MapSpec::Complex(_) => (
                build_complex_component(map, c.location, (delta, 2.0 * delta), horizon)?,
                build_complex_component(map, c.location, (r * delta / 2.0, r * delta), horizon)?,
            ),
        };
        inner_comps.push(ic);
        outer_comps.push(oc);
    }
    let inner = NiceSet {
        components: inner_comps,
    };
    let outer = NiceSet {
        components: outer_comps,
    };
    verify_niceness(map, &inner, horizon)?;
    verify_niceness(map, &outer, horizon)?;
    verify_couple(map, &outer, &inner, horizon)?;
    let mut moduli = Vec::new();
    for (o, i) in outer.components.iter().zip(&inner.components) {
        let lb = match (&o.region, &i.region) {
            (NiceRegion::Interval { lo: ol, hi: oh }, NiceRegion::Interval { lo: il, hi: ih }) => {
                IntervalPair::new((*ol, *oh), (*il, *ih))
                    .map(|p| interval_modulus(&p).0)
                    .unwrap_or(0.0)
            }
            (
                NiceRegion::Disk {
                    center: ocn,
                    radius: orr,
                },
                NiceRegion::Disk {
                    center: icn,
                    radius: ir,
                },
            ) => disk_modulus((*ocn, *orr), (*icn, *ir)).map(|m| m.0).unwrap_or(0.0),
            _ => 0.0,
        };
        moduli.push(lb);
    }
    Ok(NiceCouple {
        outer,
        inner,
        couple_checked_depth: horizon,
        component_moduli: moduli,
        vacuous: false,
    })
}

/// Checks the absorption property to the sampled depth: every pull-back of
/// the outer set intersecting the inner set is contained in it.
pub fn verify_couple(
    map: &MapSpec,
    outer: &NiceSet,
    inner: &NiceSet,
    depth: usize,
) -> Result<(), NiceError> {
    for oc in &outer.components {
        for d in 1..=depth {
            let (comps, _trunc) = all_components(map, oc.region.to_target(), d, 5_000_000)?;
            for w in comps {
                if let Some(violation) = couple_violation(map, inner, &w) {
                    return Err(violation);
                }
            }
        }
    }
    Ok(())
}

fn couple_violation(map: &MapSpec, inner: &NiceSet, w: &PullbackComponent) -> Option<NiceError> {
    match &w.region {
        Region::Interval(a, b) => {
            for ic in &inner.components {
                if let NiceRegion::Interval { lo, hi } = ic.region {
                    let tol = 1e-10 * map.scale();
                    let intersects = *a < hi - tol && *b > lo + tol;
                    let contained = *a >= lo - tol && *b <= hi + tol;
                    if intersects && !contained {
                        return Some(NiceError::CoupleViolation {
                            depth: w.depth,
                            lo: *a,
                            hi: *b,
                        });
                    }
                }
            }
            None
        }
        Region::Loop(samples) => {
            for ic in &inner.components {
                if let NiceRegion::Disk { center, radius } = ic.region {
                    let inside = samples
                        .iter()
                        .filter(|z| (*z - center).norm() < radius)
                        .count();
                    let intersects = inside > 0
                        || w.region
                            .contains_point(Point::Complex(center.re, center.im));
                    let contained = inside == samples.len();
                    if intersects && !contained {
                        return Some(NiceError::CoupleViolation {
                            depth: w.depth,
                            lo: center.re - radius,
                            hi: center.re + radius,
                        });
                    }
                }
            }
            None
        }
    }
}

// ---------------------------------------------------------------------------
// first-landing structure
// ---------------------------------------------------------------------------

/// A component of the first-landing domain with its landing time.
#[derive(Debug, Clone)]
pub struct LandingComponent {
    pub region: Region,
    pub landing_time: usize,
    /// Index of the nice-set component it lands onto.
    pub target_component: usize,
    pub extension_diffeomorphic: bool,
    pub diameter: f64,
}

#[derive(Debug, Clone)]
pub struct LandingTable {
    pub components: Vec<LandingComponent>,
    pub max_landing: usize,
    pub truncation: TruncationReport,
    /// Total diameter of the unexplored frontier (truncation bias bound).
    pub frontier_mass: f64,
}

impl LandingTable {
    /// Landing-time tail sum over l(U) >= m of diam(U)^alpha.
    pub fn tail(&self, m: usize, alpha: f64) -> f64 {
        self.components
            .iter()
            .filter(|u| u.landing_time >= m)
            .map(|u| u.diameter.powf(alpha))
            .sum()
    }
}

/// Enumerates the components of the first-landing domain with landing time
/// at most `max_landing` (level 0 components are the nice set itself).
pub fn landing_components(
    map: &MapSpec,
    set: &NiceSet,
    max_landing: usize,
    budget: usize,
) -> Result<LandingTable, NiceError> {
    match map {
        MapSpec::Real(_) => real_landing_components(map, set, max_landing, budget),
        MapSpec::Complex(_) => complex_landing_components(map, set, max_landing, budget),
    }
}

fn real_landing_components(
    map: &MapSpec,
    set: &NiceSet,
    max_landing: usize,
    budget: usize,
) -> Result<LandingTable, NiceError> {
    let m = match map {
        MapSpec::Real(m) => m,
        _ => unreachable!(),
    };
    let mut out = Vec::new();
    // (lo, hi, target index, critical hits along the chain)
    let mut frontier: Vec<(f64, f64, usize, usize)> = Vec::new();
    for (idx, c) in set.components.iter().enumerate() {
        if let NiceRegion::Interval { lo, hi } = c.region {
            out.push(LandingComponent {
                region: Region::Interval(lo, hi),
                landing_time: 0,
                target_component: idx,
                extension_diffeomorphic: true,
                diameter: hi - lo,
            });
            frontier.push((lo, hi, idx, 0));
        }
    }
    let mut trunc = TruncationReport {
        budget,
        ..Default::default()
    };
    for l in 1..=max_landing {
        let mut next = Vec::new();
        let mut budget_hit = false;
        for (lo, hi, idx, hits) in &frontier {
            trunc.nodes_visited += 1;
            if trunc.nodes_visited > budget {
                trunc.truncated = true;
                budget_hit = true;
                break;
            }
            for pre in real_preimage_components(m, *lo, *hi) {
                // pull-backs inside V are return structure, not first landings
                let mid = Point::Real(0.5 * (pre.lo + pre.hi));
                if set.contains(map, mid) {
                    continue;
                }
                let h = hits + usize::from(!pre.crit_inside.is_empty());
                next.push((pre.lo, pre.hi, *idx, h));
            }
        }
        if budget_hit {
            trunc.unexplored = frontier.len();
            break;
        }
        for (lo, hi, idx, hits) in &next {
            let target = match set.components[*idx].region {
                NiceRegion::Interval { lo: tl, hi: th } => (tl, th),
                _ => unreachable!(),
            };
            let mut img = (*lo, *hi);
            for _ in 0..l {
                img = crate::pullback::real_image_interval(m, img.0, img.1);
            }
            let onto = (img.0 - target.0).abs() <= 1e-9 * m.scale()
                && (img.1 - target.1).abs() <= 1e-9 * m.scale();
            out.push(LandingComponent {
                region: Region::Interval(*lo, *hi),
                landing_time: l,
                target_component: *idx,
                extension_diffeomorphic: *hits == 0 && onto,
                diameter: hi - lo,
            });
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let frontier_mass = frontier.iter().map(|(lo, hi, _, _)| hi - lo).sum();
    Ok(LandingTable {
        components: out,
        max_landing,
        truncation: trunc,
        frontier_mass,
    })
}

fn complex_landing_components(
    map: &MapSpec,
    set: &NiceSet,
    max_landing: usize,
    budget: usize,
) -> Result<LandingTable, NiceError> {
    let mut out = Vec::new();
    let mut trunc = TruncationReport {
        budget,
        ..Default::default()
    };
    for (idx, c) in set.components.iter().enumerate() {
        let t = c.region.to_target();
        let comp = component_at(map, t, 0, c.critical_point)?;
        out.push(LandingComponent {
            region: comp.region.clone(),
            landing_time: 0,
            target_component: idx,
            extension_diffeomorphic: true,
            diameter: comp.diameter,
        });
        for l in 1..=max_landing {
            let (comps, tr) = all_components(map, t, l, budget)?;
            trunc.nodes_visited += tr.nodes_visited;
            for w in comps {
                let mid = w.region.midpoint();
                if set.contains(map, mid) {
                    continue;
                }
                // first landing: no earlier iterate of the component meets V
                let mut entered_early = false;
                let mut p = mid;
                for _ in 1..l {
                    p = map.evaluate(p)?;
                    if set.contains(map, p) {
                        entered_early = true;
                        break;
                    }
                }
                if entered_early {
                    continue;
                }
                out.push(LandingComponent {
                    region: w.region.clone(),
                    landing_time: l,
                    target_component: idx,
                    extension_diffeomorphic: w.diffeomorphic,
                    diameter: w.diameter,
                });
            }
        }
    }
    Ok(LandingTable {
        components: out,
        max_landing,
        truncation: trunc,
        frontier_mass: 0.0,
    })
}

// ---------------------------------------------------------------------------
// return domains and lambda-niceness
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct LambdaNiceRow {
    pub return_time: usize,
    pub domain_lo: f64,
    pub domain_hi: f64,
    pub modulus_lower_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaNiceReport {
    pub rows: Vec<LambdaNiceRow>,
    pub min_modulus: f64,
    pub domains_found: usize,
}

/// Return domains of the set: pull-backs of V contained in V whose first
/// re-entry time is the landing time of their image plus one.
pub fn return_domains(
    map: &MapSpec,
    set: &NiceSet,
    landing: &LandingTable,
) -> Result<Vec<(Region, usize)>, NiceError> {
    let m = match map {
        MapSpec::Real(m) => m,
        _ => return Ok(vec![]),
    };
    let mut out = Vec::new();
    for u in &landing.components {
        if let Region::Interval(lo, hi) = u.region {
            for pre in real_preimage_components(m, lo, hi) {
                let mid = Point::Real(0.5 * (pre.lo + pre.hi));
                if set.contains(map, mid) {
                    out.push((Region::Interval(pre.lo, pre.hi), u.landing_time + 1));
                }
            }
        }
    }
    Ok(out)
}

/// Modulus lower bounds mmod(V; W) over the enumerated return domains.
pub fn lambda_nice_report(
    map: &MapSpec,
    couple: &NiceCouple,
    landing_cap: usize,
    budget: usize,
) -> Result<LambdaNiceReport, NiceError> {
    let landing = landing_components(map, &couple.inner, landing_cap, budget)?;
    let domains = return_domains(map, &couple.inner, &landing)?;
    let mut rows = Vec::new();
    let mut min_mod = f64::INFINITY;
    for (region, rt) in &domains {
        if let Region::Interval(a, b) = region {
            let mid = Point::Real(0.5 * (a + b));
            if let Some(idx) = couple.inner.component_index(map, mid) {
                if let NiceRegion::Interval { lo, hi } = couple.inner.components[idx].region {
                    let mmod = if *a > lo && *b < hi {
                        IntervalPair::new((lo, hi), (*a, *b))
                            .map(|p| interval_modulus(&p).0)
                            .unwrap_or(0.0)
                    } else {
                        0.0
                    };
                    min_mod = min_mod.min(mmod);
                    rows.push(LambdaNiceRow {
                        return_time: *rt,
                        domain_lo: *a,
                        domain_hi: *b,
                        modulus_lower_bound: mmod,
                    });
                }
            }
        }
    }
    let found = rows.len();
    Ok(LambdaNiceReport {
        rows,
        min_modulus: if found == 0 { 0.0 } else { min_mod },
        domains_found: found,
    })
}

// ---------------------------------------------------------------------------
// serialization (round-trip stable text format)
// ---------------------------------------------------------------------------

pub fn couple_to_text(couple: &NiceCouple) -> String {
    let mut s = String::new();
    s.push_str("dynlab-nice-couple v1\n");
    for (tag, set) in [("outer", &couple.outer), ("inner", &couple.inner)] {
        for c in &set.components {
            match &c.region {
                NiceRegion::Interval { lo, hi } => {
                    s.push_str(&format!(
                        "{tag} interval crit={:.17e} lo={lo:.17e} hi={hi:.17e} symmetric={} certs={}\n",
                        c.critical_point.as_real(),
                        c.symmetric,
                        c.boundary_certs
                            .iter()
                            .map(|b| if b.eventually_periodic { "exact" } else { "horizon" })
                            .collect::<Vec<_>>()
                            .join(",")
                    ));
                }
                NiceRegion::Disk { center, radius } => {
                    s.push_str(&format!(
                        "{tag} disk crit=({:.17e},{:.17e}) center=({:.17e},{:.17e}) radius={radius:.17e}\n",
                        c.critical_point.as_complex().re,
                        c.critical_point.as_complex().im,
                        center.re,
                        center.im
                    ));
                }
            }
        }
    }
    s
}

pub fn couple_from_text(map: &MapSpec, text: &str) -> Option<NiceCouple> {
    let mut outer = Vec::new();
    let mut inner = Vec::new();
    for line in text.lines().skip(1) {
        let mut parts = line.split_whitespace();
        let tag = parts.next()?;
        let kind = parts.next()?;
        let kv: std::collections::BTreeMap<&str, &str> =
            parts.filter_map(|p| p.split_once('=')).collect();
        let comp = if kind == "interval" {
            let lo: f64 = kv.get("lo")?.parse().ok()?;
            let hi: f64 = kv.get("hi")?.parse().ok()?;
            let crit: f64 = kv.get("crit")?.parse().ok()?;
            NiceComponent {
                critical_point: Point::Real(crit),
                region: NiceRegion::Interval { lo, hi },
                boundary_certs: vec![
                    boundary_certificate(map, Point::Real(lo), 64),
                    boundary_certificate(map, Point::Real(hi), 64),
                ],
                symmetric: kv.get("symmetric").map(|v| *v == "true").unwrap_or(false),
            }
        } else {
            let parse_pair = |s: &str| -> Option<(f64, f64)> {
                let s = s.trim_start_matches('(').trim_end_matches(')');
                let (a, b) = s.split_once(',')?;
                Some((a.parse().ok()?, b.parse().ok()?))
            };
            let (cr, ci) = parse_pair(kv.get("crit")?)?;
            let (zr, zi) = parse_pair(kv.get("center")?)?;
            let radius: f64 = kv.get("radius")?.parse().ok()?;
            NiceComponent {
                critical_point: Point::Complex(cr, ci),
                region: NiceRegion::Disk {
                    center: Complex64::new(zr, zi),
                    radius,
                },
                boundary_certs: vec![],
                symmetric: false,
            }
        };
        if tag == "outer" {
            outer.push(comp);
        } else {
            inner.push(comp);
        }
    }
    let vacuous = outer.is_empty() && inner.is_empty();
    Some(NiceCouple {
        outer: NiceSet { components: outer },
        inner: NiceSet { components: inner },
        couple_checked_depth: 0,
        component_moduli: vec![],
        vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::library;

    #[test]
    fn chebyshev_couple_at_delta_005() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        assert!(!couple.vacuous);
        let v = &couple.inner.components[0];
        if let NiceRegion::Interval { lo, hi } = v.region {
            // tB(0, d) has radius sqrt(d); d between 0.05 and 0.1
            assert!(lo < -0.22 && lo > -0.32, "lo = {lo}");
            assert!((lo + hi).abs() < 1e-10, "tB is symmetric around 0");
        } else {
            panic!("expected interval");
        }
        assert!(
            v.boundary_certs.iter().all(|c| c.eventually_periodic),
            "chebyshev boundaries land on the fixed point -1 exactly"
        );
        let (ol, oh) = match couple.outer.components[0].region {
            NiceRegion::Interval { lo, hi } => (lo, hi),
            _ => unreachable!(),
        };
        let (il, ih) = match couple.inner.components[0].region {
            NiceRegion::Interval { lo, hi } => (lo, hi),
            _ => unreachable!(),
        };
        assert!(ol < il && ih < oh);
    }

    #[test]
    fn squaring_couple_is_vacuous() {
        let sq = library::squaring();
        let couple = construct_nice_couple(&sq, 0.05, 8.0, 8).unwrap();
        assert!(couple.vacuous);
        assert!(couple.inner.components.is_empty());
    }

    #[test]
    fn logistic_couple_boundary_on_preorbit_of_fixed_point() {
        let log = library::logistic4();
        let couple = construct_nice_couple(&log, 0.02, 8.0, 12).unwrap();
        let v = &couple.inner.components[0];
        assert!(v.boundary_certs.iter().all(|c| c.eventually_periodic));
        verify_niceness(&log, &couple.inner, 100).unwrap();
        verify_niceness(&log, &couple.outer, 100).unwrap();
    }

    #[test]
    fn corrupted_boundary_detected() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let (lo, hi) = match couple.inner.components[0].region {
            NiceRegion::Interval { lo, hi } => (lo, hi),
            _ => unreachable!(),
        };
        let bad = NiceSet::from_intervals(&cheb, &[(lo + 0.01, hi + 0.01)], 20);
        assert!(matches!(bad, Err(NiceError::NicenessViolation { n, .. }) if n <= 20));
    }

    #[test]
    fn fixed_point_boundary_certified_forever() {
        // V = (-1, 1) for x^2 - 2: boundary maps onto the fixed point -1
        let cheb = library::chebyshev2();
        let set = NiceSet::from_intervals(&cheb, &[(-1.0, 1.0)], 10).unwrap();
        assert!(set.components[0]
            .boundary_certs
            .iter()
            .all(|c| c.eventually_periodic));
        verify_niceness(&cheb, &set, 1000).unwrap();
    }

    #[test]
    fn landing_components_chebyshev() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let table = landing_components(&cheb, &couple.inner, 15, 2_000_000).unwrap();
        assert!(table.components.iter().any(|u| u.landing_time == 0));
        let max_l = table
            .components
            .iter()
            .map(|u| u.landing_time)
            .max()
            .unwrap();
        assert!(max_l >= 10, "expected deep landing components, got {max_l}");
        assert!(table.components.iter().all(|u| u.extension_diffeomorphic));
        let t5 = table.tail(5, 1.0);
        let t10 = table.tail(10, 1.0);
        assert!(t10 < t5 * 0.7, "tail not decaying: {t5} vs {t10}");
        // pairwise disjoint
        let mut ivs: Vec<(f64, f64)> = table
            .components
            .iter()
            .map(|u| match u.region {
                Region::Interval(a, b) => (a, b),
                _ => unreachable!(),
            })
            .collect();
        ivs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in ivs.windows(2) {
            assert!(w[0].1 <= w[1].0 + 1e-10, "{:?} overlaps {:?}", w[0], w[1]);
        }
    }

    #[test]
    fn landing_covers_sampled_entering_points() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let table = landing_components(&cheb, &couple.inner, 16, 400_000).unwrap();
        // points that enter V within the cap must lie in a landing component
        for k in 0..200 {
            let x = -1.99 + 3.98 * (k as f64 + 0.5) / 200.0;
            let mut p = Point::Real(x);
            let mut l = None;
            for j in 0..=16usize {
                if couple.inner.contains(&cheb, p) {
                    l = Some(j);
                    break;
                }
                p = cheb.evaluate(p).unwrap();
            }
            if let Some(l) = l {
                let covered = table.components.iter().any(|u| {
                    u.landing_time == l && u.region.contains_point_in(&cheb, Point::Real(x))
                });
                assert!(covered, "x = {x} enters at {l} but is not covered");
            }
        }
    }

    #[test]
    fn max_landing_zero_returns_components_of_v() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let table = landing_components(&cheb, &couple.inner, 0, 10_000).unwrap();
        assert_eq!(table.components.len(), couple.inner.components.len());
    }

    #[test]
    fn lambda_report_chebyshev() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.02, 8.0, 12).unwrap();
        let rep = lambda_nice_report(&cheb, &couple, 14, 400_000).unwrap();
        assert!(rep.domains_found > 0);
        assert!(
            rep.min_modulus >= 0.5,
            "min modulus {} too small",
            rep.min_modulus
        );
    }

    #[test]
    fn couple_round_trip() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let text = couple_to_text(&couple);
        let back = couple_from_text(&cheb, &text).unwrap();
        assert_eq!(text, couple_to_text(&back));
    }

    #[test]
    fn off_critical_pullbacks_disjoint_or_contained() {
        let cheb = library::chebyshev2();
        let couple = construct_nice_couple(&cheb, 0.05, 8.0, 12).unwrap();
        let (lo, hi) = match couple.inner.components[0].region {
            NiceRegion::Interval { lo, hi } => (lo, hi),
            _ => unreachable!(),
        };
        for depth in 1..=10usize {
            let (comps, _) =
                all_components(&cheb, Target::Interval(lo, hi), depth, 2_000_000).unwrap();
            for w in comps {
                if let Region::Interval(a, b) = w.region {
                    let tol = 1e-10;
                    let intersects = a < hi - tol && b > lo + tol;
                    let contained = a >= lo - tol && b <= hi + tol;
                    assert!(!intersects || contained, "depth {depth}: [{a}, {b}]");
                }
            }
        }
    }
}
