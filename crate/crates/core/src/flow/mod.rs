//! The tangent flow: rescalings u_r, sup-radius profiles M(u, r), density
//! quotients, L¹ convergence to candidate tangents and plane restrictions.

mod convex;
mod field;
pub mod sampling;

pub use convex::{convex_tangent, ConvexTangentReport};
pub use field::{
    catalog_field, catalog_instances, catalog_names, expression_field, parse_catalog_ref, riesz_kernel, Evaluator,
    FieldMeta, ScalarField, CATALOG_VERSION, NEG_INF_FLOOR,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Frame;
use sampling::{annulus_points, annulus_volume, ball_points, sphere_points, unit_ball_volume, PointSet};

/// Checked Riesz kernel: errors for t ≤ 0 or p < 1.
pub fn kernel(p: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::OutOfRange(format!("kernel argument must be positive, got {t}")));
    }
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("kernel exponent must be >= 1, got {p}")));
    }
    Ok(riesz_kernel(p, t))
}

/// Sample sizes and seed for sup estimates. The unit point sets are shared
/// by every radius, so estimates at different radii are nested.
#[derive(Clone, Debug, Serialize)]
pub struct SupSettings {
    pub ns: usize,
    pub nb: usize,
    pub seed: u64,
    /// Pattern-search refinement steps on the sphere.
    pub refine: usize,
}

impl SupSettings {
    pub fn new(ns: usize, nb: usize, seed: u64) -> Self {
        SupSettings { ns, nb, seed, refine: 400 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupEstimate {
    pub radius: f64,
    pub value: f64,
    /// Same estimate from the first half of each point set.
    pub half_value: f64,
    pub noise: f64,
    pub saturation: f64,
    pub argmax: Vec<f64>,
}

struct UnitSets {
    sphere: PointSet,
    ball: PointSet,
}

impl UnitSets {
    fn new(n: usize, s: &SupSettings) -> Self {
        UnitSets { sphere: sphere_points(n, s.ns.max(2), s.seed), ball: ball_points(n, s.nb.max(2), s.seed) }
    }
}

fn scaled(x: &[f64], r: f64) -> Vec<f64> {
    x.iter().map(|v| v * r).collect()
}

fn normalize(x: &mut [f64]) -> bool {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(n > 0.0) {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

/// Max over a prefix of the unit sets scaled by r, then a coordinate pattern
/// search on the sphere of radius r from the best sphere point.
fn sup_from_sets(u: &ScalarField, r: f64, sphere: &[Vec<f64>], ball: &[Vec<f64>], refine: usize) -> (f64, Vec<f64>, usize, usize) {
    let n = u.dim();
    let mut best = u.eval(&vec![0.0; n]);
    let mut arg = vec![0.0; n];
    let mut best_sphere = f64::NEG_INFINITY;
    let mut dir = sphere.first().cloned().unwrap_or_else(|| {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    });
    let mut saturated = 0;
    let mut total = 1;
    if u.is_saturated(&arg) {
        saturated += 1;
    }
    for xi in sphere {
        let x = scaled(xi, r);
        total += 1;
        let v = u.eval(&x);
        if v <= NEG_INF_FLOOR {
            saturated += 1;
        }
        if v > best_sphere {
            best_sphere = v;
            dir = xi.clone();
        }
        if v > best {
            best = v;
            arg = x;
        }
    }
    for xi in ball {
        let x = scaled(xi, r);
        total += 1;
        let v = u.eval(&x);
        if v <= NEG_INF_FLOOR {
            saturated += 1;
        }
        if v > best {
            best = v;
            arg = x;
        }
    }
    // Refine on the sphere.
    let mut step = 0.25;
    let mut cur = best_sphere;
    let mut iters = 0;
    while iters < refine && step > 1e-13 {
        iters += 1;
        let mut improved = false;
        for i in 0..n {
            for sgn in [1.0, -1.0] {
                let mut cand = dir.clone();
                cand[i] += sgn * step;
                if !normalize(&mut cand) {
                    continue;
                }
                let v = u.eval(&scaled(&cand, r));
                if v > cur {
                    cur = v;
                    dir = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    if cur > best {
        best = cur;
        arg = scaled(&dir, r);
    }
    (best, arg, saturated, total)
}

/// M(u, r) = sup over |x| ≤ r.
pub fn sup_on_ball(u: &ScalarField, r: f64, settings: &SupSettings) -> Result<SupEstimate> {
    let sets = UnitSets::new(u.dim(), settings);
    sup_with_sets(u, r, &sets, settings.refine)
}

fn sup_with_sets(u: &ScalarField, r: f64, sets: &UnitSets, refine: usize) -> Result<SupEstimate> {
    if !(r > 0.0) {
        return Err(Error::OutOfRange(format!("radius must be positive, got {r}")));
    }
    let (value, argmax, sat, total) = sup_from_sets(u, r, &sets.sphere.points, &sets.ball.points, refine);
    if value <= NEG_INF_FLOOR {
        return Err(Error::Field(format!("{} is -inf at every sample of the ball of radius {r}", u.name())));
    }
    let (half_value, ..) = sup_from_sets(u, r, sets.sphere.half(), sets.ball.half(), refine);
    Ok(SupEstimate {
        radius: r,
        value,
        half_value,
        noise: (value - half_value).abs(),
        saturation: sat as f64 / total as f64,
        argmax,
    })
}

/// u_r(x) = r^{p−2} u(r x) for p ≠ 2 and u(r x) − M(u, r) for p = 2.
pub fn flow_rescale(u: &ScalarField, r: f64, p: f64, settings: &SupSettings) -> Result<ScalarField> {
    if !(r > 0.0) {
        return Err(Error::OutOfRange(format!("rescaling radius must be positive, got {r}")));
    }
    if p == 2.0 {
        let m = sup_on_ball(u, r, settings)?;
        Ok(u.rescaled(r, 2.0, m.value))
    } else {
        Ok(u.rescaled(r, p, 0.0))
    }
}

/// For p = 2: |M(u, r) + M(u_r, s) − M(u, rs)|, the amount by which
/// (u_r)_s and u_{rs} differ.
pub fn log_semigroup_defect(u: &ScalarField, r: f64, s: f64, settings: &SupSettings) -> Result<f64> {
    let sets = UnitSets::new(u.dim(), settings);
    let mr = sup_with_sets(u, r, &sets, settings.refine)?.value;
    let ur = u.rescaled(r, 2.0, mr);
    let ms = sup_with_sets(&ur, s, &sets, settings.refine)?.value;
    let mrs = sup_with_sets(u, r * s, &sets, settings.refine)?.value;
    Ok((mr + ms - mrs).abs())
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowSchedule {
    pub p: f64,
    pub radii: Vec<f64>,
    pub ns: usize,
    pub nb: usize,
    pub annulus: (f64, f64),
    pub seed: u64,
}

impl FlowSchedule {
    /// Radii 2^{−j}, j = 0..=levels.
    pub fn dyadic(p: f64, levels: u32, ns: usize, nb: usize, seed: u64) -> Self {
        let radii = (0..=levels).map(|j| 0.5f64.powi(j as i32)).collect();
        FlowSchedule { p, radii, ns, nb, annulus: (0.5, 1.0), seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Schedule(format!("p must be >= 1, got {}", self.p)));
        }
        if self.radii.len() < 2 {
            return Err(Error::Schedule("need at least two radii".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Error::Schedule("radii must be positive and finite".into()));
        }
        if self.radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("radii must be strictly decreasing".into()));
        }
        let (a, b) = self.annulus;
        if !(a > 0.0 && a < b) {
            return Err(Error::Schedule(format!("annulus needs 0 < a < b, got ({a}, {b})")));
        }
        if self.ns == 0 || self.nb == 0 {
            return Err(Error::Schedule("sample counts must be >= 1".into()));
        }
        Ok(())
    }

    pub fn sup_settings(&self) -> SupSettings {
        SupSettings::new(self.ns, self.nb, self.seed)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Averages {
    pub radius: f64,
    pub area: f64,
    pub area_stderr: f64,
    pub volume: f64,
    pub volume_stderr: f64,
    pub saturation: f64,
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Sphere and ball averages S(u, r), V(u, r) with standard errors.
pub fn area_volume_averages(u: &ScalarField, r: f64, count: usize, seed: u64) -> Result<Averages> {
    let sphere = sphere_points(u.dim(), count, seed);
    let ball = ball_points(u.dim(), count, seed);
    averages_with_sets(u, r, &sphere, &ball)
}

fn averages_with_sets(u: &ScalarField, r: f64, sphere: &PointSet, ball: &PointSet) -> Result<Averages> {
    let sv: Vec<f64> = sphere.points.iter().map(|x| u.eval(&scaled(x, r))).collect();
    let bv: Vec<f64> = ball.points.iter().map(|x| u.eval(&scaled(x, r))).collect();
    let sat = sv.iter().chain(&bv).filter(|v| **v <= NEG_INF_FLOOR).count() as f64 / (sv.len() + bv.len()) as f64;
    if sat > 0.5 {
        return Err(Error::Field(format!("{:.0}% of samples are -inf at radius {r}", 100.0 * sat)));
    }
    let (area, area_stderr) = mean_stderr(&sv);
    let (volume, volume_stderr) = mean_stderr(&bv);
    Ok(Averages { radius: r, area, area_stderr, volume, volume_stderr, saturation: sat })
}

#[derive(Clone, Debug, Serialize)]
pub struct Quotient {
    pub r: f64,
    pub s: f64,
    pub value: f64,
    pub noise: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    /// The quotient that should be the larger one.
    pub outer: (f64, f64),
    pub inner: (f64, f64),
    pub excess: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub field: String,
    pub p: f64,
    pub radii: Vec<f64>,
    pub sup: Vec<SupEstimate>,
    /// Running maximum of the sup estimates from the smallest radius up;
    /// the table is computed from these values.
    pub m: Vec<f64>,
    pub table: Vec<Quotient>,
    /// Quotient at the two smallest radii.
    pub theta: f64,
    /// Aitken extrapolation of the last three consecutive quotients, when
    /// they are monotone.
    pub theta_extrapolated: Option<f64>,
    pub violations: Vec<Violation>,
    pub averages: Vec<Option<Averages>>,
    /// Spherical density from the area averages at the two smallest radii.
    pub theta_spherical: Option<f64>,
    pub saturation: f64,
}

fn aitken(q: &[f64]) -> Option<f64> {
    if q.len() < 3 {
        return None;
    }
    let (a, b, c) = (q[q.len() - 3], q[q.len() - 2], q[q.len() - 1]);
    let monotone = (a <= b && b <= c) || (a >= b && b >= c);
    if !monotone {
        return None;
    }
    let d2 = c - 2.0 * b + a;
    if d2.abs() <= 1e-14 * (1.0 + c.abs()) {
        return Some(c);
    }
    let est = c - (c - b) * (c - b) / d2;
    est.is_finite().then_some(est)
}

/// The difference-quotient table of (M(u,r) − M(u,s)) / (K_p(r) − K_p(s))
/// over all radius pairs, with monotonicity checks.
pub fn density(u: &ScalarField, schedule: &FlowSchedule) -> Result<DensityReport> {
    schedule.validate()?;
    let p = schedule.p;
    let settings = schedule.sup_settings();
    let sets = UnitSets::new(u.dim(), &settings);
    let sup: Vec<SupEstimate> =
        schedule.radii.iter().map(|&r| sup_with_sets(u, r, &sets, settings.refine)).collect::<Result<_>>()?;
    let k = schedule.radii.len();
    let mut m = vec![0.0; k];
    let mut running = f64::NEG_INFINITY;
    for i in (0..k).rev() {
        running = running.max(sup[i].value);
        m[i] = running;
    }
    let kern: Vec<f64> = schedule.radii.iter().map(|&r| riesz_kernel(p, r)).collect();
    let mut table = Vec::new();
    let mut index = vec![vec![usize::MAX; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let dk = kern[i] - kern[j];
            if dk.abs() < 1e-14 {
                return Err(Error::Schedule(format!(
                    "kernel difference vanishes for radii {} and {}",
                    schedule.radii[i], schedule.radii[j]
                )));
            }
            index[i][j] = table.len();
            table.push(Quotient {
                r: schedule.radii[i],
                s: schedule.radii[j],
                value: (m[i] - m[j]) / dk,
                noise: (sup[i].noise + sup[j].noise) / dk.abs(),
            });
        }
    }
    // Q(r, s) is nondecreasing in each radius: shrinking either one must
    // not increase the quotient.
    let mut violations = Vec::new();
    let mut check = |outer: usize, inner: usize| {
        let (qo, qi) = (&table[outer], &table[inner]);
        let threshold = 3.0 * (qo.noise + qi.noise) + 1e-9 * (1.0 + qo.value.abs().max(qi.value.abs()));
        let excess = qi.value - qo.value;
        if excess > threshold {
            violations.push(Violation { outer: (qo.r, qo.s), inner: (qi.r, qi.s), excess, threshold });
        }
    };
    for i in 0..k {
        for j in i + 1..k {
            if j + 1 < k {
                check(index[i][j], index[i][j + 1]);
            }
            if i + 1 < j {
                check(index[i][j], index[i + 1][j]);
            }
        }
    }
    let theta = table[index[k - 2][k - 1]].value;
    let consecutive: Vec<f64> = (0..k - 1).map(|i| table[index[i][i + 1]].value).collect();
    let theta_extrapolated = aitken(&consecutive);

    let sphere = sphere_points(u.dim(), schedule.ns.max(2), schedule.seed ^ 0xa5a5);
    let ball = ball_points(u.dim(), schedule.nb.max(2), schedule.seed ^ 0xa5a5);
    let averages: Vec<Option<Averages>> =
        schedule.radii.iter().map(|&r| averages_with_sets(u, r, &sphere, &ball).ok()).collect();
    let theta_spherical = match (&averages[k - 2], &averages[k - 1]) {
        (Some(a), Some(b)) => Some((a.area - b.area) / (kern[k - 2] - kern[k - 1])),
        _ => None,
    };
    let saturation = sup.iter().map(|s| s.saturation).fold(0.0, f64::max);
    Ok(DensityReport {
        field: u.name().to_string(),
        p,
        radii: schedule.radii.clone(),
        sup,
        m,
        table,
        theta,
        theta_extrapolated,
        violations,
        averages,
        theta_spherical,
        saturation,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub radius: f64,
    /// L¹ distance ∫_{a≤|x|≤b} |u_r − U|.
    pub distance: f64,
    pub stderr: f64,
    /// Sampling plus sup-estimation noise on the distance.
    pub noise: f64,
    pub saturation: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub field: String,
    pub candidate: String,
    pub p: f64,
    pub annulus: (f64, f64),
    pub rows: Vec<ConvergenceRow>,
    pub final_distance: f64,
    pub decreasing_tail: bool,
    pub converged: bool,
    pub tol: f64,
}

/// Quasi-Monte-Carlo L¹ distances between the flow u_r and a candidate
/// tangent on the schedule's annulus.
pub fn tangent_convergence(
    u: &ScalarField,
    schedule: &FlowSchedule,
    candidate: &ScalarField,
    tol: f64,
) -> Result<ConvergenceReport> {
    schedule.validate()?;
    if candidate.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), got: candidate.dim() });
    }
    let (a, b) = schedule.annulus;
    let n = u.dim();
    let vol = annulus_volume(n, a, b);
    let pts = annulus_points(n, schedule.nb.max(2), a, b, schedule.seed);
    let settings = schedule.sup_settings();
    let sets = UnitSets::new(n, &settings);
    let cand: Vec<f64> = pts.points.iter().map(|x| candidate.raw(x)).collect();
    let mut rows = Vec::with_capacity(schedule.radii.len());
    for &r in &schedule.radii {
        let (ur, sup_noise) = if schedule.p == 2.0 {
            let m = sup_with_sets(u, r, &sets, settings.refine)?;
            (u.rescaled(r, 2.0, m.value), m.noise)
        } else {
            (u.rescaled(r, schedule.p, 0.0), 0.0)
        };
        let mut diffs = Vec::with_capacity(pts.len());
        let mut saturated = 0usize;
        let mut scale = 0.0;
        for (x, c) in pts.points.iter().zip(&cand) {
            let v = ur.raw(x);
            if v == f64::NEG_INFINITY && *c == f64::NEG_INFINITY {
                saturated += 1;
                diffs.push(0.0);
                continue;
            }
            if !v.is_finite() || !c.is_finite() || v <= NEG_INF_FLOOR || *c <= NEG_INF_FLOOR {
                saturated += 1;
                continue;
            }
            scale += c.abs().max(v.abs());
            diffs.push((v - c).abs());
        }
        let sat = saturated as f64 / pts.len() as f64;
        if sat > 0.5 || diffs.is_empty() {
            return Err(Error::Field(format!(
                "flow at radius {r} is not integrable on the annulus ({:.0}% -inf)",
                100.0 * sat
            )));
        }
        let (mean, se) = mean_stderr(&diffs);
        let rounding = 1e-12 * scale / diffs.len() as f64;
        rows.push(ConvergenceRow {
            radius: r,
            distance: vol * mean,
            stderr: vol * se,
            noise: vol * (se + sup_noise + rounding),
            saturation: sat,
        });
    }
    let final_distance = rows.last().map(|r| r.distance).unwrap_or(f64::NAN);
    let tail = &rows[rows.len().saturating_sub(3)..];
    let decreasing_tail = tail.windows(2).all(|w| w[1].distance <= w[0].distance + w[0].noise + w[1].noise);
    Ok(ConvergenceReport {
        field: u.name().to_string(),
        candidate: candidate.name().to_string(),
        p: schedule.p,
        annulus: schedule.annulus,
        converged: final_distance < tol && decreasing_tail,
        rows,
        final_distance,
        decreasing_tail,
        tol,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HomogeneityReport {
    pub p: f64,
    pub theta: Option<f64>,
    pub scales: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks U(τx) = τ^{2−p} U(x) (p ≠ 2) or U(τx) = U(x) + Θ log τ (p = 2) on
/// annulus samples.
pub fn homogeneity_check(
    u: &ScalarField,
    p: f64,
    scales: &[f64],
    theta: Option<f64>,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<HomogeneityReport> {
    if scales.iter().any(|t| !(*t > 0.0)) {
        return Err(Error::OutOfRange("scales must be positive".into()));
    }
    let theta = if p == 2.0 { Some(theta.or(u.meta.density).unwrap_or(0.0)) } else { theta };
    let pts = annulus_points(u.dim(), count.max(2), 0.5, 1.0, seed);
    let mut residuals = Vec::with_capacity(scales.len());
    for &t in scales {
        let mut worst: f64 = 0.0;
        for x in &pts.points {
            let ux = u.raw(x);
            let utx = u.raw(&scaled(x, t));
            if !ux.is_finite() || !utx.is_finite() {
                continue;
            }
            let expected = if p == 2.0 { ux + theta.unwrap_or(0.0) * t.ln() } else { t.powf(2.0 - p) * ux };
            worst = worst.max((utx - expected).abs());
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(HomogeneityReport { p, theta, scales: scales.to_vec(), residuals, max_residual, tol, passed: max_residual <= tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionReport {
    pub plane: Frame,
    pub polar: bool,
    pub saturation: f64,
    /// Θ(W); infinite on polar planes.
    pub theta: crate::extended::Extended,
    pub density: Option<DensityReport>,
}

/// Density of t ↦ u(W t) with the kernel of the plane's dimension.
pub fn plane_restriction_density(u: &ScalarField, w: &Frame, schedule: &FlowSchedule) -> Result<RestrictionReport> {
    let k = w.plane_dim();
    if (schedule.p - k as f64).abs() > 1e-12 {
        return Err(Error::Schedule(format!("schedule p = {} does not match plane dimension {k}", schedule.p)));
    }
    let v = u.restrict(w)?;
    // Saturation over the plane's ball at the outermost radius.
    let r0 = schedule.radii[0];
    let probe = ball_points(k, schedule.nb.max(2), schedule.seed ^ 0x5eed);
    let sat = probe.points.iter().filter(|x| v.is_saturated(&scaled(x, r0))).count() as f64 / probe.len() as f64;
    if sat > 0.5 {
        return Ok(RestrictionReport {
            plane: w.clone(),
            polar: true,
            saturation: sat,
            theta: crate::extended::Extended::Infinite,
            density: None,
        });
    }
    let report = density(&v, schedule)?;
    Ok(RestrictionReport {
        plane: w.clone(),
        polar: false,
        saturation: sat,
        theta: crate::extended::Extended::Finite(report.theta),
        density: Some(report),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RestrictionProfile {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub variance: f64,
    pub samples: usize,
}

/// Values of U on the unit sphere of the plane W.
pub fn restriction_profile(u: &ScalarField, w: &Frame, count: usize, seed: u64) -> Result<RestrictionProfile> {
    let v = u.restrict(w)?;
    let pts = sphere_points(w.plane_dim(), count.max(2), seed);
    let vals: Vec<f64> = pts.points.iter().map(|x| v.eval(x)).collect();
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let variance = vals.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    Ok(RestrictionProfile {
        min: vals.iter().copied().fold(f64::INFINITY, f64::min),
        max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        variance,
        samples: vals.len(),
    })
}

/// Sup of u over the unit sphere, by sampling plus refinement.
pub fn sphere_sup(u: &ScalarField, count: usize, seed: u64) -> f64 {
    let sphere = sphere_points(u.dim(), count.max(2), seed);
    sup_from_sets(u, 1.0, &sphere.points, &[], 400).0.max(
        sphere.points.iter().map(|x| u.eval(x)).fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Volume of the unit ball, re-exported for report consumers.
pub fn ball_volume(n: usize) -> f64 {
    unit_ball_volume(n)
}
