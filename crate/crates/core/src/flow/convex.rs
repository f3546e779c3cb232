//! Tangents of convex functions: the flow u_r(x) = (u(rx) − u(0))/r
//! decreases to the support function of the subdifferential at 0.

use serde::Serialize;

use super::sampling::{ball_points, sphere_points};
use super::ScalarField;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct ConvexTangentReport {
    pub field: String,
    pub radii: Vec<f64>,
    pub grid_size: usize,
    /// Largest u_{r'}(x) − u_r(x) seen for r' < r (nonpositive for convex u).
    pub max_increase: f64,
    /// Max |u_r − support| on the grid at the smallest radius.
    pub tangent_error: Option<f64>,
    /// Same after linear extrapolation in r from the two smallest radii.
    pub tangent_error_extrapolated: Option<f64>,
    /// Spherical averages of u_r per radius.
    pub sphere_averages: Vec<f64>,
    /// Θ^S: the spherical average of the tangent, extrapolated to r = 0.
    pub theta_spherical: f64,
    pub differentiable: bool,
    /// Largest failure of U(x + y) ≤ U(x) + U(y) and U(tx) = tU(x) for the
    /// extrapolated tangent.
    pub seminorm_defect: f64,
}

/// Runs the convex flow on a fixed grid in the unit ball. Fails with
/// `NotConvex` when u_r increases by more than `monotone_tol` as r shrinks.
pub fn convex_tangent(
    u: &ScalarField,
    radii: &[f64],
    grid_size: usize,
    seed: u64,
    monotone_tol: f64,
    zero_tol: f64,
) -> Result<ConvexTangentReport> {
    if radii.len() < 2 || radii.windows(2).any(|w| w[1] >= w[0]) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Schedule("convex flow needs at least two strictly decreasing positive radii".into()));
    }
    let n = u.dim();
    let u0 = u.raw(&vec![0.0; n]);
    if !u0.is_finite() {
        return Err(Error::Field(format!("{} is not finite at the origin", u.name())));
    }
    let flow = |r: f64, x: &[f64]| -> f64 {
        let y: Vec<f64> = x.iter().map(|v| v * r).collect();
        (u.raw(&y) - u0) / r
    };
    let grid = ball_points(n, grid_size.max(2), seed);
    let sphere = sphere_points(n, grid_size.max(2), seed);

    let mut max_increase = f64::NEG_INFINITY;
    let mut prev: Vec<f64> = grid.points.iter().map(|x| flow(radii[0], x)).collect();
    for &r in &radii[1..] {
        let cur: Vec<f64> = grid.points.iter().map(|x| flow(r, x)).collect();
        for (i, (a, b)) in prev.iter().zip(&cur).enumerate() {
            let inc = b - a;
            max_increase = max_increase.max(inc);
            if inc >= monotone_tol {
                return Err(Error::NotConvex { radius: r, point: grid.points[i].clone(), excess: inc });
            }
        }
        prev = cur;
    }

    let k = radii.len();
    let (r1, r2) = (radii[k - 1], radii[k - 2]);
    let extrapolate = |x: &[f64]| (r2 * flow(r1, x) - r1 * flow(r2, x)) / (r2 - r1);

    let (tangent_error, tangent_error_extrapolated) = match &u.meta.tangent {
        Some(support) => {
            let mut last: f64 = 0.0;
            let mut extra: f64 = 0.0;
            for x in &grid.points {
                let s = support(x);
                last = last.max((flow(r1, x) - s).abs());
                extra = extra.max((extrapolate(x) - s).abs());
            }
            (Some(last), Some(extra))
        }
        None => (None, None),
    };

    let sphere_averages: Vec<f64> = radii
        .iter()
        .map(|&r| sphere.points.iter().map(|x| flow(r, x)).sum::<f64>() / sphere.len() as f64)
        .collect();
    let theta_spherical = (r2 * sphere_averages[k - 1] - r1 * sphere_averages[k - 2]) / (r2 - r1);

    let mut seminorm_defect: f64 = 0.0;
    let half = grid.len() / 2;
    for (x, y) in grid.points[..half].iter().zip(&grid.points[half..]) {
        let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        seminorm_defect = seminorm_defect.max(extrapolate(&xy) - extrapolate(x) - extrapolate(y));
        let tx: Vec<f64> = x.iter().map(|v| 0.5 * v).collect();
        seminorm_defect = seminorm_defect.max((extrapolate(&tx) - 0.5 * extrapolate(x)).abs());
    }

    Ok(ConvexTangentReport {
        field: u.name().to_string(),
        radii: radii.to_vec(),
        grid_size: grid.len(),
        max_increase,
        tangent_error,
        tangent_error_extrapolated,
        sphere_averages,
        differentiable: theta_spherical.abs() <= zero_tol,
        theta_spherical,
        seminorm_defect,
    })
}
