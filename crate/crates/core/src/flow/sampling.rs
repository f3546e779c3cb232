//! Low-discrepancy point sets on the unit sphere, ball and annuli.
//!
//! Points come from an additive recurrence (Kronecker sequence with the
//! generalized golden ratio) with a seeded random shift, mapped to the
//! sphere by Box–Muller. Sets are antipodally symmetric: points are emitted
//! as consecutive pairs ±ξ with a shared radius, so every even-length prefix
//! averages odd functions to exactly zero.

use rand::Rng as _;

use crate::seed;

/// Generalized golden ratio: the positive root of x^{d+1} = x + 1.
fn phi(d: usize) -> f64 {
    let mut x = 2.0f64;
    for _ in 0..60 {
        let f = x.powi(d as i32 + 1) - x - 1.0;
        let df = (d as f64 + 1.0) * x.powi(d as i32) - 1.0;
        x -= f / df;
    }
    x
}

struct Kronecker {
    alpha: Vec<f64>,
    shift: Vec<f64>,
    index: u64,
}

impl Kronecker {
    fn new(d: usize, seed: u64, label: &str) -> Self {
        let g = phi(d);
        let alpha = (1..=d).map(|j| (1.0 / g.powi(j as i32)).fract()).collect();
        let mut rng = seed::rng(seed, label, 0);
        let shift = (0..d).map(|_| rng.gen::<f64>()).collect();
        Kronecker { alpha, shift, index: 0 }
    }

    fn next(&mut self) -> Vec<f64> {
        self.index += 1;
        let k = self.index as f64;
        self.alpha
            .iter()
            .zip(&self.shift)
            .map(|(a, s)| {
                let u = (s + k * a).fract();
                // Keep strictly inside (0, 1) for the logarithm in Box–Muller.
                u.clamp(1e-16, 1.0 - 1e-16)
            })
            .collect()
    }
}

fn gaussian_from_uniform(u: &[f64], n: usize) -> Vec<f64> {
    let mut z = Vec::with_capacity(n + 1);
    for pair in u.chunks(2) {
        let r = (-2.0 * pair[0].ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * pair[1];
        z.push(r * t.cos());
        z.push(r * t.sin());
    }
    z.truncate(n);
    z
}

fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(n > 1e-12) {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// A point set stored row by row.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// The first half of the set (rounded to a whole number of pairs).
    pub fn half(&self) -> &[Vec<f64>] {
        let h = (self.points.len() / 4) * 2;
        &self.points[..h.max(2).min(self.points.len())]
    }
}

fn generate(n: usize, count: usize, seed: u64, label: &str, radius: impl Fn(f64) -> f64) -> PointSet {
    let pairs = count.div_ceil(2).max(1);
    let d = 2 * n.div_ceil(2) + 1;
    let mut seq = Kronecker::new(d, seed, label);
    let mut points = Vec::with_capacity(2 * pairs);
    while points.len() < 2 * pairs {
        let u = seq.next();
        let Some(dir) = normalize(gaussian_from_uniform(&u[..d - 1], n)) else { continue };
        let rho = radius(u[d - 1]);
        let p: Vec<f64> = dir.iter().map(|x| x * rho).collect();
        let q: Vec<f64> = p.iter().map(|x| -x).collect();
        points.push(p);
        points.push(q);
    }
    PointSet { dim: n, points }
}

/// Points on the unit sphere S^{n−1}.
pub fn sphere_points(n: usize, count: usize, seed: u64) -> PointSet {
    generate(n, count, seed, "qmc-sphere", |_| 1.0)
}

/// Uniformly distributed points in the unit ball.
pub fn ball_points(n: usize, count: usize, seed: u64) -> PointSet {
    let inv = 1.0 / n as f64;
    generate(n, count, seed, "qmc-ball", move |u| u.powf(inv))
}

/// Uniformly distributed points in the annulus a ≤ |x| ≤ b.
pub fn annulus_points(n: usize, count: usize, a: f64, b: f64, seed: u64) -> PointSet {
    let nf = n as f64;
    let (an, bn) = (a.powf(nf), b.powf(nf));
    generate(n, count, seed, "qmc-annulus", move |u| (an + u * (bn - an)).powf(1.0 / nf))
}

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Volume of the annulus a ≤ |x| ≤ b in ℝⁿ.
pub fn annulus_volume(n: usize, a: f64, b: f64) -> f64 {
    unit_ball_volume(n) * (b.powi(n as i32) - a.powi(n as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_points_are_unit_and_symmetric() {
        let s = sphere_points(4, 100, 1);
        assert_eq!(s.len(), 100);
        for p in &s.points {
            let n: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-14);
        }
        let mean0: f64 = s.points.iter().map(|p| p[0]).sum();
        assert_eq!(mean0, 0.0);
    }

    #[test]
    fn ball_second_moment() {
        // E|x|² over the unit ball in ℝⁿ is n/(n+2).
        let n = 3;
        let b = ball_points(n, 20000, 2);
        let m: f64 = b.points.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / b.len() as f64;
        assert!((m - 0.6).abs() < 2e-3, "{m}");
    }

    #[test]
    fn volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
