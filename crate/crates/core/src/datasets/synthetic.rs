use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{LabeledDataset, Point};
use crate::error::{Error, Result};

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "n must be an even count >= 2, got {n}"
        )));
    }
    Ok(())
}

fn check_noise(noise: f64) -> Result<()> {
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Error::invalid(format!(
            "noise must be finite and >= 0, got {noise}"
        )));
    }
    Ok(())
}

fn jitter(rng: &mut ChaCha8Rng, noise: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    noise * z
}

/// Evenly spaced parameters in `[0, end]`; a single sample sits at 0.
fn linspace(count: usize, end: f64) -> impl Iterator<Item = f64> {
    let denom = count.saturating_sub(1).max(1) as f64;
    (0..count).map(move |j| end * j as f64 / denom)
}

/// Two interleaving unit half circles, `n / 2` points each.
///
/// Upper moon (class 0): `(cos t, sin t)`; lower moon (class 1):
/// `(0.5 + cos t, -0.25 - sin t)`, with `t` evenly spaced in `[0, π]`.
/// Gaussian noise of standard deviation `noise` is added per coordinate.
pub fn generate_two_moons(n: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    check_even(n)?;
    check_noise(noise)?;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for t in linspace(half, PI) {
        points.push((t.cos(), t.sin()));
        classes.push(0);
    }
    for t in linspace(half, PI) {
        points.push((0.5 + t.cos(), -0.25 - t.sin()));
        classes.push(1);
    }
    let points = points
        .into_iter()
        .map(|(x, y)| {
            let dx = jitter(&mut rng, noise);
            let dy = jitter(&mut rng, noise);
            Point::new(vec![x + dx, y + dy])
        })
        .collect();
    LabeledDataset::unlabeled(points, classes)
}

/// Inner circle of radius 1 (class 0) and outer ring of radius 2 (class 1),
/// `n / 2` points each at uniformly random angles, plus coordinate noise.
pub fn generate_ring(n: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    check_even(n)?;
    check_noise(noise)?;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for (class, radius) in [(0usize, 1.0f64), (1, 2.0)] {
        for _ in 0..half {
            let angle = rng.random_range(0.0..2.0 * PI);
            let x = radius * angle.cos() + jitter(&mut rng, noise);
            let y = radius * angle.sin() + jitter(&mut rng, noise);
            points.push(Point::new(vec![x, y]));
            classes.push(class);
        }
    }
    LabeledDataset::unlabeled(points, classes)
}

/// Two isotropic Gaussian blobs centred at `(-2, 0)` (class 0) and `(2, 0)`
/// (class 1) with standard deviation `noise`.
pub fn generate_two_clusters(n: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    check_even(n)?;
    check_noise(noise)?;
    let half = n / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    let mut classes = Vec::with_capacity(n);
    for (class, cx) in [(0usize, -2.0f64), (1, 2.0)] {
        for _ in 0..half {
            let x = cx + jitter(&mut rng, noise);
            let y = jitter(&mut rng, noise);
            points.push(Point::new(vec![x, y]));
            classes.push(class);
        }
    }
    LabeledDataset::unlabeled(points, classes)
}

/// Archimedean spiral `r = θ / 2π` sampled at `n` evenly spaced `θ` in
/// `[0, 2π·turns]`. Consecutive arms are one unit apart. Index order is the
/// order along the curve.
pub fn generate_spiral(n: usize, turns: f64) -> Result<LabeledDataset> {
    if n < 2 {
        return Err(Error::invalid(format!("n must be >= 2, got {n}")));
    }
    if !(turns > 0.0 && turns.is_finite()) {
        return Err(Error::invalid(format!("turns must be > 0, got {turns}")));
    }
    let points = linspace(n, 2.0 * PI * turns)
        .map(|theta| {
            let r = theta / (2.0 * PI);
            Point::new(vec![r * theta.cos(), r * theta.sin()])
        })
        .collect();
    LabeledDataset::unlabeled(points, vec![0; n])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moons_sizes_and_labels() {
        let ds = generate_two_moons(400, 0.05, 7).unwrap();
        assert_eq!(ds.len(), 400);
        assert_eq!(ds.classes().iter().filter(|&&c| c == 0).count(), 200);
        assert_eq!(ds.classes().iter().filter(|&&c| c == 1).count(), 200);
        assert!(ds.labels().iter().all(|&y| y == 0.0));
    }

    #[test]
    fn two_point_moons_are_base_points() {
        let ds = generate_two_moons(2, 0.0, 0).unwrap();
        assert_eq!(ds.points()[0].coords(), &[1.0, 0.0]);
        assert_eq!(ds.points()[1].coords(), &[1.5, -0.25]);
    }

    #[test]
    fn odd_or_tiny_n_rejected() {
        for n in [0, 1, 3, 401] {
            assert!(matches!(
                generate_two_moons(n, 0.1, 0),
                Err(Error::InvalidArgument(_))
            ));
            assert!(generate_ring(n, 0.1, 0).is_err());
            assert!(generate_two_clusters(n, 0.1, 0).is_err());
        }
        assert!(generate_two_moons(4, -1.0, 0).is_err());
    }

    #[test]
    fn generators_are_bit_identical_per_seed() {
        assert_eq!(
            generate_two_moons(100, 0.1, 5).unwrap(),
            generate_two_moons(100, 0.1, 5).unwrap()
        );
        assert_eq!(
            generate_ring(100, 0.1, 5).unwrap(),
            generate_ring(100, 0.1, 5).unwrap()
        );
        assert_eq!(
            generate_two_clusters(100, 0.5, 5).unwrap(),
            generate_two_clusters(100, 0.5, 5).unwrap()
        );
        assert_ne!(
            generate_ring(100, 0.1, 5).unwrap(),
            generate_ring(100, 0.1, 6).unwrap()
        );
    }

    #[test]
    fn noiseless_ring_radii() {
        let ds = generate_ring(400, 0.0, 11).unwrap();
        assert_eq!(ds.len(), 400);
        for (p, &c) in ds.points().iter().zip(ds.classes()) {
            let r = p.coords()[0].hypot(p.coords()[1]);
            let want = if c == 0 { 1.0 } else { 2.0 };
            assert!((r - want).abs() < 1e-12, "r = {r}");
        }
    }

    #[test]
    fn clusters_are_centred() {
        let ds = generate_two_clusters(400, 0.5, 3).unwrap();
        for class in [0usize, 1] {
            let xs: Vec<f64> = ds
                .points()
                .iter()
                .zip(ds.classes())
                .filter(|(_, &c)| c == class)
                .map(|(p, _)| p.coords()[0])
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let want = if class == 0 { -2.0 } else { 2.0 };
            assert!((mean - want).abs() < 0.15);
        }
    }

    #[test]
    fn spiral_endpoints_and_order() {
        let ds = generate_spiral(2, 3.0).unwrap();
        assert_eq!(ds.points()[0].coords(), &[0.0, 0.0]);
        let end = ds.points()[1].coords();
        assert!((end[0] - 3.0).abs() < 1e-12 && end[1].abs() < 1e-12);

        let ds = generate_spiral(300, 3.0).unwrap();
        assert_eq!(ds.len(), 300);
        let radii: Vec<f64> = ds
            .points()
            .iter()
            .map(|p| p.coords()[0].hypot(p.coords()[1]))
            .collect();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
        assert!(generate_spiral(1, 3.0).is_err());
        assert!(generate_spiral(10, 0.0).is_err());
    }
}
