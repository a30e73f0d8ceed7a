//! Independent reference solutions for the per-node size constraints.

use nusmpbic::physics::SolventSpec;

/// Damped Picard iteration `ξ ← ξ + θ (a W(ξ)^{v/v0} - ξ)` from `ξ = 0`,
/// with `θ = 1/(1 + λ)` where `λ` is the Lipschitz bound of the map along
/// `v`, halved while the water fraction would turn non-positive.
pub fn fixed_point(exponents: &[f64], solvent: &SolventSpec, gamma: f64, steps: usize) -> Vec<f64> {
    let n = solvent.len();
    let v: Vec<f64> = solvent.species.iter().map(|s| s.ion_volume).collect();
    let p: Vec<f64> = v.iter().map(|vi| vi / solvent.v0).collect();
    let a: Vec<f64> = solvent
        .species
        .iter()
        .zip(exponents)
        .map(|(s, e)| s.bulk_concentration * e.exp())
        .collect();
    let water = |x: &[f64]| 1.0 - gamma * x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
    let mut xi = vec![0.0; n];
    for _ in 0..steps {
        let w = water(&xi);
        let lambda: f64 = (0..n).map(|i| gamma * p[i] * v[i] * a[i] * w.powf(p[i] - 1.0)).sum();
        let mut theta = 1.0 / (1.0 + lambda);
        let target: Vec<f64> = (0..n).map(|i| a[i] * w.powf(p[i])).collect();
        loop {
            let next: Vec<f64> = (0..n).map(|i| xi[i] + theta * (target[i] - xi[i])).collect();
            if water(&next) > 0.0 {
                xi = next;
                break;
            }
            theta *= 0.5;
        }
    }
    xi
}
