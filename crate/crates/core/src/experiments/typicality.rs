use rayon::prelude::*;

use crate::capacity::ChannelParams;
use crate::geometry::{dot, gaussian_norm_tail_bound, norm, norm_sq, uniform_sphere_sample, TailSide};
use crate::jammers::awgn_observe;
use crate::rng::{domain, stream};

fn cos_bound(n: f64, eps: f64) -> f64 {
    // |⟨x, s_z⟩| ≥ ε‖x‖‖s_z‖ needs either a large Gaussian projection or a
    // short noise vector
    2.0 * (-eps * eps * (1.0 - eps) * n / 2.0).exp() + 2.0 * (-eps * eps * n / 4.0).exp()
}

/// Largest `ε₁` with `σ²ε₁ + 2√(Pσ²(1+ε₁))·ε₁ ≤ (P+σ²)ε`.
fn inner_epsilon(p: &ChannelParams, eps: f64) -> f64 {
    let (pw, s2) = (p.power, p.sigma2);
    let g = |e: f64| s2 * e + 2.0 * (pw * s2 * (1.0 + e)).sqrt() * e - (pw + s2) * eps;
    let (mut lo, mut hi) = (0.0, eps.max(1.0));
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Analytic bounds on the three atypicality events for the jammer's
/// observation: `‖s_z‖² ∉ nσ²(1±ε)`, `|cos∠(x, s_z)| ≥ ε`,
/// `‖z‖² ∉ n(P+σ²)(1±ε)`. Each is clipped to 1.
pub fn atypicality_bounds(p: &ChannelParams, n: usize, eps: f64) -> [f64; 3] {
    let nf = n as f64;
    let e1 = gaussian_norm_tail_bound(n, p.sigma2, eps, TailSide::TwoSided);
    let e2 = cos_bound(nf, eps).min(1.0);
    let eps1 = inner_epsilon(p, eps);
    let e3 = gaussian_norm_tail_bound(n, p.sigma2, eps1, TailSide::TwoSided) + cos_bound(nf, eps1);
    [e1, e2, e3.min(1.0)]
}

/// Empirical frequencies of the same three events over `trials` draws of a
/// uniform codeword and observation noise.
pub fn atypicality_frequencies(p: &ChannelParams, n: usize, eps: f64, trials: u64, seed: u64) -> [f64; 3] {
    let nf = n as f64;
    let counts = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, domain::TYPICALITY, t);
            let x = uniform_sphere_sample(&mut rng, n, (nf * p.power).sqrt());
            let z = awgn_observe(&mut rng, &x, p.sigma2);
            let sz: Vec<f64> = z.iter().zip(&x).map(|(a, b)| a - b).collect();
            let e1 = (norm_sq(&sz) - nf * p.sigma2).abs() > nf * p.sigma2 * eps;
            let cos = dot(&x, &sz) / (norm(&x) * norm(&sz));
            let e2 = cos.abs() >= eps;
            let z2 = norm_sq(&z);
            let e3 = (z2 - nf * (p.power + p.sigma2)).abs() > nf * (p.power + p.sigma2) * eps;
            [e1 as u64, e2 as u64, e3 as u64]
        })
        .reduce(|| [0, 0, 0], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
    counts.map(|c| c as f64 / trials as f64)
}
