//! Normalized Hermite functions
//! `h_k(z) = (2^k k! sqrt(π))^(-1/2) H_k(z) exp(-z²/2)`,
//! evaluated by their three-term recurrence so no factorial is ever formed.

use std::f64::consts::PI;

/// `h_0(z), ..., h_kmax(z)`.
pub fn hermite_functions(kmax: usize, z: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(kmax + 1);
    let h0 = PI.powf(-0.25) * (-0.5 * z * z).exp();
    out.push(h0);
    if kmax == 0 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * z * h0);
    for k in 1..kmax {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
    out
}

pub fn hermite_function(k: usize, z: f64) -> f64 {
    hermite_functions(k, z)[k]
}
