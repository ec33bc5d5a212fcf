//! Gaussian-approximation density evolution for polar sub-channel design.
//!
//! Mean-LLR evolution through the check/variable stages using the standard
//! two-piece approximation of the phi function (exponential fit below the
//! switch point, asymptotic form above it).

/// Switch point between the two phi pieces.
const PHI_SWITCH: f64 = 10.0;
/// Constants of the exponential fit exp(A * x^B + C) for x < 10.
const PHI_A: f64 = -0.4527;
const PHI_B: f64 = 0.86;
const PHI_C: f64 = 0.0218;

/// phi(x) = 1 - E[tanh(L/2)] for L ~ N(x, 2x); monotone decreasing.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < PHI_SWITCH {
        (PHI_A * x.powf(PHI_B) + PHI_C).exp()
    } else {
        (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
    }
}

/// Inverse of phi by bisection; fixed iteration count keeps it deterministic.
pub fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while phi(hi) > y && hi < 1.0e9 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Check-node (worse) combination of two mean LLRs.
fn worse(a: f64, b: f64) -> f64 {
    if !a.is_finite() {
        return b;
    }
    if !b.is_finite() {
        return a;
    }
    phi_inv(1.0 - (1.0 - phi(a)) * (1.0 - phi(b)))
}

/// Variable-node (better) combination.
fn better(a: f64, b: f64) -> f64 {
    a + b
}

/// Mean LLR per sub-channel (u-domain index order) given per-position channel
/// means. Positions pair as (i, i + n/2) at the outermost stage, matching the
/// decoder's f/g layout.
pub fn evolve_means(channel_means: &[f64]) -> Vec<f64> {
    let n = channel_means.len();
    assert!(n.is_power_of_two());
    if n == 1 {
        return channel_means.to_vec();
    }
    let half = n / 2;
    let mut low = Vec::with_capacity(half);
    let mut high = Vec::with_capacity(half);
    for i in 0..half {
        low.push(worse(channel_means[i], channel_means[i + half]));
        high.push(better(channel_means[i], channel_means[i + half]));
    }
    let mut out = evolve_means(&low);
    out.extend(evolve_means(&high));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_monotone_decreasing() {
        let xs = [0.01, 0.1, 1.0, 5.0, 9.9, 10.1, 20.0, 100.0];
        for w in xs.windows(2) {
            assert!(phi(w[0]) > phi(w[1]), "{:?}", w);
        }
    }

    #[test]
    fn phi_inv_inverts_phi() {
        for &x in &[0.05, 0.5, 2.0, 8.0, 15.0, 40.0] {
            let y = phi(x);
            assert!((phi_inv(y) - x).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn n2_ordering() {
        let m = evolve_means(&[2.0, 2.0]);
        assert!(m[0] < m[1]);
        assert!((m[1] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn infinite_channel_mean_passes_through() {
        let m = evolve_means(&[f64::INFINITY, 2.0]);
        assert!((m[0] - 2.0).abs() < 1e-9);
        assert!(m[1].is_infinite());
    }
}
