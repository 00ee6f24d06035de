//! Bessel functions of integer order by power series, and the closed-form
//! matching condition of the planar limit problem. Used as an independent
//! check on the shooting solver.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn series(nu: u32, z: f64, sign: f64) -> f64 {
    let q = sign * z * z / 4.0;
    let mut term = (z / 2.0).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..300 {
        term *= q / (k as f64 * (k + nu) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

pub fn bessel_j(nu: u32, z: f64) -> f64 {
    series(nu, z, -1.0)
}

pub fn bessel_i(nu: u32, z: f64) -> f64 {
    series(nu, z, 1.0)
}

fn digamma_int(n: u32) -> f64 {
    -EULER_GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>()
}

pub fn bessel_k0(z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = digamma_int(1);
    for k in 1..300u32 {
        term *= q / (k as f64 * k as f64);
        sum += term * digamma_int(k + 1);
        if term < 1e-20 * sum.abs() {
            break;
        }
    }
    -(z / 2.0).ln() * bessel_i(0, z) + sum
}

pub fn bessel_k1(z: f64) -> f64 {
    let q = z * z / 4.0;
    let mut term = 1.0;
    let mut sum = digamma_int(1) + digamma_int(2);
    for k in 1..300u32 {
        term *= q / (k as f64 * (k + 1) as f64);
        sum += term * (digamma_int(k + 1) + digamma_int(k + 2));
        if term < 1e-20 * sum.abs() {
            break;
        }
    }
    1.0 / z + (z / 2.0).ln() * bessel_i(1, z) - z / 4.0 * sum
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// First zero of `J₀`.
pub fn j0_first_zero() -> f64 {
    bisect(2.0, 3.0, |z| bessel_j(0, z))
}

/// Limit eigenvalue in the plane: `a J₁(a r₀)/J₀(a r₀) = b K₁(b r₀)/K₀(b r₀)`
/// with `a = √(λ m̄)`, `b = √(λ m̲)` and `π r₀² = 1`.
pub fn planar_limit_lambda(mbar: f64, munder: f64) -> f64 {
    let r0 = (1.0 / std::f64::consts::PI).sqrt();
    let upper = j0_first_zero().powi(2) / (mbar * r0 * r0);
    bisect(1e-6 * upper, upper * (1.0 - 1e-12), |l| {
        let a = (l * mbar).sqrt();
        let b = (l * munder).sqrt();
        a * bessel_j(1, a * r0) / bessel_j(0, a * r0) - b * bessel_k1(b * r0) / bessel_k0(b * r0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((bessel_j(0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-15);
        assert!((bessel_k0(1.0) - 0.421_024_438_240_708_3).abs() < 1e-14);
        assert!((bessel_k1(1.0) - 0.601_907_230_197_234_6).abs() < 1e-14);
        assert!((j0_first_zero() - 2.404_825_557_695_773).abs() < 1e-12);
    }

    #[test]
    fn matching_root_sits_below_the_dirichlet_value() {
        let l = planar_limit_lambda(1.0, 1.0);
        let dirichlet = j0_first_zero().powi(2) * std::f64::consts::PI;
        assert!(l > 0.0 && l < dirichlet);
        assert!(planar_limit_lambda(1.0, 4.0) > l);
    }
}
