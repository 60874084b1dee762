//! G(x) = ∫₀^∞ Π_i Ĩ_{x_i}(t/3) dt, with Ĩ_n(z) = e^{-z} I_n(z).
//!
//! This is the continuous-time form of the Green's function: the three
//! coordinates of a rate-one walk move independently at rate 1/3. The
//! integrand is smooth, so Gauss–Legendre on dyadic panels handles [0, T];
//! the tail beyond T is integrated term by term from the large-argument
//! expansion of Ĩ_n. The scaled Bessel values come from the trapezoid rule for
//! (1/π)∫₀^π e^{-z(1−cos θ)} cos(nθ) dθ, which converges geometrically.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{CapError, Result};
use crate::lattice::LatticePoint;

/// Largest coordinate accepted by the single-point evaluator.
pub const MAX_COORD: u32 = 4096;

/// Gauss–Legendre orders tried in turn.
const ORDERS: [usize; 3] = [16, 24, 40];

/// Number of terms of the large-argument expansion used for the tail.
const TAIL_TERMS: usize = 10;

/// Gauss–Legendre nodes and weights on [−1, 1] (Golub–Welsch).
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(p, p);
    for k in 1..p {
        let b = k as f64 / ((4 * k * k - 1) as f64).sqrt();
        j[(k, k - 1)] = b;
        j[(k - 1, k)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..p)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], 2.0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Ĩ_n(z) for each n in `orders`.
pub fn scaled_bessel(z: f64, orders: &[u32]) -> Vec<f64> {
    let n_max = orders.iter().copied().max().unwrap_or(0) as f64;
    if z == 0.0 {
        return orders.iter().map(|&n| if n == 0 { 1.0 } else { 0.0 }).collect();
    }
    // aliasing error is Ĩ_{N−n}(z); keep N − n well into the Gaussian tail
    let big_n = (2.0 * (n_max + 40.0 + 12.0 * z.sqrt())).ceil() as usize;
    let dtheta = 2.0 * std::f64::consts::PI / big_n as f64;
    // skip nodes whose weight e^{-2z sin²(θ/2)} is below e^{-50}
    let cut = if 25.0 / z >= 1.0 {
        big_n / 2
    } else {
        ((2.0 * (25.0 / z).sqrt().asin()) / dtheta).ceil() as usize
    }
    .min(big_n / 2);
    let mut out = vec![0.0; orders.len()];
    for j in 0..=cut {
        let theta = j as f64 * dtheta;
        let s = (0.5 * theta).sin();
        let w = (-2.0 * z * s * s).exp();
        // nodes j and N−j coincide in value; the centre and (for even N) the
        // antipode appear once
        let mult = if j == 0 || 2 * j == big_n { 1.0 } else { 2.0 };
        for (o, &n) in out.iter_mut().zip(orders) {
            *o += mult * w * (n as f64 * theta).cos();
        }
    }
    out.iter_mut().for_each(|v| *v /= big_n as f64);
    out
}

/// Coefficients b_k with Ĩ_n(z) ~ (2πz)^{-1/2} Σ_k b_k z^{-k}.
fn asymptotic_coeffs(n: u32) -> [f64; TAIL_TERMS] {
    let mu = 4.0 * (n as f64) * (n as f64);
    let mut b = [0.0; TAIL_TERMS];
    b[0] = 1.0;
    for k in 1..TAIL_TERMS {
        let odd = (2 * k - 1) as f64;
        b[k] = -b[k - 1] * (mu - odd * odd) / (8.0 * k as f64);
    }
    b
}

/// ∫_T^∞ Π Ĩ_{n_i}(t/3) dt from the product of the three expansions.
fn tail_integral(rep: [u32; 3], t_tail: f64) -> f64 {
    let [a, b, c] = rep.map(asymptotic_coeffs);
    let z = t_tail / 3.0;
    let mut total = 0.0;
    for i in 0..TAIL_TERMS {
        for j in 0..TAIL_TERMS - i {
            for k in 0..TAIL_TERMS - i - j {
                let kk = (i + j + k) as f64;
                total += a[i] * b[j] * c[k] * 3.0 * z.powf(-0.5 - kk) / (kk + 0.5);
            }
        }
    }
    total / (2.0 * std::f64::consts::PI).powf(1.5)
}

/// Start of the asymptotic tail for coordinates up to `n_max`.
fn tail_start(n_max: u32) -> f64 {
    let need = 3.0 * 400.0 * (n_max as f64 + 1.0).powi(2);
    let mut t = 1024.0;
    while t < need {
        t *= 2.0;
    }
    t
}

/// Quadrature nodes and weights on [0, T]: [0, 1] then dyadic panels.
fn t_rule(p: usize, t_tail: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(p);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while lo < t_tail {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(half * wi);
        }
        lo = hi;
        hi *= 2.0;
    }
    (nodes, weights)
}

/// G at every orbit representative in `reps` using order-`p` panels.
pub fn green_bessel_many(reps: &[[u32; 3]], p: usize) -> Vec<f64> {
    let n_max = reps.iter().flat_map(|r| r.iter().copied()).max().unwrap_or(0);
    let t_tail = tail_start(n_max);
    let (nodes, weights) = t_rule(p, t_tail);
    let orders: Vec<u32> = (0..=n_max).collect();
    let mut out: Vec<f64> = reps.iter().map(|&r| tail_integral(r, t_tail)).collect();
    for (t, w) in nodes.iter().zip(&weights) {
        let ib = scaled_bessel(t / 3.0, &orders);
        for (o, r) in out.iter_mut().zip(reps) {
            *o += w * ib[r[0] as usize] * ib[r[1] as usize] * ib[r[2] as usize];
        }
    }
    out
}

/// Evaluates `reps` at increasing Gauss–Legendre order until the last two
/// agree to `tol` everywhere. Returns the values and the achieved difference.
pub fn green_bessel_converged(reps: &[[u32; 3]], tol: f64) -> Result<(Vec<f64>, f64)> {
    if !(tol > 0.0) {
        return Err(CapError::domain(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let mut prev = green_bessel_many(reps, ORDERS[0]);
    let mut worst = (f64::INFINITY, 0usize, 0.0, 0.0);
    for &p in &ORDERS[1..] {
        let cur = green_bessel_many(reps, p);
        worst = (0.0, 0, 0.0, 0.0);
        for (i, (a, b)) in cur.iter().zip(&prev).enumerate() {
            let d = (a - b).abs();
            if d >= worst.0 {
                worst = (d, i, *b, *a);
            }
        }
        if worst.0 < tol {
            return Ok((cur, worst.0));
        }
        prev = cur;
    }
    let [a, b, c] = reps[worst.1];
    Err(CapError::numeric(
        format!("quadrature did not reach tol {tol:e}; worst point ({a}, {b}, {c})"),
        vec![worst.2, worst.3],
    ))
}

/// G(x) by quadrature to estimated absolute error `tol`.
///
/// The value depends only on the orbit of x, so symmetric images return
/// bit-identical results.
pub fn green_quadrature(x: &LatticePoint, tol: f64) -> Result<f64> {
    let rep = x.orbit_rep();
    if rep[0] > MAX_COORD {
        return Err(CapError::domain(format!(
            "quadrature supports ‖x‖∞ ≤ {MAX_COORD}; use the far-field expansion beyond"
        )));
    }
    Ok(green_bessel_converged(&[rep], tol)?.0[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((m14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn scaled_bessel_reference_values() {
        // e^{-z} I_n(z) from standard tables
        let v = scaled_bessel(1.0, &[0, 1, 5]);
        assert!((v[0] - 0.465_759_607_593_640_4).abs() < 1e-15);
        assert!((v[1] - 0.207_910_415_349_708_4).abs() < 1e-15);
        assert!((v[2] - 0.000_099_865_714_112_086_91).abs() < 1e-15);
        let big = scaled_bessel(5000.0, &[0, 3]);
        let asym = |n: f64, z: f64| {
            let mu = 4.0 * n * n;
            (1.0 - (mu - 1.0) / (8.0 * z) + (mu - 1.0) * (mu - 9.0) / (2.0 * (8.0 * z).powi(2)))
                / (2.0 * std::f64::consts::PI * z).sqrt()
        };
        assert!((big[0] - asym(0.0, 5000.0)).abs() < 1e-12);
        assert!((big[1] - asym(3.0, 5000.0)).abs() < 1e-12);
    }

    #[test]
    fn bessel_sum_rule() {
        // Σ_n Ĩ_n(z) over all integers n is 1
        let z = 7.5;
        let orders: Vec<u32> = (0..80).collect();
        let v = scaled_bessel(z, &orders);
        let s = v[0] + 2.0 * v[1..].iter().sum::<f64>();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn matches_reference_values() {
        for (p, g) in [
            ((0, 0, 0), 1.516_386_059_151_98),
            ((1, 0, 0), 0.516_386_059_151_977),
            ((1, 1, 1), 0.261_470_126_386_352),
            ((3, 3, 3), 0.091_315_853_030_837_8),
            ((10, 4, 3), 0.042_718_070_674_687_8),
        ] {
            let v = green_quadrature(&LatticePoint::new(p.0, p.1, p.2), 1e-11).unwrap();
            assert!((v - g).abs() < 1e-12, "{p:?}: {v} vs {g}");
        }
    }

    #[test]
    fn agrees_with_fourier_cubature_at_range() {
        let x = LatticePoint::new(12, 7, 2);
        let a = green_quadrature(&x, 1e-10).unwrap();
        let b = super::super::fourier::green_fourier(&x, 1e-7).unwrap();
        assert!((a - b).abs() < 1e-7);
    }

    #[test]
    fn symmetric_images_are_identical() {
        let a = green_quadrature(&LatticePoint::new(2, 1, 0), 1e-7).unwrap();
        let b = green_quadrature(&LatticePoint::new(1, 2, 0), 1e-7).unwrap();
        let c = green_quadrature(&LatticePoint::new(0, -1, -2), 1e-7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn errors() {
        assert!(matches!(green_quadrature(&LatticePoint::ORIGIN, 0.0), Err(CapError::Domain(_))));
        assert!(matches!(
            green_quadrature(&LatticePoint::ORIGIN, 1e-40),
            Err(CapError::Numeric { ref detail, .. }) if detail.len() == 2
        ));
        assert!(green_quadrature(&LatticePoint::new(5000, 0, 0), 1e-7).is_err());
    }
}
