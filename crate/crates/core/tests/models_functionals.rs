use approx::assert_abs_diff_eq;
use cltlab::functionals::{moment_report, psi1_norm};
use cltlab::models::{isotropy_audit, sample_vector};
use cltlab::{make_model, RandomStream};

/// Second smallest eigenvalue of −(p u′)′ = λ p u with Neumann ends on a
/// uniform grid of [a, b], via Sturm bisection on the symmetrized tridiagonal.
fn neumann_gap(p: impl Fn(f64) -> f64, a: f64, b: f64, cells: usize) -> f64 {
    let h = (b - a) / cells as f64;
    let m: Vec<f64> = (0..cells).map(|i| p(a + (i as f64 + 0.5) * h) * h).collect();
    let k: Vec<f64> = (1..cells).map(|i| p(a + i as f64 * h) / h).collect();
    let mut diag = vec![0.0; cells];
    for (i, &ki) in k.iter().enumerate() {
        diag[i] += ki;
        diag[i + 1] += ki;
    }
    let d: Vec<f64> = (0..cells).map(|i| diag[i] / m[i]).collect();
    let e: Vec<f64> = (0..cells - 1).map(|i| -k[i] / (m[i] * m[i + 1]).sqrt()).collect();
    let count_below = |x: f64| {
        let mut c = 0;
        let mut q = d[0] - x;
        if q < 0.0 {
            c += 1;
        }
        for i in 1..cells {
            let prev = if q == 0.0 { 1e-300 } else { q };
            q = d[i] - x - e[i - 1] * e[i - 1] / prev;
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    let (mut lo, mut hi) = (1e-12, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) >= 2 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn poincare_constants_match_sturm_liouville() {
    let a = 3f64.sqrt();
    let unif = neumann_gap(|_| 1.0, -a, a, 2000);
    let m = make_model("uniform_product", 4).unwrap();
    assert_abs_diff_eq!(unif, m.lambda1.unwrap(), epsilon = 1e-4);
    // Exponential law: the gap is the bottom 1/4 of the continuous spectrum,
    // approached from above on a truncated interval.
    let exp = neumann_gap(|x| (-x).exp(), 0.0, 200.0, 4000);
    let m = make_model("centered_exp", 4).unwrap();
    assert!(exp >= m.lambda1.unwrap() - 1e-3 && exp - m.lambda1.unwrap() < 5e-3, "{exp}");
    let gauss = neumann_gap(|x| (-0.5 * x * x).exp(), -10.0, 10.0, 4000);
    assert_abs_diff_eq!(gauss, make_model("gaussian", 4).unwrap().lambda1.unwrap(), epsilon = 1e-3);
}

/// E⟨X,Y⟩⁴ for standard Gaussian X, Y by summing Isserlis pairings.
fn isserlis_inner_fourth(n: usize) -> f64 {
    let d = |i: usize, j: usize| f64::from(u8::from(i == j));
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let e = d(i, j) * d(k, l) + d(i, k) * d(j, l) + d(i, l) * d(j, k);
                    total += e * e;
                }
            }
        }
    }
    total
}

#[test]
fn gaussian_moment_report() {
    let n = 4;
    let exact = isserlis_inner_fourth(n);
    assert_eq!(exact, (3 * n * n + 6 * n) as f64);
    let m = make_model("gaussian", n).unwrap();
    let r = moment_report(&m, 400_000, 20, &RandomStream::new(21, 0)).unwrap();
    let w = r.m4_hat.powi(4) * (n * n) as f64;
    let w_se = 4.0 * r.m4_hat.powi(3) * r.std_errors.m4 * (n * n) as f64;
    assert!((w - exact).abs() <= 3.0 * w_se, "{w} vs {exact} ± {w_se}");
    assert!((r.sigma4_sq_hat - 2.0).abs() <= 3.0 * r.std_errors.sigma4_sq);
    assert!((r.beta4_bar_hat - 3.0).abs() <= 3.0 * r.std_errors.beta4_bar);
    assert!(r.m4_hat <= r.big_m4_hat.powi(2) + 4.0 * r.std_errors.m4);
    let joint = (r.std_errors.sigma4_sq.powi(2) + r.std_errors.lambda_cap.powi(2)).sqrt();
    assert!(r.sigma4_sq_hat <= r.lambda_cap_hat + 4.0 * joint);
}

#[test]
fn sigma4_below_lambda_everywhere() {
    for (k, name) in ["rademacher", "uniform_product", "centered_exp", "sphere_shell"].iter().enumerate() {
        let m = make_model(name, 5).unwrap();
        let r = moment_report(&m, 100_000, 10, &RandomStream::new(22, k as u64)).unwrap();
        let joint = (r.std_errors.sigma4_sq.powi(2) + r.std_errors.lambda_cap.powi(2)).sqrt();
        assert!(r.sigma4_sq_hat <= r.lambda_cap_hat + 4.0 * joint, "{name}");
        assert!(r.lambda_cap_hat + 4.0 * r.std_errors.lambda_cap >= 0.8, "{name}");
    }
}

#[test]
fn psi1_of_exponential() {
    // E e^{E/λ} = λ/(λ − 1) = 2 gives λ = 2 for E ~ Exp(1).
    let values: Vec<f64> = [31u64, 32]
        .iter()
        .map(|&seed| {
            let mut s = RandomStream::new(seed, 0);
            let v: Vec<f64> = (0..100_000).map(|_| -s.uniform_open_low().ln()).collect();
            psi1_norm(&v).unwrap()
        })
        .collect();
    for v in &values {
        assert!((v / 2.0 - 1.0).abs() < 0.05, "{v}");
    }
    assert!((values[0] / values[1] - 1.0).abs() < 0.05);
}

#[test]
fn all_models_pass_isotropy() {
    for (k, name) in ["gaussian", "rademacher", "uniform_product", "centered_exp", "sphere_shell"].iter().enumerate() {
        let m = make_model(name, 8).unwrap();
        let r = isotropy_audit(&m, 200_000, &RandomStream::new(23, k as u64)).unwrap();
        assert!(r.pass, "{name}: {r:?}");
    }
}

#[test]
fn sampled_vectors_have_model_dimension() {
    let m = make_model("centered_exp", 9).unwrap();
    let x = sample_vector(&m, &mut RandomStream::new(1, 1));
    assert_eq!(x.len(), 9);
    assert!(x.iter().all(|v| *v >= -1.0));
}

#[test]
fn audit_detects_scaled_coordinate() {
    let m = make_model("gaussian", 6).unwrap();
    let r = cltlab::models::isotropy_audit_with(6, 20_000, &RandomStream::new(24, 0), |s, out| {
        cltlab::models::sample_vector_into(&m, s, out);
        out[0] *= 1.5;
    })
    .unwrap();
    assert!(!r.pass);
    let shell = isotropy_audit(&make_model("sphere_shell", 16).unwrap(), 10_000, &RandomStream::new(25, 0)).unwrap();
    assert!(shell.norm_deviation < 1e-9);
}

#[test]
fn centered_exp_coordinate_moments() {
    let m = make_model("centered_exp", 16).unwrap();
    let mut s = RandomStream::new(26, 0);
    let mut sum = [0.0f64; 16];
    let mut sq = [0.0f64; 16];
    let draws = 1_000_000;
    for _ in 0..draws {
        for (k, v) in sample_vector(&m, &mut s).into_iter().enumerate() {
            sum[k] += v;
            sq[k] += v * v;
        }
    }
    for k in 0..16 {
        let mean = sum[k] / draws as f64;
        let var = sq[k] / draws as f64 - mean * mean;
        assert!(mean.abs() < 3e-3 && (var - 1.0).abs() < 0.01, "{k}: {mean} {var}");
    }
}

#[test]
fn monte_carlo_cf_matches_products() {
    use cltlab::charfn::{weighted_sum_cf_exact, weighted_sum_cf_mc};
    for (k, name) in ["gaussian", "rademacher", "uniform_product", "centered_exp"].iter().enumerate() {
        let m = make_model(name, 5).unwrap();
        let theta = cltlab::sphere::sample_direction(5, &mut RandomStream::new(27, k as u64)).unwrap();
        for t in [0.5, 1.5, 3.0] {
            let exact = weighted_sum_cf_exact(&m, &theta, t).unwrap();
            let (mc, se) = weighted_sum_cf_mc(&m, &theta, t, 100_000, &RandomStream::new(28, k as u64)).unwrap();
            assert!((mc - exact).norm() <= 4.0 * se, "{name} t={t}");
        }
    }
}
