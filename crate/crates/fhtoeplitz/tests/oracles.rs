use fhtoeplitz::asymptotics::{density_weight, linearized_density_weight, thm11_constants};
use fhtoeplitz::stats::{determinant_study, Target};
use fhtoeplitz::symbol::{Singularity, SymbolSpec};
use fhtoeplitz::toeplitz::{logdet, Method};
use fhtoeplitz::trig::{equilibrium_density, TrigPolynomial};
use statrs::function::gamma::ln_gamma;

/// Exact D_n for |z − 1|^α ω_β at t_0 = 1 alone:
/// Π_{k=1}^{n} Γ(k)Γ(k+α) / (Γ(k+α/2+β)Γ(k+α/2−β)).
fn single_singularity_logdet(alpha: f64, beta: f64, n: usize) -> f64 {
    (1..=n)
        .map(|k| {
            let k = k as f64;
            ln_gamma(k) + ln_gamma(k + alpha) - ln_gamma(k + alpha / 2.0 + beta) - ln_gamma(k + alpha / 2.0 - beta)
        })
        .sum()
}

#[test]
fn single_singularity_gamma_product() {
    for alpha in [0.5, 1.0, 1.7] {
        for beta in [0.0, 0.2, -0.3] {
            let spec =
                SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::real(0.0, alpha, beta)], 1)
                    .unwrap();
            for n in [1, 2, 5, 16, 64] {
                let got = logdet(&spec.with_n(n), Method::Auto).unwrap().value();
                let want = single_singularity_logdet(alpha, beta, n);
                assert!(
                    (got.re - want).abs() < 1e-10 * want.abs().max(1.0) && got.im.abs() < 1e-10,
                    "alpha={alpha} beta={beta} n={n}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn rotated_singularity_has_same_modulus() {
    // rotating t_k multiplies f_k by a phase and leaves D_n unchanged
    let a = SymbolSpec::new(TrigPolynomial::zero(), TrigPolynomial::zero(), vec![Singularity::real(0.0, 0.8, 0.15)], 24).unwrap();
    let b = SymbolSpec::new(
        TrigPolynomial::zero(),
        TrigPolynomial::zero(),
        vec![Singularity::real(0.0, 0.0, 0.0), Singularity::real(2.5, 0.8, 0.15)],
        24,
    )
    .unwrap();
    let x = logdet(&a, Method::Auto).unwrap().value();
    let y = logdet(&b, Method::Auto).unwrap().value();
    assert!((x.re - y.re).abs() < 1e-10, "{x} {y}");
}

#[test]
fn density_weight_closes_the_gap_with_a_potential() {
    let v = TrigPolynomial::cosine(0.25);
    let sing = Singularity::real(0.0, 0.0, 0.1);
    let spec = SymbolSpec::new(v.clone(), TrigPolynomial::zero(), vec![sing.clone()], 64).unwrap();
    let study = determinant_study(&spec, &[64, 128], Target::Thm11).unwrap();
    let (d64, d128) = (study.rows[0].abs_diff, study.rows[1].abs_diff);
    assert!(d128 < 1e-6, "{d128}");
    assert!((3.0..5.0).contains(&(d64 / d128)), "{d64} {d128}");

    // freezing the weight at s = 1 leaves a constant offset
    let psi = equilibrium_density(&v).at(0.0);
    let offset = (sing.beta * sing.beta).re * (linearized_density_weight(psi) - density_weight(psi));
    assert!(offset.abs() > 1e-3);
    let lin: Vec<f64> = study.rows.iter().map(|r| (r.exact.re - r.predicted.re - offset).abs()).collect();
    assert!((lin[0] - lin[1]).abs() < 1e-6 && lin[1] > 1e-3, "{lin:?}");
}

#[test]
fn density_weight_limits() {
    let flat = 1.0 / (2.0 * std::f64::consts::PI);
    assert_eq!(density_weight(flat), 0.0);
    assert!(linearized_density_weight(flat).abs() < 1e-15);
    for eps in [1e-3, -1e-3] {
        let psi = flat * (1.0 + eps);
        let (a, b) = (density_weight(psi), linearized_density_weight(psi));
        assert!((a - b).abs() < eps * eps, "{a} {b}");
    }
}

#[test]
fn full_constants_for_a_potential_alone() {
    // with W = 0 and no singularities only C1 n² survives
    let g = 0.2;
    let spec = SymbolSpec::smooth(TrigPolynomial::cosine(g), TrigPolynomial::zero(), 32).unwrap();
    let e = thm11_constants(&spec).unwrap();
    assert!((e.constants[0].re - g * g).abs() < 1e-15);
    let exact = logdet(&spec, Method::Auto).unwrap().value();
    assert!((exact - e.predict(32.0)).norm() < 1e-9, "{exact}");
}
