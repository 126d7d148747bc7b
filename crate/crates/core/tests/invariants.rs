use illposed_core::discretize::{assemble, galerkin_gram, galerkin_gram_f64, right_gram, Scheme};
use illposed_core::figures::minimum_precision;
use illposed_core::numerics::{working_epsilon, BigFloat, BigRational};
use illposed_core::operators::CompositionSpec;
use illposed_core::spectra::eigen_sym;
use proptest::prelude::*;

fn op(name: &str) -> CompositionSpec {
    name.parse().unwrap()
}

proptest! {
    #[test]
    fn rational_sums_round_trip(a in -1_000_000i64..1_000_000, b in 1i64..1_000_000, c in -1_000_000i64..1_000_000, d in 1i64..1_000_000) {
        let x = BigRational::from((a, b));
        let y = BigRational::from((c, d));
        let back = BigRational::from(&x + &y) - &y;
        prop_assert_eq!(back, x);
    }
}

#[test]
fn galerkin_integration_matches_classical_singular_values() {
    let s = eigen_sym(&galerkin_gram_f64(&op("J"), 2048).unwrap(), 53).unwrap();
    for i in 1..=20 {
        let exact = 1.0 / ((i as f64 - 0.5) * std::f64::consts::PI);
        let rel = (s.sigma(i).to_f64() - exact).abs() / exact;
        assert!(rel < 0.01, "i = {i}: relative deviation {rel}");
    }
}

#[test]
fn galerkin_refinement_interlaces() {
    for name in ["J", "CJ", "J2", "MJ"] {
        for n in [4usize, 8, 16] {
            let coarse = eigen_sym(&galerkin_gram(&op(name), n, 256).unwrap(), 256).unwrap();
            let fine = eigen_sym(&galerkin_gram(&op(name), 2 * n, 256).unwrap(), 256).unwrap();
            let tol = BigFloat::with_val(256, 1u32) >> 224u32;
            for i in 1..=n {
                let gap = BigFloat::with_val(256, coarse.sigma(i) - fine.sigma(i));
                assert!(gap <= tol, "{name} {n} -> {}: index {i}", 2 * n);
            }
        }
    }
}

#[test]
fn midpoint_refinement_need_not_interlace() {
    // midpoints of the N grid are not points of the 2N grid
    let coarse = eigen_sym(&right_gram(&op("HaJ"), 10, &working_epsilon(256)).unwrap(), 256).unwrap();
    let fine = eigen_sym(&right_gram(&op("HaJ"), 20, &working_epsilon(256)).unwrap(), 256).unwrap();
    assert!((1..=10).any(|i| coarse.sigma(i) > fine.sigma(i)));
}

#[test]
fn doubling_precision_changes_trusted_values_little() {
    let cases = [("DHa", Scheme::LeftSection), ("HaJ", Scheme::LeftSection), ("DHa", Scheme::RightMidpoint), ("HaJ", Scheme::RightMidpoint), ("CJ", Scheme::Galerkin)];
    for (name, scheme) in cases {
        for n in [5usize, 10, 15, 20] {
            for p in [128u32, 256, 512] {
                if p < minimum_precision(n) {
                    continue;
                }
                let lo = eigen_sym(&assemble(&op(name), scheme, n, p, &working_epsilon(p)).unwrap(), p).unwrap();
                let hi = eigen_sym(&assemble(&op(name), scheme, n, 2 * p, &working_epsilon(2 * p)).unwrap(), 2 * p).unwrap();
                let allowed = BigFloat::with_val(2 * p, 1u32) >> (p / 2);
                for i in 1..=lo.trust_cutoff {
                    let rel = BigFloat::with_val(2 * p, lo.sigma(i) - hi.sigma(i)).abs() / hi.sigma(i);
                    assert!(rel <= allowed, "{name} {} N={n} p={p} i={i}: {:e}", scheme.short_name(), rel.to_f64());
                }
            }
        }
    }
}

#[test]
fn figure_spectra_respect_fitted_upper_curve_and_dha_lower_curve() {
    use illposed_core::analysis::{check_bound, BoundSpec};
    use illposed_core::figures::figure_spectrum;
    for scheme in [Scheme::LeftSection, Scheme::RightMidpoint] {
        for n in [5usize, 10, 15, 20] {
            for name in ["HaJ", "DHa"] {
                let s = figure_spectrum(name, scheme, n, 512).unwrap();
                let s1 = s.sigma(1).to_f64();
                let up = check_bound(&s, &BoundSpec::three_halves_upper().fitted_at(1, s1));
                assert!(up.consistent, "{name} {} N={n}: {:?}", scheme.short_name(), up.violations);
                if name == "DHa" {
                    let low = check_bound(&s, &BoundSpec::exp_over_index_lower().fitted_at(1, s1));
                    assert!(low.consistent, "{} N={n}: {:?}", scheme.short_name(), low.violations);
                }
            }
        }
    }
}

#[test]
fn integration_exponent_proxy_over_window() {
    use illposed_core::analysis::{fit_decay, DecayModel};
    let s = eigen_sym(&galerkin_gram_f64(&op("J"), 2048).unwrap(), 53).unwrap();
    let f = fit_decay(&s, DecayModel::Power, (8, 64)).unwrap();
    let (lo, hi) = f.exponent_range.unwrap();
    assert!(lo >= 0.9 && hi <= 1.1, "pointwise exponents span [{lo:.4}, {hi:.4}], fitted kappa {:.4}", f.rate);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fits_recover_synthetic_parameters(c in 0.01f64..100.0, rate in 0.2f64..3.0, exponential in any::<bool>()) {
        use illposed_core::analysis::{fit_decay, DecayModel};
        use illposed_core::spectra::{Spectrum, SpectrumSource};
        let f = |i: f64| if exponential { c * (-rate * i).exp() } else { c * i.powf(-rate) };
        let values = (1..=30).map(|i| BigFloat::with_val(256, f(i as f64))).collect();
        let src = SpectrumSource { operator: "synthetic".into(), scheme: "none".into(), n: 30, gram_precision: "exact".into() };
        let s = Spectrum::from_singular_values(values, 256, src);
        let model = if exponential { DecayModel::Exponential } else { DecayModel::Power };
        let fit = fit_decay(&s, model, (3, 30)).unwrap();
        prop_assert!((fit.rate - rate).abs() <= 1e-10 * rate);
        prop_assert!((fit.c - c).abs() <= 1e-10 * c);
        prop_assert!(fit.residual_log10 < 1e-10);
    }

    #[test]
    fn diagonal_operators_give_signed_coordinate_vectors(exps in proptest::collection::btree_set(1u32..60, 1..8)) {
        use illposed_core::linalg::FloatMatrix;
        use illposed_core::ncnc::{build_compact_restriction, Selection};
        let prec = 256;
        let d: Vec<BigFloat> = exps.iter().rev().map(|e| BigFloat::with_val(prec, 1u32) >> *e).collect();
        let t = FloatMatrix::diagonal(&d, prec);
        let trace = build_compact_restriction(&t, d.len(), prec, Selection::Frugal).unwrap();
        for k in 0..trace.depth() {
            let col = trace.vectors.column(k);
            let big = col.iter().filter(|x| (x.to_f64().abs() - 1.0).abs() < 1e-60).count();
            let small = col.iter().filter(|x| x.to_f64().abs() < 1e-60).count();
            prop_assert_eq!((big, small), (1, col.len() - 1));
            prop_assert!(trace.residuals[k] <= BigFloat::with_val(prec, 1u32) >> (k as u32 + 1));
        }
        for inc in &trace.increments {
            prop_assert!(inc.delta <= inc.residual_sum * (1.0 + 1e-12));
            prop_assert!(inc.residual_sum <= 2f64.powi(-(inc.n as i32)) * (1.0 + 1e-12));
        }
    }
}
