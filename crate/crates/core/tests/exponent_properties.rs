use proptest::prelude::*;
use sle_rho::exponents::*;

const TOL: f64 = 1e-9;
const K83: f64 = 8.0 / 3.0;

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(1000)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + b.abs())
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn bar_alpha_inverts_bar_rho(kappa in 0.2f64..10.0, t in 0.0f64..1.0) {
        // the inverse holds on the branch ρ ≥ κ/2 − 2
        let lo = (kappa / 2.0 - 2.0).max(-2.0 + 1e-6);
        let rho = lo + t * 12.0;
        let alpha = bar_alpha(kappa, rho).unwrap();
        prop_assert!(near(bar_rho(kappa, 0.0, alpha).unwrap(), rho));
    }

    #[test]
    fn bar_rho_is_additive(kappa in 0.2f64..10.0, rho in -1.99f64..8.0, a1 in 0.0f64..4.0, a2 in 0.0f64..4.0) {
        let chained = bar_rho(kappa, bar_rho(kappa, rho, a1).unwrap(), a2).unwrap();
        prop_assert!(near(chained, bar_rho(kappa, rho, a1 + a2).unwrap()));
    }

    #[test]
    fn sigma_is_rho_gap_over_kappa(kappa in 0.2f64..10.0, rho in -1.99f64..8.0, alpha in 0.0f64..4.0) {
        let s = bar_sigma(kappa, rho, alpha).unwrap();
        let r = bar_rho(kappa, rho, alpha).unwrap();
        prop_assert!(near(s, (r - rho) / kappa));
    }

    #[test]
    fn sigma_solves_the_index_quadratic(kappa in 0.2f64..10.0, rho in -1.99f64..8.0, alpha in 0.0f64..4.0) {
        // μ = ν + σ satisfies μ² − ν² = 4α/κ
        let nu = (rho + 2.0) / kappa - 0.5;
        let mu = nu + bar_sigma(kappa, rho, alpha).unwrap();
        prop_assert!(mu >= -TOL);
        prop_assert!(near(mu * mu - nu * nu, 4.0 * alpha / kappa));
    }

    #[test]
    fn cascade_matches_closed_form(u in 0.0f64..6.0, alpha in 0.0f64..6.0) {
        prop_assert!(near(cascade_xi(&[u, alpha]).unwrap(), xi_pair(u, alpha).unwrap()));
    }

    #[test]
    fn u_map_round_trips(a in 0.0f64..50.0) {
        prop_assert!(near(u_inverse(u_map(a).unwrap()).unwrap(), a));
    }

    #[test]
    fn iteration_recursion(p in 1u32..=8) {
        let pf = p as f64;
        prop_assert!(near(rho_p(p).unwrap(), 2.0 * (pf - 1.0)));
        prop_assert!(near(eta_p_83(p).unwrap(), pf * (3.0 * pf + 2.0) / 8.0));
        prop_assert!(near(bar_eta(K83, rho_p(p).unwrap()).unwrap(), eta_p_83(p).unwrap()));
        prop_assert!(near(bar_rho(K83, 0.0, eta_p_83(p).unwrap()).unwrap(), rho_p(p + 1).unwrap()));
    }

    #[test]
    fn restriction_duality(rho in (-2.0f64 + 1e-9)..(-2.0 / 3.0)) {
        let dual = dual_rho(K83, rho).unwrap();
        let s = (1.0 + 24.0 * bar_eta(K83, rho).unwrap()).sqrt()
            + (1.0 + 24.0 * bar_eta(K83, dual).unwrap()).sqrt();
        prop_assert!(near(s, 6.0));
        prop_assert!(near(dual_rho(K83, dual).unwrap(), rho));
    }

    #[test]
    fn eta_p_excess_is_mutual_avoidance(kappa in 0.2f64..10.0, p in 1u32..=8) {
        let excess = eta_p_kappa(kappa, p).unwrap() - p as f64 * bar_eta(kappa, 0.0).unwrap();
        prop_assert!(near(excess, mutual_avoid(kappa, p).unwrap()));
    }

    #[test]
    fn mixed_tau_is_symmetric(eta in 0.625f64..10.0, beta in 0.625f64..10.0) {
        prop_assert!(near(mixed_hat_tau(eta, beta).unwrap(), mixed_hat_tau(beta, eta).unwrap()));
    }

    #[test]
    fn bm_hiding_with_no_hidden_paths(m in (1.0f64 / 3.0)..20.0) {
        prop_assert!(near(bm_hiding_real(0.0, m).unwrap(), m));
    }

    #[test]
    fn rho_from_eta_inverts_bar_eta(rho in (-2.0f64 / 3.0)..12.0) {
        prop_assert!(near(rho_from_eta_83(bar_eta(K83, rho).unwrap()).unwrap(), rho));
    }

    #[test]
    fn one_sided_hiding_above_one_third(eta in (1.0f64 / 3.0)..10.0, beta in 0.0f64..5.0) {
        let rho = rho_from_eta_83(eta).unwrap();
        prop_assert!(near(hide_one_sided(eta, beta).unwrap(), bar_sigma(K83, rho, beta).unwrap()));
    }

    #[test]
    fn one_sided_hiding_below_one_third(eta in 0.001f64..(1.0 / 3.0), beta in 0.0f64..5.0) {
        // condition to escape the negative axis, then hide from the dual process
        let rho = rho_from_eta_83(eta).unwrap();
        let composed = escape_exponent(K83, rho).unwrap()
            + bar_sigma(K83, dual_rho(K83, rho).unwrap(), beta).unwrap();
        prop_assert!(near(hide_one_sided(eta, beta).unwrap(), composed));
    }
}

#[test]
fn one_sided_hiding_is_continuous_at_one_third() {
    for beta in [0.0, 0.3, 1.0, 4.0] {
        let lo = hide_one_sided(1.0 / 3.0 - 1e-12, beta).unwrap();
        let hi = hide_one_sided(1.0 / 3.0 + 1e-12, beta).unwrap();
        assert!((lo - hi).abs() < 1e-9);
    }
}
