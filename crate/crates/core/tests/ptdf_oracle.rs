mod support;

use opsim_core::formulations::{compute_ptdf, ptdf_flows};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::ptdf_oracle::{angle_flows, balanced_injections, random_network, sensitivity_identity};

#[test]
fn ptdf_flows_match_angle_formulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..10 {
        let n = rng.gen_range(2..=8);
        let (sys, slack) = random_network(&mut rng, n);
        let ptdf = compute_ptdf(&sys, slack).unwrap();
        assert!(ptdf.iter().all(|r| r[slack] == 0.0), "case {case}: slack column");
        let (dev, row_sum) = sensitivity_identity(&sys, &ptdf);
        assert!(dev <= 1e-9 && row_sum <= 1e-9, "case {case}: {dev} {row_sum}");
        for _ in 0..3 {
            let p = balanced_injections(&mut rng, n, slack);
            let got = ptdf_flows(&ptdf, &p);
            let want = angle_flows(&sys, slack, &p);
            for (l, (a, b)) in got.iter().zip(&want).enumerate() {
                assert!((a - b).abs() <= 1e-9, "case {case} line {l}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn flows_do_not_depend_on_slack_choice() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let n = rng.gen_range(3..=8);
        let (sys, slack) = random_network(&mut rng, n);
        let p = balanced_injections(&mut rng, n, slack);
        let a = ptdf_flows(&compute_ptdf(&sys, slack).unwrap(), &p);
        let b = ptdf_flows(&compute_ptdf(&sys, (slack + 1) % n).unwrap(), &p);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
}
