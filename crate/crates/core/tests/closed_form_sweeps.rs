use kthstop_core::analysis::{threshold_invariants, Report};
use kthstop_core::{k3_thresholds, p1, p2, p3, r_threshold, to_f64, K3Thresholds};

#[test]
fn thresholds_are_well_ordered_up_to_2000() {
    for n in (3..=2000).step_by(37).chain([2000]) {
        let t = k3_thresholds(n).unwrap();
        assert!(2 <= t.a && t.a < t.b && t.b <= n, "n={n}: {t:?}");
    }
}

#[test]
fn threshold_invariants_hold_up_to_600() {
    let r = threshold_invariants(3, 600).unwrap();
    assert!(r.passed());
    assert_eq!(r.rows.len(), 598);
}

#[test]
fn probabilities_decrease_towards_limits() {
    let mut prev = (1.0, 1.0, 1.0);
    for n in [8usize, 20, 50, 100, 300, 1000, 2000] {
        let cur = (to_f64(&p1(n).unwrap()), to_f64(&p2(n).unwrap()), to_f64(&p3(n).unwrap()));
        assert!(cur.0 <= prev.0 && cur.1 <= prev.1 && cur.2 <= prev.2, "n={n}");
        prev = cur;
    }
    assert!(prev.0 > (-1.0f64).exp());
    assert!(prev.1 >= 0.25);
}

#[test]
fn cached_and_fresh_thresholds_agree() {
    for n in [3, 13, 32, 257, 1500] {
        assert_eq!(*k3_thresholds(n).unwrap(), K3Thresholds::compute(n).unwrap());
    }
    assert_eq!(r_threshold(100).unwrap(), 38);
}
