use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use v1sal_core::metrics::{auc, auc_full, infogain, kl, nss, sauc, spearman, FixationSet};
use v1sal_core::Plane;

/// Exhaustive ROC: one operating point per distinct fixated value, counted by
/// scanning every pixel, framed by (0, 0) and (1, 1).
fn brute_force_auc(sal: &Plane, fixated: &[bool]) -> f64 {
    let s = sal.as_slice();
    let n_pos = fixated.iter().filter(|&&f| f).count() as f64;
    let n_neg = s.len() as f64 - n_pos;
    let mut thresholds: Vec<f64> = s.iter().zip(fixated).filter(|(_, &f)| f).map(|(&v, _)| v).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut points = vec![(0.0, 0.0)];
    for t in thresholds {
        let (mut tp, mut fp) = (0.0, 0.0);
        for (&v, &f) in s.iter().zip(fixated) {
            if v >= t {
                if f {
                    tp += 1.0;
                } else {
                    fp += 1.0;
                }
            }
        }
        points.push((fp / n_neg, tp / n_pos));
    }
    points.push((1.0, 1.0));
    points
        .windows(2)
        .map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0)
        .sum()
}

#[test]
fn auc_matches_exhaustive_roc_on_small_maps() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..10_000 {
        let w = rng.random_range(2..=5);
        let h = rng.random_range(2..=5);
        // Few distinct levels so that ties are common.
        let levels = rng.random_range(1..=6);
        let sal = Plane::from_fn(w, h, |_, _| rng.random_range(0..levels) as f64 * 0.25);
        let count = rng.random_range(1..=3);
        let points: Vec<(f64, f64)> = (0..count)
            .map(|_| (rng.random_range(0.0..w as f64), rng.random_range(0.0..h as f64)))
            .collect();
        let mut fixated = vec![false; w * h];
        for &(x, y) in &points {
            fixated[y.floor() as usize * w + x.floor() as usize] = true;
        }
        if fixated.iter().all(|&f| f) {
            continue;
        }
        let f = FixationSet::new("case", w, h, points).unwrap();
        let got = auc(&sal, &f).unwrap();
        let want = brute_force_auc(&sal, &fixated);
        assert!((got - want).abs() < 1e-12, "case {case}: {got} vs {want}");
    }
}

/// Mann-Whitney statistic with ties counted one half.
fn pairwise(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in pos {
        for &n in neg {
            wins += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

proptest! {
    #[test]
    fn full_auc_is_the_pairwise_win_rate(
        pos in prop::collection::vec(0u8..8, 1..12),
        neg in prop::collection::vec(0u8..8, 1..12),
    ) {
        let pos: Vec<f64> = pos.into_iter().map(f64::from).collect();
        let neg: Vec<f64> = neg.into_iter().map(f64::from).collect();
        prop_assert!((auc_full(&pos, &neg) - pairwise(&pos, &neg)).abs() < 1e-12);
    }

    #[test]
    fn rank_metrics_ignore_monotone_transforms(
        values in prop::collection::vec(-3.0..3.0f64, 36),
        fx in prop::collection::vec((0usize..6, 0usize..6), 1..5),
        scale in 0.1..10.0f64,
        offset in -5.0..5.0f64,
    ) {
        let sal = Plane::from_vec(6, 6, values).unwrap();
        let points: Vec<(f64, f64)> = fx.iter().map(|&(x, y)| (x as f64, y as f64)).collect();
        let f = FixationSet::new("p", 6, 6, points).unwrap();
        let pool_set = FixationSet::new("q", 6, 6, vec![(1.0, 1.0), (4.0, 2.0), (3.0, 5.0)]).unwrap();
        let pool = [&pool_set];

        let cubed = sal.map(|v| v * v * v + v);
        prop_assert!((auc(&sal, &f).unwrap() - auc(&cubed, &f).unwrap()).abs() < 1e-12);
        prop_assert!((sauc(&sal, &f, &pool, 3, 0).unwrap() - sauc(&cubed, &f, &pool, 3, 0).unwrap()).abs() < 1e-12);

        let affine = sal.map(|v| scale * v + offset);
        let (a, b) = (nss(&sal, &f).unwrap(), nss(&affine, &f).unwrap());
        prop_assert!((a.value - b.value).abs() < 1e-9);
    }
}

#[test]
fn nss_on_a_two_by_two_map() {
    let sal = Plane::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let f = FixationSet::new("n", 2, 2, vec![(1.5, 1.2)]).unwrap();
    // mean 2.5, population variance 1.25, fixated value 4.
    let want = 1.5 / 1.25f64.sqrt();
    assert_eq!(nss(&sal, &f).unwrap().value, want);

    let both = FixationSet::new("n", 2, 2, vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
    assert_eq!(nss(&sal, &both).unwrap().value, 0.0);

    let flat = Plane::filled(2, 2, 3.0);
    let scored = nss(&flat, &f).unwrap();
    assert!(scored.degenerate);
}

#[test]
fn kl_on_two_by_two_distributions() {
    const EPS: f64 = 1e-7;
    let sal = Plane::from_vec(2, 2, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let density = Plane::from_vec(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap();
    // After shifting to zero minimum the saliency sums to 6.
    let p = [0.0, 1.0 / 6.0, 2.0 / 6.0, 3.0 / 6.0];
    let want: f64 = p.iter().map(|&pi| 0.25 * (0.25 / (pi + EPS)).ln()).sum();
    assert_eq!(kl(&sal, &density).unwrap(), want);

    let d2 = Plane::from_vec(2, 2, vec![0.0, 0.5, 0.0, 0.5]).unwrap();
    let want = 0.5 * (0.5 / (1.0 / 6.0 + EPS)).ln() + 0.5 * (0.5 / (3.0 / 6.0 + EPS)).ln();
    assert_eq!(kl(&sal, &d2).unwrap(), want);

    let same = Plane::from_vec(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let shifted = same.map(|v| v - 0.1);
    assert!(kl(&same, &shifted).unwrap().abs() < 1e-5);
}

#[test]
fn infogain_against_itself_is_zero() {
    let sal = Plane::from_vec(2, 2, vec![0.5, 1.0, 2.0, 3.0]).unwrap();
    let f = FixationSet::new("g", 2, 2, vec![(1.0, 0.0), (0.0, 1.0)]).unwrap();
    assert_eq!(infogain(&sal, &f, &sal).unwrap(), 0.0);
}

fn centered_fixations(rng: &mut ChaCha8Rng, id: usize, w: usize, h: usize, n: usize) -> FixationSet {
    let nx = Normal::new(w as f64 / 2.0, w as f64 / 8.0).unwrap();
    let ny = Normal::new(h as f64 / 2.0, h as f64 / 8.0).unwrap();
    let points = (0..n)
        .map(|_| {
            (
                nx.sample(rng).clamp(0.0, w as f64 - 1.0),
                ny.sample(rng).clamp(0.0, h as f64 - 1.0),
            )
        })
        .collect();
    FixationSet::new(format!("img{id}"), w, h, points).unwrap()
}

#[test]
fn shuffled_auc_cancels_a_pure_center_bias() {
    let (w, h) = (64, 48);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sets: Vec<FixationSet> = (0..30).map(|i| centered_fixations(&mut rng, i, w, h, 20)).collect();
    let sal = Plane::from_fn(w, h, |x, y| {
        let dx = (x as f64 - w as f64 / 2.0) / (w as f64 / 6.0);
        let dy = (y as f64 - h as f64 / 2.0) / (h as f64 / 6.0);
        (-(dx * dx + dy * dy) / 2.0).exp()
    });
    let (mut a, mut s) = (0.0, 0.0);
    for (i, f) in sets.iter().enumerate() {
        let pool: Vec<&FixationSet> = sets
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p)
            .collect();
        a += auc(&sal, f).unwrap();
        s += sauc(&sal, f, &pool, 10, i as u64).unwrap();
    }
    let (a, s) = (a / sets.len() as f64, s / sets.len() as f64);
    assert!(a > 0.6, "AUC {a}");
    assert!((s - 0.5).abs() < 0.05, "sAUC {s}");
    assert!(s < a);
}

#[test]
fn spearman_examples() {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    assert!((spearman(&x, &[2.0, 4.0, 9.0, 16.0, 100.0]).unwrap() - 1.0).abs() < 1e-12);
    assert!((spearman(&x, &[5.0, 4.0, 3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
}
