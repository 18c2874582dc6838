use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v1sal_core::v1dyn::{
    build_kernels, conspicuity, simulate, simulate_channel, simulate_observed, Integrator, KernelRules,
    LatticeBoundary, LatticeParams, PsiProfile,
};
use v1sal_core::wavelet::{decompose, split_on_off};
use v1sal_core::{Boundary, Plane};

fn gx(x: f64) -> f64 {
    (x - 1.0).clamp(0.0, 1.0)
}

fn gy(y: f64) -> f64 {
    0.21 * y.clamp(0.0, 1.2) + 2.5 * (y - 1.2).max(0.0)
}

/// One isolated excitatory/inhibitory pair, integrated with classic RK4.
fn reference_pair(input: f64, dt: f64, steps: usize) -> Vec<(f64, f64)> {
    let f = |x: f64, y: f64| (-x - gy(y) + 0.8 * gx(x) + input + 0.85, -y + gx(x) + 1.0);
    let (mut x, mut y) = (0.0, 0.0);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let k1 = f(x, y);
        let k2 = f(x + 0.5 * dt * k1.0, y + 0.5 * dt * k1.1);
        let k3 = f(x + 0.5 * dt * k2.0, y + 0.5 * dt * k2.1);
        let k4 = f(x + dt * k3.0, y + dt * k3.1);
        x += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        y += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        out.push((x, y));
    }
    out
}

fn lattice_pair(input: f64, integrator: Integrator) -> Vec<(f64, f64)> {
    let kernels = build_kernels(1, &[1.0], &KernelRules::default());
    let params = LatticeParams {
        ic_noise: 0.0,
        input_gain: 1.0,
        integrator,
        psi: PsiProfile {
            orientation_neighbor: 0.0,
            orthogonal: 0.0,
            scale_neighbor: 0.0,
        },
        ..LatticeParams::default()
    };
    let planes = vec![Plane::filled(1, 1, input), Plane::new(1, 1), Plane::new(1, 1)];
    let mut out = Vec::new();
    simulate_observed(&planes, &kernels, &params, &mut |s, _| out.push((s.x[0], s.y[0]))).unwrap();
    out
}

fn worst_error(integrator: Integrator) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..=30 {
        let input = k as f64 * 0.1;
        let coarse = lattice_pair(input, integrator);
        assert_eq!(coarse.len(), 100);
        let fine = reference_pair(input, 0.01, 1000);
        for (i, &(x, y)) in coarse.iter().enumerate() {
            let (rx, ry) = fine[10 * i + 9];
            worst = worst.max((x - rx).abs()).max((y - ry).abs());
        }
    }
    worst
}

#[test]
fn single_pair_matches_a_finer_reference() {
    let rk4 = worst_error(Integrator::Rk4);
    assert!(rk4 < 1e-3, "RK4 error {rk4:e}");
    // Forward Euler at the same step misses the bound by two orders.
    let euler = worst_error(Integrator::Euler);
    assert!(euler > 1e-2, "Euler error {euler:e}");
}

fn random_input(rng: &mut ChaCha8Rng, w: usize, h: usize, planes: usize, lo: f64) -> Vec<Plane> {
    (0..planes)
        .map(|_| Plane::from_fn(w, h, |_, _| rng.random_range(lo..=1.0)))
        .collect()
}

#[test]
fn rates_stay_bounded_over_a_long_run() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let kernels = build_kernels(3, &[1.0, 0.5], &KernelRules::default());
    let params = LatticeParams {
        t_total: 100.0,
        ..LatticeParams::default()
    };
    let input = random_input(&mut rng, 20, 20, 9, 0.0);
    let cap = params.activation_x.max_rate();
    let mut steps = 0;
    let mut fired = false;
    simulate_observed(&input, &kernels, &params, &mut |s, g| {
        steps += 1;
        assert!(g.iter().all(|v| (0.0..=cap).contains(v)));
        assert!(s.x.iter().chain(&s.y).all(|v| v.is_finite() && v.abs() < 100.0));
        fired |= g.iter().any(|&v| v > 0.0);
    })
    .unwrap();
    assert_eq!(steps, 1000);
    assert!(fired);
}

#[test]
fn opposite_polarity_gives_identical_conspicuity() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let plane = Plane::from_fn(24, 20, |_, _| rng.random_range(-1.0..=1.0));
    let kernels = build_kernels(3, &[1.0, 0.5], &KernelRules::default());
    let params = LatticeParams::default();
    let run = |p: &Plane| {
        let pyr = decompose(p, Boundary::Mirror).unwrap();
        let (on, off) = (
            pyr.map_bands(|b| split_on_off(b).0),
            pyr.map_bands(|b| split_on_off(b).1),
        );
        conspicuity(&simulate_channel(&on, &off, &kernels, &params).unwrap())
    };
    let a = run(&plane);
    let b = run(&plane.map(|v| -v));
    assert_eq!(a, b);
    assert!(a.iter().any(|p| p.max() > 0.0));
}

#[test]
fn periodic_lattice_is_translation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let kernels = build_kernels(2, &[1.0, 0.5], &KernelRules::default());
    let params = LatticeParams {
        ic_noise: 0.0,
        boundary: LatticeBoundary::Periodic,
        ..LatticeParams::default()
    };
    let input = random_input(&mut rng, 24, 20, 6, -1.0);
    let out = simulate(&input, &kernels, &params).unwrap();
    assert!(out.iter().any(|p| p.max() > 0.0));
    for (dx, dy) in [(5, 3), (-7, 11), (23, -19)] {
        let moved: Vec<Plane> = input.iter().map(|p| p.roll(dx, dy)).collect();
        let shifted = simulate(&moved, &kernels, &params).unwrap();
        for (a, b) in shifted.iter().zip(&out) {
            let expect = b.roll(dx, dy);
            for (u, v) in a.as_slice().iter().zip(expect.as_slice()) {
                assert!((u - v).abs() < 1e-9, "shift ({dx}, {dy}): {u} vs {v}");
            }
        }
    }
}

/// Relative L2 change of the conspicuity planes when the averaging window
/// doubles from 2.5 to 5 units, for a run of `t_total` units.
fn window_sensitivity(t_total: f64) -> f64 {
    // A field of vertical bars with one horizontal bar.
    let plane = Plane::from_fn(40, 40, |x, y| {
        let (cx, cy) = (x % 8, y % 8);
        let singleton = x / 8 == 2 && y / 8 == 2;
        let on = if singleton {
            (2..6).contains(&cx) && cy == 4
        } else {
            cx == 4 && (2..6).contains(&cy)
        };
        if on {
            1.0
        } else {
            0.0
        }
    });
    let pyr = decompose(&plane, Boundary::Mirror).unwrap();
    let kernels = build_kernels(pyr.num_scales(), &[1.0, 0.5], &KernelRules::default());
    let (on, off) = (
        pyr.map_bands(|b| split_on_off(b).0),
        pyr.map_bands(|b| split_on_off(b).1),
    );
    let run = |window: f64| {
        let params = LatticeParams {
            avg_window: window,
            t_total,
            ..LatticeParams::default()
        };
        conspicuity(&simulate_channel(&on, &off, &kernels, &params).unwrap())
    };
    let (a, b) = (run(2.5), run(5.0));
    let (mut diff, mut norm) = (0.0, 0.0);
    for (p, q) in a.iter().zip(&b) {
        for (u, v) in p.as_slice().iter().zip(q.as_slice()) {
            diff += (u - v) * (u - v);
            norm += u * u;
        }
    }
    (diff / norm).sqrt()
}

#[test]
fn temporal_mean_is_stable_once_the_transient_has_passed() {
    let settled = window_sensitivity(20.0);
    assert!(settled < 0.05, "relative change {settled}");
    // At the default 10-unit horizon the wider window reaches back into the
    // rise from rest, and the change is larger (about 7%).
    let default_horizon = window_sensitivity(10.0);
    assert!(default_horizon > settled);
}
