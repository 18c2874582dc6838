use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_4, PI};
#[allow(unused_imports)] // unused when std is linked
use num_traits::Float;

use super::geometry::{preferred_angles, KernelGeometry};
use crate::wavelet::Orientation;

/// Gate thresholds for the excitatory `J` and inhibitory `W` connections.
///
/// `J` applies when `0 < d ≤ max_distance` and `β < j_beta_max`, or when
/// `0 < d ≤ max_distance`, `β < j_alt_beta_max` and both `|θ1|, |θ2| <
/// j_alt_theta_max`. `W` is zero when `d = 0`, `d ≥ max_distance`,
/// `β < w_beta_min` (or `β ≥ w_beta_min` with `w_beta_as_printed` off),
/// `|Δθ| ≥ w_dtheta_max` or `|θ1| < w_theta1_min`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct KernelRules {
    pub max_distance: f64,
    pub j_beta_max: f64,
    pub j_alt_beta_max: f64,
    pub j_alt_theta_max: f64,
    pub w_beta_min: f64,
    pub w_beta_as_printed: bool,
    pub w_dtheta_max: f64,
    pub w_theta1_min: f64,
}

impl Default for KernelRules {
    fn default() -> Self {
        Self {
            max_distance: 10.0,
            j_beta_max: PI / 2.69,
            // The published gate repeats π/2.69 in its second disjunct, which
            // makes that disjunct redundant.
            j_alt_beta_max: PI / 2.69,
            j_alt_theta_max: PI / 5.9,
            w_beta_min: PI / 1.1,
            w_beta_as_printed: true,
            w_dtheta_max: PI / 3.0,
            // A bound of π/1.99 can never be met because |θ1| ≤ π/2, which
            // would switch W off entirely; the original lattice model uses
            // π/11.999.
            w_theta1_min: PI / 11.999,
        }
    }
}

impl KernelRules {
    /// Thresholds exactly as typeset, including `|θ1| < π/1.99` (which
    /// removes every inhibitory connection).
    pub fn as_printed() -> Self {
        Self {
            w_theta1_min: PI / 1.99,
            ..Self::default()
        }
    }
}

/// `true` when the excitatory connection applies.
pub fn j_gate(g: &KernelGeometry, r: &KernelRules) -> bool {
    let in_range = g.d > 0.0 && g.d <= r.max_distance;
    (in_range && g.beta < r.j_beta_max)
        || (in_range
            && g.beta < r.j_alt_beta_max
            && g.theta1.abs() < r.j_alt_theta_max
            && g.theta2.abs() < r.j_alt_theta_max)
}

/// `true` when any inhibitory exclusion holds.
pub fn w_excluded(g: &KernelGeometry, r: &KernelRules) -> bool {
    let beta_excluded = if r.w_beta_as_printed {
        g.beta < r.w_beta_min
    } else {
        g.beta >= r.w_beta_min
    };
    g.d == 0.0
        || g.d >= r.max_distance
        || beta_excluded
        || g.dtheta.abs() >= r.w_dtheta_max
        || g.theta1.abs() < r.w_theta1_min
}

/// Excitatory weight `λ · 0.126 · exp((−β/d)² − 2(β/d)⁷ − d²/90)`.
pub fn j_weight(g: &KernelGeometry, lambda: f64, r: &KernelRules) -> f64 {
    if !j_gate(g, r) {
        return 0.0;
    }
    let q = g.beta / g.d;
    lambda * 0.126 * ((-q).powi(2) - 2.0 * q.powi(7) - g.d * g.d / 90.0).exp()
}

/// Inhibitory weight
/// `λ · 0.14 · (1 − exp(−0.4 (β/d)^1.5)) · exp(−(|Δθ| / (π/4))^1.5)`.
pub fn w_weight(g: &KernelGeometry, lambda: f64, r: &KernelRules) -> f64 {
    if w_excluded(g, r) {
        return 0.0;
    }
    let q = g.beta / g.d;
    lambda * 0.14 * (1.0 - (-0.4 * q.powf(1.5)).exp()) * (-(g.dtheta.abs() / FRAC_PI_4).powf(1.5)).exp()
}

/// One angle reading of a connection (diagonal bands contribute two).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelReading {
    pub geometry: KernelGeometry,
    pub j: f64,
    pub w: f64,
}

/// A tabulated connection `(target s, θ) ← (source s′, θ′)` at a relative
/// offset. Scales are counted from 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEntry {
    pub target: (usize, Orientation),
    pub source: (usize, Orientation),
    /// Offset from target to source in units of the target scale.
    pub offset: (i32, i32),
    /// The same offset in pixels.
    pub pixel_offset: (i32, i32),
    pub lambda: f64,
    pub readings: Vec<KernelReading>,
    /// Mean over readings.
    pub j: f64,
    pub w: f64,
}

/// A nonzero connection seen from its source plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    /// Target-to-source offset in pixels; the target of a source at `p` is
    /// `p − (dx, dy)`.
    pub dx: i32,
    pub dy: i32,
    pub target_plane: u32,
    pub j: f64,
    pub w: f64,
}

/// Translation-invariant lateral connection tables for `scales` scales.
#[derive(Debug, Clone)]
pub struct CouplingKernels {
    scales: usize,
    support_radius: Vec<usize>,
    table: Vec<KernelEntry>,
    taps: Vec<Vec<Tap>>,
}

impl CouplingKernels {
    pub fn scales(&self) -> usize {
        self.scales
    }

    /// Largest retained offset (pixels) for targets at scale `s`.
    pub fn support_radius(&self, s: usize) -> usize {
        self.support_radius[s - 1]
    }

    /// The whole tabulated index space, zero entries included.
    pub fn table(&self) -> &[KernelEntry] {
        &self.table
    }

    /// Nonzero connections leaving plane `s * 3 + θ` (`s` from 0).
    pub fn taps_from(&self, plane: usize) -> &[Tap] {
        &self.taps[plane]
    }

    pub fn total_mass(&self) -> (f64, f64) {
        self.table.iter().fold((0.0, 0.0), |(j, w), e| (j + e.j, w + e.w))
    }
}

#[inline]
pub(crate) fn plane_index(s: usize, o: Orientation) -> usize {
    (s - 1) * 3 + o.index()
}

/// Tabulates `J` and `W` over every offset within `max_distance` (in units of
/// `2^{s−1}` pixels for a target at scale `s`), every orientation pair and
/// every scale pair with nonzero `λ(|s − s′|)`.
pub fn build_kernels(scales: usize, scale_coupling: &[f64], rules: &KernelRules) -> CouplingKernels {
    let radius = rules.max_distance.floor() as i32;
    let mut table = Vec::new();
    let mut taps = alloc::vec![Vec::new(); scales * 3];
    let mut support_radius = Vec::with_capacity(scales);
    for s in 1..=scales {
        let unit = 1i32 << (s - 1);
        support_radius.push((radius * unit) as usize);
        for target_o in Orientation::ALL {
            for sp in 1..=scales {
                let dscale = s.abs_diff(sp);
                let lambda = scale_coupling.get(dscale).copied().unwrap_or(0.0);
                if lambda <= 0.0 {
                    continue;
                }
                for source_o in Orientation::ALL {
                    for b in -radius..=radius {
                        for a in -radius..=radius {
                            let d = ((a * a + b * b) as f64).sqrt();
                            if d > rules.max_distance {
                                continue;
                            }
                            let mut readings = Vec::new();
                            for &ta in preferred_angles(target_o) {
                                for &tb in preferred_angles(source_o) {
                                    let g = KernelGeometry::new(a as f64, b as f64, ta, tb, dscale);
                                    readings.push(KernelReading {
                                        geometry: g,
                                        j: j_weight(&g, lambda, rules),
                                        w: w_weight(&g, lambda, rules),
                                    });
                                }
                            }
                            let n = readings.len() as f64;
                            let j = readings.iter().map(|r| r.j).sum::<f64>() / n;
                            let w = readings.iter().map(|r| r.w).sum::<f64>() / n;
                            let entry = KernelEntry {
                                target: (s, target_o),
                                source: (sp, source_o),
                                offset: (a, b),
                                pixel_offset: (a * unit, b * unit),
                                lambda,
                                readings,
                                j,
                                w,
                            };
                            if j > 0.0 || w > 0.0 {
                                taps[plane_index(sp, source_o)].push(Tap {
                                    dx: a * unit,
                                    dy: b * unit,
                                    target_plane: plane_index(s, target_o) as u32,
                                    j,
                                    w,
                                });
                            }
                            table.push(entry);
                        }
                    }
                }
            }
        }
    }
    for list in &mut taps {
        list.sort_by_key(|t: &Tap| (t.target_plane, t.dy, t.dx));
    }
    CouplingKernels {
        scales,
        support_radius,
        table,
        taps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    fn geom(d: f64, beta: f64, theta1: f64, theta2: f64, dtheta: f64) -> KernelGeometry {
        KernelGeometry {
            d,
            theta1,
            theta2,
            beta,
            dtheta,
            dscale: 0,
        }
    }

    #[test]
    fn j_examples() {
        let r = KernelRules::default();
        assert_eq!(j_weight(&geom(0.0, 0.0, 0.0, 0.0, 0.0), 1.0, &r), 0.0);
        assert_eq!(j_weight(&geom(11.0, 0.0, 0.0, 0.0, 0.0), 1.0, &r), 0.0);
        // β = 0: 0.126 · e^{−9/90}
        let v = j_weight(&geom(3.0, 0.0, 0.0, 0.0, 0.0), 1.0, &r);
        assert!((v - 0.126 * (-0.1f64).exp()).abs() < 1e-15);
        assert!((v - 0.114_009_514_672_530_9).abs() < 1e-12);
        assert!(j_weight(&geom(10.0, 0.0, 0.0, 0.0, 0.0), 1.0, &r) > 0.0);
        assert_eq!(j_weight(&geom(2.0, 1.2, 0.0, 0.0, 0.0), 1.0, &r), 0.0);
    }

    #[test]
    fn w_examples() {
        let r = KernelRules::default();
        assert_eq!(w_weight(&geom(0.0, PI, 1.0, 1.0, 0.0), 1.0, &r), 0.0);
        assert_eq!(w_weight(&geom(4.0, PI, 1.0, 1.0, FRAC_PI_2), 1.0, &r), 0.0);
        assert_eq!(w_weight(&geom(10.0, PI, 1.0, 1.0, 0.0), 1.0, &r), 0.0);
        assert_eq!(w_weight(&geom(4.0, 2.0, 1.0, 1.0, 0.0), 1.0, &r), 0.0);
        // d = 4, β = π, Δθ = 0: 0.14 · (1 − e^{−0.4 (π/4)^{1.5}})
        let g = geom(4.0, PI, PI / 1.9, PI / 1.9, 0.0);
        let expect = 0.14 * (1.0 - (-0.4 * (PI / 4.0).powf(1.5)).exp());
        assert!((w_weight(&g, 1.0, &r) - expect).abs() < 1e-15);
        assert!((expect - 0.034_022_583_156_503_7).abs() < 1e-12);
        assert!((w_weight(&g, 1.0, &KernelRules::as_printed()) - expect).abs() < 1e-15);
        assert!((w_weight(&g, 0.5, &r) - 0.5 * expect).abs() < 1e-15);
    }

    #[test]
    fn printed_theta_bound_removes_all_inhibition() {
        let k = build_kernels(2, &[1.0, 0.5], &KernelRules::as_printed());
        assert!(k.table().iter().all(|e| e.w == 0.0));
        assert!(k.table().iter().any(|e| e.j > 0.0));
    }

    #[test]
    fn negated_offset_with_swapped_orientations_is_symmetric() {
        let k = build_kernels(2, &[1.0, 0.5], &KernelRules::default());
        let same_scale: Vec<&KernelEntry> = k.table().iter().filter(|e| e.target.0 == e.source.0).collect();
        for e in &same_scale {
            let mirror = same_scale
                .iter()
                .find(|m| {
                    m.target == (e.target.0, e.source.1)
                        && m.source == (e.source.0, e.target.1)
                        && m.offset == (-e.offset.0, -e.offset.1)
                })
                .unwrap();
            assert!((mirror.j - e.j).abs() < 1e-12, "{e:?}");
            assert!((mirror.w - e.w).abs() < 1e-12, "{e:?}");
        }
    }

    #[test]
    fn support_and_determinism() {
        let a = build_kernels(3, &[1.0, 0.5], &KernelRules::default());
        let b = build_kernels(3, &[1.0, 0.5], &KernelRules::default());
        assert_eq!(a.total_mass(), b.total_mass());
        assert!(a.total_mass().0.is_finite() && a.total_mass().1.is_finite());
        assert_eq!(a.support_radius(1), 10);
        assert_eq!(a.support_radius(3), 40);
        for e in a.table() {
            let d = ((e.offset.0 * e.offset.0 + e.offset.1 * e.offset.1) as f64).sqrt();
            assert!(d <= 10.0);
            assert!(e.j >= 0.0 && e.w >= 0.0);
            if d >= 10.0 {
                assert_eq!(e.w, 0.0);
            }
        }
        // λ(2) = 0 drops scale pairs two apart.
        assert!(a.table().iter().all(|e| e.target.0.abs_diff(e.source.0) < 2));
    }
}
