use proptest::prelude::*;
use v1sal_core::color::RgbImage;
use v1sal_core::integrate::{fuse_argmax, fuse_max, znorm, Fusion};
use v1sal_core::pipeline::{Pipeline, PipelineConfig, ResponseCache};
use v1sal_core::stimgen::{orientation_stimulus, Canvas};
use v1sal_core::Plane;

fn small_config() -> PipelineConfig {
    PipelineConfig {
        max_side: 48,
        ..PipelineConfig::default()
    }
}

fn plane_strategy(w: usize, h: usize) -> impl Strategy<Value = Plane> {
    prop::collection::vec(-2.0..2.0f64, w * h).prop_map(move |v| Plane::from_vec(w, h, v).unwrap())
}

proptest! {
    #[test]
    fn max_fusion_dominates_each_plane(
        planes in prop::collection::vec(plane_strategy(5, 4), 1..6),
        residual in plane_strategy(5, 4),
    ) {
        let fused = fuse_max(&planes, &residual).unwrap();
        for p in &planes {
            for i in 0..20 {
                prop_assert!(fused.as_slice()[i] >= p.as_slice()[i] + residual.as_slice()[i] - 1e-12);
            }
        }
        let picked = fuse_argmax(&planes, &residual).unwrap();
        let member = planes.iter().any(|p| {
            p.as_slice().iter().zip(residual.as_slice()).zip(picked.as_slice()).all(|((a, r), o)| a + r == *o)
        });
        prop_assert!(member);
    }

    #[test]
    fn znorm_keeps_the_argmax(p in plane_strategy(7, 6)) {
        let z = znorm(&p);
        prop_assume!(!z.degenerate);
        prop_assert_eq!(z.map.argmax(), p.argmax());
        prop_assert!(z.map.mean().abs() < 1e-12);
        prop_assert!((z.map.std_dev() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn saliency_has_the_input_shape() {
    let pipeline = Pipeline::new(small_config()).unwrap();
    for (w, h) in [(60, 37), (23, 80), (48, 48), (9, 12)] {
        let img = RgbImage::from_rgb8(w, h, &(0..w * h * 3).map(|i| (i * 37 % 251) as u8).collect::<Vec<_>>()).unwrap();
        let out = pipeline.run(&img, &mut ResponseCache::default()).unwrap();
        assert_eq!(out.saliency.values.dims(), (w, h));
        assert!(out.saliency.values.all_finite());
        let side = w.max(h).min(48);
        assert_eq!(out.working.width().max(out.working.height()), side);
    }
}

#[test]
fn fusion_modes_share_one_simulation() {
    let stim = orientation_stimulus(90.0, Canvas::default(), 3).unwrap();
    let pipeline = Pipeline::new(small_config()).unwrap();
    let prepared = pipeline.prepare(&stim.image).unwrap();
    let mut cache = ResponseCache::default();
    let consp = pipeline.conspicuity(&prepared, &mut cache).unwrap();
    let maps: Vec<Plane> = Fusion::ALL
        .iter()
        .map(|&f| pipeline.integrate(&consp, f).unwrap().saliency.values)
        .collect();
    assert_ne!(maps[0], maps[1]);
    assert_ne!(maps[0], maps[2]);

    // Same image and configuration: bit-identical output.
    let again = pipeline.run(&stim.image, &mut ResponseCache::default()).unwrap();
    assert_eq!(again.saliency.values, maps[0]);
}
