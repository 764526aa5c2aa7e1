use beamspace::analysis::orthogonality_defect;
use beamspace::channel::{
    build_beamspace_transform, component_closed_form, generate_spatial_channel, to_beamspace,
    ChannelGenConfig, PathComponent, PathKind,
};
use beamspace::rng::{complex_normal, substream};
use rand::Rng;

#[test]
fn parseval_over_many_channels() {
    let n = 256;
    let t = build_beamspace_transform(n).unwrap();
    let cfg = ChannelGenConfig::new(n, 2);
    let mut rng = substream(11, &[]);
    for _ in 0..1000 {
        let h = generate_spatial_channel(&cfg, &mut rng).unwrap();
        let hb = to_beamspace(&h, &t).unwrap();
        let (a, b) = (h.vector().norm_squared(), hb.vector().norm_squared());
        assert!((a - b).abs() <= 1e-10 * a, "{a} vs {b}");
    }
}

#[test]
fn components_match_closed_form() {
    let n = 256;
    let t = build_beamspace_transform(n).unwrap();
    let cfg = ChannelGenConfig::new(n, 2);
    let mut rng = substream(12, &[]);
    for _ in 0..200 {
        let h = generate_spatial_channel(&cfg, &mut rng).unwrap();
        let hb = to_beamspace(&h, &t).unwrap();
        for (path, c) in h.paths().iter().zip(hb.components()) {
            let closed = component_closed_form(path, n);
            assert!((c - &closed).norm() <= 1e-10 * closed.norm().max(1.0));
        }
    }
}

#[test]
fn components_become_orthogonal_as_n_grows() {
    let mut rng = substream(13, &[]);
    let mut medians = Vec::new();
    for n in [16usize, 64, 256, 1024] {
        let mut defects: Vec<f64> = (0..301)
            .map(|_| {
                let mut path = |kind| PathComponent {
                    gain: complex_normal(&mut rng, 1.0),
                    spatial_direction: rng.random_range(-0.5..0.5),
                    kind,
                };
                let a = component_closed_form(&path(PathKind::LineOfSight), n);
                let b = component_closed_form(&path(PathKind::NonLineOfSight), n);
                orthogonality_defect(&a, &b).unwrap()
            })
            .collect();
        defects.sort_by(f64::total_cmp);
        medians.push(defects[150]);
    }
    assert!(medians.windows(2).all(|m| m[1] < m[0]), "{medians:?}");
}
