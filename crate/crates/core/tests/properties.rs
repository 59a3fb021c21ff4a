mod common;

use common::{jittered_field_2d, random_complex};
use lect::clip::halfspace_clip_complex;
use lect::stats::auc;
use lect::transform::scan_radius;
use lect::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(rng: &mut ChaCha8Rng, d: usize) -> PlField {
    let k = random_complex(rng, d, 60);
    let values = (0..k.num_points()).map(|_| rng.random_range(0.0..1.0)).collect();
    PlField::new(k, values).unwrap()
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n <= 1.0 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

/// Splits every triangle at its centroid. The PL function is unchanged.
fn centroid_subdivision(f: &PlField) -> PlField {
    let k = f.complex();
    let mut points = k.points().to_vec();
    let mut values = f.values().to_vec();
    let mut simplices: Vec<Vec<u32>> = k.simplices(0).chain(k.simplices(1)).map(<[u32]>::to_vec).collect();
    for tri in k.simplices(2) {
        let m = values.len() as u32;
        for axis in 0..2 {
            points.push(tri.iter().map(|&i| k.point(i as usize)[axis]).sum::<f64>() / 3.0);
        }
        values.push(tri.iter().map(|&i| f.values()[i as usize]).sum::<f64>() / 3.0);
        simplices.push(vec![m]);
        for (a, &i) in tri.iter().enumerate() {
            simplices.push(vec![i, m]);
            let j = tri[(a + 1) % 3];
            simplices.push(vec![i.min(j), i.max(j), m]);
        }
    }
    PlField::from_parts(2, points, values, simplices).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clipped_complexes_are_closed(seed in any::<u64>(), d in 2usize..=3, t in 0.01f64..1.0, h in -1.5f64..1.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, d);
        let v = unit_vector(&mut rng, d);
        let sup = superlevel_restrict(&f, t).unwrap();
        sup.complex.check_closed().unwrap();
        level_restrict(&f, t).unwrap().complex.check_closed().unwrap();
        halfspace_clip(&sup, &v, h).unwrap().complex.check_closed().unwrap();
        halfspace_clip_complex(f.complex(), &v, h).unwrap().complex.check_closed().unwrap();
    }

    #[test]
    fn superlevel_sublevel_inclusion_exclusion(seed in any::<u64>(), d in 2usize..=3, t in 0.01f64..0.99) {
        // {f >= t} ∪ {f <= t} = K and their intersection is {f = t}
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, d);
        let flipped = f.with_values(f.values().iter().map(|v| 1.0 - v).collect()).unwrap();
        let above = superlevel_restrict(&f, t).unwrap().euler_characteristic();
        let below = superlevel_restrict(&flipped, 1.0 - t).unwrap().euler_characteristic();
        let level = level_restrict(&f, t).unwrap().euler_characteristic();
        prop_assert_eq!(above + below - level, f.complex().euler_characteristic());
    }

    #[test]
    fn halfspace_inclusion_exclusion(seed in any::<u64>(), d in 2usize..=3, h in -1.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = random_complex(&mut rng, d, 60);
        let v = unit_vector(&mut rng, d);
        let neg: Vec<f64> = v.iter().map(|x| -x).collect();
        let lower = halfspace_clip_complex(&k, &v, h).unwrap().euler_characteristic();
        let upper = halfspace_clip_complex(&k, &neg, -h).unwrap().euler_characteristic();
        // the slice {x . v = h} is the intersection; recover it from a field
        let heights: Vec<f64> = k.heights(&v).iter().map(|x| (x + 2.0) / 4.0).collect();
        let slice = level_restrict(&PlField::new(k.clone(), heights).unwrap(), (h + 2.0) / 4.0).unwrap();
        prop_assert_eq!(lower + upper - slice.euler_characteristic(), k.euler_characteristic());
    }

    #[test]
    fn scan_ends_at_superlevel_chi(seed in any::<u64>(), d in 2usize..=3, t in 0.01f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_field(&mut rng, d);
        let v = unit_vector(&mut rng, d);
        let curve = euler_scan(&f, &v, t).unwrap();
        prop_assert_eq!(curve.final_value(), superlevel_restrict(&f, t).unwrap().euler_characteristic());
        prop_assert_eq!(curve.value_at(-10.0), 0);
    }

    #[test]
    fn select_is_subdivision_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = jittered_field_2d(&mut rng, 4);
        let g = centroid_subdivision(&f);
        prop_assert_eq!(g.complex().euler_characteristic(), f.complex().euler_characteristic());
        let heights: Vec<f64> = uniform_heights(1.6, 12).unwrap().iter().map(|h| h + 0.0123).collect();
        let req = ScanRequest::select(make_directions(2, 7).unwrap(), heights, vec![0.2137, 0.5411, 0.8779]).unwrap();
        let a = select_transform(&f, &req).unwrap();
        let b = select_transform(&g, &req).unwrap();
        prop_assert_eq!(a.values(), b.values());
    }

    #[test]
    fn select_distance_is_a_pseudometric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fields: Vec<PlField> = (0..3).map(|_| jittered_field_2d(&mut rng, 4)).collect();
        let dirs = make_directions(2, 8).unwrap();
        let radius = scan_radius(fields.iter().map(PlField::complex), &dirs);
        let req = ScanRequest::select(dirs, uniform_heights(radius, 10).unwrap(), default_thresholds(5)).unwrap();
        let g: Vec<TransformGrid> = fields.iter().map(|f| select_transform(f, &req).unwrap()).collect();
        for p in [1.0, 2.0] {
            let d = |i: usize, j: usize| select_distance(&g[i], &g[j], p).unwrap();
            prop_assert_eq!(d(0, 0), 0.0);
            prop_assert_eq!(d(0, 1), d(1, 0));
            prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-9);
        }
    }

    #[test]
    fn auc_is_invariant_under_monotone_maps(
        scores in prop::collection::vec(-5.0f64..5.0, 4..30),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut labels: Vec<i8> = scores.iter().map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        labels[0] = 1;
        labels[1] = -1;
        let a = auc(&scores, &labels).unwrap();
        let mapped: Vec<f64> = scores.iter().map(|s| (0.7 * s).exp() + 3.0).collect();
        prop_assert_eq!(auc(&mapped, &labels).unwrap(), a);
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        prop_assert!((auc(&negated, &labels).unwrap() - (1.0 - a)).abs() < 1e-12);
    }
}
