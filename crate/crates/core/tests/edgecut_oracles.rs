mod common;

use common::*;
use proptest::prelude::*;
use tricut::edgecut::{EdgeCut, EdgeCutError};

#[test]
fn fractions_agree_with_walk_and_pieces() {
    let worst = fraction_check(20_000, 1);
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn swap_and_rotation_equivariance() {
    let worst = symmetry_check(2_000, 2).unwrap();
    assert!(worst <= 1e-12, "{worst:e}");
}

#[test]
fn correction_meets_reachable_targets() {
    let st = correction_check(2_000, 3).unwrap();
    assert!(st.worst_fraction <= 1e-12, "{st:?}");
    assert!(st.worst_ratio <= 1e-9, "{st:?}");
    assert!(st.floor_unchanged > 0);
}

#[test]
fn walk_oracle_examples() {
    let unit = [p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0)];
    let cut = EdgeCut::new(1, [[0.7, 1.0], [0.0, 1.0], [0.4, 1.0]], None).unwrap();
    // the liquid corner (0,0),(0.7,0),(0,0.6)
    assert!((oracle_liquid_area(&cut, &unit) - 0.21).abs() < 1e-15);
    assert!((oracle_liquid_area(&cut.swapped(), &unit) - 0.29).abs() < 1e-15);
    assert_eq!(oracle_liquid_area(&EdgeCut::uniform(1), &unit), 0.5);
    assert_eq!(oracle_liquid_area(&EdgeCut::uniform(0), &unit), 0.0);
}

fn any_cut() -> impl Strategy<Value = (EdgeCut, [tricut::geom::Point2; 3])> {
    (1u8..=6, any::<u64>()).prop_map(|(case, seed)| {
        let mut r = rng(seed);
        let (cut, _) = random_cut(&mut r, case);
        (cut, random_triangle(&mut r))
    })
}

proptest! {
    #[test]
    fn pack_round_trip((cut, _) in any_cut()) {
        let back = EdgeCut::unpack(&cut.pack()).unwrap();
        prop_assert_eq!(back, cut);
        prop_assert_eq!(back.pack().map(f64::to_bits), cut.pack().map(f64::to_bits));
    }

    #[test]
    fn fractions_partition_the_triangle((cut, _) in any_cut()) {
        let (f1, f0) = cut.area_fractions().unwrap();
        prop_assert!((f1 + f0 - 1.0).abs() <= 1e-15);
        prop_assert!((0.0..=1.0).contains(&f1));
    }

    #[test]
    fn pieces_tile_the_triangle((cut, tri) in any_cut()) {
        let v = cut.view(&tri).unwrap();
        let a = shoelace(&tri);
        prop_assert!((v.liquid_pieces().area() + v.air_pieces().area() - a).abs() <= 1e-12 * a);
        for piece in v.liquid_pieces().as_slice().iter().chain(v.air_pieces().as_slice()) {
            prop_assert!(piece.area() >= 0.0);
        }
    }

    #[test]
    fn material_matches_pieces((cut, tri) in any_cut(), u in 0.01f64..0.98, v in 0.01f64..0.98) {
        prop_assume!(u + v < 0.99);
        let q = tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v;
        let view = cut.view(&tri).unwrap();
        let depth = |pieces: &tricut::edgecut::Pieces| {
            pieces.as_slice().iter().map(|pc| {
                let vs = pc.vertices();
                (0..vs.len()).map(|i| {
                    let (a, b) = (vs[i], vs[(i + 1) % vs.len()]);
                    (b - a).cross(q - a) / (b - a).norm()
                }).fold(f64::INFINITY, f64::min)
            }).fold(f64::NEG_INFINITY, f64::max)
        };
        // only judge points clearly inside one region
        let (dl, da) = (depth(&view.liquid_pieces()), depth(&view.air_pieces()));
        if dl > 1e-9 {
            prop_assert_eq!(view.material_at(q), 1);
        } else if da > 1e-9 {
            prop_assert_eq!(view.material_at(q), 0);
        }
    }

    #[test]
    fn unpack_never_panics(data in proptest::array::uniform6(any::<f64>())) {
        match EdgeCut::unpack(&data) {
            Ok(cut) => prop_assert!(cut.classify().is_ok()),
            Err(e) => prop_assert!(!matches!(e, EdgeCutError::ParityInconsistent(_)) || true),
        }
    }
}
