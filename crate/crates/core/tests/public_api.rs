use toral_rigidity::cocycle::ph_probe;
use toral_rigidity::extension::{cone_params, invariant_distribution};
use toral_rigidity::fixtures;
use toral_rigidity::holonomy::{cover_lattice, reduce_to_constant, transfer_map, HolonomyFrame, HolonomyOptions};
use toral_rigidity::lattice_action::validate_action;
use toral_rigidity::weyl::chambers;
use toral_rigidity::{CircleCocycle, FourierField, ProductGrid, SectionGrid, TransferMap};

#[test]
fn cubic_pair_end_to_end() {
    let beta: CircleCocycle = fixtures::conjugated_rotation(0.05, 0.25);
    let s = validate_action::<f64>(beta.action(), 3).unwrap().spectrum;
    let d = chambers(&s, 8).unwrap();
    assert_eq!(d.chambers.len(), 6);

    let grid = ProductGrid::new(4, 32);
    assert!(ph_probe(&beta, &s, &d, &grid, 4).unwrap().all_certified);

    let a = d.chambers[0].representative.clone().unwrap();
    let p = cone_params(&beta, &s, s.unstable(&a)[0], &a, &grid, 6).unwrap();
    let sec = invariant_distribution(&beta, &s, &p, &grid, 1e-9, 200).unwrap();
    assert!(sec.residual < 1e-8);
    let back: SectionGrid = serde_json::from_str(&serde_json::to_string(&sec).unwrap()).unwrap();
    assert_eq!(back, sec);

    let frame = HolonomyFrame::new(&s, &d, HolonomyOptions::default()).unwrap();
    let cover = cover_lattice(beta.action()).unwrap();
    let h = transfer_map(&beta, &frame, &cover, &ProductGrid::new(4, 16), 4, 0).unwrap();
    let back: TransferMap = serde_json::from_str(&serde_json::to_string(&h).unwrap()).unwrap();
    assert_eq!(back, h);
    assert!(back.samples.iter().zip(&h.samples).all(|(x, y)| x.to_bits() == y.to_bits()));

    let r = reduce_to_constant(&beta, &frame, &cover, 8, 1).unwrap();
    assert!(r.defect < 1e-7);
    assert!(r.rotation_numbers.iter().all(|v| (v - 0.25).abs() < 1e-9));
}

#[test]
fn f32_kernels_agree_with_f64() {
    let b64: toral_rigidity::cocycle::CircleCocycle<f64> = fixtures::coboundary_fixture(0.05);
    let b32: toral_rigidity::cocycle::CircleCocycle<f32> = fixtures::coboundary_fixture(0.05);
    let x = [0.1, 0.7, 0.35];
    let m64 = b64.evaluate(&[1, -1], &x);
    let m32 = b32.evaluate(&[1, -1], &x.map(|v| v as f32));
    for k in 0..16 {
        let y = k as f64 / 16.0;
        assert!((m64.apply(y) - m32.apply(y as f32) as f64).abs() < 1e-4);
    }
    let id: FourierField = FourierField::identity();
    assert!(id.is_identity());
}
