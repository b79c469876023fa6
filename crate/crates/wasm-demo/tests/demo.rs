use mint_wasm_demo::{bound_map, geometry, measure};

#[test]
fn geometry_counts_images_of_a_rectangle() {
    // order 0: anchor only; order 1: four mirrors; order 2 adds 4·3 - 4 = 8 distinct
    assert_eq!(geometry(8.0, 5.0, 2.0, 1.5, 0).unwrap().vas.len(), 1);
    let g = geometry(8.0, 5.0, 2.0, 1.5, 1).unwrap();
    assert_eq!(g.vas.len(), 5);
    assert_eq!(g.room.len(), 4);
    let mirrored: Vec<_> = g.vas.iter().filter(|v| v.order == 1).map(|v| (v.x, v.y)).collect();
    for want in [(-2.0, 1.5), (14.0, 1.5), (2.0, -1.5), (2.0, 8.5)] {
        assert!(mirrored.iter().any(|&(x, y)| (x - want.0).abs() < 1e-12 && (y - want.1).abs() < 1e-12));
    }
    assert!(geometry(8.0, 5.0, 9.0, 1.0, 1).is_err());
}

#[test]
fn measurement_finds_the_direct_path() {
    let m = measure(8.0, 5.0, 2.0, 1.5, 5.0, 3.0, 7e9, 0.0, 1).unwrap();
    assert_eq!(m.t_ns.len(), m.magnitude.len());
    assert!(m.magnitude.iter().all(|&v| (0.0..=1.0).contains(&v)));
    let direct = m.true_ranges[0];
    assert!((direct - 11.25f64.sqrt()).abs() < 1e-12);
    let best = m.est_ranges.iter().map(|r| (r - direct).abs()).fold(f64::INFINITY, f64::min);
    assert!(best < 0.05, "closest estimate is {best} m off");
    assert_eq!(measure(8.0, 5.0, 2.0, 1.5, 5.0, 3.0, 7e9, 0.0, 1).unwrap().est_ranges, m.est_ranges);
    assert!(measure(8.0, 5.0, 2.0, 1.5, -1.0, 3.0, 7e9, 0.0, 1).is_err());
}

#[test]
fn interference_raises_the_bound() {
    let clean = bound_map(8.0, 5.0, 2.0, 1.5, 7e9, 0.0, 0.5).unwrap();
    let dirty = bound_map(8.0, 5.0, 2.0, 1.5, 7e9, 1e-8, 0.5).unwrap();
    assert_eq!((clean.nx, clean.ny), (16, 10));
    assert_eq!(clean.rmse_bound.len(), 160);
    for (c, d) in clean.rmse_bound.iter().zip(&dirty.rmse_bound) {
        assert!(c.is_finite() && *c > 0.0);
        assert!(d >= c);
    }
    assert!(bound_map(8.0, 5.0, 2.0, 1.5, 7e9, 0.0, 0.0).is_err());
}
