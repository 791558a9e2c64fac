use bps_core::bps_automorphism::{dt_closed_form, dt_invariants};
use bps_core::coeff::rat;
use bps_core::gv_partition::{f_beta_series_exact, SignMode};
use bps_core::lattice::Ray;
use bps_core::maulik_toda::{build_mt_bps, check_omega_symmetry, omega_from_gv, GvTable, MtGeometry};
use bps_core::uq_series::UqSeries;

const GV: &str = r#"[{"class":[1],"degrees":{"0":2,"1":1}},{"class":[2],"degrees":{"0":-3}}]"#;
const GEOMETRY: &str = r#"{"b2":1,"kahler":[0.5],"epsilon":0.17}"#;

#[test]
fn gv_json_round_trip() {
    let gv = GvTable::from_json(GV).unwrap();
    let again = GvTable::from_json(&gv.to_json().to_string()).unwrap();
    assert_eq!(gv, again);
    assert!(check_omega_symmetry(&omega_from_gv(&gv, &[1])));
}

#[test]
fn mt_structure_dt_on_a_ray() {
    let gv = GvTable::from_json(GV).unwrap();
    let geom = MtGeometry::from_json(GEOMETRY).unwrap();
    let mt = build_mt_bps(&geom, &gv, 2).unwrap();
    let bps = &mt.structure;
    bps.require_uncoupled().unwrap();
    for (a, v) in bps.spectrum().iter() {
        assert_eq!(bps.omega(&a.scale(-1)), *v, "spectrum not symmetric at {a}");
    }

    // the ray through Z(0, beta, 0) = i omega.beta carries beta and 2 beta
    let gamma = mt.layout.charge(0, &[1], 0);
    let ray = Ray::new(bps.z(&gamma)).unwrap();
    let order = 2 * gamma.norm();
    let dt = dt_invariants(bps, ray, order).unwrap();
    let closed = dt_closed_form(bps, ray, order);
    let omega = omega_from_gv(&gv, &[1]);
    let omega2 = omega_from_gv(&gv, &[2]);
    assert!(dt.radical.is_empty());
    assert_eq!(dt.get(&gamma), rat(omega[&0], 1));
    assert_eq!(dt.get(&gamma.scale(2)), rat(omega2[&0], 1) + rat(omega[&0], 4));
    assert_eq!(dt.entries, closed.entries);
}

#[test]
fn exact_series_json_round_trip() {
    let gv = GvTable::from_json(GV).unwrap();
    let s = f_beta_series_exact(&gv.genus_series(&[1]), 6, 3).unwrap();
    let back = UqSeries::from_json(&s.to_json().unwrap(), 6, 3).unwrap();
    assert_eq!(s, back);
}

#[test]
fn golden_discrepancy_file_is_consistent() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/literal_mode_discrepancies.json"))
        .unwrap();
    let golden: serde_json::Value = serde_json::from_str(&text).unwrap();
    for fixture in golden.as_array().unwrap() {
        assert_eq!(fixture["common_ratio"], serde_json::json!("2 * Pi^1"));
        assert!(!fixture["differing"].as_array().unwrap().is_empty());
    }
    assert_eq!("literal".parse::<SignMode>().unwrap(), SignMode::Literal);
}
