use rabi_core::ed::EdConfig;
use rabi_core::gvm::PerturbationConfig;
use rabi_core::sweep::{csv_header, run_sweep_with, to_csv_string, to_json_string, FigureId};

fn cfgs() -> (PerturbationConfig, EdConfig) {
    (PerturbationConfig::default(), EdConfig::with_n_fock(80))
}

#[test]
fn parallel_and_serial_sweeps_are_bit_identical() {
    let (p, e) = cfgs();
    for id in [FigureId::F1b, FigureId::F2a, FigureId::F4] {
        let spec = id.spec(21);
        let a = to_csv_string(&spec, &run_sweep_with(&spec, &p, &e, true).unwrap()).unwrap();
        let b = to_csv_string(&spec, &run_sweep_with(&spec, &p, &e, false).unwrap()).unwrap();
        let c = to_csv_string(&spec, &run_sweep_with(&spec, &p, &e, true).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }
}

#[test]
fn csv_rows_are_complete() {
    let (p, e) = cfgs();
    let spec = FigureId::F3.spec(11);
    let csv = to_csv_string(&spec, &run_sweep_with(&spec, &p, &e, false).unwrap()).unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, csv_header(&spec));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    for row in &rows {
        assert_eq!(row.len(), header.len());
        for field in row.iter() {
            assert!(field.parse::<f64>().unwrap().is_finite(), "{field}");
        }
    }
    assert_eq!(rows[10][0].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn json_points_carry_method_keys() {
    let (p, e) = cfgs();
    let spec = FigureId::F4Inset.spec(5);
    let json = to_json_string(&run_sweep_with(&spec, &p, &e, false).unwrap()).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    let points = parsed.as_array().unwrap();
    assert_eq!(points.len(), 5);
    assert_eq!(points[0]["values"]["grwa_mean_photon"], 0.0);
    assert_eq!(points[0]["errors"]["gvm_mean_photon"], 0.0);
    assert!(points[4]["values"]["ed_mean_photon"].as_f64().unwrap() > 0.0);
    assert!(points[4]["failures"].as_object().unwrap().is_empty());
}
