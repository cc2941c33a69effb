use qtanner::decoder::{BpOsdDecoder, DecoderConfig, DecodingGraph};
use qtanner::harness::{append_csv, read_csv, run_memory, ShotPolicy};
use qtanner::noise::{build_circuit, build_problem, circuit_to_checkmatrix, NoiseKind, NoiseModel};
use qtanner::qcode::{load_fixture, random_tanner_code, CssCode, Pauli};
use qtanner::rng::stream;

fn config(code: &CssCode) -> DecoderConfig {
    DecoderConfig {
        max_iters: Some(code.n),
        ..DecoderConfig::default()
    }
}

#[test]
fn bundle_round_trip_preserves_code() {
    let dir = tempfile::tempdir().unwrap();
    for code in [load_fixture("d6-54").unwrap(), random_tanner_code(8, 4, 2, 2, 3).unwrap()] {
        let path = dir.path().join(&code.name);
        code.write_bundle(&path).unwrap();
        assert_eq!(CssCode::read_bundle(&path).unwrap(), code);
    }
}

#[test]
fn decoded_shots_satisfy_their_syndromes() {
    let code = load_fixture("d4-36").unwrap();
    let model = NoiseModel::new(NoiseKind::Phenomenological, 0.02, 3).unwrap();
    let problem = build_problem(&code, Pauli::Z, &model);
    let graph = DecodingGraph::new(problem.detectors.clone(), &problem.priors).unwrap();
    let mut decoder = BpOsdDecoder::new(graph.into(), config(&code)).unwrap();
    let mut rng = stream(1, 0);
    for _ in 0..200 {
        let shot = problem.sample_shot(&mut rng);
        let e = decoder.decode(&shot.detectors).unwrap().error;
        assert_eq!(problem.detectors.mul_vec(&e), shot.detectors);
    }
}

#[test]
fn circuit_memory_runs_end_to_end() {
    let code = load_fixture("d4-36").unwrap();
    let model = NoiseModel::new(NoiseKind::Circuit, 0.002, 2).unwrap();
    let circuit = build_circuit(&code, Pauli::X, 2);
    let m = circuit_to_checkmatrix(&circuit, &model);
    assert_eq!(m.detectors.rows(), code.hx.rows() * 3);
    assert_eq!(m.logical_action.rows(), code.k);
    let r = run_memory(&code, &model, &config(&code), &ShotPolicy::fixed(300), 9).unwrap();
    assert_eq!((r.x.shots, r.z.shots), (300, 300));
    assert!(r.p_l < 0.5);
}

#[test]
fn results_append_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/results.csv");
    let code = load_fixture("d4-36").unwrap();
    for p in [0.0, 0.03] {
        let model = NoiseModel::new(NoiseKind::CodeCapacity, p, 1).unwrap();
        let r = run_memory(&code, &model, &config(&code), &ShotPolicy::fixed(128), 2).unwrap();
        append_csv(&path, &[r]).unwrap();
    }
    let rows = read_csv(&path).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].model, "capacity");
    assert_eq!(rows[0].p_l, 0.0);
    assert!(rows[1].fails_x + rows[1].fails_z > 0);
}
