use qrnn_core::cells::CellKind;
use qrnn_core::config::{Experiment, ExperimentConfig, SolverOverrides};
use qrnn_core::container::SnapshotContainer;
use qrnn_core::pipeline::{mae, rmse, run_experiment};

fn desk_config(model: CellKind) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Experiment::Hjb, model);
    c.latent_size = 4;
    c.n_qubits = 2;
    c.hidden_size = 2;
    c.n_quantum_layers = 2;
    c.epochs = Some(4);
    c.window_length = 3;
    c.autoencoder.ladder = vec![32, 16];
    c.autoencoder.epochs = 20;
    c.solver = SolverOverrides {
        grid: Some(10),
        n_steps: Some(30),
        ..SolverOverrides::default()
    };
    c
}

fn pooled(c: &SnapshotContainer) -> Vec<f64> {
    c.sections
        .iter()
        .flat_map(|s| s.data.iter().copied())
        .collect()
}

#[test]
fn metrics_recomputed_from_written_files_agree() {
    for model in [CellKind::Qlstm, CellKind::Qgru, CellKind::Lstm] {
        let cfg = desk_config(model);
        let data = cfg.experiment.generate(&cfg.solver, 0).unwrap();
        let out = run_experiment(&data, &cfg, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        out.write_artifacts(dir.path()).unwrap();

        let pred = pooled(&SnapshotContainer::read(dir.path().join("predictions.qrds")).unwrap());
        let truth = pooled(&SnapshotContainer::read(dir.path().join("truth.qrds")).unwrap());
        let summary: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        let m = mae(&pred, &truth).unwrap();
        let r = rmse(&pred, &truth).unwrap();
        assert!((m - summary["mae"].as_f64().unwrap()).abs() <= 1e-10);
        assert!((r - summary["rmse"].as_f64().unwrap()).abs() <= 1e-10);
        assert!((m - out.mae).abs() <= 1e-10 && r >= m);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = desk_config(CellKind::Qgru);
    let data = cfg.experiment.generate(&cfg.solver, 0).unwrap();
    let files = [
        "metrics_V.csv",
        "predictions.qrds",
        "summary.json",
        "model_V.qrds",
    ];
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(&data, &cfg, 11)
            .unwrap()
            .write_artifacts(dir.path())
            .unwrap();
        runs.push(files.map(|f| std::fs::read(dir.path().join(f)).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);

    let dir = tempfile::tempdir().unwrap();
    run_experiment(&data, &cfg, 12)
        .unwrap()
        .write_artifacts(dir.path())
        .unwrap();
    assert_ne!(
        std::fs::read(dir.path().join("metrics_V.csv")).unwrap(),
        runs[0][0]
    );
}
