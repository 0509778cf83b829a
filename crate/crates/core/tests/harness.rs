use ddrs::harness::{
    build_dataset, parse_config, prepare, preset, read_records, run_experiment, write_plotdata, write_records,
    ExperimentConfig, RecordFormat, RunStatus,
};
use ddrs::metrics::IterationRecord;

fn small(extra: &str) -> ExperimentConfig {
    parse_config(&format!(
        "problem.kind = synthetic\nproblem.n = 5\nproblem.m_per = 60\nproblem.d = 8\nproblem.r = 3\n\
         graph.kind = erdos_renyi\ngraph.p = 0.6\nbeta_hat = 300\nt = 3\nmax_iters = 40\n{extra}"
    ))
    .unwrap()
}

fn untimed(mut records: Vec<IterationRecord>) -> Vec<IterationRecord> {
    records.iter_mut().for_each(|r| r.wall_ns = 0);
    records
}

#[test]
fn same_config_same_records() {
    let dir = tempfile::tempdir().unwrap();
    for format in [RecordFormat::Csv, RecordFormat::Jsonl] {
        let bytes: Vec<Vec<u8>> = (0..2)
            .map(|i| {
                let out = run_experiment(&small("master_seed = 17\n"));
                assert_eq!(out.summary.status, RunStatus::Completed);
                let path = dir.path().join(format!("run{i}"));
                write_records(&untimed(out.records), &path, format).unwrap();
                std::fs::read(&path).unwrap()
            })
            .collect();
        assert_eq!(bytes[0], bytes[1]);
    }
}

#[test]
fn master_seed_changes_the_run() {
    let a = untimed(run_experiment(&small("master_seed = 1\n")).records);
    let b = untimed(run_experiment(&small("master_seed = 2\n")).records);
    assert_ne!(a, b);
}

#[test]
fn graph_seed_leaves_data_and_start_alone() {
    let a = prepare(&small("graph.seed = 1\n")).unwrap();
    let b = prepare(&small("graph.seed = 2\n")).unwrap();
    assert_eq!(a.dataset.blocks, b.dataset.blocks);
    assert_eq!(a.x0, b.x0);
    assert_ne!(a.graph.to_edge_list(), b.graph.to_edge_list());
}

#[test]
fn data_seed_leaves_graph_alone() {
    let a = prepare(&small("problem.seed = 5\n")).unwrap();
    let b = prepare(&small("problem.seed = 6\n")).unwrap();
    assert_eq!(a.graph.to_edge_list(), b.graph.to_edge_list());
    assert_ne!(a.dataset.blocks, b.dataset.blocks);
}

#[test]
fn preset_dataset_matches_direct_build() {
    let cfg = preset("synthetic-er06").unwrap();
    let prep = prepare(&cfg).unwrap();
    let direct = build_dataset(&cfg.problem, cfg.master_seed).unwrap();
    assert_eq!(prep.dataset.blocks, direct.blocks);
    assert_eq!(prep.dataset.total_rows(), 8000);
}

#[test]
fn record_files_round_trip() {
    let out = run_experiment(&small("log_every = 9\nalgorithm.kind = iddrs\n"));
    assert_eq!(out.summary.status, RunStatus::Completed);
    let dir = tempfile::tempdir().unwrap();
    for (name, format) in [("r.csv", RecordFormat::Csv), ("r.jsonl", RecordFormat::Jsonl)] {
        let path = dir.path().join(name);
        write_records(&out.records, &path, format).unwrap();
        assert_eq!(read_records(&path, format).unwrap(), out.records);
    }
    let files = write_plotdata(&out.records, dir.path().join("r.csv")).unwrap();
    assert!(!files.is_empty());
    let text = std::fs::read_to_string(&files[0]).unwrap();
    assert_eq!(text.lines().count(), out.records.len());
}

#[test]
fn baseline_records_have_no_inexactness() {
    let out = run_experiment(&small("algorithm.kind = baseline_gt\n"));
    assert_eq!(out.summary.status, RunStatus::Completed, "{:?}", out.summary.error);
    assert!(out.records.iter().all(|r| r.mu_sq_max.is_none() && r.dre.is_finite()));
    assert_eq!(out.summary.violation_count, 0);
}
