use povm_duel::entangled::{diamond_distance, SolverOptions};
use povm_duel::format::{parse_matrix, FormatError, MatrixFile};
use povm_duel::report::{verify, ReportFile};
use povm_duel::special::fourier_matrix;
use povm_duel::{ComplexMatrix, VonNeumannMeasurement};

#[test]
fn identity_file_parses_to_identity() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("id.json");
    std::fs::write(&path, r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0]]]}"#).unwrap();
    assert_eq!(parse_matrix(&path).unwrap(), ComplexMatrix::identity(2));
}

#[test]
fn fourier_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f4.json");
    let f = fourier_matrix(4).unwrap();
    MatrixFile::new(f.unitary().clone()).write(&path).unwrap();
    let back = parse_matrix(&path).unwrap();
    assert!((&back - f.unitary()).max_abs() <= 1e-15);
    assert_eq!(back.to_row_major(), f.unitary().to_row_major());
}

#[test]
fn truncated_file_reports_line_and_column() {
    let text = MatrixFile::new(fourier_matrix(3).unwrap().unitary().clone()).to_json_string();
    let cut = &text[..text.len() / 2];
    match MatrixFile::parse_str(cut).unwrap_err() {
        FormatError::Syntax { line, column, .. } => {
            assert!(line >= 3, "line {line}");
            assert!(column > 0);
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn each_defect_has_its_own_diagnostic() {
    let cases = [
        (r#"[1, 2]"#, "<root>"),
        (r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]]]}"#, "entries[1]"),
        (r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [Infinity, 0]]]}"#, "entries[1][1]"),
        (r#"{"dim": 2, "entries": [[[1, 0], [0, 0]], [[0, 0], [1]]]}"#, "entries[1][1]"),
        (r#"{"dim": 0, "entries": []}"#, "dim"),
    ];
    for (text, needle) in cases {
        let msg = MatrixFile::parse_str(text).unwrap_err().to_string();
        assert!(msg.contains(needle), "{msg} should mention {needle}");
    }
}

#[test]
fn missing_file_names_the_path() {
    let err = parse_matrix("/nonexistent/u.json").unwrap_err();
    assert!(err.to_string().contains("/nonexistent/u.json"));
}

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let f = fourier_matrix(3).unwrap();
    let id = VonNeumannMeasurement::computational(3);
    let opts = SolverOptions { seed: 17, ..SolverOptions::default() };
    let a = ReportFile::from_distance(&f, &id, &opts, &diamond_distance(&f, &id, &opts).unwrap()).unwrap();
    let b = ReportFile::from_distance(&f, &id, &opts, &diamond_distance(&f, &id, &opts).unwrap()).unwrap();
    assert_eq!(a.with_wall_time(1.0).to_json_string(), b.with_wall_time(1.0).to_json_string());
}

#[test]
fn report_text_round_trips_losslessly() {
    let f = fourier_matrix(5).unwrap();
    let id = VonNeumannMeasurement::computational(5);
    let opts = SolverOptions::default();
    let r = diamond_distance(&f, &id, &opts).unwrap();
    let file = ReportFile::from_distance(&f, &id, &opts, &r).unwrap().with_wall_time(0.123_456_789);
    let text = file.to_json_string();
    let back = ReportFile::parse_str(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_json_string(), text);
    assert!(verify(&back).passed());
}
