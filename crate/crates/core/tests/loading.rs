use std::io::Write;

use depthguard::{load_dataset, DepthError};
use tempfile::NamedTempFile;

fn file(contents: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn round_trips_a_csv_with_header() {
    let f = file("x,y\n1.5, -2\n0,3e2\n");
    let data = load_dataset(f.path(), true).unwrap();
    assert_eq!((data.n(), data.d()), (2, 2));
    assert_eq!(data.row(0), &[1.5, -2.0]);
    assert_eq!(data.row(1), &[0.0, 300.0]);
}

#[test]
fn header_line_is_data_unless_flagged() {
    let f = file("x,y\n1,2\n");
    assert!(matches!(
        load_dataset(f.path(), false),
        Err(DepthError::Input { row: 0, .. })
    ));
}

#[test]
fn ragged_rows_are_rejected() {
    let f = file("1,2\n3\n");
    assert!(matches!(
        load_dataset(f.path(), false),
        Err(DepthError::Input { row: 1, .. })
    ));
}

#[test]
fn empty_and_missing_files_fail() {
    assert!(matches!(
        load_dataset(file("").path(), false),
        Err(DepthError::EmptyInput)
    ));
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        load_dataset(dir.path().join("none.csv"), false),
        Err(DepthError::Io(_))
    ));
}
