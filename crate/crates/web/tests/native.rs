use polylab_web::{airy_table, row_sums, scaling_scan};

#[test]
fn staircase_row_sums_are_catalan() {
    let csv = row_sums("staircase", 8).unwrap();
    let last = csv.lines().last().unwrap();
    assert_eq!(last, "8,429");
    assert!(row_sums("staircase", 100).is_err());
    assert!(row_sums("hexagons", 4).is_err());
}

#[test]
fn airy_first_moment_is_root_pi() {
    let csv = airy_table(3).unwrap();
    let row1: Vec<f64> = csv.lines().nth(2).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!((row1[1] - std::f64::consts::PI.sqrt()).abs() < 1e-11);
    assert_eq!(row1[2], 1.0);
    assert!(row1[3] < 1.0);
}

#[test]
fn squares_scan_runs() {
    let csv = scaling_scan("squares", "0.5, 1", "1e-2").unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(scaling_scan("squares", "a", "1e-2").is_err());
}
