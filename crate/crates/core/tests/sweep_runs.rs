use lambda_omega::sweep::{compare, run_point, run_sweep, RunTemplate, SweepSpec};
use lambda_omega::Classification;

fn template() -> RunTemplate {
    RunTemplate::default()
}

#[test]
fn single_point_recovers_the_minimal_speed() {
    let spec = SweepSpec { gamma_values: vec![0.0], eps_ratio_values: vec![1.0], template: template() };
    let rows = run_sweep(&spec, 1).unwrap();
    assert_eq!(rows.len(), 1);
    let (l, r) = (rows[0].measured_left.unwrap().speed, rows[0].measured_right.unwrap().speed);
    assert!((l + 2.0).abs() / 2.0 < 0.05 && (r - 2.0).abs() / 2.0 < 0.05, "({l}, {r})");
}

#[test]
fn right_speed_grows_with_convection() {
    let spec = SweepSpec { gamma_values: vec![0.0, 2.5, 5.0], eps_ratio_values: vec![1.0], template: template() };
    let rows = run_sweep(&spec, 1).unwrap();
    let right: Vec<f64> = rows.iter().map(|r| r.measured_right.unwrap().speed).collect();
    assert!(right.windows(2).all(|w| w[1] > w[0]), "{right:?}");
    // every measured pair straddles zero in the reduced frame
    assert!(rows.iter().all(|r| r.classification == Some(Classification::Absolute)));
    let summary = compare(&rows);
    assert_eq!(summary.valid_rows, 3);
    assert!(summary.rows[0].right_rel_error < 0.05);
    let strong = summary.rows.iter().find(|c| c.gamma == 5.0).unwrap();
    let measured = rows[2].measured_right.unwrap().speed;
    assert!((strong.right_rel_error - (measured - 7.0).abs() / 7.0).abs() < 1e-12);
}

#[test]
fn contaminated_run_is_retried_shorter() {
    let t = RunTemplate { x_min: -40.0, x_max: 100.0, n: 1401, t_end: 20.0, ..template() };
    let row = run_point(5.0, 1.0, &t);
    assert!(row.boundary_contaminated);
    assert_eq!(row.t_end_used, 10.0);
}

#[test]
fn hopeless_run_is_recorded_as_failed() {
    let t = RunTemplate { x_min: -10.0, x_max: 10.0, n: 201, t_end: 20.0, ..template() };
    let row = run_point(5.0, 1.0, &t);
    assert!(row.boundary_contaminated);
    assert!(row.error.as_deref().unwrap().contains("boundary"));
    let summary = compare(&[row]);
    assert!(summary.no_valid_rows);
}
