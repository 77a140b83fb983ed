use sphwave::solver::config::ProblemConfig;
use sphwave::solver::demo::{scattering_demo, DemoConfig};
use sphwave::solver::sweep::{convergence_sweep, SweepAxis};
use sphwave::solver::*;
use sphwave::transform::SphericalGrid;
use sphwave::{BoundaryKind, DataSource, PointSource, Probe, ScatteringProblem};

fn manufactured(bc: BoundaryKind, order: usize, time_points: usize, k: f64) -> ScatteringProblem {
    ScatteringProblem {
        bc,
        data: DataSource::PointSources(manufactured_sources(k, k)),
        order,
        p: 8,
        time_points,
        radius: 3.0,
        time: 4.0,
        grid: None,
        probes: Vec::new(),
    }
}

#[test]
fn exact_solution_closed_form() {
    let s = PointSource::new(1.5, [0.0; 3], 0.4, 0.3, 7.0).unwrap();
    let x = [0.0, 2.0, 0.0];
    for t in [1.0, 2.4, 3.3] {
        let want = 1.5 * (-(t - 0.4 - 2.0f64).powi(2) / 0.3).exp() * (7.0 * (t - 2.0)).cos() / 2.0;
        let got = exact_solution(&[s], x, t).unwrap();
        assert!((got - want).abs() < 1e-15, "t = {t}");
    }
    assert!(exact_solution(&[s], x, -20.0).unwrap().abs() < 1e-300);
}

#[test]
fn problem_validation() {
    let mut pb = manufactured(BoundaryKind::Dirichlet, 4, 40, 5.0);
    assert!(pb.validate().is_ok());
    assert_eq!(pb.steps(), 5);
    pb.time_points = 41;
    assert!(pb.validate().is_err());
    pb.time_points = 40;
    pb.time = 1.5;
    assert!(pb.validate().is_err());
    pb.time = 4.0;
    pb.radius = 1.0;
    assert!(pb.validate().is_err());
    pb.radius = 3.0;
    pb.data = DataSource::PointSources(vec![
        PointSource::new(1.0, [0.0, 0.0, 1.2], 0.0, 0.1, 1.0).unwrap()
    ]);
    assert!(pb.validate().is_err());
}

#[test]
fn zero_data_gives_zero_field() {
    for bc in [BoundaryKind::Dirichlet, BoundaryKind::Robin] {
        let mut pb = manufactured(bc, 8, 80, 5.0);
        pb.data = DataSource::PointSources(Vec::new());
        let out = solve(&pb).unwrap();
        assert!(out.field.iter().all(|v| *v == 0.0));
        assert!(out.coefficients.values.iter().all(|c| c.norm() == 0.0));
    }
}

#[test]
fn error_decays_with_order() {
    for bc in [BoundaryKind::Dirichlet, BoundaryKind::Robin] {
        let errs: Vec<f64> = [8usize, 16, 32]
            .iter()
            .map(|&n| {
                let mut pb = manufactured(bc, n, 160, 4.0);
                pb.grid = Some((6 * 32, 8 * 32));
                solve(&pb).unwrap().rel_l2_error.unwrap()
            })
            .collect();
        println!("{bc:?}: {errs:?}");
        assert!(
            errs[1] < 0.2 * errs[0] && errs[2] < 1e-2 * errs[1],
            "{errs:?}"
        );
    }
}

#[test]
fn lower_modes_do_not_depend_on_truncation() {
    let mut small = manufactured(BoundaryKind::Robin, 6, 80, 5.0);
    small.grid = Some((40, 48));
    let mut large = small.clone();
    large.order = 10;
    let (a, b) = (solve(&small).unwrap(), solve(&large).unwrap());
    for n in 0..=6usize {
        for m in -(n as i64)..=n as i64 {
            assert_eq!(
                a.coefficients.get(n, m),
                b.coefficients.get(n, m),
                "({n}, {m})"
            );
        }
    }
}

#[test]
fn later_data_does_not_reach_earlier_output() {
    let mut pb = manufactured(BoundaryKind::Dirichlet, 8, 160, 5.0);
    pb.time = 8.0;
    pb.probes = vec![
        Probe::NORTH_POLE,
        Probe {
            theta: 2.0,
            phi: 1.0,
        },
    ];
    let base = solve(&pb).unwrap();
    let mut late = pb.clone();
    if let DataSource::PointSources(s) = &mut late.data {
        // reaches the boundary around t = 4.5, far beyond Gaussian reach before t = 2.5
        s.push(PointSource::new(3.0, [0.0, 0.0, 0.5], 4.0, 0.02, 3.0).unwrap());
    }
    let moved = solve(&late).unwrap();
    let cutoff = 2.5 + pb.radius - 1.0;
    for (x, y) in base.probes.iter().zip(&moved.probes) {
        let scale = x.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for ((t, a), b) in x.times.iter().zip(&x.values).zip(&y.values) {
            if *t <= cutoff {
                assert!((a - b).abs() <= 1e-15 * scale, "t = {t}");
            }
        }
        assert!(x
            .values
            .iter()
            .zip(&y.values)
            .any(|(a, b)| (a - b).abs() > 1e-3 * scale));
    }
}

#[test]
fn tabulated_data_reproduces_point_sources() {
    let mut pb = manufactured(BoundaryKind::Dirichlet, 8, 64, 5.0);
    let sources = manufactured_sources(5.0, 5.0);
    let grid: SphericalGrid = pb.make_grid().unwrap();
    let (dt, p) = (pb.dt(), pb.p);
    let mut times = vec![0.0];
    for k in 0..pb.steps() {
        times.extend(sphwave::march::collocation_times(p, dt, k).unwrap());
        times.push((k + 1) as f64 * dt);
    }
    let mut csv = Vec::new();
    write_tabulated(&mut csv, &grid, &times, |t, i, k| {
        exact_solution(&sources, grid.point(i, k, 1.0), t).unwrap()
    })
    .unwrap();
    let direct = solve(&pb).unwrap();
    pb.data = DataSource::Tabulated(TabulatedData::from_reader(csv.as_slice()).unwrap());
    let tab = solve(&pb).unwrap();
    let diff = relative_l2(&grid, &tab.field, &direct.field);
    assert!(diff < 1e-12, "{diff:e}");
    assert!(tab.rel_l2_error.is_none());
}

#[test]
fn tabulated_data_on_wrong_grid_is_rejected() {
    let mut pb = manufactured(BoundaryKind::Dirichlet, 4, 8, 5.0);
    let grid = SphericalGrid::new(5, 5).unwrap();
    let mut csv = Vec::new();
    write_tabulated(&mut csv, &grid, &[0.0, 0.5], |_, _, _| 0.0).unwrap();
    pb.data = DataSource::Tabulated(TabulatedData::from_reader(csv.as_slice()).unwrap());
    assert!(solve(&pb).is_err());
}

#[test]
fn single_value_sweep_matches_solve() {
    let pb = manufactured(BoundaryKind::Robin, 10, 80, 5.0);
    let table = convergence_sweep(&pb, SweepAxis::Order, &[10]).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(
        table.rows[0].rel_l2_error,
        solve(&pb).unwrap().rel_l2_error.unwrap()
    );
    let mut csv = Vec::new();
    table.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("# version="));
    assert!(text
        .lines()
        .any(|l| l == "axis,value,rel_l2_error,wall_seconds"));
    assert!(convergence_sweep(&pb, SweepAxis::Order, &[10, 8]).is_err());
}

#[test]
fn config_text_builds_problem() {
    let cfg =
        ProblemConfig::parse("bc = robin\norder = 12\nptime = 6\nsteps = 120\nk1 = 4\nk2 = 3\n")
            .unwrap();
    let pb = cfg.to_problem().unwrap();
    assert_eq!(
        (pb.bc, pb.order, pb.p, pb.time_points, pb.steps()),
        (BoundaryKind::Robin, 12, 6, 120, 20)
    );
    assert!(ProblemConfig::parse("order = twelve").is_err());
    assert!(ProblemConfig::parse("colour = blue").is_err());
    assert!(ProblemConfig::parse("steps = 125\nptime = 10")
        .unwrap()
        .to_problem()
        .is_err());
}

#[test]
fn silent_incident_field_scatters_nothing() {
    let quiet = PointSource::new(0.0, [0.0, 0.0, 2.0], 1.0, 0.1, 5.0).unwrap();
    let cfg = DemoConfig {
        sources: vec![quiet],
        order: 6,
        p: 6,
        steps_per_unit: 6.0,
        trace_radius: 3.0,
        trace_time: 4.0,
        snapshot_time: 1.5,
        annulus_radii: 3,
        annulus_angles: 5,
        ..DemoConfig::default()
    };
    let out = scattering_demo(&cfg).unwrap();
    assert!(!out.solution_trace.is_empty() && !out.annulus.is_empty());
    assert!(out.boundary_trace.iter().all(|(_, v)| *v == 0.0));
    assert!(out.solution_trace.iter().all(|(_, v)| *v == 0.0));
    assert!(out.annulus.iter().all(|(_, _, v)| *v == 0.0));
}

#[test]
#[ignore = "timing measurement"]
fn march_cost_scales_cubically() {
    let time = |n: usize| {
        let mut pb = manufactured(BoundaryKind::Dirichlet, n, 400, 5.0);
        pb.grid = Some((4 * n, 4 * n));
        (0..3)
            .map(|_| solve(&pb).unwrap().stats.march_seconds)
            .fold(f64::INFINITY, f64::min)
    };
    let ratio = time(64) / time(32);
    println!("march time ratio for doubled order: {ratio:.2}");
    assert!((5.0..=13.0).contains(&ratio), "{ratio}");
}
