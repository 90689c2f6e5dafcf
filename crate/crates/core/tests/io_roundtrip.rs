use fleetgrid::dispatch::{run_schedule, PlanMethod};
use fleetgrid::grid::solve_baseline_opf;
use fleetgrid::io::{
    bundled_names, load_bundled, load_scenario_file, parse_fleets, parse_grid, parse_matpower, parse_report, parse_transport,
    render_human, render_json, write_fleets, write_grid, write_transport, LoadError, Report,
};

#[test]
fn ieee14_demo_shape() {
    let s = load_bundled("ieee14-demo").unwrap();
    assert_eq!(s.grid.bus_count(), 14);
    assert_eq!(s.grid.lines.len(), 20);
    assert_eq!(s.grid.generators.len(), 5);
    assert_eq!(s.transport.node_count(), 14);
    assert_eq!(s.fleets.len(), 3);
    let origins: Vec<usize> = s.fleets.iter().map(|f| f.origin).collect();
    assert_eq!(origins, [2, 7, 12]);
    let caps: Vec<f64> = s.fleets.iter().map(|f| f.p_max).collect();
    assert_eq!(caps, [20.0, 20.0, 40.0]);
    assert!((s.grid.total_capacity() - 772.4).abs() < 1e-9);
}

#[test]
fn every_bundled_scenario_solves() {
    for name in bundled_names() {
        let s = load_bundled(name).unwrap();
        solve_baseline_opf(&s.grid, &s.options.solver).unwrap();
        run_schedule(&s.grid, &s.transport, &s.fleets, &s.closures, PlanMethod::Milp, &s.options).unwrap();
    }
}

#[test]
fn loading_is_deterministic() {
    assert_eq!(load_bundled("ieee14-demo").unwrap(), load_bundled("ieee14-demo").unwrap());
}

#[test]
fn writers_round_trip_bundled_data() {
    let s = load_bundled("ieee30-demo").unwrap();
    assert_eq!(parse_grid(&write_grid(&s.grid), "g").unwrap(), s.grid);
    assert_eq!(parse_transport(&write_transport(&s.transport), "t").unwrap(), s.transport);
    assert_eq!(parse_fleets(&write_fleets(&s.fleets), "f").unwrap(), s.fleets);
}

fn scenario_dir(fleets: &str) -> tempdir::Dir {
    let s = load_bundled("ieee14-demo").unwrap();
    let dir = tempdir::Dir::new();
    dir.write("g.grid", &write_grid(&s.grid));
    dir.write("t.net", &write_transport(&s.transport));
    dir.write("f.fleet", fleets);
    dir.write(
        "s.scenario",
        "fleetgrid-scenario 1\nname from-disk\ngrid g.grid\ntransport t.net\nfleets f.fleet\n",
    );
    dir
}

#[test]
fn fleet_on_missing_bus_is_a_cross_reference_error() {
    let dir = scenario_dir("fleetgrid-fleet 1\nz 99 0 10 5\n");
    let err = load_scenario_file(&dir.path("s.scenario")).unwrap_err();
    assert!(matches!(err, LoadError::CrossReference(_)), "{err}");
    assert!(err.to_string().contains("node 99"));
}

#[test]
fn layer_mismatch_is_named() {
    let dir = scenario_dir("fleetgrid-fleet 1\n");
    dir.write("t.net", "fleetgrid-transport 1\nnodes 13\n1 2 3\n");
    let err = load_scenario_file(&dir.path("s.scenario")).unwrap_err().to_string();
    assert!(err.contains("14 buses") && err.contains("13 nodes"), "{err}");
}

#[test]
fn missing_file_is_a_read_error() {
    let dir = scenario_dir("fleetgrid-fleet 1\n");
    std::fs::remove_file(dir.path("t.net")).unwrap();
    assert!(matches!(load_scenario_file(&dir.path("s.scenario")), Err(LoadError::Read { .. })));
}

#[test]
fn solved_plan_report_round_trips_exactly() {
    let s = load_bundled("ieee14-demo").unwrap();
    let base = solve_baseline_opf(&s.grid, &s.options.solver).unwrap();
    let plan = run_schedule(&s.grid, &s.transport, &s.fleets, &s.closures, PlanMethod::Milp, &s.options).unwrap();
    let report = Report::new(&s.name, Some(base), Some(plan));
    let back = parse_report(&render_json(&report)).unwrap();
    assert_eq!(back, report);

    let plan = back.plan.unwrap();
    assert_eq!(plan.vehicles.len(), 3);
    for v in &plan.vehicles {
        if let Some(route) = &v.route {
            assert!(route.is_simple_chain());
        }
    }
    let text = render_human(&report);
    assert!(text.contains("cost reduction"));
}

#[test]
fn matpower_fixture_matches_bundled_topology() {
    let text = include_str!("data/case14.m");
    let imported = parse_matpower(text, "case14.m").unwrap();
    let bundled = load_bundled("ieee14-demo").unwrap().grid;
    assert_eq!(imported.bus_count(), 14);
    assert_eq!(imported.buses, bundled.buses);
    assert_eq!(imported.lines.len(), bundled.lines.len());
    for (a, b) in imported.lines.iter().zip(&bundled.lines) {
        assert_eq!((a.from, a.to), (b.from, b.to));
        assert!((a.susceptance - b.susceptance).abs() < 1e-5);
    }
    let caps: Vec<f64> = imported.generators.iter().map(|g| g.p_max).collect();
    assert_eq!(caps, [332.4, 140.0, 100.0, 100.0, 100.0]);
}

mod tempdir {
    use std::path::PathBuf;
    use std::sync::atomic::{AtomicUsize, Ordering};

    pub struct Dir(PathBuf);

    impl Dir {
        pub fn new() -> Self {
            static NEXT: AtomicUsize = AtomicUsize::new(0);
            let path = std::env::temp_dir().join(format!(
                "fleetgrid-io-{}-{}",
                std::process::id(),
                NEXT.fetch_add(1, Ordering::Relaxed)
            ));
            std::fs::create_dir_all(&path).unwrap();
            Dir(path)
        }

        pub fn write(&self, name: &str, text: &str) {
            std::fs::write(self.0.join(name), text).unwrap();
        }

        pub fn path(&self, name: &str) -> PathBuf {
            self.0.join(name)
        }
    }

    impl Drop for Dir {
        fn drop(&mut self) {
            let _ = std::fs::remove_dir_all(&self.0);
        }
    }
}
