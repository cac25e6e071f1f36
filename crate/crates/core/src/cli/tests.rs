use super::*;
use crate::scenario::print_scenario;

const FIXTURES: [&str; 6] = [
    "concentric",
    "figure10",
    "offset_inclusion",
    "square_orbit",
    "ellipse",
    "trace_zero",
];

fn fixture(name: &str) -> Scenario {
    let path = format!("{}/../../scenarios/{name}.cfg", env!("CARGO_MANIFEST_DIR"));
    parse_scenario(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn polylines(svg: &str) -> Vec<usize> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline") && l.contains("stroke-width=\"1\""))
        .map(|l| l.split('"').nth(1).unwrap().split(' ').count())
        .collect()
}

#[test]
fn fixtures_round_trip() {
    for name in FIXTURES {
        let sc = fixture(name);
        let back = parse_scenario(&print_scenario(&sc)).unwrap();
        assert_eq!(back, sc, "{name}");
    }
}

#[test]
fn grid_and_overrides() {
    assert_eq!(parse_grid("128x64"), Ok((128, 64)));
    assert_eq!(parse_grid("3X2"), Ok((3, 2)));
    assert!(parse_grid("128").is_err());
    assert!(parse_grid("0x4").is_err());

    let mut sc = fixture("concentric");
    let o = Overrides {
        grid: Some((8, 4)),
        depth: Some(3),
        horizon: Some(7.5),
        seed: Some(11),
        max_events: Some(99),
        max_iter: Some(5),
    };
    o.apply(&mut sc).unwrap();
    assert_eq!((sc.sampling.n_s, sc.sampling.n_theta, sc.sampling.seed), (8, 4, 11));
    assert_eq!((sc.caps.depth_cap, sc.caps.max_events, sc.caps.max_iter), (3, 99, 5));
    assert_eq!(sc.horizon, 7.5);
    assert!(Overrides {
        horizon: Some(-1.0),
        ..Overrides::default()
    }
    .apply(&mut sc)
    .is_err());
}

#[test]
fn command_line_parsing() {
    let cli = Cli::try_parse_from([
        "raysplit",
        "check-obs",
        "--scenario",
        "a.cfg",
        "--out",
        "o",
        "--grid",
        "4x2",
        "--depth",
        "2",
    ])
    .unwrap();
    let (kind, args) = cli.command.split();
    assert_eq!(kind, Kind::CheckObs);
    assert_eq!(args.overrides.grid, Some((4, 2)));
    assert_eq!(args.overrides.depth, Some(2));
    assert!(Cli::try_parse_from(["raysplit", "frobnicate"]).is_err());
    assert!(Cli::try_parse_from(["raysplit", "trace", "--out", "o"]).is_err());
}

#[test]
fn exit_code_matrix() {
    let cases = [
        ("concentric", Kind::CheckObs, EXIT_OK),
        ("concentric", Kind::CheckUeg, EXIT_OK),
        ("figure10", Kind::CheckObs, EXIT_TRAPPED),
        ("figure10", Kind::CheckTrap, EXIT_TRAPPED),
        ("figure10", Kind::CheckUeg, EXIT_UNDETERMINED),
        ("offset_inclusion", Kind::Construct, EXIT_OK),
        ("square_orbit", Kind::CheckGcc, EXIT_TRAPPED),
        ("ellipse", Kind::Ellipse, EXIT_OK),
        ("trace_zero", Kind::Trace, EXIT_OK),
    ];
    for (name, kind, code) in cases {
        let out = execute(kind, &fixture(name)).unwrap();
        assert_eq!(out.code, code, "{name} {}", kind.name());
        let report = out.file("report.txt").unwrap();
        assert!(report.starts_with(&format!("subcommand: {}\n", kind.name())));
        assert!(report.ends_with(&format!("exit: {code}\n")));
    }
    // Starved horizon: nothing is observed and no orbit closes in time.
    let mut sc = fixture("concentric");
    sc.horizon = 0.5;
    assert_eq!(execute(Kind::CheckObs, &sc).unwrap().code, EXIT_UNDETERMINED);
    let mut sc = fixture("square_orbit");
    sc.observation = Observation::Full;
    assert_eq!(execute(Kind::CheckGcc, &sc).unwrap().code, EXIT_OK);
}

#[test]
fn validation_failures() {
    let needs = [
        ("concentric", Kind::Trace),
        ("concentric", Kind::CheckGcc),
        ("concentric", Kind::Ellipse),
        ("figure10", Kind::Construct),
        ("ellipse", Kind::Construct),
    ];
    for (name, kind) in needs {
        assert!(
            matches!(execute(kind, &fixture(name)), Err(Error::Validation(_))),
            "{name} {}",
            kind.name()
        );
    }
}

#[test]
fn observability_artifacts() {
    let out = execute(Kind::CheckObs, &fixture("concentric")).unwrap();
    let report = out.file("report.txt").unwrap();
    assert!(report.contains("summary: all 1440 samples observed, max time "), "{report}");
    let csv = out.file("observability.csv").unwrap();
    assert_eq!(csv.lines().count(), 1441);
    assert!(csv.starts_with("boundary,medium,s,theta,verdict,time,depth\n"));

    let out = execute(Kind::CheckObs, &fixture("figure10")).unwrap();
    let svg = out.file("observability.svg").unwrap();
    assert!(!polylines(svg).is_empty());
}

#[test]
fn trace_at_zero_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let code = run(Kind::Trace, &fixture("trace_zero"), dir.path()).unwrap();
    assert_eq!(code, EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(dir.path().join("report.txt").exists() && dir.path().join("trace.svg").exists());
}

#[test]
fn construction_figure_has_two_arcs_per_iterate() {
    let out = execute(Kind::Construct, &fixture("offset_inclusion")).unwrap();
    let iterates = out.file("construction.csv").unwrap().lines().count() - 1;
    let svg = out.file("construction.svg").unwrap();
    assert!(iterates >= 2);
    assert_eq!(svg.matches("<polygon").count(), 2);
    assert_eq!(svg.matches("stroke-width=\"5\"").count(), 2 * iterates);
}

#[test]
fn trapped_orbit_figure() {
    let mut sc = fixture("figure10");
    sc.sampling.n_s = 64;
    sc.sampling.n_theta = 64;
    sc.horizon = 100.0;
    let out = execute(Kind::CheckTrap, &sc).unwrap();
    assert_eq!(out.code, EXIT_TRAPPED);
    let csv = out.file("orbits.csv").unwrap();
    let b = (4.0 / 3.0, 4.0 * 2f64.sqrt() / 3.0);
    let orbit: usize = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|f| {
            let (x, y): (f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap());
            (x - b.0).hypot(y - b.1) < 1e-6
        })
        .map(|f| f[0].parse().unwrap())
        .expect("orbit through B");
    let counts = polylines(out.file("orbits.svg").unwrap());
    assert_eq!(counts[orbit], 4);
}

#[test]
fn outputs_are_deterministic() {
    for (name, kind) in [
        ("concentric", Kind::CheckObs),
        ("figure10", Kind::CheckObs),
        ("ellipse", Kind::Ellipse),
        ("offset_inclusion", Kind::Construct),
    ] {
        let sc = fixture(name);
        assert_eq!(execute(kind, &sc).unwrap(), execute(kind, &sc).unwrap(), "{name}");
    }
    let mut sc = fixture("ellipse");
    let a = execute(Kind::Ellipse, &sc).unwrap();
    sc.sampling.seed += 1;
    let b = execute(Kind::Ellipse, &sc).unwrap();
    assert_ne!(a.file("caustics.csv"), b.file("caustics.csv"));
}
