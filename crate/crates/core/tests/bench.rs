use epcomm::bench::*;
use epcomm::domains::{CommModel, Scenario};

fn small_config() -> MatrixConfig {
    MatrixConfig {
        maps: vec![
            MapSpec::new(DomainKind::Gridworld, "2x2", 2),
            MapSpec::new(DomainKind::Bw4t, "rooms2", 2),
        ],
        scenarios: vec![Scenario::EpistemicGoal, Scenario::NonEpistemicGoal],
        ..MatrixConfig::default()
    }
}

#[test]
fn percentage_change_examples() {
    let p = percentage_change(100.0, 119.0).unwrap();
    assert_eq!(format!("{p:.2}"), "19.00");
    assert_eq!(percentage_change(42.0, 42.0), Some(0.0));
    assert_eq!(percentage_change(0.0, 5.0), None);
    assert!(percentage_change(20.0, 10.0).unwrap() < 0.0);
}

#[test]
fn default_matrix_has_sixty_coordinates_in_order() {
    let c = MatrixConfig::default();
    let coords = c.coordinates();
    assert_eq!(coords.len(), 60);
    assert_eq!(coords[0].map.map, "3x3");
    assert_eq!(
        (coords[0].scenario, coords[0].model),
        (Scenario::EpistemicGoal, CommModel::Selective)
    );
    assert_eq!(coords[1].model, CommModel::NoComm);
    assert_eq!(coords[3].scenario, Scenario::NonEpistemicGoal);
    assert_eq!(coords[59].map.map, "rooms6");
    assert_eq!(c.limits.max_expansions, 5_000_000);
    assert_eq!(c.limits.timeout_ms, Some(60_000));
}

#[test]
fn config_json_fills_defaults() {
    let c: MatrixConfig =
        serde_json::from_str(r#"{"seed": 9, "maps": [{"domain": "bw4t", "map": "rooms2", "agents": 2}]}"#).unwrap();
    assert_eq!(c.seed, 9);
    assert_eq!(c.maps.len(), 1);
    assert_eq!(c.scenarios.len(), 5);
    assert!(c.turn_taking);
    let back: MatrixConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
    assert_eq!(back, c);
}

#[test]
fn map_dimensions() {
    assert_eq!(
        MapSpec::new(DomainKind::Gridworld, "4x3", 4).dimensions().unwrap(),
        (4, 3)
    );
    assert_eq!(
        MapSpec::new(DomainKind::Bw4t, "rooms6", 4).dimensions().unwrap(),
        (6, 0)
    );
    assert!(MapSpec::new(DomainKind::Gridworld, "rooms6", 4).dimensions().is_err());
    assert!(MapSpec::new(DomainKind::Bw4t, "3x3", 4).dimensions().is_err());
    assert_eq!("grid".parse::<DomainKind>(), Ok(DomainKind::Gridworld));
}

#[test]
fn single_coordinate_run() {
    let c = MatrixConfig {
        maps: vec![MapSpec::new(DomainKind::Gridworld, "2x2", 2)],
        scenarios: vec![Scenario::EpistemicGoal],
        models: vec![CommModel::Selective],
        ..MatrixConfig::default()
    };
    let records = run_matrix(&c);
    assert_eq!(records.len(), 1);
    let r = &records[0];
    assert_eq!(r.outcome, Outcome::Solved);
    assert_eq!(r.plan_valid, Some(true));
    assert_eq!(r.goal_relevant_sharedness, Some(100.0));
    let m = r.metrics.as_ref().unwrap();
    assert_eq!(m.total_actions + m.noops, m.raw_length);
    assert_eq!(r.plan.as_ref().unwrap().len(), m.raw_length);
}

#[test]
fn bad_map_becomes_an_error_record() {
    let c = MatrixConfig {
        maps: vec![MapSpec::new(DomainKind::Gridworld, "zero", 2)],
        scenarios: vec![Scenario::EpistemicGoal],
        models: vec![CommModel::Selective],
        ..MatrixConfig::default()
    };
    let records = run_matrix(&c);
    assert_eq!(records[0].outcome, Outcome::Error);
    assert!(records[0].error.as_deref().unwrap().contains("zero"));
}

#[test]
fn matrix_order_and_parallelism_do_not_change_records() {
    let c = small_config();
    let parallel = run_matrix(&c);
    let serial = run_matrix(&MatrixConfig {
        jobs: Some(1),
        ..c.clone()
    });
    let coords = c.coordinates();
    assert_eq!(parallel.len(), coords.len());
    for ((a, b), k) in parallel.iter().zip(&serial).zip(&coords) {
        assert_eq!(&a.coordinate, k);
        assert_eq!(a.without_timing(), b.without_timing());
    }
}

#[test]
fn report_structure_and_csv() {
    let records = run_matrix(&small_config());
    let r = report(&records).unwrap();
    assert_eq!(r.schema, REPORT_SCHEMA);
    assert_eq!(r.domains.len(), 2);
    for d in &r.domains {
        assert_eq!(d.models.len(), 3);
        // two baselines x two headline metrics
        assert_eq!(d.changes.len(), 4);
        assert!(d.changes.iter().all(|c| Metric::HEADLINE.contains(&c.metric)));
        assert_eq!(d.scenarios.len(), 6);
        let actions = d
            .changes
            .iter()
            .find(|c| c.baseline == CommModel::NoComm && c.metric == Metric::TotalActions)
            .unwrap();
        assert_eq!(
            actions.percent,
            percentage_change(actions.selective, actions.baseline_value)
        );
    }
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["schema"], 1);

    let mut buf = Vec::new();
    write_csv(&records, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), records.len());
    assert_eq!(&rows[0][0], "gridworld");
    assert_eq!(&rows[0][4], "selective");
}

#[test]
fn report_without_pairs_is_an_error() {
    let c = MatrixConfig {
        maps: vec![MapSpec::new(DomainKind::Gridworld, "2x2", 2)],
        scenarios: vec![Scenario::EpistemicGoal],
        models: vec![CommModel::Selective],
        ..MatrixConfig::default()
    };
    assert!(matches!(report(&run_matrix(&c)), Err(BenchError::NoPairs)));
}

#[test]
fn records_round_trip_through_json() {
    let records = run_matrix(&MatrixConfig {
        maps: vec![MapSpec::new(DomainKind::Bw4t, "rooms2", 2)],
        scenarios: vec![Scenario::CommanderBroadcast],
        ..MatrixConfig::default()
    });
    let text = serde_json::to_string(&records).unwrap();
    let back: Vec<BenchRecord> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, records);
}

#[test]
fn sharedness_never_drops_along_a_plan() {
    for r in run_matrix(&small_config()) {
        let Some(m) = &r.metrics else { continue };
        let t = &m.sharedness_trajectory;
        assert!(t.windows(2).all(|w| w[0] <= w[1]), "{}: {t:?}", r.coordinate);
        assert_eq!(t.last().copied(), m.sharedness_percent);
    }
}
