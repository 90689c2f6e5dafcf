use std::collections::BTreeSet;

use fleetgrid::dispatch::{
    brute_force_dispatch, build_dispatch_model, solve_dispatch, Assignment, DispatchError, DispatchOptions, DispatchPlan,
    VehicleFleet,
};
use fleetgrid::grid::{self, random_case, GridCase};
use fleetgrid::milp::solve_milp;
use fleetgrid::transport::{all_pairs_costs, random_network};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    case: GridCase,
    fleets: Vec<VehicleFleet>,
}

fn instance_strategy() -> impl Strategy<Value = Instance> {
    (3usize..=6, 0usize..=3, any::<u64>(), 0usize..=2).prop_flat_map(|(n, extra, seed, fleets)| {
        let fleet = (1..=n, 0u32..=60, 5u32..=40, prop::bool::weighted(0.2), prop::collection::btree_set(1..=n, 0..n));
        (Just((n, extra, seed)), prop::collection::vec(fleet, fleets))
    })
    .prop_map(|((n, extra, seed), specs)| {
        let case = random_case(n, extra, seed);
        let net = random_network(n, n, true, 1..=12, seed ^ 0x5eed);
        let origins: Vec<usize> = specs.iter().map(|s| s.0).collect();
        let table = all_pairs_costs(&net, &origins).unwrap();
        let fleets = specs
            .into_iter()
            .enumerate()
            .map(|(k, (origin, price, p_max, floor, mut excluded))| {
                excluded.remove(&origin);
                VehicleFleet {
                    id: format!("f{k}"),
                    origin,
                    p_min: if floor { 2.0 } else { 0.0 },
                    p_max: p_max.into(),
                    energy_cost: price.into(),
                    travel_costs: table.costs[k].clone(),
                    excluded,
                }
            })
            .collect();
        Instance { case, fleets }
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0)
}

fn check_plan(inst: &Instance, plan: &DispatchPlan) -> Result<(), TestCaseError> {
    let violations = grid::validate_state(&inst.case, &plan.grid, 1e-6);
    prop_assert!(violations.is_empty(), "{violations:?}");
    let supply: f64 = plan.grid.gen_setpoints.iter().chain(&plan.grid.injections).sum();
    prop_assert!((supply - inst.case.total_load()).abs() <= 1e-6);
    prop_assert!((plan.objective - plan.breakdown.total()).abs() <= 1e-6);
    for (v, f) in plan.vehicles.iter().zip(&inst.fleets) {
        let picked: f64 = v.selection.iter().sum();
        prop_assert!(picked.abs() <= 1e-6 || (picked - 1.0).abs() <= 1e-6, "Σz = {picked}");
        for &i in &f.excluded {
            prop_assert!(v.selection[i - 1].abs() <= 1e-6);
        }
        match v.destination {
            Assignment::Undispatched => prop_assert!(v.injection.abs() <= 1e-6),
            Assignment::Node(i) => {
                prop_assert!(!f.excluded.contains(&i));
                prop_assert!((v.injection - v.setpoint).abs() <= 1e-6);
            }
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn envelope_formulation_matches_enumeration(inst in instance_strategy(), aggregate_cut in any::<bool>()) {
        let opts = DispatchOptions {
            aggregate_cut,
            ..DispatchOptions::default()
        };
        let milp = solve_dispatch(&inst.case, &inst.fleets, &opts);
        let brute = brute_force_dispatch(&inst.case, &inst.fleets, &opts);
        match (milp, brute) {
            (Ok(m), Ok(b)) => {
                prop_assert!(close(m.objective, b.objective), "milp {} vs enumeration {}", m.objective, b.objective);
                check_plan(&inst, &m)?;
                check_plan(&inst, &b)?;
            }
            (Err(DispatchError::Infeasible { subsystem: a }), Err(DispatchError::Infeasible { subsystem: b })) => {
                prop_assert_eq!(a, b);
            }
            (m, b) => prop_assert!(false, "milp {m:?} vs enumeration {b:?}"),
        }
    }

    #[test]
    fn injection_equals_power_times_selection(inst in instance_strategy(), aggregate_cut in any::<bool>()) {
        let opts = DispatchOptions {
            aggregate_cut,
            ..DispatchOptions::default()
        };
        let dm = build_dispatch_model(&inst.case, &inst.fleets, &opts).unwrap();
        let sol = solve_milp(&dm.model).unwrap();
        if sol.is_optimal() {
            for fv in &dm.fleets {
                let p = sol.value(fv.power);
                for (&z, &y) in fv.select.iter().zip(&fv.injection) {
                    prop_assert!((sol.value(y) - p * sol.value(z)).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn adding_idle_capable_fleet_never_hurts(inst in instance_strategy(), price in 0u32..=60, p_max in 5u32..=40) {
        let opts = DispatchOptions::default();
        let Ok(before) = solve_dispatch(&inst.case, &inst.fleets, &opts) else {
            return Ok(());
        };
        let n = inst.case.bus_count();
        let mut fleets = inst.fleets.clone();
        let mut travel = vec![Some(3.0); n];
        travel[0] = Some(0.0);
        fleets.push(VehicleFleet {
            id: "extra".into(),
            origin: 1,
            p_min: 0.0,
            p_max: p_max.into(),
            energy_cost: price.into(),
            travel_costs: travel,
            excluded: BTreeSet::new(),
        });
        let after = solve_dispatch(&inst.case, &fleets, &opts).unwrap();
        prop_assert!(after.objective <= before.objective + 1e-6 * before.objective.abs().max(1.0));
    }
}

#[test]
fn enumeration_counts_one_lp_per_assignment() {
    let case = random_case(4, 1, 11);
    let fleet = VehicleFleet {
        id: "a".into(),
        origin: 2,
        p_min: 0.0,
        p_max: 10.0,
        energy_cost: 5.0,
        travel_costs: vec![Some(4.0), Some(0.0), None, None],
        excluded: BTreeSet::from([3, 4]),
    };
    let plan = brute_force_dispatch(&case, &[fleet], &DispatchOptions::default()).unwrap();
    assert_eq!(plan.stats.nodes_explored, 3);
}

#[test]
fn enumeration_cap_is_a_resource_error() {
    let case = random_case(6, 2, 3);
    let fleet = VehicleFleet {
        id: "a".into(),
        origin: 1,
        p_min: 0.0,
        p_max: 10.0,
        energy_cost: 5.0,
        travel_costs: vec![Some(0.0), Some(1.0), Some(1.0), Some(1.0), Some(1.0), Some(1.0)],
        excluded: BTreeSet::new(),
    };
    let opts = DispatchOptions {
        enumeration_cap: 6,
        ..DispatchOptions::default()
    };
    let other = VehicleFleet {
        id: "b".into(),
        ..fleet.clone()
    };
    let err = brute_force_dispatch(&case, &[fleet, other], &opts).unwrap_err();
    assert!(matches!(err, DispatchError::EnumerationCap { count: 49, cap: 6 }));
    assert!(err.is_resource_limit());
}

#[test]
fn enumeration_is_deterministic() {
    let mut case = random_case(5, 2, 21);
    for line in &mut case.lines {
        line.flow_min = f64::NEG_INFINITY;
        line.flow_max = f64::INFINITY;
    }
    let net = random_network(5, 4, true, 1..=12, 21);
    let table = all_pairs_costs(&net, &[2, 4]).unwrap();
    let fleets: Vec<VehicleFleet> = [2, 4]
        .iter()
        .enumerate()
        .map(|(k, &origin)| VehicleFleet {
            id: format!("f{k}"),
            origin,
            p_min: 0.0,
            p_max: 15.0,
            energy_cost: 12.0,
            travel_costs: table.costs[k].clone(),
            excluded: BTreeSet::new(),
        })
        .collect();
    let opts = DispatchOptions::default();
    let mut a = brute_force_dispatch(&case, &fleets, &opts).unwrap();
    let mut b = brute_force_dispatch(&case, &fleets, &opts).unwrap();
    a.stats.wall_time = 0.0;
    b.stats.wall_time = 0.0;
    assert_eq!(a, b);
}
