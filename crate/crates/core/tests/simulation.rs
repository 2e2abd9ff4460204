//! The simulator against the analytic results it is meant to check.

use quayside::distributions::ServiceDistribution;
use quayside::lst_inversion::InversionSpec;
use quayside::sim_oracle::{simulate_mg1, simulate_priority, SimConfig};
use quayside::traffic::{reference_scenario, traffic_coefficients, PreemptionDiscipline};
use quayside::waiting_time::{traffic_intensity, wait_cdf, Discipline};

const ARRIVALS: usize = 1_000_000;

fn law(s: &str) -> ServiceDistribution {
    s.parse().unwrap()
}

#[test]
fn identical_config_gives_identical_results() {
    let cfg = SimConfig::new(99, 50_000).with_grid(vec![0.0, 1.0, 4.0]);
    for disc in [Discipline::Fifo, Discipline::Lifo] {
        let a = simulate_mg1(&law("gamma3(4)"), 1.0, disc, &cfg).unwrap();
        assert_eq!(a, simulate_mg1(&law("gamma3(4)"), 1.0, disc, &cfg).unwrap());
    }
    let sc = reference_scenario("4.4.3").unwrap();
    let a = simulate_priority(&sc, &cfg).unwrap();
    assert_eq!(a, simulate_priority(&sc, &cfg).unwrap());
}

#[test]
fn idle_fraction_seen_by_arrivals() {
    let cases = [
        ("exp(5)", 4.0),
        ("unif(1,5)", 0.2),
        ("erlang2(2)", 0.6),
        ("gamma3(3)", 0.5),
    ];
    for (i, (d, a)) in cases.iter().enumerate() {
        let d = law(d);
        let rho = traffic_intensity(&d, *a);
        let cfg = SimConfig::new(10 + i as u64, ARRIVALS).with_grid(vec![0.0]);
        for disc in [Discipline::Fifo, Discipline::Lifo] {
            let r = simulate_mg1(&d, *a, disc, &cfg).unwrap();
            let p0 = r.ecdf[0].value;
            assert!(
                (p0 - (1.0 - rho)).abs() <= 0.01,
                "{d} {disc}: P(W=0) {p0} vs {}",
                1.0 - rho
            );
            assert!((r.utilization_prefix[0].value - rho).abs() <= 0.01);
        }
    }
}

#[test]
fn simulated_distribution_matches_inversion() {
    let spec = InversionSpec::default();
    let grid = vec![0.5, 1.0, 2.0, 5.0, 10.0];
    for (seed, (d, a)) in [("exp(5)", 4.0), ("unif(1,5)", 0.2), ("erlang2(2)", 0.6)]
        .iter()
        .enumerate()
    {
        let d = law(d);
        let cfg = SimConfig::new(20 + seed as u64, ARRIVALS).with_grid(grid.clone());
        for disc in [Discipline::Fifo, Discipline::Lifo] {
            let r = simulate_mg1(&d, *a, disc, &cfg).unwrap();
            assert!(r.ecdf.windows(2).all(|w| w[0].value <= w[1].value));
            for p in &r.ecdf {
                let exact = wait_cdf(disc, &d, *a, p.x, &spec).unwrap().value;
                assert!(
                    (p.value - exact).abs() <= 0.01,
                    "{d} {disc} x={}: simulated {} +/- {} vs inverted {exact}",
                    p.x,
                    p.value,
                    p.half_width
                );
            }
        }
    }
}

#[test]
fn utilization_matches_traffic_coefficients() {
    for id in ["4.3.1", "4.4.1", "4.4.3", "4.5.1"] {
        let sc = reference_scenario(id).unwrap();
        let exact = traffic_coefficients(&sc).unwrap().rhos();
        let r = simulate_priority(&sc, &SimConfig::new(7, ARRIVALS)).unwrap();
        for (k, (u, rho)) in r.utilization_prefix.iter().zip(&exact).enumerate() {
            assert!(
                (u.value - rho).abs() <= 0.01,
                "{id} class {}: {} vs {rho}",
                k + 1,
                u.value
            );
            assert!((0.0..=1.0).contains(&u.value));
        }
        assert!(r.utilization_prefix.windows(2).all(|w| w[0].value <= w[1].value));
        let losses: u64 = r.lost.iter().sum();
        assert_eq!(losses > 0, sc.discipline() == PreemptionDiscipline::Loss, "{id}");
    }
}

#[test]
fn resume_conserves_work() {
    let sc = reference_scenario("4.3.1").unwrap();
    let r = simulate_priority(&sc, &SimConfig::new(3, ARRIVALS)).unwrap();
    let diag = r.diagnostics;
    assert!(diag.max_service_overshoot <= 1e-9, "{}", diag.max_service_overshoot);
    assert!((diag.served_time - diag.busy_time).abs() <= 1e-9 * diag.busy_time);
    let whole_run = diag.served_time / diag.run_length;
    let windowed = r.utilization_prefix.last().unwrap().value;
    assert!((whole_run - windowed).abs() <= 0.01, "{whole_run} vs {windowed}");
}

#[test]
fn overloaded_scenarios_are_refused_by_class() {
    for (id, class) in [("4.3.3", 5), ("4.5.4", 4), ("4.4.2", 1)] {
        let sc = reference_scenario(id).unwrap();
        let err = simulate_priority(&sc, &SimConfig::new(1, 10_000)).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert!(err.to_string().contains(&format!("class {class} ")), "{id}: {err}");
    }
}
