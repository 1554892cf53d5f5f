use proptest::prelude::*;
use selfsim::analysis::{l1_distance_to, total_variation};
use selfsim::bvp::{diffusive_residual, solve_riemann_diffusive, ContinuationSchedule, MeshPolicy, SelfSimilarSolution};
use selfsim::models::{burgers, exact_riemann, shallow_water};
use selfsim::State;

fn s1(v: f64) -> State {
    State::from_element(1, v)
}

fn schedule() -> ContinuationSchedule {
    ContinuationSchedule::from_list(vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3]).unwrap()
}

/// Entropy solution of Burgers' equation for Riemann data, written out directly.
fn burgers_exact(ul: f64, ur: f64) -> impl Fn(f64) -> State {
    move |y| {
        let v = if ul > ur {
            if y < 0.5 * (ul + ur) {
                ul
            } else {
                ur
            }
        } else if y <= ul {
            ul
        } else if y >= ur {
            ur
        } else {
            y
        };
        s1(v)
    }
}

fn burgers_sweep(ul: f64, ur: f64) -> Vec<SelfSimilarSolution> {
    let b = burgers(0.0, 0.3, 1.0);
    solve_riemann_diffusive(&b.system, &b.diffusion, &s1(ul), &s1(ur), &schedule(), &MeshPolicy::default()).unwrap()
}

#[test]
fn burgers_shock_converges_to_the_entropy_shock() {
    let sweep = burgers_sweep(0.2, -0.2);
    let exact = burgers_exact(0.2, -0.2);
    let errors: Vec<f64> = sweep.iter().map(|s| l1_distance_to(s, &exact)).collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[4] <= 2e-2);
    let last = &sweep[4];
    assert!((last.sample(-0.5)[0] - 0.2).abs() <= 1e-3);
    assert!((last.sample(0.5)[0] + 0.2).abs() <= 1e-3);
}

#[test]
fn burgers_rarefaction_converges_to_the_fan() {
    let sweep = burgers_sweep(-0.2, 0.2);
    let exact = burgers_exact(-0.2, 0.2);
    let e = l1_distance_to(&sweep[4], &exact);
    assert!(e <= 2e-2, "{e}");
}

#[test]
fn converged_profiles_have_small_residuals_and_exact_endpoints() {
    let b = burgers(0.0, 0.3, 1.0);
    for s in burgers_sweep(0.2, -0.2) {
        assert!(s.newton_report.residual <= 1e-10);
        assert_eq!(s.left_state()[0], 0.2);
        assert_eq!(s.right_state()[0], -0.2);
        let r = diffusive_residual(&b.system, &b.diffusion, s.epsilon, &s.mesh, &s.states, &s1(0.2), &s1(-0.2)).unwrap();
        assert_eq!(r[0][0], 0.0);
        let nodes = s.mesh.nodes();
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn shock_profile_is_monotone_with_variation_equal_to_the_jump() {
    for s in burgers_sweep(0.2, -0.2) {
        assert!(s.states.windows(2).all(|w| w[1][0] <= w[0][0] + 1e-12));
        let tv = total_variation(&s);
        assert!((tv - 0.4).abs() <= 0.4 * 1e-3, "{tv}");
    }
}

#[test]
fn constant_data_gives_the_constant_profile() {
    let b = burgers(0.0, 0.3, 1.0);
    let sweep = solve_riemann_diffusive(&b.system, &b.diffusion, &s1(0.1), &s1(0.1), &schedule(), &MeshPolicy::default()).unwrap();
    for s in sweep {
        assert!(s.states.iter().all(|u| u[0] == 0.1));
        assert_eq!(s.newton_report.iterations, 0);
    }
}

#[test]
fn out_of_ball_data_is_rejected() {
    let b = burgers(0.0, 0.3, 1.0);
    let e = solve_riemann_diffusive(&b.system, &b.diffusion, &s1(0.5), &s1(0.0), &schedule(), &MeshPolicy::default()).unwrap_err();
    assert!(matches!(e.root(), selfsim::Error::StateOutOfBall { .. }));
}

#[test]
fn tiny_mesh_budget_is_reported() {
    let b = burgers(0.0, 0.3, 1.0);
    let policy = MeshPolicy {
        max_nodes: 250,
        ..MeshPolicy::default()
    };
    let e = solve_riemann_diffusive(&b.system, &b.diffusion, &s1(0.2), &s1(-0.2), &schedule(), &policy).unwrap_err();
    assert!(matches!(e, selfsim::Error::MeshBudgetExceeded { .. }), "{e}");
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let a = burgers_sweep(0.2, -0.2);
    let b = burgers_sweep(0.2, -0.2);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mesh.nodes(), y.mesh.nodes());
        assert_eq!(x.states, y.states);
    }
}

#[test]
fn dam_break_middle_state_and_variation() {
    let m = shallow_water(1.0, (1.0, 0.0), 0.1, 1.6).unwrap();
    let ul = State::from_vec(vec![1.05, 0.0]);
    let ur = State::from_vec(vec![0.95, 0.0]);
    let sweep = solve_riemann_diffusive(&m.system, &m.diffusion, &ul, &ur, &schedule(), &MeshPolicy::default()).unwrap();
    let exact = exact_riemann(&m, &ul, &ur).unwrap();
    let last = &sweep[4];
    assert!((last.sample(0.0) - &exact.states[1]).amax() <= 1e-3);
    let tv: Vec<f64> = sweep.iter().map(total_variation).collect();
    let (lo, hi) = tv.iter().fold((f64::INFINITY, 0.0f64), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!((hi - lo) / lo <= 0.2);
    assert!(hi / 0.1 <= 5.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn monotone_scalar_profiles_telescope(ul in -0.25f64..0.25, ur in -0.25f64..0.25) {
        prop_assume!((ul - ur).abs() > 0.02);
        let b = burgers(0.0, 0.3, 1.0);
        let sched = ContinuationSchedule::from_list(vec![1e-1, 1e-2, 3e-3]).unwrap();
        let sweep = solve_riemann_diffusive(&b.system, &b.diffusion, &s1(ul), &s1(ur), &sched, &MeshPolicy::default()).unwrap();
        for s in &sweep {
            let tv = total_variation(s);
            prop_assert!((tv - (ur - ul).abs()).abs() <= (ur - ul).abs() * 1e-3);
            prop_assert!(s.states.iter().all(|u| u[0] >= ul.min(ur) - 1e-9 && u[0] <= ul.max(ur) + 1e-9));
        }
    }
}
