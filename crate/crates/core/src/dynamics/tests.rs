use super::identities::*;
use super::oracle::*;
use super::*;
use crate::graph::{attach_tails, build_graph};
use crate::kernel::find_reversible_measure;
use crate::models::{closed_form_nonreversible, closed_form_reversible, make_c3pk, C3PkSpec};
use crate::scalar::norm_sq;
use approx::assert_relative_eq;
use nalgebra::DMatrix;

type C64 = C<f64>;

fn cr(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn grover() -> crate::models::C3PkInstance<f64> {
    make_c3pk(C3PkSpec::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1).unwrap())
}

fn nonrev() -> crate::models::C3PkInstance<f64> {
    make_c3pk(C3PkSpec::new(0.5, 1.0 / 6.0, 1.0 / 3.0, 1).unwrap())
}

#[test]
fn local_coin_examples() {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let swap = local_coin(&[cr(s), cr(s)]).unwrap();
    let expect = DMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
    assert!((swap - expect).iter().all(|z| z.norm() < 1e-15));

    let refl = local_coin(&[cr(1.0), cr(0.0)]).unwrap();
    let expect = DMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]);
    assert!((refl - expect).iter().all(|z| z.norm() < 1e-15));

    let t = 1.0 / 3.0_f64.sqrt();
    let grover_coin = local_coin(&[cr(t), cr(t), cr(t)]).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { -1.0 / 3.0 } else { 2.0 / 3.0 };
            assert_relative_eq!(grover_coin[(i, j)].re, want, epsilon = 1e-14);
        }
    }

    assert!(matches!(
        local_coin(&[cr(1.0), cr(0.5)]),
        Err(DynamicsError::NonUnitCoinVector { .. })
    ));
}

#[test]
fn coin_is_selfadjoint_involution() {
    // random-ish complex unit vectors
    let raw = [
        vec![cr(0.3), C64::new(0.2, -0.4), C64::new(-0.1, 0.7), cr(0.45)],
        vec![C64::new(0.6, 0.1), C64::new(-0.3, 0.2)],
    ];
    for v in raw {
        let norm = norm_sq(&v).sqrt();
        let u: Vec<C64> = v.iter().map(|z| z / norm).collect();
        let coin = local_coin(&u).unwrap();
        let herm = (coin.clone() - coin.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(herm < 1e-12);
        let sq = &coin * &coin;
        let eye = DMatrix::<C64>::identity(u.len(), u.len());
        let inv = (sq - eye).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(inv < 1e-12);
    }
}

#[test]
fn transport_on_half_half_cycle() {
    // 4-cycle with p = 1/2 everywhere: U is pure transport along each ring
    let g = build_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    let u = UnitaryEvolution::new(g.clone(), &vec![0.5; 8]);
    let mut psi = vec![cr(0.0); 8];
    psi[0] = cr(1.0); // arc 0->1
    let stepped = u.evolve(&psi, 1);
    // the amplitude moves to the unique arc continuing from vertex 1 away from 0
    let next_arc = g
        .arc_ids()
        .find(|&a| g.origin(a) == 1 && g.terminus(a) != 0)
        .unwrap();
    assert_eq!(stepped[next_arc], cr(1.0));
    assert_eq!(stepped.iter().filter(|z| z.norm() > 0.0).count(), 1);
    // and fully around the 4-cycle returns exactly
    assert_eq!(u.evolve(&psi, 4), psi);
}

#[test]
fn unitarity_on_random_states() {
    let inst = grover();
    let trunc = crate::graph::truncate(&inst.tg, 6).unwrap();
    let probs = truncated_probabilities(&inst.tg, &inst.kernel, &trunc);
    let u = UnitaryEvolution::new(trunc.graph.clone(), &probs);
    let n = trunc.graph.arc_count();
    // deterministic pseudo-random states
    let mut seed = 0x9e3779b97f4a7c15u64;
    let mut rand = || {
        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for _ in 0..100 {
        let psi: Vec<C64> = (0..n).map(|_| C64::new(rand(), rand())).collect();
        let out = u.evolve(&psi, 1);
        assert_relative_eq!(norm_sq(&out), norm_sq(&psi), max_relative = 1e-12);
    }
    // zero maps to zero
    assert!(u.evolve(&vec![cr(0.0); n], 3).iter().all(|z| z.norm() == 0.0));
}

#[test]
fn rho_support_and_linearity() {
    let inst = grover();
    let sys = InducedSystem::build(&inst.tg, &inst.kernel, &inst.alpha).unwrap();
    let g = inst.tg.internal();
    for a in g.arc_ids() {
        let expected_support = g.origin(a) == 0; // only tail 1 carries inflow
        assert_eq!(sys.rho()[a].norm() > 0.0, expected_support, "arc {a}");
    }
    // alpha = 0 gives rho = 0
    let sys0 = InducedSystem::build(&inst.tg, &inst.kernel, &[cr(0.0), cr(0.0)]).unwrap();
    assert!(sys0.rho().iter().all(|z| z.norm() == 0.0));
    // rho(a) = 2 sqrt(p(a) p(ē_j)) α_j at the attach vertex
    let expect = 2.0 * (1.0 / 3.0_f64).sqrt() * (1.0 / 3.0_f64).sqrt();
    assert_relative_eq!(sys.rho()[0].re, expect, epsilon = 1e-15);
}

#[test]
fn exceptional_two_tail_input_gives_exact_zero() {
    // two tails on one vertex with equal conductances; α = (√m_E2, -√m_E1)
    // makes the boundary coin input vanish identically
    let g = build_graph(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    let tg = attach_tails(g, &[0, 0]).unwrap();
    let r = 0.2;
    let p = (1.0 - 2.0 * r) / 2.0;
    let kernel: crate::kernel::TransitionKernel<f64> =
        crate::kernel::TransitionKernel::new(&tg, vec![p, 0.5, p, 0.5, 0.5, 0.5], vec![r, r])
            .unwrap();
    let m = find_reversible_measure(&tg, &kernel).measure().unwrap().clone();
    assert_eq!(m.boundary_edge[0], m.boundary_edge[1]);
    let root = m.boundary_edge[0].sqrt();
    let alpha = [cr(root), cr(-root)];
    let sys = InducedSystem::build(&tg, &kernel, &alpha).unwrap();
    assert!(sys.rho().iter().all(|z| z == &cr(0.0)), "rho must vanish exactly");
    let it = iterate(&sys, 1000, 1e-10).unwrap();
    assert_eq!(it.iterations, 0);
    assert!(it.psi.iter().all(|z| z == &cr(0.0)));
}

#[test]
fn grover_stationary_state_matches_closed_form() {
    let inst = grover();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    let cf = closed_form_reversible(1.0 / 3.0, 1).unwrap();
    let expected = cf.as_arc_field(&inst.labels, inst.tg.internal().arc_count());
    for (a, (&got, &want)) in report.psi.internal.iter().zip(&expected).enumerate() {
        assert!((got - want).norm() < 1e-9, "arc {a}: {got} vs {want}");
    }
    // perfect transmission
    assert!((report.psi.outflow[0] - cr(0.0)).norm() < 1e-9);
    assert!((report.psi.outflow[1] - cr(1.0)).norm() < 1e-9);
    assert!(report.fixed_point_residual < 1e-9);
    assert!(report.cross_method_gap.unwrap() < 1e-8);
    // rank deficiency equals the cycle count (one triangle)
    assert_eq!(report.kernel_dimension, Some(1));
}

#[test]
fn nonreversible_stationary_state_matches_closed_form() {
    let inst = nonrev();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    let cf = closed_form_nonreversible(0.5, 1.0 / 6.0, 1.0 / 3.0).unwrap();
    let expected = cf.as_arc_field(&inst.labels, inst.tg.internal().arc_count());
    for (a, (&got, &want)) in report.psi.internal.iter().zip(&expected).enumerate() {
        assert!((got - want).norm() < 1e-8, "arc {a}: {got} vs {want}");
    }
    // perfect reflection with phase flip
    assert!((report.psi.outflow[0] + inst.alpha[0]).norm() < 1e-8);
    assert!((report.psi.outflow[1] + inst.alpha[1]).norm() < 1e-8);

    let res = nonreversible_residuals(&inst.tg, &inst.kernel, &report.psi);
    assert!(res.antisymmetry < 1e-9);
    assert!(res.weighted_vertex_sums < 1e-9);
    assert!(res.phase_flip < 1e-8);
}

#[test]
fn iterate_agrees_with_direct_solve_on_random_reversible_instance() {
    // fixed 4-vertex reversible instance from edge weights
    let g = build_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
    let tg = attach_tails(g, &[1, 3]).unwrap();
    let w = [0.7, 1.3, 0.4, 1.1, 0.9]; // edge conductances
    let wb = [0.8, 0.6]; // boundary conductances
    let g = tg.internal();
    let mut m_v = vec![0.0; 4];
    for e in 0..g.edge_count() {
        m_v[g.origin(2 * e)] += w[e];
        m_v[g.terminus(2 * e)] += w[e];
    }
    m_v[1] += wb[0];
    m_v[3] += wb[1];
    let probs: Vec<f64> = g.arc_ids().map(|a| w[g.edge_of(a)] / m_v[g.origin(a)]).collect();
    let kernel =
        crate::kernel::TransitionKernel::new(&tg, probs, vec![wb[0] / m_v[1], wb[1] / m_v[3]])
            .unwrap();
    let alpha = [C64::new(0.4, -0.3), C64::new(-0.2, 0.9)];
    let sys = InducedSystem::build(&tg, &kernel, &alpha).unwrap();
    let it = iterate(&sys, 200_000, 1e-12).unwrap();
    let ds = direct_solve(&sys).unwrap();
    let gap = crate::scalar::inf_norm_diff(&it.psi, &ds.psi);
    assert!(gap < 1e-8, "gap {gap}");
    assert!(sys.fixed_point_residual(&it.psi) < 1e-9);
    assert!(sys.fixed_point_residual(&ds.psi) < 1e-9);
    // rank deficiency matches the cycle count in the reversible case
    assert_eq!(ds.kernel_dimension, crate::graph::cycle_basis(g).len());
}

#[test]
fn epon_is_a_contraction() {
    for inst in [grover(), nonrev()] {
        let sys = InducedSystem::build(&inst.tg, &inst.kernel, &inst.alpha).unwrap();
        let norm = crate::linalg::operator_norm(sys.epon_dense());
        assert!(norm <= 1.0 + 1e-12, "operator norm {norm}");
    }
}

#[test]
fn truncated_oracle_matches_iteration_bit_for_bit() {
    for inst in [grover(), nonrev()] {
        let sys = InducedSystem::build(&inst.tg, &inst.kernel, &inst.alpha).unwrap();
        let n_arcs = inst.tg.internal().arc_count();

        // n = 0: nothing has entered the internal graph yet
        let run0 = truncated_evolution_oracle(&inst.tg, &inst.kernel, &inst.alpha, 0).unwrap();
        assert!(run0.internal(n_arcs).iter().all(|z| z.norm() == 0.0));

        // manual induced iteration to step n, compared exactly
        for n in [1, 2, 5, 17] {
            let run = truncated_evolution_oracle(&inst.tg, &inst.kernel, &inst.alpha, n).unwrap();
            let mut psi = vec![cr(0.0); n_arcs];
            let mut next = vec![cr(0.0); n_arcs];
            let mut ws = sys.workspace();
            for _ in 0..n {
                sys.step(&psi, &mut next, &mut ws);
                std::mem::swap(&mut psi, &mut next);
            }
            assert_eq!(run.internal(n_arcs), psi.as_slice(), "step {n}");
        }
    }
}

#[test]
fn truncated_norm_tracks_inflow_supply() {
    // ‖Ψ_n‖² on the truncated graph equals Σ_j |α_j|² (n+2): the initial
    // fill of the inbound arcs, preserved by unitarity
    let inst = grover();
    for n in [0, 3, 10, 25] {
        let run = truncated_evolution_oracle(&inst.tg, &inst.kernel, &inst.alpha, n).unwrap();
        let total = norm_sq(&run.psi);
        let expected = (n + 2) as f64; // |α| = (1, 0)
        assert_relative_eq!(total, expected, max_relative = 1e-12);
    }
}

#[test]
fn grover_mu_and_mass() {
    let inst = grover();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    // vertex 2 is opposite the tails: incoming b_2, b̄_3, and the path arc
    let mu2 = mu_qw(&inst.tg, &report.psi, 2);
    assert_relative_eq!(mu2, 1.0 / 9.0 + 4.0 / 9.0 + 0.25, epsilon = 1e-9);
    let m = mass(&inst.tg, &report.psi);
    assert_relative_eq!(m, 11.0 / 6.0 + 0.5 + 1.0, epsilon = 1e-8);
    // mass of the zero state with α = (1, 0) is 1
    let zero = WaveFunction {
        internal: vec![cr(0.0); 8],
        inflow: inst.alpha.clone(),
        outflow: vec![cr(0.0); 2],
    };
    assert_eq!(mass(&inst.tg, &zero), 1.0);
}

#[test]
fn mass_grid_against_closed_forms() {
    for k in [1, 2, 3] {
        let inst = make_c3pk(C3PkSpec::new(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, k).unwrap());
        let report = stationary_state(
            &inst.tg,
            &inst.kernel,
            &inst.alpha,
            &SolverOptions { method: Method::DirectSolve, ..Default::default() },
        )
        .unwrap();
        let m = mass(&inst.tg, &report.psi);
        assert_relative_eq!(m, 11.0 / 6.0 + k as f64 / 2.0 + 1.0, max_relative = 1e-8);
    }
    // non-reversible
    let inst = nonrev();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions { method: Method::DirectSolve, ..Default::default() },
    )
    .unwrap();
    let cf = closed_form_nonreversible(0.5, 1.0 / 6.0, 1.0 / 3.0).unwrap();
    assert_relative_eq!(mass(&inst.tg, &report.psi), cf.mass, max_relative = 1e-8);
}

#[test]
fn cycle_eigenvector_checks() {
    let inst = grover();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    let m = find_reversible_measure(&inst.tg, &inst.kernel)
        .measure()
        .unwrap()
        .clone();
    let g = inst.tg.internal();
    let basis = crate::graph::cycle_basis(g);
    assert_eq!(basis.len(), 1);
    let sys = InducedSystem::build(&inst.tg, &inst.kernel, &inst.alpha).unwrap();
    for cycle in &basis.cycles {
        let w = cycle_vector(g, cycle, &m);
        let check = check_cycle_eigenvector(&sys, &w, &report.psi);
        // uniform triangle conductances make the eigen relation exact
        assert_eq!(check.eigen_residual, 0.0);
        assert_eq!(check.outflow_residual, 0.0);
        assert!(check.orthogonality < 1e-10);
    }
}

#[test]
fn stationary_identities_hold() {
    // reversible case: edge sums follow the boundary overlap constant
    let inst = grover();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(rho_identity_residual(&inst.tg, &inst.kernel, &report.psi) < 1e-9);
    let m = find_reversible_measure(&inst.tg, &inst.kernel)
        .measure()
        .unwrap()
        .clone();
    assert!(reversible_sum_residual(&inst.tg, &report.psi, &m) < 1e-9);
    // gauge independence of the identity
    assert!(reversible_sum_residual(&inst.tg, &report.psi, &m.scaled(7.0)) < 1e-9);

    // non-reversible case
    let inst = nonrev();
    let report = stationary_state(
        &inst.tg,
        &inst.kernel,
        &inst.alpha,
        &SolverOptions::default(),
    )
    .unwrap();
    assert!(rho_identity_residual(&inst.tg, &inst.kernel, &report.psi) < 1e-9);
}

#[test]
fn invalid_kernel_is_rejected() {
    let inst = grover();
    let mut probs = inst.kernel.internal_probs().to_vec();
    probs[0] = 0.9;
    let bad = crate::kernel::TransitionKernel::new(&inst.tg, probs, inst.kernel.escape_probs().to_vec())
        .unwrap();
    assert!(matches!(
        InducedSystem::build(&inst.tg, &bad, &inst.alpha),
        Err(DynamicsError::InvalidKernel { .. })
    ));
}

#[test]
fn matrix_export_format() {
    let m = DMatrix::from_row_slice(1, 2, &[C64::new(1.0, -2.0), C64::new(0.5, 0.0)]);
    let text = format_complex_matrix(&m);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "1 2");
    let row = lines.next().unwrap();
    assert!(row.split(' ').count() == 2);
    assert!(row.starts_with("1.0000000000000000e0,-2.0000000000000000e0"));
}
