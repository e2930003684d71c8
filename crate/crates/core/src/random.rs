//! Seeded random instances for randomized verification.
//!
//! Reversible kernels are generated from random edge conductances (detailed
//! balance by construction); non-reversible ones from independent per-arc
//! weights, re-drawn in the unlikely event the verdict comes back
//! reversible. All randomness is ChaCha-seeded so reports reproduce.

use crate::graph::{attach_tails, build_graph, TailedGraph};
use crate::kernel::{find_reversible_measure, ReversibilityVerdict, TransitionKernel};
use crate::scalar::C;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type C64 = C<f64>;

/// Deterministic generator for a given seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tailed graph with a kernel and an inflow.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub tg: TailedGraph,
    pub kernel: TransitionKernel<f64>,
    pub alpha: Vec<C64>,
}

/// Connected graph on up to `max_vertices` vertices: a random spanning tree
/// plus `extra_edges` more (parallel edges allowed), with 1..=4 tails.
fn random_tailed_graph(rng: &mut ChaCha8Rng, min_extra_edges: usize) -> TailedGraph {
    let n = rng.gen_range(3..=8);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.gen_range(0..v), v));
    }
    let extra = rng.gen_range(min_extra_edges..=min_extra_edges + 2);
    let mut added = 0;
    while added < extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v {
            edges.push((u.min(v), u.max(v)));
            added += 1;
        }
    }
    let g = build_graph(n, &edges).expect("valid random edges");
    let r = rng.gen_range(1..=4);
    let attach: Vec<usize> = (0..r).map(|_| rng.gen_range(0..n)).collect();
    attach_tails(g, &attach).expect("non-empty tails")
}

/// Reversible instance: conductances drawn per edge, kernel read off them.
pub fn random_reversible_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let tg = random_tailed_graph(rng, 0);
    let g = tg.internal();
    let edge_w: Vec<f64> = (0..g.edge_count()).map(|_| rng.gen_range(0.2..2.0)).collect();
    let tail_w: Vec<f64> = (0..tg.tail_count()).map(|_| rng.gen_range(0.2..2.0)).collect();
    let mut m_v = vec![0.0; g.vertex_count()];
    for e in 0..g.edge_count() {
        m_v[g.origin(2 * e)] += edge_w[e];
        m_v[g.terminus(2 * e)] += edge_w[e];
    }
    for (j, tail) in tg.tails().iter().enumerate() {
        m_v[tail.attach] += tail_w[j];
    }
    let internal: Vec<f64> = g
        .arc_ids()
        .map(|a| edge_w[g.edge_of(a)] / m_v[g.origin(a)])
        .collect();
    let escape: Vec<f64> = tg
        .tails()
        .iter()
        .enumerate()
        .map(|(j, tail)| tail_w[j] / m_v[tail.attach])
        .collect();
    let kernel = TransitionKernel::new(&tg, internal, escape).expect("probabilities in domain");
    debug_assert!(find_reversible_measure(&tg, &kernel).is_reversible());
    let alpha = random_complex_vector(rng, tg.tail_count());
    RandomInstance { tg, kernel, alpha }
}

/// Non-reversible instance: independent arc weights, re-drawn until the
/// spanning-tree verdict rejects reversibility.
pub fn random_nonreversible_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    loop {
        // at least one independent cycle, otherwise every kernel is reversible
        let tg = random_tailed_graph(rng, 1);
        let g = tg.internal();
        let arc_w: Vec<f64> = g.arc_ids().map(|_| rng.gen_range(0.2..2.0)).collect();
        let tail_w: Vec<f64> = (0..tg.tail_count()).map(|_| rng.gen_range(0.2..2.0)).collect();
        let mut total = vec![0.0; g.vertex_count()];
        for a in g.arc_ids() {
            total[g.origin(a)] += arc_w[a];
        }
        for (j, tail) in tg.tails().iter().enumerate() {
            total[tail.attach] += tail_w[j];
        }
        let internal: Vec<f64> = g.arc_ids().map(|a| arc_w[a] / total[g.origin(a)]).collect();
        let escape: Vec<f64> = tg
            .tails()
            .iter()
            .enumerate()
            .map(|(j, tail)| tail_w[j] / total[tail.attach])
            .collect();
        let kernel = TransitionKernel::new(&tg, internal, escape).expect("probabilities in domain");
        if let ReversibilityVerdict::NonReversible { .. } = find_reversible_measure(&tg, &kernel) {
            let alpha = random_complex_vector(rng, tg.tail_count());
            return RandomInstance { tg, kernel, alpha };
        }
    }
}

/// Complex vector with entries uniform in the unit square around 0.
pub fn random_complex_vector(rng: &mut ChaCha8Rng, len: usize) -> Vec<C64> {
    (0..len)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}
