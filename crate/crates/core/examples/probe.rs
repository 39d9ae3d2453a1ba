use racg_core::explorer::*;
use racg_core::graph::{gamma_d, parse_graph};
use racg_core::words::{complement_loop_word, RaySpec, Word};

fn main() {
    let b = SearchBudget::default();

    // Quadratic regime: gamma_d(2) profile along the complement tour word.
    let g2 = gamma_d(2).unwrap();
    let w = complement_loop_word(&g2).unwrap();
    eprintln!("gamma2 tour word: {}", w.render(&g2));
    let spec = BiInfiniteSpec::periodic(&w).unwrap();
    for r in 3..=8u32 {
        let t0 = std::time::Instant::now();
        let s = divergence_profile(&g2, &spec, &[r], None, &b).unwrap();
        eprintln!(
            "gamma2 profile r={r}: value={:?} stable={} ({:?})",
            s[0].value,
            s[0].stable,
            t0.elapsed()
        );
    }

    // Polynomial family geodesic pairs.
    for (d, rmax) in [(2u32, 8u32), (3, 6)] {
        let g = gamma_d(d).unwrap();
        let alpha = RaySpec::periodic(Word::parse(&g, &format!("b{d} a{d}")).unwrap()).unwrap();
        let beta = RaySpec::periodic(
            Word::parse(&g, &format!("b{} a{}", d - 1, d - 1)).unwrap(),
        )
        .unwrap();
        for r in 2..=rmax {
            let t0 = std::time::Instant::now();
            let s = pair_divergence(&g, &alpha, &beta, r, default_cap(r), &b).unwrap();
            eprintln!(
                "gamma{d} pair r={r}: value={:?} stable={} ({:?})",
                s.value,
                s.stable,
                t0.elapsed()
            );
        }
    }

    // Super-quadratic: C6 + chord profile.
    let g = parse_graph(
        "vertices: v1 v2 v3 v4 v5 v6\nedge v1 v2\nedge v2 v3\nedge v3 v4\nedge v4 v5\nedge v5 v6\nedge v6 v1\nedge v1 v4\n",
    )
    .unwrap();
    let w = complement_loop_word(&g).unwrap();
    eprintln!("c6chord tour word: {}", w.render(&g));
    let spec = BiInfiniteSpec::periodic(&w).unwrap();
    for r in 3..=6u32 {
        let t0 = std::time::Instant::now();
        let s = divergence_profile(&g, &spec, &[r], None, &b).unwrap();
        eprintln!(
            "c6chord profile r={r}: value={:?} stable={} ({:?})",
            s[0].value,
            s[0].stable,
            t0.elapsed()
        );
    }
}
