//! Temporary empirical probe; deleted before finalizing.

use quocon::*;

fn cycle_graph(n: usize) -> Graph {
    let mut w = vec![0.0; n * n];
    for i in 0..n {
        w[i * n + (i + 1) % n] = 1.0;
    }
    Graph::from_weights(n, w).unwrap()
}

#[test]
fn probe_nonconverged() {
    let sizes = [4usize, 8, 12, 16, 20];
    let cfg = SimConfig { horizon: 60.0, ..SimConfig::default() };
    for &n in &sizes {
        let graphs: Vec<(String, Graph)> = vec![
            (format!("complete-{n}"), make_graph(&GraphSpec::Complete { n }, 0).unwrap()),
            (format!("path-{n}"), make_graph(&GraphSpec::Path { n }, 0).unwrap()),
            (format!("cycle-{n}"), cycle_graph(n)),
            (
                format!("bipartite-{}-{}", n / 2, n - n / 2),
                make_graph(&GraphSpec::CompleteBipartite { p: n / 2, q: n - n / 2 }, 0).unwrap(),
            ),
        ];
        for (label, g) in graphs {
            for seed in 0..10u64 {
                let x0 = uniform_initial_state(n, 0.0, 30.0, 1000 * seed + n as u64);
                let traj = simulate(&g, &x0, &cfg).unwrap();
                if traj.converged.is_none() {
                    let tail = traj.tail(0.1);
                    let chat = chattering_score(&tail, 1.0);
                    let last = traj.last_state();
                    let stats = consensus_stats(last);
                    println!(
                        "{label}-s{seed}: NOT converged; tail chattering {chat:.1}, spread {:.4}, mean {:.4}",
                        stats.spread, stats.mean
                    );
                }
            }
        }
    }
}

#[test]
fn probe_enumeration_timing() {
    let t0 = std::time::Instant::now();
    let g = make_graph(&GraphSpec::Path { n: 7 }, 0).unwrap();
    let recs = enumerate_extended_equilibria(&g, &vec![-1; 7], &vec![7; 7]).unwrap();
    println!("path-7 box [-1,7]^7: {} records in {:?}", recs.len(), t0.elapsed());
    let worst = recs
        .iter()
        .map(|r| consensus_stats(&r.point).spread)
        .fold(0.0f64, f64::max);
    println!("max spread {worst} vs bound {}", (7.0f64 - 2.0) * (7.0 - 2.0) / 4.0);

    let t1 = std::time::Instant::now();
    let g9 = make_graph(&GraphSpec::Path { n: 9 }, 0).unwrap();
    let mono = enumerate_extended_equilibria_monotone(&g9, 0, 9).unwrap();
    println!("path-9 monotone [0,9]: {} records in {:?}", mono.len(), t1.elapsed());
    let worst9 = mono
        .iter()
        .map(|r| consensus_stats(&r.point).spread)
        .fold(0.0f64, f64::max);
    println!("max spread {worst9} vs bound {}", (9.0f64 - 2.0) * (9.0 - 2.0) / 4.0);
}

#[test]
fn probe_complete_consensus_seeds() {
    for &n in &[5usize, 10, 20] {
        let g = make_graph(&GraphSpec::Complete { n }, 0).unwrap();
        let cfg = SimConfig { horizon: 30.0, ..SimConfig::default() };
        for seed in 0..10u64 {
            let x0 = uniform_initial_state(n, 0.0, 30.0, 100 * n as u64 + seed);
            let traj = simulate(&g, &x0, &cfg).unwrap();
            match &traj.converged {
                Some(c) => {
                    let h = c.limit[0].round();
                    if !c.limit.iter().all(|&v| (v - h).abs() <= 1e-6) {
                        println!("complete-{n} seed {seed}: limit not integer consensus");
                    }
                }
                None => println!("complete-{n} seed {seed}: NOT converged"),
            }
        }
    }
    println!("complete consensus probe done");
}
