use amap_core::rng;
use amap_core::rtree::{d_ghwr_bracket, delta_bracket, delta_ghwr_exact, prohorov, tree_from_lattice};
use amap_core::{path_codec, AcyclicMapping, RootedWeightedTree};
use rand::seq::SliceRandom;
use rand::Rng;

fn random_tree<R: Rng>(n: usize, rng: &mut R) -> RootedWeightedTree {
    let mut parent = vec![None];
    let mut len = vec![0.0];
    for v in 1..n {
        parent.push(Some(rng.random_range(0..v)));
        len.push(0.05 + rng.random::<f64>() * 0.5);
    }
    let mut mass: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.75) { rng.random::<f64>() } else { 0.0 }).collect();
    mass[0] += 0.05;
    let total: f64 = mass.iter().sum();
    mass.iter_mut().for_each(|m| *m /= total);
    RootedWeightedTree::new(parent, len, mass).unwrap()
}

// Same tree with non-root vertices permuted.
fn relabel<R: Rng>(t: &RootedWeightedTree, rng: &mut R) -> RootedWeightedTree {
    let n = t.len();
    let mut perm: Vec<usize> = (1..n).collect();
    perm.shuffle(rng);
    let mut new_of = vec![0; n];
    for (k, &v) in perm.iter().enumerate() {
        new_of[v] = k + 1;
    }
    let mut parent = vec![None; n];
    let mut len = vec![0.0; n];
    let mut mass = vec![0.0; n];
    mass[0] = t.mass()[0];
    for v in 1..n {
        parent[new_of[v]] = Some(new_of[t.parent(v).unwrap()]);
        len[new_of[v]] = t.edge_length(v);
        mass[new_of[v]] = t.mass()[v];
    }
    RootedWeightedTree::new(parent, len, mass).unwrap()
}

#[test]
fn delta_identity_and_symmetry() {
    let mut r = rng::master(101);
    for _ in 0..30 {
        let x = random_tree(6, &mut r);
        let y = random_tree(6, &mut r);
        assert_eq!(delta_ghwr_exact(&x, &relabel(&x, &mut r)).unwrap(), 0.0);
        let a = delta_ghwr_exact(&x, &y).unwrap();
        let b = delta_ghwr_exact(&y, &x).unwrap();
        assert_eq!(a, b);
        assert!(a > 0.0 || x.rooted_isometric(&y, 1e-12));
        assert_eq!(d_ghwr_bracket(&x, &x), (0.0, 0.0));
    }
}

#[test]
fn two_leaf_case() {
    for (a, b) in [(0.2, 0.5), (0.3, 0.35), (0.5, 0.1), (1.0, 3.0)] {
        let x = RootedWeightedTree::new(vec![None, Some(0)], vec![0.0, a], vec![0.0, 1.0]).unwrap();
        let y = RootedWeightedTree::new(vec![None, Some(0)], vec![0.0, b], vec![0.0, 1.0]).unwrap();
        let d = delta_ghwr_exact(&x, &y).unwrap();
        let want: f64 = (a - b).abs();
        assert!((d - want).abs() < 1e-12, "{a} {b}: {d}");
        let (lo, hi) = d_ghwr_bracket(&x, &y);
        assert!((lo - 0.5 * want.powf(0.25)).abs() < 1e-12);
        assert!((hi - want.powf(0.25)).abs() < 1e-12);
    }
}

#[test]
fn bracket_contains_the_exact_value() {
    let mut r = rng::master(102);
    for _ in 0..60 {
        let nx = r.random_range(1..=7);
        let ny = r.random_range(1..=7);
        let x = random_tree(nx, &mut r);
        let y = random_tree(ny, &mut r);
        let exact = delta_ghwr_exact(&x, &y).unwrap();
        let (lo, hi) = delta_bracket(&x, &y);
        assert!(lo <= exact + 1e-12 && exact <= hi + 1e-12, "{lo} {exact} {hi}");
    }
}

#[test]
fn three_link_chains_respect_the_bracket() {
    // ½Δ(X,Y)^{1/4} ≤ d(X,Y) ≤ Σ Δ(Z_i, Z_{i+1})^{1/4} along any chain
    let mut r = rng::master(103);
    for _ in 0..25 {
        let z: Vec<RootedWeightedTree> = (0..4).map(|_| random_tree(5, &mut r)).collect();
        let (lower, _) = d_ghwr_bracket(&z[0], &z[3]);
        let chain: f64 = z.windows(2).map(|w| delta_ghwr_exact(&w[0], &w[1]).unwrap().powf(0.25)).sum();
        assert!(lower <= chain + 1e-12, "{lower} > {chain}");
    }
}

#[test]
fn reattach_moves_within_twice_the_radius() {
    // collapsing the moved subtree onto v distorts by at most its diameter
    let mut r = rng::master(104);
    let mut checked = 0;
    while checked < 80 {
        let t = random_tree(r.random_range(3..=8), &mut r);
        let v = r.random_range(1..t.len());
        if t.children(v).is_empty() {
            continue;
        }
        let above = t.subtree(v);
        let moved_mass: f64 = above[1..].iter().map(|&x| t.mass()[x]).sum();
        let eps = t.radius_above(v).max(moved_mass);
        let outside: Vec<usize> = (0..t.len()).filter(|x| !above.contains(x)).collect();
        let w = outside[r.random_range(0..outside.len())];
        let moved = t.reattach(v, w).unwrap();
        assert!(moved.satisfies_four_point(1e-12));
        assert!((moved.length_measure_total() - t.length_measure_total()).abs() < 1e-12);
        let d = delta_ghwr_exact(&t, &moved).unwrap();
        assert!(d <= 2.0 * eps + 1e-12, "Δ = {d} > 2ε = {}", 2.0 * eps);
        checked += 1;
    }
}

#[test]
fn reattach_with_two_arms_exceeds_epsilon() {
    // root - v at length 1, two arms of length 0.1 above v, moved to the root:
    // the arm tips need images 0.2 apart at depth ≥ 1.1 − δ, forcing δ ≥ 0.15
    let t = RootedWeightedTree::new(
        vec![None, Some(0), Some(1), Some(1)],
        vec![0.0, 1.0, 0.1, 0.1],
        vec![1.0, 0.0, 0.0, 0.0],
    )
    .unwrap();
    let moved = t.reattach(1, 0).unwrap();
    let d = delta_ghwr_exact(&t, &moved).unwrap();
    assert!(d >= 0.15 - 1e-12, "{d}");
    assert!(d <= 0.2 + 1e-12, "{d}");
}

#[test]
fn reattach_keeps_tree_metrics_on_fuzzed_trees() {
    let mut r = rng::master(105);
    for _ in 0..100 {
        let t = random_tree(r.random_range(2..=12), &mut r);
        let c = r.random_range(1..t.len());
        let (t, v) = t.subdivide_edge(c, 0.5 * t.edge_length(c)).unwrap();
        let above = t.subtree(v);
        let outside: Vec<usize> = (0..t.len()).filter(|x| !above.contains(x)).collect();
        let w = outside[r.random_range(0..outside.len())];
        let moved = t.reattach(v, w).unwrap();
        let d = moved.distance_matrix();
        let n = t.len();
        for x in 0..n {
            assert_eq!(d[x][x], 0.0);
            for y in 0..n {
                assert!((d[x][y] - d[y][x]).abs() < 1e-12);
                for z in 0..n {
                    assert!(d[x][z] <= d[x][y] + d[y][z] + 1e-12);
                }
            }
        }
        assert!(moved.satisfies_four_point(1e-12));
        assert!(t.reattach(v, above[above.len() - 1]).is_err() || above.len() == 1);
    }
}

#[test]
fn prohorov_two_point_and_triangle() {
    for d in [0.0, 0.2, 0.7, 1.0, 3.0] {
        let m = vec![vec![0.0, d], vec![d, 0.0]];
        let p = prohorov(&m, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((p - d.min(1.0)).abs() < 1e-15);
    }
    let mut r = rng::master(106);
    for _ in 0..100 {
        let pts: Vec<(f64, f64)> = (0..5).map(|_| (r.random::<f64>(), r.random::<f64>())).collect();
        let dist: Vec<Vec<f64>> = pts
            .iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        let measure = |r: &mut rand_chacha::ChaCha8Rng| {
            let mut m: Vec<f64> = (0..5).map(|_| r.random::<f64>()).collect();
            let s: f64 = m.iter().sum();
            m.iter_mut().for_each(|x| *x /= s);
            m
        };
        let (a, b, c) = (measure(&mut r), measure(&mut r), measure(&mut r));
        assert_eq!(prohorov(&dist, &a, &a).unwrap(), 0.0);
        let ab = prohorov(&dist, &a, &b).unwrap();
        let bc = prohorov(&dist, &b, &c).unwrap();
        let ac = prohorov(&dist, &a, &c).unwrap();
        assert!(ac <= ab + bc + 1e-12);
    }
}

#[test]
fn large_lattice_trees_match_the_forest() {
    let mut r = rng::master(107);
    for n in [50, 120, 200] {
        for _ in 0..5 {
            let m = amap_core::mapping::sample_uniform_acyclic(n, &mut r).unwrap();
            let a = tree_from_lattice(&path_codec::encode(&m));
            let b = RootedWeightedTree::from_forest(&m, 1.0 / (n as f64).sqrt());
            assert!(a.rooted_isometric(&b, 1e-12));
        }
    }
    let m = AcyclicMapping::identity(4).unwrap();
    let t = tree_from_lattice(&path_codec::encode(&m));
    assert_eq!(t.len(), 5);
    assert!((t.mass()[0] - 0.5).abs() < 1e-15);
}

#[test]
fn trimmed_length_is_stable_in_n() {
    // μ(R_η) of the rescaled uniform forest tree stays bounded as n grows
    let mut r = rng::master(108);
    let eta = 0.25;
    let mut means = Vec::new();
    for n in [200, 800] {
        let reps = 20;
        let total: f64 = (0..reps)
            .map(|_| {
                let m = amap_core::mapping::sample_uniform_acyclic(n, &mut r).unwrap();
                tree_from_lattice(&path_codec::encode(&m)).trim(eta).unwrap().length_measure_total()
            })
            .sum();
        means.push(total / reps as f64);
    }
    assert!(means.iter().all(|m| m.is_finite() && *m < 20.0), "{means:?}");
    assert!((means[0] - means[1]).abs() < 0.6 * means[0].max(means[1]), "{means:?}");
}
