//! Placement on uniform servers with ideal services is bin packing: the
//! optimum uses exactly as many servers as the minimum number of bins.

use robovf::feasibility::check_embedding;
use robovf::oracle::{binpack_bruteforce, ideal_instance, optimal_solve, reduce_to_binpacking, OracleError};

/// Multisets of `len` sizes drawn from `sizes`, non-decreasing.
fn multisets(sizes: &[f64], len: usize) -> Vec<Vec<f64>> {
    if len == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &s) in sizes.iter().enumerate() {
        for mut rest in multisets(&sizes[i..], len - 1) {
            rest.insert(0, s);
            out.push(rest);
        }
    }
    out
}

/// Independent minimum bin count: try every assignment of items to `k`
/// bins for growing `k`.
fn min_bins(items: &[f64], cap: f64) -> usize {
    if items.is_empty() {
        return 0;
    }
    for k in 1..=items.len() {
        let total = k.pow(items.len() as u32);
        for code in 0..total {
            let mut load = vec![0.0; k];
            let mut c = code;
            for &it in items {
                load[c % k] += it;
                c /= k;
            }
            if load.iter().all(|&l| l <= cap) {
                return k;
            }
        }
    }
    unreachable!("one bin per item always fits")
}

#[test]
fn optimal_servers_equal_bins_on_the_grid() {
    let mut checked = 0;
    for cap in [2.0, 3.0, 4.0] {
        let sizes: Vec<f64> = [1.0, 2.0, 3.0].into_iter().filter(|&s| s <= cap).collect();
        for n in 0..=6 {
            for items in multisets(&sizes, n) {
                let expect = min_bins(&items, cap);
                for servers in 1..=4 {
                    let (g, services, radio) = ideal_instance(&items, servers, cap);
                    let inst = reduce_to_binpacking(&g, &services, cap).unwrap();
                    assert_eq!(inst.item_sizes, items);
                    let bins = binpack_bruteforce(&inst).unwrap();
                    assert_eq!(bins, expect, "{items:?} cap {cap}");
                    match optimal_solve(&g, &services, &radio) {
                        Ok(sol) => {
                            assert_eq!(sol.servers_used, bins, "{items:?} cap {cap} servers {servers}");
                            assert!(check_embedding(&g, &services, &sol.embedding, &radio).is_empty());
                        }
                        Err(OracleError::Infeasible) => assert!(bins > servers, "{items:?} cap {cap}"),
                        Err(e) => panic!("{e}"),
                    }
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 500);
}

#[test]
fn worked_reductions() {
    let (g, s, _) = ideal_instance(&[1.0, 1.0, 1.0], 3, 2.0);
    let inst = reduce_to_binpacking(&g, &s, 2.0).unwrap();
    assert_eq!(inst.item_sizes, vec![1.0, 1.0, 1.0]);
    assert_eq!(binpack_bruteforce(&inst).unwrap(), 2);

    let (g, s, _) = ideal_instance(&[], 1, 2.0);
    let inst = reduce_to_binpacking(&g, &s, 2.0).unwrap();
    assert!(inst.item_sizes.is_empty());
    assert_eq!(binpack_bruteforce(&inst).unwrap(), 0);
}
