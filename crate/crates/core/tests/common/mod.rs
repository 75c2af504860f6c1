//! Shared oracles for the integration tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Peel a nonnegative SL(2,Z) matrix into its R/L letters, rightmost first.
/// R = [[1,0],[1,1]], L = [[1,1],[0,1]].
fn peel(mut m: [i64; 4]) -> Vec<u8> {
    let mut out = Vec::new();
    while m != [1, 0, 0, 1] {
        let [a, b, c, d] = m;
        if a >= b && c >= d {
            m = [a - b, b, c - d, d];
            out.push(b'R');
        } else {
            assert!(b >= a && d >= c, "not a positive word: {m:?}");
            m = [a, b - a, c, d - c];
            out.push(b'L');
        }
    }
    out.reverse();
    out
}

/// Least rotation of a cyclic letter string.
pub fn least_rotation(s: &[u8]) -> Vec<u8> {
    (0..s.len())
        .map(|k| s[k..].iter().chain(&s[..k]).copied().collect::<Vec<u8>>())
        .min()
        .unwrap_or_default()
}

/// Exponent word `(a1, b1, ...)` as the letters `R^a1 L^b1 ...`.
pub fn letters(exps: &[u32]) -> Vec<u8> {
    exps.iter()
        .enumerate()
        .flat_map(|(i, &e)| std::iter::repeat_n(if i % 2 == 0 { b'R' } else { b'L' }, e as usize))
        .collect()
}

/// Every nonnegative matrix of determinant 1 and trace `t`.
pub fn nonnegative_matrices(t: i64) -> Vec<[i64; 4]> {
    let mut v = Vec::new();
    for a in 0..=t {
        let d = t - a;
        let bc = a * d - 1;
        // a d = 1 only happens at trace 2
        if bc <= 0 {
            continue;
        }
        for b in 1..=bc {
            if bc % b == 0 {
                v.push([a, b, bc / b, d]);
            }
        }
    }
    v
}

/// Brute-force class list per trace: canonical cyclic letter strings.
pub fn brute_force_classes(t_max: i64) -> BTreeMap<i64, BTreeSet<Vec<u8>>> {
    (3..=t_max)
        .map(|t| {
            (
                t,
                nonnegative_matrices(t)
                    .into_iter()
                    .map(|m| least_rotation(&peel(m)))
                    .collect(),
            )
        })
        .collect()
}
