//! Pyramid codebook combinatorics and shape quantization.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Number of integer vectors of dimension `n` with L1 norm exactly `k`:
/// `V(n, k) = V(n-1, k) + V(n, k-1) + V(n-1, k-1)` with `V(n, 0) = 1` and
/// `V(0, k) = 0` for `k > 0`. Exact big-integer arithmetic.
pub fn pvq_count(n: usize, k: usize) -> BigUint {
    assert!(n >= 1);
    // One-row DP over k for increasing n.
    let mut prev: Vec<BigUint> = (0..=k)
        .map(|kk| if kk == 0 { BigUint::one() } else { BigUint::zero() })
        .collect();
    for _ in 1..=n {
        let mut row = Vec::with_capacity(k + 1);
        row.push(BigUint::one());
        for kk in 1..=k {
            let v = &prev[kk] + &row[kk - 1] + &prev[kk - 1];
            row.push(v);
        }
        prev = row;
    }
    prev[k].clone()
}

/// Quantizes the direction of `x` onto the pyramid codebook shell with `k`
/// pulses: greedy projection followed by single-pulse refinement until no
/// pulse move improves the correlation. Signs of nonzero outputs match the
/// input.
///
/// Panics if `x` is the zero vector.
pub fn pvq_quantize_shape(x: &[f64], k: usize) -> Vec<i32> {
    let n = x.len();
    assert!(n >= 1);
    let l2: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(l2 > 0.0, "cannot quantize the shape of a zero vector");
    let mut v = vec![0i32; n];
    if k == 0 {
        return v;
    }
    let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let l1: f64 = a.iter().sum();
    // Initial projection, biased low so pulses remain to place greedily.
    let mut placed = 0usize;
    if l1 > 0.0 {
        for i in 0..n {
            let p = (a[i] * (k as f64) / l1 - 0.49).floor().max(0.0) as usize;
            v[i] = p as i32;
            placed += p;
        }
        if placed > k {
            // Numerical safety: strip excess pulses from the largest entries.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| a[j].partial_cmp(&a[i]).unwrap());
            let mut excess = placed - k;
            for &i in order.iter().cycle() {
                if excess == 0 {
                    break;
                }
                if v[i] > 0 {
                    v[i] -= 1;
                    excess -= 1;
                }
            }
            placed = k;
        }
    }
    // Greedy pulse placement maximizing cos(angle) = corr / sqrt(energy).
    let mut corr: f64 = (0..n).map(|i| a[i] * v[i] as f64).sum();
    let mut energy: f64 = (0..n).map(|i| (v[i] as f64).powi(2)).sum();
    for _ in placed..k {
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for i in 0..n {
            let c = corr + a[i];
            let e = energy + 2.0 * v[i] as f64 + 1.0;
            let score = c * c / e;
            if score > best_score {
                best_score = score;
                best = i;
            }
        }
        corr += a[best];
        energy += 2.0 * v[best] as f64 + 1.0;
        v[best] += 1;
    }
    // Single-pulse refinement: move one pulse from i to j while that
    // improves the squared correlation ratio.
    loop {
        let mut improved = false;
        let mut best_move: Option<(usize, usize, f64)> = None;
        let base = corr * corr / energy;
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            for j in 0..n {
                if i == j {
                    continue;
                }
                let c = corr - a[i] + a[j];
                let e = energy - 2.0 * v[i] as f64 + 1.0 + 2.0 * v[j] as f64 + 1.0;
                let score = c * c / e;
                if score > base + 1e-15
                    && best_move.map_or(true, |(_, _, s)| score > s)
                {
                    best_move = Some((i, j, score));
                }
            }
        }
        if let Some((i, j, _)) = best_move {
            corr = corr - a[i] + a[j];
            energy = energy - 2.0 * v[i] as f64 + 1.0 + 2.0 * v[j] as f64 + 1.0;
            v[i] -= 1;
            v[j] += 1;
            improved = true;
        }
        if !improved {
            break;
        }
    }
    for i in 0..n {
        if x[i] < 0.0 {
            v[i] = -v[i];
        }
    }
    debug_assert_eq!(v.iter().map(|p| p.unsigned_abs() as usize).sum::<usize>(), k);
    v
}
