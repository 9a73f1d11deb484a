//! Per-block direction estimation for the directional deringing filter:
//! eight orientations at 22.5-degree steps, chosen by minimizing the sum of
//! squared deviations of each pixel from the mean of its line.

pub const NUM_DIRECTIONS: usize = 8;
pub const DIR_BLOCK: usize = 8;

/// Unit step (dy, dx) and double step along each direction. Index 0 is the
/// up-right 45-degree diagonal; 2 is horizontal, 4 the down-right diagonal,
/// 6 vertical.
pub const DIR_STEPS: [[(i32, i32); 2]; NUM_DIRECTIONS] = [
    [(-1, 1), (-2, 2)],
    [(0, 1), (-1, 2)],
    [(0, 1), (0, 2)],
    [(0, 1), (1, 2)],
    [(1, 1), (2, 2)],
    [(1, 0), (2, 1)],
    [(1, 0), (2, 0)],
    [(1, 0), (2, -1)],
];

/// Line index of pixel (i, j) for each direction: constant along the
/// direction, so pixels sharing a value lie on (approximately) one line.
#[inline]
pub fn line_of(dir: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i as isize, j as isize);
    let v = match dir {
        0 => i + j,
        1 => i + j / 2,
        2 => i,
        3 => i - j / 2 + 4,
        4 => i - j + 7,
        5 => j - i / 2 + 4,
        6 => j,
        7 => j + i / 2,
        _ => unreachable!(),
    };
    v as usize
}

const MAX_LINES: usize = 16;

/// Picks the direction whose per-line means leave the least residual energy
/// in an 8x8 block; ties go to the lowest index.
pub fn find_direction(block: &[i32]) -> usize {
    assert_eq!(block.len(), DIR_BLOCK * DIR_BLOCK);
    let mut best = 0usize;
    let mut best_cost = f64::INFINITY;
    for dir in 0..NUM_DIRECTIONS {
        let mut sum = [0.0f64; MAX_LINES];
        let mut cnt = [0u32; MAX_LINES];
        for i in 0..DIR_BLOCK {
            for j in 0..DIR_BLOCK {
                let l = line_of(dir, i, j);
                sum[l] += block[i * DIR_BLOCK + j] as f64;
                cnt[l] += 1;
            }
        }
        let mut cost = 0.0;
        for i in 0..DIR_BLOCK {
            for j in 0..DIR_BLOCK {
                let l = line_of(dir, i, j);
                let d = block[i * DIR_BLOCK + j] as f64 - sum[l] / cnt[l] as f64;
                cost += d * d;
            }
        }
        if cost + 1e-9 < best_cost {
            best = dir;
            best_cost = cost;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent re-implementation: explicitly collects each line's pixel
    /// list, then measures deviations, scanning directions in reverse and
    /// resolving ties by preferring the lower index.
    fn brute_force(block: &[i32]) -> usize {
        let mut costs = [0.0f64; NUM_DIRECTIONS];
        for (dir, cost) in costs.iter_mut().enumerate() {
            let mut lines: Vec<Vec<f64>> = vec![Vec::new(); MAX_LINES];
            for i in 0..DIR_BLOCK {
                for j in 0..DIR_BLOCK {
                    lines[line_of(dir, i, j)].push(block[i * DIR_BLOCK + j] as f64);
                }
            }
            for line in lines.iter().filter(|l| !l.is_empty()) {
                let mean = line.iter().sum::<f64>() / line.len() as f64;
                *cost += line.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
            }
        }
        let mut best = NUM_DIRECTIONS - 1;
        for dir in (0..NUM_DIRECTIONS - 1).rev() {
            if costs[dir] <= costs[best] + 1e-9 {
                best = dir;
            }
        }
        best
    }

    #[test]
    fn vertical_stripes_pick_the_vertical_direction() {
        let mut block = [0i32; 64];
        for i in 0..8 {
            for j in 0..8 {
                block[i * 8 + j] = (j as i32) * 30;
            }
        }
        assert_eq!(find_direction(&block), 6);
    }

    #[test]
    fn horizontal_stripes_pick_the_horizontal_direction() {
        let mut block = [0i32; 64];
        for i in 0..8 {
            for j in 0..8 {
                block[i * 8 + j] = (i as i32) * 30;
            }
        }
        assert_eq!(find_direction(&block), 2);
    }

    #[test]
    fn constant_block_ties_to_direction_zero() {
        assert_eq!(find_direction(&[77; 64]), 0);
    }

    #[test]
    fn diagonal_stripes_pick_a_diagonal() {
        let mut block = [0i32; 64];
        for i in 0..8 {
            for j in 0..8 {
                block[i * 8 + j] = ((i + j) as i32 % 2) * 100;
            }
        }
        // Intensity varies across the / diagonal, constant along it.
        assert_eq!(find_direction(&block), 0);
    }

    #[test]
    fn matches_brute_force_on_random_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let block: Vec<i32> = (0..64).map(|_| rng.gen_range(0..256)).collect();
            assert_eq!(find_direction(&block), brute_force(&block));
        }
    }
}
