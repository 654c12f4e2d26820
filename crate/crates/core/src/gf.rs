//! Linear algebra over the prime field `GF(p)`.

use alloc::vec;
use alloc::vec::Vec;

fn inverse(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2).
    let (mut base, mut exp, mut acc) = (a as u64 % p as u64, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        exp >>= 1;
    }
    acc as u32
}

/// Row-reduces `rows` in place (each row has the same length) and returns the
/// pivot columns.
fn reduce(rows: &mut [Vec<u32>], columns: usize, p: u32) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..columns {
        let Some(found) = (r..rows.len()).find(|&i| rows[i][c] % p != 0) else {
            continue;
        };
        rows.swap(r, found);
        let inv = inverse(rows[r][c] % p, p);
        for v in rows[r].iter_mut() {
            *v = (*v % p) * inv % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] % p != 0 {
                let factor = rows[i][c] % p;
                for j in 0..rows[i].len() {
                    let sub = factor * rows[r][j] % p;
                    rows[i][j] = (rows[i][j] % p + p - sub) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    pivots
}

/// Rank of a matrix over `GF(p)`.
pub fn rank(rows: &[Vec<u32>], p: u32) -> usize {
    let mut rows = rows.to_vec();
    let columns = rows.first().map_or(0, Vec::len);
    reduce(&mut rows, columns, p).len()
}

/// Some solution of `A x = b` over `GF(p)` (free variables set to 0), or
/// `None` when the system is inconsistent.
pub fn solve(a: &[Vec<u32>], b: &[u32], p: u32) -> Option<Vec<u32>> {
    let columns = a.first().map_or(0, Vec::len);
    let mut rows: Vec<Vec<u32>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    let pivots = reduce(&mut rows, columns, p);
    if rows.iter().skip(pivots.len()).any(|r| r[columns] % p != 0) {
        return None;
    }
    let mut x = vec![0; columns];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rows[i][columns];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_systems() {
        // x + y = 1, y = 1 over GF(2).
        assert_eq!(
            solve(&[vec![1, 1], vec![0, 1]], &[1, 1], 2),
            Some(vec![0, 1])
        );
        assert_eq!(solve(&[vec![1, 1], vec![1, 1]], &[0, 1], 2), None);
        assert_eq!(solve(&[vec![2]], &[1], 3), Some(vec![2]));
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]], 5), 1);
        assert_eq!(inverse(3, 7), 5);
    }

    proptest! {
        #[test]
        fn solutions_satisfy_consistent_systems(
            p in prop::sample::select(vec![2u32, 3, 5, 7]),
            rows in prop::collection::vec(prop::collection::vec(0u32..7, 4), 1..6),
            x in prop::collection::vec(0u32..7, 4),
        ) {
            let a: Vec<Vec<u32>> = rows.iter().map(|r| r.iter().map(|v| v % p).collect()).collect();
            let x: Vec<u32> = x.iter().map(|v| v % p).collect();
            let b: Vec<u32> = a.iter().map(|r| r.iter().zip(&x).map(|(u, v)| u * v).sum::<u32>() % p).collect();
            let sol = solve(&a, &b, p).expect("system built from a solution is consistent");
            for (r, &rhs) in a.iter().zip(&b) {
                prop_assert_eq!(r.iter().zip(&sol).map(|(u, v)| u * v).sum::<u32>() % p, rhs);
            }
        }
    }
}
