//! Built-in algebras and loops used by the test suites and the CLI.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::FiniteAlgebra;

const GROUP_TERM: &str = "(mul (mul x (inv y)) z)";
const BOOLEAN_TERM: &str = "(join (join (meet x (compl y)) (meet x z)) (meet (compl y) z))";

/// The cyclic group `Z_n` with `add` and `neg`.
pub fn cyclic(n: usize) -> FiniteAlgebra {
    let add: Vec<usize> = (0..n * n).map(|i| (i / n + i % n) % n).collect();
    let neg: Vec<usize> = (0..n).map(|x| (n - x) % n).collect();
    FiniteAlgebra::new(format!("Z{n}"), n)
        .and_then(|a| a.with_operation("add", 2, &add))
        .and_then(|a| a.with_operation("neg", 1, &neg))
        .and_then(|a| a.with_malcev_sexpr("(add x (add (neg y) z))"))
        .expect("valid cyclic group")
}

/// A group given by its multiplication table, identity at 0, with `mul` and `inv`.
pub fn group(name: &str, mult: &[Vec<usize>]) -> FiniteAlgebra {
    let n = mult.len();
    let flat: Vec<usize> = mult.iter().flatten().copied().collect();
    let inv: Vec<usize> = (0..n)
        .map(|x| (0..n).find(|&y| mult[x][y] == 0).expect("inverse"))
        .collect();
    FiniteAlgebra::new(name, n)
        .and_then(|a| a.with_operation("mul", 2, &flat))
        .and_then(|a| a.with_operation("inv", 1, &inv))
        .and_then(|a| a.with_malcev_sexpr(GROUP_TERM))
        .expect("valid group")
}

/// Multiplication table of the permutation group generated by `gens`,
/// elements sorted lexicographically (so the identity is element 0).
/// Composition is `(p * q)(i) = p(q(i))`.
pub fn permutation_group_table(degree: usize, gens: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let compose = |p: &[usize], q: &[usize]| -> Vec<usize> { q.iter().map(|&i| p[i]).collect() };
    let mut elems: BTreeSet<Vec<usize>> = BTreeSet::new();
    elems.insert((0..degree).collect());
    let mut frontier: Vec<Vec<usize>> = elems.iter().cloned().collect();
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = compose(&p, g);
            if elems.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    let elems: Vec<Vec<usize>> = elems.into_iter().collect();
    let index = |p: &Vec<usize>| elems.binary_search(p).expect("closed");
    elems
        .iter()
        .map(|p| elems.iter().map(|q| index(&compose(p, q))).collect())
        .collect()
}

pub fn cyclic_table(n: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|a| (0..n).map(|b| (a + b) % n).collect())
        .collect()
}

/// Direct product table; the pair `(a, b)` is element `a * |B| + b`.
pub fn product_table(a: &[Vec<usize>], b: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let (n, m) = (a.len(), b.len());
    (0..n * m)
        .map(|x| {
            (0..n * m)
                .map(|y| a[x / m][y / m] * m + b[x % m][y % m])
                .collect()
        })
        .collect()
}

pub fn symmetric3_table() -> Vec<Vec<usize>> {
    permutation_group_table(3, &[vec![1, 0, 2], vec![1, 2, 0]])
}

/// `S_3`; elements are the permutations of `{0,1,2}` in lexicographic order,
/// so the alternating subgroup is `{0, 3, 4}`.
pub fn symmetric3() -> FiniteAlgebra {
    group("S3", &symmetric3_table())
}

pub fn dihedral4() -> FiniteAlgebra {
    group(
        "D4",
        &permutation_group_table(4, &[vec![1, 2, 3, 0], vec![0, 3, 2, 1]]),
    )
}

/// The quaternion group; element `2*u + s` is `(-1)^s` times unit `u` of
/// `1, i, j, k`.
pub fn quaternion8() -> FiniteAlgebra {
    // (sign, unit) of unit products.
    const UNIT: [[(usize, usize); 4]; 4] = [
        [(0, 0), (0, 1), (0, 2), (0, 3)],
        [(0, 1), (1, 0), (0, 3), (1, 2)],
        [(0, 2), (1, 3), (1, 0), (0, 1)],
        [(0, 3), (0, 2), (1, 1), (1, 0)],
    ];
    let mult: Vec<Vec<usize>> = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (s, u) = UNIT[x / 2][y / 2];
                    2 * u + (s + x % 2 + y % 2) % 2
                })
                .collect()
        })
        .collect();
    group("Q8", &mult)
}

pub fn klein4() -> FiniteAlgebra {
    group("Z2xZ2", &product_table(&cyclic_table(2), &cyclic_table(2)))
}

/// All groups of order at most 8 up to isomorphism.
pub fn groups_up_to_order_8() -> Vec<FiniteAlgebra> {
    let c = cyclic_table;
    vec![
        cyclic(1),
        cyclic(2),
        cyclic(3),
        cyclic(4),
        klein4(),
        cyclic(5),
        cyclic(6),
        symmetric3(),
        cyclic(7),
        cyclic(8),
        group("Z2xZ4", &product_table(&c(2), &c(4))),
        group(
            "Z2xZ2xZ2",
            &product_table(&product_table(&c(2), &c(2)), &c(2)),
        ),
        dihedral4(),
        quaternion8(),
    ]
}

/// The Boolean algebra `2^k` on bitmasks, with `meet`, `join`, `compl`.
pub fn boolean(k: u32) -> FiniteAlgebra {
    let n = 1usize << k;
    let meet: Vec<usize> = (0..n * n).map(|i| (i / n) & (i % n)).collect();
    let join: Vec<usize> = (0..n * n).map(|i| (i / n) | (i % n)).collect();
    let compl: Vec<usize> = (0..n).map(|x| !x & (n - 1)).collect();
    FiniteAlgebra::new(format!("Bool{n}"), n)
        .and_then(|a| a.with_operation("meet", 2, &meet))
        .and_then(|a| a.with_operation("join", 2, &join))
        .and_then(|a| a.with_operation("compl", 1, &compl))
        .and_then(|a| a.with_malcev_sexpr(BOOLEAN_TERM))
        .expect("valid Boolean algebra")
}

/// `({0,1}, meet)`: no Mal'cev polynomial.
pub fn semilattice2() -> FiniteAlgebra {
    FiniteAlgebra::new("semilattice2", 2)
        .and_then(|a| a.with_operation("meet", 2, &[0, 0, 0, 1]))
        .expect("valid semilattice")
}

/// The two-element lattice.
pub fn lattice2() -> FiniteAlgebra {
    FiniteAlgebra::new("lattice2", 2)
        .and_then(|a| a.with_operation("meet", 2, &[0, 0, 0, 1]))
        .and_then(|a| a.with_operation("join", 2, &[0, 1, 1, 1]))
        .expect("valid lattice")
}

/// A Mal'cev operation on `{0,1,2}` with the congruence `{{0,1},{2}}`,
/// whose classes have different sizes; the algebra is not congruence regular.
/// On `{0,1}` it is `x+y+z mod 2`; modulo the congruence it is the
/// two-element affine operation.
pub fn affine_point3() -> FiniteAlgebra {
    let class = |x: usize| usize::from(x == 2);
    let mut table = Vec::with_capacity(27);
    for x in 0..3 {
        for y in 0..3 {
            for z in 0..3 {
                let v = if x < 2 && y < 2 && z < 2 {
                    (x + y + z) % 2
                } else if (class(x) + class(y) + class(z)) % 2 == 1 {
                    2
                } else if x == 2 && y == 2 {
                    z
                } else if y == 2 && z == 2 {
                    x
                } else {
                    y
                };
                table.push(v);
            }
        }
    }
    FiniteAlgebra::new("affine_point3", 3)
        .and_then(|a| a.with_operation("d", 3, &table))
        .and_then(|a| a.with_malcev_sexpr("(d x y z)"))
        .expect("valid Mal'cev algebra")
}

pub fn z3xz3() -> FiniteAlgebra {
    group("Z3xZ3", &product_table(&cyclic_table(3), &cyclic_table(3)))
}

/// Mal'cev algebras of the corpus.
pub fn malcev_algebras() -> Vec<FiniteAlgebra> {
    let mut out = groups_up_to_order_8();
    out.extend([boolean(1), boolean(2), boolean(3), affine_point3(), z3xz3()]);
    out
}

/// Every corpus algebra with at most 8 elements, Mal'cev or not.
pub fn small_algebras() -> Vec<FiniteAlgebra> {
    let mut out: Vec<FiniteAlgebra> = malcev_algebras()
        .into_iter()
        .filter(|a| a.size() <= 8)
        .collect();
    out.extend([semilattice2(), lattice2()]);
    out
}

/// Looks up a built-in algebra by name.
pub fn by_name(name: &str) -> Option<FiniteAlgebra> {
    let mut all = malcev_algebras();
    all.extend([semilattice2(), lattice2()]);
    all.into_iter().find(|a| a.name() == name)
}

/// Names of all built-in algebras.
pub fn names() -> Vec<String> {
    let mut all = malcev_algebras();
    all.extend([semilattice2(), lattice2()]);
    all.iter().map(|a| String::from(a.name())).collect()
}

/// All loop tables on `0..n` with identity 0 (reduced Latin squares),
/// in lexicographic order.
pub fn normalized_loops(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut table: Vec<Vec<usize>> = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    if r == 0 {
                        c
                    } else if c == 0 {
                        r
                    } else {
                        usize::MAX
                    }
                })
                .collect()
        })
        .collect();
    let mut row_used = vec![0u64; n];
    let mut col_used = vec![0u64; n];
    for i in 0..n {
        row_used[i] |= 1 << i;
        col_used[i] |= 1 << i;
        row_used[0] |= 1 << i;
        col_used[0] |= 1 << i;
    }
    fn rec(
        n: usize,
        cell: usize,
        table: &mut Vec<Vec<usize>>,
        row_used: &mut [u64],
        col_used: &mut [u64],
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        let cells = (n - 1) * (n - 1);
        if cell == cells {
            out.push(table.clone());
            return;
        }
        let (r, c) = (1 + cell / (n - 1), 1 + cell % (n - 1));
        for v in 0..n {
            let bit = 1u64 << v;
            if row_used[r] & bit != 0 || col_used[c] & bit != 0 {
                continue;
            }
            row_used[r] |= bit;
            col_used[c] |= bit;
            table[r][c] = v;
            rec(n, cell + 1, table, row_used, col_used, out);
            row_used[r] &= !bit;
            col_used[c] &= !bit;
        }
        table[r][c] = usize::MAX;
    }
    if n == 1 {
        out.push(table);
        return out;
    }
    rec(n, 0, &mut table, &mut row_used, &mut col_used, &mut out);
    out
}

/// Lexicographically least relabelling of a loop table by permutations
/// fixing the identity 0.
pub fn canonical_loop(table: &[Vec<usize>]) -> Vec<usize> {
    let n = table.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<usize>> = None;
    let mut candidate = vec![0; n * n];
    loop {
        for a in 0..n {
            for b in 0..n {
                candidate[perm[a] * n + perm[b]] = perm[table[a][b]];
            }
        }
        if best.as_ref().map_or(true, |b| candidate < *b) {
            best = Some(candidate.clone());
        }
        if !next_permutation(&mut perm[1.min(n)..]) {
            break;
        }
    }
    best.unwrap_or_default()
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let Some(i) = (0..p.len() - 1).rev().find(|&i| p[i] < p[i + 1]) else {
        return false;
    };
    let j = (i + 1..p.len())
        .rev()
        .find(|&j| p[j] > p[i])
        .expect("successor exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    true
}

/// One representative per isomorphism class of loops of order `n`, each the
/// first normalized table of its class.
pub fn loops_up_to_isomorphism(n: usize) -> Vec<Vec<Vec<usize>>> {
    let mut seen = BTreeSet::new();
    normalized_loops(n)
        .into_iter()
        .filter(|t| seen.insert(canonical_loop(t)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_tables_are_groups() {
        for g in groups_up_to_order_8() {
            let n = g.size();
            let mul = g.operation(0);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let ab = g.apply(0, &[a, b]);
                        let bc = g.apply(0, &[b, c]);
                        assert_eq!(g.apply(0, &[ab, c]), g.apply(0, &[a, bc]), "{}", g.name());
                    }
                }
            }
            assert_eq!(mul.table().len(), n * n);
        }
        assert_eq!(dihedral4().size(), 8);
        assert_eq!(symmetric3_table()[1][1], 0);
    }

    #[test]
    fn quaternion_relations() {
        let q = quaternion8();
        let (i, j, k, minus_one) = (2, 4, 6, 1);
        assert_eq!(q.apply(0, &[i, i]), minus_one);
        assert_eq!(q.apply(0, &[i, j]), k);
        assert_eq!(q.apply(0, &[j, i]), k + 1);
    }

    #[test]
    fn loop_counts() {
        let counts: Vec<usize> = (1..=6).map(|n| normalized_loops(n).len()).collect();
        assert_eq!(counts, [1, 1, 1, 4, 56, 9408]);
        let classes: Vec<usize> = (1..=5).map(|n| loops_up_to_isomorphism(n).len()).collect();
        assert_eq!(classes, [1, 1, 1, 2, 6]);
    }

    #[test]
    fn by_name_finds_builtins() {
        assert_eq!(by_name("S3").unwrap().size(), 6);
        assert!(by_name("nope").is_none());
        assert!(names().contains(&String::from("affine_point3")));
    }
}
