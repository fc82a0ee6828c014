//! Finite-group models: a Cayley table, diagonal operators `v_j δ_g = c_j(g) δ_g`
//! built from cocycle coordinates, and the Lindblad generator
//! `Σ_j w_j (v_j² x + x v_j² − 2 v_j x v_j)` on `B(ℓ²(G))`.

use serde::{Deserialize, Serialize};

use crate::algebra::TracialAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::qms::{Jump, LindbladGenerator};

/// Eigen-relation residual above which the coordinates are reported as not
/// coming from a cocycle.
pub const COCYCLE_WARN_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteGroupModel {
    pub labels: Vec<String>,
    /// `table[g][h] = gh`.
    pub table: Vec<Vec<usize>>,
    pub identity: usize,
    /// `coords[g][j] = c_j(g)`.
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `ψ(g) = Σ_j w_j c_j(g)²`.
    pub psi: Vec<f64>,
    /// Largest `‖ℒλ_g − ψ(g)λ_g‖` over the group.
    pub eigen_residual: f64,
    /// Every `v_j` is a projection (coordinates in `{0, 1}`).
    pub projections: bool,
    pub warning: Option<String>,
}

impl FiniteGroupModel {
    pub fn order(&self) -> usize {
        self.table.len()
    }

    /// Left-regular `λ_g δ_h = δ_{gh}`.
    pub fn lambda(&self, g: usize) -> CMat {
        let n = self.order();
        let mut m = CMat::zeros(n, n);
        for h in 0..n {
            m[(self.table[g][h], h)] = c(1.0);
        }
        m
    }

    /// `v_j` as a diagonal matrix.
    pub fn v(&self, j: usize) -> CMat {
        CMat::from_diagonal(&CVec::from_iterator(self.order(), self.coords.iter().map(|row| c(row[j]))))
    }
}

/// Checks the group axioms; returns the identity element.
pub fn validate_table(table: &[Vec<usize>]) -> Result<usize> {
    let n = table.len();
    if n == 0 {
        return Err(Error::NotAGroup("empty table".into()));
    }
    for (g, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::NotAGroup(format!("row {g} has {} entries, expected {n}", row.len())));
        }
        if let Some(&bad) = row.iter().find(|&&x| x >= n) {
            return Err(Error::NotAGroup(format!("entry {bad} in row {g} is out of range")));
        }
    }
    for g in 0..n {
        let mut row_seen = vec![false; n];
        let mut col_seen = vec![false; n];
        for h in 0..n {
            row_seen[table[g][h]] = true;
            col_seen[table[h][g]] = true;
        }
        if row_seen.contains(&false) || col_seen.contains(&false) {
            return Err(Error::NotAGroup(format!("row or column {g} is not a permutation")));
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
        .ok_or_else(|| Error::NotAGroup("no identity element".into()))?;
    for a in 0..n {
        for b in 0..n {
            for x in 0..n {
                if table[table[a][b]][x] != table[a][table[b][x]] {
                    return Err(Error::NotAGroup(format!("({a}·{b})·{x} ≠ {a}·({b}·{x})")));
                }
            }
        }
    }
    Ok(identity)
}

/// Builds the generator from per-element coordinates `c_j(g)` and weights
/// `w_j`, and reports the eigen-relation `ℒλ_g = ψ(g)λ_g`.
pub fn group_lindblad_from_cocycle(
    labels: Vec<String>,
    table: Vec<Vec<usize>>,
    coords: Vec<Vec<f64>>,
    weights: Vec<f64>,
) -> Result<(FiniteGroupModel, LindbladGenerator)> {
    let identity = validate_table(&table)?;
    let n = table.len();
    let d = weights.len();
    if coords.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: coords.len() });
    }
    if let Some(row) = coords.iter().find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: row.len() });
    }
    if labels.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: labels.len() });
    }
    let psi: Vec<f64> = coords.iter().map(|row| row.iter().zip(&weights).map(|(x, w)| w * x * x).sum()).collect();
    let projections = coords.iter().flatten().all(|&x| x == 0.0 || x == 1.0);
    let mut model = FiniteGroupModel {
        labels,
        table,
        identity,
        coords,
        weights,
        psi,
        eigen_residual: 0.0,
        projections,
        warning: None,
    };
    let jumps = (0..d)
        .filter(|&j| model.coords.iter().any(|row| row[j] != 0.0))
        .map(|j| Jump::new(model.weights[j], model.v(j)))
        .collect::<Result<Vec<_>>>()?;
    let gen = LindbladGenerator::new(TracialAlgebra::full(n), jumps)?;
    let mut residual: f64 = 0.0;
    for g in 0..n {
        let lg = model.lambda(g);
        let r = gen.apply(&lg)? - &lg * c(model.psi[g]);
        residual = residual.max(linalg::frobenius(&r) / (n as f64).sqrt());
    }
    model.eigen_residual = residual;
    if residual > COCYCLE_WARN_TOL {
        model.warning = Some(format!(
            "ℒλ_g ≠ ψ(g)λ_g (residual {residual:.3e}); the coordinates may not come from a 1-cocycle"
        ));
    }
    Ok((model, gen))
}

/// `Z_n` with `n` even: word length `min(k, n−k)` from `n/2` projections.
pub fn cyclic_group_model(n: usize) -> Result<(FiniteGroupModel, LindbladGenerator)> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::Unsupported(format!("Z_n needs n even (embed Z_n into Z_2n), got {n}")));
    }
    if n > 8 {
        return Err(Error::SizeCap { size: n, cap: 8 });
    }
    let half = n / 2;
    let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    let coords = (0..n)
        .map(|k| {
            (1..=half)
                .map(|j| {
                    let on = if k == 0 {
                        false
                    } else if k <= half {
                        j <= k
                    } else {
                        j > k - half
                    };
                    if on { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    let labels = (0..n).map(|k| k.to_string()).collect();
    group_lindblad_from_cocycle(labels, table, coords, vec![1.0; half])
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// `S_n` with the Hamming length `#{j : σ(j) ≠ j}` from `n²` projections of
/// weight ½.
pub fn symmetric_group_model(n: usize) -> Result<(FiniteGroupModel, LindbladGenerator)> {
    if !(2..=4).contains(&n) {
        return Err(Error::SizeCap { size: n, cap: 4 });
    }
    let perms = permutations(n);
    let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed under composition");
    let table = perms
        .iter()
        .map(|s| perms.iter().map(|t| index(&t.iter().map(|&j| s[j]).collect())).collect())
        .collect();
    let coords = perms
        .iter()
        .map(|s| {
            let mut row = Vec::with_capacity(n * n);
            for j in 0..n {
                for k in 0..n {
                    let x = if j == k { (s[j] != j) as u8 } else { (s[k] == j) as u8 };
                    row.push(x as f64);
                }
            }
            row
        })
        .collect();
    let labels = perms
        .iter()
        .map(|p| p.iter().map(|j| (j + 1).to_string()).collect::<Vec<_>>().join(""))
        .collect();
    group_lindblad_from_cocycle(labels, table, coords, vec![0.5; n * n])
}
