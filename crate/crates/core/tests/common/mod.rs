#![allow(dead_code, clippy::needless_range_loop)]

use std::path::PathBuf;

use lattice_theta::{lattice::embed, Embedding, GramLattice};
use rand::Rng;

pub fn fixture(name: &str) -> GramLattice {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .parse()
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn fixtures() -> Vec<(&'static str, GramLattice)> {
    ["z2.gram", "hex.gram", "schiemann1.gram", "schiemann2.gram"]
        .into_iter()
        .map(|n| (n, fixture(n)))
        .collect()
}

/// Random integral lattice: `2G` symmetric with even diagonal in `[4, 12]`
/// and off-diagonal entries in `[−3, 3]`, resampled until positive definite.
pub fn random_integral_lattice<R: Rng>(rng: &mut R, dim: usize) -> GramLattice {
    loop {
        let mut m = vec![vec![0i64; dim]; dim];
        for i in 0..dim {
            m[i][i] = 2 * rng.random_range(2..=6);
            for j in (i + 1)..dim {
                let v = rng.random_range(-3..=3);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        if let Ok(l) = GramLattice::from_scaled_integers(&m, 2) {
            return l;
        }
    }
}

/// Embedded vectors with `0 < ‖v‖² ≤ bound`, found by scanning the box
/// `|x_i| ≤ √(bound·(G⁻¹)_ii)` in floating point.
pub fn brute_force_vectors(
    lattice: &GramLattice,
    embedding: &Embedding,
    bound: f64,
) -> Vec<(Vec<f64>, f64)> {
    let n = lattice.dim();
    let g = lattice.gram_f64();
    let inv = invert(&g);
    let ranges: Vec<i64> = (0..n)
        .map(|i| (bound * inv[i][i]).sqrt().floor() as i64)
        .collect();
    let mut out = Vec::new();
    let mut x: Vec<i64> = ranges.iter().map(|r| -r).collect();
    loop {
        if x.iter().any(|&v| v != 0) {
            let v = embedding.apply(&x);
            let norm: f64 = v.iter().map(|a| a * a).sum();
            if norm <= bound + 1e-9 {
                out.push((v, norm.round()));
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            if x[i] < ranges[i] {
                x[i] += 1;
                break;
            }
            x[i] = -ranges[i];
            i += 1;
        }
    }
}

fn invert(g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, p);
        let d = a[c][c];
        for v in a[c].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                let pivot = a[c].clone();
                for (v, pv) in a[r].iter_mut().zip(pivot) {
                    *v -= f * pv;
                }
            }
        }
    }
    a.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// `a_m = Σ n²|γ|²|δ|²cos²∠(γ,δ) − n|γ|²|δ|²` over embedded pairs.
pub fn oracle_theta11(lattice: &GramLattice, precision: u64) -> Vec<f64> {
    let e = embed(lattice).unwrap();
    let n = lattice.dim() as f64;
    let vs = brute_force_vectors(lattice, &e, precision as f64);
    let mut a = vec![0.0; precision as usize + 1];
    for (g, ng) in &vs {
        for (d, nd) in &vs {
            let m = ng + nd;
            if m > precision as f64 {
                continue;
            }
            let dot: f64 = g.iter().zip(d).map(|(x, y)| x * y).sum();
            let cos = dot / (ng * nd).sqrt();
            a[m as usize] += n * n * ng * nd * cos * cos - n * ng * nd;
        }
    }
    a
}

/// `a_m = Σ cos(2n∠(γ,δ))|γ|^{2n}|δ|^{2n}` over embedded plane pairs.
pub fn oracle_theta_nn(lattice: &GramLattice, order: u32, precision: u64) -> Vec<f64> {
    let e = embed(lattice).unwrap();
    let vs = brute_force_vectors(lattice, &e, precision as f64);
    let k = 2.0 * order as f64;
    let mut a = vec![0.0; precision as usize + 1];
    for (g, ng) in &vs {
        for (d, nd) in &vs {
            let m = ng + nd;
            if m > precision as f64 {
                continue;
            }
            let angle = g[1].atan2(g[0]) - d[1].atan2(d[0]);
            a[m as usize] += (k * angle).cos() * ng.powf(order as f64) * nd.powf(order as f64);
        }
    }
    a
}
