//! Reference implementations used as test oracles. They share no code with
//! the library: plain u64 modular arithmetic, explicit loops, f64 bisection.
#![allow(dead_code)]

pub fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// `f(x)` for `f = coeffs[0] + coeffs[1] x + ...` over GF(p).
pub fn eval_poly(coeffs: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0;
    let mut xp = 1;
    for &c in coeffs {
        acc = (acc + c * xp) % p;
        xp = xp * x % p;
    }
    acc
}

/// Lagrange interpolation at zero, inverse by Fermat.
pub fn lagrange_at_zero(points: &[(u64, u64)], p: u64) -> u64 {
    let mut total = 0;
    for (j, &(xj, yj)) in points.iter().enumerate() {
        let mut num = 1;
        let mut den = 1;
        for (k, &(xk, _)) in points.iter().enumerate() {
            if k != j {
                num = num * ((p - xk) % p) % p;
                den = den * ((xj + p - xk) % p) % p;
            }
        }
        total = (total + yj * num % p * pow_mod(den, p - 2, p)) % p;
    }
    total
}

/// Every vector in GF(p)^len.
pub fn all_vectors(p: u64, len: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// k-subsets of 1..=n.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == k {
            out.push((1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect());
        }
    }
    out
}

/// For every coalition smaller than `m`, every possible view is produced by
/// the same number of polynomials for each secret.
pub fn hiding_by_counting(p: u64, m: usize, n: usize) -> bool {
    for size in 0..m {
        for coalition in subsets(n, size) {
            let mut counts = std::collections::HashMap::<(Vec<u64>, u64), u64>::new();
            for s in 0..p {
                for rest in all_vectors(p, m - 1) {
                    let mut coeffs = vec![s];
                    coeffs.extend(rest);
                    let view: Vec<u64> = coalition.iter().map(|&x| eval_poly(&coeffs, x as u64, p)).collect();
                    *counts.entry((view, s)).or_insert(0) += 1;
                }
            }
            let views: std::collections::HashSet<Vec<u64>> = counts.keys().map(|(v, _)| v.clone()).collect();
            for view in views {
                let per_secret: Vec<u64> = (0..p).map(|s| *counts.get(&(view.clone(), s)).unwrap_or(&0)).collect();
                if per_secret.iter().any(|&c| c != per_secret[0]) {
                    return false;
                }
            }
        }
    }
    true
}

/// Root of `a^2 (u_only - u_all) = (1-a)^2 (u_all - u_none)` on (0, 1) by bisection.
pub fn alpha_star_bisection(u_only: f64, u_all: f64, u_none: f64) -> f64 {
    let g = |a: f64| {
        let h = a * a;
        let t = (1.0 - a) * (1.0 - a);
        (h * u_only + t * u_none) / (h + t) - u_all
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A game as nested vectors: `payoffs[profile][player]`, profiles row-major.
#[derive(Clone, Debug)]
pub struct RefGame {
    pub sizes: Vec<usize>,
    pub payoffs: Vec<Vec<i64>>,
}

impl RefGame {
    pub fn index(&self, profile: &[usize]) -> usize {
        let mut idx = 0;
        for (s, size) in profile.iter().zip(&self.sizes) {
            idx = idx * size + s;
        }
        idx
    }

    fn opponent_profiles(&self, sets: &[Vec<usize>], player: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = vec![vec![0; self.sizes.len()]];
        for j in 0..self.sizes.len() {
            if j == player {
                continue;
            }
            let mut next = Vec::new();
            for prof in &out {
                for &s in &sets[j] {
                    let mut q = prof.clone();
                    q[j] = s;
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    /// Strategies of `player` in `sets[player]` weakly dominated by another member.
    pub fn dominated(&self, sets: &[Vec<usize>], player: usize) -> Vec<usize> {
        let opp = self.opponent_profiles(sets, player);
        let mut out = Vec::new();
        for &sigma in &sets[player] {
            let mut found = false;
            for &tau in &sets[player] {
                if tau == sigma {
                    continue;
                }
                let mut never_worse = true;
                let mut sometimes_better = false;
                for prof in &opp {
                    let mut a = prof.clone();
                    a[player] = tau;
                    let mut b = prof.clone();
                    b[player] = sigma;
                    let (ua, ub) = (self.payoffs[self.index(&a)][player], self.payoffs[self.index(&b)][player]);
                    if ua < ub {
                        never_worse = false;
                    }
                    if ua > ub {
                        sometimes_better = true;
                    }
                }
                if never_worse && sometimes_better {
                    found = true;
                    break;
                }
            }
            if found {
                out.push(sigma);
            }
        }
        out
    }

    /// Delete-all iteration; returns the sequence of surviving sets, last = fixpoint.
    pub fn delete_all(&self) -> Vec<Vec<Vec<usize>>> {
        let mut sets: Vec<Vec<usize>> = self.sizes.iter().map(|&k| (0..k).collect()).collect();
        let mut history = vec![sets.clone()];
        loop {
            let doomed: Vec<Vec<usize>> = (0..self.sizes.len()).map(|i| self.dominated(&sets, i)).collect();
            if doomed.iter().all(|d| d.is_empty()) {
                return history;
            }
            for (set, d) in sets.iter_mut().zip(&doomed) {
                set.retain(|s| !d.contains(s));
            }
            history.push(sets.clone());
        }
    }
}
