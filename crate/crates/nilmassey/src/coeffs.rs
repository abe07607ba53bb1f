//! Arithmetic over Z/m with a known prime-power factorization.
//!
//! Every modulus in this crate is a product of prime powers p^a with each
//! prime larger than the ambient truncation degree, so small factorials are
//! invertible and exp/log denominators never divide zero. The factorization
//! is computed once and carried with the modulus; CRT splitting and joining,
//! linear solving, and canonical reduction modulo a submodule all work one
//! prime power at a time.
//!
//! Linear systems over Z/p^a are solved by Gaussian elimination with
//! valuation pivoting: the pivot in each column is an entry of minimal
//! p-adic valuation, so divisions are exact and solvability is decided
//! exactly (no rational arithmetic, no Smith normal form).

use crate::Error;

/// A modulus m ≥ 2 together with its factorization into prime powers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    m: u64,
    factors: Vec<(u64, u32)>,
}

impl Modulus {
    /// Factor `m` by trial division. Moduli here are desk-scale (≤ ~10^9).
    pub fn new(m: u64) -> Result<Self, Error> {
        if m < 2 {
            return Err(Error::BadModulus {
                m,
                reason: "modulus must be at least 2".into(),
            });
        }
        let mut rest = m;
        let mut factors = Vec::new();
        let mut p = 2u64;
        while p * p <= rest {
            if rest % p == 0 {
                let mut a = 0u32;
                while rest % p == 0 {
                    rest /= p;
                    a += 1;
                }
                factors.push((p, a));
            }
            p += 1;
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(Modulus { m, factors })
    }

    pub fn get(&self) -> u64 {
        self.m
    }

    /// Prime-power factorization, primes ascending.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    /// True when gcd(m, n!) = 1, i.e. every prime factor exceeds n.
    pub fn coprime_to_factorial(&self, n: u32) -> bool {
        self.factors.iter().all(|&(p, _)| p > n as u64)
    }

    pub fn reduce_i128(&self, v: i128) -> u64 {
        v.rem_euclid(self.m as i128) as u64
    }

    pub fn reduce(&self, v: u64) -> u64 {
        v % self.m
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.m
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.m - b % self.m) % self.m
    }

    pub fn neg(&self, a: u64) -> u64 {
        (self.m - a % self.m) % self.m
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut e: u64) -> u64 {
        let mut acc = 1 % self.m;
        base %= self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn is_unit(&self, a: u64) -> bool {
        gcd(a % self.m, self.m) == 1
    }

    /// Inverse by extended gcd; errors with the witness value if `a` is not a
    /// unit.
    pub fn inv(&self, a: u64) -> Result<u64, Error> {
        let a = a % self.m;
        let (g, x, _) = ext_gcd(a as i128, self.m as i128);
        if g != 1 {
            return Err(Error::NotAUnit {
                value: a,
                modulus: self.m,
            });
        }
        Ok(self.reduce_i128(x))
    }

    /// 1/k! mod m for k up to the truncation degree. Callers guarantee
    /// coprimality up front (`coprime_to_factorial`).
    pub fn inv_factorial(&self, k: u32) -> Result<u64, Error> {
        let mut f = 1u64;
        for i in 2..=k as u64 {
            f = self.mul(f, i % self.m);
        }
        self.inv(f)
    }
}

/// A residue paired with its modulus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residue {
    pub value: u64,
    pub modulus: Modulus,
}

impl Residue {
    pub fn new(value: u64, modulus: Modulus) -> Self {
        Residue {
            value: value % modulus.get(),
            modulus,
        }
    }

    pub fn from_i64(value: i64, modulus: Modulus) -> Self {
        Residue {
            value: modulus.reduce_i128(value as i128),
            modulus,
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a·x + b·y = g.
fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        (a, 1, 0)
    } else {
        let (g, x, y) = ext_gcd(b, a % b);
        (g, y, x - (a / b) * y)
    }
}

/// Split a residue into one component per prime power of its modulus.
pub fn crt_split(r: &Residue) -> Vec<Residue> {
    r.modulus
        .factors()
        .iter()
        .map(|&(p, a)| {
            let q = p.pow(a);
            // Unwrap is fine: a prime power is a valid modulus.
            Residue::new(r.value % q, Modulus::new(q).unwrap())
        })
        .collect()
}

/// Rebuild a residue mod the product of the (pairwise coprime) component
/// moduli.
pub fn crt_join(parts: &[Residue]) -> Result<Residue, Error> {
    if parts.is_empty() {
        return Err(Error::BadInput("crt_join of no components".into()));
    }
    let mut m_acc = parts[0].modulus.get() as i128;
    let mut v_acc = parts[0].value as i128;
    for part in &parts[1..] {
        let m2 = part.modulus.get() as i128;
        let (g, x, _) = ext_gcd(m_acc, m2);
        if g != 1 {
            return Err(Error::BadInput(format!(
                "crt_join components not coprime: {} and {}",
                m_acc, m2
            )));
        }
        // v ≡ v_acc (mod m_acc), v ≡ part.value (mod m2).
        let diff = (part.value as i128 - v_acc).rem_euclid(m2);
        let t = (x.rem_euclid(m2) * diff).rem_euclid(m2);
        v_acc += m_acc * t;
        m_acc *= m2;
        v_acc = v_acc.rem_euclid(m_acc);
    }
    let modulus = Modulus::new(m_acc as u64)?;
    Ok(Residue::new(v_acc as u64, modulus))
}

/// p-adic valuation, capped at `cap` (the exponent of the prime power);
/// vp(0) = cap.
fn vp(mut x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    while v < cap && x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Solve A·x = b over Z/m. Returns one solution if any exists, `None` if the
/// system is inconsistent. A is given in row-major form, `a[row][col]`.
pub fn solve_linear(
    a: &[Vec<u64>],
    b: &[u64],
    modulus: &Modulus,
) -> Result<Option<Vec<u64>>, Error> {
    let rows = a.len();
    if rows != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} rows but rhs has {}",
            rows,
            b.len()
        )));
    }
    let cols = a.first().map_or(0, |r| r.len());
    if a.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix".into()));
    }
    if rows == 0 || cols == 0 {
        return Ok(if b.iter().all(|&v| v % modulus.get() == 0) {
            Some(vec![0; cols])
        } else {
            None
        });
    }

    let mut parts: Vec<Vec<u64>> = Vec::new();
    for &(p, k) in modulus.factors() {
        let q = p.pow(k);
        let qm = Modulus::new(q)?;
        let ap: Vec<Vec<u64>> = a
            .iter()
            .map(|row| row.iter().map(|&v| v % q).collect())
            .collect();
        let bp: Vec<u64> = b.iter().map(|&v| v % q).collect();
        match solve_mod_prime_power(ap, bp, p, k, &qm) {
            Some(x) => parts.push(x),
            None => return Ok(None),
        }
    }

    // Join component solutions coordinate-wise.
    let mut x = Vec::with_capacity(cols);
    for c in 0..cols {
        let comps: Vec<Residue> = modulus
            .factors()
            .iter()
            .zip(parts.iter())
            .map(|(&(p, k), xs)| Residue::new(xs[c], Modulus::new(p.pow(k)).unwrap()))
            .collect();
        x.push(crt_join(&comps)?.value);
    }
    Ok(Some(x))
}

/// Diagonalization over Z/p^k (Smith-style): pick the minimal-valuation
/// entry of the remaining submatrix as pivot, clear its row and column with
/// exact divisions, and track the column operations so the diagonal system
/// solves coordinate-by-coordinate. Unlike plain triangular elimination this
/// is complete: non-unit pivots cannot force a wrong representative choice.
fn solve_mod_prime_power(
    mut a: Vec<Vec<u64>>,
    mut b: Vec<u64>,
    p: u64,
    k: u32,
    qm: &Modulus,
) -> Option<Vec<u64>> {
    let rows = a.len();
    let cols = a[0].len();
    // x = q·z for the tracked unimodular column transform q.
    let mut q: Vec<Vec<u64>> = (0..cols)
        .map(|i| (0..cols).map(|j| u64::from(i == j)).collect())
        .collect();
    let mut diag: Vec<u32> = Vec::new();
    let rank_cap = rows.min(cols);
    while diag.len() < rank_cap {
        let r = diag.len();
        // Minimal-valuation entry of the submatrix r.., r..
        let mut best: Option<(usize, usize, u32)> = None;
        for i in r..rows {
            for j in r..cols {
                if a[i][j] != 0 {
                    let v = vp(a[i][j], p, k);
                    if best.map_or(true, |(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((bi, bj, e)) = best else { break };
        a.swap(r, bi);
        b.swap(r, bi);
        if bj != r {
            for row in a.iter_mut() {
                row.swap(r, bj);
            }
            for row in q.iter_mut() {
                row.swap(r, bj);
            }
        }
        // Normalize the pivot to exactly p^e.
        let pe = p.pow(e);
        let unit_inv = qm.inv(a[r][r] / pe).expect("unit part is a unit");
        for v in a[r].iter_mut() {
            *v = qm.mul(*v, unit_inv);
        }
        b[r] = qm.mul(b[r], unit_inv);
        // Clear the pivot column: every entry has valuation ≥ e, so the
        // division is exact.
        for i in 0..rows {
            if i != r && a[i][r] != 0 {
                let factor = a[i][r] / pe;
                for j in r..cols {
                    let t = qm.mul(factor, a[r][j]);
                    a[i][j] = qm.sub(a[i][j], t);
                }
                b[i] = qm.sub(b[i], qm.mul(factor, b[r]));
            }
        }
        // Clear the pivot row with column operations, mirrored onto q.
        for j in (r + 1)..cols {
            if a[r][j] != 0 {
                let factor = a[r][j] / pe;
                for i in 0..rows {
                    let t = qm.mul(factor, a[i][r]);
                    a[i][j] = qm.sub(a[i][j], t);
                }
                for row in q.iter_mut() {
                    let t = qm.mul(factor, row[r]);
                    row[j] = qm.sub(row[j], t);
                }
            }
        }
        diag.push(e);
    }
    let r = diag.len();
    // Leftover rows must have zero right-hand side.
    for i in r..rows {
        if b[i] != 0 {
            return None;
        }
    }
    // Diagonal solve: p^e · z = b needs vp(b) ≥ e.
    let mut z = vec![0u64; cols];
    for (t, &e) in diag.iter().enumerate() {
        if b[t] == 0 {
            continue;
        }
        if vp(b[t], p, k) < e {
            return None;
        }
        z[t] = b[t] / p.pow(e);
    }
    // Undo the change of variables.
    let x = (0..cols)
        .map(|i| {
            z.iter()
                .enumerate()
                .fold(0u64, |acc, (j, &zj)| qm.add(acc, qm.mul(q[i][j], zj)))
        })
        .collect();
    Some(x)
}

/// Canonical representative of `v` modulo the span of `gens` in (Z/m)^len.
///
/// Two vectors get the same representative exactly when they differ by an
/// element of the span; the result is the "class token" used in reports.
/// Works per prime power via a Howell-style basis of the span.
pub fn canonical_rep(v: &[u64], gens: &[Vec<u64>], modulus: &Modulus) -> Result<Vec<u64>, Error> {
    let len = v.len();
    if gens.iter().any(|g| g.len() != len) {
        return Err(Error::DimensionMismatch(
            "span generator length differs from vector length".into(),
        ));
    }
    let mut parts: Vec<Vec<u64>> = Vec::new();
    for &(p, k) in modulus.factors() {
        let q = p.pow(k);
        let qm = Modulus::new(q)?;
        let rows: Vec<Vec<u64>> = gens
            .iter()
            .map(|g| g.iter().map(|&x| x % q).collect())
            .collect();
        let basis = howell_basis(rows, p, k, &qm);
        let vv: Vec<u64> = v.iter().map(|&x| x % q).collect();
        parts.push(reduce_by_howell(vv, &basis, p, &qm));
    }
    let mut out = Vec::with_capacity(len);
    for c in 0..len {
        let comps: Vec<Residue> = modulus
            .factors()
            .iter()
            .zip(parts.iter())
            .map(|(&(p, k), xs)| Residue::new(xs[c], Modulus::new(p.pow(k)).unwrap()))
            .collect();
        out.push(crt_join(&comps)?.value);
    }
    Ok(out)
}

/// Howell-style basis of the row span over Z/p^k: echelon with
/// minimal-valuation pivots, closed under multiplication by p (so reduction
/// against it yields a canonical coset representative).
fn howell_basis(rows: Vec<Vec<u64>>, p: u64, k: u32, qm: &Modulus) -> Vec<Vec<u64>> {
    let mut pool: Vec<Vec<u64>> = rows
        .into_iter()
        .filter(|r| r.iter().any(|&x| x != 0))
        .collect();
    let mut basis: Vec<(usize, u32, Vec<u64>)> = Vec::new(); // (lead col, lead valuation, row)
    while let Some(mut row) = pool.pop() {
        loop {
            let Some(lead) = row.iter().position(|&x| x != 0) else {
                break;
            };
            let e = vp(row[lead], p, k);
            match basis.iter().position(|&(bl, _, _)| bl == lead) {
                None => {
                    // Normalize so the leading entry is exactly p^e.
                    let unit = row[lead] / p.pow(e);
                    let unit_inv = qm.inv(unit).expect("unit part is a unit");
                    for v in row.iter_mut() {
                        *v = qm.mul(*v, unit_inv);
                    }
                    // Close under multiplication by p: p^(k-e)·row leads
                    // strictly further right.
                    let shifted: Vec<u64> = row
                        .iter()
                        .map(|&v| qm.mul(v, p.pow(k - e)))
                        .collect();
                    if shifted.iter().any(|&x| x != 0) {
                        pool.push(shifted);
                    }
                    let pos = basis
                        .iter()
                        .position(|&(bl, _, _)| bl > lead)
                        .unwrap_or(basis.len());
                    basis.insert(pos, (lead, e, row));
                    break;
                }
                Some(bi) => {
                    let (_, be, brow) = &basis[bi];
                    if *be <= e {
                        // Exact elimination of the leading entry.
                        let factor = row[lead] / p.pow(*be);
                        let brow = brow.clone();
                        for (v, bv) in row.iter_mut().zip(brow.iter()) {
                            *v = qm.sub(*v, qm.mul(factor, *bv));
                        }
                    } else {
                        // The new row has the smaller valuation: retire the
                        // old pivot to the pool and requeue both, new row on
                        // top so it claims the column first and the old row
                        // is then eliminated against it.
                        let (_, _, old) = basis.remove(bi);
                        pool.push(old);
                        pool.push(row);
                        break;
                    }
                }
            }
        }
    }
    basis.into_iter().map(|(_, _, r)| r).collect()
}

/// Reduce `v` to the canonical representative of its coset modulo the span of
/// a Howell basis: at each leading column with pivot p^e the representative's
/// entry lies in [0, p^e).
fn reduce_by_howell(mut v: Vec<u64>, basis: &[Vec<u64>], p: u64, qm: &Modulus) -> Vec<u64> {
    for row in basis {
        let lead = row.iter().position(|&x| x != 0).expect("basis rows nonzero");
        let e = vp(row[lead], p, u32::MAX);
        let pe = p.pow(e);
        debug_assert_eq!(row[lead], pe, "howell rows are normalized");
        let q = v[lead] / pe;
        if q != 0 {
            for (vv, bv) in v.iter_mut().zip(row.iter()) {
                *vv = qm.sub(*vv, qm.mul(q, *bv));
            }
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    #[test]
    fn factors_products_of_prime_powers() {
        assert_eq!(m(25).factors(), &[(5, 2)]);
        assert_eq!(m(125).factors(), &[(5, 3)]);
        assert_eq!(m(1225).factors(), &[(5, 2), (7, 2)]);
        assert!(Modulus::new(1).is_err());
        assert!(Modulus::new(0).is_err());
    }

    #[test]
    fn coprimality_with_factorials() {
        assert!(m(25).coprime_to_factorial(4));
        assert!(!m(25).coprime_to_factorial(5));
        assert!(m(1225).coprime_to_factorial(4));
        assert!(!m(1225).coprime_to_factorial(7));
    }

    #[test]
    fn inverse_of_two_mod_25() {
        assert_eq!(m(25).inv(2).unwrap(), 13);
    }

    #[test]
    fn non_units_are_rejected_with_witness() {
        match m(25).inv(10) {
            Err(Error::NotAUnit { value, modulus }) => {
                assert_eq!((value, modulus), (10, 25));
            }
            other => panic!("expected NotAUnit, got {:?}", other),
        }
    }

    #[test]
    fn inverses_multiply_to_one() {
        let md = m(1225);
        for a in 1..1225 {
            if md.is_unit(a) {
                let inv = md.inv(a).unwrap();
                assert_eq!(md.mul(a, inv), 1, "a = {}", a);
            } else {
                assert!(md.inv(a).is_err());
            }
        }
    }

    #[test]
    fn crt_round_trips() {
        let md = m(1225);
        for v in [0u64, 1, 24, 49, 611, 1224] {
            let r = Residue::new(v, md.clone());
            let parts = crt_split(&r);
            assert_eq!(parts.len(), 2);
            let back = crt_join(&parts).unwrap();
            assert_eq!(back.value, v);
            assert_eq!(back.modulus.get(), 1225);
        }
    }

    #[test]
    fn solve_divisible_singular_system() {
        // 5x = 10 mod 25 is solvable (x ≡ 2 mod 5).
        let md = m(25);
        let sol = solve_linear(&[vec![5]], &[10], &md).unwrap().unwrap();
        assert_eq!(md.mul(5, sol[0]), 10);
    }

    #[test]
    fn solve_detects_inconsistency() {
        // 5x = 1 mod 25 has no solution.
        let md = m(25);
        assert_eq!(solve_linear(&[vec![5]], &[1], &md).unwrap(), None);
    }

    #[test]
    fn solve_small_full_rank_system() {
        let md = m(49);
        let a = vec![vec![2, 3], vec![1, 4]];
        let b = vec![8, 13];
        let x = solve_linear(&a, &b, &md).unwrap().unwrap();
        for (row, rhs) in a.iter().zip(b.iter()) {
            let got = md.add(md.mul(row[0], x[0]), md.mul(row[1], x[1]));
            assert_eq!(got, *rhs);
        }
    }

    #[test]
    fn solve_random_consistent_systems() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for &modval in &[25u64, 49, 121, 125, 1225] {
            let md = m(modval);
            for _ in 0..40 {
                let rows = rng.gen_range(1..6);
                let cols = rng.gen_range(1..6);
                let a: Vec<Vec<u64>> = (0..rows)
                    .map(|_| (0..cols).map(|_| rng.gen_range(0..modval)).collect())
                    .collect();
                let x0: Vec<u64> = (0..cols).map(|_| rng.gen_range(0..modval)).collect();
                let b: Vec<u64> = a
                    .iter()
                    .map(|row| {
                        row.iter()
                            .zip(x0.iter())
                            .fold(0u64, |acc, (&c, &x)| md.add(acc, md.mul(c, x)))
                    })
                    .collect();
                let x = solve_linear(&a, &b, &md)
                    .unwrap()
                    .expect("constructed system must be solvable");
                for (row, rhs) in a.iter().zip(b.iter()) {
                    let got = row
                        .iter()
                        .zip(x.iter())
                        .fold(0u64, |acc, (&c, &xx)| md.add(acc, md.mul(c, xx)));
                    assert_eq!(got, *rhs);
                }
            }
        }
    }

    #[test]
    fn canonical_rep_separates_cosets() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &modval in &[25u64, 49, 125, 1225] {
            let md = m(modval);
            for _ in 0..30 {
                let len = rng.gen_range(1..5);
                let ngens = rng.gen_range(0..4);
                let gens: Vec<Vec<u64>> = (0..ngens)
                    .map(|_| (0..len).map(|_| rng.gen_range(0..modval)).collect())
                    .collect();
                let v: Vec<u64> = (0..len).map(|_| rng.gen_range(0..modval)).collect();
                // Shifting by a random span element must not change the token.
                let mut shifted = v.clone();
                for g in &gens {
                    let c = rng.gen_range(0..modval);
                    for (s, gv) in shifted.iter_mut().zip(g.iter()) {
                        *s = md.add(*s, md.mul(c, *gv));
                    }
                }
                let t1 = canonical_rep(&v, &gens, &md).unwrap();
                let t2 = canonical_rep(&shifted, &gens, &md).unwrap();
                assert_eq!(t1, t2);

                // Agreeing tokens mean the difference is in the span:
                // cross-check with the linear solver.
                let w: Vec<u64> = (0..len).map(|_| rng.gen_range(0..modval)).collect();
                let tw = canonical_rep(&w, &gens, &md).unwrap();
                let diff: Vec<u64> = v.iter().zip(w.iter()).map(|(&a, &b)| md.sub(a, b)).collect();
                // Solve gens^T · c = diff (columns are the generators).
                let a_mat: Vec<Vec<u64>> = (0..len)
                    .map(|i| gens.iter().map(|g| g[i]).collect())
                    .collect();
                let solvable = solve_linear(&a_mat, &diff, &md).unwrap().is_some();
                assert_eq!(t1 == tw, solvable);
            }
        }
    }
}
