//! Upper unitriangular matrix groups over Z/m, their central quotient, the
//! χ-twist, and the evaluation maps from the free nilpotent group model.
//!
//! U_{n+1} is the group of (n+1)×(n+1) upper triangular matrices with unit
//! diagonal. The center contains the corner subgroup {1 + c·E_{1,n+1}}, and
//! Ū_{n+1} is the quotient by it; cosets are normalized by zeroing the corner
//! entry. The χ-twist a_{ij} ↦ u^{j-i}·a_{ij} is an automorphism for any unit
//! u, and matrix powers with residue exponents are exp(c·log M) on the
//! nilpotent part — exact because gcd(m, n!) = 1.
//!
//! The two distinguished matrices are A (interior entries 1/(j-i)!, i.e. the
//! exponential of the interior superdiagonal shift) and B = 1 + E_{1,2} +
//! E_{n,n+1}. Group elements evaluate to matrices through the ring
//! homomorphism sending the letters to log A and log B: exponentials of Lie
//! series then land on products of A's and B's, so the generators map to A
//! and B on the nose and the map is multiplicative.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeffs::{Modulus, Residue};
use crate::magnus::{check_context, GroupElt, Letter, Word};
use crate::Error;

/// Upper unitriangular matrix in U_{n+1}(Z/m). Entries are stored densely,
/// indexed 1..=n+1 in the row/column convention of the entry functions
/// a_{i,j}.
#[derive(Clone, PartialEq, Eq)]
pub struct UniMatrix {
    n: usize,
    modulus: Modulus,
    /// Row-major (n+1)×(n+1) grid, 0-indexed internally.
    e: Vec<Vec<u64>>,
}

impl UniMatrix {
    pub fn identity(n: usize, modulus: Modulus) -> Result<Self, Error> {
        check_context(n, &modulus)?;
        if n < 1 {
            return Err(Error::BadInput("matrix size needs n >= 1".into()));
        }
        let d = n + 1;
        let e = (0..d)
            .map(|i| (0..d).map(|j| u64::from(i == j)).collect())
            .collect();
        Ok(UniMatrix { n, modulus, e })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    /// Entry a_{i,j} with 1-based indices, i ≤ j.
    pub fn entry(&self, i: usize, j: usize) -> u64 {
        assert!(1 <= i && i <= j && j <= self.n + 1, "bad entry index");
        self.e[i - 1][j - 1]
    }

    /// Set an off-diagonal entry a_{i,j}, 1-based, i < j.
    pub fn set_entry(&mut self, i: usize, j: usize, v: u64) {
        assert!(1 <= i && i < j && j <= self.n + 1, "bad entry index");
        self.e[i - 1][j - 1] = self.modulus.reduce(v);
    }

    pub fn is_identity(&self) -> bool {
        let d = self.n + 1;
        (0..d).all(|i| (i + 1..d).all(|j| self.e[i][j] == 0))
    }

    fn assert_same_context(&self, other: &UniMatrix) {
        assert_eq!(self.n, other.n, "mixed matrix sizes");
        assert_eq!(
            self.modulus.get(),
            other.modulus.get(),
            "mixed moduli in matrix arithmetic"
        );
    }

    pub fn mul(&self, other: &UniMatrix) -> UniMatrix {
        self.assert_same_context(other);
        let d = self.n + 1;
        let md = &self.modulus;
        let mut out = UniMatrix {
            n: self.n,
            modulus: self.modulus.clone(),
            e: vec![vec![0; d]; d],
        };
        for i in 0..d {
            for j in i..d {
                let mut acc = 0u64;
                for k in i..=j {
                    acc = md.add(acc, md.mul(self.e[i][k], other.e[k][j]));
                }
                out.e[i][j] = acc;
            }
        }
        out
    }

    /// Inverse via the truncated geometric series on the nilpotent part.
    pub fn inv(&self) -> UniMatrix {
        let neg_n = nil_scale(&self.nil_part(), self.modulus.neg(1), &self.modulus);
        let mut acc = nil_zero(self.n);
        let mut power = nil_identity_like(self.n);
        for _ in 1..=self.n {
            power = nil_mul(&power, &neg_n, &self.modulus);
            if nil_is_zero(&power) {
                break;
            }
            acc = nil_add(&acc, &power, &self.modulus);
        }
        self.from_nil_plus_one(acc)
    }

    /// Strictly upper part M - 1.
    fn nil_part(&self) -> Vec<Vec<u64>> {
        let d = self.n + 1;
        let mut out = vec![vec![0; d]; d];
        for i in 0..d {
            for j in (i + 1)..d {
                out[i][j] = self.e[i][j];
            }
        }
        out
    }

    fn from_nil_plus_one(&self, nil: Vec<Vec<u64>>) -> UniMatrix {
        let mut e = nil;
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1;
            for v in row.iter_mut().skip(i) {
                *v = self.modulus.reduce(*v);
            }
        }
        UniMatrix {
            n: self.n,
            modulus: self.modulus.clone(),
            e,
        }
    }

    /// log M as a strictly upper triangular array.
    pub fn log_nil(&self) -> Vec<Vec<u64>> {
        let u = self.nil_part();
        let md = &self.modulus;
        let mut acc = nil_zero(self.n);
        let mut power = nil_identity_like(self.n);
        for k in 1..=self.n as u64 {
            power = nil_mul(&power, &u, md);
            if nil_is_zero(&power) {
                break;
            }
            let c = md.inv(k).expect("degrees are invertible");
            let signed = if k % 2 == 1 { c } else { md.neg(c) };
            acc = nil_add(&acc, &nil_scale(&power, signed, md), md);
        }
        acc
    }

    /// exp of a strictly upper triangular array, in the context of `self`.
    pub fn exp_nil(n: usize, modulus: &Modulus, nil: &[Vec<u64>]) -> UniMatrix {
        let md = modulus;
        let nil = nil.to_vec();
        let mut acc = nil_zero(n);
        let mut power = nil_identity_like(n);
        for k in 1..=n as u32 {
            power = nil_mul(&power, &nil, md);
            if nil_is_zero(&power) {
                break;
            }
            let c = md.inv_factorial(k).expect("factorials are invertible");
            acc = nil_add(&acc, &nil_scale(&power, c, md), md);
        }
        let shell = UniMatrix {
            n,
            modulus: modulus.clone(),
            e: vec![],
        };
        shell.from_nil_plus_one(acc)
    }

    /// M^c = exp(c·log M) for a residue exponent; agrees with iterated
    /// multiplication on integer exponents.
    pub fn power(&self, c: u64) -> UniMatrix {
        let l = self.log_nil();
        let scaled = nil_scale(&l, self.modulus.reduce(c), &self.modulus);
        UniMatrix::exp_nil(self.n, &self.modulus, &scaled)
    }

    pub fn power_res(&self, c: &Residue) -> Result<UniMatrix, Error> {
        if c.modulus.get() != self.modulus.get() {
            return Err(Error::ModulusMismatch {
                left: c.modulus.get(),
                right: self.modulus.get(),
            });
        }
        Ok(self.power(c.value))
    }

    /// The χ-twist: a_{ij} ↦ u^{j-i}·a_{ij} for a unit u. An automorphism of
    /// U_{n+1} (the scaling is multiplicative along paths i → j).
    pub fn chi_act(&self, weight: u64) -> Result<UniMatrix, Error> {
        let w = self.modulus.reduce(weight);
        if !self.modulus.is_unit(w) {
            return Err(Error::NotAUnit {
                value: w,
                modulus: self.modulus.get(),
            });
        }
        let d = self.n + 1;
        let mut out = self.clone();
        for i in 0..d {
            for j in (i + 1)..d {
                let scale = self.modulus.pow(w, (j - i) as u64);
                out.e[i][j] = self.modulus.mul(self.e[i][j], scale);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> UniMatrixDto {
        UniMatrixDto {
            n: self.n,
            m: self.modulus.get(),
            entries: self.e.iter().flatten().copied().collect(),
        }
    }

    pub fn from_json(dto: &UniMatrixDto) -> Result<Self, Error> {
        let modulus = Modulus::new(dto.m)?;
        check_context(dto.n, &modulus)?;
        let d = dto.n + 1;
        if dto.entries.len() != d * d {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for size {}, got {}",
                d * d,
                d,
                dto.entries.len()
            )));
        }
        let mut e = vec![vec![0u64; d]; d];
        for i in 0..d {
            for j in 0..d {
                e[i][j] = modulus.reduce(dto.entries[i * d + j]);
            }
        }
        for i in 0..d {
            if e[i][i] != 1 {
                return Err(Error::NotUnitriangular { i: i + 1, j: i + 1 });
            }
            for j in 0..i {
                if e[i][j] != 0 {
                    return Err(Error::NotUnitriangular { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(UniMatrix {
            n: dto.n,
            modulus,
            e,
        })
    }
}

impl fmt::Debug for UniMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "UniMatrix n={} m={} [", self.n, self.modulus.get())?;
        for row in &self.e {
            writeln!(f, "  {:?}", row)?;
        }
        write!(f, "]")
    }
}

/// Serialized matrix: size parameter, modulus, row-major entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniMatrixDto {
    pub n: usize,
    pub m: u64,
    pub entries: Vec<u64>,
}

fn nil_zero(n: usize) -> Vec<Vec<u64>> {
    vec![vec![0; n + 1]; n + 1]
}

/// Identity for the nil-multiplication fold: the unit matrix; `nil_mul`
/// treats inputs as general matrices, so seeding with 1 works.
fn nil_identity_like(n: usize) -> Vec<Vec<u64>> {
    let mut e = nil_zero(n);
    for i in 0..=n {
        e[i][i] = 1;
    }
    e
}

fn nil_mul(a: &[Vec<u64>], b: &Vec<Vec<u64>>, md: &Modulus) -> Vec<Vec<u64>> {
    let d = a.len();
    let mut out = vec![vec![0; d]; d];
    for i in 0..d {
        for j in i..d {
            let mut acc = 0u64;
            for k in i..=j {
                acc = md.add(acc, md.mul(a[i][k], b[k][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

fn nil_add(a: &[Vec<u64>], b: &[Vec<u64>], md: &Modulus) -> Vec<Vec<u64>> {
    a.iter()
        .zip(b.iter())
        .map(|(ra, rb)| ra.iter().zip(rb.iter()).map(|(&x, &y)| md.add(x, y)).collect())
        .collect()
}

fn nil_scale(a: &[Vec<u64>], c: u64, md: &Modulus) -> Vec<Vec<u64>> {
    a.iter()
        .map(|r| r.iter().map(|&x| md.mul(x, c)).collect())
        .collect()
}

fn nil_is_zero(a: &[Vec<u64>]) -> bool {
    a.iter().all(|r| r.iter().all(|&x| x == 0))
}

/// The matrix A: interior entries a_{i,j} = 1/(j-i)! for 1 < i < j < n+1;
/// equivalently exp of the interior superdiagonal shift.
pub fn build_a(n: usize, modulus: &Modulus) -> Result<UniMatrix, Error> {
    let mut a = UniMatrix::identity(n, modulus.clone())?;
    for i in 2..=n {
        for j in (i + 1)..=n {
            a.set_entry(i, j, modulus.inv_factorial((j - i) as u32)?);
        }
    }
    Ok(a)
}

/// The matrix B = 1 + E_{1,2} + E_{n,n+1}.
pub fn build_b(n: usize, modulus: &Modulus) -> Result<UniMatrix, Error> {
    let mut b = UniMatrix::identity(n, modulus.clone())?;
    b.set_entry(1, 2, 1);
    let cur = b.entry(n, n + 1);
    b.set_entry(n, n + 1, modulus.add(cur, 1));
    Ok(b)
}

/// Coset in Ū_{n+1} = U_{n+1} / {1 + c·E_{1,n+1}}, normalized by zeroing the
/// corner entry of the representative. The kernel is central, so the normal
/// form is compatible with multiplication, inversion, powers, and the χ-twist.
#[derive(Clone, PartialEq, Eq)]
pub struct UniCoset {
    rep: UniMatrix,
}

impl UniCoset {
    pub fn from_matrix(m: &UniMatrix) -> UniCoset {
        let mut rep = m.clone();
        rep.set_entry(1, rep.n + 1, 0);
        UniCoset { rep }
    }

    pub fn identity(n: usize, modulus: Modulus) -> Result<Self, Error> {
        Ok(UniCoset {
            rep: UniMatrix::identity(n, modulus)?,
        })
    }

    pub fn rep(&self) -> &UniMatrix {
        &self.rep
    }

    pub fn n(&self) -> usize {
        self.rep.n
    }

    pub fn mul(&self, other: &UniCoset) -> UniCoset {
        UniCoset::from_matrix(&self.rep.mul(&other.rep))
    }

    pub fn inv(&self) -> UniCoset {
        UniCoset::from_matrix(&self.rep.inv())
    }

    pub fn power(&self, c: u64) -> UniCoset {
        UniCoset::from_matrix(&self.rep.power(c))
    }

    pub fn chi_act(&self, weight: u64) -> Result<UniCoset, Error> {
        Ok(UniCoset::from_matrix(&self.rep.chi_act(weight)?))
    }

    pub fn is_identity(&self) -> bool {
        self.rep.is_identity()
    }

    /// Membership in V: every off-diagonal entry away from row 1 and column
    /// n+1 vanishes.
    pub fn in_v(&self) -> bool {
        self.first_entry_outside_v().is_none()
    }

    /// The first (i, j) violating the V condition, if any.
    pub fn first_entry_outside_v(&self) -> Option<(usize, usize)> {
        let n = self.rep.n;
        for i in 2..=n {
            for j in (i + 1)..=n {
                if self.rep.entry(i, j) != 0 {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl fmt::Debug for UniCoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "coset of {:?}", self.rep)
    }
}

/// Evaluate a group element to a matrix: the ring homomorphism with
/// X ↦ log A, Y ↦ log B applied to the Magnus series. Sends the generators
/// exactly to A and B (exp(log A) = A) and is multiplicative because ring
/// homomorphisms commute with products.
pub fn phi_prime(g: &GroupElt) -> Result<UniMatrix, Error> {
    let n = g.trunc();
    let modulus = g.modulus().clone();
    let la = build_a(n, &modulus)?.log_nil();
    let lb = build_b(n, &modulus)?.log_nil();
    let mut cache: HashMap<Word, Vec<Vec<u64>>> = HashMap::new();
    cache.insert(Word::empty(), nil_identity_like(n));
    let mut acc = nil_zero(n);
    for (w, c) in g.series().iter() {
        let mat = word_product(w, &la, &lb, &modulus, &mut cache);
        acc = nil_add(&acc, &nil_scale(&mat, c, &modulus), &modulus);
    }
    // The constant term contributes the unit diagonal; acc currently holds
    // the full evaluated matrix including it.
    let shell = UniMatrix {
        n,
        modulus,
        e: vec![],
    };
    let mut out = acc;
    for (i, row) in out.iter_mut().enumerate() {
        // Diagonal must come out as exactly the constant term 1.
        debug_assert_eq!(row[i], 1, "evaluation must be unitriangular");
        row[i] = 0;
    }
    Ok(shell.from_nil_plus_one(out))
}

/// phi_prime followed by the coset projection to Ū_{n+1}.
pub fn phi(g: &GroupElt) -> Result<UniCoset, Error> {
    Ok(UniCoset::from_matrix(&phi_prime(g)?))
}

fn word_product(
    w: Word,
    la: &Vec<Vec<u64>>,
    lb: &Vec<Vec<u64>>,
    md: &Modulus,
    cache: &mut HashMap<Word, Vec<Vec<u64>>>,
) -> Vec<Vec<u64>> {
    if let Some(m) = cache.get(&w) {
        return m.clone();
    }
    let prefix_of = |len: usize| {
        let mut p = Word::empty();
        for i in 0..len {
            p = p.push(w.letter(i));
        }
        p
    };
    let mut k = w.len();
    while k > 0 && !cache.contains_key(&prefix_of(k)) {
        k -= 1;
    }
    let mut acc = cache[&prefix_of(k)].clone();
    for i in k..w.len() {
        let img = match w.letter(i) {
            Letter::X => la,
            Letter::Y => lb,
        };
        acc = nil_mul(&acc, img, md);
        cache.insert(prefix_of(i + 1), acc.clone());
    }
    acc
}

/// For a matrix whose coset lies in V: the value a_{2,n+1}(C) − a_{1,n}(C),
/// which is also the corner entry of [B, C]. The commutator identity is
/// checked on every call.
pub fn bracket_entry(c: &UniMatrix) -> Result<Residue, Error> {
    let coset = UniCoset::from_matrix(c);
    if let Some((i, j)) = coset.first_entry_outside_v() {
        return Err(Error::NotInV { i, j });
    }
    let n = c.n;
    let md = c.modulus.clone();
    let value = md.sub(c.entry(2, n + 1), c.entry(1, n));
    let b = build_b(n, &md)?;
    let comm = b.mul(c).mul(&b.inv()).mul(&c.inv());
    let mut expected = UniMatrix::identity(n, md.clone())?;
    expected.set_entry(1, n + 1, value);
    if comm != expected {
        return Err(Error::BadInput(format!(
            "commutator [B, C] is not central of value {}",
            value
        )));
    }
    Ok(Residue::new(value, md))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magnus::{dynkin_project, Series};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn md(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn random_uni(n: usize, m: u64, rng: &mut ChaCha8Rng) -> UniMatrix {
        let mut u = UniMatrix::identity(n, md(m)).unwrap();
        for i in 1..=n {
            for j in (i + 1)..=(n + 1) {
                u.set_entry(i, j, rng.gen_range(0..m));
            }
        }
        u
    }

    fn random_group_elt(trunc: usize, m: u64, rng: &mut ChaCha8Rng) -> GroupElt {
        let x = GroupElt::gen_x(trunc, md(m)).unwrap();
        let y = GroupElt::gen_y(trunc, md(m)).unwrap();
        let mut g = GroupElt::one(trunc, md(m));
        for _ in 0..rng.gen_range(1..8) {
            let f = match rng.gen_range(0..4) {
                0 => x.clone(),
                1 => y.clone(),
                2 => x.inv(),
                _ => y.inv(),
            };
            g = g.mul(&f);
        }
        g
    }

    #[test]
    fn a_fixture_at_n_4() {
        let m25 = md(25);
        let a = build_a(4, &m25).unwrap();
        let half = m25.inv(2).unwrap();
        let expected: [[u64; 5]; 5] = [
            [1, 0, 0, 0, 0],
            [0, 1, 1, half, 0],
            [0, 0, 1, 1, 0],
            [0, 0, 0, 1, 0],
            [0, 0, 0, 0, 1],
        ];
        for i in 1..=5 {
            for j in i..=5 {
                assert_eq!(a.entry(i, j), expected[i - 1][j - 1], "entry ({},{})", i, j);
            }
        }
        let b = build_b(4, &m25).unwrap();
        let mut expected_b = UniMatrix::identity(4, m25).unwrap();
        expected_b.set_entry(1, 2, 1);
        expected_b.set_entry(4, 5, 1);
        assert_eq!(b, expected_b);
    }

    #[test]
    fn a_is_exp_of_interior_shift() {
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121), (6, 121)] {
            let a = build_a(n, &md(m)).unwrap();
            let log = a.log_nil();
            // log A = Σ_{i=2}^{n-1} E_{i,i+1}.
            for i in 0..=n {
                for j in (i + 1)..=n {
                    let expected =
                        u64::from(j == i + 1 && (2..=n.saturating_sub(1)).contains(&(i + 1)));
                    assert_eq!(log[i][j], expected, "n={} log entry ({},{})", n, i + 1, j + 1);
                }
            }
        }
    }

    #[test]
    fn b_squared_has_two_blocks() {
        let b = build_b(4, &md(25)).unwrap();
        let sq = b.mul(&b);
        let mut expected = UniMatrix::identity(4, md(25)).unwrap();
        expected.set_entry(1, 2, 2);
        expected.set_entry(4, 5, 2);
        assert_eq!(sq, expected);
    }

    #[test]
    fn inverse_and_power_match_iterated_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121)] {
            for _ in 0..10 {
                let u = random_uni(n, m, &mut rng);
                assert!(u.mul(&u.inv()).is_identity());
                let mut acc = UniMatrix::identity(n, md(m)).unwrap();
                for c in 0..=12u64 {
                    assert_eq!(u.power(c), acc, "exponent {}", c);
                    acc = acc.mul(&u);
                }
            }
        }
    }

    #[test]
    fn entry_power_law_for_a_and_b() {
        // a_{i,i+j}(M^N) = N^j·a_{i,i+j}(M) for M ∈ {A, B}: checked against
        // iterated multiplication.
        for &n in &[3usize, 4, 5, 6] {
            let m49 = md(49);
            for mat in [build_a(n, &m49).unwrap(), build_b(n, &m49).unwrap()] {
                let mut acc = UniMatrix::identity(n, m49.clone()).unwrap();
                for big_n in 0..20u64 {
                    assert_eq!(mat.power(big_n), acc);
                    for i in 1..=n {
                        for j in 1..=(n + 1 - i) {
                            let lhs = acc.entry(i, i + j);
                            let rhs = m49.mul(m49.pow(big_n, j as u64), mat.entry(i, i + j));
                            assert_eq!(lhs, rhs, "n={} N={} entry ({},{})", n, big_n, i, i + j);
                        }
                    }
                    acc = acc.mul(&mat);
                }
            }
        }
        // Pinned value: a_{2,4}(A²) = 2²·(1/2) = 2 at n = 4.
        let a = build_a(4, &md(25)).unwrap();
        assert_eq!(a.mul(&a).entry(2, 4), md(25).mul(4, md(25).inv(2).unwrap()));
        assert_eq!(a.mul(&a).entry(2, 4), 2);
    }

    #[test]
    fn chi_act_is_power_on_a_and_b_and_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121)] {
            let a = build_a(n, &md(m)).unwrap();
            let b = build_b(n, &md(m)).unwrap();
            for c in 1..m.min(30) {
                if !md(m).is_unit(c) {
                    continue;
                }
                assert_eq!(a.chi_act(c).unwrap(), a.power(c), "A n={} c={}", n, c);
                assert_eq!(b.chi_act(c).unwrap(), b.power(c), "B n={} c={}", n, c);
            }
            for _ in 0..20 {
                let u = random_uni(n, m, &mut rng);
                let v = random_uni(n, m, &mut rng);
                let c = loop {
                    let c = rng.gen_range(1..m);
                    if md(m).is_unit(c) {
                        break c;
                    }
                };
                assert_eq!(
                    u.mul(&v).chi_act(c).unwrap(),
                    u.chi_act(c).unwrap().mul(&v.chi_act(c).unwrap())
                );
            }
            // Composition of twists is the twist by the product.
            for _ in 0..10 {
                let u = random_uni(n, m, &mut rng);
                let c1 = 1 + rng.gen_range(0..m / 2) * 2 % (m - 1);
                let c2 = 1 + rng.gen_range(0..m / 2) * 2 % (m - 1);
                if md(m).is_unit(c1) && md(m).is_unit(c2) {
                    assert_eq!(
                        u.chi_act(c2).unwrap().chi_act(c1).unwrap(),
                        u.chi_act(md(m).mul(c1, c2)).unwrap()
                    );
                }
            }
        }
        // Non-unit weight is rejected.
        let a = build_a(4, &md(25)).unwrap();
        assert!(matches!(
            a.chi_act(5),
            Err(Error::NotAUnit {
                value: 5,
                modulus: 25
            })
        ));
    }

    #[test]
    fn in_v_examples() {
        let m49 = md(49);
        for n in [4usize, 5] {
            let b = UniCoset::from_matrix(&build_b(n, &m49).unwrap());
            assert!(b.in_v());
            let a = UniCoset::from_matrix(&build_a(n, &m49).unwrap());
            assert!(!a.in_v());
            assert_eq!(a.first_entry_outside_v(), Some((2, 3)));
            let mut c = UniMatrix::identity(n, m49.clone()).unwrap();
            c.set_entry(1, 3, m49.neg(1));
            c.set_entry(2, n + 1, 1);
            assert!(UniCoset::from_matrix(&c).in_v());
        }
    }

    #[test]
    fn v_is_normal_and_b_is_central_in_it() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for &(n, m) in &[(4usize, 25u64), (5, 49)] {
            let b = UniCoset::from_matrix(&build_b(n, &md(m)).unwrap());
            for _ in 0..25 {
                let u = UniCoset::from_matrix(&random_uni(n, m, &mut rng));
                // Random element of V: support in row 1 and column n+1.
                let mut vm = UniMatrix::identity(n, md(m)).unwrap();
                for j in 2..=(n + 1) {
                    vm.set_entry(1, j, rng.gen_range(0..m));
                }
                for i in 2..=n {
                    vm.set_entry(i, n + 1, rng.gen_range(0..m));
                }
                let v = UniCoset::from_matrix(&vm);
                assert!(v.in_v());
                assert!(u.mul(&v).mul(&u.inv()).in_v(), "conjugate left V");
                assert_eq!(b.mul(&v), v.mul(&b), "B not central in V");
            }
        }
    }

    #[test]
    fn phi_prime_sends_generators_to_a_and_b() {
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121)] {
            let x = GroupElt::gen_x(n, md(m)).unwrap();
            let y = GroupElt::gen_y(n, md(m)).unwrap();
            assert_eq!(phi_prime(&x).unwrap(), build_a(n, &md(m)).unwrap());
            assert_eq!(phi_prime(&y).unwrap(), build_b(n, &md(m)).unwrap());
        }
    }

    #[test]
    fn phi_prime_of_generator_commutator_at_n_3() {
        // [A, B] = 1 − E_{1,3} + E_{2,4} + E_{1,4}.
        let m25 = md(25);
        let x = GroupElt::gen_x(3, m25.clone()).unwrap();
        let y = GroupElt::gen_y(3, m25.clone()).unwrap();
        let c = phi_prime(&x.commutator(&y)).unwrap();
        let mut expected = UniMatrix::identity(3, m25.clone()).unwrap();
        expected.set_entry(1, 3, m25.neg(1));
        expected.set_entry(2, 4, 1);
        expected.set_entry(1, 4, 1);
        assert_eq!(c, expected);
        // Direct matrix commutator gives the same thing.
        let a = build_a(3, &m25).unwrap();
        let b = build_b(3, &m25).unwrap();
        assert_eq!(a.mul(&b).mul(&a.inv()).mul(&b.inv()), expected);
        // And its bracket entry is a_{2,4} − a_{1,3} = 2.
        assert_eq!(bracket_entry(&c).unwrap().value, 2);
    }

    #[test]
    fn phi_prime_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121)] {
            for _ in 0..20 {
                let g = random_group_elt(n, m, &mut rng);
                let h = random_group_elt(n, m, &mut rng);
                assert_eq!(
                    phi_prime(&g.mul(&h)).unwrap(),
                    phi_prime(&g).unwrap().mul(&phi_prime(&h).unwrap())
                );
            }
        }
    }

    #[test]
    fn phi_of_commutator_products_lies_in_v() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        for &(n, m) in &[(4usize, 25u64), (5, 49)] {
            for _ in 0..25 {
                let mut g = GroupElt::one(n, md(m));
                for _ in 0..rng.gen_range(1..4) {
                    let a = random_group_elt(n, m, &mut rng);
                    let b = random_group_elt(n, m, &mut rng);
                    g = g.mul(&a.commutator(&b));
                }
                assert!(g.lcs_degree() >= 2);
                assert!(phi(&g).unwrap().in_v());
            }
        }
    }

    #[test]
    fn phi_factors_through_level_n() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for &(n, m) in &[(3usize, 25u64), (4, 49)] {
            for _ in 0..15 {
                let g = random_group_elt(n, m, &mut rng);
                // Multiply by exp of a random degree-n Lie element: same
                // image at level n, so φ must agree.
                let mut s = Series::zero(n, md(m));
                for _ in 0..4 {
                    let mut w = Word::empty();
                    for _ in 0..n {
                        w = w.push(if rng.gen() { Letter::X } else { Letter::Y });
                    }
                    s.set_coeff(w, rng.gen_range(0..m));
                }
                let z = dynkin_project(&s).unwrap();
                let gz = g.mul(&crate::magnus::LieSeries::new(z).unwrap().exp());
                assert_eq!(
                    g.truncate_to_level(n).unwrap(),
                    gz.truncate_to_level(n).unwrap()
                );
                assert_eq!(phi(&g).unwrap(), phi(&gz).unwrap());
            }
        }
    }

    #[test]
    fn corner_entry_is_the_magnus_coefficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(67);
        for &(n, m) in &[(3usize, 25u64), (4, 49), (5, 121)] {
            for _ in 0..15 {
                // Random element of [π]_n: exp of a random degree-n Lie
                // element.
                let mut s = Series::zero(n, md(m));
                for _ in 0..5 {
                    let mut w = Word::empty();
                    for _ in 0..n {
                        w = w.push(if rng.gen() { Letter::X } else { Letter::Y });
                    }
                    s.set_coeff(w, rng.gen_range(0..m));
                }
                let z = dynkin_project(&s).unwrap();
                let g = crate::magnus::LieSeries::new(z).unwrap().exp();
                assert!(g.is_one() || g.lcs_degree() >= n);
                let mat = phi_prime(&g).unwrap();
                assert_eq!(
                    mat.entry(1, n + 1),
                    g.magnus_coefficient(Word::y_xs_y(n)).value,
                    "n={}",
                    n
                );
            }
        }
    }

    #[test]
    fn bracket_entry_examples_and_rejection() {
        let m49 = md(49);
        for n in [4usize, 5] {
            let mut c = UniMatrix::identity(n, m49.clone()).unwrap();
            c.set_entry(2, n + 1, 1);
            assert_eq!(bracket_entry(&c).unwrap().value, 1);
            let b = build_b(n, &m49).unwrap();
            let comm = b.mul(&c).mul(&b.inv()).mul(&c.inv());
            let mut expected = UniMatrix::identity(n, m49.clone()).unwrap();
            expected.set_entry(1, n + 1, 1);
            assert_eq!(comm, expected);

            let id = UniMatrix::identity(n, m49.clone()).unwrap();
            assert_eq!(bracket_entry(&id).unwrap().value, 0);

            let a = build_a(n, &m49).unwrap();
            assert!(matches!(
                bracket_entry(&a),
                Err(Error::NotInV { i: 2, j: 3 })
            ));
        }
    }

    #[test]
    fn coset_normal_form_is_well_defined() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..20 {
            let n = 4;
            let m = 49;
            let u = random_uni(n, m, &mut rng);
            // Shift by a central corner element: same coset.
            let mut z = UniMatrix::identity(n, md(m)).unwrap();
            z.set_entry(1, n + 1, rng.gen_range(0..m));
            let shifted = u.mul(&z);
            assert_eq!(UniCoset::from_matrix(&u), UniCoset::from_matrix(&shifted));
            // And the normal form is multiplicative either way.
            let v = random_uni(n, m, &mut rng);
            assert_eq!(
                UniCoset::from_matrix(&u).mul(&UniCoset::from_matrix(&v)),
                UniCoset::from_matrix(&u.mul(&v))
            );
        }
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let u = random_uni(4, 1225, &mut rng);
        let text = serde_json::to_string(&u.to_json()).unwrap();
        let dto: UniMatrixDto = serde_json::from_str(&text).unwrap();
        assert_eq!(UniMatrix::from_json(&dto).unwrap(), u);

        let mut bad = u.to_json();
        bad.entries[5 * 1 + 0] = 3; // below-diagonal entry
        assert!(matches!(
            UniMatrix::from_json(&bad),
            Err(Error::NotUnitriangular { i: 2, j: 1 })
        ));
    }
}
