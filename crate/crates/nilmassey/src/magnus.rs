//! Truncated noncommutative power series and the Magnus model of free
//! nilpotent groups.
//!
//! Words in the letters X, Y index coefficients of Z/m-valued series truncated
//! above a degree cap n. The free group on x, y embeds by x ↦ 1 + X,
//! y ↦ 1 + Y; the image of the quotient by the (n+1)-st lower central series
//! term is exactly the grouplike elements: constant term 1 and logarithm a Lie
//! series. Lie-ness is decided degree by degree with the Dynkin criterion
//! (left-bracketing a degree-k homogeneous component multiplies Lie elements
//! by k), which also yields a projector onto Lie elements without ever
//! choosing a Hall basis.
//!
//! Because gcd(m, n!) = 1, every denominator in exp, log, and the Dynkin
//! projector is a unit, so the correspondence exp/log between grouplike
//! elements and Lie series is exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::coeffs::{Modulus, Residue};
use crate::Error;

/// Hard cap on the truncation degree; beyond this the word index no longer
/// fits the packing and the series grow past desk scale.
pub const MAX_TRUNC: usize = 12;

/// One letter of the two-letter alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Letter {
    X,
    Y,
}

/// A word in X, Y of length ≤ [`MAX_TRUNC`], packed as bits (position 0 is
/// the leftmost letter; X = 0, Y = 1) plus a length field.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(u32);

impl Word {
    pub fn empty() -> Self {
        Word(0)
    }

    pub fn single(l: Letter) -> Self {
        Word::empty().push(l)
    }

    pub fn len(self) -> usize {
        (self.0 >> 16) as usize
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    pub fn letter(self, i: usize) -> Letter {
        debug_assert!(i < self.len());
        if (self.0 >> i) & 1 == 1 {
            Letter::Y
        } else {
            Letter::X
        }
    }

    /// Append a letter on the right.
    pub fn push(self, l: Letter) -> Self {
        let len = self.len();
        debug_assert!(len < MAX_TRUNC);
        let bit = match l {
            Letter::X => 0u32,
            Letter::Y => 1u32,
        };
        Word((((len + 1) as u32) << 16) | (self.0 & 0xffff) | (bit << len))
    }

    /// Prepend a letter on the left.
    pub fn unshift(self, l: Letter) -> Self {
        let len = self.len();
        debug_assert!(len < MAX_TRUNC);
        let bit = match l {
            Letter::X => 0u32,
            Letter::Y => 1u32,
        };
        Word((((len + 1) as u32) << 16) | (((self.0 & 0xffff) << 1) & 0xffff) | bit)
    }

    /// Concatenation `self · other`.
    pub fn concat(self, other: Word) -> Self {
        let l1 = self.len();
        let l2 = other.len();
        debug_assert!(l1 + l2 <= MAX_TRUNC);
        Word(
            (((l1 + l2) as u32) << 16)
                | (self.0 & 0xffff)
                | (((other.0 & 0xffff) << l1) & 0xffff),
        )
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        if s.len() > MAX_TRUNC {
            return Err(Error::BadInput(format!(
                "word {:?} longer than the {} letter cap",
                s, MAX_TRUNC
            )));
        }
        let mut w = Word::empty();
        for ch in s.chars() {
            w = match ch {
                'X' => w.push(Letter::X),
                'Y' => w.push(Letter::Y),
                _ => {
                    return Err(Error::BadInput(format!(
                        "word {:?} contains letter {:?}; only X and Y are allowed",
                        s, ch
                    )))
                }
            };
        }
        Ok(w)
    }

    /// The word Y X^(n-2) Y whose coefficient carries the top corner of the
    /// matrix evaluation; defined for n ≥ 2.
    pub fn y_xs_y(n: usize) -> Self {
        debug_assert!((2..=MAX_TRUNC).contains(&n));
        let mut w = Word::single(Letter::Y);
        for _ in 0..(n - 2) {
            w = w.push(Letter::X);
        }
        w.push(Letter::Y)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            match self.letter(i) {
                Letter::X => write!(f, "X")?,
                Letter::Y => write!(f, "Y")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", self)
    }
}

/// A Z/m-linear combination of words of length ≤ `trunc`. Coefficient storage
/// is sparse: absent words have coefficient zero, and zero values are never
/// stored.
#[derive(Clone, PartialEq, Eq)]
pub struct Series {
    trunc: usize,
    modulus: Modulus,
    coeffs: BTreeMap<Word, u64>,
}

/// Truncation degree / modulus compatibility check used by every public
/// constructor: n ≤ 12 and gcd(m, n!) = 1.
pub fn check_context(trunc: usize, modulus: &Modulus) -> Result<(), Error> {
    if trunc > MAX_TRUNC {
        return Err(Error::BadInput(format!(
            "truncation degree {} exceeds the supported cap {}",
            trunc, MAX_TRUNC
        )));
    }
    if !modulus.coprime_to_factorial(trunc as u32) {
        return Err(Error::NotCoprime {
            m: modulus.get(),
            n: trunc as u32,
        });
    }
    Ok(())
}

impl Series {
    pub fn zero(trunc: usize, modulus: Modulus) -> Self {
        Series {
            trunc,
            modulus,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(trunc: usize, modulus: Modulus) -> Self {
        let mut s = Series::zero(trunc, modulus);
        s.set_coeff(Word::empty(), 1);
        s
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn coeff(&self, w: Word) -> u64 {
        self.coeffs.get(&w).copied().unwrap_or(0)
    }

    pub fn set_coeff(&mut self, w: Word, v: u64) {
        assert!(w.len() <= self.trunc, "word {:?} exceeds truncation", w);
        let v = self.modulus.reduce(v);
        if v == 0 {
            self.coeffs.remove(&w);
        } else {
            self.coeffs.insert(w, v);
        }
    }

    pub fn add_to_coeff(&mut self, w: Word, v: u64) {
        let cur = self.coeff(w);
        self.set_coeff(w, self.modulus.add(cur, v));
    }

    /// Iterate (word, coefficient) pairs, shortest words first, in a
    /// deterministic order.
    pub fn iter(&self) -> impl Iterator<Item = (Word, u64)> + '_ {
        self.coeffs.iter().map(|(&w, &v)| (w, v))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeff(Word::empty()) == 1
    }

    fn assert_same_context(&self, other: &Series) {
        assert_eq!(
            self.modulus.get(),
            other.modulus.get(),
            "mixed moduli in series arithmetic"
        );
        assert_eq!(
            self.trunc, other.trunc,
            "mixed truncation degrees in series arithmetic"
        );
    }

    pub fn add(&self, other: &Series) -> Series {
        self.assert_same_context(other);
        let mut out = self.clone();
        for (w, v) in other.iter() {
            out.add_to_coeff(w, v);
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.assert_same_context(other);
        let mut out = self.clone();
        for (w, v) in other.iter() {
            let cur = out.coeff(w);
            out.set_coeff(w, out.modulus.sub(cur, v));
        }
        out
    }

    pub fn neg(&self) -> Series {
        let mut out = Series::zero(self.trunc, self.modulus.clone());
        for (w, v) in self.iter() {
            out.set_coeff(w, self.modulus.neg(v));
        }
        out
    }

    pub fn scale(&self, c: u64) -> Series {
        let mut out = Series::zero(self.trunc, self.modulus.clone());
        for (w, v) in self.iter() {
            out.set_coeff(w, self.modulus.mul(v, c));
        }
        out
    }

    /// Product with truncation: word pairs whose lengths sum beyond the cap
    /// are dropped (they map to zero in the truncated algebra).
    pub fn mul(&self, other: &Series) -> Series {
        self.assert_same_context(other);
        let mut out = Series::zero(self.trunc, self.modulus.clone());
        for (w1, v1) in self.iter() {
            let l1 = w1.len();
            for (w2, v2) in other.iter() {
                if l1 + w2.len() > self.trunc {
                    continue;
                }
                out.add_to_coeff(w1.concat(w2), self.modulus.mul(v1, v2));
            }
        }
        out
    }

    /// Public checked multiply for callers that mix inputs from files.
    pub fn checked_mul(&self, other: &Series) -> Result<Series, Error> {
        if self.modulus.get() != other.modulus.get() {
            return Err(Error::ModulusMismatch {
                left: self.modulus.get(),
                right: other.modulus.get(),
            });
        }
        if self.trunc != other.trunc {
            return Err(Error::TruncationMismatch {
                left: self.trunc,
                right: other.trunc,
            });
        }
        Ok(self.mul(other))
    }

    /// Smallest degree with a nonzero coefficient (ignoring the constant
    /// term); `None` when no such degree exists.
    pub fn min_positive_degree(&self) -> Option<usize> {
        self.coeffs
            .keys()
            .find(|w| !w.is_empty())
            .map(|w| w.len())
    }

    /// The homogeneous degree-k part.
    pub fn graded_part(&self, k: usize) -> Series {
        let mut out = Series::zero(self.trunc, self.modulus.clone());
        for (w, v) in self.iter() {
            if w.len() == k {
                out.set_coeff(w, v);
            }
        }
        out
    }

    /// Drop words of length > `new_trunc` (new_trunc ≤ trunc).
    pub fn truncated(&self, new_trunc: usize) -> Series {
        assert!(new_trunc <= self.trunc);
        let mut out = Series::zero(new_trunc, self.modulus.clone());
        for (w, v) in self.iter() {
            if w.len() <= new_trunc {
                out.set_coeff(w, v);
            }
        }
        out
    }

    /// Reinterpret at a larger truncation degree; existing coefficients are
    /// kept and all new degrees are zero.
    pub fn lifted(&self, new_trunc: usize) -> Series {
        assert!(new_trunc >= self.trunc);
        let mut out = Series::zero(new_trunc, self.modulus.clone());
        for (w, v) in self.iter() {
            out.set_coeff(w, v);
        }
        out
    }

    /// exp of a series with zero constant term.
    pub fn exp(&self) -> Result<Series, Error> {
        if self.coeff(Word::empty()) != 0 {
            return Err(Error::BadInput(
                "exp needs a series with zero constant term".into(),
            ));
        }
        let mut out = Series::one(self.trunc, self.modulus.clone());
        let mut power = Series::one(self.trunc, self.modulus.clone());
        for k in 1..=self.trunc as u32 {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            let c = self.modulus.inv_factorial(k)?;
            out = out.add(&power.scale(c));
        }
        Ok(out)
    }

    /// log of a series with constant term 1.
    pub fn log(&self) -> Result<Series, Error> {
        if self.coeff(Word::empty()) != 1 {
            return Err(Error::NoLogarithm(format!(
                "constant term is {}, not 1",
                self.coeff(Word::empty())
            )));
        }
        let mut u = self.clone();
        u.set_coeff(Word::empty(), 0);
        let mut out = Series::zero(self.trunc, self.modulus.clone());
        let mut power = Series::one(self.trunc, self.modulus.clone());
        for k in 1..=self.trunc as u32 {
            power = power.mul(&u);
            if power.is_zero() {
                break;
            }
            let c = self.modulus.inv(k as u64)?;
            let signed = if k % 2 == 1 {
                c
            } else {
                self.modulus.neg(c)
            };
            out = out.add(&power.scale(signed));
        }
        Ok(out)
    }

    pub fn to_json(&self) -> SeriesDto {
        SeriesDto {
            n: self.trunc,
            m: self.modulus.get(),
            coeffs: self
                .iter()
                .map(|(w, v)| CoeffDto {
                    word: w.to_string(),
                    value: v,
                })
                .collect(),
        }
    }

    pub fn from_json(dto: &SeriesDto) -> Result<Series, Error> {
        let modulus = Modulus::new(dto.m)?;
        check_context(dto.n, &modulus)?;
        let mut s = Series::zero(dto.n, modulus);
        for c in &dto.coeffs {
            let w = Word::parse(&c.word)?;
            if w.len() > dto.n {
                return Err(Error::BadInput(format!(
                    "word {:?} exceeds truncation degree {}",
                    c.word, dto.n
                )));
            }
            if s.coeffs.contains_key(&w) {
                return Err(Error::BadInput(format!("duplicate word {:?}", c.word)));
            }
            s.set_coeff(w, c.value);
        }
        Ok(s)
    }
}

/// Shared Debug body: `1 + 3·XY + ... (n=.., m=..)`.
fn fmt_series(s: &Series, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if s.is_zero() {
        return write!(f, "0 (n={}, m={})", s.trunc(), s.modulus().get());
    }
    let mut first = true;
    for (w, v) in s.iter() {
        if !first {
            write!(f, " + ")?;
        }
        first = false;
        if w.is_empty() {
            write!(f, "{}", v)?;
        } else if v == 1 {
            write!(f, "{}", w)?;
        } else {
            write!(f, "{}·{}", v, w)?;
        }
    }
    write!(f, " (n={}, m={})", s.trunc(), s.modulus().get())
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_series(self, f)
    }
}

/// Serialized form of a series: truncation degree, modulus, sparse
/// coefficient list. The empty word serializes as "".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeriesDto {
    pub n: usize,
    pub m: u64,
    pub coeffs: Vec<CoeffDto>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoeffDto {
    pub word: String,
    pub value: u64,
}

/// Left-normed bracketing of one word: w = l1 l2 ... lk maps to
/// [[...[l1, l2], l3] ..., lk], expanded back into word coordinates.
/// Coefficients stay ±1 throughout.
fn left_normed_bracket(w: Word, trunc: usize, modulus: &Modulus) -> Series {
    debug_assert!(!w.is_empty());
    let mut cur: Vec<(Word, bool)> = vec![(Word::single(w.letter(0)), true)]; // (word, positive?)
    for i in 1..w.len() {
        let l = w.letter(i);
        let mut next = Vec::with_capacity(cur.len() * 2);
        for &(u, pos) in &cur {
            next.push((u.push(l), pos));
            next.push((u.unshift(l), !pos));
        }
        cur = next;
    }
    let mut out = Series::zero(trunc, modulus.clone());
    for (u, pos) in cur {
        let v = if pos { 1 } else { modulus.neg(1) };
        out.add_to_coeff(u, v);
    }
    out
}

/// The Dynkin left-bracketing map θ applied word-wise. θ preserves degree and
/// lands in Lie elements; on a degree-k Lie element it is multiplication
/// by k.
pub fn dynkin_map(s: &Series) -> Series {
    let mut out = Series::zero(s.trunc(), s.modulus().clone());
    for (w, v) in s.iter() {
        if w.is_empty() {
            continue;
        }
        let bracket = left_normed_bracket(w, s.trunc(), s.modulus());
        out = out.add(&bracket.scale(v));
    }
    out
}

/// Dynkin criterion, degree by degree: s (with zero constant term) is a Lie
/// element iff θ(s_k) = k·s_k for every homogeneous part s_k.
pub fn is_lie(s: &Series) -> bool {
    if s.coeff(Word::empty()) != 0 {
        return false;
    }
    for k in 1..=s.trunc() {
        let part = s.graded_part(k);
        if part.is_zero() {
            continue;
        }
        if dynkin_map(&part) != part.scale(k as u64) {
            return false;
        }
    }
    true
}

/// Project a series with zero constant term onto Lie elements: θ(s_k)/k per
/// degree. Fixes Lie elements; needs k invertible, which the context check
/// guarantees.
pub fn dynkin_project(s: &Series) -> Result<Series, Error> {
    if s.coeff(Word::empty()) != 0 {
        return Err(Error::BadInput(
            "Lie projection needs a zero constant term".into(),
        ));
    }
    let mut out = Series::zero(s.trunc(), s.modulus().clone());
    for k in 1..=s.trunc() {
        let part = s.graded_part(k);
        if part.is_zero() {
            continue;
        }
        let inv_k = s.modulus().inv(k as u64)?;
        out = out.add(&dynkin_map(&part).scale(inv_k));
    }
    Ok(out)
}

/// A Lie series: zero constant term, Dynkin-valid in every degree.
#[derive(Clone, PartialEq, Eq)]
pub struct LieSeries(Series);

impl LieSeries {
    pub fn new(s: Series) -> Result<Self, Error> {
        if s.coeff(Word::empty()) != 0 {
            return Err(Error::NotLie("nonzero constant term".into()));
        }
        if !is_lie(&s) {
            let bad = (1..=s.trunc())
                .find(|&k| {
                    let part = s.graded_part(k);
                    !part.is_zero() && dynkin_map(&part) != part.scale(k as u64)
                })
                .unwrap_or(0);
            return Err(Error::NotLie(format!(
                "Dynkin criterion fails in degree {}",
                bad
            )));
        }
        Ok(LieSeries(s))
    }

    pub fn zero(trunc: usize, modulus: Modulus) -> Self {
        LieSeries(Series::zero(trunc, modulus))
    }

    pub fn series(&self) -> &Series {
        &self.0
    }

    pub fn into_series(self) -> Series {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.sub(&other.0))
    }

    pub fn scale(&self, c: u64) -> LieSeries {
        LieSeries(self.0.scale(c))
    }

    pub fn bracket(&self, other: &LieSeries) -> LieSeries {
        LieSeries(self.0.mul(&other.0).sub(&other.0.mul(&self.0)))
    }

    pub fn exp(&self) -> GroupElt {
        GroupElt(self.0.exp().expect("Lie series has zero constant term"))
    }
}

impl fmt::Debug for LieSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_series(&self.0, f)
    }
}

/// A grouplike element: constant term 1 and Lie logarithm. These are exactly
/// the points of the free nilpotent group of class `trunc` inside the
/// truncated series algebra.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupElt(Series);

impl GroupElt {
    pub fn new(s: Series) -> Result<Self, Error> {
        if s.coeff(Word::empty()) != 1 {
            return Err(Error::NotGrouplike(format!(
                "constant term is {}, not 1",
                s.coeff(Word::empty())
            )));
        }
        let l = s.log()?;
        if !is_lie(&l) {
            return Err(Error::NotGrouplike(
                "logarithm fails the Dynkin criterion".into(),
            ));
        }
        Ok(GroupElt(s))
    }

    /// Internal constructor for series already known grouplike (products,
    /// inverses, exp of Lie series). Validated in debug builds.
    pub(crate) fn from_grouplike(s: Series) -> Self {
        debug_assert!(
            s.coeff(Word::empty()) == 1 && is_lie(&s.log().unwrap()),
            "internal grouplike invariant violated"
        );
        GroupElt(s)
    }

    pub fn one(trunc: usize, modulus: Modulus) -> Self {
        GroupElt(Series::one(trunc, modulus))
    }

    /// The generator x = exp(X).
    pub fn gen_x(trunc: usize, modulus: Modulus) -> Result<Self, Error> {
        check_context(trunc, &modulus)?;
        let mut s = Series::zero(trunc, modulus);
        if trunc >= 1 {
            s.set_coeff(Word::single(Letter::X), 1);
        }
        Ok(GroupElt(s.exp()?))
    }

    /// The generator y = exp(Y).
    pub fn gen_y(trunc: usize, modulus: Modulus) -> Result<Self, Error> {
        check_context(trunc, &modulus)?;
        let mut s = Series::zero(trunc, modulus);
        if trunc >= 1 {
            s.set_coeff(Word::single(Letter::Y), 1);
        }
        Ok(GroupElt(s.exp()?))
    }

    pub fn series(&self) -> &Series {
        &self.0
    }

    pub fn trunc(&self) -> usize {
        self.0.trunc()
    }

    pub fn modulus(&self) -> &Modulus {
        self.0.modulus()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn mul(&self, other: &GroupElt) -> GroupElt {
        GroupElt(self.0.mul(&other.0))
    }

    /// Inverse by the truncated geometric series 1/(1+u) = Σ (-u)^k.
    pub fn inv(&self) -> GroupElt {
        let mut u = self.0.clone();
        u.set_coeff(Word::empty(), 0);
        let neg_u = u.neg();
        let mut out = Series::one(self.trunc(), self.modulus().clone());
        let mut power = Series::one(self.trunc(), self.modulus().clone());
        for _ in 1..=self.trunc() {
            power = power.mul(&neg_u);
            if power.is_zero() {
                break;
            }
            out = out.add(&power);
        }
        GroupElt(out)
    }

    /// Commutator a b a⁻¹ b⁻¹.
    pub fn commutator(&self, other: &GroupElt) -> GroupElt {
        self.mul(other).mul(&self.inv()).mul(&other.inv())
    }

    pub fn log(&self) -> LieSeries {
        LieSeries(self.0.log().expect("grouplike elements have logarithms"))
    }

    /// g^c for a residue exponent c, as exp(c · log g). Agrees with iterated
    /// multiplication on integer exponents.
    pub fn power(&self, c: u64) -> GroupElt {
        let l = self.log();
        GroupElt(
            l.series()
                .scale(self.modulus().reduce(c))
                .exp()
                .expect("scaled logarithm still has zero constant term"),
        )
    }

    pub fn power_i64(&self, c: i64) -> GroupElt {
        self.power(self.modulus().reduce_i128(c as i128))
    }

    pub fn power_res(&self, c: &Residue) -> Result<GroupElt, Error> {
        if c.modulus.get() != self.modulus().get() {
            return Err(Error::ModulusMismatch {
                left: c.modulus.get(),
                right: self.modulus().get(),
            });
        }
        Ok(self.power(c.value))
    }

    /// Largest k such that the element lies in the k-th lower central series
    /// term: the minimal degree of its logarithm's support. The identity
    /// reports trunc + 1 (it lies in every term).
    pub fn lcs_degree(&self) -> usize {
        // The minimal support degree of g - 1 and of log(g) agree: the
        // higher log terms are products of at least two copies of g - 1.
        self.0
            .min_positive_degree()
            .unwrap_or(self.trunc() + 1)
    }

    /// Image in the level-ℓ quotient (series truncated at degree ℓ - 1).
    pub fn truncate_to_level(&self, level: usize) -> Result<GroupElt, Error> {
        if level < 1 || level > self.trunc() + 1 {
            return Err(Error::BadInput(format!(
                "level {} out of range 1..={} for truncation degree {}",
                level,
                self.trunc() + 1,
                self.trunc()
            )));
        }
        Ok(GroupElt(self.0.truncated(level - 1)))
    }

    /// The canonical section from level ℓ to level ℓ + 1: zero-pad the
    /// logarithm at the new top degree, then exponentiate. This is a
    /// set-section of the quotient map, not a homomorphism.
    pub fn canonical_section(&self) -> GroupElt {
        let l = self.log();
        let lifted = l.series().lifted(self.trunc() + 1);
        GroupElt(lifted.exp().expect("lifted logarithm has zero constant term"))
    }

    /// Coefficient of one word of the underlying series.
    pub fn magnus_coefficient(&self, w: Word) -> Residue {
        Residue::new(self.0.coeff(w), self.modulus().clone())
    }

    /// (x-exponent, y-exponent) of the abelianization: the degree-one
    /// coefficients.
    pub fn abelianized(&self) -> (u64, u64) {
        (
            self.0.coeff(Word::single(Letter::X)),
            self.0.coeff(Word::single(Letter::Y)),
        )
    }

    pub fn to_json(&self) -> SeriesDto {
        self.0.to_json()
    }

    pub fn from_json(dto: &SeriesDto) -> Result<Self, Error> {
        GroupElt::new(Series::from_json(dto)?)
    }
}

impl fmt::Debug for GroupElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_series(&self.0, f)
    }
}

/// The group endomorphism x ↦ img_x, y ↦ img_y: take logs, apply the induced
/// morphism of free Lie algebras (X ↦ log img_x, Y ↦ log img_y), and
/// exponentiate. Multiplicative on all grouplike elements because Lie
/// morphisms commute with the Baker–Campbell–Hausdorff composition.
pub fn substitution_endo(g: &GroupElt, img_x: &GroupElt, img_y: &GroupElt) -> GroupElt {
    let alpha = img_x.log();
    let beta = img_y.log();
    let out = lie_substitute(g.log().series(), alpha.series(), beta.series());
    GroupElt::from_grouplike(out.exp().expect("Lie image has zero constant term"))
}

/// Evaluate a Lie series under X ↦ alpha, Y ↦ beta: each homogeneous part
/// ℓ_k equals (1/k)·Σ_w c_w·L(w) by the Dynkin identity, and the left-normed
/// brackets L(w) evaluate verbatim in the target. Bracket chains are cached
/// by word prefix.
pub fn lie_substitute(l: &Series, alpha: &Series, beta: &Series) -> Series {
    let trunc = l.trunc();
    let modulus = l.modulus().clone();
    debug_assert!(is_lie(l), "lie_substitute needs a Lie series");
    let img = |letter: Letter| match letter {
        Letter::X => alpha.clone(),
        Letter::Y => beta.clone(),
    };
    let mut chains: HashMap<Word, Series> = HashMap::new();
    let mut out = Series::zero(trunc, modulus.clone());
    for (w, c) in l.iter() {
        let chain = bracket_chain(w, &img, &mut chains);
        let inv_k = modulus
            .inv(w.len() as u64)
            .expect("degrees are invertible in a valid context");
        out = out.add(&chain.scale(modulus.mul(c, inv_k)));
    }
    out
}

/// Left-normed bracket chain [[..[img(w1), img(w2)], ..], img(wk)], reusing
/// the longest cached prefix.
fn bracket_chain(
    w: Word,
    img: &impl Fn(Letter) -> Series,
    cache: &mut HashMap<Word, Series>,
) -> Series {
    if let Some(s) = cache.get(&w) {
        return s.clone();
    }
    let prefix_of = |len: usize| {
        let mut p = Word::empty();
        for i in 0..len {
            p = p.push(w.letter(i));
        }
        p
    };
    let mut k = w.len();
    while k > 1 && !cache.contains_key(&prefix_of(k)) {
        k -= 1;
    }
    let mut acc = match cache.get(&prefix_of(k)) {
        Some(s) => s.clone(),
        None => {
            let s = img(w.letter(0));
            cache.insert(prefix_of(1), s.clone());
            s
        }
    };
    for i in k..w.len() {
        let u = img(w.letter(i));
        acc = acc.mul(&u).sub(&u.mul(&acc));
        cache.insert(prefix_of(i + 1), acc.clone());
    }
    acc
}

/// exp(c·log s) for any series with constant term 1; the group power formula
/// at the series level. Agrees with iterated multiplication for integer c.
pub fn series_power(s: &Series, c: u64) -> Result<Series, Error> {
    let l = s.log()?;
    l.scale(s.modulus().reduce(c)).exp()
}
