//! Defining systems and higher products.
//!
//! A defining system for an order-n product is a triangular array of
//! 1-cochains Z_{i,j} (1 ≤ i < j ≤ n+1, the corner (1, n+1) excluded) with
//! weight j−i, the superdiagonal entries being cocycles and the rest
//! satisfying
//!
//! ```text
//! D Z_{i,j} = Σ_{r=i+1}^{j-1} Z_{i,r} ∪ Z_{r,j}
//! ```
//!
//! The product's value is the weight-n 2-cocycle Σ_{r=2}^{n} Z_{1,r} ∪
//! Z_{r,n+1}. Systems arise here from twisted cocycles θ into Ū_{n+1} by
//! taking Z_{i,j} = −a_{i,j}∘θ; the entry expansion of θ(gh) =
//! θ(g)·(g θ(h)) is exactly the defining-system identity.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::action::ActionSpec;
use crate::cohomology::{cup, d1, d2_witness, CochainDto, Cochain1, Cochain2, NACocycle};
use crate::coeffs::Modulus;
use crate::magnus::GroupElt;
use crate::unipotent::{phi, UniCoset};
use crate::Error;

/// Raise a group element to a finer truncation by repeatedly applying the
/// canonical (log zero-pad) section.
pub fn lift_to_trunc(g: &GroupElt, trunc: usize) -> Result<GroupElt, Error> {
    if g.trunc() > trunc {
        return Err(Error::TruncationMismatch {
            left: g.trunc(),
            right: trunc,
        });
    }
    let mut out = g.clone();
    while out.trunc() < trunc {
        out = out.canonical_section();
    }
    Ok(out)
}

/// Triangular array of 1-cochains for an order-n product over a group of
/// order d.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningSystem {
    n: usize,
    d: usize,
    modulus: Modulus,
    entries: BTreeMap<(usize, usize), Cochain1>,
}

/// The index set: all 1 ≤ i < j ≤ n+1 except the corner (1, n+1).
pub fn system_positions(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in (i + 1)..=(n + 1) {
            if (i, j) != (1, n + 1) {
                out.push((i, j));
            }
        }
    }
    out
}

impl DefiningSystem {
    pub fn new(
        n: usize,
        d: usize,
        modulus: Modulus,
        entries: BTreeMap<(usize, usize), Cochain1>,
    ) -> Result<Self, Error> {
        if n < 2 {
            return Err(Error::BadInput("defining system needs n >= 2".into()));
        }
        for &(i, j) in &system_positions(n) {
            let e = entries.get(&(i, j)).ok_or(Error::DefiningSystemInvalid {
                i,
                j,
                witness: "entry missing".into(),
            })?;
            if e.weight() != (j - i) as u32 {
                return Err(Error::DefiningSystemInvalid {
                    i,
                    j,
                    witness: format!("weight {} instead of {}", e.weight(), j - i),
                });
            }
            if e.len() != d {
                return Err(Error::DefiningSystemInvalid {
                    i,
                    j,
                    witness: format!("{} values for a group of order {}", e.len(), d),
                });
            }
            if e.modulus().get() != modulus.get() {
                return Err(Error::ModulusMismatch {
                    left: e.modulus().get(),
                    right: modulus.get(),
                });
            }
        }
        let keys: Vec<_> = entries.keys().copied().collect();
        for (i, j) in keys {
            if !(1 <= i && i < j && j <= n + 1) || (i, j) == (1, n + 1) {
                return Err(Error::DefiningSystemInvalid {
                    i,
                    j,
                    witness: "position outside the triangular index set".into(),
                });
            }
        }
        Ok(DefiningSystem {
            n,
            d,
            modulus,
            entries,
        })
    }

    /// The all-zero system (valid when all input classes are zero).
    pub fn zero(n: usize, d: usize, modulus: Modulus) -> Result<Self, Error> {
        let entries = system_positions(n)
            .into_iter()
            .map(|(i, j)| {
                (
                    (i, j),
                    Cochain1::zero((j - i) as u32, d, modulus.clone()),
                )
            })
            .collect();
        DefiningSystem::new(n, d, modulus, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_order(&self) -> usize {
        self.d
    }

    pub fn entry(&self, i: usize, j: usize) -> &Cochain1 {
        &self.entries[&(i, j)]
    }

    /// Check both defining-system conditions exhaustively; every failure is
    /// reported with its position and a witness pair. The superdiagonal
    /// cocycle condition is the empty-sum case of the general identity.
    pub fn validate(&self, spec: &ActionSpec) -> Vec<Error> {
        let mut failures = Vec::new();
        if spec.group().order() != self.d || spec.modulus().get() != self.modulus.get() {
            failures.push(Error::DimensionMismatch(
                "system and action live over different contexts".into(),
            ));
            return failures;
        }
        for &(i, j) in &system_positions(self.n) {
            let lhs = d1(spec, self.entry(i, j));
            let mut rhs = Cochain2::zero((j - i) as u32, self.d, self.modulus.clone());
            for r in (i + 1)..j {
                let term = cup(spec, self.entry(i, r), self.entry(r, j))
                    .expect("weights are consistent by construction");
                rhs = rhs.add(&term).expect("weights add to j-i");
            }
            if lhs != rhs {
                let witness = (0..self.d * self.d)
                    .map(|idx| (idx / self.d, idx % self.d))
                    .find(|&(g, h)| lhs.value(g, h) != rhs.value(g, h))
                    .expect("unequal cochains differ somewhere");
                failures.push(Error::DefiningSystemInvalid {
                    i,
                    j,
                    witness: format!("identity fails at pair {:?}", witness),
                });
            }
        }
        failures
    }

    pub fn is_valid(&self, spec: &ActionSpec) -> bool {
        self.validate(spec).is_empty()
    }

    /// The product value Σ_{r=2}^{n} Z_{1,r} ∪ Z_{r,n+1}; requires a valid
    /// system, and the result is checked to be a 2-cocycle.
    pub fn massey_value(&self, spec: &ActionSpec) -> Result<Cochain2, Error> {
        if let Some(e) = self.validate(spec).into_iter().next() {
            return Err(e);
        }
        let mut out = Cochain2::zero(self.n as u32, self.d, self.modulus.clone());
        for r in 2..=self.n {
            let term = cup(spec, self.entry(1, r), self.entry(r, self.n + 1))?;
            out = out.add(&term)?;
        }
        assert!(
            d2_witness(spec, &out).is_none(),
            "product value of a valid system must be a cocycle"
        );
        Ok(out)
    }

    /// Replace Z_{1,n} by Z_{1,n} + f for a weight-(n−1) cocycle f. The
    /// system stays valid (Df = 0 keeps the (1,n) identity, and (1,n) never
    /// appears on the right of another identity), and the product value
    /// moves by f ∪ Z_{n,n+1}.
    pub fn modify_for_zero(&self, spec: &ActionSpec, f: &Cochain1) -> Result<DefiningSystem, Error> {
        if let Some(e) = self.validate(spec).into_iter().next() {
            return Err(e);
        }
        if f.weight() != (self.n - 1) as u32 {
            return Err(Error::WeightMismatch {
                expected: (self.n - 1) as u32,
                got: f.weight(),
            });
        }
        if !d1(spec, f).is_zero() {
            let df = d1(spec, f);
            let (g, h) = (0..self.d * self.d)
                .map(|idx| (idx / self.d, idx % self.d))
                .find(|&(g, h)| df.value(g, h) != 0)
                .expect("nonzero differential has a witness");
            return Err(Error::NotACocycle { g, h });
        }
        let mut entries = self.entries.clone();
        let pos = (1, self.n);
        let bumped = entries[&pos].add(f)?;
        entries.insert(pos, bumped);
        let out = DefiningSystem::new(self.n, self.d, self.modulus.clone(), entries)?;
        debug_assert!(out.is_valid(spec));
        Ok(out)
    }

    pub fn to_json(&self) -> DefiningSystemDto {
        DefiningSystemDto {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|(&(i, j), e)| (format!("{},{}", i, j), e.to_json()))
                .collect(),
        }
    }

    pub fn from_json(dto: &DefiningSystemDto, d: usize, modulus: &Modulus) -> Result<Self, Error> {
        let mut entries = BTreeMap::new();
        for (key, cochain) in &dto.entries {
            let parts: Vec<_> = key.split(',').collect();
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::BadInput(format!("bad entry key '{}'", key)))
            };
            if parts.len() != 2 {
                return Err(Error::BadInput(format!("bad entry key '{}'", key)));
            }
            let (i, j) = (parse(parts[0])?, parse(parts[1])?);
            entries.insert((i, j), Cochain1::from_json(cochain, d, modulus)?);
        }
        DefiningSystem::new(dto.n, d, modulus.clone(), entries)
    }
}

/// Serialized defining system: entries keyed by "i,j".
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefiningSystemDto {
    pub n: usize,
    pub entries: BTreeMap<String, CochainDto>,
}

/// The defining system determined by a twisted cocycle θ into Ū_{n+1}:
/// Z_{i,j} = −a_{i,j}∘θ. The cocycle law for θ is checked first; the
/// resulting system is then valid by the entry expansion of the law, which
/// is asserted.
pub fn from_theta(spec: &ActionSpec, theta: &[UniCoset]) -> Result<DefiningSystem, Error> {
    let d = spec.group().order();
    let n = spec.n();
    if theta.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} cosets for a group of order {}",
            theta.len(),
            d
        )));
    }
    for t in theta {
        if t.n() != n {
            return Err(Error::DimensionMismatch(
                "coset size differs from the action context".into(),
            ));
        }
    }
    for g in spec.group().elements() {
        for h in spec.group().elements() {
            let gh = spec.group().mul(g, h);
            let rhs = theta[g].mul(&theta[h].chi_act(spec.chi().eval(g))?);
            if theta[gh] != rhs {
                return Err(Error::NotACocycle { g, h });
            }
        }
    }
    let md = spec.modulus();
    let mut entries = BTreeMap::new();
    for (i, j) in system_positions(n) {
        let values = (0..d)
            .map(|g| md.neg(theta[g].rep().entry(i, j)))
            .collect();
        entries.insert(
            (i, j),
            Cochain1::new((j - i) as u32, values, md.clone())?,
        );
    }
    let out = DefiningSystem::new(n, d, md.clone(), entries)?;
    assert!(
        out.is_valid(spec),
        "entry expansion of a twisted cocycle must give a valid system"
    );
    Ok(out)
}

/// θ = φ∘p: evaluate a nonabelian cocycle through the matrix model. Values
/// at a coarser level are raised by the canonical section first — the coset
/// image does not depend on the chosen lift.
pub fn phi_cocycle(spec: &ActionSpec, p: &NACocycle) -> Result<Vec<UniCoset>, Error> {
    if p.level() > spec.n() + 1 {
        return Err(Error::TruncationMismatch {
            left: p.level() - 1,
            right: spec.n(),
        });
    }
    p.values()
        .iter()
        .map(|v| phi(&lift_to_trunc(v, spec.n())?))
        .collect()
}
