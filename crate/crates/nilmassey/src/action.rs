//! Twisted actions of a finite group on the free nilpotent group: a
//! character χ scales the generators, and a cocycle 𝔣 into the commutator
//! subgroup conjugates the second generator. Concretely
//!
//! ```text
//! g(x) = x^{χ(g)},    g(y) = 𝔣(g)⁻¹ · y^{χ(g)} · 𝔣(g)
//! ```
//!
//! with the cocycle law 𝔣(gh) = 𝔣(g)·g(𝔣(h)). The cyclic constructor builds
//! principal examples 𝔣(σ) = γ⁻¹·σ(γ) by a fixed-point iteration that
//! converges under the degree filtration.

use serde::{Deserialize, Serialize};

use crate::coeffs::Modulus;
use crate::cohomology::Cochain1;
use crate::magnus::{check_context, substitution_endo, GroupElt, SeriesDto};
use crate::unipotent::{bracket_entry, phi_prime};
use crate::Error;

/// Finite group as a multiplication table over element indices 0..d. The
/// table is checked for associativity, identity, and inverses on
/// construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteGroup {
    d: usize,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self, Error> {
        let d = table.len();
        if d == 0 {
            return Err(Error::BadGroup("empty table".into()));
        }
        if table.iter().any(|row| row.len() != d) {
            return Err(Error::BadGroup("table is not square".into()));
        }
        if table.iter().flatten().any(|&v| v >= d) {
            return Err(Error::BadGroup("table entry out of range".into()));
        }
        let identity = (0..d)
            .find(|&e| (0..d).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| Error::BadGroup("no identity element".into()))?;
        let mut inverse = vec![0; d];
        for a in 0..d {
            inverse[a] = (0..d)
                .find(|&b| table[a][b] == identity && table[b][a] == identity)
                .ok_or_else(|| Error::BadGroup(format!("element {} has no inverse", a)))?;
        }
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::BadGroup(format!(
                            "associativity fails at ({}, {}, {})",
                            a, b, c
                        )));
                    }
                }
            }
        }
        Ok(FiniteGroup {
            d,
            table,
            identity,
            inverse,
        })
    }

    pub fn cyclic(d: usize) -> FiniteGroup {
        let table = (0..d).map(|i| (0..d).map(|j| (i + j) % d).collect()).collect();
        FiniteGroup::new(table).expect("cyclic table is a group")
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.d
    }
}

/// Unit-valued character χ: G → (Z/m)^*; homomorphism property and unit
/// values are checked on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Character {
    modulus: Modulus,
    values: Vec<u64>,
}

impl Character {
    pub fn new(group: &FiniteGroup, values: Vec<u64>, modulus: Modulus) -> Result<Self, Error> {
        if values.len() != group.order() {
            return Err(Error::BadCharacter(format!(
                "expected {} values, got {}",
                group.order(),
                values.len()
            )));
        }
        let values: Vec<u64> = values.iter().map(|&v| modulus.reduce(v)).collect();
        for (g, &v) in values.iter().enumerate() {
            if !modulus.is_unit(v) {
                return Err(Error::BadCharacter(format!(
                    "value {} at element {} is not a unit mod {}",
                    v,
                    g,
                    modulus.get()
                )));
            }
        }
        if values[group.identity()] != 1 {
            return Err(Error::BadCharacter("value at identity is not 1".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                if modulus.mul(values[g], values[h]) != values[group.mul(g, h)] {
                    return Err(Error::BadCharacter(format!(
                        "not multiplicative at pair ({}, {})",
                        g, h
                    )));
                }
            }
        }
        Ok(Character { modulus, values })
    }

    pub fn trivial(group: &FiniteGroup, modulus: Modulus) -> Character {
        Character {
            values: vec![1; group.order()],
            modulus,
        }
    }

    pub fn eval(&self, g: usize) -> u64 {
        self.values[g]
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }
}

/// A full action datum: the context (n, m), the group, the character, and
/// the per-element cocycle values 𝔣(g). Constructors only check shapes and
/// contexts; `validate` checks the action axioms and reports every failure.
#[derive(Clone, Debug)]
pub struct ActionSpec {
    n: usize,
    modulus: Modulus,
    group: FiniteGroup,
    chi: Character,
    frak_f: Vec<GroupElt>,
    img_x: Vec<GroupElt>,
    img_y: Vec<GroupElt>,
}

impl ActionSpec {
    pub fn new(
        group: FiniteGroup,
        chi: Character,
        frak_f: Vec<GroupElt>,
        n: usize,
        modulus: Modulus,
    ) -> Result<Self, Error> {
        check_context(n, &modulus)?;
        if chi.modulus().get() != modulus.get() {
            return Err(Error::ModulusMismatch {
                left: chi.modulus().get(),
                right: modulus.get(),
            });
        }
        if chi.values.len() != group.order() {
            return Err(Error::BadCharacter("character size differs from group".into()));
        }
        if frak_f.len() != group.order() {
            return Err(Error::BadInput(format!(
                "cocycle table has {} entries for a group of order {}",
                frak_f.len(),
                group.order()
            )));
        }
        for f in &frak_f {
            if f.trunc() != n {
                return Err(Error::TruncationMismatch {
                    left: f.trunc(),
                    right: n,
                });
            }
            if f.modulus().get() != modulus.get() {
                return Err(Error::ModulusMismatch {
                    left: f.modulus().get(),
                    right: modulus.get(),
                });
            }
        }
        let x = GroupElt::gen_x(n, modulus.clone())?;
        let y = GroupElt::gen_y(n, modulus.clone())?;
        let mut img_x = Vec::with_capacity(group.order());
        let mut img_y = Vec::with_capacity(group.order());
        for g in group.elements() {
            let c = chi.eval(g);
            img_x.push(x.power(c));
            let f = &frak_f[g];
            img_y.push(f.inv().mul(&y.power(c)).mul(f));
        }
        Ok(ActionSpec {
            n,
            modulus,
            group,
            chi,
            frak_f,
            img_x,
            img_y,
        })
    }

    /// The untwisted, unweighted action (χ ≡ 1, 𝔣 ≡ 1).
    pub fn trivial(group: FiniteGroup, n: usize, modulus: Modulus) -> Result<Self, Error> {
        let chi = Character::trivial(&group, modulus.clone());
        let frak_f = vec![GroupElt::one(n, modulus.clone()); group.order()];
        ActionSpec::new(group, chi, frak_f, n, modulus)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn chi(&self) -> &Character {
        &self.chi
    }

    /// χ(g)^k as a residue.
    pub fn chi_pow(&self, g: usize, k: u32) -> u64 {
        self.modulus.pow(self.chi.eval(g), k as u64)
    }

    pub fn frak_f(&self, g: usize) -> &GroupElt {
        &self.frak_f[g]
    }

    /// Apply the action of g to a group element. Elements at a coarser
    /// truncation than the action's own are acted on through the truncated
    /// generator images (the action respects the degree filtration).
    pub fn apply(&self, g: usize, w: &GroupElt) -> GroupElt {
        assert_eq!(
            w.modulus().get(),
            self.modulus.get(),
            "mixed moduli in action application"
        );
        assert!(w.trunc() <= self.n, "element exceeds the action context");
        if w.trunc() == self.n {
            substitution_endo(w, &self.img_x[g], &self.img_y[g])
        } else {
            let level = w.trunc() + 1;
            let ix = self.img_x[g].truncate_to_level(level).expect("level in range");
            let iy = self.img_y[g].truncate_to_level(level).expect("level in range");
            substitution_endo(w, &ix, &iy)
        }
    }

    /// Check the four action axioms exhaustively and report each failure.
    pub fn validate(&self) -> ValidationReport {
        let mut failures = Vec::new();
        let e = self.group.identity();
        for g in self.group.elements() {
            if self.frak_f[g].lcs_degree() < 2 {
                failures.push(Error::ActionInvalid {
                    axiom: "cocycle takes values in the commutator subgroup".into(),
                    witness: format!("element {} has filtration degree < 2", g),
                });
            }
        }
        if !self.frak_f[e].is_one() {
            failures.push(Error::ActionInvalid {
                axiom: "cocycle is normalized at the identity".into(),
                witness: format!("value at identity element {} is not 1", e),
            });
        }
        for g in self.group.elements() {
            for h in self.group.elements() {
                let lhs = &self.frak_f[self.group.mul(g, h)];
                let rhs = self.frak_f[g].mul(&self.apply(g, &self.frak_f[h]));
                if *lhs != rhs {
                    failures.push(Error::ActionInvalid {
                        axiom: "cocycle law".into(),
                        witness: format!("fails at pair ({}, {})", g, h),
                    });
                }
            }
        }
        let x = GroupElt::gen_x(self.n, self.modulus.clone()).expect("valid context");
        let y = GroupElt::gen_y(self.n, self.modulus.clone()).expect("valid context");
        for g in self.group.elements() {
            for h in self.group.elements() {
                let gh = self.group.mul(g, h);
                for (name, gen) in [("x", &x), ("y", &y)] {
                    let two_step = self.apply(g, &self.apply(h, gen));
                    let one_step = self.apply(gh, gen);
                    if two_step != one_step {
                        failures.push(Error::ActionInvalid {
                            axiom: "composition law".into(),
                            witness: format!("fails at pair ({}, {}) on generator {}", g, h, name),
                        });
                    }
                }
            }
        }
        ValidationReport { failures }
    }

    pub fn to_json(&self) -> ActionSpecDto {
        ActionSpecDto::Full {
            n: self.n,
            m: self.modulus.get(),
            group: GroupDto {
                order: self.group.order(),
                table: self.group.table.clone(),
            },
            chi: self.chi.values.clone(),
            frak_f: self.frak_f.iter().map(|f| f.to_json()).collect(),
        }
    }

    pub fn from_json(dto: &ActionSpecDto) -> Result<Self, Error> {
        match dto {
            ActionSpecDto::Cyclic { cyclic } => {
                let gamma = GroupElt::from_json(&cyclic.gamma)?;
                let modulus = gamma.modulus().clone();
                let n = gamma.trunc();
                make_cyclic_action(cyclic.d, cyclic.c, &gamma, n, modulus)
            }
            ActionSpecDto::Full {
                n,
                m,
                group,
                chi,
                frak_f,
            } => {
                let modulus = Modulus::new(*m)?;
                if group.table.len() != group.order {
                    return Err(Error::BadGroup(
                        "declared order differs from table size".into(),
                    ));
                }
                let group = FiniteGroup::new(group.table.clone())?;
                let chi = Character::new(&group, chi.clone(), modulus.clone())?;
                let frak_f = frak_f
                    .iter()
                    .map(GroupElt::from_json)
                    .collect::<Result<Vec<_>, _>>()?;
                ActionSpec::new(group, chi, frak_f, *n, modulus)
            }
        }
    }
}

/// Outcome of `ActionSpec::validate`: the list of failed axioms with
/// witnesses. Empty means valid.
#[derive(Debug)]
pub struct ValidationReport {
    pub failures: Vec<Error>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Build the principal action for G = Z/d: χ(σ^j) = c^j and 𝔣(σ^j) =
/// γ⁻¹·σ^j(γ). The defining equation 𝔣(σ) = γ⁻¹·σ(γ) involves σ on both
/// sides, so 𝔣(σ) is computed as the fixed point of v ↦ γ⁻¹·σ_v(γ), which
/// stabilizes within n iterations because successive iterates agree to one
/// degree higher each round.
pub fn make_cyclic_action(
    d: usize,
    c: u64,
    gamma: &GroupElt,
    n: usize,
    modulus: Modulus,
) -> Result<ActionSpec, Error> {
    check_context(n, &modulus)?;
    if d == 0 {
        return Err(Error::BadGroup("cyclic group of order 0".into()));
    }
    let c = modulus.reduce(c);
    if !modulus.is_unit(c) || modulus.pow(c, d as u64) != 1 {
        return Err(Error::BadCharacter(format!(
            "{}^{} is not 1 mod {}",
            c,
            d,
            modulus.get()
        )));
    }
    if gamma.trunc() != n {
        return Err(Error::TruncationMismatch {
            left: gamma.trunc(),
            right: n,
        });
    }
    if gamma.modulus().get() != modulus.get() {
        return Err(Error::ModulusMismatch {
            left: gamma.modulus().get(),
            right: modulus.get(),
        });
    }
    if !gamma.is_one() && gamma.lcs_degree() < 2 {
        return Err(Error::BadInput(
            "twisting element must lie in the commutator subgroup".into(),
        ));
    }

    let x = GroupElt::gen_x(n, modulus.clone())?;
    let y = GroupElt::gen_y(n, modulus.clone())?;
    let img_x = x.power(c);
    let yc = y.power(c);
    let sigma = |v: &GroupElt, w: &GroupElt| {
        let img_y = v.inv().mul(&yc).mul(v);
        substitution_endo(w, &img_x, &img_y)
    };

    // Fixed-point iteration for 𝔣(σ).
    let mut v = GroupElt::one(n, modulus.clone());
    let mut stabilized = false;
    for _ in 0..=n {
        let next = gamma.inv().mul(&sigma(&v, gamma));
        if next == v {
            stabilized = true;
            break;
        }
        v = next;
    }
    assert!(stabilized, "fixed-point iteration did not stabilize");

    // 𝔣(σ^j) = γ⁻¹·σ^j(γ), computed by iterating the now-fixed σ.
    let mut frak_f = Vec::with_capacity(d);
    let mut sigma_j_gamma = gamma.clone();
    frak_f.push(GroupElt::one(n, modulus.clone()));
    for _ in 1..d {
        sigma_j_gamma = sigma(&v, &sigma_j_gamma);
        frak_f.push(gamma.inv().mul(&sigma_j_gamma));
    }

    let group = FiniteGroup::cyclic(d);
    let chi_values = (0..d).map(|j| modulus.pow(c, j as u64)).collect();
    let chi = Character::new(&group, chi_values, modulus.clone())?;
    let spec = ActionSpec::new(group, chi, frak_f, n, modulus)?;
    let report = spec.validate();
    assert!(
        report.is_valid(),
        "principal construction must validate: {:?}",
        report.failures
    );
    Ok(spec)
}

/// The 1-cochain g ↦ a_{2,n+1}(φ𝔣(g)) − a_{1,n}(φ𝔣(g)) of weight n−1. Both
/// entries are corner-coset invariants, so the value only depends on the
/// coset φ(𝔣(g)). For a validated spec this is a cocycle (the bracket-entry
/// value is additive on V and scales by χ^{n−1} under the twist).
pub fn f_cochain(spec: &ActionSpec) -> Result<Cochain1, Error> {
    let mut values = Vec::with_capacity(spec.group().order());
    for g in spec.group().elements() {
        let mat = phi_prime(spec.frak_f(g))?;
        values.push(bracket_entry(&mat)?.value);
    }
    Cochain1::new((spec.n() - 1) as u32, values, spec.modulus().clone())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupDto {
    pub order: usize,
    pub table: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclicDto {
    pub d: usize,
    pub c: u64,
    pub gamma: SeriesDto,
}

/// On-disk form of an action: either the full table or the cyclic
/// shorthand, which records only (d, c, γ) and rebuilds the principal
/// cocycle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ActionSpecDto {
    Cyclic {
        cyclic: CyclicDto,
    },
    Full {
        n: usize,
        m: u64,
        group: GroupDto,
        chi: Vec<u64>,
        frak_f: Vec<SeriesDto>,
    },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::d1;
    use crate::magnus::{dynkin_project, Letter, LieSeries, Series, Word};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn md(v: u64) -> Modulus {
        Modulus::new(v).unwrap()
    }

    fn gens(n: usize, m: u64) -> (GroupElt, GroupElt) {
        (
            GroupElt::gen_x(n, md(m)).unwrap(),
            GroupElt::gen_y(n, md(m)).unwrap(),
        )
    }

    fn random_group_elt(trunc: usize, m: u64, rng: &mut ChaCha8Rng) -> GroupElt {
        let (x, y) = gens(trunc, m);
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
    fn group_table_validation() {
        assert_eq!(FiniteGroup::cyclic(6).order(), 6);
        let g = FiniteGroup::cyclic(5);
        assert_eq!(g.identity(), 0);
        assert_eq!(g.inv(2), 3);
        assert_eq!(g.mul(3, 4), 2);

        // 2×2 table with no identity.
        assert!(matches!(
            FiniteGroup::new(vec![vec![1, 0], vec![1, 0]]),
            Err(Error::BadGroup(_))
        ));
        // Non-associative magma with an identity: 0 is the identity, but
        // (3·1)·1 = 0 while 3·(1·1) = 3 under this table.
        let t = vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
            vec![2, 3, 0, 1],
            vec![3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::new(t), Err(Error::BadGroup(_))));
    }

    #[test]
    fn character_validation() {
        let g = FiniteGroup::cyclic(2);
        let m25 = md(25);
        assert!(Character::new(&g, vec![1, 24], m25.clone()).is_ok());
        // Non-unit value.
        assert!(matches!(
            Character::new(&g, vec![1, 5], m25.clone()),
            Err(Error::BadCharacter(_))
        ));
        // Not multiplicative: 2² = 4 ≠ 1.
        assert!(matches!(
            Character::new(&g, vec![1, 2], m25.clone()),
            Err(Error::BadCharacter(_))
        ));
    }

    #[test]
    fn trivial_spec_validates_and_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = ActionSpec::trivial(FiniteGroup::cyclic(4), 3, md(25)).unwrap();
        assert!(spec.validate().is_valid());
        for g in spec.group().elements() {
            let w = random_group_elt(3, 25, &mut rng);
            assert_eq!(spec.apply(g, &w), w);
        }
    }

    #[test]
    fn untwisted_action_powers_the_generators() {
        // 𝔣 ≡ 1, χ(σ^j) = c^j: the action is plain powering on both
        // generators.
        let n = 4;
        let m25 = md(25);
        let gamma = GroupElt::one(n, m25.clone());
        let spec = make_cyclic_action(5, 6, &gamma, n, m25.clone()).unwrap();
        for g in spec.group().elements() {
            assert!(spec.frak_f(g).is_one());
        }
        let (x, y) = gens(n, 25);
        let c = spec.chi().eval(1);
        assert_eq!(spec.apply(1, &x), x.power(c));
        assert_eq!(spec.apply(1, &y), y.power(c));
    }

    #[test]
    fn identity_always_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (x, y) = gens(3, 25);
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, 3, md(25)).unwrap();
        let e = spec.group().identity();
        for _ in 0..10 {
            let w = random_group_elt(3, 25, &mut rng);
            assert_eq!(spec.apply(e, &w), w);
        }
    }

    #[test]
    fn cyclic_example_of_order_two() {
        // d = 2, c = −1 mod 25, γ = [x, y], n = 3.
        let (x, y) = gens(3, 25);
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, 3, md(25)).unwrap();
        assert!(spec.validate().is_valid());
        assert_eq!(spec.frak_f(1), &gamma.inv().mul(&spec.apply(1, &gamma)));
        // σ² = identity on the generators.
        for gen in [&x, &y] {
            assert_eq!(spec.apply(1, &spec.apply(1, gen)), gen.clone());
        }
    }

    #[test]
    fn cyclic_example_of_order_five() {
        // d = 5, c = 6 mod 25 (6⁵ ≡ 1), γ = [x,y]·[[x,y],x], n = 4.
        let (x, y) = gens(4, 25);
        let xy = x.commutator(&y);
        let gamma = xy.mul(&xy.commutator(&x));
        let spec = make_cyclic_action(5, 6, &gamma, 4, md(25)).unwrap();
        assert!(spec.validate().is_valid());
        // The principal formula holds for every power of σ.
        for j in 1..5 {
            let mut img = gamma.clone();
            for _ in 0..j {
                img = spec.apply(1, &img);
            }
            assert_eq!(spec.frak_f(j), &gamma.inv().mul(&img));
        }
    }

    #[test]
    fn bad_character_is_rejected() {
        let (x, y) = gens(3, 25);
        let gamma = x.commutator(&y);
        // 2² = 4 ≢ 1 mod 25.
        assert!(matches!(
            make_cyclic_action(2, 2, &gamma, 3, md(25)),
            Err(Error::BadCharacter(_))
        ));
    }

    #[test]
    fn degree_one_cocycle_value_is_reported() {
        // 𝔣(σ) = y has filtration degree 1: validation must flag it.
        let group = FiniteGroup::cyclic(2);
        let m25 = md(25);
        let chi = Character::new(&group, vec![1, 24], m25.clone()).unwrap();
        let (_, y) = gens(3, 25);
        let frak_f = vec![GroupElt::one(3, m25.clone()), y];
        let spec = ActionSpec::new(group, chi, frak_f, 3, m25).unwrap();
        let report = spec.validate();
        assert!(!report.is_valid());
        assert!(report.failures.iter().any(|f| matches!(
            f,
            Error::ActionInvalid { axiom, .. } if axiom.contains("commutator subgroup")
        )));
    }

    #[test]
    fn action_is_multiplicative() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (x, y) = gens(4, 25);
        let xy = x.commutator(&y);
        let gamma = xy.mul(&xy.commutator(&x));
        let spec = make_cyclic_action(5, 6, &gamma, 4, md(25)).unwrap();
        for _ in 0..15 {
            let g = rng.gen_range(0..5);
            let a = random_group_elt(4, 25, &mut rng);
            let b = random_group_elt(4, 25, &mut rng);
            assert_eq!(
                spec.apply(g, &a.mul(&b)),
                spec.apply(g, &a).mul(&spec.apply(g, &b))
            );
        }
    }

    #[test]
    fn graded_pieces_scale_by_chi_powers() {
        // On an element of filtration degree ≥ k, the degree-k piece of the
        // logarithm transforms by χ(g)^k: conjugation by the cocycle only
        // contributes in higher degrees.
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let n = 4;
        let m = 25;
        let (x, y) = gens(n, m);
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, n, md(m)).unwrap();
        for k in 1..=n {
            for _ in 0..8 {
                // Random element with log supported in degrees ≥ k.
                let mut s = Series::zero(n, md(m));
                for deg in k..=n {
                    for _ in 0..3 {
                        let mut w = Word::empty();
                        for _ in 0..deg {
                            w = w.push(if rng.gen() { Letter::X } else { Letter::Y });
                        }
                        s.set_coeff(w, rng.gen_range(0..m));
                    }
                }
                let l = dynkin_project(&s).unwrap();
                let w = LieSeries::new(l).unwrap().exp();
                for g in spec.group().elements() {
                    let moved = spec.apply(g, &w);
                    let lhs = moved.log().series().graded_part(k);
                    let rhs = w
                        .log()
                        .series()
                        .graded_part(k)
                        .scale(spec.chi_pow(g, k as u32));
                    assert_eq!(lhs, rhs, "degree {} element {}", k, g);
                }
            }
        }
    }

    #[test]
    fn action_composes_with_truncation() {
        // Acting then truncating agrees with truncating then acting through
        // the truncated images.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let (x, y) = gens(4, 25);
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, 4, md(25)).unwrap();
        for _ in 0..10 {
            let w = random_group_elt(4, 25, &mut rng);
            let g = rng.gen_range(0..2);
            for level in 2..=4 {
                let a = spec.apply(g, &w).truncate_to_level(level).unwrap();
                let b = spec.apply(g, &w.truncate_to_level(level).unwrap());
                assert_eq!(a, b, "level {}", level);
            }
        }
    }

    #[test]
    fn f_cochain_values_and_cocycle_property() {
        // 𝔣 ≡ 1 → zero cochain.
        let trivial = ActionSpec::trivial(FiniteGroup::cyclic(3), 4, md(25)).unwrap();
        let f0 = f_cochain(&trivial).unwrap();
        assert!(trivial.group().elements().all(|g| f0.value(g) == 0));
        assert_eq!(f0.weight(), 3);

        // Table with 𝔣(σ) = [x, y] at n = 3: f(σ) = a_{2,4} − a_{1,3} =
        // 1 − (−1) = 2. (The table need not satisfy the cocycle law for the
        // formula to evaluate.)
        let group = FiniteGroup::cyclic(2);
        let m25 = md(25);
        let chi = Character::new(&group, vec![1, 24], m25.clone()).unwrap();
        let (x, y) = gens(3, 25);
        let frak_f = vec![GroupElt::one(3, m25.clone()), x.commutator(&y)];
        let toy = ActionSpec::new(group, chi, frak_f, 3, m25.clone()).unwrap();
        let f = f_cochain(&toy).unwrap();
        assert_eq!(f.value(1), 2);
        assert_eq!(f.weight(), 2);

        // On a validated spec, f is a cocycle for weight n−1.
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, 3, m25).unwrap();
        let f = f_cochain(&spec).unwrap();
        assert!(d1(&spec, &f).is_zero());
    }

    #[test]
    fn json_round_trips_both_forms() {
        let (x, y) = gens(3, 25);
        let gamma = x.commutator(&y);
        let spec = make_cyclic_action(2, 24, &gamma, 3, md(25)).unwrap();

        // Full form.
        let text = serde_json::to_string(&spec.to_json()).unwrap();
        let dto: ActionSpecDto = serde_json::from_str(&text).unwrap();
        let back = ActionSpec::from_json(&dto).unwrap();
        assert!(back.validate().is_valid());
        for g in spec.group().elements() {
            assert_eq!(back.frak_f(g), spec.frak_f(g));
            assert_eq!(back.chi().eval(g), spec.chi().eval(g));
        }

        // Cyclic shorthand.
        let short = format!(
            "{{\"cyclic\":{{\"d\":2,\"c\":24,\"gamma\":{}}}}}",
            serde_json::to_string(&gamma.to_json()).unwrap()
        );
        let dto: ActionSpecDto = serde_json::from_str(&short).unwrap();
        let from_short = ActionSpec::from_json(&dto).unwrap();
        for g in spec.group().elements() {
            assert_eq!(from_short.frak_f(g), spec.frak_f(g));
        }
    }
}
