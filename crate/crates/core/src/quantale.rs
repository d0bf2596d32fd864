//! Finite unital involutive quantales, given abstractly (order plus
//! tables) or concretely (union-closed families of arrow sets), with
//! the axiom checkers used throughout the toolkit.
//!
//! A finite complete join-semilattice is a bounded lattice, so
//! validation demands a partial order in which every pair has a least
//! upper bound and a greatest lower bound; joins and meets are cached
//! as tables. Distributivity over arbitrary joins reduces to binary
//! joins plus the zero law; the exhaustive all-subsets oracle is kept
//! for cross-checks.

use crate::bits::{self, Bits};
use crate::groupoid::FiniteGroupoid;
use crate::topology::FiniteSpace;
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantaleViolation {
    NotAssociative(usize, usize, usize),
    /// Product fails to distribute over the join of the last two
    /// elements on the named side.
    DistributivityFail(Side, usize, usize, usize),
    /// a·0 ≠ 0 or 0·a ≠ 0.
    ZeroLaw(usize),
    UnitFail(usize),
    /// a** ≠ a.
    InvolutionIdem(usize),
    /// (ab)* ≠ b*a*.
    InvolutionAntihom(usize, usize),
    /// (a∨b)* ≠ a*∨b*, or 0* ≠ 0.
    InvolutionJoin(usize, usize),
}

#[derive(Debug, Error)]
pub enum QuantaleError {
    #[error("element count must be positive")]
    Empty,
    #[error("leq is not a partial order: {0}")]
    NotPartialOrder(String),
    #[error("not a lattice: elements {0} and {1} lack a least upper bound or greatest lower bound")]
    NotLattice(usize, usize),
    #[error("table shape mismatch: {0}")]
    BadShape(String),
    #[error("index out of range: {0}")]
    BadIndex(usize),
    #[error("quantale axiom violations: {0:?}")]
    Violations(Vec<QuantaleViolation>),
}

/// A validated finite unital involutive quantale.
#[derive(Debug, Clone)]
pub struct FiniteQuantale {
    n: usize,
    up: Vec<Bits>,
    down: Vec<Bits>,
    join: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
    prod: Vec<Vec<usize>>,
    star: Vec<usize>,
    unit: usize,
    bottom: usize,
    top: usize,
}

impl FiniteQuantale {
    /// Validate an abstract presentation. `leq` is any generating set
    /// of order pairs; its reflexive-transitive closure must be
    /// antisymmetric and a lattice.
    pub fn from_tables(
        n: usize,
        leq: &[(usize, usize)],
        prod: Vec<Vec<usize>>,
        star: Vec<usize>,
        unit: usize,
    ) -> Result<FiniteQuantale, QuantaleError> {
        if n == 0 {
            return Err(QuantaleError::Empty);
        }
        if prod.len() != n || prod.iter().any(|r| r.len() != n) || star.len() != n {
            return Err(QuantaleError::BadShape(
                "product must be n×n and involution length n".into(),
            ));
        }
        if let Some(&bad) = prod
            .iter()
            .flatten()
            .chain(star.iter())
            .find(|&&x| x >= n)
        {
            return Err(QuantaleError::BadIndex(bad));
        }
        if unit >= n {
            return Err(QuantaleError::BadIndex(unit));
        }
        let mut le = vec![vec![false; n]; n];
        for i in 0..n {
            le[i][i] = true;
        }
        for &(i, j) in leq {
            if i >= n || j >= n {
                return Err(QuantaleError::BadIndex(i.max(j)));
            }
            le[i][j] = true;
        }
        // Transitive closure.
        for k in 0..n {
            for i in 0..n {
                if le[i][k] {
                    for j in 0..n {
                        if le[k][j] {
                            le[i][j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && le[i][j] && le[j][i] {
                    return Err(QuantaleError::NotPartialOrder(format!(
                        "elements {i} and {j} are equivalent"
                    )));
                }
            }
        }
        let mut up = vec![Bits::new(n); n];
        let mut down = vec![Bits::new(n); n];
        for i in 0..n {
            for j in 0..n {
                if le[i][j] {
                    up[i].set(j);
                    down[j].set(i);
                }
            }
        }
        let lub = |a: usize, b: usize| -> Option<usize> {
            let mut ub = up[a].clone();
            ub.and_assign(&up[b]);
            let candidates: Vec<usize> = ub.iter_ones().collect();
            candidates.into_iter().find(|&x| ub.is_subset_of(&up[x]))
        };
        let glb = |a: usize, b: usize| -> Option<usize> {
            let mut lb = down[a].clone();
            lb.and_assign(&down[b]);
            let candidates: Vec<usize> = lb.iter_ones().collect();
            candidates.into_iter().find(|&x| lb.is_subset_of(&down[x]))
        };
        let mut join = vec![vec![0; n]; n];
        let mut meet = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                join[a][b] = lub(a, b).ok_or(QuantaleError::NotLattice(a, b))?;
                meet[a][b] = glb(a, b).ok_or(QuantaleError::NotLattice(a, b))?;
            }
        }
        let bottom = (0..n)
            .find(|&x| (0..n).all(|y| le[x][y]))
            .ok_or(QuantaleError::NotLattice(0, 0))?;
        let top = (0..n)
            .find(|&x| (0..n).all(|y| le[y][x]))
            .ok_or(QuantaleError::NotLattice(0, 0))?;

        let q = FiniteQuantale {
            n,
            up,
            down,
            join,
            meet,
            prod,
            star,
            unit,
            bottom,
            top,
        };
        let violations = q.validate_axioms();
        if violations.is_empty() {
            Ok(q)
        } else {
            Err(QuantaleError::Violations(violations))
        }
    }

    /// Check associativity, binary distributivity with the zero law,
    /// the unit law and the involution laws on the cached tables.
    pub fn validate_axioms(&self) -> Vec<QuantaleViolation> {
        let n = self.n;
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.prod[self.prod[a][b]][c] != self.prod[a][self.prod[b][c]] {
                        out.push(QuantaleViolation::NotAssociative(a, b, c));
                    }
                }
            }
        }
        for a in 0..n {
            if self.prod[a][self.bottom] != self.bottom || self.prod[self.bottom][a] != self.bottom
            {
                out.push(QuantaleViolation::ZeroLaw(a));
            }
            for b in 0..n {
                for c in 0..n {
                    let bc = self.join[b][c];
                    if self.prod[a][bc] != self.join[self.prod[a][b]][self.prod[a][c]] {
                        out.push(QuantaleViolation::DistributivityFail(Side::Left, a, b, c));
                    }
                    if self.prod[bc][a] != self.join[self.prod[b][a]][self.prod[c][a]] {
                        out.push(QuantaleViolation::DistributivityFail(Side::Right, a, b, c));
                    }
                }
            }
        }
        for a in 0..n {
            if self.prod[self.unit][a] != a || self.prod[a][self.unit] != a {
                out.push(QuantaleViolation::UnitFail(a));
            }
        }
        for a in 0..n {
            if self.star[self.star[a]] != a {
                out.push(QuantaleViolation::InvolutionIdem(a));
            }
            for b in 0..n {
                if self.star[self.prod[a][b]] != self.prod[self.star[b]][self.star[a]] {
                    out.push(QuantaleViolation::InvolutionAntihom(a, b));
                }
                if self.star[self.join[a][b]] != self.join[self.star[a]][self.star[b]] {
                    out.push(QuantaleViolation::InvolutionJoin(a, b));
                }
            }
        }
        if self.star[self.bottom] != self.bottom {
            out.push(QuantaleViolation::InvolutionJoin(self.bottom, self.bottom));
        }
        out
    }

    /// Exhaustive oracle: D1/D2 over every subset of elements. Only
    /// sensible for small carriers.
    pub fn check_distributivity_full_subsets(&self) -> Result<(), QuantaleViolation> {
        assert!(self.n <= 20, "full-subset oracle is exponential");
        for family in 0u64..(1 << self.n) {
            let members: Vec<usize> = bits::ones(family).collect();
            let j = self.join_of(members.iter().copied());
            for c in 0..self.n {
                let left = self.prod[c][j];
                let joined = self.join_of(members.iter().map(|&q| self.prod[c][q]));
                if left != joined {
                    return Err(QuantaleViolation::DistributivityFail(Side::Left, c, j, j));
                }
                let right = self.prod[j][c];
                let joined = self.join_of(members.iter().map(|&q| self.prod[q][c]));
                if right != joined {
                    return Err(QuantaleViolation::DistributivityFail(Side::Right, c, j, j));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn top(&self) -> usize {
        self.top
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].get(b)
    }

    pub fn join2(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    pub fn meet2(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    pub fn join_of(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items
            .into_iter()
            .fold(self.bottom, |acc, x| self.join[acc][x])
    }

    pub fn meet_of(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(self.top, |acc, x| self.meet[acc][x])
    }

    pub fn product(&self, a: usize, b: usize) -> usize {
        self.prod[a][b]
    }

    pub fn star(&self, a: usize) -> usize {
        self.star[a]
    }

    pub fn upset(&self, a: usize) -> &Bits {
        &self.up[a]
    }

    pub fn downset(&self, a: usize) -> &Bits {
        &self.down[a]
    }

    /// The downset of the unit, ascending.
    pub fn qe(&self) -> Vec<usize> {
        self.down[self.unit].iter_ones().collect()
    }

    /// d(f) = ff* and r(f) = f*f.
    pub fn dom(&self, f: usize) -> usize {
        self.prod[f][self.star[f]]
    }

    pub fn cod(&self, f: usize) -> usize {
        self.prod[self.star[f]][f]
    }

    /// Frame of opens of a space, viewed as a quantale with product
    /// equal to meet and trivial involution.
    pub fn from_frame(space: &FiniteSpace) -> FiniteQuantale {
        let opens = space.opens().to_vec();
        let n = opens.len();
        let index: HashMap<u64, usize> =
            opens.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let glb = |a: u64, b: u64| -> usize {
            // Opens are intersection-closed, so the meet is the intersection.
            index[&(a & b)]
        };
        let mut leq = Vec::new();
        for (i, &a) in opens.iter().enumerate() {
            for (j, &b) in opens.iter().enumerate() {
                if bits::is_subset(a, b) {
                    leq.push((i, j));
                }
            }
        }
        let prod: Vec<Vec<usize>> = opens
            .iter()
            .map(|&a| opens.iter().map(|&b| glb(a, b)).collect())
            .collect();
        let star: Vec<usize> = (0..n).collect();
        let unit = index[&space.top()];
        FiniteQuantale::from_tables(n, &leq, prod, star, unit).expect("frame axioms")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilyViolation {
    /// The empty union is missing.
    MissingEmpty,
    /// Union of the two named members is not in the family.
    NotUnionClosed(u64, u64),
    /// Product of the two named members is not in the family.
    NotProductClosed(u64, u64),
    /// Involution of the named member is not in the family.
    NotInvolutionClosed(u64),
    /// The unit arrow set u[G0] is missing.
    MissingUnit,
}

#[derive(Debug, Error)]
#[error("subset family violations: {0:?}")]
pub struct FamilyError(pub Vec<FamilyViolation>);

/// A quantale whose elements are concretely arrow subsets of a groupoid.
#[derive(Debug, Clone)]
pub struct SubsetQuantale {
    pub quantale: FiniteQuantale,
    elements: Vec<u64>,
    index: HashMap<u64, usize>,
}

impl SubsetQuantale {
    /// Build the quantale of a union-closed, operation-closed family of
    /// arrow sets containing the unit image, ordered by inclusion.
    pub fn from_subset_family(
        groupoid: &FiniteGroupoid,
        family: &[u64],
    ) -> Result<SubsetQuantale, FamilyError> {
        let mut elements: Vec<u64> = family.to_vec();
        elements.sort_unstable_by_key(|&m| (m.count_ones(), m));
        elements.dedup();
        let index: HashMap<u64, usize> =
            elements.iter().enumerate().map(|(i, &m)| (m, i)).collect();

        let mut violations = Vec::new();
        if !index.contains_key(&0) {
            violations.push(FamilyViolation::MissingEmpty);
        }
        let unit_mask = groupoid.unit_arrows();
        if !index.contains_key(&unit_mask) {
            violations.push(FamilyViolation::MissingUnit);
        }
        for (i, &a) in elements.iter().enumerate() {
            if !index.contains_key(&groupoid.lift_involution(a)) {
                violations.push(FamilyViolation::NotInvolutionClosed(a));
            }
            for &b in &elements[i + 1..] {
                if !index.contains_key(&(a | b)) {
                    violations.push(FamilyViolation::NotUnionClosed(a, b));
                }
            }
            for &b in &elements {
                if !index.contains_key(&groupoid.lift_product(a, b)) {
                    violations.push(FamilyViolation::NotProductClosed(a, b));
                }
            }
        }
        if !violations.is_empty() {
            return Err(FamilyError(violations));
        }

        let n = elements.len();
        let mut up = vec![Bits::new(n); n];
        let mut down = vec![Bits::new(n); n];
        for (i, &a) in elements.iter().enumerate() {
            for (j, &b) in elements.iter().enumerate() {
                if bits::is_subset(a, b) {
                    up[i].set(j);
                    down[j].set(i);
                }
            }
        }
        let join: Vec<Vec<usize>> = elements
            .iter()
            .map(|&a| elements.iter().map(|&b| index[&(a | b)]).collect())
            .collect();
        // The meet is the union of all members below the intersection;
        // union closure makes that the greatest such element.
        let meet_mask = |a: u64, b: u64| -> usize {
            let cap = a & b;
            let m = elements
                .iter()
                .filter(|&&s| bits::is_subset(s, cap))
                .fold(0, |acc, &s| acc | s);
            index[&m]
        };
        let meet: Vec<Vec<usize>> = elements
            .iter()
            .map(|&a| elements.iter().map(|&b| meet_mask(a, b)).collect())
            .collect();
        let prod: Vec<Vec<usize>> = elements
            .iter()
            .map(|&a| {
                elements
                    .iter()
                    .map(|&b| index[&groupoid.lift_product(a, b)])
                    .collect()
            })
            .collect();
        let star: Vec<usize> = elements
            .iter()
            .map(|&a| index[&groupoid.lift_involution(a)])
            .collect();
        let quantale = FiniteQuantale {
            n,
            up,
            down,
            join,
            meet,
            prod,
            star,
            unit: index[&unit_mask],
            bottom: index[&0],
            top: n - 1,
        };
        Ok(SubsetQuantale {
            quantale,
            elements,
            index,
        })
    }

    /// The full power set of the groupoid's arrows with lifted
    /// operations.
    pub fn full_power_set(groupoid: &FiniteGroupoid) -> SubsetQuantale {
        let family: Vec<u64> = (0..=groupoid.all_arrows()).collect();
        SubsetQuantale::from_subset_family(groupoid, &family).expect("power set is closed")
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn mask(&self, i: usize) -> u64 {
        self.elements[i]
    }

    pub fn element_index(&self, mask: u64) -> Option<usize> {
        self.index.get(&mask).copied()
    }
}

/// Functional elements, partial units and the unit downset of a
/// quantale.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialUnitSet {
    pub functionals: Vec<usize>,
    pub partial_units: Vec<usize>,
    pub qe: Vec<usize>,
}

pub fn partial_units(q: &FiniteQuantale) -> PartialUnitSet {
    let e = q.unit();
    let functionals: Vec<usize> = (0..q.n()).filter(|&f| q.leq(q.cod(f), e)).collect();
    let partial_units: Vec<usize> = (0..q.n())
        .filter(|&f| q.leq(q.cod(f), e) && q.leq(q.dom(f), e))
        .collect();
    PartialUnitSet {
        functionals,
        partial_units,
        qe: q.qe(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SgViolation {
    pub element: usize,
}

/// a ≤ a·a*·a for every element.
pub fn check_sg(q: &FiniteQuantale) -> Result<(), SgViolation> {
    for a in 0..q.n() {
        let asa = q.product(q.product(a, q.star(a)), a);
        if !q.leq(a, asa) {
            return Err(SgViolation { element: a });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SgfReport {
    /// Element that is not the join of the partial units below it.
    pub sgf1: Option<usize>,
    /// Partial unit with f ≠ ff*f.
    pub sgf2: Option<usize>,
    /// Triple (f, g, h) with f ≤ h·1 ∨ g but f ≰ h·f ∨ g.
    pub sgf3: Option<(usize, usize, usize)>,
}

impl SgfReport {
    pub fn all(&self) -> bool {
        self.sgf1.is_none() && self.sgf2.is_none() && self.sgf3.is_none()
    }
}

pub fn check_sgf(q: &FiniteQuantale) -> SgfReport {
    let pu = partial_units(q);
    let mut report = SgfReport::default();
    for a in 0..q.n() {
        let below = q.join_of(pu.partial_units.iter().copied().filter(|&f| q.leq(f, a)));
        if below != a {
            report.sgf1 = Some(a);
            break;
        }
    }
    for &f in &pu.partial_units {
        if q.product(q.product(f, q.star(f)), f) != f {
            report.sgf2 = Some(f);
            break;
        }
    }
    'outer: for &f in &pu.partial_units {
        for &g in &pu.partial_units {
            for &h in &pu.qe {
                let bound = q.join2(q.product(h, q.top()), g);
                if q.leq(f, bound) {
                    let tight = q.join2(q.product(h, f), g);
                    if !q.leq(f, tight) {
                        report.sgf3 = Some((f, g, h));
                        break 'outer;
                    }
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QeFrameViolation {
    InvolutionNotIdentity(usize),
    ProductNotMeet(usize, usize),
    NotDistributive(usize, usize, usize),
}

/// On the unit downset: involution is the identity and the product is
/// the binary meet (which then distributes over joins).
pub fn check_qe_frame(q: &FiniteQuantale) -> Result<(), QeFrameViolation> {
    let qe = q.qe();
    for &h in &qe {
        if q.star(h) != h {
            return Err(QeFrameViolation::InvolutionNotIdentity(h));
        }
        for &k in &qe {
            if q.product(h, k) != q.meet2(h, k) {
                return Err(QeFrameViolation::ProductNotMeet(h, k));
            }
            for &l in &qe {
                let lhs = q.meet2(h, q.join2(k, l));
                let rhs = q.join2(q.meet2(h, k), q.meet2(h, l));
                if lhs != rhs {
                    return Err(QeFrameViolation::NotDistributive(h, k, l));
                }
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseMonoidViolation {
    /// ff*f ≠ f for a partial unit.
    NotRegular(usize),
    /// Two distinct inverses for the named element.
    NonUniqueInverse(usize, usize),
    /// An idempotent partial unit outside the unit downset.
    IdempotentNotInQe(usize),
    /// Two idempotents that do not commute.
    IdempotentsDontCommute(usize, usize),
}

/// The partial units form an inverse monoid whose idempotents are
/// exactly the unit downset.
pub fn check_inverse_monoid(q: &FiniteQuantale) -> Result<(), InverseMonoidViolation> {
    let pu = partial_units(q).partial_units;
    for &f in &pu {
        let fs = q.star(f);
        if q.product(q.product(f, fs), f) != f {
            return Err(InverseMonoidViolation::NotRegular(f));
        }
        for &g in &pu {
            let fgf = q.product(q.product(f, g), f);
            let gfg = q.product(q.product(g, f), g);
            if fgf == f && gfg == g && g != fs {
                return Err(InverseMonoidViolation::NonUniqueInverse(f, g));
            }
        }
    }
    for &f in &pu {
        let idem = q.product(f, f) == f;
        let in_qe = q.leq(f, q.unit());
        if idem != in_qe {
            return Err(InverseMonoidViolation::IdempotentNotInQe(f));
        }
    }
    for &h in &pu {
        if q.product(h, h) != h {
            continue;
        }
        for &k in &pu {
            if q.product(k, k) == k && q.product(h, k) != q.product(k, h) {
                return Err(InverseMonoidViolation::IdempotentsDontCommute(h, k));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
#[error("conjugation needs h ≤ e and a partial unit f (got h={h}, f={f})")]
pub struct ConjugateDomain {
    pub h: usize,
    pub f: usize,
}

/// h^f = f*hf, an element of the unit downset whenever h ≤ e and f is
/// a partial unit.
pub fn conjugate(q: &FiniteQuantale, h: usize, f: usize) -> Result<usize, ConjugateDomain> {
    let is_pu = q.leq(q.cod(f), q.unit()) && q.leq(q.dom(f), q.unit());
    if !q.leq(h, q.unit()) || !is_pu {
        return Err(ConjugateDomain { h, f });
    }
    Ok(q.product(q.product(q.star(f), h), f))
}

/// Lattice distributivity of binary meet over binary join.
pub fn is_lattice_distributive(q: &FiniteQuantale) -> Result<(), (usize, usize, usize)> {
    for a in 0..q.n() {
        for b in 0..q.n() {
            for c in 0..q.n() {
                let lhs = q.meet2(a, q.join2(b, c));
                let rhs = q.join2(q.meet2(a, b), q.meet2(a, c));
                if lhs != rhs {
                    return Err((a, b, c));
                }
            }
        }
    }
    Ok(())
}

/// Candidate support: ς(a) = ⋁ { ff* : f a partial unit, f ≤ a }.
pub fn support_candidate(q: &FiniteQuantale, a: usize) -> usize {
    let pu = partial_units(q).partial_units;
    q.join_of(pu.into_iter().filter(|&f| q.leq(f, a)).map(|f| q.dom(f)))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IqfReport {
    pub distributive: Option<(usize, usize, usize)>,
    pub sgf1: Option<usize>,
    /// a with ς(a) ≰ aa*.
    pub support_bound: Option<usize>,
    /// a with a ≰ ς(a)·a.
    pub support_reproduces: Option<usize>,
    /// (a, b) with ς(a∨b) ≠ ς(a)∨ς(b), or bottom if ς(0) ≠ 0.
    pub support_joins: Option<(usize, usize)>,
}

impl IqfReport {
    pub fn holds(&self) -> bool {
        self.distributive.is_none()
            && self.sgf1.is_none()
            && self.support_bound.is_none()
            && self.support_reproduces.is_none()
            && self.support_joins.is_none()
    }
}

/// Inverse quantal frame classifier: a distributive lattice, join
/// generated by partial units, whose candidate support behaves as a
/// support.
pub fn check_inverse_quantal_frame(q: &FiniteQuantale) -> IqfReport {
    let mut report = IqfReport {
        distributive: is_lattice_distributive(q).err(),
        sgf1: None,
        ..Default::default()
    };
    let pu = partial_units(q).partial_units;
    for a in 0..q.n() {
        let below = q.join_of(pu.iter().copied().filter(|&f| q.leq(f, a)));
        if below != a {
            report.sgf1 = Some(a);
            break;
        }
    }
    let sigma: Vec<usize> = (0..q.n()).map(|a| support_candidate(q, a)).collect();
    for a in 0..q.n() {
        if !q.leq(sigma[a], q.product(a, q.star(a))) {
            report.support_bound = Some(a);
            break;
        }
    }
    for a in 0..q.n() {
        if !q.leq(a, q.product(sigma[a], a)) {
            report.support_reproduces = Some(a);
            break;
        }
    }
    if sigma[q.bottom()] != q.bottom() {
        report.support_joins = Some((q.bottom(), q.bottom()));
    } else {
        'outer: for a in 0..q.n() {
            for b in 0..q.n() {
                if sigma[q.join2(a, b)] != q.join2(sigma[a], sigma[b]) {
                    report.support_joins = Some((a, b));
                    break 'outer;
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::fixtures::*;

    /// Two-element chain 0 < e with product = meet.
    fn chain2() -> FiniteQuantale {
        FiniteQuantale::from_tables(
            2,
            &[(0, 1)],
            vec![vec![0, 0], vec![0, 1]],
            vec![0, 1],
            1,
        )
        .unwrap()
    }

    /// Power set of the two-element group, via the one-point action
    /// groupoid.
    fn power_set_z2() -> (crate::groupoid::FiniteGroupoid, SubsetQuantale) {
        let space = crate::topology::FiniteSpace::from_names(&["x"], &[&[], &["x"]]).unwrap();
        let action = crate::groupoid::GroupAction::validate(
            space,
            vec!["e".into(), "g".into()],
            vec![vec![0, 1], vec![1, 0]],
            0,
            vec![vec![0], vec![0]],
        )
        .unwrap();
        let g = action.action_groupoid().unwrap();
        let q = SubsetQuantale::full_power_set(&g);
        (g, q)
    }

    #[test]
    fn power_set_of_fixture_relation_is_a_quantale() {
        let g = groupoid_81();
        let sq = SubsetQuantale::full_power_set(&g);
        assert_eq!(sq.quantale.n(), 32);
        assert!(sq.quantale.validate_axioms().is_empty());
        assert!(check_sg(&sq.quantale).is_ok());
    }

    #[test]
    fn two_chain_is_a_valid_frame_quantale() {
        let q = chain2();
        assert!(q.validate_axioms().is_empty());
        assert!(check_sg(&q).is_ok());
        assert!(check_sgf(&q).all());
        assert!(check_qe_frame(&q).is_ok());
        assert!(check_inverse_monoid(&q).is_ok());
        assert!(check_inverse_quantal_frame(&q).holds());
    }

    #[test]
    fn broken_associativity_is_reported() {
        // Chain 0 < a < e with a·a = e but a·e = e·a = 0, so
        // (a·a)·e = e while a·(a·e) = 0.
        let err = FiniteQuantale::from_tables(
            3,
            &[(0, 1), (1, 2)],
            vec![vec![0, 0, 0], vec![0, 2, 0], vec![0, 0, 2]],
            vec![0, 1, 2],
            2,
        )
        .unwrap_err();
        match err {
            QuantaleError::Violations(v) => {
                assert!(v
                    .iter()
                    .any(|x| matches!(x, QuantaleViolation::NotAssociative(_, _, _))));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    /// Chain 0 < a < e with a·a = 0 and identity involution: a valid
    /// unital involutive quantale with a ≰ a·a*·a = 0.
    pub(crate) fn sg_failing_model() -> FiniteQuantale {
        FiniteQuantale::from_tables(
            3,
            &[(0, 1), (1, 2)],
            vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 2]],
            vec![0, 1, 2],
            2,
        )
        .unwrap()
    }

    #[test]
    fn three_element_quantale_failing_sg() {
        let q = sg_failing_model();
        assert!(q.validate_axioms().is_empty());
        assert_eq!(check_sg(&q).unwrap_err().element, 1);
    }

    #[test]
    fn partial_units_of_group_power_set_are_singletons() {
        let (_, sq) = power_set_z2();
        let pu = partial_units(&sq.quantale);
        let masks: Vec<u64> = pu.partial_units.iter().map(|&i| sq.mask(i)).collect();
        assert_eq!(masks, vec![0b00, 0b01, 0b10]);
        assert!(check_sg(&sq.quantale).is_ok());
        let sgf = check_sgf(&sq.quantale);
        assert!(sgf.all(), "{sgf:?}");
        assert!(check_inverse_monoid(&sq.quantale).is_ok());
    }

    #[test]
    fn frame_quantale_has_all_elements_as_partial_units() {
        let q = FiniteQuantale::from_frame(&space_81());
        let pu = partial_units(&q);
        assert_eq!(pu.partial_units.len(), q.n());
        assert!(check_sgf(&q).all());
        assert!(check_qe_frame(&q).is_ok());
        assert!(check_inverse_quantal_frame(&q).holds());
    }

    #[test]
    fn partial_unit_set_is_monoid_and_downward_closed() {
        let g = groupoid_82();
        let sq = SubsetQuantale::full_power_set(&g);
        let q = &sq.quantale;
        let pu = partial_units(q);
        assert!(pu.partial_units.contains(&q.unit()));
        for &f in &pu.partial_units {
            assert!(pu.partial_units.contains(&q.star(f)));
            for &g2 in &pu.partial_units {
                assert!(pu.partial_units.contains(&q.product(f, g2)));
            }
            for below in q.downset(f).iter_ones() {
                assert!(pu.partial_units.contains(&below));
            }
        }
        for &h in &pu.qe {
            assert!(pu.partial_units.contains(&h));
        }
    }

    #[test]
    fn functional_pairs_agree_iff_domains_do() {
        let (_, sq) = power_set_z2();
        let q = &sq.quantale;
        let fs = partial_units(q).functionals;
        for &f in &fs {
            for &g in &fs {
                if q.leq(f, g) {
                    let same = f == g;
                    let same_dom = q.dom(f) == q.dom(g);
                    assert_eq!(same, same_dom);
                }
            }
        }
    }

    #[test]
    fn conjugation_action_laws() {
        let g = groupoid_81();
        let sq = SubsetQuantale::full_power_set(&g);
        let q = &sq.quantale;
        let pu = partial_units(q);
        for &h in &pu.qe {
            assert_eq!(conjugate(q, h, q.unit()).unwrap(), h);
            for &f in &pu.partial_units {
                let hf = conjugate(q, h, f).unwrap();
                assert!(q.leq(hf, q.unit()));
                // hf = f·h^f and f*h = h^f·f*.
                assert_eq!(q.product(h, f), q.product(f, hf));
                assert_eq!(
                    q.product(q.star(f), h),
                    q.product(hf, q.star(f))
                );
                if q.leq(h, q.dom(f)) {
                    let back = q.product(q.product(f, hf), q.star(f));
                    assert_eq!(h, back);
                }
                for &g2 in &pu.partial_units {
                    let lhs = conjugate(q, hf, g2).unwrap();
                    let rhs = conjugate(q, h, q.product(f, g2)).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
        assert!(conjugate(q, q.top(), q.unit()).is_err());
    }

    #[test]
    fn binary_distributivity_matches_full_subset_oracle_on_small_models() {
        for q in [chain2(), sg_failing_model(), FiniteQuantale::from_frame(&space_82())] {
            if q.n() <= 8 {
                assert!(q.validate_axioms().is_empty());
                assert!(q.check_distributivity_full_subsets().is_ok());
            }
        }
    }
}
