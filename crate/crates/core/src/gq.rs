//! Selection bases over SP-groupoids and the groupoid quantale they
//! generate: the union closure of the base with lifted product and
//! involution, unit u[G0].

use crate::bits;
use crate::groupoid::{BisectionDefect, BisectionImage, FiniteGroupoid, GroupAction};
use crate::quantale::{FamilyError, SubsetQuantale};
use std::collections::{HashSet, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SbViolation {
    /// A member is not a bisection image.
    NotBisectionImage(u64, BisectionDefect),
    /// SB1: the unit image u[G0] is missing.
    MissingUnit,
    /// SB1: product of two members escapes the family.
    ProductEscapes(u64, u64),
    /// SB1: involution of a member escapes the family.
    InvolutionEscapes(u64),
    /// SB2: u[U] missing for the named open U.
    MissingUnitImage(u64),
    /// SB3: the empty member (union of the empty family) is missing.
    MissingEmpty,
    /// SB3: a compatible pair whose union escapes the family.
    UnionEscapes(u64, u64),
    /// SB4: agreement set of two members is not a union of locally
    /// closed sets.
    AgreementNotLocallyClosed(u64, u64),
    /// SB5: arrows left uncovered by the family.
    NotCovering(u64),
}

#[derive(Debug, Error)]
#[error("selection-base violations: {0:?}")]
pub struct SbReport(pub Vec<SbViolation>);

/// A validated selection base: a family of bisection images that is an
/// inverse submonoid, contains every unit image, is closed under
/// compatible unions, has locally-closed agreement sets, and covers
/// the arrows.
#[derive(Debug, Clone)]
pub struct SelectionBase {
    members: Vec<u64>,
    images: Vec<BisectionImage>,
}

impl SelectionBase {
    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn images(&self) -> &[BisectionImage] {
        &self.images
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members
            .binary_search_by_key(&(mask.count_ones(), mask), |&m| (m.count_ones(), m))
            .is_ok()
    }
}

/// Two bisection images are compatible when their union is again a
/// partial bijection: S·T* ⊆ E and S*·T ⊆ E.
pub fn compatible(g: &FiniteGroupoid, s: u64, t: u64) -> bool {
    let e = g.unit_arrows();
    bits::is_subset(g.lift_product(s, g.lift_involution(t)), e)
        && bits::is_subset(g.lift_product(g.lift_involution(s), t), e)
}

/// Points of the common domain where the two sections agree.
pub fn agreement_set(g: &FiniteGroupoid, s: u64, t: u64) -> u64 {
    let common = g.source_image(s) & g.source_image(t);
    bits::ones(common)
        .filter(|&p| g.bisection_value(s, p) == g.bisection_value(t, p))
        .fold(0, |acc, p| acc | bits::bit(p))
}

/// Check SB1–SB5 on a family of arrow sets. SB3 is checked via binary
/// compatible unions plus the empty member; see
/// [`sb3_exhaustive_oracle`] for the all-subfamily cross-check.
pub fn validate_selection_base(
    g: &FiniteGroupoid,
    family: &[u64],
) -> Result<SelectionBase, SbReport> {
    let mut members: Vec<u64> = family.to_vec();
    members.sort_unstable_by_key(|&m| (m.count_ones(), m));
    members.dedup();

    let mut violations = Vec::new();
    let mut images = Vec::new();
    for &m in &members {
        match g.is_bisection_image(m) {
            Ok(img) => images.push(img),
            Err(defect) => violations.push(SbViolation::NotBisectionImage(m, defect)),
        }
    }
    if !violations.is_empty() {
        return Err(SbReport(violations));
    }
    let has = |m: u64| {
        members
            .binary_search_by_key(&(m.count_ones(), m), |&x| (x.count_ones(), x))
            .is_ok()
    };

    // SB1: inverse submonoid of the bisection images.
    if !has(g.unit_arrows()) {
        violations.push(SbViolation::MissingUnit);
    }
    for &s in &members {
        if !has(g.lift_involution(s)) {
            violations.push(SbViolation::InvolutionEscapes(s));
        }
        for &t in &members {
            if !has(g.lift_product(s, t)) {
                violations.push(SbViolation::ProductEscapes(s, t));
            }
        }
    }
    // SB2: all unit images.
    for &u in g.space().opens() {
        if !has(g.unit_image(u)) {
            violations.push(SbViolation::MissingUnitImage(u));
        }
    }
    // SB3: binary compatible unions, plus the empty union.
    if !has(0) {
        violations.push(SbViolation::MissingEmpty);
    }
    for (i, &s) in members.iter().enumerate() {
        for &t in &members[i + 1..] {
            if compatible(g, s, t) && !has(s | t) {
                violations.push(SbViolation::UnionEscapes(s, t));
            }
        }
    }
    // SB4: agreement sets are unions of locally closed sets.
    for (i, &s) in members.iter().enumerate() {
        for &t in &members[i..] {
            let a = agreement_set(g, s, t);
            if !g.space().is_union_of_locally_closed(a) {
                violations.push(SbViolation::AgreementNotLocallyClosed(s, t));
            }
        }
    }
    // SB5: coverage.
    let covered = members.iter().fold(0, |acc, &s| acc | s);
    if covered != g.all_arrows() {
        violations.push(SbViolation::NotCovering(g.all_arrows() & !covered));
    }

    if violations.is_empty() {
        Ok(SelectionBase { members, images })
    } else {
        Err(SbReport(violations))
    }
}

/// Exhaustive SB3 oracle: every pairwise-compatible subfamily must have
/// its union in the family. Exponential in the family size.
pub fn sb3_exhaustive_oracle(g: &FiniteGroupoid, family: &[u64]) -> Result<(), Vec<u64>> {
    assert!(family.len() <= 20, "exhaustive oracle is exponential");
    for pick in 0u64..(1 << family.len()) {
        let sub: Vec<u64> = bits::ones(pick).map(|i| family[i]).collect();
        let pairwise = sub
            .iter()
            .enumerate()
            .all(|(i, &s)| sub[i + 1..].iter().all(|&t| compatible(g, s, t)));
        if pairwise {
            let union = sub.iter().fold(0, |acc, &s| acc | s);
            if !family.contains(&union) {
                return Err(sub);
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum BaseError {
    #[error("canonical base construction exceeded the size cap of {0}")]
    SizeCap(usize),
    #[error(transparent)]
    Validation(#[from] SbReport),
}

/// Minimal-open connected components of an open set: the blocks on
/// which a locally constant assignment must be constant.
fn components_of_open(g: &FiniteGroupoid, open: u64) -> Vec<u64> {
    let space = g.space();
    let pts: Vec<usize> = bits::ones(open).collect();
    let mut comp: Vec<u64> = Vec::new();
    let mut seen = 0u64;
    for &p in &pts {
        if bits::contains(seen, p) {
            continue;
        }
        let mut block = bits::bit(p);
        loop {
            let grown = bits::ones(open)
                .filter(|&q| {
                    bits::contains(block, q)
                        || bits::ones(block).any(|b| {
                            bits::contains(space.minimal_open(b), q)
                                || bits::contains(space.minimal_open(q), b)
                        })
                })
                .fold(0, |acc, q| acc | bits::bit(q));
            if grown == block {
                break;
            }
            block = grown;
        }
        seen |= block;
        comp.push(block);
    }
    comp
}

/// Canonical base of an orbit-relation groupoid: graphs of locally
/// constant group assignments over opens, kept when they are bisection
/// images, closed under products, involutions and compatible unions,
/// then validated.
pub fn canonical_base_from_action(
    action: &GroupAction,
    groupoid: &FiniteGroupoid,
    size_cap: usize,
) -> Result<SelectionBase, BaseError> {
    let mut family: HashSet<u64> = HashSet::new();
    family.insert(0);
    for &open in groupoid.space().opens() {
        let comps = components_of_open(groupoid, open);
        let k = action.order();
        let mut choice = vec![0usize; comps.len()];
        loop {
            let mut carrier = 0u64;
            let mut ok = true;
            'build: for (ci, &block) in comps.iter().enumerate() {
                let gelt = choice[ci];
                for p in bits::ones(block) {
                    let q = action.apply(gelt, p);
                    match groupoid
                        .arrows_between(p, q)
                        .first()
                        .copied()
                    {
                        Some(x) => carrier |= bits::bit(x),
                        None => {
                            ok = false;
                            break 'build;
                        }
                    }
                }
            }
            if ok && groupoid.is_bisection_image(carrier).is_ok() {
                family.insert(carrier);
            }
            let mut i = 0;
            loop {
                if i == comps.len() {
                    break;
                }
                choice[i] += 1;
                if choice[i] < k {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == comps.len() {
                break;
            }
            if comps.is_empty() {
                break;
            }
        }
    }

    // Closure under product, involution and compatible union.
    let mut worklist: VecDeque<u64> = family.iter().copied().collect();
    while let Some(s) = worklist.pop_front() {
        if family.len() > size_cap {
            return Err(BaseError::SizeCap(size_cap));
        }
        let mut fresh = Vec::new();
        let inv = groupoid.lift_involution(s);
        if !family.contains(&inv) {
            fresh.push(inv);
        }
        for &t in family.iter() {
            for cand in [groupoid.lift_product(s, t), groupoid.lift_product(t, s)] {
                if !family.contains(&cand) {
                    fresh.push(cand);
                }
            }
            if compatible(groupoid, s, t) && !family.contains(&(s | t)) {
                fresh.push(s | t);
            }
        }
        for c in fresh {
            if family.insert(c) {
                worklist.push_back(c);
            }
        }
    }

    let members: Vec<u64> = family.into_iter().collect();
    Ok(validate_selection_base(groupoid, &members)?)
}

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("union closure exceeded the size budget of {0} elements")]
    SizeBudgetExceeded(usize),
    #[error(transparent)]
    Family(#[from] FamilyError),
}

/// Default cap on the number of elements of a built groupoid quantale.
pub const DEFAULT_SIZE_BUDGET: usize = 1 << 20;

/// A groupoid quantale: the union closure of a selection base, with
/// its generating base and carrier groupoid.
#[derive(Debug, Clone)]
pub struct GroupoidQuantale {
    pub groupoid: FiniteGroupoid,
    pub base: SelectionBase,
    pub quantale: SubsetQuantale,
}

/// Close a selection base under arbitrary (finite) unions and build
/// the quantale on the resulting family.
pub fn build_gq(
    groupoid: &FiniteGroupoid,
    base: &SelectionBase,
    budget: usize,
) -> Result<GroupoidQuantale, BuildError> {
    let mut elems: HashSet<u64> = HashSet::new();
    elems.insert(0);
    let mut queue: VecDeque<u64> = base.members().iter().copied().collect();
    while let Some(x) = queue.pop_front() {
        if elems.contains(&x) {
            continue;
        }
        let unions: Vec<u64> = elems.iter().map(|&y| x | y).collect();
        elems.insert(x);
        for u in unions {
            if !elems.contains(&u) {
                queue.push_back(u);
            }
        }
        if elems.len() > budget {
            return Err(BuildError::SizeBudgetExceeded(budget));
        }
    }
    let family: Vec<u64> = elems.into_iter().collect();
    let quantale = SubsetQuantale::from_subset_family(groupoid, &family)?;
    Ok(GroupoidQuantale {
        groupoid: groupoid.clone(),
        base: base.clone(),
        quantale,
    })
}

/// Brute-force oracle for the union closure: all arrow subsets that
/// equal the union of the base members they contain.
pub fn union_closure_bruteforce(base: &[u64], all_arrows: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for a in 0..=all_arrows {
        let u = base
            .iter()
            .filter(|&&s| bits::is_subset(s, a))
            .fold(0, |acc, &s| acc | s);
        if u == a {
            out.push(a);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecoveryFailure {
    /// Partial units of the quantale differ from the base members.
    PartialUnits { missing: Vec<u64>, extra: Vec<u64> },
    /// The unit downset differs from the unit images of the opens.
    UnitDownset { missing: Vec<u64>, extra: Vec<u64> },
    /// Primes of the unit downset differ from u[G0 ∖ closure(p)].
    Primes { missing: Vec<u64>, extra: Vec<u64> },
}

/// Prop-style recovery: the base, the topology and the points are all
/// recoverable from the built quantale.
pub fn check_recovery(gq: &GroupoidQuantale) -> Result<(), RecoveryFailure> {
    let q = &gq.quantale.quantale;
    let g = &gq.groupoid;

    let pu_masks: Vec<u64> = crate::quantale::partial_units(q)
        .partial_units
        .iter()
        .map(|&i| gq.quantale.mask(i))
        .collect();
    let base_masks: Vec<u64> = gq.base.members().to_vec();
    let (missing, extra) = diff_sets(&base_masks, &pu_masks);
    if !missing.is_empty() || !extra.is_empty() {
        return Err(RecoveryFailure::PartialUnits { missing, extra });
    }

    let qe_masks: Vec<u64> = q.qe().iter().map(|&i| gq.quantale.mask(i)).collect();
    let open_images: Vec<u64> = g.space().opens().iter().map(|&u| g.unit_image(u)).collect();
    let (missing, extra) = diff_sets(&open_images, &qe_masks);
    if !missing.is_empty() || !extra.is_empty() {
        return Err(RecoveryFailure::UnitDownset { missing, extra });
    }

    let primes: Vec<u64> = crate::incidence::primes_of_qe(q)
        .iter()
        .map(|&i| gq.quantale.mask(i))
        .collect();
    let expected: Vec<u64> = {
        let mut v: Vec<u64> = (0..g.space().n_points())
            .map(|p| g.unit_image(g.space().top() & !g.space().closure(p).carrier))
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let (missing, extra) = diff_sets(&expected, &primes);
    if !missing.is_empty() || !extra.is_empty() {
        return Err(RecoveryFailure::Primes { missing, extra });
    }
    Ok(())
}

fn diff_sets(expected: &[u64], got: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let missing = expected.iter().copied().filter(|m| !got.contains(m)).collect();
    let extra = got.iter().copied().filter(|m| !expected.contains(m)).collect();
    (missing, extra)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TopBaseWitness {
    pub s: u64,
    pub t: u64,
    pub arrow: usize,
}

/// The base is a topological base iff every point of every pairwise
/// intersection is inside some member contained in the intersection.
pub fn is_topological_base(base: &SelectionBase) -> Result<(), TopBaseWitness> {
    for &s in base.members() {
        for &t in base.members() {
            let cap = s & t;
            for x in bits::ones(cap) {
                let witnessed = base
                    .members()
                    .iter()
                    .any(|&r| bits::contains(r, x) && bits::is_subset(r, cap));
                if !witnessed {
                    return Err(TopBaseWitness { s, t, arrow: x });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::fixtures::*;
    use crate::quantale::{check_sg, check_sgf};

    fn base_81() -> (FiniteGroupoid, SelectionBase) {
        let g = groupoid_81();
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        (g, base)
    }

    fn base_82() -> (FiniteGroupoid, SelectionBase) {
        let g = groupoid_82();
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        (g, base)
    }

    #[test]
    fn fixture_families_validate() {
        let (_, b81) = base_81();
        assert_eq!(b81.len(), 8);
        let (_, b82) = base_82();
        assert_eq!(b82.len(), 9);
    }

    #[test]
    fn removing_a_unit_image_fails_sb2() {
        let g = groupoid_82();
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .filter(|&m| m != id_graph(&g, &["p1"]))
            .collect();
        let report = validate_selection_base(&g, &fam).unwrap_err();
        assert!(report
            .0
            .iter()
            .any(|v| matches!(v, SbViolation::MissingUnitImage(_))));
    }

    #[test]
    fn canonical_base_matches_enumerated_family() {
        for (space, expected) in [(space_81(), 8), (space_82(), 9)] {
            let action = swap_action(space);
            let g = action.orbit_relation_groupoid().unwrap();
            let base = canonical_base_from_action(&action, &g, 1 << 12).unwrap();
            assert_eq!(base.len(), expected);
            let enumerated: Vec<u64> = g
                .enumerate_bisection_images(1 << 20)
                .unwrap()
                .iter()
                .map(|b| b.carrier)
                .collect();
            assert_eq!(base.members(), &enumerated[..]);
        }
    }

    #[test]
    fn trivial_action_gives_unit_images_only() {
        let s = space_81();
        let action = GroupAction::validate(
            s,
            vec!["e".into()],
            vec![vec![0]],
            0,
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let g = action.orbit_relation_groupoid().unwrap();
        let base = canonical_base_from_action(&action, &g, 1 << 12).unwrap();
        assert_eq!(base.len(), g.space().opens().len());
        for &m in base.members() {
            assert_eq!(m, g.unit_image(g.source_image(m)));
        }
    }

    #[test]
    fn built_quantale_sizes_match_bruteforce_closure() {
        let (g81, b81) = base_81();
        let gq81 = build_gq(&g81, &b81, DEFAULT_SIZE_BUDGET).unwrap();
        assert_eq!(gq81.quantale.quantale.n(), 17);
        let oracle = union_closure_bruteforce(b81.members(), g81.all_arrows());
        assert_eq!(oracle.len(), 17);

        let (g82, b82) = base_82();
        let gq82 = build_gq(&g82, &b82, DEFAULT_SIZE_BUDGET).unwrap();
        assert_eq!(gq82.quantale.quantale.n(), 23);
        let oracle = union_closure_bruteforce(b82.members(), g82.all_arrows());
        assert_eq!(oracle.len(), 23);
    }

    #[test]
    fn base_alone_is_not_union_closed() {
        let (g82, b82) = base_82();
        let err =
            crate::quantale::SubsetQuantale::from_subset_family(&g82, b82.members()).unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|v| matches!(v, crate::quantale::FamilyViolation::NotUnionClosed(_, _))));
    }

    #[test]
    fn built_quantales_are_sg_and_sgf() {
        for gq in [
            {
                let (g, b) = base_81();
                build_gq(&g, &b, DEFAULT_SIZE_BUDGET).unwrap()
            },
            {
                let (g, b) = base_82();
                build_gq(&g, &b, DEFAULT_SIZE_BUDGET).unwrap()
            },
        ] {
            let q = &gq.quantale.quantale;
            assert!(q.validate_axioms().is_empty());
            assert!(check_sg(q).is_ok());
            assert!(check_sgf(q).all());
        }
    }

    #[test]
    fn recovery_holds_on_fixtures() {
        for (g, b) in [base_81(), base_82()] {
            let gq = build_gq(&g, &b, DEFAULT_SIZE_BUDGET).unwrap();
            check_recovery(&gq).unwrap();
        }
    }

    #[test]
    fn first_fixture_is_a_topological_base_second_is_not() {
        let (_, b81) = base_81();
        assert!(is_topological_base(&b81).is_ok());
        let (g82, b82) = base_82();
        let w = is_topological_base(&b82).unwrap_err();
        // The witness arrow is the common point (p0,p0) of the swap
        // graph and the full identity.
        assert_eq!(w.arrow, arrow(&g82, "p0", "p0"));
    }

    #[test]
    fn sb3_binary_reduction_matches_exhaustive_oracle() {
        for (g, b) in [base_81(), base_82()] {
            assert!(sb3_exhaustive_oracle(&g, b.members()).is_ok());
        }
        // Removing the two-point identity breaks closure under the
        // compatible union of its two singleton restrictions.
        let g = groupoid_82();
        let mut fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let id_p0 = id_graph(&g, &["p1", "p2"]);
        fam.retain(|&m| m != id_p0);
        assert!(sb3_exhaustive_oracle(&g, &fam).is_err());
        let report = validate_selection_base(&g, &fam).unwrap_err();
        assert!(report
            .0
            .iter()
            .any(|v| matches!(v, SbViolation::UnionEscapes(_, _))));
    }

    #[test]
    fn unit_space_groupoid_quantale_is_the_topology() {
        let g = FiniteGroupoid::unit_groupoid(space_82());
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        let gq = build_gq(&g, &base, DEFAULT_SIZE_BUDGET).unwrap();
        assert_eq!(gq.quantale.quantale.n(), g.space().opens().len());
        check_recovery(&gq).unwrap();
    }
}
