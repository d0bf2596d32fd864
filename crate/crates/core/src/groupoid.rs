//! Finite set groupoids over a sober unit space, with constructors from
//! equivalence relations and group actions, axiom validation, and
//! bisection-image machinery.
//!
//! Arrows are indices into an ordered label list; arrow subsets are
//! `u64` masks. The partial product is a dense table with `None` for
//! undefined entries, and definedness is required to match the
//! source/target condition exactly.

use crate::bits::{self, full_mask};
use crate::topology::{FiniteSpace, SpaceError};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupoidAxiom {
    /// Unit section: d(u(p)) = p = r(u(p)).
    G2,
    /// Product defined exactly when target meets source.
    G3Definedness,
    G3Associativity,
    /// d(xy) = d(x) and r(xy) = r(y).
    G3Boundaries,
    /// x·u(r(x)) = x = u(d(x))·x.
    G4,
    /// Inverse laws: xx⁻¹ = u(d(x)), x⁻¹x = u(r(x)), boundaries swap.
    G5,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomViolation {
    pub axiom: GroupoidAxiom,
    /// Arrow (or point, for G2) indices witnessing the failure.
    pub witness: Vec<usize>,
}

#[derive(Debug, Error)]
pub enum GroupoidError {
    #[error("at most 64 arrows are supported, got {0}")]
    TooManyArrows(usize),
    #[error("structure map index out of range: {0}")]
    MalformedTables(String),
    #[error("groupoid axiom violations: {0:?}")]
    Axioms(Vec<AxiomViolation>),
}

#[derive(Debug, Error)]
pub enum RelationError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("relation is not reflexive at point {0}")]
    NotReflexive(usize),
    #[error("relation is not symmetric: contains ({0},{1}) but not ({1},{0})")]
    NotSymmetric(usize, usize),
    #[error("relation is not transitive: ({0},{1}) and ({1},{2}) but not ({0},{2})")]
    NotTransitive(usize, usize, usize),
    #[error("relation mentions unknown point index {0}")]
    UnknownPoint(usize),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A validated finite set groupoid.
#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    space: FiniteSpace,
    labels: Vec<String>,
    d: Vec<usize>,
    r: Vec<usize>,
    u: Vec<usize>,
    prod: Vec<Vec<Option<usize>>>,
    inv: Vec<usize>,
}

/// The image of a local bisection: an arrow set on which the source map
/// is injective with open image, and whose induced point map is a
/// partial homeomorphism between opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BisectionImage {
    pub carrier: u64,
    pub domain: u64,
    pub range: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BisectionDefect {
    SourceNotInjective(usize, usize),
    DomainNotOpen(u64),
    TargetNotInjective(usize, usize),
    RangeNotOpen(u64),
    /// Image of the named open under the induced map is not open.
    NotOpenMap(u64),
    /// Preimage of the named open under the induced map is not open.
    NotContinuous(u64),
}

#[derive(Debug, Error)]
#[error("section enumeration budget of {budget} exceeded")]
pub struct EnumerationBudget {
    pub budget: u64,
}

impl FiniteGroupoid {
    /// Validate raw structure tables against the groupoid axioms,
    /// collecting one violation per failed condition.
    pub fn validate(
        space: FiniteSpace,
        labels: Vec<String>,
        d: Vec<usize>,
        r: Vec<usize>,
        u: Vec<usize>,
        prod: Vec<Vec<Option<usize>>>,
        inv: Vec<usize>,
    ) -> Result<FiniteGroupoid, GroupoidError> {
        let n_arrows = labels.len();
        let n_points = space.n_points();
        if n_arrows > 64 {
            return Err(GroupoidError::TooManyArrows(n_arrows));
        }
        let arrows_ok = d.len() == n_arrows
            && r.len() == n_arrows
            && inv.len() == n_arrows
            && prod.len() == n_arrows
            && prod.iter().all(|row| row.len() == n_arrows)
            && u.len() == n_points;
        if !arrows_ok {
            return Err(GroupoidError::MalformedTables(
                "table dimensions do not match arrow/point counts".into(),
            ));
        }
        if let Some(bad) = d
            .iter()
            .chain(&r)
            .find(|&&p| p >= n_points)
            .or_else(|| u.iter().find(|&&x| x >= n_arrows))
            .or_else(|| inv.iter().find(|&&x| x >= n_arrows))
        {
            return Err(GroupoidError::MalformedTables(format!(
                "index {bad} out of range"
            )));
        }
        if let Some(bad) = prod
            .iter()
            .flatten()
            .flatten()
            .find(|&&z| z >= n_arrows)
        {
            return Err(GroupoidError::MalformedTables(format!(
                "product entry {bad} out of range"
            )));
        }

        let g = FiniteGroupoid {
            space,
            labels,
            d,
            r,
            u,
            prod,
            inv,
        };
        let violations = g.check_axioms();
        if violations.is_empty() {
            Ok(g)
        } else {
            Err(GroupoidError::Axioms(violations))
        }
    }

    /// Re-run the axiom checks on already-indexed tables.
    pub fn check_axioms(&self) -> Vec<AxiomViolation> {
        let mut out = Vec::new();
        let n = self.n_arrows();
        for p in 0..self.space.n_points() {
            let up = self.u[p];
            if self.d[up] != p || self.r[up] != p {
                out.push(AxiomViolation {
                    axiom: GroupoidAxiom::G2,
                    witness: vec![p],
                });
            }
        }
        for x in 0..n {
            for y in 0..n {
                let defined = self.prod[x][y].is_some();
                if defined != (self.r[x] == self.d[y]) {
                    out.push(AxiomViolation {
                        axiom: GroupoidAxiom::G3Definedness,
                        witness: vec![x, y],
                    });
                }
                if let Some(z) = self.prod[x][y] {
                    if self.d[z] != self.d[x] || self.r[z] != self.r[y] {
                        out.push(AxiomViolation {
                            axiom: GroupoidAxiom::G3Boundaries,
                            witness: vec![x, y],
                        });
                    }
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let Some(xy) = self.prod[x][y] else { continue };
                for z in 0..n {
                    let left = self.prod[xy][z];
                    let right = self.prod[y][z].and_then(|yz| self.prod[x][yz]);
                    if left != right {
                        out.push(AxiomViolation {
                            axiom: GroupoidAxiom::G3Associativity,
                            witness: vec![x, y, z],
                        });
                    }
                }
            }
        }
        for x in 0..n {
            let right_unit = self.prod[x][self.u[self.r[x]]];
            let left_unit = self.prod[self.u[self.d[x]]][x];
            if right_unit != Some(x) || left_unit != Some(x) {
                out.push(AxiomViolation {
                    axiom: GroupoidAxiom::G4,
                    witness: vec![x],
                });
            }
        }
        for x in 0..n {
            let xi = self.inv[x];
            let ok = self.d[xi] == self.r[x]
                && self.r[xi] == self.d[x]
                && self.prod[x][xi] == Some(self.u[self.d[x]])
                && self.prod[xi][x] == Some(self.u[self.r[x]]);
            if !ok {
                out.push(AxiomViolation {
                    axiom: GroupoidAxiom::G5,
                    witness: vec![x],
                });
            }
        }
        out
    }

    /// Groupoid of an equivalence relation: arrows are the related
    /// pairs, composition concatenates them.
    pub fn from_equivalence_relation(
        space: FiniteSpace,
        relation: &[(usize, usize)],
    ) -> Result<FiniteGroupoid, RelationError> {
        let n = space.n_points();
        let mut pairs: Vec<(usize, usize)> = relation.to_vec();
        pairs.sort_unstable();
        pairs.dedup();
        if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| x >= n || y >= n) {
            return Err(RelationError::UnknownPoint(x.max(y)));
        }
        for p in 0..n {
            if !pairs.contains(&(p, p)) {
                return Err(RelationError::NotReflexive(p));
            }
        }
        for &(x, y) in &pairs {
            if !pairs.contains(&(y, x)) {
                return Err(RelationError::NotSymmetric(x, y));
            }
        }
        for &(x, y) in &pairs {
            for &(y2, z) in &pairs {
                if y == y2 && !pairs.contains(&(x, z)) {
                    return Err(RelationError::NotTransitive(x, y, z));
                }
            }
        }

        let labels: Vec<String> = pairs
            .iter()
            .map(|&(x, y)| format!("({},{})", space.points()[x], space.points()[y]))
            .collect();
        let idx = |x: usize, y: usize| pairs.binary_search(&(x, y)).expect("closed relation");
        let d: Vec<usize> = pairs.iter().map(|&(x, _)| x).collect();
        let r: Vec<usize> = pairs.iter().map(|&(_, y)| y).collect();
        let u: Vec<usize> = (0..n).map(|p| idx(p, p)).collect();
        let inv: Vec<usize> = pairs.iter().map(|&(x, y)| idx(y, x)).collect();
        let prod: Vec<Vec<Option<usize>>> = pairs
            .iter()
            .map(|&(x, y)| {
                pairs
                    .iter()
                    .map(|&(y2, z)| if y == y2 { Some(idx(x, z)) } else { None })
                    .collect()
            })
            .collect();
        Ok(FiniteGroupoid::validate(space, labels, d, r, u, prod, inv)?)
    }

    /// The unit-space groupoid: only identity arrows.
    pub fn unit_groupoid(space: FiniteSpace) -> FiniteGroupoid {
        let id: Vec<(usize, usize)> = (0..space.n_points()).map(|p| (p, p)).collect();
        FiniteGroupoid::from_equivalence_relation(space, &id).expect("identity relation")
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn n_arrows(&self) -> usize {
        self.labels.len()
    }

    pub fn all_arrows(&self) -> u64 {
        full_mask(self.n_arrows())
    }

    pub fn arrow_label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn arrow_by_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn source(&self, x: usize) -> usize {
        self.d[x]
    }

    pub fn target(&self, x: usize) -> usize {
        self.r[x]
    }

    pub fn unit(&self, p: usize) -> usize {
        self.u[p]
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inv[x]
    }

    pub fn compose(&self, x: usize, y: usize) -> Option<usize> {
        self.prod[x][y]
    }

    /// Arrows between a given source and target.
    pub fn arrows_between(&self, p: usize, q: usize) -> Vec<usize> {
        (0..self.n_arrows())
            .filter(|&x| self.d[x] == p && self.r[x] == q)
            .collect()
    }

    /// u[U] for a point-set mask.
    pub fn unit_image(&self, open: u64) -> u64 {
        bits::ones(open).fold(0, |acc, p| acc | bits::bit(self.u[p]))
    }

    /// E = u[G0], the unit of the lifted power-set quantale.
    pub fn unit_arrows(&self) -> u64 {
        self.unit_image(self.space.top())
    }

    /// Elementwise composite of two arrow sets.
    pub fn lift_product(&self, a: u64, b: u64) -> u64 {
        let mut out = 0;
        for x in bits::ones(a) {
            for y in bits::ones(b) {
                if let Some(z) = self.prod[x][y] {
                    out |= bits::bit(z);
                }
            }
        }
        out
    }

    /// Elementwise inverse of an arrow set.
    pub fn lift_involution(&self, a: u64) -> u64 {
        bits::ones(a).fold(0, |acc, x| acc | bits::bit(self.inv[x]))
    }

    pub fn source_image(&self, a: u64) -> u64 {
        bits::ones(a).fold(0, |acc, x| acc | bits::bit(self.d[x]))
    }

    pub fn target_image(&self, a: u64) -> u64 {
        bits::ones(a).fold(0, |acc, x| acc | bits::bit(self.r[x]))
    }

    /// Decide whether an arrow set is the image of a local bisection.
    pub fn is_bisection_image(&self, carrier: u64) -> Result<BisectionImage, BisectionDefect> {
        let arrows: Vec<usize> = bits::ones(carrier).collect();
        for (i, &x) in arrows.iter().enumerate() {
            for &y in &arrows[i + 1..] {
                if self.d[x] == self.d[y] {
                    return Err(BisectionDefect::SourceNotInjective(x, y));
                }
            }
        }
        let domain = self.source_image(carrier);
        if !self.space.is_open(domain) {
            return Err(BisectionDefect::DomainNotOpen(domain));
        }
        for (i, &x) in arrows.iter().enumerate() {
            for &y in &arrows[i + 1..] {
                if self.r[x] == self.r[y] {
                    return Err(BisectionDefect::TargetNotInjective(x, y));
                }
            }
        }
        let range = self.target_image(carrier);
        if !self.space.is_open(range) {
            return Err(BisectionDefect::RangeNotOpen(range));
        }
        // Induced point map and its inverse.
        let mut fwd = vec![usize::MAX; self.space.n_points()];
        let mut bwd = vec![usize::MAX; self.space.n_points()];
        for &x in &arrows {
            fwd[self.d[x]] = self.r[x];
            bwd[self.r[x]] = self.d[x];
        }
        let map_image = |map: &[usize], set: u64| -> u64 {
            bits::ones(set).fold(0, |acc, p| acc | bits::bit(map[p]))
        };
        for &open in self.space.opens() {
            let o = open & domain;
            if !bits::is_subset(o, domain) {
                continue;
            }
            if !self.space.is_open(map_image(&fwd, o)) {
                return Err(BisectionDefect::NotOpenMap(o));
            }
            let o2 = open & range;
            if !self.space.is_open(map_image(&bwd, o2)) {
                return Err(BisectionDefect::NotContinuous(o2));
            }
        }
        Ok(BisectionImage {
            carrier,
            domain,
            range,
        })
    }

    /// The point the bisection through `carrier` sends `p` to.
    pub fn bisection_value(&self, carrier: u64, p: usize) -> Option<usize> {
        bits::ones(carrier).find(|&x| self.d[x] == p).map(|x| self.r[x])
    }

    /// All bisection images, enumerated by sections over each open
    /// domain. The budget caps the number of candidate sections.
    pub fn enumerate_bisection_images(
        &self,
        budget: u64,
    ) -> Result<Vec<BisectionImage>, EnumerationBudget> {
        let mut fibers: Vec<Vec<usize>> = vec![Vec::new(); self.space.n_points()];
        for x in 0..self.n_arrows() {
            fibers[self.d[x]].push(x);
        }
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        let mut examined: u64 = 0;
        for &domain in self.space.opens() {
            let pts: Vec<usize> = bits::ones(domain).collect();
            // Odometer over the d-fibers of the domain's points.
            let mut choice = vec![0usize; pts.len()];
            loop {
                examined += 1;
                if examined > budget {
                    return Err(EnumerationBudget { budget });
                }
                let carrier = pts
                    .iter()
                    .zip(&choice)
                    .fold(0u64, |acc, (&p, &c)| acc | bits::bit(fibers[p][c]));
                if let Ok(img) = self.is_bisection_image(carrier) {
                    if seen.insert(carrier) {
                        out.push(img);
                    }
                }
                let mut k = 0;
                loop {
                    if k == pts.len() {
                        break;
                    }
                    choice[k] += 1;
                    if choice[k] < fibers[pts[k]].len() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == pts.len() {
                    break;
                }
            }
        }
        out.sort_unstable_by_key(|b| (b.carrier.count_ones(), b.carrier));
        Ok(out)
    }

    /// Selection property: the family covers every arrow.
    pub fn is_sp(&self, family: &[u64]) -> bool {
        family.iter().fold(0, |acc, &s| acc | s) == self.all_arrows()
    }

    /// Render an arrow mask as sorted labels.
    pub fn arrow_set_names(&self, mask: u64) -> Vec<String> {
        bits::ones(mask).map(|x| self.labels[x].clone()).collect()
    }
}

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("group table mentions unknown element {0:?}")]
    UnknownElement(String),
    #[error("action mentions unknown point {0:?}")]
    UnknownPoint(String),
    #[error("multiplication table has wrong shape")]
    BadTableShape,
    #[error("identity law fails: {0} * {1} != {1}")]
    BadIdentity(String, String),
    #[error("group multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(String, String, String),
    #[error("element {0} has no inverse")]
    NoInverse(String),
    #[error("action identity law fails at point {0}")]
    ActionIdentityLaw(String),
    #[error("action composition law fails at ({0}, {1}, {2})")]
    ActionCompositionLaw(String, String, String),
    #[error("element {0} does not act by a homeomorphism")]
    NotHomeomorphism(String),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
}

/// A finite group acting on a finite space by homeomorphisms.
#[derive(Debug, Clone)]
pub struct GroupAction {
    space: FiniteSpace,
    elements: Vec<String>,
    mult: Vec<Vec<usize>>,
    identity: usize,
    act: Vec<Vec<usize>>,
}

impl GroupAction {
    pub fn validate(
        space: FiniteSpace,
        elements: Vec<String>,
        mult: Vec<Vec<usize>>,
        identity: usize,
        act: Vec<Vec<usize>>,
    ) -> Result<GroupAction, ActionError> {
        let k = elements.len();
        let n = space.n_points();
        if mult.len() != k
            || mult.iter().any(|row| row.len() != k)
            || act.len() != k
            || act.iter().any(|row| row.len() != n)
            || identity >= k
        {
            return Err(ActionError::BadTableShape);
        }
        if let Some(&bad) = mult.iter().flatten().find(|&&g| g >= k) {
            return Err(ActionError::UnknownElement(format!("#{bad}")));
        }
        if let Some(&bad) = act.iter().flatten().find(|&&p| p >= n) {
            return Err(ActionError::UnknownPoint(format!("#{bad}")));
        }
        for g in 0..k {
            if mult[identity][g] != g || mult[g][identity] != g {
                return Err(ActionError::BadIdentity(
                    elements[identity].clone(),
                    elements[g].clone(),
                ));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(ActionError::NotAssociative(
                            elements[a].clone(),
                            elements[b].clone(),
                            elements[c].clone(),
                        ));
                    }
                }
            }
        }
        for g in 0..k {
            if !(0..k).any(|h| mult[g][h] == identity && mult[h][g] == identity) {
                return Err(ActionError::NoInverse(elements[g].clone()));
            }
        }
        for p in 0..n {
            if act[identity][p] != p {
                return Err(ActionError::ActionIdentityLaw(space.points()[p].clone()));
            }
        }
        for g in 0..k {
            for h in 0..k {
                for p in 0..n {
                    if act[mult[g][h]][p] != act[g][act[h][p]] {
                        return Err(ActionError::ActionCompositionLaw(
                            elements[g].clone(),
                            elements[h].clone(),
                            space.points()[p].clone(),
                        ));
                    }
                }
            }
        }
        for g in 0..k {
            let img = |mask: u64| bits::ones(mask).fold(0u64, |acc, p| acc | bits::bit(act[g][p]));
            let bijective = img(space.top()) == space.top();
            let open_map = space.opens().iter().all(|&u| space.is_open(img(u)));
            if !bijective || !open_map {
                return Err(ActionError::NotHomeomorphism(elements[g].clone()));
            }
        }
        Ok(GroupAction {
            space,
            elements,
            mult,
            identity,
            act,
        })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mult[g][h]
    }

    pub fn apply(&self, g: usize, p: usize) -> usize {
        self.act[g][p]
    }

    /// Action groupoid: arrows are (group element, source point) pairs.
    pub fn action_groupoid(&self) -> Result<FiniteGroupoid, ActionError> {
        let k = self.order();
        let n = self.space.n_points();
        let idx = |g: usize, x: usize| g * n + x;
        let labels: Vec<String> = (0..k)
            .flat_map(|g| {
                (0..n).map(move |x| (g, x))
            })
            .map(|(g, x)| format!("({},{})", self.elements[g], self.space.points()[x]))
            .collect();
        let d: Vec<usize> = (0..k * n).map(|a| a % n).collect();
        let r: Vec<usize> = (0..k * n).map(|a| self.act[a / n][a % n]).collect();
        let u: Vec<usize> = (0..n).map(|x| idx(self.identity, x)).collect();
        let inv: Vec<usize> = (0..k * n)
            .map(|a| {
                let (g, x) = (a / n, a % n);
                let ginv = (0..k)
                    .find(|&h| self.mult[g][h] == self.identity)
                    .expect("validated group");
                idx(ginv, self.act[g][x])
            })
            .collect();
        let prod: Vec<Vec<Option<usize>>> = (0..k * n)
            .map(|a| {
                let (g, x) = (a / n, a % n);
                (0..k * n)
                    .map(|b| {
                        let (h, y) = (b / n, b % n);
                        if y == self.act[g][x] {
                            Some(idx(self.mult[h][g], x))
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(FiniteGroupoid::validate(
            self.space.clone(),
            labels,
            d,
            r,
            u,
            prod,
            inv,
        )?)
    }

    /// Orbit equivalence relation of the action.
    pub fn orbit_relation(&self) -> Vec<(usize, usize)> {
        let n = self.space.n_points();
        let mut pairs = Vec::new();
        for x in 0..n {
            for g in 0..self.order() {
                pairs.push((x, self.act[g][x]));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Groupoid of the orbit equivalence relation.
    pub fn orbit_relation_groupoid(&self) -> Result<FiniteGroupoid, ActionError> {
        FiniteGroupoid::from_equivalence_relation(self.space.clone(), &self.orbit_relation())
            .map_err(|e| match e {
                RelationError::Groupoid(g) => ActionError::Groupoid(g),
                other => ActionError::Groupoid(GroupoidError::MalformedTables(other.to_string())),
            })
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn space_81() -> FiniteSpace {
        FiniteSpace::from_names(
            &["p0", "p1", "p2"],
            &[&[], &["p0"], &["p0", "p2"], &["p0", "p1"], &["p0", "p1", "p2"]],
        )
        .unwrap()
    }

    pub fn space_82() -> FiniteSpace {
        FiniteSpace::from_names(
            &["p0", "p1", "p2"],
            &[&[], &["p2"], &["p1"], &["p1", "p2"], &["p0", "p1", "p2"]],
        )
        .unwrap()
    }

    /// Order-two action swapping p1 and p2, fixing p0.
    pub fn swap_action(space: FiniteSpace) -> GroupAction {
        GroupAction::validate(
            space,
            vec!["e".into(), "phi".into()],
            vec![vec![0, 1], vec![1, 0]],
            0,
            vec![vec![0, 1, 2], vec![0, 2, 1]],
        )
        .unwrap()
    }

    pub fn groupoid_81() -> FiniteGroupoid {
        swap_action(space_81()).orbit_relation_groupoid().unwrap()
    }

    pub fn groupoid_82() -> FiniteGroupoid {
        swap_action(space_82()).orbit_relation_groupoid().unwrap()
    }

    pub fn arrow(g: &FiniteGroupoid, from: &str, to: &str) -> usize {
        g.arrow_by_label(&format!("({from},{to})")).unwrap()
    }

    /// Graph of the swap map restricted to a set of point names.
    pub fn phi_graph(g: &FiniteGroupoid, domain: &[&str]) -> u64 {
        let phi = |p: &str| match p {
            "p0" => "p0",
            "p1" => "p2",
            "p2" => "p1",
            _ => unreachable!(),
        };
        domain
            .iter()
            .map(|p| bits::bit(arrow(g, p, phi(p))))
            .fold(0, |a, b| a | b)
    }

    pub fn id_graph(g: &FiniteGroupoid, domain: &[&str]) -> u64 {
        domain
            .iter()
            .map(|p| bits::bit(arrow(g, p, p)))
            .fold(0, |a, b| a | b)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn fixture_relation_groupoids_have_five_arrows() {
        for g in [groupoid_81(), groupoid_82()] {
            assert_eq!(g.n_arrows(), 5);
            assert!(g.check_axioms().is_empty());
        }
    }

    #[test]
    fn one_point_unit_groupoid_is_valid() {
        let s = FiniteSpace::from_names(&["x"], &[&[], &["x"]]).unwrap();
        let g = FiniteGroupoid::unit_groupoid(s);
        assert_eq!(g.n_arrows(), 1);
    }

    #[test]
    fn corrupted_inverse_is_rejected_as_g5() {
        let g = groupoid_81();
        let mut inv: Vec<usize> = (0..5).map(|x| g.inverse(x)).collect();
        let a = arrow(&g, "p1", "p2");
        inv[a] = a; // breaks x·x⁻¹ = u(d(x))
        let err = FiniteGroupoid::validate(
            g.space().clone(),
            (0..5).map(|x| g.arrow_label(x).to_string()).collect(),
            (0..5).map(|x| g.source(x)).collect(),
            (0..5).map(|x| g.target(x)).collect(),
            (0..3).map(|p| g.unit(p)).collect(),
            (0..5)
                .map(|x| (0..5).map(|y| g.compose(x, y)).collect())
                .collect(),
            inv,
        )
        .unwrap_err();
        match err {
            GroupoidError::Axioms(v) => {
                assert!(v.iter().any(|w| w.axiom == GroupoidAxiom::G5))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relation_must_be_symmetric() {
        let s = space_82();
        let pairs = vec![(0, 0), (1, 1), (2, 2), (1, 2)];
        match FiniteGroupoid::from_equivalence_relation(s, &pairs) {
            Err(RelationError::NotSymmetric(1, 2)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn identity_relation_gives_unit_arrows_only() {
        let g = FiniteGroupoid::unit_groupoid(space_81());
        assert_eq!(g.n_arrows(), 3);
        assert_eq!(g.unit_arrows(), g.all_arrows());
    }

    #[test]
    fn action_groupoid_has_group_times_points_arrows() {
        let a = swap_action(space_81());
        let g = a.action_groupoid().unwrap();
        assert_eq!(g.n_arrows(), 6);
        assert_eq!(g.space().n_points(), 3);
    }

    #[test]
    fn trivial_action_groupoid_is_unit_like() {
        let s = space_81();
        let a = GroupAction::validate(
            s,
            vec!["e".into()],
            vec![vec![0]],
            0,
            vec![vec![0, 1, 2]],
        )
        .unwrap();
        let g = a.action_groupoid().unwrap();
        assert_eq!(g.n_arrows(), 3);
        assert_eq!(g.unit_arrows(), g.all_arrows());
        let orbit = a.orbit_relation_groupoid().unwrap();
        assert_eq!(orbit.n_arrows(), 3);
    }

    #[test]
    fn broken_action_identity_is_rejected() {
        let err = GroupAction::validate(
            space_81(),
            vec!["e".into(), "phi".into()],
            vec![vec![0, 1], vec![1, 0]],
            0,
            vec![vec![0, 2, 1], vec![0, 1, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, ActionError::ActionIdentityLaw(_)));
    }

    #[test]
    fn orbit_relation_of_swap_matches_fixture() {
        let a = swap_action(space_81());
        assert_eq!(
            a.orbit_relation(),
            vec![(0, 0), (1, 1), (1, 2), (2, 1), (2, 2)]
        );
        let b = swap_action(space_82());
        assert_eq!(b.orbit_relation().len(), 5);
    }

    #[test]
    fn singleton_identity_is_bisection_in_81_not_82() {
        let g81 = groupoid_81();
        let img = g81
            .is_bisection_image(id_graph(&g81, &["p0"]))
            .expect("open singleton domain");
        assert_eq!(img.domain, 0b001);
        let g82 = groupoid_82();
        match g82.is_bisection_image(id_graph(&g82, &["p0"])) {
            Err(BisectionDefect::DomainNotOpen(m)) => assert_eq!(m, 0b001),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn full_unit_image_is_a_bisection() {
        let g = groupoid_82();
        let img = g.is_bisection_image(g.unit_arrows()).unwrap();
        assert_eq!(img.domain, g.space().top());
        assert_eq!(img.range, g.space().top());
    }

    #[test]
    fn enumerated_family_sizes_match_fixtures() {
        // The two identity-on-{p0} sections coincide as images, so the
        // first fixture family has 8 distinct members; the second has 9.
        let g81 = groupoid_81();
        let fam81 = g81.enumerate_bisection_images(1 << 20).unwrap();
        assert_eq!(fam81.len(), 8);
        let g82 = groupoid_82();
        let fam82 = g82.enumerate_bisection_images(1 << 20).unwrap();
        assert_eq!(fam82.len(), 9);
        for g in [&g81, &g82] {
            let fam = g.enumerate_bisection_images(1 << 20).unwrap();
            let masks: Vec<u64> = fam.iter().map(|b| b.carrier).collect();
            assert!(g.is_sp(&masks));
        }
    }

    #[test]
    fn expected_members_of_82_family() {
        let g = groupoid_82();
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        for m in [
            0u64,
            id_graph(&g, &["p1"]),
            id_graph(&g, &["p2"]),
            id_graph(&g, &["p1", "p2"]),
            id_graph(&g, &["p0", "p1", "p2"]),
            phi_graph(&g, &["p1"]),
            phi_graph(&g, &["p2"]),
            phi_graph(&g, &["p1", "p2"]),
            phi_graph(&g, &["p0", "p1", "p2"]),
        ] {
            assert!(fam.contains(&m), "missing member {m:b}");
        }
    }

    #[test]
    fn unit_groupoid_bisections_are_unit_images_of_opens() {
        let g = FiniteGroupoid::unit_groupoid(space_82());
        let fam = g.enumerate_bisection_images(1 << 20).unwrap();
        assert_eq!(fam.len(), g.space().opens().len());
        for b in fam {
            assert_eq!(b.carrier, g.unit_image(b.domain));
        }
    }

    #[test]
    fn identities_alone_do_not_cover_82() {
        let g = groupoid_82();
        let identities: Vec<u64> = g.space().opens().iter().map(|&u| g.unit_image(u)).collect();
        assert!(!g.is_sp(&identities));
    }

    #[test]
    fn lifted_products_match_hand_computations() {
        let g = groupoid_81();
        let phi = phi_graph(&g, &["p0", "p1", "p2"]);
        assert_eq!(g.lift_product(phi, phi), g.unit_arrows());
        assert_eq!(g.lift_product(phi, 0), 0);
        let u_h = g.unit_image(0b001);
        let u_p1 = g.unit_image(0b101);
        assert_eq!(g.lift_product(u_h, u_p1), g.unit_image(0b001));
    }

    #[test]
    fn groupoid_identities_hold_on_fixtures() {
        for g in [groupoid_81(), groupoid_82()] {
            for p in 0..g.space().n_points() {
                assert_eq!(g.inverse(g.unit(p)), g.unit(p));
            }
            for x in 0..g.n_arrows() {
                let xi = g.inverse(x);
                assert_eq!(g.inverse(xi), x);
                let xxi = g.compose(x, xi).unwrap();
                assert_eq!(g.compose(xxi, x), Some(x));
                for y in 0..g.n_arrows() {
                    if let Some(xy) = g.compose(x, y) {
                        assert_eq!(
                            g.inverse(xy),
                            g.compose(g.inverse(y), g.inverse(x)).unwrap()
                        );
                    }
                    // If x = xyx and y = yxy then y = x⁻¹.
                    let xyx = g
                        .compose(x, y)
                        .and_then(|xy| g.compose(xy, x));
                    let yxy = g
                        .compose(y, x)
                        .and_then(|yx| g.compose(yx, y));
                    if xyx == Some(x) && yxy == Some(y) {
                        assert_eq!(y, g.inverse(x));
                    }
                }
            }
        }
    }

    #[test]
    fn lifted_powerset_satisfies_sg_on_all_subsets() {
        let g = groupoid_81();
        for a in 0..=g.all_arrows() {
            let asa = g.lift_product(g.lift_product(a, g.lift_involution(a)), a);
            assert!(bits::is_subset(a, asa), "SG fails for {a:b}");
        }
    }

    #[test]
    fn enumerated_family_is_closed_under_product_and_involution() {
        let g = groupoid_82();
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        for &s in &fam {
            assert!(fam.contains(&g.lift_involution(s)));
            for &t in &fam {
                assert!(fam.contains(&g.lift_product(s, t)));
            }
        }
        for &u in g.space().opens() {
            assert!(fam.contains(&g.unit_image(u)));
        }
    }
}
