//! Finite topological spaces: sobriety, primes, closures and
//! locally-closed machinery.
//!
//! Point subsets are bitmasks over the ordered point list, so a space
//! carries at most 64 points. The family of opens is canonicalized on
//! construction (sorted by cardinality, then mask value) and every
//! derived operation is pure.

use crate::bits::{self, full_mask};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceViolation {
    MissingEmpty,
    MissingTop,
    /// Union of the two named opens is missing from the family.
    NotClosedUnderUnion(u64, u64),
    /// Intersection of the two named opens is missing from the family.
    NotClosedUnderIntersection(u64, u64),
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("at most 64 points are supported, got {0}")]
    TooManyPoints(usize),
    #[error("duplicate point name {0:?}")]
    DuplicatePoint(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("open-set family violations: {0:?}")]
    Violations(Vec<SpaceViolation>),
}

/// A validated finite topological space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    points: Vec<String>,
    opens: Vec<u64>,
    min_open: Vec<u64>,
    closure_pt: Vec<u64>,
}

/// A set whose complement is open in the ambient space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedSet {
    pub carrier: u64,
}

/// A prime open together with the unique point generating its
/// complementary irreducible closed set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeOpen {
    pub open: u64,
    pub point: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SoberWitness {
    /// An irreducible closed set that is no point's closure.
    NotAClosure(u64),
    /// Two distinct points with the same closure.
    DuplicatePoints(usize, usize),
}

impl FiniteSpace {
    /// Validate a family of opens over named points. Collects every
    /// violated closure condition instead of stopping at the first.
    pub fn validate(points: Vec<String>, opens: &[u64]) -> Result<FiniteSpace, SpaceError> {
        let n = points.len();
        if n > 64 {
            return Err(SpaceError::TooManyPoints(n));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(SpaceError::DuplicatePoint(p.clone()));
            }
        }
        let top = full_mask(n);
        let mut family: Vec<u64> = opens.iter().map(|&m| m & top).collect();
        family.sort_unstable_by_key(|&m| (m.count_ones(), m));
        family.dedup();

        let mut violations = Vec::new();
        if !family.contains(&0) {
            violations.push(SpaceViolation::MissingEmpty);
        }
        if !family.contains(&top) {
            violations.push(SpaceViolation::MissingTop);
        }
        for (i, &a) in family.iter().enumerate() {
            for &b in &family[i + 1..] {
                if family.binary_search_by_key(&((a | b).count_ones(), a | b), |&m| {
                    (m.count_ones(), m)
                })
                .is_err()
                {
                    violations.push(SpaceViolation::NotClosedUnderUnion(a, b));
                }
                if family.binary_search_by_key(&((a & b).count_ones(), a & b), |&m| {
                    (m.count_ones(), m)
                })
                .is_err()
                {
                    violations.push(SpaceViolation::NotClosedUnderIntersection(a, b));
                }
            }
        }
        if !violations.is_empty() {
            return Err(SpaceError::Violations(violations));
        }

        let min_open = (0..n)
            .map(|p| {
                family
                    .iter()
                    .filter(|&&u| bits::contains(u, p))
                    .fold(top, |acc, &u| acc & u)
            })
            .collect();
        let closure_pt = (0..n)
            .map(|p| {
                // Complement of the largest open avoiding p.
                let avoid = family
                    .iter()
                    .filter(|&&u| !bits::contains(u, p))
                    .fold(0, |acc, &u| acc | u);
                top & !avoid
            })
            .collect();
        Ok(FiniteSpace {
            points,
            opens: family,
            min_open,
            closure_pt,
        })
    }

    /// Convenience constructor from point names and opens given as name lists.
    pub fn from_names(points: &[&str], opens: &[&[&str]]) -> Result<FiniteSpace, SpaceError> {
        let names: Vec<String> = points.iter().map(|s| s.to_string()).collect();
        let mut masks = Vec::with_capacity(opens.len());
        for open in opens {
            let mut m = 0u64;
            for name in *open {
                let i = names
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| SpaceError::UnknownPoint(name.to_string()))?;
                m |= bits::bit(i);
            }
            masks.push(m);
        }
        FiniteSpace::validate(names, &masks)
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn top(&self) -> u64 {
        full_mask(self.points.len())
    }

    /// Opens in canonical order (by cardinality, then mask).
    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn is_open(&self, mask: u64) -> bool {
        self.opens
            .binary_search_by_key(&(mask.count_ones(), mask), |&m| (m.count_ones(), m))
            .is_ok()
    }

    pub fn is_closed(&self, mask: u64) -> bool {
        self.is_open(self.top() & !mask)
    }

    /// Complements of opens, in the canonical order of their opens.
    pub fn closed_sets(&self) -> Vec<u64> {
        self.opens.iter().map(|&u| self.top() & !u).collect()
    }

    /// Intersection of all opens containing `p`; open because the space
    /// is finite.
    pub fn minimal_open(&self, p: usize) -> u64 {
        self.min_open[p]
    }

    /// Smallest closed set containing `p`.
    pub fn closure(&self, p: usize) -> ClosedSet {
        ClosedSet {
            carrier: self.closure_pt[p],
        }
    }

    /// Smallest closed set containing `mask`.
    pub fn closure_of_set(&self, mask: u64) -> u64 {
        bits::ones(mask).fold(0, |acc, p| acc | self.closure_pt[p])
    }

    /// Specialization preorder: `p` lies in the closure of `q`.
    pub fn specializes(&self, p: usize, q: usize) -> bool {
        bits::contains(self.closure_pt[q], p)
    }

    pub fn is_t0(&self) -> bool {
        let n = self.n_points();
        (0..n).all(|p| (p + 1..n).all(|q| self.closure_pt[p] != self.closure_pt[q]))
    }

    pub fn is_t1(&self) -> bool {
        (0..self.n_points()).all(|p| self.closure_pt[p] == bits::bit(p))
    }

    /// Nonempty closed sets C with C ⊆ K1 ∪ K2 forcing C ⊆ K1 or C ⊆ K2,
    /// for all closed K1, K2.
    pub fn irreducible_closed_sets(&self) -> Vec<ClosedSet> {
        let closed = self.closed_sets();
        let mut out = Vec::new();
        for &c in &closed {
            if c == 0 {
                continue;
            }
            let irreducible = closed.iter().all(|&k1| {
                closed.iter().all(|&k2| {
                    !bits::is_subset(c, k1 | k2)
                        || bits::is_subset(c, k1)
                        || bits::is_subset(c, k2)
                })
            });
            if irreducible {
                out.push(ClosedSet { carrier: c });
            }
        }
        out.sort_unstable_by_key(|c| (c.carrier.count_ones(), c.carrier));
        out
    }

    /// Every irreducible closed set is the closure of exactly one point.
    pub fn is_sober(&self) -> Result<(), SoberWitness> {
        for c in self.irreducible_closed_sets() {
            let gens: Vec<usize> = (0..self.n_points())
                .filter(|&p| self.closure_pt[p] == c.carrier)
                .collect();
            match gens.len() {
                0 => return Err(SoberWitness::NotAClosure(c.carrier)),
                1 => {}
                _ => return Err(SoberWitness::DuplicatePoints(gens[0], gens[1])),
            }
        }
        Ok(())
    }

    /// Complements of irreducible closed sets, tagged with their unique
    /// generating point. Requires sobriety.
    pub fn prime_opens(&self) -> Result<Vec<PrimeOpen>, SoberWitness> {
        self.is_sober()?;
        let mut out: Vec<PrimeOpen> = self
            .irreducible_closed_sets()
            .into_iter()
            .map(|c| {
                let point = (0..self.n_points())
                    .find(|&p| self.closure_pt[p] == c.carrier)
                    .expect("sober space");
                PrimeOpen {
                    open: self.top() & !c.carrier,
                    point,
                }
            })
            .collect();
        out.sort_unstable_by_key(|p| (p.open.count_ones(), p.open));
        Ok(out)
    }

    /// Opens P below the top such that h ∩ k ⊆ P forces h ⊆ P or k ⊆ P.
    /// Test oracle for [`FiniteSpace::prime_opens`].
    pub fn lattice_prime_opens(&self) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .opens
            .iter()
            .copied()
            .filter(|&p| p != self.top())
            .filter(|&p| {
                self.opens.iter().all(|&h| {
                    self.opens.iter().all(|&k| {
                        !bits::is_subset(h & k, p) || bits::is_subset(h, p) || bits::is_subset(k, p)
                    })
                })
            })
            .collect();
        out.sort_unstable_by_key(|&m| (m.count_ones(), m));
        out
    }

    /// Fast decision: Y is a union of locally closed sets iff every
    /// y ∈ Y satisfies minimal_open(y) ∩ closure(y) ⊆ Y.
    pub fn is_union_of_locally_closed(&self, subset: u64) -> bool {
        bits::ones(subset).all(|y| bits::is_subset(self.min_open[y] & self.closure_pt[y], subset))
    }

    /// Brute-force oracle over all (open, closed) pairs; must agree with
    /// the fast path on every subset.
    pub fn is_union_of_locally_closed_bruteforce(&self, subset: u64) -> bool {
        let closed = self.closed_sets();
        bits::ones(subset).all(|y| {
            self.opens.iter().any(|&u| {
                closed.iter().any(|&c| {
                    let lc = u & c;
                    bits::contains(lc, y) && bits::is_subset(lc, subset)
                })
            })
        })
    }

    /// Render a point-set mask as sorted point names.
    pub fn set_names(&self, mask: u64) -> Vec<String> {
        bits::ones(mask).map(|p| self.points[p].clone()).collect()
    }
}
