//! From a quantale back to a groupoid: primes of the unit downset, the
//! incidence relation on (prime, partial unit) pairs, transport of
//! primes along partial units, the reconstructed groupoid, spatiality,
//! the canonical embedding into the power set of incidence classes,
//! and both round-trip verifications.

use crate::bits;
use crate::gq::{self, BuildError, SbReport, SelectionBase};
use crate::groupoid::{FiniteGroupoid, GroupoidError};
use crate::iso::{self, Distinguisher, GroupoidIso, QuantaleIso};
use crate::quantale::{partial_units, FiniteQuantale};
use crate::topology::{FiniteSpace, SpaceError};
use thiserror::Error;

/// Primes of the unit downset: non-top elements p of Q_e with
/// h ∧ k ≤ p forcing h ≤ p or k ≤ p.
pub fn primes_of_qe(q: &FiniteQuantale) -> Vec<usize> {
    let qe = q.qe();
    let e = q.unit();
    qe.iter()
        .copied()
        .filter(|&p| p != e)
        .filter(|&p| {
            qe.iter().all(|&h| {
                qe.iter().all(|&k| {
                    !q.leq(q.meet2(h, k), p) || q.leq(h, p) || q.leq(k, p)
                })
            })
        })
        .collect()
}

/// All (prime, partial unit) pairs with d(f) ≰ p, ordered
/// lexicographically by element index.
pub fn incidence_pairs(q: &FiniteQuantale) -> Vec<(usize, usize)> {
    let primes = primes_of_qe(q);
    let pu = partial_units(q).partial_units;
    let mut pairs = Vec::new();
    for &p in &primes {
        for &f in &pu {
            if !q.leq(q.dom(f), p) {
                pairs.push((p, f));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// f and g are incident at p: some h ≤ d(f) ∧ d(g) in the unit downset
/// with h ≰ p and hf ≤ pf ∨ g. Decided by exhaustive search over the
/// unit downset.
pub fn incident(q: &FiniteQuantale, p: usize, f: usize, g: usize) -> bool {
    let bound = q.meet2(q.dom(f), q.dom(g));
    q.qe().into_iter().any(|h| {
        q.leq(h, bound)
            && !q.leq(h, p)
            && q.leq(q.product(h, f), q.join2(q.product(p, f), g))
    })
}

#[derive(Debug, Error)]
pub enum IncidenceError {
    #[error("incidence is not an equivalence at prime {p}: ({f}, {g}, {l})")]
    NotEquivalence { p: usize, f: usize, g: usize, l: usize },
    #[error("no transport prime for pair ({p}, {f})")]
    NoTransport { p: usize, f: usize },
    #[error("transport of pair ({p}, {f}) is not unique: {q1} and {q2}")]
    NonUniqueTransport { p: usize, f: usize, q1: usize, q2: usize },
    #[error("more than 64 incidence classes ({0})")]
    TooManyClasses(usize),
}

/// The unique prime q with r(f) ≰ q and pf = fq, found by scanning all
/// primes so that uniqueness doubles as a consistency check.
pub fn transport(q: &FiniteQuantale, p: usize, f: usize) -> Result<usize, IncidenceError> {
    let pf = q.product(p, f);
    let mut found = None;
    for cand in primes_of_qe(q) {
        if !q.leq(q.cod(f), cand) && pf == q.product(f, cand) {
            match found {
                None => found = Some(cand),
                Some(prev) => {
                    return Err(IncidenceError::NonUniqueTransport {
                        p,
                        f,
                        q1: prev,
                        q2: cand,
                    })
                }
            }
        }
    }
    found.ok_or(IncidenceError::NoTransport { p, f })
}

/// Join of the partial units g with d(g) ≤ p or g not incident to f at
/// p: the obstruction of the class of (p, f).
pub fn class_obstruction(q: &FiniteQuantale, p: usize, f: usize) -> usize {
    let pu = partial_units(q).partial_units;
    q.join_of(
        pu.into_iter()
            .filter(|&g| q.leq(q.dom(g), p) || !incident(q, p, g, f)),
    )
}

/// Precomputed incidence structure of a quantale.
#[derive(Debug, Clone)]
pub struct Incidence {
    pub primes: Vec<usize>,
    pub pairs: Vec<(usize, usize)>,
    /// Pair index → class index.
    pub class_of: Vec<usize>,
    /// Class index → member pair indices, ascending.
    pub classes: Vec<Vec<usize>>,
    /// Class index → lexicographically least member pair.
    pub reps: Vec<(usize, usize)>,
    /// Pair index → transported prime (element index).
    pub transport: Vec<usize>,
    /// Class index → obstruction element.
    pub obstruction: Vec<usize>,
}

impl Incidence {
    pub fn analyze(q: &FiniteQuantale) -> Result<Incidence, IncidenceError> {
        let primes = primes_of_qe(q);
        let pairs = incidence_pairs(q);
        let m = pairs.len();

        let mut adj = vec![Vec::new(); m];
        for i in 0..m {
            for j in 0..m {
                if i == j || pairs[i].0 != pairs[j].0 {
                    continue;
                }
                if incident(q, pairs[i].0, pairs[i].1, pairs[j].1) {
                    adj[i].push(j);
                }
            }
        }
        // Reflexivity, symmetry and transitivity are re-verified rather
        // than assumed; a failure signals a non-SGF input upstream.
        for i in 0..m {
            let (p, f) = pairs[i];
            if !incident(q, p, f, f) {
                return Err(IncidenceError::NotEquivalence { p, f, g: f, l: f });
            }
            for &j in &adj[i] {
                if !adj[j].contains(&i) {
                    return Err(IncidenceError::NotEquivalence {
                        p,
                        f,
                        g: pairs[j].1,
                        l: pairs[j].1,
                    });
                }
                for &k in &adj[j] {
                    if k != i && !adj[i].contains(&k) {
                        return Err(IncidenceError::NotEquivalence {
                            p,
                            f,
                            g: pairs[j].1,
                            l: pairs[k].1,
                        });
                    }
                }
            }
        }

        let mut class_of = vec![usize::MAX; m];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for i in 0..m {
            if class_of[i] != usize::MAX {
                continue;
            }
            let c = classes.len();
            let mut members = vec![i];
            class_of[i] = c;
            let mut stack = vec![i];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if class_of[y] == usize::MAX {
                        class_of[y] = c;
                        members.push(y);
                        stack.push(y);
                    }
                }
            }
            members.sort_unstable();
            classes.push(members);
        }
        if classes.len() > 64 {
            return Err(IncidenceError::TooManyClasses(classes.len()));
        }
        let reps: Vec<(usize, usize)> = classes.iter().map(|ms| pairs[ms[0]]).collect();

        let mut transports = Vec::with_capacity(m);
        for &(p, f) in &pairs {
            transports.push(transport(q, p, f)?);
        }
        let obstruction: Vec<usize> = reps
            .iter()
            .map(|&(p, f)| class_obstruction(q, p, f))
            .collect();

        Ok(Incidence {
            primes,
            pairs,
            class_of,
            classes,
            reps,
            transport: transports,
            obstruction,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn pair_index(&self, p: usize, f: usize) -> Option<usize> {
        self.pairs.binary_search(&(p, f)).ok()
    }

    /// Position of a prime element in the prime list.
    pub fn prime_position(&self, p: usize) -> Option<usize> {
        self.primes.iter().position(|&x| x == p)
    }
}

/// The set of classes whose obstruction does not dominate `a`,
/// as a mask over class indices.
pub fn alpha(q: &FiniteQuantale, inc: &Incidence, a: usize) -> u64 {
    inc.obstruction
        .iter()
        .enumerate()
        .filter(|&(_, &i)| !q.leq(a, i))
        .fold(0, |acc, (c, _)| acc | bits::bit(c))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpatialReport {
    /// Pair (p, f) with f ≤ its own class obstruction.
    pub spq1: Option<(usize, usize)>,
    /// Element that is not the meet of the obstructions above it.
    pub spq2: Option<usize>,
    /// Elements whose obstruction index set is empty (their meet is the
    /// top by convention); flagged rather than silently passed.
    pub empty_meet: Vec<usize>,
}

impl SpatialReport {
    pub fn holds(&self) -> bool {
        self.spq1.is_none() && self.spq2.is_none()
    }
}

pub fn check_spatial(q: &FiniteQuantale, inc: &Incidence) -> SpatialReport {
    let mut report = SpatialReport::default();
    for (i, &(p, f)) in inc.pairs.iter().enumerate() {
        let obs = inc.obstruction[inc.class_of[i]];
        if q.leq(f, obs) {
            report.spq1 = Some((p, f));
            break;
        }
    }
    for a in 0..q.n() {
        let uppers: Vec<usize> = inc
            .obstruction
            .iter()
            .copied()
            .filter(|&i| q.leq(a, i))
            .collect();
        if uppers.is_empty() {
            report.empty_meet.push(a);
        }
        if q.meet_of(uppers) != a {
            report.spq2 = Some(a);
            break;
        }
    }
    report
}

#[derive(Debug, Error)]
pub enum ReconstructError {
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error("reconstructed point topology invalid: {0}")]
    Space(#[from] SpaceError),
    #[error("reconstructed structure fails the groupoid axioms: {0}")]
    Groupoid(#[from] GroupoidError),
    #[error("missing incidence class for pair ({0}, {1})")]
    MissingClass(usize, usize),
}

/// The groupoid of a quantale: points are primes with the spatial
/// topology of the unit downset, arrows are incidence classes.
pub fn reconstruct_groupoid(
    q: &FiniteQuantale,
    inc: &Incidence,
) -> Result<FiniteGroupoid, ReconstructError> {
    let n_pts = inc.primes.len();
    let names: Vec<String> = (0..n_pts).map(|i| format!("q{i}")).collect();
    let mut opens: Vec<u64> = q
        .qe()
        .iter()
        .map(|&h| {
            inc.primes
                .iter()
                .enumerate()
                .filter(|&(_, &p)| !q.leq(h, p))
                .fold(0u64, |acc, (i, _)| acc | bits::bit(i))
        })
        .collect();
    opens.sort_unstable();
    opens.dedup();
    let space = FiniteSpace::validate(names, &opens)?;

    let class_of_pair = |p: usize, f: usize| -> Result<usize, ReconstructError> {
        inc.pair_index(p, f)
            .map(|i| inc.class_of[i])
            .ok_or(ReconstructError::MissingClass(p, f))
    };

    let k = inc.n_classes();
    let labels: Vec<String> = inc
        .reps
        .iter()
        .map(|&(p, f)| {
            let pi = inc.prime_position(p).expect("rep prime");
            format!("[q{pi};{f}]")
        })
        .collect();
    let mut d = Vec::with_capacity(k);
    let mut r = Vec::with_capacity(k);
    for (c, &(p, _)) in inc.reps.iter().enumerate() {
        let pair_idx = inc.classes[c][0];
        d.push(inc.prime_position(p).expect("prime position"));
        r.push(
            inc.prime_position(inc.transport[pair_idx])
                .expect("transported prime position"),
        );
    }
    let mut u = Vec::with_capacity(n_pts);
    for (i, &p) in inc.primes.iter().enumerate() {
        let c = class_of_pair(p, q.unit())?;
        debug_assert_eq!(d[c], i);
        u.push(c);
    }
    let mut prod: Vec<Vec<Option<usize>>> = vec![vec![None; k]; k];
    for (x, &(p, f)) in inc.reps.iter().enumerate() {
        for (y, &(py, g)) in inc.reps.iter().enumerate() {
            if r[x] != d[y] {
                continue;
            }
            debug_assert_eq!(inc.prime_position(py), Some(r[x]));
            let _ = py;
            prod[x][y] = Some(class_of_pair(p, q.product(f, g))?);
        }
    }
    let mut inv = Vec::with_capacity(k);
    for (x, &(p, f)) in inc.reps.iter().enumerate() {
        let pair_idx = inc.classes[x][0];
        let _ = p;
        inv.push(class_of_pair(inc.transport[pair_idx], q.star(f))?);
    }

    Ok(FiniteGroupoid::validate(
        space, labels, d, r, u, prod, inv,
    )?)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AlphaReport {
    /// (a, b) with α(a ∨ b) ≠ α(a) ∪ α(b), or (bottom, bottom) when
    /// α(0) ≠ ∅.
    pub join_preserving: Option<(usize, usize)>,
    /// (a, b) violating α(a) ⊆ α(b) ⟺ a ≤ b.
    pub embedding: Option<(usize, usize)>,
    /// (a, b) with α(ab) ≠ α(a)·α(b) in the reconstructed groupoid.
    pub multiplicative: Option<(usize, usize)>,
    /// a with α(a*) ≠ α(a)*.
    pub involutive: Option<usize>,
    /// α(1) ≠ all classes or α(e) ≠ unit classes.
    pub strong_unital: bool,
}

impl AlphaReport {
    pub fn holds(&self) -> bool {
        self.join_preserving.is_none()
            && self.embedding.is_none()
            && self.multiplicative.is_none()
            && self.involutive.is_none()
            && self.strong_unital
    }
}

/// The five clauses of the embedding theorem for the canonical map.
pub fn check_alpha_theorem(
    q: &FiniteQuantale,
    inc: &Incidence,
    recon: &FiniteGroupoid,
) -> AlphaReport {
    let alpha_tab: Vec<u64> = (0..q.n()).map(|a| alpha(q, inc, a)).collect();
    let mut report = AlphaReport {
        strong_unital: true,
        ..Default::default()
    };

    if alpha_tab[q.bottom()] != 0 {
        report.join_preserving = Some((q.bottom(), q.bottom()));
    } else {
        'joins: for a in 0..q.n() {
            for b in 0..q.n() {
                if alpha_tab[q.join2(a, b)] != alpha_tab[a] | alpha_tab[b] {
                    report.join_preserving = Some((a, b));
                    break 'joins;
                }
            }
        }
    }
    if report.join_preserving.is_none() {
        // Generator decomposition: α(a) is the union over partial units
        // below a.
        let pu = partial_units(q).partial_units;
        for a in 0..q.n() {
            let union = pu
                .iter()
                .copied()
                .filter(|&f| q.leq(f, a))
                .fold(0u64, |acc, f| acc | alpha_tab[f]);
            if union != alpha_tab[a] {
                report.join_preserving = Some((a, a));
                break;
            }
        }
    }

    'embed: for a in 0..q.n() {
        for b in 0..q.n() {
            if bits::is_subset(alpha_tab[a], alpha_tab[b]) != q.leq(a, b) {
                report.embedding = Some((a, b));
                break 'embed;
            }
        }
    }

    'mult: for a in 0..q.n() {
        for b in 0..q.n() {
            if alpha_tab[q.product(a, b)] != recon.lift_product(alpha_tab[a], alpha_tab[b]) {
                report.multiplicative = Some((a, b));
                break 'mult;
            }
        }
    }

    for a in 0..q.n() {
        if alpha_tab[q.star(a)] != recon.lift_involution(alpha_tab[a]) {
            report.involutive = Some(a);
            break;
        }
    }

    if alpha_tab[q.top()] != recon.all_arrows() || alpha_tab[q.unit()] != recon.unit_arrows() {
        report.strong_unital = false;
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EtaleOutcome {
    /// The quantale is not an inverse quantal frame; the germ
    /// comparison does not apply.
    NotApplicable,
    Holds,
    /// Incident pair with no k ≤ d(f) ∧ d(g), k ≰ p, kf = kg.
    Fails { p: usize, f: usize, g: usize },
}

/// In an inverse quantal frame, incident partial units agree on a
/// neighborhood not below the prime.
pub fn check_etale_lemma(q: &FiniteQuantale, inc: &Incidence) -> EtaleOutcome {
    if !crate::quantale::check_inverse_quantal_frame(q).holds() {
        return EtaleOutcome::NotApplicable;
    }
    let qe = q.qe();
    for (i, &(p, f)) in inc.pairs.iter().enumerate() {
        for &j in &inc.classes[inc.class_of[i]] {
            let (_, g) = inc.pairs[j];
            let bound = q.meet2(q.dom(f), q.dom(g));
            let found = qe.iter().any(|&k| {
                q.leq(k, bound)
                    && !q.leq(k, p)
                    && q.product(k, f) == q.product(k, g)
            });
            if !found {
                return EtaleOutcome::Fails { p, f, g };
            }
        }
    }
    EtaleOutcome::Holds
}

/// Battery of structural laws for the incidence machinery, checked
/// exhaustively; used by the regression suites.
pub fn check_incidence_laws(q: &FiniteQuantale, inc: &Incidence) -> Result<(), String> {
    let pu = partial_units(q).partial_units;
    let qe = q.qe();
    let err = |msg: String| -> Result<(), String> { Err(msg) };

    for (i, &(p, f)) in inc.pairs.iter().enumerate() {
        let fp = inc.transport[i];
        // Transport fixes the unit.
        if f == q.unit() && fp != p {
            return err(format!("transport of ({p}, e) is {fp}, not {p}"));
        }
        for &h in &qe {
            if !q.leq(h, p) {
                let hf = crate::quantale::conjugate(q, h, f).map_err(|e| e.to_string())?;
                if q.leq(hf, fp) {
                    return err(format!("conjugate of {h} along {f} fell below {fp}"));
                }
                let hf_elem = q.product(h, f);
                if q.leq(q.dom(hf_elem), p) || q.leq(q.cod(hf_elem), fp) {
                    return err(format!(
                        "restriction {h}·{f} lost its boundaries at pair ({p}, {f})"
                    ));
                }
            }
        }
        // The inverse pair exists and transports back.
        let fs = q.star(f);
        let back = inc
            .pair_index(fp, fs)
            .ok_or_else(|| format!("({fp}, {fs}) is not an incidence pair"))?;
        if inc.transport[back] != p {
            return err(format!("transport along {fs} does not return to {p}"));
        }
        // d(f) and r(f) are incident to the unit at p and f[p].
        let i_dom = inc
            .pair_index(p, q.dom(f))
            .ok_or_else(|| format!("({p}, d({f})) is not an incidence pair"))?;
        let i_unit = inc
            .pair_index(p, q.unit())
            .ok_or_else(|| format!("({p}, e) is not an incidence pair"))?;
        if inc.class_of[i_dom] != inc.class_of[i_unit] {
            return err(format!("d({f}) is not incident to e at {p}"));
        }
        let j_cod = inc
            .pair_index(fp, q.cod(f))
            .ok_or_else(|| format!("({fp}, r({f})) is not an incidence pair"))?;
        let j_unit = inc
            .pair_index(fp, q.unit())
            .ok_or_else(|| format!("({fp}, e) is not an incidence pair"))?;
        if inc.class_of[j_cod] != inc.class_of[j_unit] {
            return err(format!("r({f}) is not incident to e at {fp}"));
        }
    }

    // Transport is constant on classes, and composable transports
    // compose.
    for (c, members) in inc.classes.iter().enumerate() {
        let t0 = inc.transport[members[0]];
        if members.iter().any(|&i| inc.transport[i] != t0) {
            return err(format!("transport not constant on class {c}"));
        }
    }
    for &(p, f) in &inc.pairs {
        let i = inc.pair_index(p, f).unwrap();
        let fp = inc.transport[i];
        for &g in &pu {
            if let Some(j) = inc.pair_index(fp, g) {
                let fg = q.product(f, g);
                let ij = inc
                    .pair_index(p, fg)
                    .ok_or_else(|| format!("({p}, {f}·{g}) is not an incidence pair"))?;
                if inc.transport[ij] != inc.transport[j] {
                    return err(format!(
                        "transport of composite {f}·{g} at {p} disagrees"
                    ));
                }
            }
        }
    }

    // Compatibility of the incidence relation with product and
    // involution, and upward closure in the second coordinate.
    for &(p, f) in &inc.pairs {
        let i = inc.pair_index(p, f).unwrap();
        let fp = inc.transport[i];
        for &g in &pu {
            let Some(j) = inc.pair_index(p, g) else { continue };
            let same = inc.class_of[i] == inc.class_of[j];
            if same {
                for &f2 in &pu {
                    let Some(i2) = inc.pair_index(fp, f2) else { continue };
                    for &g2 in &pu {
                        let Some(j2) = inc.pair_index(fp, g2) else { continue };
                        if inc.class_of[i2] == inc.class_of[j2] {
                            let lhs = inc.pair_index(p, q.product(f, f2));
                            let rhs = inc.pair_index(p, q.product(g, g2));
                            match (lhs, rhs) {
                                (Some(x), Some(y)) => {
                                    if inc.class_of[x] != inc.class_of[y] {
                                        return err(format!(
                                            "products {f}·{f2} and {g}·{g2} split at {p}"
                                        ));
                                    }
                                }
                                _ => {
                                    return err(format!(
                                        "products of incident pairs at {p} lost incidence pairs"
                                    ))
                                }
                            }
                        }
                    }
                }
            }
            let stars_same = match (
                inc.pair_index(fp, q.star(f)),
                inc.pair_index(fp, q.star(g)),
            ) {
                (Some(x), Some(y)) => Some(inc.class_of[x] == inc.class_of[y]),
                _ => None,
            };
            if same {
                if stars_same != Some(true) {
                    return err(format!("involutions of {f} ~ {g} at {p} not incident"));
                }
            }
            // Upward closure in the second coordinate.
            if same {
                for g2 in 0..q.n() {
                    if q.leq(g, g2) && pu.contains(&g2) {
                        let k = inc
                            .pair_index(p, g2)
                            .ok_or_else(|| format!("({p}, {g2}) missing above {g}"))?;
                        if inc.class_of[k] != inc.class_of[i] {
                            return err(format!(
                                "incidence at {p} not upward closed: {f} ~ {g} ≤ {g2}"
                            ));
                        }
                    }
                }
            }
        }
    }

    // Membership below an obstruction is exactly non-incidence.
    let spatial = check_spatial(q, inc);
    if spatial.spq1.is_none() {
        for (c, &(p, f)) in inc.reps.iter().enumerate() {
            for &g in &pu {
                let lhs = q.leq(g, inc.obstruction[c]);
                let rhs = q.leq(q.dom(g), p) || !incident(q, p, g, f);
                if lhs != rhs {
                    return err(format!(
                        "obstruction membership of {g} at class of ({p}, {f}) mismatched"
                    ));
                }
            }
        }
    }

    // Unit downset spatiality: every h ≤ e is the meet of the primes
    // above it.
    if spatial.holds() {
        for &h in &qe {
            let above: Vec<usize> = inc
                .primes
                .iter()
                .copied()
                .filter(|&p| q.leq(h, p))
                .collect();
            let m = q.meet_of(above.into_iter());
            let expected = q.meet2(m, q.unit());
            if expected != h {
                return err(format!("unit-downset element {h} is not a meet of primes"));
            }
        }
    }

    // The canonical image of a partial unit is its pair set, and is
    // monotone.
    let alpha_tab: Vec<u64> = (0..q.n()).map(|a| alpha(q, inc, a)).collect();
    if spatial.spq1.is_none() {
        for &f in &pu {
            let expected: u64 = inc
                .pairs
                .iter()
                .enumerate()
                .filter(|&(_, &(_, g))| g == f)
                .fold(0, |acc, (i, _)| acc | bits::bit(inc.class_of[i]));
            if alpha_tab[f] != expected {
                return err(format!("canonical image of partial unit {f} mismatched"));
            }
        }
    }
    for &f in &pu {
        for &g in &pu {
            if q.leq(f, g) && !bits::is_subset(alpha_tab[f], alpha_tab[g]) {
                return err(format!("canonical map not monotone on {f} ≤ {g}"));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum RoundtripError {
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error("canonical image of the partial units is not a selection base: {0}")]
    BaseInvalid(#[from] SbReport),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("round trip produced a non-isomorphic quantale: {0:?}")]
    QuantaleNotIsomorphic(Distinguisher),
    #[error("round trip produced a non-isomorphic groupoid: {0:?}")]
    GroupoidNotIsomorphic(Distinguisher),
    #[error("isomorphism search budget exceeded")]
    IsoBudget,
}

/// Quantale-side round trip: reconstruct the groupoid, take the
/// canonical images of the partial units as a base, rebuild, and
/// certify the isomorphism back to the input.
pub fn quantale_roundtrip(
    q: &FiniteQuantale,
    size_budget: usize,
    iso_budget: u64,
) -> Result<QuantaleIso, RoundtripError> {
    let inc = Incidence::analyze(q)?;
    let recon = reconstruct_groupoid(q, &inc)?;
    let pu = partial_units(q).partial_units;
    let family: Vec<u64> = pu.iter().map(|&f| alpha(q, &inc, f)).collect();
    let base = gq::validate_selection_base(&recon, &family)?;
    let rebuilt = gq::build_gq(&recon, &base, size_budget)?;
    match iso::quantale_isomorphic(&rebuilt.quantale.quantale, q, iso_budget) {
        iso::SearchOutcome::Found(cert) => Ok(cert),
        iso::SearchOutcome::NotIsomorphic(d) => Err(RoundtripError::QuantaleNotIsomorphic(d)),
        iso::SearchOutcome::Budget => Err(RoundtripError::IsoBudget),
    }
}

/// Groupoid-side round trip: build the quantale of the pair, reconstruct
/// its groupoid, and certify the isomorphism (with a homeomorphism on
/// units) back to the input.
pub fn groupoid_roundtrip(
    g: &FiniteGroupoid,
    base: &SelectionBase,
    size_budget: usize,
    iso_budget: u64,
) -> Result<GroupoidIso, RoundtripError> {
    let gq = gq::build_gq(g, base, size_budget)?;
    let q = &gq.quantale.quantale;
    let inc = Incidence::analyze(q)?;
    let recon = reconstruct_groupoid(q, &inc)?;
    match iso::groupoid_isomorphic(g, &recon, iso_budget) {
        iso::SearchOutcome::Found(cert) => Ok(cert),
        iso::SearchOutcome::NotIsomorphic(d) => Err(RoundtripError::GroupoidNotIsomorphic(d)),
        iso::SearchOutcome::Budget => Err(RoundtripError::IsoBudget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gq::{build_gq, validate_selection_base, DEFAULT_SIZE_BUDGET};
    use crate::groupoid::fixtures::*;
    use crate::quantale::SubsetQuantale;

    fn gq_fixture(which: u8) -> crate::gq::GroupoidQuantale {
        let g = if which == 1 { groupoid_81() } else { groupoid_82() };
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        build_gq(&g, &base, DEFAULT_SIZE_BUDGET).unwrap()
    }

    #[test]
    fn primes_of_fixture_quantales() {
        for which in [1, 2] {
            let gq = gq_fixture(which);
            let q = &gq.quantale.quantale;
            let primes = primes_of_qe(q);
            assert_eq!(primes.len(), 3);
            let masks: Vec<u64> = primes.iter().map(|&i| gq.quantale.mask(i)).collect();
            let g = &gq.groupoid;
            let expected: Vec<u64> = (0..3)
                .map(|p| g.unit_image(g.space().top() & !g.space().closure(p).carrier))
                .collect();
            for m in expected {
                assert!(masks.contains(&m));
            }
        }
    }

    #[test]
    fn two_chain_prime_is_bottom() {
        let q = crate::quantale::FiniteQuantale::from_tables(
            2,
            &[(0, 1)],
            vec![vec![0, 0], vec![0, 1]],
            vec![0, 1],
            1,
        )
        .unwrap();
        assert_eq!(primes_of_qe(&q), vec![0]);
    }

    #[test]
    fn incidence_cases_from_non_etale_fixture() {
        let gq = gq_fixture(2);
        let q = &gq.quantale.quantale;
        let g = &gq.groupoid;
        let phi = gq
            .quantale
            .element_index(phi_graph(g, &["p0", "p1", "p2"]))
            .unwrap();
        let delta = q.unit();
        // Primes: u[{p1,p2}] (at p0), u[{p2}] (at p1), u[{p1}] (at p2).
        let p0 = gq
            .quantale
            .element_index(g.unit_image(0b110))
            .unwrap();
        let p1 = gq.quantale.element_index(g.unit_image(0b100)).unwrap();
        assert!(primes_of_qe(q).contains(&p0));
        assert!(primes_of_qe(q).contains(&p1));
        // The swap graph and the identity share a germ at p0 but not at p1.
        assert!(incident(q, p0, phi, delta));
        assert!(!incident(q, p1, phi, delta));
        // Reflexivity.
        for &(p, f) in &incidence_pairs(q) {
            assert!(incident(q, p, f, f));
        }
    }

    #[test]
    fn transport_moves_primes_along_the_swap() {
        let gq = gq_fixture(2);
        let q = &gq.quantale.quantale;
        let g = &gq.groupoid;
        let phi = gq
            .quantale
            .element_index(phi_graph(g, &["p0", "p1", "p2"]))
            .unwrap();
        let p1 = gq.quantale.element_index(g.unit_image(0b100)).unwrap();
        let p2 = gq.quantale.element_index(g.unit_image(0b010)).unwrap();
        assert_eq!(transport(q, p1, phi).unwrap(), p2);
        // Unit transports are trivial, and transport is involutive.
        for &(p, f) in &incidence_pairs(q) {
            if f == q.unit() {
                assert_eq!(transport(q, p, f).unwrap(), p);
            }
            let fp = transport(q, p, f).unwrap();
            assert_eq!(transport(q, fp, q.star(f)).unwrap(), p);
        }
    }

    #[test]
    fn fixture_quantales_have_five_classes_and_are_spatial() {
        for which in [1, 2] {
            let gq = gq_fixture(which);
            let q = &gq.quantale.quantale;
            let inc = Incidence::analyze(q).unwrap();
            assert_eq!(inc.n_classes(), 5);
            let spatial = check_spatial(q, &inc);
            assert!(spatial.holds(), "{spatial:?}");
            check_incidence_laws(q, &inc).unwrap();
        }
    }

    #[test]
    fn frame_quantale_classes_are_units_only() {
        let q = crate::quantale::FiniteQuantale::from_frame(&space_82());
        let inc = Incidence::analyze(&q).unwrap();
        assert_eq!(inc.n_classes(), inc.primes.len());
        let spatial = check_spatial(&q, &inc);
        assert!(spatial.holds());
        let recon = reconstruct_groupoid(&q, &inc).unwrap();
        assert_eq!(recon.n_arrows(), recon.space().n_points());
        assert_eq!(recon.unit_arrows(), recon.all_arrows());
    }

    #[test]
    fn obstruction_dominates_prime_and_respects_class() {
        let gq = gq_fixture(2);
        let q = &gq.quantale.quantale;
        let inc = Incidence::analyze(q).unwrap();
        for (i, &(p, f)) in inc.pairs.iter().enumerate() {
            let obs = class_obstruction(q, p, f);
            assert!(q.leq(p, obs));
            assert_eq!(obs, inc.obstruction[inc.class_of[i]]);
        }
        // The swap graph escapes its obstruction at p1 (an instance of
        // the first spatiality axiom).
        let g = &gq.groupoid;
        let phi = gq
            .quantale
            .element_index(phi_graph(g, &["p0", "p1", "p2"]))
            .unwrap();
        let p1 = gq.quantale.element_index(g.unit_image(0b100)).unwrap();
        assert!(!q.leq(phi, class_obstruction(q, p1, phi)));
    }

    #[test]
    fn reconstructed_fixture_groupoids_have_three_units_five_arrows() {
        for which in [1, 2] {
            let gq = gq_fixture(which);
            let q = &gq.quantale.quantale;
            let inc = Incidence::analyze(q).unwrap();
            let recon = reconstruct_groupoid(q, &inc).unwrap();
            assert_eq!(recon.space().n_points(), 3);
            assert_eq!(recon.n_arrows(), 5);
            assert!(recon.check_axioms().is_empty());
        }
    }

    #[test]
    fn alpha_of_bounds_and_swap() {
        let gq = gq_fixture(2);
        let q = &gq.quantale.quantale;
        let inc = Incidence::analyze(q).unwrap();
        let recon = reconstruct_groupoid(q, &inc).unwrap();
        assert_eq!(alpha(q, &inc, q.bottom()), 0);
        assert_eq!(alpha(q, &inc, q.top()), recon.all_arrows());
        assert_eq!(alpha(q, &inc, q.unit()), recon.unit_arrows());
        let g = &gq.groupoid;
        let phi = gq
            .quantale
            .element_index(phi_graph(g, &["p0", "p1", "p2"]))
            .unwrap();
        assert_eq!(alpha(q, &inc, phi).count_ones(), 3);
    }

    #[test]
    fn alpha_theorem_holds_on_fixtures_and_frames() {
        for which in [1, 2] {
            let gq = gq_fixture(which);
            let q = &gq.quantale.quantale;
            let inc = Incidence::analyze(q).unwrap();
            let recon = reconstruct_groupoid(q, &inc).unwrap();
            let report = check_alpha_theorem(q, &inc, &recon);
            assert!(report.holds(), "{report:?}");
        }
        let q = crate::quantale::FiniteQuantale::from_frame(&space_81());
        let inc = Incidence::analyze(&q).unwrap();
        let recon = reconstruct_groupoid(&q, &inc).unwrap();
        assert!(check_alpha_theorem(&q, &inc, &recon).holds());
    }

    #[test]
    fn etale_lemma_applies_only_to_the_distributive_fixture() {
        let gq1 = gq_fixture(1);
        let q1 = &gq1.quantale.quantale;
        let inc1 = Incidence::analyze(q1).unwrap();
        assert_eq!(check_etale_lemma(q1, &inc1), EtaleOutcome::Holds);

        let gq2 = gq_fixture(2);
        let q2 = &gq2.quantale.quantale;
        let inc2 = Incidence::analyze(q2).unwrap();
        assert_eq!(check_etale_lemma(q2, &inc2), EtaleOutcome::NotApplicable);
    }

    #[test]
    fn spq_holds_for_power_set_and_fails_nowhere_on_fixtures() {
        let g = groupoid_81();
        let sq = SubsetQuantale::full_power_set(&g);
        let inc = Incidence::analyze(&sq.quantale).unwrap();
        let spatial = check_spatial(&sq.quantale, &inc);
        assert!(spatial.holds(), "{spatial:?}");
    }

    #[test]
    fn both_roundtrips_certify_on_fixtures() {
        for which in [1, 2] {
            let gq = gq_fixture(which);
            let cert = quantale_roundtrip(&gq.quantale.quantale, DEFAULT_SIZE_BUDGET, 1 << 24)
                .unwrap();
            assert_eq!(cert.map.len(), gq.quantale.quantale.n());
            let cert =
                groupoid_roundtrip(&gq.groupoid, &gq.base, DEFAULT_SIZE_BUDGET, 1 << 24).unwrap();
            assert!(crate::iso::verify_groupoid_iso(
                &gq.groupoid,
                &reconstruct_groupoid(
                    &gq.quantale.quantale,
                    &Incidence::analyze(&gq.quantale.quantale).unwrap()
                )
                .unwrap(),
                &cert
            ));
        }
    }

    #[test]
    fn unit_space_groupoid_roundtrips_to_itself() {
        let g = FiniteGroupoid::unit_groupoid(space_81());
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        groupoid_roundtrip(&g, &base, DEFAULT_SIZE_BUDGET, 1 << 24).unwrap();
    }

    #[test]
    fn one_element_quantale_is_vacuously_spatial() {
        let q = crate::quantale::FiniteQuantale::from_tables(
            1,
            &[],
            vec![vec![0]],
            vec![0],
            0,
        )
        .unwrap();
        let inc = Incidence::analyze(&q).unwrap();
        assert_eq!(inc.pairs.len(), 0);
        let spatial = check_spatial(&q, &inc);
        assert!(spatial.holds());
        assert_eq!(spatial.empty_meet, vec![0]);
    }
}
