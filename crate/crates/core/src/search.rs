//! Exhaustive enumeration of small unital involutive quantales up to
//! isomorphism, with a classification of each model by its axiom
//! profile (SG, SGF1–3, spatiality, lattice distributivity).
//!
//! Products are generated on join-irreducible pairs and extended by
//! distributivity, which is sound and complete: any quantale product is
//! recovered from its own join-irreducible values, and every extension
//! is checked against the axioms (the extension of an arbitrary
//! assignment may fail distributivity on non-distributive lattices).
//! Models are deduplicated by canonical relabeling, which is exact at
//! these sizes.

use crate::incidence::{check_spatial, Incidence};
use crate::quantale::{
    check_inverse_monoid, check_qe_frame, check_sg, check_sgf, is_lattice_distributive,
    partial_units, FiniteQuantale,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct ModelProfile {
    pub sg: bool,
    pub sgf1: bool,
    pub sgf2: bool,
    pub sgf3: bool,
    /// Spatiality verdicts are only evaluated on SGF models.
    pub spq1: Option<bool>,
    pub spq2: Option<bool>,
    pub distributive: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalModel {
    pub n: usize,
    /// Strict order pairs (i, j) of the canonical labeling.
    pub leq: Vec<(usize, usize)>,
    pub product: Vec<Vec<usize>>,
    pub involution: Vec<usize>,
    pub unit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub profile: ModelProfile,
    pub count: u64,
    pub smallest: CanonicalModel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchReport {
    pub max_size: usize,
    pub budget: u64,
    pub truncated: bool,
    pub candidates_examined: u64,
    /// Isomorphism classes of unital involutive quantales per carrier
    /// size.
    pub models_per_size: Vec<(usize, u64)>,
    pub profiles: Vec<ProfileRow>,
    /// Violations of the structural consequences expected of SG models
    /// (unit-downset frame, domain criterion for functional pairs,
    /// inverse monoid); expected empty.
    pub sg_model_violations: Vec<String>,
}

pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    fn heap(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, cur, out);
            if k % 2 == 0 {
                cur.swap(i, k - 1);
            } else {
                cur.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut cur, &mut out);
    out.sort_unstable();
    out
}

/// All lattices on `n` elements up to isomorphism, as full order
/// matrices indexed compatibly with a linear extension.
fn enumerate_lattices(n: usize) -> Vec<Vec<Vec<bool>>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let perms = permutations(n);
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for mask in 0u64..(1 << pairs.len()) {
        let mut le = vec![vec![false; n]; n];
        for i in 0..n {
            le[i][i] = true;
        }
        for (b, &(i, j)) in pairs.iter().enumerate() {
            if mask & (1 << b) != 0 {
                le[i][j] = true;
            }
        }
        let transitive = (0..n).all(|i| {
            (0..n).all(|j| {
                !le[i][j] || (0..n).all(|k| !le[j][k] || le[i][k])
            })
        });
        if !transitive {
            continue;
        }
        if !is_lattice(&le) {
            continue;
        }
        // Canonical form: least order matrix over all relabelings.
        let canon = perms
            .iter()
            .filter_map(|p| {
                let mut m = vec![false; n * n];
                for i in 0..n {
                    for j in 0..n {
                        m[p[i] * n + p[j]] = le[i][j];
                    }
                }
                Some(m)
            })
            .min()
            .unwrap();
        if seen.insert(canon) {
            out.push(le);
        }
    }
    out
}

fn is_lattice(le: &[Vec<bool>]) -> bool {
    let n = le.len();
    let bound = |a: usize, b: usize, upper: bool| -> Option<usize> {
        let ok = |x: usize| {
            if upper {
                le[a][x] && le[b][x]
            } else {
                le[x][a] && le[x][b]
            }
        };
        let candidates: Vec<usize> = (0..n).filter(|&x| ok(x)).collect();
        candidates
            .iter()
            .copied()
            .find(|&x| {
                candidates
                    .iter()
                    .all(|&y| if upper { le[x][y] } else { le[y][x] })
            })
    };
    (0..n).all(|a| (0..n).all(|b| bound(a, b, true).is_some() && bound(a, b, false).is_some()))
}

fn join_irreducibles(le: &[Vec<bool>]) -> Vec<usize> {
    let n = le.len();
    let bottom = (0..n).find(|&x| (0..n).all(|y| le[x][y])).unwrap();
    (0..n)
        .filter(|&x| x != bottom)
        .filter(|&x| {
            // Exactly one lower cover.
            let below: Vec<usize> = (0..n).filter(|&y| le[y][x] && y != x).collect();
            let covers: Vec<usize> = below
                .iter()
                .copied()
                .filter(|&y| {
                    below
                        .iter()
                        .all(|&z| z == y || !le[y][z])
                })
                .collect();
            covers.len() == 1
        })
        .collect()
}

/// Order automorphisms of period two: the candidate involutions.
fn order_involutions(le: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = le.len();
    permutations(n)
        .into_iter()
        .filter(|p| (0..n).all(|i| p[p[i]] == i))
        .filter(|p| (0..n).all(|i| (0..n).all(|j| le[i][j] == le[p[i]][p[j]])))
        .collect()
}

struct Candidate {
    n: usize,
    le: Vec<Vec<bool>>,
    join: Vec<Vec<usize>>,
    product: Vec<Vec<usize>>,
    star: Vec<usize>,
    unit: usize,
}

fn join_table(le: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = le.len();
    let mut join = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let ubs: Vec<usize> = (0..n).filter(|&x| le[a][x] && le[b][x]).collect();
            join[a][b] = ubs
                .iter()
                .copied()
                .find(|&x| ubs.iter().all(|&y| le[x][y]))
                .expect("lattice");
        }
    }
    join
}

/// Extend a join-irreducible assignment by distributivity and check
/// the quantale axioms. Returns the candidate when it is a canonical,
/// valid unital involutive quantale.
fn extend_and_check(
    le: &[Vec<bool>],
    join: &[Vec<usize>],
    ji: &[usize],
    assign: &[usize],
    star: &[usize],
) -> Option<Candidate> {
    let n = le.len();
    let bottom = (0..n).find(|&x| (0..n).all(|y| le[x][y])).unwrap();
    let mut product = vec![vec![bottom; n]; n];
    for a in 0..n {
        for b in 0..n {
            let mut acc = bottom;
            for (i, &p) in ji.iter().enumerate() {
                if !le[p][a] {
                    continue;
                }
                for (j, &q) in ji.iter().enumerate() {
                    if le[q][b] {
                        acc = join[acc][assign[i * ji.len() + j]];
                    }
                }
            }
            product[a][b] = acc;
        }
    }
    // Canonicity: the table must reproduce the assignment on
    // join-irreducible pairs, or it is a duplicate of another
    // assignment's extension.
    for (i, &p) in ji.iter().enumerate() {
        for (j, &q) in ji.iter().enumerate() {
            if product[p][q] != assign[i * ji.len() + j] {
                return None;
            }
        }
    }
    let unit = (0..n).find(|&e| (0..n).all(|a| product[e][a] == a && product[a][e] == a))?;
    for a in 0..n {
        for b in 0..n {
            if star[product[a][b]] != product[star[b]][star[a]] {
                return None;
            }
            for c in 0..n {
                if product[product[a][b]][c] != product[a][product[b][c]] {
                    return None;
                }
                let bc = join[b][c];
                if product[a][bc] != join[product[a][b]][product[a][c]]
                    || product[bc][a] != join[product[b][a]][product[c][a]]
                {
                    return None;
                }
            }
        }
    }
    Some(Candidate {
        n,
        le: le.to_vec(),
        join: join.to_vec(),
        product,
        star: star.to_vec(),
        unit,
    })
}

/// Least serialized relabeling of a model; equal canonical forms
/// characterize isomorphic models.
fn canonical_model(c: &Candidate) -> CanonicalModel {
    let n = c.n;
    let perms = permutations(n);
    let mut best: Option<(Vec<usize>, Vec<(usize, usize)>, Vec<Vec<usize>>, Vec<usize>, usize)> =
        None;
    for p in &perms {
        let mut leq = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && c.le[i][j] {
                    leq.push((p[i], p[j]));
                }
            }
        }
        leq.sort_unstable();
        let mut product = vec![vec![0; n]; n];
        let mut star = vec![0; n];
        for i in 0..n {
            star[p[i]] = p[c.star[i]];
            for j in 0..n {
                product[p[i]][p[j]] = p[c.product[i][j]];
            }
        }
        let unit = p[c.unit];
        let key: Vec<usize> = leq
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .chain(product.iter().flatten().copied())
            .chain(star.iter().copied())
            .chain([unit])
            .collect();
        if best.as_ref().map(|(k, ..)| key < *k).unwrap_or(true) {
            best = Some((key, leq, product, star, unit));
        }
    }
    let (_, leq, product, involution, unit) = best.unwrap();
    CanonicalModel {
        n,
        leq,
        product,
        involution,
        unit,
    }
}

fn classify(c: &Candidate) -> (ModelProfile, FiniteQuantale, Vec<String>) {
    let leq_pairs: Vec<(usize, usize)> = (0..c.n)
        .flat_map(|i| (0..c.n).filter(move |&j| i != j).map(move |j| (i, j)))
        .filter(|&(i, j)| c.le[i][j])
        .collect();
    let q = FiniteQuantale::from_tables(
        c.n,
        &leq_pairs,
        c.product.clone(),
        c.star.clone(),
        c.unit,
    )
    .expect("candidate passed the axiom checks");
    let sg = check_sg(&q).is_ok();
    let sgf = check_sgf(&q);
    let sgf_all = sgf.all();
    let (spq1, spq2) = if sgf_all {
        match Incidence::analyze(&q) {
            Ok(inc) => {
                let spatial = check_spatial(&q, &inc);
                (Some(spatial.spq1.is_none()), Some(spatial.spq2.is_none()))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    let profile = ModelProfile {
        sg,
        sgf1: sgf.sgf1.is_none(),
        sgf2: sgf.sgf2.is_none(),
        sgf3: sgf.sgf3.is_none(),
        spq1,
        spq2,
        distributive: is_lattice_distributive(&q).is_ok(),
    };
    let mut violations = Vec::new();
    if sg {
        if let Err(v) = check_qe_frame(&q) {
            violations.push(format!("unit downset not a frame: {v:?}"));
        }
        let fs = partial_units(&q).functionals;
        for &f in &fs {
            for &g in &fs {
                if q.leq(f, g) && ((f == g) != (q.dom(f) == q.dom(g))) {
                    violations.push(format!(
                        "domain criterion fails for functionals {f} ≤ {g}"
                    ));
                }
            }
        }
        if let Err(v) = check_inverse_monoid(&q) {
            violations.push(format!("partial units not an inverse monoid: {v:?}"));
        }
    }
    (profile, q, violations)
}

/// Enumerate and classify all models with at most `max_size` elements.
/// The budget caps the number of product assignments examined; when it
/// is exhausted the report is marked truncated.
pub fn search(max_size: usize, budget: u64, threads: usize) -> SearchReport {
    let mut tasks: Vec<(usize, Vec<Vec<bool>>, Vec<usize>)> = Vec::new();
    for n in 1..=max_size {
        for le in enumerate_lattices(n) {
            for sigma in order_involutions(&le) {
                tasks.push((n, le.clone(), sigma));
            }
        }
    }

    let examined = std::sync::atomic::AtomicU64::new(0);
    let truncated = std::sync::atomic::AtomicBool::new(false);
    let run_task = |(n, le, sigma): &(usize, Vec<Vec<bool>>, Vec<usize>)| -> Vec<CanonicalModel> {
        let n = *n;
        let join = join_table(le);
        let ji = join_irreducibles(le);
        let k = ji.len();
        let mut found = Vec::new();
        let mut assign = vec![0usize; k * k];
        loop {
            let seen = examined.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            if seen >= budget {
                truncated.store(true, std::sync::atomic::Ordering::Relaxed);
                break;
            }
            if let Some(c) = extend_and_check(le, &join, &ji, &assign, sigma) {
                found.push(canonical_model(&c));
            }
            let mut i = 0;
            loop {
                if i == assign.len() {
                    break;
                }
                assign[i] += 1;
                if assign[i] < n {
                    break;
                }
                assign[i] = 0;
                i += 1;
            }
            if i == assign.len() {
                break;
            }
        }
        found
    };

    let mut all_models: Vec<CanonicalModel> = if threads <= 1 {
        tasks.iter().flat_map(|t| run_task(t)).collect()
    } else {
        std::thread::scope(|scope| {
            let chunks: Vec<&[(usize, Vec<Vec<bool>>, Vec<usize>)]> =
                tasks.chunks(tasks.len().div_ceil(threads)).collect();
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| scope.spawn(move || chunk.iter().flat_map(run_task).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("search worker"))
                .collect()
        })
    };

    // Canonical forms make deduplication exact and deterministic.
    all_models.sort_unstable_by_key(|m| {
        (
            m.n,
            m.leq.clone(),
            m.product.clone(),
            m.involution.clone(),
            m.unit,
        )
    });
    all_models.dedup();

    let mut per_size: BTreeMap<usize, u64> = BTreeMap::new();
    let mut profiles: BTreeMap<ModelProfile, (u64, CanonicalModel)> = BTreeMap::new();
    let mut sg_model_violations = Vec::new();
    for m in &all_models {
        *per_size.entry(m.n).or_insert(0) += 1;
        let candidate = Candidate {
            n: m.n,
            le: {
                let mut le = vec![vec![false; m.n]; m.n];
                for i in 0..m.n {
                    le[i][i] = true;
                }
                for &(i, j) in &m.leq {
                    le[i][j] = true;
                }
                le
            },
            join: Vec::new(),
            product: m.product.clone(),
            star: m.involution.clone(),
            unit: m.unit,
        };
        let (profile, _q, violations) = classify(&candidate);
        for v in violations {
            sg_model_violations.push(format!("n={} model {:?}: {v}", m.n, m.leq));
        }
        let entry = profiles.entry(profile).or_insert_with(|| (0, m.clone()));
        entry.0 += 1;
        // Smallest representative: fewest elements, then canonical order.
        let better = (m.n, &m.leq, &m.product, &m.involution, m.unit)
            < (
                entry.1.n,
                &entry.1.leq,
                &entry.1.product,
                &entry.1.involution,
                entry.1.unit,
            );
        if better {
            entry.1 = m.clone();
        }
    }

    SearchReport {
        max_size,
        budget,
        truncated: truncated.load(std::sync::atomic::Ordering::Relaxed),
        candidates_examined: examined
            .load(std::sync::atomic::Ordering::Relaxed)
            .min(budget),
        models_per_size: per_size.into_iter().collect(),
        profiles: profiles
            .into_iter()
            .map(|(profile, (count, smallest))| ProfileRow {
                profile,
                count,
                smallest,
            })
            .collect(),
        sg_model_violations,
    }
}
