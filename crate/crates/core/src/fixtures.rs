//! Embedded end-to-end fixtures: two order-two actions on three-point
//! sober spaces, one giving a topological base and a distributive
//! quantale, the other not. Every golden fact is re-derived on each
//! run; any drift is reported as a mismatch.

use crate::gq::{self, DEFAULT_SIZE_BUDGET};
use crate::incidence::{self, EtaleOutcome, Incidence};
use crate::json::{ActionInput, InputError};
use crate::quantale::{
    check_inverse_quantal_frame, check_sg, check_sgf, is_lattice_distributive,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

const ETALE_JSON: &str = include_str!("../fixtures/etale.json");
const NON_ETALE_JSON: &str = include_str!("../fixtures/non_etale.json");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenFacts {
    pub sober: bool,
    pub t1: bool,
    pub prime_opens: Vec<Vec<String>>,
    pub base_size: usize,
    pub quantale_size: usize,
    pub qe_size: usize,
    pub prime_count: usize,
    pub incidence_classes: usize,
    pub reconstructed_units: usize,
    pub reconstructed_arrows: usize,
    pub sg: bool,
    pub sgf: bool,
    pub spq: bool,
    pub distributive: bool,
    pub inverse_quantal_frame: bool,
    pub topological_base: bool,
    pub etale_lemma: String,
    pub roundtrip_quantale_iso: bool,
    pub roundtrip_groupoid_iso: bool,
    /// For each point: whether the probe element's graph and the
    /// identity are incident at the prime of that point.
    pub probe_germ_equals_identity_at: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Fixture {
    pub id: String,
    pub name: String,
    pub action: ActionInput,
    pub base: String,
    pub probe_element: String,
    pub golden: GoldenFacts,
}

pub fn all_fixtures() -> Vec<Fixture> {
    vec![
        serde_json::from_str(ETALE_JSON).expect("embedded fixture"),
        serde_json::from_str(NON_ETALE_JSON).expect("embedded fixture"),
    ]
}

pub fn fixture(id: &str) -> Option<Fixture> {
    all_fixtures()
        .into_iter()
        .find(|f| f.id == id || f.name == id)
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("fixture pipeline failed: {0}")]
    Pipeline(String),
}

#[derive(Debug, Clone)]
pub struct FixtureOutcome {
    pub id: String,
    pub computed: GoldenFacts,
    /// Human-readable description of each drifted fact; empty on a
    /// clean run.
    pub mismatches: Vec<String>,
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Re-derive every golden fact of a fixture and diff against the
/// frozen values.
pub fn run_fixture(f: &Fixture) -> Result<FixtureOutcome, FixtureError> {
    let pipeline = |msg: &str| FixtureError::Pipeline(msg.to_string());

    let action = f.action.build()?;
    let space = action.space().clone();
    let groupoid = action
        .orbit_relation_groupoid()
        .map_err(InputError::Action)?;

    let sober = space.is_sober().is_ok();
    let t1 = space.is_t1();
    let prime_opens: Vec<Vec<String>> = space
        .prime_opens()
        .map_err(|w| pipeline(&format!("prime opens unavailable: {w:?}")))?
        .iter()
        .map(|p| space.set_names(p.open))
        .collect();

    if f.base != "canonical" {
        return Err(pipeline("only the canonical base selector is supported"));
    }
    let base = gq::canonical_base_from_action(&action, &groupoid, 1 << 16)
        .map_err(|e| pipeline(&e.to_string()))?;
    let gq = gq::build_gq(&groupoid, &base, DEFAULT_SIZE_BUDGET)
        .map_err(|e| pipeline(&e.to_string()))?;
    let q = &gq.quantale.quantale;

    let sg = check_sg(q).is_ok();
    let sgf = check_sgf(q).all();
    let inc = Incidence::analyze(q).map_err(|e| pipeline(&e.to_string()))?;
    let spatial = incidence::check_spatial(q, &inc);
    let recon =
        incidence::reconstruct_groupoid(q, &inc).map_err(|e| pipeline(&e.to_string()))?;

    let etale_lemma = match incidence::check_etale_lemma(q, &inc) {
        EtaleOutcome::Holds => "holds",
        EtaleOutcome::NotApplicable => "not-applicable",
        EtaleOutcome::Fails { .. } => "fails",
    }
    .to_string();

    let rt_quantale =
        incidence::quantale_roundtrip(q, DEFAULT_SIZE_BUDGET, 1 << 24).is_ok();
    let rt_groupoid =
        incidence::groupoid_roundtrip(&groupoid, &base, DEFAULT_SIZE_BUDGET, 1 << 24).is_ok();

    // Germ comparison of the probe element against the identity at
    // every point's prime.
    let probe_idx = action
        .elements()
        .iter()
        .position(|e| *e == f.probe_element)
        .ok_or_else(|| pipeline("probe element not in the group"))?;
    let probe_mask = (0..space.n_points())
        .map(|p| {
            groupoid
                .arrows_between(p, action.apply(probe_idx, p))
                .first()
                .copied()
                .map(|x| 1u64 << x)
                .ok_or_else(|| pipeline("probe graph leaves the groupoid"))
        })
        .collect::<Result<Vec<u64>, _>>()?
        .into_iter()
        .fold(0, |a, b| a | b);
    let probe_elem = gq
        .quantale
        .element_index(probe_mask)
        .ok_or_else(|| pipeline("probe graph is not a quantale element"))?;
    let mut probe_germs = BTreeMap::new();
    for p in 0..space.n_points() {
        let prime_mask =
            groupoid.unit_image(space.top() & !space.closure(p).carrier);
        let prime_elem = gq
            .quantale
            .element_index(prime_mask)
            .ok_or_else(|| pipeline("prime image is not a quantale element"))?;
        probe_germs.insert(
            space.points()[p].clone(),
            incidence::incident(q, prime_elem, probe_elem, q.unit()),
        );
    }

    let computed = GoldenFacts {
        sober,
        t1,
        prime_opens,
        base_size: base.len(),
        quantale_size: q.n(),
        qe_size: q.qe().len(),
        prime_count: inc.primes.len(),
        incidence_classes: inc.n_classes(),
        reconstructed_units: recon.space().n_points(),
        reconstructed_arrows: recon.n_arrows(),
        sg,
        sgf,
        spq: spatial.holds(),
        distributive: is_lattice_distributive(q).is_ok(),
        inverse_quantal_frame: check_inverse_quantal_frame(q).holds(),
        topological_base: gq::is_topological_base(&base).is_ok(),
        etale_lemma,
        roundtrip_quantale_iso: rt_quantale,
        roundtrip_groupoid_iso: rt_groupoid,
        probe_germ_equals_identity_at: probe_germs,
    };

    let mut mismatches = Vec::new();
    let expected = serde_json::to_value(&f.golden).expect("golden serializes");
    let got = serde_json::to_value(&computed).expect("computed serializes");
    if let (serde_json::Value::Object(e), serde_json::Value::Object(g)) = (&expected, &got) {
        for (key, ev) in e {
            let gv = &g[key];
            if ev != gv {
                mismatches.push(format!("{key}: expected {ev}, got {gv}"));
            }
        }
    }

    Ok(FixtureOutcome {
        id: f.id.clone(),
        computed,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_fixtures_parse() {
        let fs = all_fixtures();
        assert_eq!(fs.len(), 2);
        assert!(fixture("8.1").is_some());
        assert!(fixture("non-etale").is_some());
        assert!(fixture("9.9").is_none());
    }

    #[test]
    fn golden_facts_hold_end_to_end() {
        for f in all_fixtures() {
            let outcome = run_fixture(&f).unwrap();
            assert!(
                outcome.passed(),
                "fixture {} drifted: {:?}",
                f.id,
                outcome.mismatches
            );
        }
    }
}
