//! Serde schemas for the file formats accepted on the command line.
//!
//! Point, arrow and group-element names are opaque strings; order of
//! the listed opens and relation pairs is irrelevant on input and
//! canonicalized on load.

use crate::gq::{self, SelectionBase};
use crate::groupoid::{ActionError, FiniteGroupoid, GroupAction, RelationError};
use crate::quantale::{FiniteQuantale, QuantaleError};
use crate::topology::{FiniteSpace, SpaceError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("unknown group element {0:?}")]
    UnknownElement(String),
    #[error("unknown arrow {0:?}")]
    UnknownArrow(String),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Relation(#[from] RelationError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    Base(#[from] gq::SbReport),
    #[error(transparent)]
    BaseBuild(#[from] gq::BaseError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceInput {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

impl SpaceInput {
    pub fn build(&self) -> Result<FiniteSpace, InputError> {
        let mut masks = Vec::with_capacity(self.opens.len());
        for open in &self.opens {
            let mut m = 0u64;
            for name in open {
                let i = self
                    .points
                    .iter()
                    .position(|p| p == name)
                    .ok_or_else(|| InputError::UnknownPoint(name.clone()))?;
                m |= 1 << i;
            }
            masks.push(m);
        }
        Ok(FiniteSpace::validate(self.points.clone(), &masks)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RelationInput {
    pub space: SpaceInput,
    pub relation: Vec<(String, String)>,
}

impl RelationInput {
    pub fn build(&self) -> Result<FiniteGroupoid, InputError> {
        let space = self.space.build()?;
        let mut pairs = Vec::with_capacity(self.relation.len());
        for (a, b) in &self.relation {
            let i = space
                .point_index(a)
                .ok_or_else(|| InputError::UnknownPoint(a.clone()))?;
            let j = space
                .point_index(b)
                .ok_or_else(|| InputError::UnknownPoint(b.clone()))?;
            pairs.push((i, j));
        }
        Ok(FiniteGroupoid::from_equivalence_relation(space, &pairs)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupInput {
    pub elements: Vec<String>,
    /// Multiplication table by element name: mult[i][j] = elements[i] * elements[j].
    pub mult: Vec<Vec<String>>,
    pub identity: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ActionInput {
    pub space: SpaceInput,
    pub group: GroupInput,
    /// Per-element point maps; the identity may be omitted.
    pub action: BTreeMap<String, BTreeMap<String, String>>,
}

impl ActionInput {
    pub fn build(&self) -> Result<GroupAction, InputError> {
        let space = self.space.build()?;
        let elements = self.group.elements.clone();
        let elem_index = |name: &str| -> Result<usize, InputError> {
            elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| InputError::UnknownElement(name.to_string()))
        };
        let identity = elem_index(&self.group.identity)?;
        let mut mult = Vec::with_capacity(elements.len());
        for row in &self.group.mult {
            let mut r = Vec::with_capacity(row.len());
            for name in row {
                r.push(elem_index(name)?);
            }
            mult.push(r);
        }
        let mut act = Vec::with_capacity(elements.len());
        for (g, g_name) in elements.iter().enumerate() {
            let mut row: Vec<usize> = (0..space.n_points()).collect();
            if let Some(map) = self.action.get(g_name) {
                for (from, to) in map {
                    let i = space
                        .point_index(from)
                        .ok_or_else(|| InputError::UnknownPoint(from.clone()))?;
                    let j = space
                        .point_index(to)
                        .ok_or_else(|| InputError::UnknownPoint(to.clone()))?;
                    row[i] = j;
                }
            } else if g != identity {
                // Missing non-identity assignments default to the
                // identity map, which the action laws then vet.
            }
            act.push(row);
        }
        Ok(GroupAction::validate(space, elements, mult, identity, act)?)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionVariant {
    /// Arrows are (group element, point) pairs.
    Action,
    /// Arrows are the orbit-relation pairs.
    #[default]
    Orbit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupoidInput {
    Relation(RelationInput),
    Action {
        action: ActionInput,
        #[serde(default)]
        variant: ActionVariant,
    },
}

impl GroupoidInput {
    pub fn build(&self) -> Result<FiniteGroupoid, InputError> {
        match self {
            GroupoidInput::Relation(r) => r.build(),
            GroupoidInput::Action { action, variant } => {
                let a = action.build()?;
                Ok(match variant {
                    ActionVariant::Action => a.action_groupoid()?,
                    ActionVariant::Orbit => a.orbit_relation_groupoid()?,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantaleInput {
    pub n: usize,
    pub leq: Vec<(usize, usize)>,
    pub product: Vec<Vec<usize>>,
    pub involution: Vec<usize>,
    pub unit: usize,
}

impl QuantaleInput {
    pub fn build(&self) -> Result<FiniteQuantale, InputError> {
        Ok(FiniteQuantale::from_tables(
            self.n,
            &self.leq,
            self.product.clone(),
            self.involution.clone(),
            self.unit,
        )?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseSelector {
    /// The canonical base generated by locally constant assignments.
    Canonical(String),
    /// Explicit members as lists of arrow labels.
    Members(Vec<Vec<String>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseInput {
    FromAction {
        action: ActionInput,
        base: BaseSelector,
    },
    FromGroupoid {
        groupoid: GroupoidInput,
        base: Vec<Vec<String>>,
    },
}

impl BaseInput {
    /// Build the groupoid and its validated selection base.
    pub fn build(&self, size_cap: usize) -> Result<(FiniteGroupoid, SelectionBase), InputError> {
        match self {
            BaseInput::FromAction { action, base } => {
                let a = action.build()?;
                let g = a.orbit_relation_groupoid()?;
                match base {
                    BaseSelector::Canonical(tag) if tag == "canonical" => {
                        let sb = gq::canonical_base_from_action(&a, &g, size_cap)?;
                        Ok((g, sb))
                    }
                    BaseSelector::Canonical(other) => {
                        Err(InputError::UnknownArrow(other.clone()))
                    }
                    BaseSelector::Members(members) => {
                        let sb = resolve_members(&g, members)?;
                        Ok((g, sb))
                    }
                }
            }
            BaseInput::FromGroupoid { groupoid, base } => {
                let g = groupoid.build()?;
                let sb = resolve_members(&g, base)?;
                Ok((g, sb))
            }
        }
    }
}

fn resolve_members(
    g: &FiniteGroupoid,
    members: &[Vec<String>],
) -> Result<SelectionBase, InputError> {
    let mut masks = Vec::with_capacity(members.len());
    for member in members {
        let mut m = 0u64;
        for label in member {
            let x = g
                .arrow_by_label(label)
                .ok_or_else(|| InputError::UnknownArrow(label.clone()))?;
            m |= 1 << x;
        }
        masks.push(m);
    }
    Ok(gq::validate_selection_base(g, &masks)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn space_round_trips_through_json() {
        let text = r#"{"points": ["p0","p1","p2"],
                        "opens": [[],["p0"],["p0","p2"],["p0","p1"],["p0","p1","p2"]]}"#;
        let input: SpaceInput = serde_json::from_str(text).unwrap();
        let space = input.build().unwrap();
        assert_eq!(space.opens().len(), 5);
    }

    #[test]
    fn action_input_builds_the_swap() {
        let text = r#"{
            "space": {"points": ["p0","p1","p2"],
                      "opens": [[],["p2"],["p1"],["p1","p2"],["p0","p1","p2"]]},
            "group": {"elements": ["e","phi"],
                      "mult": [["e","phi"],["phi","e"]],
                      "identity": "e"},
            "action": {"phi": {"p0":"p0","p1":"p2","p2":"p1"}}
        }"#;
        let input: ActionInput = serde_json::from_str(text).unwrap();
        let action = input.build().unwrap();
        assert_eq!(action.order(), 2);
        let g = action.orbit_relation_groupoid().unwrap();
        assert_eq!(g.n_arrows(), 5);
    }

    #[test]
    fn groupoid_input_accepts_relation_form() {
        let text = r#"{
            "space": {"points": ["a","b"], "opens": [[],["a"],["a","b"]]},
            "relation": [["a","a"],["b","b"]]
        }"#;
        let input: GroupoidInput = serde_json::from_str(text).unwrap();
        let g = input.build().unwrap();
        assert_eq!(g.n_arrows(), 2);
    }

    #[test]
    fn base_input_canonical_selector() {
        let text = r#"{
            "action": {
                "space": {"points": ["p0","p1","p2"],
                          "opens": [[],["p2"],["p1"],["p1","p2"],["p0","p1","p2"]]},
                "group": {"elements": ["e","phi"],
                          "mult": [["e","phi"],["phi","e"]],
                          "identity": "e"},
                "action": {"phi": {"p0":"p0","p1":"p2","p2":"p1"}}
            },
            "base": "canonical"
        }"#;
        let input: BaseInput = serde_json::from_str(text).unwrap();
        let (g, base) = input.build(1 << 12).unwrap();
        assert_eq!(g.n_arrows(), 5);
        assert_eq!(base.len(), 9);
    }

    #[test]
    fn base_input_explicit_members() {
        let text = r#"{
            "groupoid": {
                "space": {"points": ["a"], "opens": [[],["a"]]},
                "relation": [["a","a"]]
            },
            "base": [[], ["(a,a)"]]
        }"#;
        let input: BaseInput = serde_json::from_str(text).unwrap();
        let (_, base) = input.build(1 << 12).unwrap();
        assert_eq!(base.len(), 2);
    }

    #[test]
    fn quantale_input_builds() {
        let text = r#"{"n": 2, "leq": [[0,1]],
                        "product": [[0,0],[0,1]],
                        "involution": [0,1], "unit": 1}"#;
        let input: QuantaleInput = serde_json::from_str(text).unwrap();
        let q = input.build().unwrap();
        assert_eq!(q.n(), 2);
    }
}
