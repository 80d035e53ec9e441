//! Rule-based WH-intent clusters.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Cluster, ShiftError, ShiftManifest};
use crate::corpus::{tokenize, QuerySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WhClass {
    Wha,
    How,
    Who,
}

impl WhClass {
    pub const ALL: [WhClass; 3] = [WhClass::Wha, WhClass::How, WhClass::Who];

    pub fn name(self) -> &'static str {
        match self {
            WhClass::Wha => "wha",
            WhClass::How => "how",
            WhClass::Who => "who",
        }
    }
}

/// Keyword lists per class. A keyword belongs to at most one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhRules {
    lists: [Vec<String>; 3],
    lookup: HashMap<String, WhClass>,
}

impl Default for WhRules {
    fn default() -> Self {
        let words = |ws: &[&str]| ws.iter().map(|w| (*w).to_owned()).collect();
        Self::new(
            words(&["what", "definition"]),
            words(&["how"]),
            words(&["who", "when", "where", "which"]),
        )
        .expect("default lists are valid")
    }
}

impl WhRules {
    pub fn new(wha: Vec<String>, how: Vec<String>, who: Vec<String>) -> Result<Self, ShiftError> {
        let mut lookup = HashMap::new();
        let mut lists: [Vec<String>; 3] = Default::default();
        for (slot, (class, words)) in WhClass::ALL.into_iter().zip([wha, how, who]).enumerate() {
            for w in words {
                let toks = tokenize(&w).into_vec();
                if toks.len() != 1 {
                    return Err(ShiftError::InvalidKeyword(w));
                }
                let kw = toks.into_iter().next().unwrap();
                match lookup.insert(kw.clone(), class) {
                    Some(prev) if prev != class => return Err(ShiftError::OverlappingKeywords(kw)),
                    Some(_) => continue,
                    None => lists[slot].push(kw),
                }
            }
        }
        Ok(Self { lists, lookup })
    }

    pub fn keywords(&self, class: WhClass) -> &[String] {
        &self.lists[class as usize]
    }

    /// Class of the first token (left to right) found in any keyword list.
    pub fn classify(&self, text: &str) -> Option<WhClass> {
        tokenize(text)
            .iter()
            .find_map(|t| self.lookup.get(t).copied())
    }
}

/// Classifies with the default keyword lists.
pub fn wh_assign(text: &str) -> Option<WhClass> {
    thread_local! {
        static RULES: WhRules = WhRules::default();
    }
    RULES.with(|r| r.classify(text))
}

/// Unsplit `wha`/`how`/`who` clusters in query-file order. Queries matching
/// no keyword are left out.
pub fn wh_split(queries: &QuerySet, rules: &WhRules) -> ShiftManifest {
    let mut members: [Vec<String>; 3] = Default::default();
    let mut unmatched = 0usize;
    for (id, text) in queries.iter() {
        match rules.classify(text) {
            Some(c) => members[c as usize].push(id.to_owned()),
            None => unmatched += 1,
        }
    }
    let mut manifest = ShiftManifest::new("wh", 0).with_param("unmatched_queries", unmatched);
    for class in WhClass::ALL {
        manifest = manifest.with_param(
            &format!("keywords_{}", class.name()),
            rules.keywords(class).to_vec(),
        );
    }
    manifest.clusters = WhClass::ALL
        .into_iter()
        .zip(members)
        .map(|(c, m)| Cluster::unsplit(c.name(), m))
        .collect();
    manifest
}
