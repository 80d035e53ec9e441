use serde::{Deserialize, Serialize};

/// Lowercase word units. Shared by BM25, the length split and term statistics.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenList(Vec<String>);

impl TokenList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[String] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<String> {
        self.0
    }

    pub fn join(&self, sep: &str) -> String {
        self.0.join(sep)
    }
}

impl<'a> IntoIterator for &'a TokenList {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Lowercases, then splits on every codepoint that is not alphanumeric.
///
/// Lowercasing happens first because some uppercase letters lowercase to a
/// sequence containing combining marks, which must act as separators too.
pub fn tokenize(text: &str) -> TokenList {
    let lowered = text.to_lowercase();
    TokenList(
        lowered
            .split(|c: char| !c.is_alphanumeric())
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect(),
    )
}
