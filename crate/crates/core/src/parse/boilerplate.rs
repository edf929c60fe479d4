use super::{assign_parents, ParsedDocument};

/// Lexicon of lowercase stems marking page furniture.
pub const DEFAULT_BOILERPLATE_STEMS: &[&str] = &[
    "cookie",
    "accept all",
    "sign in",
    "log in",
    "navigation",
    "skip to content",
];

/// Drops units that look like cookie banners, navigation or login prompts.
///
/// A stem matches when it occurs at the start of a word, case-insensitively,
/// so `cookie` matches "Cookies" but `log in` does not match "catalog index".
/// Surviving units keep their IDs; only `parent_heading` is recomputed, in
/// case a dropped unit was a heading.
#[derive(Debug, Clone)]
pub struct BoilerplateFilter {
    stems: Vec<String>,
}

impl Default for BoilerplateFilter {
    fn default() -> Self {
        Self::new(DEFAULT_BOILERPLATE_STEMS.iter().copied())
    }
}

impl BoilerplateFilter {
    pub fn new<S: AsRef<str>>(stems: impl IntoIterator<Item = S>) -> Self {
        Self {
            stems: stems
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .filter(|s| !s.is_empty())
                .collect(),
        }
    }

    pub fn is_boilerplate(&self, text: &str) -> bool {
        let lower = text.to_lowercase();
        self.stems.iter().any(|stem| {
            lower.match_indices(stem.as_str()).any(|(i, _)| {
                lower[..i]
                    .chars()
                    .next_back()
                    .is_none_or(|c| !c.is_alphanumeric())
            })
        })
    }

    pub fn apply(&self, doc: &ParsedDocument) -> ParsedDocument {
        let mut units: Vec<_> = doc
            .units
            .iter()
            .filter(|u| !self.is_boilerplate(&u.text))
            .cloned()
            .collect();
        assign_parents(&mut units);
        ParsedDocument {
            units,
            ..doc.clone()
        }
    }
}

/// [`BoilerplateFilter::apply`] with the default lexicon.
pub fn filter_boilerplate(doc: &ParsedDocument) -> ParsedDocument {
    BoilerplateFilter::default().apply(doc)
}
