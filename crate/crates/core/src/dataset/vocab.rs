use std::collections::HashMap;

use serde::{Deserialize, Serialize};

/// Token id 0 is shared by padding and out-of-vocabulary words.
pub const PAD_TOKEN: u32 = 0;

pub const DEFAULT_TITLE_LEN: usize = 16;

pub type TagId = usize;

/// Title-token and tag tables. Ids are assigned in order of first
/// appearance, so a given corpus always yields the same vocabulary.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    tokens: HashMap<String, u32>,
    tags: Vec<String>,
    tag_index: HashMap<String, TagId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_title(&mut self, title: &str) {
        for word in split_words(title) {
            let next = self.tokens.len() as u32 + 1;
            self.tokens.entry(word).or_insert(next);
        }
    }

    pub fn add_tag(&mut self, name: &str) -> TagId {
        if let Some(&id) = self.tag_index.get(name) {
            return id;
        }
        let id = self.tags.len();
        self.tags.push(name.to_string());
        self.tag_index.insert(name.to_string(), id);
        id
    }

    pub fn token_id(&self, word: &str) -> u32 {
        self.tokens.get(word).copied().unwrap_or(PAD_TOKEN)
    }

    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        self.tag_index.get(name).copied()
    }

    pub fn tag_name(&self, id: TagId) -> Option<&str> {
        self.tags.get(id).map(String::as_str)
    }

    pub fn tag_names(&self) -> &[String] {
        &self.tags
    }

    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    /// Rows needed in a token embedding table, including the padding row.
    pub fn token_table_size(&self) -> usize {
        self.tokens.len() + 1
    }
}

impl<'a> FromIterator<(&'a str, u32)> for Vocabulary {
    fn from_iter<I: IntoIterator<Item = (&'a str, u32)>>(iter: I) -> Self {
        let mut v = Vocabulary::new();
        v.tokens = iter
            .into_iter()
            .map(|(w, id)| (w.to_string(), id))
            .collect();
        v
    }
}

/// Lowercased alphanumeric runs; everything else separates words.
fn split_words(title: &str) -> impl Iterator<Item = String> + '_ {
    title
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
}

/// Maps a raw title to exactly `len` token ids: unknown words become
/// [`PAD_TOKEN`], short titles are right-padded, long ones truncated.
pub fn tokenize_title(title: &str, vocab: &Vocabulary, len: usize) -> Vec<u32> {
    let mut ids: Vec<u32> = split_words(title)
        .take(len)
        .map(|w| vocab.token_id(&w))
        .collect();
    ids.resize(len, PAD_TOKEN);
    ids
}
