//! MovieLens-1M ingestion and the per-user action sequences built from it.

mod parse;
mod sequence;
mod stats;
mod vocab;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use parse::{decode_latin1, parse_movies, parse_ratings, parse_users, RawMovie};
pub use sequence::{
    build_action_sequences, oversample_low_ratings, split_leave_last, user_mean_and_center,
    ActionSequence, MergeReport, RawRating,
};
pub use stats::{dataset_stats, DatasetStats};
pub use vocab::{tokenize_title, TagId, Vocabulary, DEFAULT_TITLE_LEN, PAD_TOKEN};

use crate::{Error, Result};

pub const OCCUPATION_COUNT: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

/// The seven MovieLens age buckets, keyed by their file codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeBucket {
    Under18,
    From18To24,
    From25To34,
    From35To44,
    From45To49,
    From50To55,
    Over56,
}

impl AgeBucket {
    pub const ALL: [AgeBucket; 7] = [
        AgeBucket::Under18,
        AgeBucket::From18To24,
        AgeBucket::From25To34,
        AgeBucket::From35To44,
        AgeBucket::From45To49,
        AgeBucket::From50To55,
        AgeBucket::Over56,
    ];

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.iter().copied().find(|a| a.code() == code)
    }

    pub fn code(self) -> u8 {
        match self {
            AgeBucket::Under18 => 1,
            AgeBucket::From18To24 => 18,
            AgeBucket::From25To34 => 25,
            AgeBucket::From35To44 => 35,
            AgeBucket::From45To49 => 45,
            AgeBucket::From50To55 => 50,
            AgeBucket::Over56 => 56,
        }
    }

    /// Position in [`AgeBucket::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: u32,
    pub gender: Gender,
    pub age: AgeBucket,
    pub occupation: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Movie {
    pub movie_id: u32,
    pub title_raw: String,
    pub title_tokens: Vec<u32>,
    /// Sorted, deduplicated, never empty.
    pub tags: Vec<TagId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RatingEvent {
    pub user_id: u32,
    pub movie_id: u32,
    pub rating: u8,
    pub timestamp: i64,
}

/// Users, movies and the vocabulary. Immutable once built.
#[derive(Debug, Clone)]
pub struct Catalog {
    users: BTreeMap<u32, UserProfile>,
    movies: BTreeMap<u32, Movie>,
    vocab: Vocabulary,
    title_len: usize,
}

impl Catalog {
    /// Builds the vocabulary from every title and genre in `movies` (in file
    /// order) and tokenizes each title to `title_len` ids.
    pub fn build(users: Vec<UserProfile>, movies: Vec<RawMovie>, title_len: usize) -> Result<Self> {
        if title_len == 0 {
            return Err(Error::Validation("title length must be at least 1".into()));
        }
        let mut vocab = Vocabulary::new();
        for m in &movies {
            vocab.add_title(&m.title);
            for g in &m.genres {
                vocab.add_tag(g);
            }
        }

        let mut user_map = BTreeMap::new();
        for u in users {
            let id = u.user_id;
            if user_map.insert(id, u).is_some() {
                return Err(Error::Validation(format!("duplicate user id {id}")));
            }
        }

        let mut movie_map = BTreeMap::new();
        for m in movies {
            let mut tags: Vec<TagId> = m
                .genres
                .iter()
                .map(|g| vocab.tag_id(g).expect("tag registered above"))
                .collect();
            tags.sort_unstable();
            tags.dedup();
            let movie = Movie {
                movie_id: m.movie_id,
                title_tokens: tokenize_title(&m.title, &vocab, title_len),
                title_raw: m.title,
                tags,
            };
            if movie_map.insert(movie.movie_id, movie).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate movie id {}",
                    m.movie_id
                )));
            }
        }

        Ok(Self {
            users: user_map,
            movies: movie_map,
            vocab,
            title_len,
        })
    }

    pub fn user(&self, id: u32) -> Option<&UserProfile> {
        self.users.get(&id)
    }

    pub fn movie(&self, id: u32) -> Option<&Movie> {
        self.movies.get(&id)
    }

    /// Users in ascending id order.
    pub fn users(&self) -> impl Iterator<Item = &UserProfile> {
        self.users.values()
    }

    /// Movies in ascending id order.
    pub fn movies(&self) -> impl Iterator<Item = &Movie> {
        self.movies.values()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn movie_count(&self) -> usize {
        self.movies.len()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn tag_count(&self) -> usize {
        self.vocab.tag_count()
    }

    pub fn title_len(&self) -> usize {
        self.title_len
    }

    /// Tag sets of the movies behind `events`, in order.
    pub fn tag_sets<'a>(&'a self, events: &[RatingEvent]) -> Result<Vec<&'a [TagId]>> {
        events
            .iter()
            .map(|e| {
                self.movie(e.movie_id)
                    .map(|m| m.tags.as_slice())
                    .ok_or_else(|| Error::OutOfRange(format!("unknown movie {}", e.movie_id)))
            })
            .collect()
    }
}

/// A merged catalog plus one action sequence per user who rated anything.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub catalog: Catalog,
    pub sequences: BTreeMap<u32, ActionSequence>,
    pub report: MergeReport,
}

impl Dataset {
    /// Reads `users.dat`, `movies.dat` and `ratings.dat` from `dir`.
    pub fn load(dir: impl AsRef<Path>, title_len: usize) -> Result<Self> {
        let dir = dir.as_ref();
        let open = |name: &str| -> Result<BufReader<File>> {
            let path = dir.join(name);
            File::open(&path).map(BufReader::new).map_err(|e| {
                Error::Io(std::io::Error::new(
                    e.kind(),
                    format!("{}: {e}", path.display()),
                ))
            })
        };
        let users = parse_users(open("users.dat")?)?;
        let movies = parse_movies(open("movies.dat")?)?;
        let events = parse_ratings(open("ratings.dat")?)?;
        Self::from_parts(users, movies, events, title_len)
    }

    pub fn from_parts(
        users: Vec<UserProfile>,
        movies: Vec<RawMovie>,
        events: Vec<RatingEvent>,
        title_len: usize,
    ) -> Result<Self> {
        let catalog = Catalog::build(users, movies, title_len)?;
        let (sequences, report) = build_action_sequences(events, &catalog);
        if report.dropped() > 0 {
            log::warn!(
                "dropped {} rating rows ({} unknown user, {} unknown movie, {} duplicate)",
                report.dropped(),
                report.unknown_user,
                report.unknown_movie,
                report.duplicates
            );
        }
        Ok(Self {
            catalog,
            sequences,
            report,
        })
    }

    /// The first `n` users (ascending id) that have a sequence.
    pub fn first_users(&self, n: usize) -> Vec<u32> {
        self.sequences.keys().take(n).copied().collect()
    }

    pub fn sequence(&self, user_id: u32) -> Result<&ActionSequence> {
        self.sequences
            .get(&user_id)
            .ok_or_else(|| Error::Validation(format!("unknown user id {user_id}")))
    }

    pub fn stats(&self) -> DatasetStats {
        dataset_stats(&self.catalog, &self.sequences)
    }
}
