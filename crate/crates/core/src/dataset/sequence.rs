use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::{Catalog, RatingEvent};
use crate::{Error, Result, Scalar};

/// One user's rating events ordered by `(timestamp, movie_id)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSequence {
    pub user_id: u32,
    pub events: Vec<RatingEvent>,
}

impl ActionSequence {
    /// Sorts `events` into canonical order. All events must belong to
    /// `user_id`.
    pub fn new(user_id: u32, mut events: Vec<RatingEvent>) -> Result<Self> {
        if let Some(e) = events.iter().find(|e| e.user_id != user_id) {
            return Err(Error::Validation(format!(
                "event for user {} in sequence of user {user_id}",
                e.user_id
            )));
        }
        events.sort_by_key(|e| (e.timestamp, e.movie_id));
        Ok(Self { user_id, events })
    }

    /// Number of actions, `T`.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }
}

/// Rows dropped while merging ratings into sequences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct MergeReport {
    pub unknown_user: usize,
    pub unknown_movie: usize,
    pub duplicates: usize,
}

impl MergeReport {
    pub fn dropped(&self) -> usize {
        self.unknown_user + self.unknown_movie + self.duplicates
    }
}

/// Groups events per user and sorts them. Rows naming an unknown user or
/// movie are dropped, as are repeated `(user, movie, timestamp)` rows after
/// the first.
pub fn build_action_sequences(
    events: Vec<RatingEvent>,
    catalog: &Catalog,
) -> (BTreeMap<u32, ActionSequence>, MergeReport) {
    let mut report = MergeReport::default();
    let mut seen = HashSet::new();
    let mut per_user: BTreeMap<u32, Vec<RatingEvent>> = BTreeMap::new();
    for e in events {
        if catalog.user(e.user_id).is_none() {
            report.unknown_user += 1;
        } else if catalog.movie(e.movie_id).is_none() {
            report.unknown_movie += 1;
        } else if !seen.insert((e.user_id, e.movie_id, e.timestamp)) {
            report.duplicates += 1;
        } else {
            per_user.entry(e.user_id).or_default().push(e);
        }
    }
    let sequences = per_user
        .into_iter()
        .map(|(user_id, events)| {
            let seq = ActionSequence::new(user_id, events).expect("grouped by user");
            (user_id, seq)
        })
        .collect();
    (sequences, report)
}

/// Splits off the chronologically last action as the holdout.
pub fn split_leave_last(sequence: &ActionSequence) -> Result<(&[RatingEvent], &RatingEvent)> {
    match sequence.events.split_last() {
        Some((last, prefix)) if !prefix.is_empty() => Ok((prefix, last)),
        _ => Err(Error::InsufficientHistory {
            user_id: sequence.user_id,
            len: sequence.len(),
        }),
    }
}

/// Mean rating over `prefix` and each event's offset from it.
pub fn user_mean_and_center<T: Scalar>(prefix: &[RatingEvent]) -> Result<(T, Vec<T>)> {
    if prefix.is_empty() {
        return Err(Error::Empty("rating prefix"));
    }
    let sum = prefix
        .iter()
        .fold(T::zero(), |acc, e| acc + T::from_count(e.rating.into()));
    let mean = sum / T::from_count(prefix.len());
    let centered = prefix
        .iter()
        .map(|e| T::from_count(e.rating.into()) - mean)
        .collect();
    Ok((mean, centered))
}

/// Anything carrying a raw 1-5 rating.
pub trait RawRating {
    fn raw_rating(&self) -> u8;
}

impl RawRating for RatingEvent {
    fn raw_rating(&self) -> u8 {
        self.rating
    }
}

/// Appends one copy of every row rated 1 or 2, after the originals.
pub fn oversample_low_ratings<R: RawRating + Clone>(mut rows: Vec<R>) -> Vec<R> {
    let extra: Vec<R> = rows
        .iter()
        .filter(|r| r.raw_rating() < 3)
        .cloned()
        .collect();
    rows.extend(extra);
    rows
}
