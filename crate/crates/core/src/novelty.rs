//! Sliding-window action novelty and the user novelty index.
//!
//! Times are 1-based. The window for time `t` covers actions
//! `max(1, t - k) ..= t - 1`, so row 1 is always all ones and `t = T + 1`
//! scores the action after the last one observed. Each action contributes at
//! most one count per tag.

use serde::Serialize;

use crate::dataset::TagId;
use crate::{Error, Real, Result, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NoveltyConfig {
    /// Window length: how many prior actions are remembered.
    pub k: usize,
    pub tag_count: usize,
}

impl NoveltyConfig {
    pub fn new(k: usize, tag_count: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Validation(
                "novelty window k must be at least 1".into(),
            ));
        }
        if tag_count == 0 {
            return Err(Error::Validation("tag count must be at least 1".into()));
        }
        Ok(Self { k, tag_count })
    }
}

fn check_time(len: usize, t: usize) -> Result<()> {
    if t == 0 || t > len + 1 {
        return Err(Error::OutOfRange(format!(
            "time {t} outside [1, {}] for a sequence of {len} action(s)",
            len + 1
        )));
    }
    Ok(())
}

/// Window `[max(1, t-k), t-1]` as a 0-based slice range.
fn window(t: usize, k: usize) -> std::ops::Range<usize> {
    t.saturating_sub(k + 1)..t - 1
}

/// Number of actions in the window before `t` whose tag set contains `tag`.
pub fn tag_window_count<S: AsRef<[TagId]>>(
    actions: &[S],
    t: usize,
    k: usize,
    tag: TagId,
) -> Result<usize> {
    check_time(actions.len(), t)?;
    if k == 0 {
        return Err(Error::Validation(
            "novelty window k must be at least 1".into(),
        ));
    }
    Ok(actions[window(t, k)]
        .iter()
        .filter(|a| a.as_ref().contains(&tag))
        .count())
}

fn tag_presence<S: AsRef<[TagId]>>(action: &S, tag_count: usize, out: &mut [bool]) -> Result<()> {
    out.fill(false);
    for &tag in action.as_ref() {
        *out.get_mut(tag).ok_or_else(|| {
            Error::OutOfRange(format!("tag {tag} outside vocabulary of {tag_count}"))
        })? = true;
    }
    Ok(())
}

/// Per-tag window counts before `t`.
fn window_counts<S: AsRef<[TagId]>>(
    actions: &[S],
    t: usize,
    config: NoveltyConfig,
) -> Result<Vec<usize>> {
    check_time(actions.len(), t)?;
    let mut counts = vec![0usize; config.tag_count];
    let mut present = vec![false; config.tag_count];
    for action in &actions[window(t, config.k)] {
        tag_presence(action, config.tag_count, &mut present)?;
        for (c, &p) in counts.iter_mut().zip(&present) {
            *c += usize::from(p);
        }
    }
    Ok(counts)
}

fn novelty_of<T: Scalar>(count: usize) -> T {
    T::one() / T::from_count(count + 1)
}

/// ANI values for every tag at time `t`: `1 / (count + 1)`.
pub fn ani_row<T: Scalar, S: AsRef<[TagId]>>(
    actions: &[S],
    t: usize,
    config: NoveltyConfig,
) -> Result<Vec<T>> {
    Ok(window_counts(actions, t, config)?
        .into_iter()
        .map(novelty_of)
        .collect())
}

/// A `T x |I|` action novelty matrix for one user and one window length.
#[derive(Debug, Clone, PartialEq)]
pub struct AniMatrix<T> {
    pub user_id: u32,
    pub k: usize,
    tag_count: usize,
    values: Vec<T>,
}

impl<T: Copy> AniMatrix<T> {
    /// Number of rows, `T`.
    pub fn len(&self) -> usize {
        self.values.len() / self.tag_count
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tag_count(&self) -> usize {
        self.tag_count
    }

    /// Row at 1-based time `t`.
    pub fn row(&self, t: usize) -> &[T] {
        assert!(
            t >= 1 && t <= self.len(),
            "row {t} outside [1, {}]",
            self.len()
        );
        &self.values[(t - 1) * self.tag_count..t * self.tag_count]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.tag_count)
    }

    pub fn map<U>(&self, f: impl FnMut(T) -> U) -> AniMatrix<U> {
        AniMatrix {
            user_id: self.user_id,
            k: self.k,
            tag_count: self.tag_count,
            values: self.values.iter().copied().map(f).collect(),
        }
    }
}

/// Every row `t = 1..=T`, maintained incrementally as the window slides.
pub fn ani_matrix<T: Scalar, S: AsRef<[TagId]>>(
    user_id: u32,
    actions: &[S],
    config: NoveltyConfig,
) -> Result<AniMatrix<T>> {
    if actions.is_empty() {
        return Err(Error::Empty("action sequence"));
    }
    let n = config.tag_count;
    let mut counts = vec![0usize; n];
    let mut present = vec![false; n];
    let mut values = Vec::with_capacity(actions.len() * n);
    for t in 1..=actions.len() {
        if t >= 2 {
            tag_presence(&actions[t - 2], n, &mut present)?;
            for (c, &p) in counts.iter_mut().zip(&present) {
                *c += usize::from(p);
            }
        }
        if t > config.k + 1 {
            tag_presence(&actions[t - config.k - 2], n, &mut present)?;
            for (c, &p) in counts.iter_mut().zip(&present) {
                *c -= usize::from(p);
            }
        }
        values.extend(counts.iter().map(|&c| novelty_of::<T>(c)));
    }
    // The last action never enters a stored row; still reject bad tags.
    tag_presence(&actions[actions.len() - 1], n, &mut present)?;
    Ok(AniMatrix {
        user_id,
        k: config.k,
        tag_count: n,
        values,
    })
}

/// `1 / (H(p) + 1)` where `p` is the row scaled to sum to one and `H` is the
/// base-2 Shannon entropy (with `0 log 0 = 0`). Lies in
/// `[1 / (1 + log2 |I|), 1]`; the minimum is reached on uniform rows.
pub fn uni<T: Real>(row: &[T]) -> Result<T> {
    if row.is_empty() {
        return Err(Error::Empty("ANI row"));
    }
    if row.iter().any(|&x| x < T::zero() || !x.is_finite()) {
        return Err(Error::Validation(
            "ANI row has a negative or non-finite entry".into(),
        ));
    }
    let total: T = row.iter().copied().sum();
    if total <= T::zero() {
        return Err(Error::Validation("ANI row sums to zero".into()));
    }
    let entropy: T = row
        .iter()
        .map(|&x| x / total)
        .filter(|&p| p > T::zero())
        .map(|p| -p * p.log2())
        .sum();
    // Rounding can push the entropy of a near-uniform row a hair past
    // log2 |I|; clamp so the bounds hold exactly.
    let max_entropy = T::from_count(row.len()).log2();
    let entropy = entropy.max(T::zero()).min(max_entropy);
    Ok(T::one() / (entropy + T::one()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniSeries<T> {
    pub user_id: u32,
    pub k: usize,
    pub values: Vec<T>,
}

pub fn uni_series<T: Real>(matrix: &AniMatrix<T>) -> Result<UniSeries<T>> {
    Ok(UniSeries {
        user_id: matrix.user_id,
        k: matrix.k,
        values: matrix.rows().map(uni).collect::<Result<_>>()?,
    })
}
