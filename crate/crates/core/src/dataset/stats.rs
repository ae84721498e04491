use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ActionSequence, Catalog, Gender};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub user_count: usize,
    pub movie_count: usize,
    pub rating_count: usize,
    pub mean_seq_len: f64,
    pub median_seq_len: f64,
    pub mean_tags_per_movie: f64,
    pub male_female_ratio: f64,
    /// Counts of ratings 1 through 5.
    pub rating_histogram: [usize; 5],
    /// Movies carrying each tag.
    pub tag_frequency: BTreeMap<String, usize>,
    /// Users per age code.
    pub age_histogram: BTreeMap<u8, usize>,
    /// Users per occupation code.
    pub occupation_histogram: BTreeMap<u8, usize>,
}

pub fn dataset_stats(catalog: &Catalog, sequences: &BTreeMap<u32, ActionSequence>) -> DatasetStats {
    let mut lens: Vec<usize> = sequences.values().map(ActionSequence::len).collect();
    lens.sort_unstable();
    let rating_count: usize = lens.iter().sum();

    let mean_seq_len = if lens.is_empty() {
        0.0
    } else {
        rating_count as f64 / lens.len() as f64
    };
    let median_seq_len = match lens.len() {
        0 => 0.0,
        n if n % 2 == 1 => lens[n / 2] as f64,
        n => (lens[n / 2 - 1] + lens[n / 2]) as f64 / 2.0,
    };

    let mut rating_histogram = [0usize; 5];
    for e in sequences.values().flat_map(|s| &s.events) {
        rating_histogram[usize::from(e.rating) - 1] += 1;
    }

    let mut tag_frequency: BTreeMap<String, usize> = catalog
        .vocab()
        .tag_names()
        .iter()
        .map(|n| (n.clone(), 0))
        .collect();
    let mut tag_total = 0usize;
    for m in catalog.movies() {
        tag_total += m.tags.len();
        for &t in &m.tags {
            let name = catalog.vocab().tag_name(t).expect("catalog tag");
            *tag_frequency.get_mut(name).expect("seeded above") += 1;
        }
    }
    let mean_tags_per_movie = if catalog.movie_count() == 0 {
        0.0
    } else {
        tag_total as f64 / catalog.movie_count() as f64
    };

    let (mut male, mut female) = (0usize, 0usize);
    let mut age_histogram = BTreeMap::new();
    let mut occupation_histogram = BTreeMap::new();
    for u in catalog.users() {
        match u.gender {
            Gender::Male => male += 1,
            Gender::Female => female += 1,
        }
        *age_histogram.entry(u.age.code()).or_insert(0) += 1;
        *occupation_histogram.entry(u.occupation).or_insert(0) += 1;
    }
    let male_female_ratio = if female == 0 {
        f64::INFINITY
    } else {
        male as f64 / female as f64
    };

    DatasetStats {
        user_count: catalog.user_count(),
        movie_count: catalog.movie_count(),
        rating_count,
        mean_seq_len,
        median_seq_len,
        mean_tags_per_movie,
        male_female_ratio,
        rating_histogram,
        tag_frequency,
        age_histogram,
        occupation_histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{AgeBucket, Dataset, RatingEvent, RawMovie, UserProfile};

    #[test]
    fn small_dataset() {
        let users = vec![
            UserProfile {
                user_id: 1,
                gender: Gender::Male,
                age: AgeBucket::Under18,
                occupation: 3,
            },
            UserProfile {
                user_id: 2,
                gender: Gender::Female,
                age: AgeBucket::Over56,
                occupation: 3,
            },
        ];
        let movies = vec![
            RawMovie {
                movie_id: 1,
                title: "A".into(),
                genres: vec!["Drama".into(), "Comedy".into()],
            },
            RawMovie {
                movie_id: 2,
                title: "B".into(),
                genres: vec!["Drama".into()],
            },
        ];
        let ev = |u, m, r, t| RatingEvent {
            user_id: u,
            movie_id: m,
            rating: r,
            timestamp: t,
        };
        let events = vec![
            ev(1, 1, 5, 1),
            ev(1, 2, 4, 2),
            ev(2, 1, 1, 1),
            ev(2, 2, 2, 2),
            ev(2, 1, 2, 3),
            ev(2, 2, 5, 4),
        ];
        let stats = Dataset::from_parts(users, movies, events, 4)
            .unwrap()
            .stats();
        assert_eq!(stats.user_count, 2);
        assert_eq!(stats.rating_count, 6);
        assert_eq!(stats.mean_seq_len, 3.0);
        assert_eq!(stats.median_seq_len, 3.0);
        assert_eq!(stats.mean_tags_per_movie, 1.5);
        assert_eq!(stats.male_female_ratio, 1.0);
        assert_eq!(stats.rating_histogram, [1, 2, 0, 1, 2]);
        assert_eq!(
            stats.rating_histogram.iter().sum::<usize>(),
            stats.rating_count
        );
        assert_eq!(stats.tag_frequency["Drama"], 2);
        assert_eq!(stats.tag_frequency["Comedy"], 1);
        assert_eq!(stats.age_histogram[&56], 1);
        assert_eq!(stats.occupation_histogram[&3], 2);

        let json = serde_json::to_value(&stats).unwrap();
        for key in [
            "user_count",
            "movie_count",
            "rating_count",
            "mean_seq_len",
            "median_seq_len",
            "mean_tags_per_movie",
            "male_female_ratio",
            "rating_histogram",
            "tag_frequency",
            "age_histogram",
            "occupation_histogram",
        ] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
    }
}
