#![allow(dead_code)]

use novelty_rec::dataset::{AgeBucket, Dataset, Gender, RatingEvent, RawMovie, UserProfile};

pub const GENRES: [&str; 4] = ["Action", "Romance", "Drama", "Fantasy"];

pub fn user(user_id: u32) -> UserProfile {
    UserProfile {
        user_id,
        gender: if user_id.is_multiple_of(2) {
            Gender::Female
        } else {
            Gender::Male
        },
        age: AgeBucket::ALL[user_id as usize % 7],
        occupation: (user_id % 21) as u8,
    }
}

pub fn movie(movie_id: u32, title: &str, genres: &[&str]) -> RawMovie {
    RawMovie {
        movie_id,
        title: title.to_string(),
        genres: genres.iter().map(|g| g.to_string()).collect(),
    }
}

pub fn event(user_id: u32, movie_id: u32, rating: u8, timestamp: i64) -> RatingEvent {
    RatingEvent {
        user_id,
        movie_id,
        rating,
        timestamp,
    }
}

/// Twelve movies, each with one or two of the four genres, under
/// distinctive titles.
pub fn movies() -> Vec<RawMovie> {
    let titles = [
        "Red Harbor (1990)",
        "Quiet Lantern (1984)",
        "Iron Meadow (1971)",
        "Paper Comet (1999)",
        "Silver Orchard (1962)",
        "Hollow Crown (1995)",
        "Glass Tide (1979)",
        "Amber Signal (1988)",
        "Northern Vow (1993)",
        "Velvet Engine (1966)",
        "Winter Atlas (1997)",
        "Copper Psalm (1958)",
    ];
    titles
        .iter()
        .enumerate()
        .map(|(i, title)| {
            let first = GENRES[i % 4];
            let genres: Vec<&str> = if i % 3 == 0 {
                vec![first, GENRES[(i + 1) % 4]]
            } else {
                vec![first]
            };
            movie(i as u32 + 1, title, &genres)
        })
        .collect()
}

/// Four users with deterministic histories over [`movies`]. User 4 has a
/// single rating, so leave-last-out cannot use it.
pub fn small_dataset() -> Dataset {
    let mut events = Vec::new();
    let histories: [&[(u32, u8)]; 3] = [
        &[
            (1, 5),
            (2, 4),
            (3, 2),
            (5, 4),
            (6, 1),
            (7, 5),
            (9, 3),
            (10, 4),
        ],
        &[(4, 3), (8, 5), (12, 4), (1, 2), (2, 5), (11, 3), (3, 4)],
        &[(6, 4), (7, 3), (9, 5), (10, 1), (11, 4), (12, 5)],
    ];
    for (u, history) in histories.iter().enumerate() {
        for (step, &(m, r)) in history.iter().enumerate() {
            events.push(event(
                u as u32 + 1,
                m,
                r,
                1_000 * (u as i64 + 1) + step as i64,
            ));
        }
    }
    events.push(event(4, 5, 4, 9_000));
    Dataset::from_parts((1..=4).map(user).collect(), movies(), events, 8).unwrap()
}
