//! Readers for the three `::`-delimited MovieLens-1M files.
//!
//! All files are decoded as Latin-1: every byte maps to the code point of the
//! same value, so the published `movies.dat` (which is not valid UTF-8)
//! round-trips without loss.

use std::io::Read;

use super::{AgeBucket, Gender, RatingEvent, UserProfile};
use crate::{Error, Result};

/// A movie line before tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawMovie {
    pub movie_id: u32,
    pub title: String,
    pub genres: Vec<String>,
}

pub fn decode_latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

/// Non-blank lines with their 1-based line numbers.
fn lines(mut reader: impl Read) -> Result<Vec<(usize, String)>> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    Ok(bytes
        .split(|&b| b == b'\n')
        .enumerate()
        .map(|(i, line)| {
            let line = line.strip_suffix(b"\r").unwrap_or(line);
            (i + 1, decode_latin1(line))
        })
        .filter(|(_, line)| !line.trim().is_empty())
        .collect())
}

fn parse_err(source_name: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source_name.to_string(),
        line,
        message: message.into(),
    }
}

fn fields<'a>(
    source_name: &str,
    line_no: usize,
    line: &'a str,
    expected: usize,
) -> Result<Vec<&'a str>> {
    let parts: Vec<&str> = line.splitn(expected, "::").collect();
    if parts.len() != expected {
        return Err(parse_err(
            source_name,
            line_no,
            format!(
                "expected {expected} `::`-separated fields, found {}",
                parts.len()
            ),
        ));
    }
    Ok(parts)
}

fn number<N: std::str::FromStr>(
    source_name: &str,
    line_no: usize,
    what: &str,
    text: &str,
) -> Result<N> {
    text.trim()
        .parse()
        .map_err(|_| parse_err(source_name, line_no, format!("invalid {what} `{text}`")))
}

/// `UserID::Gender::Age::Occupation::Zip-code`; the zip code is dropped.
pub fn parse_users(reader: impl Read) -> Result<Vec<UserProfile>> {
    const SRC: &str = "users.dat";
    lines(reader)?
        .into_iter()
        .map(|(n, line)| {
            let f = fields(SRC, n, &line, 5)?;
            let user_id: u32 = number(SRC, n, "user id", f[0])?;
            let gender = match f[1].trim() {
                "M" => Gender::Male,
                "F" => Gender::Female,
                other => {
                    return Err(Error::Validation(format!(
                        "{SRC}:{n}: unknown gender code `{other}`"
                    )))
                }
            };
            let age_code: u8 = number(SRC, n, "age code", f[2])?;
            let age = AgeBucket::from_code(age_code).ok_or_else(|| {
                Error::Validation(format!("{SRC}:{n}: unknown age code {age_code}"))
            })?;
            let occupation: u8 = number(SRC, n, "occupation", f[3])?;
            if usize::from(occupation) >= super::OCCUPATION_COUNT {
                return Err(Error::Validation(format!(
                    "{SRC}:{n}: occupation {occupation} outside [0,20]"
                )));
            }
            Ok(UserProfile {
                user_id,
                gender,
                age,
                occupation,
            })
        })
        .collect()
}

/// `MovieID::Title::Genre|Genre|...`, genre order preserved.
pub fn parse_movies(reader: impl Read) -> Result<Vec<RawMovie>> {
    const SRC: &str = "movies.dat";
    lines(reader)?
        .into_iter()
        .map(|(n, line)| {
            // Titles never contain `::`, but split from the right so the
            // genre column is unambiguous either way.
            let (head, genres) = line
                .rsplit_once("::")
                .ok_or_else(|| parse_err(SRC, n, "expected 3 `::`-separated fields"))?;
            let (id, title) = head
                .split_once("::")
                .ok_or_else(|| parse_err(SRC, n, "expected 3 `::`-separated fields"))?;
            let movie_id: u32 = number(SRC, n, "movie id", id)?;
            let genres: Vec<String> = genres
                .split('|')
                .map(str::trim)
                .filter(|g| !g.is_empty())
                .map(str::to_string)
                .collect();
            if genres.is_empty() {
                return Err(Error::Validation(format!(
                    "{SRC}:{n}: movie {movie_id} has no genres"
                )));
            }
            Ok(RawMovie {
                movie_id,
                title: title.to_string(),
                genres,
            })
        })
        .collect()
}

/// `UserID::MovieID::Rating::Timestamp`, in file order.
pub fn parse_ratings(reader: impl Read) -> Result<Vec<RatingEvent>> {
    const SRC: &str = "ratings.dat";
    lines(reader)?
        .into_iter()
        .map(|(n, line)| {
            let f = fields(SRC, n, &line, 4)?;
            let rating: u8 = number(SRC, n, "rating", f[2])?;
            if !(1..=5).contains(&rating) {
                return Err(Error::Validation(format!(
                    "{SRC}:{n}: rating {rating} outside [1,5]"
                )));
            }
            Ok(RatingEvent {
                user_id: number(SRC, n, "user id", f[0])?,
                movie_id: number(SRC, n, "movie id", f[1])?,
                rating,
                timestamp: number(SRC, n, "timestamp", f[3])?,
            })
        })
        .collect()
}
