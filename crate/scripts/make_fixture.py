#!/usr/bin/env python3
"""Generate the small MovieLens-1M-format fixture under data/fixture/.

Users are novelty seekers with a personal forgetting window: a genre they have
not met in their last k_u actions feels fresh and raises both the chance of
picking a movie of that genre and the rating given to it. Each user also has
fixed genre tastes and a harshness offset, and each movie has a latent
quality. The output is deterministic for a given --seed.
"""
import argparse
import math
import os
import random

GENRES = [
    "Action", "Adventure", "Animation", "Children's", "Comedy", "Crime",
    "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror", "Musical",
    "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
WORDS = (
    "night day river city dark light last first king queen road home star "
    "storm heart blood stone ghost dream game love war town island secret "
    "summer winter house man woman child shadow fire water sky moon sun "
    "story legend hunter return journey island garden escape mirror voice"
).split()
RATING_BASE = 1.0
SYLLABLES = "ka ri to mo na lu ve si dor pel an ex zu bra qui fen ol tar mi ro".split()
AGES = [1, 18, 25, 35, 45, 50, 56]


def made_up_word(rng):
    return "".join(rng.choice(SYLLABLES) for _ in range(rng.randint(2, 3)))


def utility(movie, history, taste, window, novelty):
    recent = history[-window:] if window else []
    total = 0.0
    for genre in movie[2]:
        count = sum(1 for genres in recent if genre in genres)
        total += taste[genre] + novelty / (count + 1)
    return movie[3] + total / len(movie[2])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "fixture"))
    ap.add_argument("--seed", type=int, default=20201)
    ap.add_argument("--users", type=int, default=40)
    ap.add_argument("--movies", type=int, default=300)
    ap.add_argument("--min-len", type=int, default=20)
    ap.add_argument("--max-len", type=int, default=60)
    ap.add_argument("--novelty", type=float, default=3.0,
                    help="mean weight of genre freshness in a user's utility")
    ap.add_argument("--choosiness", type=float, default=3.0,
                    help="softmax sharpness of the choice among unseen movies")
    ap.add_argument("--quality-sd", type=float, default=0.8)
    ap.add_argument("--zipf", type=float, default=1.0)
    ap.add_argument("--taste", type=float, default=0.6)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    os.makedirs(args.out, exist_ok=True)

    movies = []
    for mid in range(1, args.movies + 1):
        n_genres = rng.choices([1, 2, 3], weights=[55, 30, 15])[0]
        genres = rng.sample(GENRES, n_genres)
        # A made-up name word keeps titles distinctive, as real titles are.
        words = [made_up_word(rng)] + rng.sample(WORDS, rng.randint(0, 2))
        rng.shuffle(words)
        title = " ".join(w.capitalize() for w in words)
        if rng.random() < 0.2:
            title = "The " + title
        title = f"{title} ({rng.randint(1930, 2000)})"
        quality = rng.gauss(0.0, args.quality_sd)
        # Zipf-like exposure: a few movies are widely seen, most are obscure.
        exposure = 1.0 / (rng.random() * args.movies + 1.0) ** args.zipf
        movies.append((mid, title, genres, quality, exposure))
    # One non-ASCII title to exercise Latin-1 decoding.
    movies[6] = (movies[6][0], "Café Society (1995)") + movies[6][2:]

    with open(os.path.join(args.out, "movies.dat"), "wb") as f:
        for mid, title, genres, *_ in movies:
            f.write(f"{mid}::{title}::{'|'.join(genres)}\n".encode("latin-1"))

    # Tastes are shared within a (gender, age) group so demographics carry signal.
    tastes = {(g, a): rng.sample(GENRES, 4) for g in "MF" for a in AGES}

    with open(os.path.join(args.out, "users.dat"), "wb") as f, \
         open(os.path.join(args.out, "ratings.dat"), "wb") as r:
        for uid in range(1, args.users + 1):
            gender = "M" if rng.random() < 0.7 else "F"
            age = rng.choice(AGES)
            f.write(f"{uid}::{gender}::{age}::{rng.randint(0, 20)}::{rng.randint(10000, 99999)}\n".encode("latin-1"))

            group = tastes[(gender, age)]
            liked = set(rng.sample(group, 3)) | {rng.choice(GENRES)}
            taste = {g: (args.taste if g in liked else -args.taste) for g in GENRES}
            window = rng.randint(5, 25)
            novelty = args.novelty * rng.uniform(0.5, 1.5)
            harshness = rng.gauss(0.0, 0.4)
            length = rng.randint(args.min_len, args.max_len)
            t = 978300000 + uid * 100000
            history = []
            seen = set()
            for _ in range(length):
                pool = [m for m in movies if m[0] not in seen]
                weights = [m[4] * math.exp(args.choosiness * utility(m, history, taste, window, novelty)) for m in pool]
                movie = rng.choices(pool, weights=weights)[0]
                u = utility(movie, history, taste, window, novelty)
                seen.add(movie[0])
                history.append(set(movie[2]))
                score = RATING_BASE + u - harshness + rng.gauss(0.0, 0.5)
                rating = max(1, min(5, int(round(score))))
                t += rng.randint(1, 5000)
                r.write(f"{uid}::{movie[0]}::{rating}::{t}\n".encode("latin-1"))


if __name__ == "__main__":
    main()
