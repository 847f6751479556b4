//! Seeded synthetic data: tweets in the labelled-tweet format, news-like
//! articles, predictions and death series. Used by demos, benches and tests
//! when the real corpora are not at hand.

use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Article, DeathSeries, Quarter};
use crate::labels::{LabelVector, ScoreVector, SentimentLabel, NUM_LABELS};
use crate::prediction::Prediction;
use crate::senwave::LabeledTweet;

/// Rough per-label prevalence of the tweet generator, canonical order.
pub const TWEET_PREVALENCE: [f64; NUM_LABELS] = [0.20, 0.07, 0.05, 0.12, 0.15, 0.10, 0.30, 0.04, 0.20, 0.25];

const CUES: [&[&str]; NUM_LABELS] = [
    &[
        "hope",
        "we will recover",
        "better days ahead",
        "stay strong",
        "light at the end",
        "so proud",
    ],
    &[
        "thank you",
        "grateful",
        "thanks to the nurses",
        "appreciate",
        "real heroes",
    ],
    &[
        "so sorry",
        "thoughts with",
        "condolences",
        "my heart goes out",
        "praying for",
    ],
    &["getting worse", "never going to end", "hopeless", "doomed", "collapse"],
    &["worried", "scared", "afraid", "nervous about", "panic"],
    &["so sad", "heartbroken", "tears", "lost my", "grief"],
    &["ridiculous", "fed up", "stupid", "so annoying", "idiots"],
    &["hoax", "fake news", "overblown", "not real", "just a flu"],
    &[
        "confirmed cases",
        "ministry reports",
        "official update",
        "according to",
        "new deaths reported",
    ],
    &["lol", "haha", "funny", "meme", "toilet paper joke"],
];

const FILLER: &[&str] = &[
    "covid",
    "virus",
    "lockdown",
    "today",
    "people",
    "home",
    "masks",
    "quarantine",
    "this week",
    "the news",
    "everyone",
    "outside",
    "shops",
    "work",
    "family",
    "city",
];

const DECOR: &[&str] = &[
    "#covid19",
    "#stayhome",
    "@someone",
    "😷",
    "🙏",
    "😂",
    "https://t.co/abc",
    "!!",
    "...",
];

/// `n` tweets with one to three labels each, written as raw text (mentions,
/// hashtags, emoji and links included).
pub fn synthetic_tweets(n: usize, seed: u64) -> Vec<LabeledTweet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| synthetic_tweet(&mut rng)).collect()
}

fn synthetic_tweet(rng: &mut ChaCha8Rng) -> LabeledTweet {
    let mut labels = LabelVector::default();
    for label in SentimentLabel::ALL {
        if rng.gen::<f64>() < TWEET_PREVALENCE[label.index()] * 0.8 {
            labels.set(label, true);
        }
    }
    if labels.is_empty() {
        let total: f64 = TWEET_PREVALENCE.iter().sum();
        let mut pick = rng.gen::<f64>() * total;
        let mut chosen = SentimentLabel::Annoyed;
        for label in SentimentLabel::ALL {
            pick -= TWEET_PREVALENCE[label.index()];
            if pick <= 0.0 {
                chosen = label;
                break;
            }
        }
        labels.set(chosen, true);
    }
    let mut parts: Vec<&str> = Vec::new();
    for label in labels.labels() {
        parts.push(CUES[label.index()].choose(rng).expect("cues"));
    }
    // cue from an absent label, so that words alone do not decide the labels
    if rng.gen::<f64>() < 0.15 {
        let other = SentimentLabel::ALL[rng.gen_range(0..NUM_LABELS)];
        if !labels.get(other) {
            parts.push(CUES[other.index()].choose(rng).expect("cues"));
        }
    }
    for _ in 0..rng.gen_range(2..6) {
        parts.push(FILLER.choose(rng).expect("filler"));
    }
    parts.shuffle(rng);
    if rng.gen::<f64>() < 0.4 {
        let at = rng.gen_range(0..=parts.len());
        parts.insert(at, DECOR.choose(rng).expect("decor"));
    }
    let mut text = parts.join(" ");
    if rng.gen::<f64>() < 0.5 {
        let mut c = text.chars();
        if let Some(first) = c.next() {
            text = first.to_uppercase().collect::<String>() + c.as_str();
        }
    }
    LabeledTweet { text, labels }
}

const PANDEMIC_SENTENCES: &[&str] = &[
    "The government in {country} said its public health response to the coronavirus outbreak would be reviewed.",
    "Officials announced {n} new infections on {weekday}, including a confirmed case in {city}.",
    "The chief medical officer urged the public to follow public health advice and wash their hands.",
    "Hospitals in {city} are preparing for a surge of patients as the coronavirus outbreak spreads.",
    "A confirmed case linked to a cruise ship was announced by health authorities in {country}.",
    "Public health experts warned that travel restrictions alone would not contain the virus.",
    "Flights to {country} were suspended after the coronavirus outbreak reached {city}.",
    "Stocks of personal protective equipment are running low in several hospitals.",
    "The World Health Organization described the situation as a public health emergency of international concern.",
    "Schools in {city} closed after a confirmed case among teachers.",
    "Markets fell sharply amid fears about the economic cost of the coronavirus outbreak.",
    "Residents of {city} queued for hours at testing centres.",
    "Doctors in {city} described wards filling faster than expected.",
    "Volunteers delivered food parcels to elderly residents isolating at home.",
];

const GENERAL_SENTENCES: &[&str] = &[
    "Voters in {city} went to the polls in a closely watched election.",
    "Protesters gathered outside the parliament in {city} to demand reforms.",
    "Trade talks between {country} and its neighbours stalled again on {weekday}.",
    "Bushfires continued to burn across large areas, forcing residents to evacuate.",
    "The opposition leader called for an inquiry into the minister's conduct.",
    "Climate scientists said the heatwave broke records across the region.",
    "The central bank left interest rates unchanged after a long meeting.",
    "Farmers in {country} warned that the drought was pushing them to the brink.",
    "A new housing policy drew criticism from tenants' groups in {city}.",
    "Rail workers in {city} began a strike over pay and conditions.",
];

const COUNTRIES: &[&str] = &[
    "China",
    "Italy",
    "Iran",
    "Australia",
    "Britain",
    "Spain",
    "Japan",
    "Canada",
];
const CITIES: &[&str] = &[
    "Wuhan",
    "Milan",
    "Sydney",
    "London",
    "Madrid",
    "Tokyo",
    "Toronto",
    "Melbourne",
    "Manchester",
];
const WEEKDAYS: &[&str] = &["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"];

/// Settings of [`synthetic_articles`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArticleSpec {
    pub count: usize,
    pub sections: Vec<String>,
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Share of sentences drawn from pandemic coverage from 2020 on.
    pub pandemic_share: f64,
    pub seed: u64,
}

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    template
        .replace("{country}", COUNTRIES.choose(rng).expect("countries"))
        .replace("{city}", CITIES.choose(rng).expect("cities"))
        .replace("{weekday}", WEEKDAYS.choose(rng).expect("weekdays"))
        .replace("{n}", &rng.gen_range(2..400).to_string())
}

/// News-like articles with dates uniform over `start..=end` and sections
/// drawn uniformly from `spec.sections`. Ids are `a0001`, `a0002`, ...
pub fn synthetic_articles(spec: &ArticleSpec) -> Vec<Article> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let days = (spec.end - spec.start).num_days().max(0);
    (0..spec.count)
        .map(|i| {
            let date = spec.start + chrono::Duration::days(rng.gen_range(0..=days));
            let section = spec
                .sections
                .choose(&mut rng)
                .cloned()
                .unwrap_or_else(|| "World news".into());
            let pandemic = date.year() >= 2020;
            let sentences: Vec<String> = (0..rng.gen_range(6..12))
                .map(|_| {
                    let pool = if pandemic && rng.gen::<f64>() < spec.pandemic_share {
                        PANDEMIC_SENTENCES
                    } else {
                        GENERAL_SENTENCES
                    };
                    fill(pool.choose(&mut rng).expect("sentences"), &mut rng)
                })
                .collect();
            let title = sentences[0].split_whitespace().take(8).collect::<Vec<_>>().join(" ");
            Article {
                id: format!("a{:04}", i + 1),
                publication_date: date,
                section,
                title,
                body: sentences.join(" "),
            }
        })
        .collect()
}

/// The 200-article World news 2020-Q1 corpus used by the n-gram check.
pub fn world_news_2020_q1() -> Vec<Article> {
    synthetic_articles(&ArticleSpec {
        count: 200,
        sections: vec!["World news".into()],
        start: NaiveDate::from_ymd_opt(2020, 1, 1).expect("date"),
        end: NaiveDate::from_ymd_opt(2020, 3, 31).expect("date"),
        pandemic_share: 0.7,
        seed: 2020,
    })
}

/// One article per month from `first` to `last` inclusive (15th of each
/// month), cycling through `sections`.
pub fn monthly_articles(first: NaiveDate, last: NaiveDate, sections: &[&str]) -> Vec<Article> {
    let mut out = Vec::new();
    let mut date = NaiveDate::from_ymd_opt(first.year(), first.month(), 15).expect("date");
    let mut i = 0;
    while date <= last {
        out.push(Article {
            id: format!("m{:03}", i + 1),
            publication_date: date,
            section: sections[i % sections.len().max(1)].to_string(),
            title: format!("Monthly article {}", i + 1),
            body: format!("Coverage for {}.", date.format("%B %Y")),
        });
        i += 1;
        date = date.checked_add_months(chrono::Months::new(1)).expect("date");
    }
    out
}

/// Predictions with random scores for the given article ids.
pub fn synthetic_predictions<S: AsRef<str>>(ids: &[S], threshold: f32, seed: u64) -> Vec<Prediction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ids.iter()
        .map(|id| {
            let mut s = [0f32; NUM_LABELS];
            for v in &mut s {
                *v = rng.gen::<f32>();
            }
            let scores = ScoreVector::new(s).expect("unit interval");
            Prediction::new(id.as_ref(), scores, threshold, rng.gen_range(1..4))
        })
        .collect()
}

/// Quarterly deaths rising to a peak and falling again.
pub fn synthetic_deaths(region: &str, quarters: &[Quarter], seed: u64) -> DeathSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = quarters.len() as f64;
    let points = quarters
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let x = i as f64 / n.max(1.0);
            let base = 20_000.0 * (std::f64::consts::PI * x).sin().powi(2);
            (*q, (base * rng.gen_range(0.8..1.2)).round() as u64)
        })
        .collect();
    DeathSeries::new(region, points).expect("distinct quarters")
}
