//! Fixtures and brute-force oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rating_disparity::{BusinessReader, BusinessRecord, FeatureSet, StarDocument};

pub const BIN: &str = env!("CARGO_BIN_EXE_rating-disparity");

pub fn lexicon_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/lexicon_sample.tsv")
}

pub fn variant_taxonomy_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("config/taxonomy_alcohol_amenity.toml")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn set(names: &[&str]) -> FeatureSet {
    names.iter().map(|s| s.to_string()).collect()
}

/// The fourteen features both restaurants of the worked comparison share.
pub const PAIR_COMMON: [&str; 14] = [
    "hastv",
    "restaurantspricerange2",
    "noiselevel",
    "lot",
    "restaurantstakeout",
    "bikeparking",
    "businessacceptscreditcards",
    "dinner",
    "caters",
    "restaurantsgoodforgroups",
    "restaurantstableservice",
    "lunch",
    "restaurantsreservations",
    "casual",
];

/// Features only the first restaurant of the pair offers.
pub const PAIR_ONLY_FIRST: [&str; 5] = ["alcohol", "wifi", "outdoorseating", "restaurantsdelivery", "brunch"];

pub const PAIR_FIRST_ID: &str = "resto-one";
pub const PAIR_SECOND_ID: &str = "resto-two";

/// Business lines for the worked pair, written the way Yelp encodes attributes.
pub fn pair_business_lines() -> [String; 2] {
    let first = serde_json::json!({
        "business_id": PAIR_FIRST_ID,
        "name": "Restaurant One",
        "stars": 4.0,
        "review_count": 120,
        "categories": "American (New), Restaurants, Bars",
        "attributes": {
            "HasTV": "True",
            "RestaurantsPriceRange2": "2",
            "NoiseLevel": "u'average'",
            "BusinessParking": "{'garage': False, 'street': False, 'validated': False, 'lot': True, 'valet': False}",
            "RestaurantsTakeOut": "True",
            "BikeParking": "True",
            "BusinessAcceptsCreditCards": "True",
            "GoodForMeal": "{'dessert': False, 'latenight': False, 'lunch': True, 'dinner': True, 'brunch': True, 'breakfast': False}",
            "Caters": "True",
            "RestaurantsGoodForGroups": "True",
            "RestaurantsTableService": "True",
            "RestaurantsReservations": "True",
            "Ambience": "{'romantic': False, 'intimate': False, 'classy': False, 'hipster': False, 'divey': False, 'touristy': False, 'trendy': False, 'upscale': False, 'casual': True}",
            "Alcohol": "u'full_bar'",
            "WiFi": "u'free'",
            "OutdoorSeating": "True",
            "RestaurantsDelivery": "True",
            "GoodForKids": "False",
            "DogsAllowed": "False"
        }
    });
    let second = serde_json::json!({
        "business_id": PAIR_SECOND_ID,
        "name": "Restaurant Two",
        "stars": 4.5,
        "review_count": 80,
        "categories": "Restaurants, Mexican",
        "attributes": {
            "HasTV": "True",
            "RestaurantsPriceRange2": "1",
            "NoiseLevel": "'quiet'",
            "BusinessParking": "{'garage': False, 'street': False, 'validated': False, 'lot': True, 'valet': False}",
            "RestaurantsTakeOut": "True",
            "BikeParking": "True",
            "BusinessAcceptsCreditCards": "True",
            "GoodForMeal": "{'dessert': False, 'latenight': False, 'lunch': True, 'dinner': True, 'brunch': False, 'breakfast': False}",
            "Caters": "True",
            "RestaurantsGoodForGroups": "True",
            "RestaurantsTableService": "True",
            "RestaurantsReservations": "True",
            "Ambience": "{'romantic': False, 'intimate': False, 'classy': False, 'casual': True}",
            "Alcohol": "u'none'",
            "WiFi": "u'no'",
            "OutdoorSeating": "False",
            "RestaurantsDelivery": "False",
            "GoodForKids": "False"
        }
    });
    [first.to_string(), second.to_string()]
}

pub fn parse_business_lines(lines: &[String]) -> Vec<BusinessRecord> {
    let joined = lines.join("\n");
    BusinessReader::new(joined.as_bytes())
        .collect::<Result<Vec<_>, _>>()
        .expect("fixture parses")
}

/// Brute-force TF-IDF over a corpus of raw token lists.
pub fn oracle_tfidf(term: &str, doc: &[String], corpus: &[Vec<String>]) -> f64 {
    let tf = doc.iter().filter(|t| t.as_str() == term).count();
    if tf == 0 {
        return 0.0;
    }
    let df = corpus
        .iter()
        .filter(|d| d.iter().any(|t| t.as_str() == term))
        .count();
    tf as f64 * (corpus.len() as f64 / df as f64).ln()
}

/// Exhaustive top-k: weigh every vocabulary term, sort everything, cut.
pub fn oracle_top_terms(doc: &[String], corpus: &[Vec<String>], k: usize) -> Vec<(String, f64)> {
    let mut vocabulary: Vec<String> = doc.to_vec();
    vocabulary.sort();
    vocabulary.dedup();
    let mut all: Vec<(String, f64)> = vocabulary
        .into_iter()
        .map(|t| {
            let w = oracle_tfidf(&t, doc, corpus);
            (t, w)
        })
        .filter(|(_, w)| *w != 0.0)
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    all.into_iter().take(k).collect()
}

/// Direct-sum sentiment oracle over a list lexicon.
pub fn oracle_sentiment(terms: &[String], lexicon: &[(String, i8)]) -> i64 {
    let mut distinct = terms.to_vec();
    distinct.sort();
    distinct.dedup();
    let mut total = 0i64;
    for term in &distinct {
        for (entry, valence) in lexicon {
            if entry == term {
                total += i64::from(*valence);
            }
        }
    }
    total
}

pub fn star_document(id: &str, stars: u8, tokens: &[String]) -> StarDocument {
    let mut term_counts = BTreeMap::new();
    for t in tokens {
        *term_counts.entry(t.clone()).or_insert(0u32) += 1;
    }
    StarDocument {
        business_id: id.to_string(),
        stars,
        term_counts,
    }
}

/// Random corpus of at most `max_docs` documents over at most `max_terms` terms.
pub fn random_corpus(rng: &mut ChaCha8Rng, max_docs: usize, max_terms: usize) -> Vec<Vec<String>> {
    let vocab_size = rng.gen_range(1..=max_terms);
    let vocab: Vec<String> = (0..vocab_size).map(|i| format!("t{i:02}")).collect();
    let docs = rng.gen_range(1..=max_docs);
    (0..docs)
        .map(|_| {
            let len = rng.gen_range(0..=25);
            (0..len)
                .map(|_| vocab.choose(rng).unwrap().clone())
                .collect()
        })
        .collect()
}

pub const NEG_STRONG: [&str; 6] = ["awful", "terrible", "horrible", "worst", "disgusting", "boring"];
pub const NEG_MILD: [&str; 6] = ["disappointed", "poor", "dirty", "complain", "lame", "pathetic"];
pub const NEUTRAL: [&str; 6] = ["table", "menu", "order", "waiter", "plate", "evening"];
pub const POS_MILD: [&str; 6] = ["clean", "enjoy", "friendly", "helpful", "kind", "recommend"];
pub const POS_STRONG: [&str; 6] = ["amazing", "awesome", "fantastic", "outstanding", "superb", "perfect"];

/// Vocabulary for reviews at a given star level: valence sign follows the rating.
pub fn words_for_stars(stars: u8) -> &'static [&'static str] {
    match stars {
        1 => &NEG_STRONG,
        2 => &NEG_MILD,
        3 => &NEUTRAL,
        4 => &POS_MILD,
        _ => &POS_STRONG,
    }
}

/// A small pipeline fixture: the worked pair plus `extra` restaurants, one
/// non-restaurant, and reviews at every star level.
pub fn write_pipeline_fixture(dir: &Path, extra: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut rng = rng(seed);
    let mut business_lines: Vec<String> = pair_business_lines().to_vec();
    let attributes = [
        ("HasTV", "True"),
        ("WiFi", "u'free'"),
        ("Caters", "False"),
        ("BikeParking", "True"),
        ("RestaurantsTakeOut", "True"),
        ("Alcohol", "u'beer_and_wine'"),
    ];
    let mut ids = vec![PAIR_FIRST_ID.to_string(), PAIR_SECOND_ID.to_string()];
    for i in 0..extra {
        let id = format!("extra-{i:03}");
        let mut attrs = serde_json::Map::new();
        for (k, v) in attributes.iter().take(i % attributes.len() + 1) {
            attrs.insert(k.to_string(), serde_json::Value::String(v.to_string()));
        }
        business_lines.push(
            serde_json::json!({
                "business_id": id,
                "name": format!("Extra {i}"),
                "stars": 3.5,
                "review_count": 10,
                "categories": "Restaurants, Pizza",
                "attributes": attrs,
            })
            .to_string(),
        );
        ids.push(id);
    }
    business_lines.push(
        r#"{"business_id":"salon-1","name":"Salon","stars":5.0,"categories":"Beauty & Spas","attributes":{"WiFi":"u'free'"}}"#
            .to_string(),
    );

    let mut review_lines = Vec::new();
    let mut n = 0;
    for id in &ids {
        for stars in 1..=5u8 {
            for _ in 0..2 {
                let words = words_for_stars(stars);
                let text: Vec<&str> = (0..6).map(|_| *words.choose(&mut rng).unwrap()).collect();
                review_lines.push(
                    serde_json::json!({
                        "review_id": format!("r{n:05}"),
                        "user_id": format!("u{}", n % 7),
                        "business_id": id,
                        "stars": f64::from(stars),
                        "text": format!("The {}!", text.join(" ")),
                        "date": "2017-06-01 12:00:00",
                    })
                    .to_string(),
                );
                n += 1;
            }
        }
    }
    review_lines.push(
        r#"{"review_id":"rs","user_id":"u1","business_id":"salon-1","stars":5.0,"text":"great cut"}"#
            .to_string(),
    );

    let business = dir.join("business.json");
    let reviews = dir.join("review.json");
    fs::write(&business, business_lines.join("\n") + "\n").unwrap();
    fs::write(&reviews, review_lines.join("\n") + "\n").unwrap();
    (business, reviews)
}

pub fn run_cli(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs ingest → rank → score on a workspace, panicking on any failure.
pub fn run_pipeline(business: &Path, reviews: &Path, ws: &Path, cutoff: usize, k: usize) {
    let out = run_cli(&[
        "ingest",
        "--business",
        path_str(business),
        "--reviews",
        path_str(reviews),
        "--workspace",
        path_str(ws),
    ]);
    assert!(out.status.success(), "ingest: {}", String::from_utf8_lossy(&out.stderr));
    let out = run_cli(&["rank", "--workspace", path_str(ws), "--cutoff", &cutoff.to_string()]);
    assert!(out.status.success(), "rank: {}", String::from_utf8_lossy(&out.stderr));
    let lexicon = lexicon_path();
    let out = run_cli(&[
        "score",
        "--workspace",
        path_str(ws),
        "--lexicon",
        path_str(&lexicon),
        "--k",
        &k.to_string(),
    ]);
    assert!(out.status.success(), "score: {}", String::from_utf8_lossy(&out.stderr));
}
