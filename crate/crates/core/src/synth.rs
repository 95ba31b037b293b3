//! Seeded generator for a talk-page style toxicity corpus.
//!
//! Used where no real labeled corpus is available: tests, benchmarks and
//! demos. Documents mimic wiki talk-page comments. The bullying class is a
//! small minority and comes in two forms: explicit (insult vocabulary) and
//! implicit (hostile phrasing built from everyday words), so a bag-of-words
//! model finds the first easy and the second hard. Benign comments
//! occasionally use insult words in a harmless sense, and a small share of
//! labels is flipped to model annotator disagreement.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Corpus, Label, LabeledDocument};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    /// Share of bullying documents before label noise.
    pub toxic_fraction: f64,
    /// Share of bullying documents that avoid insult vocabulary.
    pub implicit_fraction: f64,
    /// Share of benign documents that mention an insult word harmlessly.
    pub benign_mention_fraction: f64,
    /// Share of benign documents with an exasperated aside.
    pub benign_tone_fraction: f64,
    /// Probability that a label is flipped.
    pub label_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            toxic_fraction: 0.08,
            implicit_fraction: 0.55,
            benign_mention_fraction: 0.06,
            benign_tone_fraction: 0.12,
            label_noise: 0.02,
        }
    }
}

const NOUNS: &[&str] = &[
    "article", "page", "section", "source", "citation", "reference", "edit", "revision", "template",
    "infobox", "category", "paragraph", "image", "link", "wording", "lead", "consensus", "policy",
    "guideline", "draft", "discussion", "archive", "sentence", "claim", "date", "list", "table",
    "summary", "photo", "map", "author", "book", "journal", "website", "footnote", "quote",
    "biography", "timeline", "caption", "title", "header", "redirect", "stub", "topic", "census",
    "album", "election", "season", "species", "battle", "league", "river", "village", "museum",
];

const VERBS: &[&str] = &[
    "added", "removed", "reverted", "fixed", "updated", "moved", "merged", "cited", "checked",
    "expanded", "rewrote", "restored", "tagged", "proposed", "archived", "trimmed", "sourced",
    "corrected", "clarified", "formatted", "linked", "renamed", "split", "reviewed", "verified",
];

const ADJECTIVES: &[&str] = &[
    "reliable", "unsourced", "notable", "accurate", "neutral", "biased", "outdated", "relevant",
    "minor", "major", "recent", "original", "good", "better", "clear", "wrong", "incorrect",
    "confusing", "detailed", "short", "long", "missing", "duplicate", "official", "primary",
    "secondary", "broken", "dead", "current", "historical",
];

const TOPICS: &[&str] = &[
    "history", "football", "music", "science", "geography", "politics", "chemistry", "cricket",
    "architecture", "railways", "aviation", "literature", "film", "television", "astronomy",
    "botany", "economics", "religion", "mythology", "medicine",
];

const OPENERS: &[&str] = &[
    "I think", "In my opinion", "As far as I can tell", "Per the guideline", "Just a note,",
    "Thanks,", "Hello,", "Please note", "I agree that", "I disagree,", "Looking at the history,",
    "For what it is worth,", "Quick question:", "Sorry, but", "Honestly,",
];

const INSULTS: &[&str] = &[
    "idiot", "stupid", "moron", "loser", "dumb", "pathetic", "worthless", "ugly", "jerk", "fool",
    "clown", "freak", "trash", "garbage", "cretin", "imbecile", "scum", "liar", "coward", "creep",
    "crap", "sucks", "hate", "disgusting", "ignorant", "retarded", "fat", "lame", "nerd", "troll",
];

const HOSTILE: &[&str] = &[
    "nobody wants you here",
    "go away and never come back",
    "you should be ashamed of yourself",
    "get lost",
    "everyone is laughing at you",
    "do the world a favor and leave",
    "you will regret this",
    "keep your mouth shut",
    "no one cares what you think",
    "crawl back under your rock",
    "you are a waste of space",
    "i hope you get banned forever",
    "people like you ruin everything",
    "who even let you edit",
    "stop embarrassing yourself",
];

const HARMLESS_MENTIONS: &[&str] = &[
    "that was a stupid mistake on my part",
    "the vandal who wrote idiot there was blocked",
    "remove the garbage characters in the table",
    "the album title is literally loser",
    "a troll account keeps adding spam",
    "i hate to say it but the source is weak",
    "the character is described as a fool in the play",
    "the crap formatting came from a bot",
];

/// Exasperated asides seen in heated but civil disputes as well as in attacks.
const TONE: &[&str] = &[
    "seriously", "again", "really", "honestly", "unbelievable", "whatever", "enough",
    "stop", "always", "never", "you people", "for the last time", "read the policy",
    "do not touch", "leave it alone", "are you kidding",
];

const SYLLABLES: &[&str] = &[
    "ka", "ro", "vin", "mel", "tor", "ad", "li", "sen", "bra", "quo", "ne", "dal", "us", "gri", "fen",
    "os", "tam", "pi", "zel", "hu", "mar", "ek", "sol", "vi", "dra", "lo", "nix", "bel", "cor", "an",
];

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool.choose(rng).copied().expect("pool is non-empty")
}

/// A made-up proper noun: the long tail of names and places that real
/// talk pages are full of.
fn proper_noun(rng: &mut ChaCha8Rng) -> String {
    let mut word: String = (0..rng.gen_range(2..4)).map(|_| pick(rng, SYLLABLES)).collect();
    if let Some(first) = word.get_mut(0..1) {
        first.make_ascii_uppercase();
    }
    word
}

fn benign_sentence(rng: &mut ChaCha8Rng) -> String {
    let sentence = plain_sentence(rng);
    if rng.gen_bool(0.5) {
        format!("{sentence} See {}.", proper_noun(rng))
    } else {
        sentence
    }
}

fn plain_sentence(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..6) {
        0 => format!(
            "{} the {} {} is {} and should be {}.",
            pick(rng, OPENERS),
            pick(rng, TOPICS),
            pick(rng, NOUNS),
            pick(rng, ADJECTIVES),
            pick(rng, VERBS)
        ),
        1 => format!(
            "I {} the {} in the {} section, see the {} {}.",
            pick(rng, VERBS),
            pick(rng, NOUNS),
            pick(rng, NOUNS),
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS)
        ),
        2 => format!(
            "Can someone check whether the {} {} is {}? It was {} in {}.",
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS),
            pick(rng, ADJECTIVES),
            pick(rng, VERBS),
            rng.gen_range(1900..2024)
        ),
        3 => format!(
            "{} you {} the {} but the {} is still {}.",
            pick(rng, OPENERS),
            pick(rng, VERBS),
            pick(rng, NOUNS),
            pick(rng, NOUNS),
            pick(rng, ADJECTIVES)
        ),
        4 => format!(
            "The {} {} {} page needs a {} {}.",
            pick(rng, TOPICS),
            pick(rng, NOUNS),
            pick(rng, NOUNS),
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS)
        ),
        _ => format!(
            "Thanks for the {} {}, I {} it and {} the {}.",
            pick(rng, ADJECTIVES),
            pick(rng, NOUNS),
            pick(rng, VERBS),
            pick(rng, VERBS),
            pick(rng, NOUNS)
        ),
    }
}

fn explicit_sentence(rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..5) {
        0 => format!("you are a {} {}", pick(rng, INSULTS), pick(rng, INSULTS)),
        1 => format!("your {} is {} and you are a {}", pick(rng, NOUNS), pick(rng, INSULTS), pick(rng, INSULTS)),
        2 => format!("what a {} thing to do, {}", pick(rng, INSULTS), pick(rng, INSULTS)),
        3 => format!("{}! stop touching my {}", pick(rng, INSULTS), pick(rng, NOUNS)),
        _ => format!("only a {} would write this {}", pick(rng, INSULTS), pick(rng, NOUNS)),
    }
}

fn document(rng: &mut ChaCha8Rng, label: Label, config: &SynthConfig) -> String {
    let mut parts: Vec<String> = Vec::new();
    match label {
        Label::NonBullying => {
            for _ in 0..rng.gen_range(1..4) {
                parts.push(benign_sentence(rng));
            }
            if rng.gen_bool(config.benign_mention_fraction) {
                parts.push(pick(rng, HARMLESS_MENTIONS).to_string());
            }
            if rng.gen_bool(config.benign_tone_fraction) {
                parts.push(format!("{}.", pick(rng, TONE)));
            }
        }
        Label::Bullying => {
            if rng.gen_bool(config.implicit_fraction) {
                // passive-aggressive: civil content, hostile tone
                parts.push(benign_sentence(rng));
                parts.push(format!("{}, {}.", pick(rng, TONE), pick(rng, TONE)));
                if rng.gen_bool(0.4) {
                    parts.push(pick(rng, HOSTILE).to_string());
                }
            } else {
                parts.push(explicit_sentence(rng));
            }
            // context from the dispute the comment is part of
            for _ in 0..rng.gen_range(0..3) {
                parts.push(benign_sentence(rng));
            }
        }
    }
    parts.shuffle(rng);
    let mut text = parts.join(" ");
    if label == Label::Bullying && rng.gen_bool(0.3) {
        text = text.to_uppercase();
    }
    text
}

/// `n` documents, deterministic in `seed`.
pub fn generate(n: usize, seed: u64, config: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let label = if rng.gen_bool(config.toxic_fraction) {
                Label::Bullying
            } else {
                Label::NonBullying
            };
            let text = document(&mut rng, label, config);
            let observed = if rng.gen_bool(config.label_noise) {
                Label::from_index(1 - label.index()).expect("binary label")
            } else {
                label
            };
            LabeledDocument::new(text, observed).expect("generated text is non-empty")
        })
        .collect()
}

/// Chat-style messages for load tests: mostly benign, some bullying.
pub fn messages(n: usize, seed: u64) -> Vec<String> {
    let config = SynthConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let label = if rng.gen_bool(0.25) { Label::Bullying } else { Label::NonBullying };
            document(&mut rng, label, &config)
        })
        .collect()
}

/// Serializes a corpus as `text,oh_label` CSV.
pub fn to_csv(corpus: &Corpus) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(["text", "oh_label"])
        .expect("in-memory write");
    for doc in corpus.docs() {
        writer
            .write_record([doc.text(), &doc.label().to_string()])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv of utf-8 input is utf-8")
}
