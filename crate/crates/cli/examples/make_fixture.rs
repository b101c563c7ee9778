//! Writes the small planted-topic corpus used by the CLI tests.
//!
//! Usage: `cargo run -p atlas-cli --example make_fixture -- <dir>`

use std::fs;
use std::path::PathBuf;

use atlas_core::corpus::{persist_corpus, AuthorQuery, Corpus, PublicationRecord};
use chrono::{TimeZone, Utc};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOPICS: [(&str, &[&str]); 3] = [
    (
        "neuro",
        &[
            "neuron", "synapse", "cortex", "dendrite", "axon", "hippocampus", "plasticity", "glia", "spike",
            "thalamus", "dopamine", "serotonin", "cerebellum", "interneuron", "myelin", "potentiation", "retina",
            "astrocyte", "neurotransmitter", "electrophysiology", "amygdala", "striatum", "oscillation", "gaba",
            "glutamate", "connectome", "optogenetic", "memory", "learning", "behavior",
        ],
    ),
    (
        "ecology",
        &[
            "forest", "species", "habitat", "predator", "biodiversity", "pollinator", "wetland", "canopy",
            "savanna", "migration", "ecosystem", "drought", "rainfall", "grassland", "herbivore", "coral", "reef",
            "fishery", "seedling", "invasive", "watershed", "carbon", "nitrogen", "soil", "climate", "warming",
            "landscape", "fragmentation", "abundance", "dispersal",
        ],
    ),
    (
        "materials",
        &[
            "polymer", "alloy", "crystal", "lattice", "graphene", "ceramic", "catalyst", "oxide", "nanoparticle",
            "semiconductor", "perovskite", "annealing", "grain", "dislocation", "thin", "film", "deposition",
            "spectroscopy", "diffraction", "bandgap", "dielectric", "ferroelectric", "magnet", "superconductor",
            "composite", "fracture", "hardness", "corrosion", "electrode", "battery",
        ],
    ),
];

const GENERAL: &[&str] = &[
    "model", "data", "method", "analysis", "result", "effect", "measurement", "approach", "sample", "experiment",
    "response", "increase", "change", "structure", "function", "rate", "level", "system", "condition", "process",
    "pattern", "property", "performance", "design", "framework", "evidence", "variation", "dynamic", "signal",
    "network", "observation", "estimate", "simulation", "theory", "parameter", "factor", "mechanism", "field",
    "scale", "time",
];

const AUTHORS_PER_TOPIC: usize = 4;
const RECORDS_PER_AUTHOR: usize = 6;
const WORDS_PER_ABSTRACT: usize = 45;
const TOPIC_SHARE: f64 = 0.6;

/// Word ranks drawn with probability proportional to `1 / rank`.
fn zipf_weights(n: usize) -> WeightedIndex<f64> {
    WeightedIndex::new((1..=n).map(|r| 1.0 / r as f64)).expect("positive weights")
}

fn main() -> anyhow::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("fixtures/small"));
    fs::create_dir_all(&dir)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut authors = Vec::new();
    let mut records = Vec::new();
    let mut groups = String::from("author_id,group\n");
    let mut queries = String::from("author_id,display_name,query\n");
    let mut pmid = 10_000_000u64;
    let general_draw = zipf_weights(GENERAL.len());
    for (t, (group, words)) in TOPICS.iter().enumerate() {
        let topic_start = records.len();
        let topic_draw = zipf_weights(words.len());
        for a in 0..AUTHORS_PER_TOPIC {
            let id = format!("A{:02}", t * AUTHORS_PER_TOPIC + a + 1);
            let name = format!("Researcher {}{}", (b'A' + t as u8) as char, a + 1);
            let query = format!("Researcher {}{}[Author]", (b'A' + t as u8) as char, a + 1);
            queries.push_str(&format!("{id},{name},{query}\n"));
            groups.push_str(&format!("{id},{group}\n"));
            authors.push(AuthorQuery { author_id: id.clone(), display_name: name, query });
            for p in 0..RECORDS_PER_AUTHOR {
                pmid += 1;
                let body: Vec<&str> = (0..WORDS_PER_ABSTRACT)
                    .map(|_| {
                        if rng.gen_bool(TOPIC_SHARE) {
                            words[topic_draw.sample(&mut rng)]
                        } else {
                            GENERAL[general_draw.sample(&mut rng)]
                        }
                    })
                    .collect();
                let title: Vec<&str> = (0..5).map(|_| words[topic_draw.sample(&mut rng)]).collect();
                // The last record of every second author has no abstract.
                let abstract_text = if p == RECORDS_PER_AUTHOR - 1 && a % 2 == 1 {
                    String::new()
                } else {
                    format!("{}.", body.join(" "))
                };
                records.push(PublicationRecord {
                    record_id: pmid.to_string(),
                    title: title.join(" "),
                    abstract_text,
                    keywords: vec![words[t * 3 % words.len()].to_string()],
                    authors: vec![format!("Researcher {}{}", (b'A' + t as u8) as char, a + 1)],
                    author_id: id.clone(),
                });
            }
        }
        // A record co-authored by the first two authors of the topic appears under both.
        let shared = records[topic_start].clone();
        let coauthor = authors[t * AUTHORS_PER_TOPIC + 1].author_id.clone();
        records.push(PublicationRecord { author_id: coauthor, ..shared });
    }
    let corpus = Corpus::new(authors, records, Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap())?;
    persist_corpus(&corpus, dir.join("corpus.json"))?;
    fs::write(dir.join("queries.csv"), queries)?;
    fs::write(dir.join("groups.csv"), groups)?;
    fs::write(
        dir.join("atlas.toml"),
        "corpus = \"corpus.json\"\nqueries = \"queries.csv\"\ngroups = \"groups.csv\"\noutput_dir = \"out\"\n\
         vocab_size = 100\nseed = 11\n\n[umap]\nn_neighbors = 10\nn_epochs = 200\n\n[graph]\nk = 3\n\
         louvain_replicates = 10\nnull_replicates = 200\ntop_words = 5\nmin_word_count = 3\n\n[report]\n\
         term_pairs = [[\"neuron\", \"synapse\"], [\"forest\", \"polymer\"]]\n",
    )?;
    Ok(())
}
