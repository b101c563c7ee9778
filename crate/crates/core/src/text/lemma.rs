//! Rule-based plural lemmatizer.

/// Irregular plurals and Latin/Greek forms common in biomedical text.
const IRREGULAR: &[(&str, &str)] = &[
    ("alumni", "alumnus"),
    ("analyses", "analysis"),
    ("appendices", "appendix"),
    ("axes", "axis"),
    ("bacteria", "bacterium"),
    ("calves", "calf"),
    ("children", "child"),
    ("crises", "crisis"),
    ("criteria", "criterion"),
    ("diagnoses", "diagnosis"),
    ("emphases", "emphasis"),
    ("feet", "foot"),
    ("fetuses", "fetus"),
    ("foci", "focus"),
    ("fungi", "fungus"),
    ("geese", "goose"),
    ("genera", "genus"),
    ("halves", "half"),
    ("hypotheses", "hypothesis"),
    ("indices", "index"),
    ("knives", "knife"),
    ("larvae", "larva"),
    ("leaves", "leaf"),
    ("lives", "life"),
    ("loci", "locus"),
    ("matrices", "matrix"),
    ("men", "man"),
    ("metastases", "metastasis"),
    ("mice", "mouse"),
    ("nuclei", "nucleus"),
    ("parentheses", "parenthesis"),
    ("phenomena", "phenomenon"),
    ("prognoses", "prognosis"),
    ("radii", "radius"),
    ("selves", "self"),
    ("sinuses", "sinus"),
    ("stimuli", "stimulus"),
    ("syntheses", "synthesis"),
    ("teeth", "tooth"),
    ("theses", "thesis"),
    ("vertebrae", "vertebra"),
    ("viruses", "virus"),
    ("wives", "wife"),
    ("women", "woman"),
];

/// Tokens that end in `s` but are not plurals (acronyms, mass nouns, adverbs).
const PROTECTED: &[&str] = &[
    "aids", "alias", "als", "always", "atlas", "bias", "canvas", "diabetes", "does", "herpes",
    "hras", "kras", "lens", "measles", "mers", "mumps", "news", "ngs", "nras", "pancreas",
    "perhaps", "rabies", "sars", "scabies", "series", "species", "thus", "towards", "whereas",
];

fn irregular(token: &str) -> Option<&'static str> {
    IRREGULAR
        .binary_search_by(|(k, _)| k.cmp(&token))
        .ok()
        .map(|i| IRREGULAR[i].1)
}

fn is_protected(token: &str) -> bool {
    PROTECTED.binary_search(&token).is_ok()
}

fn step(token: &str) -> String {
    if is_protected(token) {
        return token.to_string();
    }
    if let Some(lemma) = irregular(token) {
        return lemma.to_string();
    }
    if token.chars().count() <= 3 {
        return token.to_string();
    }
    if let Some(stem) = token.strip_suffix("ies") {
        if token.len() > 4 {
            return format!("{stem}y");
        }
    }
    for suffix in ["sses", "xes", "zzes", "ches", "shes"] {
        if token.ends_with(suffix) {
            return token[..token.len() - 2].to_string();
        }
    }
    if ["ss", "us", "is"].iter().any(|s| token.ends_with(s)) {
        return token.to_string();
    }
    match token.strip_suffix('s') {
        Some(stem) => stem.to_string(),
        None => token.to_string(),
    }
}

/// Reduces a lower-case token to its singular form. Applied to a fixpoint, so
/// `lemmatize(lemmatize(t)) == lemmatize(t)`.
pub fn lemmatize(token: &str) -> String {
    let mut current = token.to_string();
    for _ in 0..4 {
        let next = step(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}
