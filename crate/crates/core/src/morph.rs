//! English morphology heuristics: verb reinflection, noun number, indefinite
//! articles.
//!
//! Deliberately shallow — a small irregular table plus suffix rules. The
//! generated sentences only ever need agreement fixes on words already
//! present in the source, so coverage of the long tail of English morphology
//! is a non-goal; unknown shapes fall back to the input form unchanged.

/// Target verb form for [`reinflect_verb`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbTarget {
    /// Third-person singular present ("colonizes", "is").
    Singular3rd,
    /// Plural / non-third-singular present ("colonize", "are").
    Plural,
    /// Bare infinitive, as used under do-support ("colonize", "be").
    Base,
}

/// Target noun number for [`reinflect_noun`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NounTarget {
    Singular,
    Plural,
}

// (3rd-singular, plural, base) for verbs whose forms are not suffix-derivable.
// Keyed by any of their finite present/past forms; tense is preserved for
// be-forms so "were" becomes "was", not "is".
const IRREGULAR_VERBS: &[(&str, &str, &str, &str)] = &[
    ("is", "is", "are", "be"),
    ("are", "is", "are", "be"),
    ("am", "is", "are", "be"),
    ("was", "was", "were", "be"),
    ("were", "was", "were", "be"),
    ("has", "has", "have", "have"),
    ("have", "has", "have", "have"),
    ("does", "does", "do", "do"),
    ("do", "does", "do", "do"),
    ("goes", "goes", "go", "go"),
    ("go", "goes", "go", "go"),
];

// singular ↔ plural noun pairs that the suffix rules would get wrong.
const IRREGULAR_NOUNS: &[(&str, &str)] = &[
    ("man", "men"),
    ("woman", "women"),
    ("child", "children"),
    ("person", "people"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("goose", "geese"),
    ("mouse", "mice"),
    ("louse", "lice"),
    ("ox", "oxen"),
    ("life", "lives"),
    ("leaf", "leaves"),
    ("loaf", "loaves"),
    ("knife", "knives"),
    ("wife", "wives"),
    ("wolf", "wolves"),
    ("half", "halves"),
    ("calf", "calves"),
    ("shelf", "shelves"),
    ("thief", "thieves"),
    ("scarf", "scarves"),
    ("species", "species"),
    ("series", "series"),
    ("sheep", "sheep"),
    ("fish", "fish"),
    ("deer", "deer"),
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Re-apply the capitalization shape of `model` to `word`: if `model`
/// started uppercase, uppercase the first character of `word`.
fn match_case(word: String, model: &str) -> String {
    if model.chars().next().is_some_and(|c| c.is_uppercase()) {
        capitalize_first(&word)
    } else {
        word
    }
}

/// Uppercase the first character, leaving the rest untouched.
pub fn capitalize_first(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Lowercase the first character, leaving the rest untouched.
pub fn decapitalize_first(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_lowercase().collect::<String>() + chars.as_str(),
        None => String::new(),
    }
}

/// Reinflect a finite verb form toward `target`.
///
/// Table-driven for irregulars (be/have/do/go), suffix rules otherwise:
/// `+s`/`+es`/`y→ies` toward third-singular, the reverse toward plural/base.
/// Falls back to the input unchanged when no rule applies. Capitalization of
/// the input is preserved.
pub fn reinflect_verb(form: &str, target: VerbTarget) -> String {
    let lower = form.to_lowercase();
    for (key, sing, plur, base) in IRREGULAR_VERBS {
        if lower == *key {
            let out = match target {
                VerbTarget::Singular3rd => sing,
                VerbTarget::Plural => plur,
                VerbTarget::Base => base,
            };
            return match_case(out.to_string(), form);
        }
    }
    let out = match target {
        // Normalizing through the strip rule first makes this a no-op on
        // forms that are already third-singular.
        VerbTarget::Singular3rd => to_third_singular(&strip_third_singular(&lower)),
        VerbTarget::Plural | VerbTarget::Base => strip_third_singular(&lower),
    };
    match_case(out, form)
}

fn to_third_singular(verb: &str) -> String {
    if let Some(stem) = verb.strip_suffix('y') {
        if stem.chars().last().is_some_and(|c| !is_vowel(c)) {
            return format!("{stem}ies");
        }
    }
    if verb.ends_with('s')
        || verb.ends_with('x')
        || verb.ends_with('z')
        || verb.ends_with("ch")
        || verb.ends_with("sh")
        || verb.ends_with('o')
    {
        return format!("{verb}es");
    }
    format!("{verb}s")
}

fn strip_third_singular(verb: &str) -> String {
    if let Some(stem) = verb.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    // "-es" added after a sibilant or o comes off whole ("teaches" → "teach");
    // a plain "-s" otherwise ("colonizes" → "colonize").
    let es_suffixes = ["sses", "shes", "ches", "xes", "zzes", "oes"];
    if es_suffixes.iter().any(|s| verb.ends_with(s)) {
        return verb[..verb.len() - 2].to_string();
    }
    if verb.ends_with('s') && !verb.ends_with("ss") {
        return verb[..verb.len() - 1].to_string();
    }
    verb.to_string()
}

/// Reinflect a noun form toward `target`. Same philosophy as
/// [`reinflect_verb`]: irregular table first, then suffix rules, identity
/// fallback. Capitalization preserved.
pub fn reinflect_noun(form: &str, target: NounTarget) -> String {
    let lower = form.to_lowercase();
    for (sing, plur) in IRREGULAR_NOUNS {
        if lower == *sing || lower == *plur {
            let out = match target {
                NounTarget::Singular => sing,
                NounTarget::Plural => plur,
            };
            return match_case(out.to_string(), form);
        }
    }
    let out = match target {
        NounTarget::Singular => singularize(&lower),
        NounTarget::Plural => pluralize(&lower),
    };
    match_case(out, form)
}

fn singularize(noun: &str) -> String {
    if let Some(stem) = noun.strip_suffix("ies") {
        if !stem.is_empty() {
            return format!("{stem}y");
        }
    }
    let es_suffixes = ["sses", "shes", "ches", "xes", "zzes"];
    if es_suffixes.iter().any(|s| noun.ends_with(s)) {
        return noun[..noun.len() - 2].to_string();
    }
    if noun.ends_with('s') && !noun.ends_with("ss") && noun.len() > 1 {
        return noun[..noun.len() - 1].to_string();
    }
    noun.to_string()
}

fn pluralize(noun: &str) -> String {
    if let Some(stem) = noun.strip_suffix('y') {
        if stem.chars().last().is_some_and(|c| !is_vowel(c)) {
            return format!("{stem}ies");
        }
    }
    if noun.ends_with('s')
        || noun.ends_with('x')
        || noun.ends_with('z')
        || noun.ends_with("ch")
        || noun.ends_with("sh")
    {
        return format!("{noun}es");
    }
    format!("{noun}s")
}

// Words whose spelling starts with a vowel but is pronounced with a
// consonant onset (or vice versa).
const ARTICLE_EXCEPTIONS_A: &[&str] = &["uni", "use", "user", "usu", "eu", "one", "once", "ufo"];
const ARTICLE_EXCEPTIONS_AN: &[&str] = &["hour", "honest", "honor", "honour", "heir"];

/// Choose the indefinite article for `word` by the vowel-initial heuristic
/// plus a small exception list.
pub fn indefinite_article(word: &str) -> &'static str {
    let lower = word.to_lowercase();
    for prefix in ARTICLE_EXCEPTIONS_AN {
        if lower.starts_with(prefix) {
            return "an";
        }
    }
    for prefix in ARTICLE_EXCEPTIONS_A {
        if lower.starts_with(prefix) {
            return "a";
        }
    }
    if lower.chars().next().is_some_and(is_vowel) {
        "an"
    } else {
        "a"
    }
}

/// Every surface variant this module could derive from `form`, lowercased.
/// Used by the lexical-conservatism check to accept agreement-adjusted
/// copies of source words.
pub fn surface_variants(form: &str) -> Vec<String> {
    let mut out = vec![form.to_lowercase()];
    for target in [
        VerbTarget::Singular3rd,
        VerbTarget::Plural,
        VerbTarget::Base,
    ] {
        out.push(reinflect_verb(form, target).to_lowercase());
    }
    for target in [NounTarget::Singular, NounTarget::Plural] {
        out.push(reinflect_noun(form, target).to_lowercase());
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verb_irregulars_preserve_tense() {
        assert_eq!(reinflect_verb("are", VerbTarget::Singular3rd), "is");
        assert_eq!(reinflect_verb("is", VerbTarget::Plural), "are");
        assert_eq!(reinflect_verb("were", VerbTarget::Singular3rd), "was");
        assert_eq!(reinflect_verb("has", VerbTarget::Plural), "have");
        assert_eq!(reinflect_verb("Are", VerbTarget::Singular3rd), "Is");
    }

    #[test]
    fn verb_suffix_rules() {
        assert_eq!(
            reinflect_verb("colonize", VerbTarget::Singular3rd),
            "colonizes"
        );
        assert_eq!(reinflect_verb("colonizes", VerbTarget::Plural), "colonize");
        assert_eq!(reinflect_verb("teach", VerbTarget::Singular3rd), "teaches");
        assert_eq!(reinflect_verb("teaches", VerbTarget::Base), "teach");
        assert_eq!(reinflect_verb("fly", VerbTarget::Singular3rd), "flies");
        assert_eq!(reinflect_verb("flies", VerbTarget::Plural), "fly");
        assert_eq!(reinflect_verb("says", VerbTarget::Plural), "say");
        assert_eq!(reinflect_verb("raises", VerbTarget::Plural), "raise");
        assert_eq!(reinflect_verb("provide", VerbTarget::Base), "provide");
    }

    #[test]
    fn verb_reinflection_is_idempotent_on_target() {
        for v in ["is", "are", "colonizes", "colonize", "teaches", "flies"] {
            let s = reinflect_verb(v, VerbTarget::Singular3rd);
            assert_eq!(reinflect_verb(&s, VerbTarget::Singular3rd), s);
            let p = reinflect_verb(v, VerbTarget::Plural);
            assert_eq!(reinflect_verb(&p, VerbTarget::Plural), p);
        }
    }

    #[test]
    fn noun_number() {
        assert_eq!(reinflect_noun("teas", NounTarget::Singular), "tea");
        assert_eq!(reinflect_noun("courses", NounTarget::Singular), "course");
        assert_eq!(
            reinflect_noun("microorganisms", NounTarget::Singular),
            "microorganism"
        );
        assert_eq!(reinflect_noun("classes", NounTarget::Singular), "class");
        assert_eq!(reinflect_noun("cities", NounTarget::Singular), "city");
        assert_eq!(reinflect_noun("wolves", NounTarget::Singular), "wolf");
        assert_eq!(reinflect_noun("apple", NounTarget::Plural), "apples");
        assert_eq!(reinflect_noun("box", NounTarget::Plural), "boxes");
        assert_eq!(reinflect_noun("city", NounTarget::Plural), "cities");
        assert_eq!(reinflect_noun("People", NounTarget::Singular), "Person");
    }

    #[test]
    fn articles() {
        assert_eq!(indefinite_article("herbal"), "a");
        assert_eq!(indefinite_article("ancient"), "an");
        assert_eq!(indefinite_article("microorganism"), "a");
        assert_eq!(indefinite_article("hour"), "an");
        assert_eq!(indefinite_article("university"), "a");
        assert_eq!(indefinite_article("Apple"), "an");
    }

    #[test]
    fn surface_variants_cover_agreement_forms() {
        let v = surface_variants("colonize");
        assert!(v.contains(&"colonizes".to_string()));
        let v = surface_variants("teas");
        assert!(v.contains(&"tea".to_string()));
    }
}
