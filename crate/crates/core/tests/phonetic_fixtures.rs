//! Conformance against tables produced by independent reference
//! implementations (see scripts/gen_phonetic_fixtures.py).

use blockvoice_core::phonetic::{encode_de, encode_en};
use proptest::prelude::*;

fn rows(table: &str) -> Vec<Vec<&str>> {
    table
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split('\t').collect())
        .collect()
}

#[test]
fn double_metaphone_matches_reference_table() {
    let table = rows(include_str!("fixtures/double_metaphone.tsv"));
    assert!(table.len() >= 200, "only {} words", table.len());
    let mut failures = Vec::new();
    for row in &table {
        let key = encode_en(row[0]);
        let alternate = row.get(2).copied().unwrap_or("");
        let want_alt = (!alternate.is_empty()).then(|| alternate.to_string());
        if key.primary != row[1] || key.alternate != want_alt {
            failures.push(format!("{}: got {:?}/{:?}, want {}/{}", row[0], key.primary, key.alternate, row[1], alternate));
        }
    }
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn cologne_matches_reference_table() {
    let table = rows(include_str!("fixtures/cologne.tsv"));
    assert!(table.len() >= 200, "only {} words", table.len());
    let failures: Vec<String> = table
        .iter()
        .filter(|row| encode_de(row[0]).primary != row[1])
        .map(|row| format!("{}: got {}, want {}", row[0], encode_de(row[0]).primary, row[1]))
        .collect();
    assert!(failures.is_empty(), "{} mismatches:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn plays_collides_with_place() {
    assert_eq!(encode_en("place").primary, "PLS");
    assert!(encode_en("plays").sounds_like(&encode_en("place")));
    assert!(encode_en("").is_empty());
    assert!(encode_de("").is_empty());
}

proptest! {
    #[test]
    fn encoders_are_total_and_deterministic(word in "\\PC{0,12}") {
        let en = encode_en(&word);
        prop_assert_eq!(&en, &encode_en(&word));
        prop_assert!(en.primary.chars().count() <= 4);
        prop_assert!(en.primary.chars().all(|c| c.is_ascii_uppercase()));
        let de = encode_de(&word);
        prop_assert_eq!(&de, &encode_de(&word));
        prop_assert!(de.primary.chars().all(|c| c.is_ascii_digit()));
    }
}
