use blockvoice_core::config::{Config, Language};
use blockvoice_core::grammar::{compile, CompiledCatalog};
use blockvoice_core::textnorm::{normalize, tokenize};

#[test]
fn every_block_round_trips_through_its_canonical_utterance() {
    let cfg = Config::bundled();
    for lang in Language::ALL {
        let catalog = CompiledCatalog::new(&cfg.catalog, lang).unwrap();
        let pack = cfg.pack(lang).unwrap();
        for spec in &cfg.catalog.blocks {
            let grammar = catalog.grammar(&spec.opcode).unwrap();
            let phrase = grammar.canonical_utterance();
            let tokens = normalize(&phrase, pack).numbers_resolved;
            let ranked = catalog.parse_remainder(&tokens).unwrap_or_else(|e| panic!("{lang} {}: {e}", spec.opcode));
            assert_eq!(ranked[0].opcode, spec.opcode, "{lang}: \"{phrase}\"");
            for slot in &spec.slots {
                let expected = slot.default.clone().unwrap_or_else(|| slot.options[0].as_str().into());
                assert_eq!(ranked[0].slot_values[&slot.name], expected, "{lang} {}.{}", spec.opcode, slot.name);
            }
        }
    }
}

#[test]
fn every_realization_parses_back() {
    let cfg = Config::bundled();
    for lang in Language::ALL {
        let catalog = CompiledCatalog::new(&cfg.catalog, lang).unwrap();
        for spec in &cfg.catalog.blocks {
            let grammar = catalog.grammar(&spec.opcode).unwrap();
            let defaults = blockvoice_core::grammar::BlockInstantiation::with_defaults(spec).slot_values;
            for phrase in grammar.realizations(&defaults) {
                let ranked = catalog.parse_remainder(&tokenize(&phrase)).unwrap();
                assert!(ranked.iter().any(|b| b.opcode == spec.opcode), "{lang}: \"{phrase}\"");
            }
        }
    }
}

#[test]
fn compilation_is_deterministic() {
    let cfg = Config::bundled();
    let corpus = [
        "move 20 steps", "turn left by 10 degrees", "turn right 5 degrees", "say hello world", "wait 2 seconds",
        "repeat", "repeat 4 times", "set my variable to 3", "change x by 10", "go to x 10 y -20", "gehe 10 schritte",
        "warte 1 sekunden", "sage hallo", "when up arrow key pressed",
    ];
    for lang in Language::ALL {
        for spec in &cfg.catalog.blocks {
            let a = compile(spec, lang).unwrap();
            let b = compile(spec, lang).unwrap();
            assert_eq!(a.pattern, b.pattern);
            for text in corpus {
                assert_eq!(a.match_tokens(&tokenize(text)), b.match_tokens(&tokenize(text)));
            }
        }
    }
}

#[test]
fn no_cross_capture() {
    let cfg = Config::bundled();
    let corpus = ["move 20 steps", "set my variable to 3", "change x by 10", "glide 1 seconds to x 0 y 0", "repeat 3 times"];
    for lang in Language::ALL {
        let catalog = CompiledCatalog::new(&cfg.catalog, lang).unwrap();
        for text in corpus {
            for inst in catalog.parse_remainder(&tokenize(text)).unwrap_or_default() {
                let spec = cfg.catalog.get(&inst.opcode).unwrap();
                for (name, value) in &inst.slot_values {
                    let slot = spec.slot(name).expect("slot belongs to block");
                    assert!(slot.accepts(value), "{name} = {value:?}");
                }
                assert_eq!(inst.slot_values.len(), spec.slots.len());
            }
        }
    }
}
