//! Cologne phonetics (Kölner Phonetik, Postel 1969).
//!
//! Letters are mapped to digit codes by context, consecutive duplicate codes
//! are collapsed, and every `0` except a leading one is removed. `H` has no
//! code of its own. Non-letters are skipped.

use alloc::string::String;
use alloc::vec::Vec;

use super::PhoneticKey;

pub fn encode(word: &str) -> PhoneticKey {
    PhoneticKey {
        primary: code(word),
        alternate: None,
    }
}

fn fold(word: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(word.len());
    for c in word.chars() {
        match c {
            'ß' | 'ẞ' => out.push('S'),
            _ => {
                for u in c.to_uppercase() {
                    match u {
                        'Ä' | 'À' | 'Á' | 'Â' => out.push('A'),
                        'Ö' | 'Ò' | 'Ó' | 'Ô' => out.push('O'),
                        'Ü' | 'Ù' | 'Ú' | 'Û' => out.push('U'),
                        'É' | 'È' | 'Ê' => out.push('E'),
                        c if c.is_ascii_uppercase() => out.push(c),
                        _ => {}
                    }
                }
            }
        }
    }
    out
}

pub(crate) fn code(word: &str) -> String {
    let s = fold(word);
    let mut raw: Vec<u8> = Vec::with_capacity(s.len() + 2);
    for (i, &c) in s.iter().enumerate() {
        let prev = if i > 0 { Some(s[i - 1]) } else { None };
        let next = s.get(i + 1).copied();
        let next_in = |set: &[char]| next.is_some_and(|n| set.contains(&n));
        let prev_in = |set: &[char]| prev.is_some_and(|p| set.contains(&p));
        match c {
            'A' | 'E' | 'I' | 'J' | 'O' | 'U' | 'Y' => raw.push(b'0'),
            'H' => {}
            'B' => raw.push(b'1'),
            'P' => raw.push(if next == Some('H') { b'3' } else { b'1' }),
            'D' | 'T' => raw.push(if next_in(&['C', 'S', 'Z']) { b'8' } else { b'2' }),
            'F' | 'V' | 'W' => raw.push(b'3'),
            'G' | 'K' | 'Q' => raw.push(b'4'),
            'C' => {
                let hard = if i == 0 {
                    next_in(&['A', 'H', 'K', 'L', 'O', 'Q', 'R', 'U', 'X'])
                } else {
                    next_in(&['A', 'H', 'K', 'O', 'Q', 'U', 'X']) && !prev_in(&['S', 'Z'])
                };
                raw.push(if hard { b'4' } else { b'8' });
            }
            'X' => {
                if prev_in(&['C', 'K', 'Q']) {
                    raw.push(b'8');
                } else {
                    raw.push(b'4');
                    raw.push(b'8');
                }
            }
            'L' => raw.push(b'5'),
            'M' | 'N' => raw.push(b'6'),
            'R' => raw.push(b'7'),
            'S' | 'Z' => raw.push(b'8'),
            _ => {}
        }
    }
    raw.dedup();
    let mut out = String::with_capacity(raw.len());
    for (i, &d) in raw.iter().enumerate() {
        if d != b'0' || i == 0 {
            out.push(d as char);
        }
    }
    out
}
