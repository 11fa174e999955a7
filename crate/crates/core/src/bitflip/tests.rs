use std::collections::{BTreeSet, HashMap};

use proptest::prelude::*;
use rand::Rng;

use super::*;
use crate::rng::RandomSource;

fn bs(s: &str) -> BitString {
    s.parse().unwrap()
}

fn alpha(l: usize, letters: &[(char, &str, usize)]) -> BitFlipAlphabet {
    BitFlipAlphabet::new(
        l,
        letters
            .iter()
            .map(|&(c, s, h)| Letter::new(c, bs(s), h))
            .collect(),
    )
    .unwrap()
}

fn spread() -> BitFlipAlphabet {
    alpha(4, &[('a', "0000", 1), ('b', "1111", 1)])
}

fn collide() -> BitFlipAlphabet {
    alpha(4, &[('a', "0000", 2), ('b', "1111", 2)])
}

/// Brute-force oracle: classifies every token of a small alphabet by direct
/// bit comparison, independent of the library's Hamming code.
struct Scan {
    transmitters: Vec<BTreeSet<u64>>,
    chaff: BTreeSet<u64>,
    ambiguous: usize,
}

fn scan(a: &BitFlipAlphabet) -> Scan {
    let l = a.l();
    let refs: Vec<(Vec<bool>, usize)> = a
        .letters()
        .iter()
        .map(|x| (x.s.iter().collect(), x.h))
        .collect();
    let mut out = Scan {
        transmitters: vec![BTreeSet::new(); refs.len()],
        chaff: BTreeSet::new(),
        ambiguous: 0,
    };
    for v in 0..1u64 << l {
        let bits: Vec<bool> = (0..l).map(|i| (v >> (l - 1 - i)) & 1 == 1).collect();
        let hits: Vec<usize> = refs
            .iter()
            .enumerate()
            .filter(|(_, (s, h))| s.iter().zip(&bits).filter(|(x, y)| x != y).count() == *h)
            .map(|(i, _)| i)
            .collect();
        match hits.len() {
            1 => {
                out.transmitters[hits[0]].insert(v);
            }
            0 => {
                out.chaff.insert(v);
            }
            _ => {
                out.chaff.insert(v);
                out.ambiguous += 1;
            }
        }
    }
    out
}

fn as_ints(tokens: impl IntoIterator<Item = BitString>) -> BTreeSet<u64> {
    tokens.into_iter().map(|t| t.to_u64().unwrap()).collect()
}

#[test]
fn validate_examples() {
    let r = spread().validate().unwrap();
    assert_eq!(r.transmitter_counts, vec![4, 4]);
    assert_eq!(r.ambiguous_count, 0);
    assert_eq!(r.chaff_count, 8);
    assert!(r.is_valid());

    let r = collide().validate().unwrap();
    assert_eq!(r.transmitter_counts, vec![0, 0]);
    assert_eq!(r.ambiguous_count, 6);
    assert!(!r.is_valid());

    let single = alpha(1, &[('a', "0", 0)]);
    let r = single.validate().unwrap();
    assert_eq!(r.transmitter_counts, vec![1]);
    assert_eq!(single.chaff_tokens().unwrap(), vec![bs("1")]);
}

#[test]
fn structural_errors_are_reported() {
    let dup = BitFlipAlphabet::new(
        4,
        vec![
            Letter::new('a', bs("0000"), 1),
            Letter::new('b', bs("0000"), 2),
        ],
    );
    assert_eq!(
        dup,
        Err(BitFlipError::DuplicateString {
            first: 0,
            second: 1
        })
    );
    let sym = BitFlipAlphabet::new(
        4,
        vec![
            Letter::new('a', bs("0000"), 1),
            Letter::new('a', bs("0001"), 2),
        ],
    );
    assert_eq!(sym, Err(BitFlipError::DuplicateSymbol('a')));
    let rad = BitFlipAlphabet::new(4, vec![Letter::new('a', bs("0000"), 5)]);
    assert!(matches!(
        rad,
        Err(BitFlipError::RadiusOutOfRange {
            index: 0,
            h: 5,
            l: 4
        })
    ));
    let len = BitFlipAlphabet::new(4, vec![Letter::new('a', bs("000"), 1)]);
    assert!(matches!(len, Err(BitFlipError::WrongLength { .. })));
    assert_eq!(
        BitFlipAlphabet::new(4, vec![]),
        Err(BitFlipError::EmptyAlphabet)
    );
}

#[test]
fn transmitter_examples() {
    let got = as_ints(spread().transmitters(0).unwrap());
    assert_eq!(
        got,
        as_ints([bs("1000"), bs("0100"), bs("0010"), bs("0001")])
    );
    let one = alpha(4, &[('a', "0000", 0)]);
    assert_eq!(
        one.transmitters(0).unwrap().collect::<Vec<_>>(),
        vec![bs("0000")]
    );
    assert_eq!(collide().transmitters(0).unwrap().count(), 0);
    assert!(matches!(
        spread().transmitters(2).err(),
        Some(BitFlipError::IndexOutOfRange { index: 2, n: 2 })
    ));
}

#[test]
fn decode_token_examples() {
    assert_eq!(
        spread().decode_token(&bs("0011")),
        Ok(DecodeOutcome::ChaffNone)
    );
    assert_eq!(
        collide().decode_token(&bs("0011")),
        Ok(DecodeOutcome::ChaffAmbiguous(2))
    );
    assert_eq!(
        alpha(4, &[('a', "0000", 0)]).decode_token(&bs("0000")),
        Ok(DecodeOutcome::Letter(0))
    );
    assert!(matches!(
        spread().decode_token(&bs("001")),
        Err(BitFlipError::TokenLength {
            expected: 4,
            found: 3,
            ..
        })
    ));
}

#[test]
fn chaff_examples() {
    let a = spread();
    let chaff = as_ints(a.chaff_tokens().unwrap());
    assert_eq!(chaff, scan(&a).chaff);
    assert_eq!(chaff.len(), 8);
    let mut rng = RandomSource::seeded(11);
    for _ in 0..10_000 {
        let t = a.chaff_token(&mut rng).unwrap();
        assert!(chaff.contains(&t.to_u64().unwrap()));
        assert!(a.decode_token(&t).unwrap().is_chaff());
    }
    let single = alpha(1, &[('a', "0", 0)]);
    assert_eq!(single.chaff_token(&mut rng), Ok(bs("1")));
    // every 1-bit token is a transmitter of one of the two letters
    let full = alpha(1, &[('a', "0", 0), ('b', "1", 0)]);
    assert_eq!(full.chaff_token(&mut rng), Err(BitFlipError::EmptyChaffSet));
}

#[test]
fn encode_letter_is_uniform() {
    let a = spread();
    let mut rng = RandomSource::seeded(2024);
    let mut freq: HashMap<BitString, usize> = HashMap::new();
    let draws = 10_000;
    for _ in 0..draws {
        *freq
            .entry(a.encode_letter(0, &mut rng).unwrap())
            .or_default() += 1;
    }
    assert_eq!(freq.len(), 4);
    let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
    for (t, &n) in &freq {
        assert!(
            (n as f64 - 2500.0).abs() <= 3.0 * sigma,
            "token {t} drawn {n} times"
        );
    }
}

#[test]
fn encode_letter_singleton_and_invalid() {
    let mut rng = RandomSource::seeded(1);
    let one = alpha(4, &[('a', "0000", 0)]);
    for _ in 0..20 {
        assert_eq!(one.encode_letter(0, &mut rng), Ok(bs("0000")));
    }
    assert_eq!(
        collide().encode_letter(0, &mut rng),
        Err(BitFlipError::EmptyTransmitterSet { index: 0 })
    );
}

#[test]
fn oracle_equivalence_random_small_alphabets() {
    let mut rng = RandomSource::seeded(77);
    for trial in 0..60 {
        let l = 1 + trial % 12;
        let n = 1 + (trial % 4).min((1usize << l) - 1);
        let symbols: Vec<char> = "abcd".chars().take(n).collect();
        let a = BitFlipAlphabet::random(&symbols, l, &mut rng).unwrap();
        let oracle = scan(&a);
        let report = a.validate().unwrap();
        for i in 0..n {
            assert_eq!(as_ints(a.transmitters(i).unwrap()), oracle.transmitters[i]);
            assert_eq!(
                report.transmitter_counts[i],
                oracle.transmitters[i].len() as u128
            );
        }
        assert_eq!(as_ints(a.chaff_tokens().unwrap()), oracle.chaff);
        assert_eq!(report.chaff_count, oracle.chaff.len() as u128);
        assert_eq!(report.ambiguous_count, oracle.ambiguous as u128);
    }
}

#[test]
fn transmitter_sets_partition_with_chaff() {
    let mut rng = RandomSource::seeded(5);
    for l in 1..=10 {
        let n = 3.min(1 << l);
        let symbols: Vec<char> = "xyz".chars().take(n).collect();
        let a = BitFlipAlphabet::random(&symbols, l, &mut rng).unwrap();
        let mut all = BTreeSet::new();
        let mut total = 0;
        for i in 0..n {
            let set = as_ints(a.transmitters(i).unwrap());
            total += set.len();
            all.extend(set);
        }
        let chaff = as_ints(a.chaff_tokens().unwrap());
        total += chaff.len();
        all.extend(chaff);
        assert_eq!(total, 1 << l, "sets overlap at l={l}");
        assert_eq!(all.len(), 1 << l);
    }
}

#[test]
fn sphere_walk_validate_matches_exhaustive() {
    // same alphabet embedded at l=24 (sphere walk) and checked against a
    // brute-force count over the relevant spheres
    let mut rng = RandomSource::seeded(9);
    let l = 24;
    let letters: Vec<Letter> = "ab"
        .chars()
        .map(|c| Letter::new(c, bitstring::random_bits(l, &mut rng), 3))
        .collect();
    let a = BitFlipAlphabet::new(l, letters).unwrap();
    let report = a.validate().unwrap();
    let s0 = a.letters()[0].s.to_u64().unwrap();
    let s1 = a.letters()[1].s.to_u64().unwrap();
    let mut counts = [0u128; 2];
    let mut amb = 0u128;
    let mut seen = BTreeSet::new();
    for s in [s0, s1] {
        for t in bitstring::sphere(&BitString::from_u64(s, l), 3).unwrap() {
            let v = t.to_u64().unwrap();
            if !seen.insert(v) {
                continue;
            }
            let m0 = (v ^ s0).count_ones() == 3;
            let m1 = (v ^ s1).count_ones() == 3;
            match (m0, m1) {
                (true, false) => counts[0] += 1,
                (false, true) => counts[1] += 1,
                (true, true) => amb += 1,
                _ => {}
            }
        }
    }
    assert_eq!(report.transmitter_counts, counts.to_vec());
    assert_eq!(report.ambiguous_count, amb);
    assert_eq!(report.chaff_count, (1u128 << l) - counts[0] - counts[1]);
}

#[test]
fn message_roundtrip_at_chaff_rates() {
    let mut rng = RandomSource::seeded(31);
    let symbols: Vec<char> = "abcdef".chars().collect();
    let mut done = 0;
    while done < 100 {
        let n = rng.gen_range(1..=6);
        let l = rng.gen_range(4..=12);
        let Some(a) = BitFlipAlphabet::random_valid(&symbols[..n], l, &mut rng, 1000) else {
            continue;
        };
        if a.validate().unwrap().chaff_count == 0 {
            continue;
        }
        let len = rng.gen_range(0..40);
        let msg: String = (0..len).map(|_| symbols[rng.gen_range(0..n)]).collect();
        for rate in [0.0, 0.5, 0.9] {
            let tokens = a
                .encode_message(&msg, rate, EncodeMode::Randomized, &mut rng)
                .unwrap();
            let decoded = a.decode_stream(&tokens).unwrap();
            assert_eq!(decoded.text, msg);
            assert_eq!(decoded.discarded, tokens.len() - msg.chars().count());
        }
        done += 1;
    }
}

#[test]
fn encode_message_edges() {
    let a = spread();
    let mut rng = RandomSource::seeded(3);
    assert!(a
        .encode_message("", 0.0, EncodeMode::Randomized, &mut rng)
        .unwrap()
        .is_empty());
    let deg = a
        .encode_message("aaaa", 0.0, EncodeMode::Degenerate, &mut rng)
        .unwrap();
    assert_eq!(deg, vec![bs("0001"); 4]);
    assert_eq!(
        a.encode_message("abz", 0.0, EncodeMode::Randomized, &mut rng),
        Err(BitFlipError::UnknownSymbol {
            position: 2,
            symbol: 'z'
        })
    );
    assert_eq!(
        a.encode_message("ab", 1.0, EncodeMode::Randomized, &mut rng),
        Err(BitFlipError::ChaffRate(1.0))
    );
    assert!(a
        .encode_message("ab", -0.1, EncodeMode::Randomized, &mut rng)
        .is_err());
}

#[test]
fn decode_stream_edges() {
    let a = spread();
    assert_eq!(a.decode_stream(&[]).unwrap(), DecodedStream::default());
    let mut rng = RandomSource::seeded(8);
    let chaff: Vec<_> = (0..200).map(|_| a.chaff_token(&mut rng).unwrap()).collect();
    let d = a.decode_stream(&chaff).unwrap();
    assert_eq!(d.text, "");
    assert_eq!(d.discarded, 200);
    let bad = vec![bs("1000"), bs("10000")];
    assert_eq!(
        a.decode_stream(&bad),
        Err(BitFlipError::TokenLength {
            position: 1,
            expected: 4,
            found: 5
        })
    );
}

#[test]
fn repeat_statistic_tracks_transmitter_count() {
    let a = spread();
    let mut rng = RandomSource::seeded(99);
    let trials = 10_000;
    let mut repeats = 0;
    for _ in 0..trials {
        let x = a.encode_letter(1, &mut rng).unwrap();
        let y = a.encode_letter(1, &mut rng).unwrap();
        repeats += (x == y) as usize;
    }
    let p: f64 = 0.25;
    let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
    assert!((repeats as f64 - trials as f64 * p).abs() <= 3.0 * sigma);
    let deg = a
        .encode_message(&"b".repeat(100), 0.0, EncodeMode::Degenerate, &mut rng)
        .unwrap();
    assert!(deg.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn wide_tokens_use_sampling() {
    let mut rng = RandomSource::seeded(4);
    for l in [64usize, 256] {
        let letters: Vec<Letter> = "abc"
            .chars()
            .map(|c| Letter::new(c, bitstring::random_bits(l, &mut rng), l / 3))
            .collect();
        let a = BitFlipAlphabet::new(l, letters).unwrap();
        assert!(a.is_valid(&mut rng));
        let tokens = a
            .encode_message("abcabc", 0.5, EncodeMode::Randomized, &mut rng)
            .unwrap();
        assert_eq!(a.decode_stream(&tokens).unwrap().text, "abcabc");
        for t in &tokens {
            assert_eq!(t.len(), l);
        }
    }
}

#[test]
fn random_alphabet_rejects_pigeonhole() {
    let mut rng = RandomSource::seeded(1);
    assert_eq!(
        BitFlipAlphabet::random(&['a', 'b', 'c'], 1, &mut rng),
        Err(BitFlipError::TooManyLetters { n: 3, l: 1 })
    );
}

#[test]
fn key_file_roundtrip_and_errors() {
    let a = alpha(6, &[('a', "000000", 1), ('b', "101111", 2)]);
    let text = format_key(&a);
    assert_eq!(
        text,
        "bitflip v1\nl=6\nletter a s=00 h=1\nletter b s=2f h=2\n"
    );
    assert_eq!(parse_key(&text), Ok(a));
    assert!(parse_key("bitflip v2\nl=4\n").is_err());
    let e = parse_key("bitflip v1\nl=4\nletter a s=0 h=1\nletter b s=zz h=1\n").unwrap_err();
    assert_eq!(e.line, 4);
    let e = parse_key("bitflip v1\nl=4\nletter a s=0 h=1\nletter a s=1 h=1\n").unwrap_err();
    assert_eq!(e.line, 0);
}

#[test]
fn key_file_escapes_whitespace_symbols() {
    let a = alpha(4, &[(' ', "0000", 1), ('U', "1111", 1), ('\n', "0011", 2)]);
    let text = format_key(&a);
    assert!(text.contains("letter U+0020 s=0 h=1\n"));
    assert!(text.contains("letter U s=f h=1\n"));
    assert!(text.contains("letter U+000A s=3 h=2\n"));
    assert_eq!(parse_key(&text), Ok(a));
    assert!(parse_key("bitflip v1\nl=4\nletter U+D800 s=0 h=1\n").is_err());
}

#[test]
fn token_stream_format() {
    let tokens = vec![bs("00001111"), bs("10100000")];
    let text = format_tokens(&tokens);
    assert_eq!(text, "0f\na0\n");
    assert_eq!(parse_tokens(&text, 8).unwrap(), tokens);
    let e = parse_tokens(&text, 12).unwrap_err();
    assert_eq!(e.line, 1);
    assert!(parse_tokens("0f\nxx\n", 8).unwrap_err().line == 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn encode_letter_decodes_to_itself(seed in any::<u64>(), l in 2usize..=12, n in 1usize..=5) {
        let mut rng = RandomSource::seeded(seed);
        let symbols: Vec<char> = "vwxyz".chars().take(n.min(1 << l)).collect();
        if let Some(a) = BitFlipAlphabet::random_valid(&symbols, l, &mut rng, 200) {
            for i in 0..a.len() {
                let t = a.encode_letter(i, &mut rng).unwrap();
                prop_assert_eq!(a.decode_token(&t).unwrap(), DecodeOutcome::Letter(i));
            }
        }
    }
}

#[test]
fn encode_letter_roundtrip_thousand_alphabets() {
    let mut rng = RandomSource::seeded(1000);
    let symbols: Vec<char> = "abcd".chars().collect();
    let mut checked = 0;
    while checked < 1000 {
        let l = rng.gen_range(3..=10);
        let Some(a) = BitFlipAlphabet::random_valid(&symbols, l, &mut rng, 100) else {
            continue;
        };
        let i = rng.gen_range(0..a.len());
        let t = a.encode_letter(i, &mut rng).unwrap();
        assert_eq!(a.decode_token(&t).unwrap(), DecodeOutcome::Letter(i));
        checked += 1;
    }
}
