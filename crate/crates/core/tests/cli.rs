mod common;

use std::fs;
use std::io::{BufRead, BufReader};
use std::process::{Command, Stdio};

use common::*;
use tempfile::TempDir;

fn write(dir: &TempDir, name: &str, bytes: &[u8]) -> String {
    let p = dir.path().join(name);
    fs::write(&p, bytes).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn empty_argv_prints_usage_and_exits_1() {
    let o = run(&[], b"");
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("Usage"));
    assert!(o.stdout.is_empty());
}

#[test]
fn help_and_version_exit_0() {
    let o = run(&["--help"], b"");
    assert_eq!(code(&o), 0);
    let help = String::from_utf8(o.stdout).unwrap();
    for cmd in ["keygen", "encode", "winnow", "terminal-list", "distinguish"] {
        assert!(help.contains(cmd));
    }
    assert_eq!(code(&run(&["--version"], b"")), 0);
}

#[test]
fn usage_errors_exit_1() {
    for args in [
        &["keygen", "bitflip", "--bogus"][..],
        &["encode", "bitflip", "--key", "k", "a", "--in", "b"],
        &["keygen", "winnow", "--tau", "12"],
        &["keygen", "pad", "--bytes", "0"],
        &["unicity", "--key-entropy", "1", "--redundancy", "0"],
        &["evolve", "--w-capacity", "0"],
    ] {
        let o = run(args, b"");
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn keygen_is_deterministic_under_seed() {
    for kind in ["bitflip", "bitmap", "winnow"] {
        let a = ok(&["keygen", kind, "--seed", "7"], b"");
        let b = ok(&["keygen", kind, "--seed", "7"], b"");
        let c = ok(&["keygen", kind, "--seed", "8"], b"");
        assert_eq!(a, b, "{kind}");
        assert_ne!(a, c, "{kind}");
    }
    let a = ok(
        &["keygen", "bitflip", "--n", "4", "--l", "8", "--seed", "7"],
        b"",
    );
    assert!(a.starts_with(b"bitflip v1\nl=8\n"));
}

#[test]
fn environment_seed_matches_flag() {
    let flag = ok(&["keygen", "winnow", "--seed", "21"], b"");
    let env = Command::new(BIN)
        .args(["keygen", "winnow"])
        .env("DECOYKIT_SEED", "21")
        .output()
        .unwrap();
    assert_eq!(env.stdout, flag);
}

#[test]
fn bitflip_pipe_roundtrip() {
    let dir = TempDir::new().unwrap();
    let key = ok(
        &["keygen", "bitflip", "--symbols", "abcdefgh ", "--seed", "3"],
        b"",
    );
    let key = write(&dir, "k", &key);
    let msg = b"a bad hedge fed a cafe\n";
    for rate in ["0", "0.5", "0.9"] {
        let ct = ok(
            &[
                "encode",
                "bitflip",
                "--key",
                &key,
                "--chaff-rate",
                rate,
                "--seed",
                "1",
            ],
            msg,
        );
        let pt = ok(&["decode", "bitflip", "--key", &key, "-"], &ct);
        assert_eq!(pt, msg, "rate {rate}");
    }
    let o = run(&["encode", "bitflip", "--key", &key], b"xyz");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("position 0"));
}

#[test]
fn decode_with_wrong_length_key_names_the_line() {
    let dir = TempDir::new().unwrap();
    let k8 = write(&dir, "k8", &ok(&["keygen", "bitflip", "--seed", "2"], b""));
    let k10 = write(
        &dir,
        "k10",
        &ok(&["keygen", "bitflip", "--l", "10", "--seed", "2"], b""),
    );
    let ct = ok(&["encode", "bitflip", "--key", &k8, "--seed", "2"], b"abcd");
    let o = run(&["decode", "bitflip", "--key", &k10], &ct);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));
}

#[test]
fn bitmap_roundtrip_bytes_and_raw() {
    let dir = TempDir::new().unwrap();
    let key = write(&dir, "m", &ok(&["keygen", "bitmap", "--seed", "4"], b""));
    let bytes: Vec<u8> = (0..=255).collect();
    let ct = ok(&["encode", "bitmap", "--key", &key, "--seed", "5"], &bytes);
    assert_eq!(ok(&["decode", "bitmap", "--key", &key], &ct), bytes);

    let raw = write(
        &dir,
        "r",
        &ok(
            &["keygen", "bitmap", "--symbols", "abc", "--seed", "6"],
            b"",
        ),
    );
    let ct = ok(
        &["encode", "bitmap", "--key", &raw, "--raw", "--seed", "7"],
        b"abccab\n",
    );
    assert_eq!(
        ok(&["decode", "bitmap", "--key", &raw, "--raw"], &ct),
        b"abccab\n"
    );
    let o = run(&["encode", "bitmap", "--key", &raw, "--raw"], b"abz");
    assert_eq!(code(&o), 2);
}

#[test]
fn chaff_winnow_roundtrip_every_strategy() {
    let dir = TempDir::new().unwrap();
    let key = write(&dir, "w", &ok(&["keygen", "winnow", "--seed", "9"], b""));
    let msg = b"meet me by the old mill";
    for (strategy, granularity) in [
        ("bit-complement", "bit"),
        ("random-payload", "nibble"),
        ("decoy-text", "block:3"),
    ] {
        let stream = ok(
            &[
                "chaff",
                "--key",
                &key,
                "--strategy",
                strategy,
                "--granularity",
                granularity,
                "--per-wheat",
                "2",
                "--candidate",
                "fled at dawn, all lost",
                "--seed",
                "10",
            ],
            msg,
        );
        let o = run(
            &["winnow", "--key", &key, "--granularity", granularity],
            &stream,
        );
        assert_eq!(code(&o), 0, "{strategy}: {}", stderr(&o));
        assert_eq!(o.stdout, msg, "{strategy}");
        assert!(stderr(&o).contains("conflicts=0"));
    }
}

#[test]
fn winnow_conflict_exits_3() {
    let dir = TempDir::new().unwrap();
    let key = write(&dir, "w", &ok(&["keygen", "winnow", "--seed", "9"], b""));
    let mut stream = ok(&["chaff", "--key", &key, "--seed", "1"], b"aaa");
    stream.extend(ok(&["chaff", "--key", &key, "--seed", "2"], b"bbb"));
    let o = run(&["winnow", "--key", &key], &stream);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("conflicts=3"));
    assert_eq!(o.stdout, b"aaa");
}

#[test]
fn winnow_rejects_garbage_stream() {
    let dir = TempDir::new().unwrap();
    let key = write(&dir, "w", &ok(&["keygen", "winnow", "--seed", "9"], b""));
    let o = run(&["winnow", "--key", &key], b"CW\x02junk");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("offset 0"));
}

#[test]
fn socket_mode_streams_the_wire_format() {
    let dir = TempDir::new().unwrap();
    let key = write(&dir, "w", &ok(&["keygen", "winnow", "--seed", "12"], b""));
    let mut listener = Command::new(BIN)
        .args(["winnow", "--key", &key, "--listen", "127.0.0.1:0"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut err = BufReader::new(listener.stderr.take().unwrap());
    let mut line = String::new();
    err.read_line(&mut line).unwrap();
    let addr = line
        .trim()
        .strip_prefix("listening on ")
        .unwrap()
        .to_string();
    ok(
        &["chaff", "--key", &key, "--connect", &addr, "--seed", "3"],
        b"over the wire",
    );
    let out = listener.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout, b"over the wire");
}

#[test]
fn forge_key_and_otp() {
    let dir = TempDir::new().unwrap();
    let pad = write(
        &dir,
        "pad",
        &ok(&["keygen", "pad", "--bytes", "12", "--seed", "1"], b""),
    );
    let ct = ok(&["otp", "--key", &pad], b"attack today");
    assert_eq!(ok(&["otp", "--key", &pad], &ct), b"attack today");
    let ctf = write(&dir, "ct", &ct);
    let forged = write(
        &dir,
        "forged",
        &ok(&["forge-key", "--decoy", "stay at home", &ctf], b""),
    );
    assert_eq!(ok(&["otp", "--key", &forged, &ctf], b""), b"stay at home");
    let o = run(&["forge-key", "--decoy", "too short", &ctf], b"");
    assert_eq!(code(&o), 2);
}

#[test]
fn terminal_list_report_and_errors() {
    let dir = TempDir::new().unwrap();
    let cands = write(&dir, "c", b"hello\nworld\nhelps\n");
    let out = ok(
        &[
            "terminal-list",
            "--candidates",
            &cands,
            "--weights",
            "0.5,0.25,0.25",
        ],
        &[0u8; 5],
    );
    let text = String::from_utf8(out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "candidate=\"hello\" key=68656c6c6f weight=0.5 verified=true"
    );
    assert_eq!(text.lines().count(), 3);
    let out = ok(
        &[
            "terminal-list",
            "--candidates",
            &cands,
            "--weights",
            "0.5,0.25,0.25",
            "--threshold",
            "0.4",
        ],
        &[0u8; 5],
    );
    assert_eq!(
        String::from_utf8(out).unwrap(),
        "candidate=\"hello\" key=68656c6c6f weight=1 verified=true\n"
    );
    let o = run(
        &[
            "terminal-list",
            "--candidates",
            &cands,
            "--weights",
            "0.5,0.5",
        ],
        &[0u8; 5],
    );
    assert_eq!(code(&o), 1);
    let o = run(&["terminal-list", "--candidates", &cands], &[0u8; 4]);
    assert_eq!(code(&o), 2);
}

#[test]
fn mimic_and_unicity() {
    let out = ok(&["mimic", "--n", "4", "--seed", "3"], b"attack\nretreat\n");
    let out = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    for m in &lines {
        assert!(m.len() == 6 || m.len() == 7);
        assert!(*m != "attack" && *m != "retreat");
    }
    assert_eq!(
        ok(
            &["unicity", "--key-entropy", "128", "--redundancy", "3.2"],
            b""
        ),
        b"40\n"
    );
    assert_eq!(
        ok(
            &["unicity", "--key-entropy", "0", "--redundancy", "2.5"],
            b""
        ),
        b"0\n"
    );
}

#[test]
fn evolve_writes_key_and_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("curve.csv");
    let key = ok(
        &[
            "evolve",
            "--population",
            "10",
            "--generations",
            "6",
            "--seed",
            "4",
            "--csv",
            path_str(&csv),
        ],
        b"",
    );
    assert!(key.starts_with(b"bitflip v1\nl=8\n"));
    let csv = fs::read_to_string(csv).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("generation,best_fitness"));
    let best: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(best.len(), 6);
    assert!(best.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn analyze_report_lines() {
    let bytes = ok(&["keygen", "pad", "--bytes", "20000", "--seed", "5"], b"");
    let out = String::from_utf8(ok(&["analyze"], &bytes)).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    for l in lines {
        let f: Vec<&str> = l.split(' ').collect();
        assert_eq!(f.len(), 4, "{l}");
        f[1].parse::<f64>().unwrap();
        f[2].parse::<f64>().unwrap();
        assert_eq!(f[3], "pass");
    }
    let zeros = "0".repeat(1000);
    let out = String::from_utf8(ok(
        &["analyze", "--bits", "--tests", "monobit,runs"],
        zeros.as_bytes(),
    ))
    .unwrap();
    let mut lines = out.lines();
    assert!(lines.next().unwrap().ends_with(" fail"));
    assert_eq!(lines.next(), Some("runs - - not-applicable"));
    let o = run(&["analyze", "--bits"], b"0102");
    assert_eq!(code(&o), 2);
    let o = run(&["analyze", "--tests", "poker"], &bytes);
    assert_eq!(code(&o), 1);
}

#[test]
fn distinguish_prints_trials_correct_advantage() {
    let dir = TempDir::new().unwrap();
    let key = write(
        &dir,
        "k",
        b"bitflip v1\nl=8\nletter a s=00 h=4\nletter b s=0f h=4\n",
    );
    let out = ok(
        &[
            "distinguish",
            "--key",
            &key,
            "--msg-a",
            "ab",
            "--msg-b",
            "ba",
            "--trials",
            "100",
            "--mode",
            "degenerate",
            "--seed",
            "1",
        ],
        b"",
    );
    let out = String::from_utf8(out).unwrap();
    let f: Vec<&str> = out.trim_end().split(' ').collect();
    assert_eq!(f.len(), 3);
    assert_eq!(f[0], "100");
    assert_eq!(f[1], "100");
    assert_eq!(f[2], "1.000000");
    let o = run(
        &[
            "distinguish",
            "--key",
            &key,
            "--msg-a",
            "ab",
            "--msg-b",
            "ab",
        ],
        b"",
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn missing_files_are_data_errors() {
    let o = run(&["decode", "bitflip", "--key", "/nonexistent/k"], b"");
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/k"));
}
