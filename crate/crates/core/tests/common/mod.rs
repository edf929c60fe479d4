#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

const WORDS: &[&str] = &[
    "account", "balance", "card", "transfer", "fee", "limit", "branch", "statement", "flight", "seat",
    "baggage", "refund", "voucher", "router", "signal", "plan", "data", "roaming", "zone", "contract",
    "payment", "passport", "deadline", "monthly", "daily", "premium", "standard", "café", "naïve",
    "weight", "price", "ticket", "booking", "reset", "button", "light", "network", "coverage", "device",
];

const BOILERPLATE: &[&str] = &[
    "We use cookies to improve your experience.",
    "Accept all to continue browsing.",
    "Sign in to see your offers.",
    "Skip to content",
];

pub fn sentence<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(4..14);
    let mut words: Vec<String> = (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect();
    if rng.gen_bool(0.3) {
        words.push(format!("{}", rng.gen_range(1..500)));
    }
    let mut s = words.join(" ");
    s[..1].make_ascii_uppercase();
    s.push('.');
    s
}

pub fn paragraph<R: Rng>(rng: &mut R, max_sentences: usize) -> String {
    let n = rng.gen_range(1..=max_sentences);
    (0..n).map(|_| sentence(rng)).collect::<Vec<_>>().join(" ")
}

fn title<R: Rng>(rng: &mut R) -> String {
    let n = rng.gen_range(1..4);
    let mut t = (0..n).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ");
    t[..1].make_ascii_uppercase();
    t
}

fn block<R: Rng>(rng: &mut R, out: &mut Vec<String>) {
    match rng.gen_range(0..10) {
        0 => {
            let rows = rng.gen_range(1..4);
            let mut t = vec!["| Item | Value |".to_string(), "| --- | --- |".to_string()];
            for _ in 0..rows {
                t.push(format!("| {} | {} |", title(rng), rng.gen_range(1..99)));
            }
            out.push(t.join("\n"));
        }
        1 => {
            let n = rng.gen_range(2..5);
            out.push((1..=n).map(|i| format!("{i}. {}", sentence(rng))).collect::<Vec<_>>().join("\n"));
        }
        2 => {
            let n = rng.gen_range(2..4);
            out.push((0..n).map(|_| format!("- {}", sentence(rng))).collect::<Vec<_>>().join("\n"));
        }
        3 => out.push(format!("```\nrun --{} {}\n```", title(rng).to_lowercase().replace(' ', "-"), rng.gen_range(1..9))),
        _ => out.push(paragraph(rng, 6)),
    }
}

/// Markdown with random sections; when `procedure` is set, at least one
/// `Steps to ...` section with numbered step headings is included.
pub fn document<R: Rng>(rng: &mut R, procedure: bool) -> String {
    let mut out: Vec<String> = Vec::new();
    if rng.gen_bool(0.15) {
        out.push(paragraph(rng, 3));
    }
    if rng.gen_bool(0.2) {
        out.push(BOILERPLATE.choose(rng).unwrap().to_string());
    }
    if rng.gen_bool(0.9) {
        out.push(format!("# {}", title(rng)));
    }
    let sections = rng.gen_range(1..5);
    let proc_at = if procedure || rng.gen_bool(0.3) {
        Some(rng.gen_range(0..sections))
    } else {
        None
    };
    for s in 0..sections {
        if Some(s) == proc_at {
            out.push(format!("## Steps to {}", title(rng).to_lowercase()));
            if rng.gen_bool(0.5) {
                out.push(paragraph(rng, 2));
            }
            let steps = rng.gen_range(2..6);
            for i in 1..=steps {
                out.push(format!("### {i}. {}", title(rng)));
                for _ in 0..rng.gen_range(1..3) {
                    out.push(paragraph(rng, 8));
                }
            }
            continue;
        }
        out.push(format!("## {}", title(rng)));
        for _ in 0..rng.gen_range(0..3) {
            block(rng, &mut out);
        }
        if rng.gen_bool(0.15) {
            out.push(BOILERPLATE.choose(rng).unwrap().to_string());
        }
        for _ in 0..rng.gen_range(0..3) {
            out.push(format!("### {}", title(rng)));
            for _ in 0..rng.gen_range(1..3) {
                block(rng, &mut out);
            }
            if rng.gen_bool(0.2) {
                out.push(format!("#### {}", title(rng)));
                block(rng, &mut out);
            }
        }
    }
    out.join("\n\n") + "\n"
}
