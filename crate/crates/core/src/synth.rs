//! Seeded generator of raw SVG files covering the whole input surface:
//! every path command in both cases, all basic shapes, nested groups with
//! transforms, assorted color notations and viewBoxes, plus a small share of
//! samples that the filters must reject.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write;

const COLORS: [&str; 10] =
    ["#E53935", "#1e88e5", "#FDD835", "#43A047", "#8E24AA", "#FB8C00", "#6D4C41", "#00ACC1", "#3949AB", "#C0CA33"];
const ALT_COLORS: [&str; 6] = ["#f0a", "rgb(12, 200, 99)", "navy", "teal", "rgb(100%, 50%, 0%)", "maroon"];

const VIEWBOXES: [(f64, f64, f64, f64); 6] = [
    (0.0, 0.0, 200.0, 200.0),
    (0.0, 0.0, 64.0, 64.0),
    (0.0, 0.0, 128.0, 128.0),
    (0.0, 0.0, 100.0, 200.0),
    (-10.0, -10.0, 50.0, 50.0),
    (0.0, 0.0, 24.0, 24.0),
];

const PATH_LETTERS: &str = "LlHhVvCcSsQqTtAa";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFlavor {
    Normal,
    Monochrome,
    Gradient,
    StrokeOnly,
    Truncated,
}

struct Gen {
    rng: ChaCha8Rng,
    vb: (f64, f64, f64, f64),
}

impl Gen {
    fn num(&mut self, lo: f64, hi: f64) -> f64 {
        let v: f64 = self.rng.gen_range(lo..hi);
        (v * 100.0).round() / 100.0
    }

    fn x(&mut self) -> f64 {
        let (x0, _, w, _) = self.vb;
        self.num(x0 + 0.05 * w, x0 + 0.95 * w)
    }

    fn y(&mut self) -> f64 {
        let (_, y0, _, h) = self.vb;
        self.num(y0 + 0.05 * h, y0 + 0.95 * h)
    }

    fn small(&mut self) -> f64 {
        let s = self.vb.2.min(self.vb.3) * 0.15;
        self.num(-s, s)
    }

    fn size(&mut self) -> f64 {
        let s = self.vb.2.min(self.vb.3);
        self.num(0.1 * s, 0.4 * s)
    }

    fn color(&mut self) -> &'static str {
        if self.rng.gen_bool(0.2) {
            ALT_COLORS.choose(&mut self.rng).copied().unwrap_or("black")
        } else {
            COLORS.choose(&mut self.rng).copied().unwrap_or("black")
        }
    }

    /// `d` attribute with 3..10 segments drawn from the full command set.
    fn path_data(&mut self) -> String {
        let mut d = String::new();
        let rel_move = self.rng.gen_bool(0.3);
        let (mx, my) = (self.x(), self.y());
        let _ = write!(d, "{}{mx} {my}", if rel_move { 'm' } else { 'M' });
        let n = self.rng.gen_range(3..10);
        for _ in 0..n {
            let letter = PATH_LETTERS.as_bytes()[self.rng.gen_range(0..PATH_LETTERS.len())] as char;
            let rel = letter.is_ascii_lowercase();
            let pt = |g: &mut Gen| if rel { (g.small(), g.small()) } else { (g.x(), g.y()) };
            let args: Vec<f64> = match letter.to_ascii_uppercase() {
                'L' | 'T' => {
                    let p = pt(self);
                    vec![p.0, p.1]
                }
                'H' => vec![if rel { self.small() } else { self.x() }],
                'V' => vec![if rel { self.small() } else { self.y() }],
                'C' => {
                    let (a, b, c) = (pt(self), pt(self), pt(self));
                    vec![a.0, a.1, b.0, b.1, c.0, c.1]
                }
                'S' | 'Q' => {
                    let (a, b) = (pt(self), pt(self));
                    vec![a.0, a.1, b.0, b.1]
                }
                'A' => {
                    let (r1, r2) = (self.size() / 2.0, self.size() / 2.0);
                    let phi = self.num(0.0, 90.0);
                    let large = self.rng.gen_bool(0.5) as u8;
                    let sweep = self.rng.gen_bool(0.5) as u8;
                    let p = pt(self);
                    vec![r1, r2, phi, large as f64, sweep as f64, p.0, p.1]
                }
                _ => unreachable!(),
            };
            d.push(' ');
            d.push(letter);
            // compact separators now and then, the parser must cope
            let sep = if self.rng.gen_bool(0.3) { "," } else { " " };
            let nums: Vec<String> = args.iter().map(|v| v.to_string()).collect();
            d.push_str(&nums.join(sep));
        }
        if self.rng.gen_bool(0.7) {
            d.push_str(if self.rng.gen_bool(0.5) { " Z" } else { "z" });
        }
        d
    }

    fn transform(&mut self) -> String {
        match self.rng.gen_range(0..6) {
            0 => format!("translate({} {})", self.small(), self.small()),
            1 => format!("scale({})", self.num(0.5, 1.2)),
            2 => format!("rotate({} {} {})", self.num(-45.0, 45.0), self.x(), self.y()),
            3 => format!("matrix(0.9 0.1 -0.1 0.9 {} {})", self.small(), self.small()),
            4 => format!("skewX({})", self.num(-15.0, 15.0)),
            _ => format!(
                "translate({},{}) scale({},{})",
                self.small(),
                self.small(),
                self.num(0.6, 1.0),
                self.num(0.6, 1.0)
            ),
        }
    }

    fn element(&mut self, fill: &str, depth: u32) -> String {
        let kind = if depth < 2 { self.rng.gen_range(0..8) } else { self.rng.gen_range(0..7) };
        let fill_attr = |f: &str| if f.is_empty() { String::new() } else { format!(r#" fill="{f}""#) };
        match kind {
            0 | 1 => format!(r#"<path{} d="{}"/>"#, fill_attr(fill), self.path_data()),
            2 => {
                let (x, y, w, h) = (self.x(), self.y(), self.size(), self.size());
                let rx =
                    if self.rng.gen_bool(0.4) { format!(r#" rx="{}""#, self.num(0.5, w / 4.0)) } else { String::new() };
                format!(r#"<rect{} x="{x}" y="{y}" width="{w}" height="{h}"{rx}/>"#, fill_attr(fill))
            }
            3 => {
                format!(r#"<circle{} cx="{}" cy="{}" r="{}"/>"#, fill_attr(fill), self.x(), self.y(), self.size() / 2.0)
            }
            4 => format!(
                r#"<ellipse{} cx="{}" cy="{}" rx="{}" ry="{}"/>"#,
                fill_attr(fill),
                self.x(),
                self.y(),
                self.size() / 2.0,
                self.size() / 3.0
            ),
            5 | 6 => {
                let n = self.rng.gen_range(3..7);
                let pts: Vec<String> = (0..n).map(|_| format!("{},{}", self.x(), self.y())).collect();
                let tag = if kind == 5 { "polygon" } else { "polyline" };
                format!(r#"<{tag}{} points="{}"/>"#, fill_attr(fill), pts.join(" "))
            }
            _ => {
                // group: children inherit the group fill unless they set one
                let group_fill = self.color();
                let transform = self.transform();
                let n = self.rng.gen_range(1..4);
                let mut inner = String::new();
                for _ in 0..n {
                    let child_fill = if self.rng.gen_bool(0.5) { "" } else { self.color() };
                    inner.push_str(&self.element(child_fill, depth + 1));
                }
                format!(r#"<g fill="{group_fill}" transform="{transform}">{inner}</g>"#)
            }
        }
    }
}

/// One raw file. Different `(seed, index)` pairs give independent samples.
pub fn synth_sample(seed: u64, index: usize) -> (String, SynthFlavor) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64);
    let flavor = match rng.gen_range(0..100) {
        0..=3 => SynthFlavor::Monochrome,
        4..=6 => SynthFlavor::Gradient,
        7..=8 => SynthFlavor::StrokeOnly,
        9..=10 => SynthFlavor::Truncated,
        _ => SynthFlavor::Normal,
    };
    let vb = *VIEWBOXES.choose(&mut rng).expect("non-empty");
    let mut g = Gen { rng, vb };
    let header = if g.rng.gen_bool(0.15) && vb.0 == 0.0 && vb.1 == 0.0 {
        format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}">"#, vb.2, vb.3)
    } else {
        format!(r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#, vb.0, vb.1, vb.2, vb.3)
    };
    let mut body = String::new();
    match flavor {
        SynthFlavor::Monochrome => {
            for _ in 0..g.rng.gen_range(1..4) {
                body.push_str(&format!(r##"<path fill="#222222" d="{}"/>"##, g.path_data()));
            }
        }
        SynthFlavor::Gradient => {
            body.push_str(
                r##"<defs><linearGradient id="lg"><stop offset="0" stop-color="#fff"/></linearGradient></defs>"##,
            );
            body.push_str(&format!(r#"<path fill="url(#lg)" d="{}"/>"#, g.path_data()));
            body.push_str(&g.element("#E53935", 0));
        }
        SynthFlavor::StrokeOnly => {
            body.push_str(&format!(r##"<path fill="none" stroke="#333" d="{}"/>"##, g.path_data()));
            body.push_str(&format!(
                r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#E53935"/>"##,
                g.x(),
                g.y(),
                g.x(),
                g.y()
            ));
        }
        SynthFlavor::Normal | SynthFlavor::Truncated => {
            let n = g.rng.gen_range(2..7);
            // the first two elements use distinct colors so most samples are multicolor
            let first = g.rng.gen_range(0..COLORS.len());
            for i in 0..n {
                let fill = match i {
                    0 => COLORS[first],
                    1 => COLORS[(first + 1 + g.rng.gen_range(0..COLORS.len() - 1)) % COLORS.len()],
                    _ => g.color(),
                };
                body.push_str(&g.element(fill, 0));
            }
        }
    }
    let mut text = format!("{header}{body}</svg>");
    if flavor == SynthFlavor::Truncated {
        let cut = text.len() * 2 / 3;
        let cut = (0..=cut).rev().find(|&i| text.is_char_boundary(i)).unwrap_or(0);
        text.truncate(cut);
    }
    (text, flavor)
}

pub fn synth_corpus(seed: u64, n: usize) -> Vec<String> {
    (0..n).map(|i| synth_sample(seed, i).0).collect()
}

const SUBJECTS: [&str; 12] =
    ["ball", "house", "tree", "cup", "star", "fish", "key", "leaf", "umbrella", "clock", "wallet", "rocket"];
const ADJECTIVES: [&str; 8] = ["red", "blue", "green", "yellow", "purple", "orange", "brown", "teal"];

/// Short icon descriptions.
pub fn synth_prompts(seed: u64, n: usize) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let a = ADJECTIVES.choose(&mut rng).expect("non-empty");
            let s = SUBJECTS.choose(&mut rng).expect("non-empty");
            let b = ADJECTIVES.choose(&mut rng).expect("non-empty");
            format!("a {a} {s} with a {b} accent")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::{normalize_pipeline, NormalizeConfig};
    use crate::parse::parse_path_data;

    #[test]
    fn deterministic() {
        assert_eq!(synth_corpus(3, 20), synth_corpus(3, 20));
        assert_ne!(synth_corpus(3, 5), synth_corpus(4, 5));
    }

    #[test]
    fn covers_every_command_letter() {
        let corpus = synth_corpus(1, 200);
        let mut letters = std::collections::BTreeSet::new();
        for text in &corpus {
            for d in text.split(" d=\"").skip(1) {
                if let Some(end) = d.find('"') {
                    if let Ok(cmds) = parse_path_data(&d[..end]) {
                        letters.extend(cmds.iter().map(|c| c.letter));
                    }
                }
            }
        }
        for l in "MmLlHhVvCcSsQqTtAaZz".chars() {
            assert!(letters.contains(&l), "missing {l}");
        }
        for tag in ["<rect", "<circle", "<ellipse", "<polygon", "<polyline", "<g ", "rotate(", "skewX(", "matrix("] {
            assert!(corpus.iter().any(|t| t.contains(tag)), "missing {tag}");
        }
    }

    #[test]
    fn mostly_kept() {
        let cfg = NormalizeConfig::default();
        let kept = synth_corpus(1, 200).iter().filter(|t| normalize_pipeline(t, &cfg).is_ok()).count();
        assert!(kept > 150, "kept {kept}");
    }
}
