//! Path data (`d` attribute) grammar.
//!
//! The parser accepts the complete SVG 1.1 path grammar: commas and whitespace
//! are interchangeable separators, numbers may use exponents, arc flags may be
//! packed without separators, and repeated argument groups are expanded into
//! separate commands (an implicit group after `M`/`m` becomes `L`/`l`).

use super::{ParseError, ParseErrorKind};
use serde::{Deserialize, Serialize};
use std::fmt;

/// One path command exactly as written, relative letters untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawCommand {
    pub letter: char,
    pub args: Vec<f64>,
}

impl RawCommand {
    pub fn new(letter: char, args: Vec<f64>) -> Self {
        debug_assert_eq!(arity(letter), Some(args.len()), "arity mismatch for {letter}");
        RawCommand { letter, args }
    }

    pub fn is_relative(&self) -> bool {
        self.letter.is_ascii_lowercase()
    }
}

/// Number of arguments per command letter.
pub fn arity(letter: char) -> Option<usize> {
    match letter.to_ascii_uppercase() {
        'M' | 'L' | 'T' => Some(2),
        'H' | 'V' => Some(1),
        'C' => Some(6),
        'S' | 'Q' => Some(4),
        'A' => Some(7),
        'Z' => Some(0),
        _ => None,
    }
}

pub fn parse_path_data(d: &str) -> Result<Vec<RawCommand>, ParseError> {
    let mut lexer = Lexer { bytes: d.as_bytes(), pos: 0 };
    let mut out = Vec::new();
    lexer.skip_wsp();
    while !lexer.at_end() {
        let cmd_pos = lexer.pos;
        let c = lexer.bytes[lexer.pos];
        let letter = c as char;
        let n = match arity(letter) {
            Some(n) if c.is_ascii_alphabetic() => n,
            _ if is_number_start(c) => {
                return Err(ParseError::at(cmd_pos, ParseErrorKind::ExpectedCommand));
            }
            _ => {
                return Err(ParseError::at(cmd_pos, ParseErrorKind::UnknownCommand(letter)));
            }
        };
        lexer.pos += 1;
        lexer.skip_wsp();

        if n == 0 {
            out.push(RawCommand { letter, args: Vec::new() });
            // A number right after Z is an error, a new command letter is not.
            if !lexer.at_end() && is_number_start(lexer.peek()) {
                return Err(ParseError::at(lexer.pos, ParseErrorKind::UnexpectedNumber));
            }
            continue;
        }

        let mut current = letter;
        let mut first = true;
        loop {
            let args = lexer.read_group(current, n)?;
            out.push(RawCommand { letter: current, args });
            if first {
                current = match current {
                    'M' => 'L',
                    'm' => 'l',
                    other => other,
                };
                first = false;
            }
            lexer.skip_comma_wsp();
            if lexer.at_end() || !is_number_start(lexer.peek()) {
                break;
            }
        }
    }
    Ok(out)
}

/// Serializes commands as `M10 10 L20 20 Z`; parsing the result yields the input.
pub fn serialize_path_data(commands: &[RawCommand]) -> String {
    let mut out = String::new();
    for (i, cmd) in commands.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push(cmd.letter);
        for (j, v) in cmd.args.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            push_number(&mut out, *v);
        }
    }
    out
}

pub(crate) fn push_number(out: &mut String, v: f64) {
    use fmt::Write;
    if v == 0.0 {
        out.push('0');
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        let _ = write!(out, "{}", v as i64);
    } else {
        let _ = write!(out, "{v}");
    }
}

fn is_number_start(c: u8) -> bool {
    c.is_ascii_digit() || c == b'-' || c == b'+' || c == b'.'
}

fn is_wsp(c: u8) -> bool {
    matches!(c, b' ' | b'\t' | b'\n' | b'\r' | 0x0C)
}

struct Lexer<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> u8 {
        self.bytes[self.pos]
    }

    fn skip_wsp(&mut self) {
        while !self.at_end() && is_wsp(self.peek()) {
            self.pos += 1;
        }
    }

    fn skip_comma_wsp(&mut self) {
        self.skip_wsp();
        if !self.at_end() && self.peek() == b',' {
            self.pos += 1;
            self.skip_wsp();
        }
    }

    fn read_group(&mut self, letter: char, n: usize) -> Result<Vec<f64>, ParseError> {
        let mut args = Vec::with_capacity(n);
        let is_arc = letter.eq_ignore_ascii_case(&'a');
        for i in 0..n {
            if i > 0 {
                self.skip_comma_wsp();
            }
            if self.at_end() {
                return Err(ParseError::at(self.pos, ParseErrorKind::WrongArity { letter, expected: n, found: i }));
            }
            let v = if is_arc && (i == 3 || i == 4) { self.read_flag()? } else { self.read_number()? };
            args.push(v);
        }
        Ok(args)
    }

    fn read_flag(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            b'0' => {
                self.pos += 1;
                Ok(0.0)
            }
            b'1' => {
                self.pos += 1;
                Ok(1.0)
            }
            _ => Err(ParseError::at(self.pos, ParseErrorKind::InvalidFlag)),
        }
    }

    fn read_number(&mut self) -> Result<f64, ParseError> {
        let (v, end) =
            scan_number(self.bytes, self.pos).ok_or_else(|| ParseError::at(self.pos, ParseErrorKind::InvalidNumber))?;
        if !v.is_finite() {
            return Err(ParseError::at(self.pos, ParseErrorKind::NonFinite));
        }
        self.pos = end;
        Ok(v)
    }
}

/// Scans an SVG number starting at `start`; returns the value and end offset.
pub(crate) fn scan_number(bytes: &[u8], start: usize) -> Option<(f64, usize)> {
    let mut i = start;
    if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < bytes.len() && bytes[i] == b'.' {
        let frac_start = i + 1;
        let mut j = frac_start;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > frac_start || digits > 0 {
            digits += j - frac_start;
            i = j;
        }
    }
    if digits == 0 {
        return None;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        let exp_start = j;
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        if j > exp_start {
            i = j;
        }
    }
    let text = std::str::from_utf8(&bytes[start..i]).ok()?;
    text.parse::<f64>().ok().map(|v| (v, i))
}

/// Parses a whitespace/comma separated list of numbers (points, viewBox).
pub(crate) fn parse_number_list(s: &str) -> Option<Vec<f64>> {
    let bytes = s.as_bytes();
    let mut lexer = Lexer { bytes, pos: 0 };
    let mut out = Vec::new();
    lexer.skip_wsp();
    while !lexer.at_end() {
        let (v, end) = scan_number(bytes, lexer.pos)?;
        if !v.is_finite() {
            return None;
        }
        out.push(v);
        lexer.pos = end;
        lexer.skip_comma_wsp();
    }
    Some(out)
}
