//! Deficiency-one group presentations and free words.
//!
//! The text format is a sequence of `;`-terminated statements:
//!
//! ```text
//! gens x y;
//! rel x y x Y X Y;
//! weights 1 1;      # optional
//! meridian x;       # optional
//! ```
//!
//! Generator names are single lower-case ASCII letters; the upper-case letter
//! denotes the inverse. `#` starts a comment running to the end of the line.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
#[cfg(test)]
use crate::linalg::C64;

/// Longest relator accepted by the parser.
pub const MAX_RELATOR_LEN: usize = 100_000;

/// A generator or its inverse. `generator` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// Element of the free group on the generators, kept freely reduced.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FreeWord(Vec<Letter>);

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    /// Builds a word and freely reduces it.
    pub fn new(letters: Vec<Letter>) -> Self {
        free_reduce(&FreeWord(letters))
    }

    /// Builds a word from 1-based signed indices, e.g. `[1, 2, -1]` for `x y X`.
    pub fn from_signed(indices: &[i64]) -> Self {
        let letters = indices
            .iter()
            .map(|&s| {
                assert!(s != 0, "generator indices are 1-based");
                Letter::new(s.unsigned_abs() as usize - 1, s < 0)
            })
            .collect();
        FreeWord::new(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        free_reduce(&FreeWord(v))
    }

    /// Prefix of the first `len` letters (not re-reduced; prefixes of reduced words are reduced).
    pub fn prefix(&self, len: usize) -> FreeWord {
        FreeWord(self.0[..len].to_vec())
    }

    /// Value of the abelianization `h` on this word.
    pub fn weight(&self, h: &[i64]) -> i64 {
        self.0.iter().map(|l| l.sign() * h[l.generator]).sum()
    }

    /// Exponent sum of each generator.
    pub fn exponent_sums(&self, k: usize) -> Vec<i64> {
        let mut s = vec![0; k];
        for l in &self.0 {
            s[l.generator] += l.sign();
        }
        s
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn format(&self, names: &[char]) -> String {
        self.0
            .iter()
            .map(|l| {
                let c = names[l.generator];
                if l.inverse {
                    c.to_ascii_uppercase().to_string()
                } else {
                    c.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Free reduction with a stack; the result equals `w` in the free group.
pub fn free_reduce(w: &FreeWord) -> FreeWord {
    let mut out: Vec<Letter> = Vec::with_capacity(w.0.len());
    for &l in &w.0 {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    FreeWord(out)
}

/// Ordered product of generator images (inverse letters use `inverses`).
pub fn word_eval_with(w: &FreeWord, images: &[CMatrix], inverses: &[CMatrix]) -> CMatrix {
    let n = images.first().map(|m| m.nrows()).unwrap_or(0);
    let mut acc = CMatrix::identity(n, n);
    for l in w.letters() {
        let g = if l.inverse {
            &inverses[l.generator]
        } else {
            &images[l.generator]
        };
        acc = &acc * g;
    }
    acc
}

/// Inverts every generator image.
pub fn invert_images(images: &[CMatrix]) -> Result<Vec<CMatrix>> {
    images
        .iter()
        .enumerate()
        .map(|(i, m)| {
            if m.nrows() != m.ncols() {
                return Err(Error::Dimension(format!("image {i} is not square")));
            }
            m.clone().try_inverse().ok_or(Error::SingularImage(i))
        })
        .collect()
}

/// Evaluates a word on generator images; the empty word gives the identity.
pub fn word_eval(w: &FreeWord, images: &[CMatrix]) -> Result<CMatrix> {
    if let Some(first) = images.first() {
        if images.iter().any(|m| m.shape() != first.shape()) {
            return Err(Error::Dimension("images of different sizes".into()));
        }
    }
    let inv = invert_images(images)?;
    Ok(word_eval_with(w, images, &inv))
}

/// A deficiency-one presentation with its abelianization weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    names: Vec<char>,
    relators: Vec<FreeWord>,
    weights: Vec<i64>,
    meridian: Option<FreeWord>,
}

impl Presentation {
    /// Validates the invariants. `weights = None` infers them from the relators.
    pub fn new(
        names: Vec<char>,
        relators: Vec<FreeWord>,
        weights: Option<Vec<i64>>,
        meridian: Option<FreeWord>,
    ) -> Result<Self> {
        let k = names.len();
        if k == 0 {
            return Err(Error::RelatorCount {
                gens: 0,
                found: relators.len(),
                expected: 0,
            });
        }
        if relators.len() + 1 != k {
            return Err(Error::RelatorCount {
                gens: k,
                found: relators.len(),
                expected: k - 1,
            });
        }
        for (i, r) in relators.iter().enumerate() {
            if r.len() > MAX_RELATOR_LEN {
                return Err(Error::RelatorTooLong {
                    index: i,
                    len: r.len(),
                    limit: MAX_RELATOR_LEN,
                });
            }
        }
        let relators: Vec<FreeWord> = relators.iter().map(free_reduce).collect();
        let weights = match weights {
            Some(h) => {
                if h.len() != k {
                    return Err(Error::InconsistentWeights(format!(
                        "{} weights for {} generators",
                        h.len(),
                        k
                    )));
                }
                if let Some((j, _)) = relators.iter().enumerate().find(|(_, r)| r.weight(&h) != 0) {
                    return Err(Error::InconsistentWeights(format!(
                        "relator {} has nonzero weight under h",
                        j + 1
                    )));
                }
                let g = h.iter().fold(0i64, |g, &x| g.gcd(&x));
                if g != 1 {
                    return Err(Error::InconsistentWeights(format!(
                        "weights have gcd {g}, h must be onto Z"
                    )));
                }
                h
            }
            None => infer_weights(k, &relators)?,
        };
        Ok(Presentation {
            names,
            relators,
            weights,
            meridian: meridian.map(|m| free_reduce(&m)),
        })
    }

    /// Builds a presentation from generator names and relators written in the text alphabet.
    pub fn from_strings(names: &str, relators: &[&str], weights: Option<Vec<i64>>) -> Result<Self> {
        let mut text = format!(
            "gens {};",
            names
                .chars()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        );
        for r in relators {
            text.push_str(&format!(" rel {r};"));
        }
        if let Some(h) = weights {
            text.push_str(&format!(
                " weights {};",
                h.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            ));
        }
        parse_presentation(&text)
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn relators(&self) -> &[FreeWord] {
        &self.relators
    }

    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    pub fn meridian(&self) -> Option<&FreeWord> {
        self.meridian.as_ref()
    }

    /// Largest relator residual `max_j |W_j(images) - I|` (Frobenius).
    pub fn relator_residual(&self, images: &[CMatrix]) -> Result<f64> {
        let inv = invert_images(images)?;
        let n = images.first().map(|m| m.nrows()).unwrap_or(0);
        let id = CMatrix::identity(n, n);
        Ok(self
            .relators
            .iter()
            .map(|w| (word_eval_with(w, images, &inv) - &id).norm())
            .fold(0.0, f64::max))
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.names.iter().map(|c| c.to_string()).collect();
        writeln!(f, "gens {};", gens.join(" "))?;
        for r in &self.relators {
            writeln!(f, "rel {};", r.format(&self.names))?;
        }
        let w: Vec<String> = self.weights.iter().map(|x| x.to_string()).collect();
        write!(f, "weights {};", w.join(" "))?;
        if let Some(m) = &self.meridian {
            write!(f, "\nmeridian {};", m.format(&self.names))?;
        }
        Ok(())
    }
}

/// Solves `h(W_j) = 0` over the integers, normalized to gcd 1 and first nonzero weight positive.
fn infer_weights(k: usize, relators: &[FreeWord]) -> Result<Vec<i64>> {
    if k == 1 {
        return Ok(vec![1]);
    }
    let rows: Vec<Vec<BigRational>> = relators
        .iter()
        .map(|r| {
            r.exponent_sums(k)
                .into_iter()
                .map(|e| BigRational::from_integer(BigInt::from(e)))
                .collect()
        })
        .collect();
    let kernel = rational_kernel(rows, k);
    if kernel.len() != 1 {
        return Err(Error::InconsistentWeights(format!(
            "exponent-sum matrix has a {}-dimensional kernel, expected 1",
            kernel.len()
        )));
    }
    let v = &kernel[0];
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|q| (q * BigRational::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    for x in ints.iter_mut() {
        *x = &*x / &g;
    }
    if ints
        .iter()
        .find(|x| !x.is_zero())
        .map(|x| x.is_negative())
        .unwrap_or(false)
    {
        for x in ints.iter_mut() {
            *x = -&*x;
        }
    }
    ints.iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::InconsistentWeights("weight out of range".into()))
        })
        .collect()
}

/// Basis of the right kernel of a rational matrix by reduced row echelon form.
fn rational_kernel(mut rows: Vec<Vec<BigRational>>, cols: usize) -> Vec<Vec<BigRational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let piv = rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x = &*x / &piv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let d = &f * &rows[r][j];
                    rows[i][j] = &rows[i][j] - d;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![BigRational::zero(); cols];
            v[free] = BigRational::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[i][free].clone();
            }
            v
        })
        .collect()
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            _src: src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    /// Reads one whitespace/`;`-delimited token with its start position.
    fn token(&mut self) -> Option<(String, usize, usize)> {
        self.skip_ws();
        let (line, col) = (self.line, self.col);
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == ';' || c == '#' {
                break;
            }
            s.push(c);
            self.bump();
        }
        if s.is_empty() {
            None
        } else {
            Some((s, line, col))
        }
    }
}

/// Parses the presentation text format (see the module docs).
pub fn parse_presentation(text: &str) -> Result<Presentation> {
    let mut cur = Cursor::new(text);
    let mut names: Option<Vec<char>> = None;
    let mut relators = Vec::new();
    let mut weights: Option<Vec<i64>> = None;
    let mut meridian_raw: Option<Vec<(char, usize, usize)>> = None;

    loop {
        cur.skip_ws();
        if cur.peek().is_none() {
            break;
        }
        let Some((kw, line, col)) = cur.token() else {
            return Err(cur.err("expected a statement keyword"));
        };
        let mut args = Vec::new();
        loop {
            cur.skip_ws();
            match cur.peek() {
                Some(';') => {
                    cur.bump();
                    break;
                }
                None => return Err(cur.err("missing `;`")),
                _ => {
                    let tok = cur.token().expect("non-empty token");
                    args.push(tok);
                }
            }
        }
        let syntax = |msg: String| Error::Syntax { line, col, msg };
        match kw.as_str() {
            "gens" => {
                if names.is_some() {
                    return Err(syntax("duplicate `gens` statement".into()));
                }
                let mut v = Vec::new();
                for (tok, l, c) in &args {
                    for ch in tok.chars() {
                        if !ch.is_ascii_lowercase() {
                            return Err(Error::Syntax {
                                line: *l,
                                col: *c,
                                msg: format!(
                                    "generator name `{ch}` must be a lower-case ASCII letter"
                                ),
                            });
                        }
                        if v.contains(&ch) {
                            return Err(Error::Syntax {
                                line: *l,
                                col: *c,
                                msg: format!("duplicate generator `{ch}`"),
                            });
                        }
                        v.push(ch);
                    }
                }
                if v.is_empty() {
                    return Err(syntax("`gens` needs at least one generator".into()));
                }
                names = Some(v);
            }
            "rel" | "meridian" => {
                let Some(ns) = &names else {
                    return Err(syntax(format!("`{kw}` before `gens`")));
                };
                let mut letters = Vec::new();
                let mut raw = Vec::new();
                for (tok, l, c) in &args {
                    for (off, ch) in tok.chars().enumerate() {
                        raw.push((ch, *l, c + off));
                        let lower = ch.to_ascii_lowercase();
                        let Some(idx) = ns.iter().position(|&n| n == lower) else {
                            return Err(Error::Syntax {
                                line: *l,
                                col: c + off,
                                msg: format!("unknown generator `{ch}`"),
                            });
                        };
                        letters.push(Letter::new(idx, ch.is_ascii_uppercase()));
                    }
                }
                if kw == "rel" {
                    if letters.len() > MAX_RELATOR_LEN {
                        return Err(Error::RelatorTooLong {
                            index: relators.len(),
                            len: letters.len(),
                            limit: MAX_RELATOR_LEN,
                        });
                    }
                    if letters.is_empty() {
                        // `rel ;` is an empty statement, not a relator
                        continue;
                    }
                    relators.push(FreeWord::new(letters));
                } else {
                    meridian_raw = Some(raw);
                }
            }
            "weights" => {
                let mut v = Vec::new();
                for (tok, l, c) in &args {
                    let x: i64 = tok.parse().map_err(|_| Error::Syntax {
                        line: *l,
                        col: *c,
                        msg: format!("`{tok}` is not an integer"),
                    })?;
                    v.push(x);
                }
                weights = Some(v);
            }
            other => return Err(syntax(format!("unknown statement `{other}`"))),
        }
    }
    let Some(names) = names else {
        return Err(cur.err("missing `gens` statement"));
    };
    let meridian = meridian_raw.map(|raw| {
        FreeWord::new(
            raw.iter()
                .map(|(ch, _, _)| {
                    let idx = names
                        .iter()
                        .position(|&n| n == ch.to_ascii_lowercase())
                        .unwrap();
                    Letter::new(idx, ch.is_ascii_uppercase())
                })
                .collect(),
        )
    });
    Presentation::new(names, relators, weights, meridian)
}
