//! Rational maps `g = N/D` of the Riemann sphere, a small expression parser
//! and polynomial root finding.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

/// Roots closer than this (relative) are merged into one multiple root.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

/// Polynomial with coefficients in increasing degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly(pub Vec<C>);

impl Poly {
    pub fn constant(c: C) -> Self {
        Poly(vec![c])
    }

    pub fn z() -> Self {
        Poly(vec![ZERO, ONE])
    }

    fn trimmed(mut self) -> Self {
        let scale = self.0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while self.0.len() > 1 && self.0.last().unwrap().norm() <= 1e-14 * scale {
            self.0.pop();
        }
        if self.0.is_empty() {
            self.0.push(ZERO);
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.norm() == 0.0)
    }

    pub fn eval(&self, z: C) -> C {
        self.0.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.0.len() == 1 {
            return Poly(vec![ZERO]);
        }
        Poly(self.0.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|k| self.0.get(k).copied().unwrap_or(ZERO) + o.0.get(k).copied().unwrap_or(ZERO)).collect())
            .trimmed()
    }

    pub fn scale(&self, c: C) -> Poly {
        Poly(self.0.iter().map(|&a| a * c).collect()).trimmed()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = vec![ZERO; self.0.len() + o.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    /// Quotient by `z - r`, dropping the remainder.
    fn deflate(&self, r: C) -> Poly {
        let n = self.degree();
        let mut q = vec![ZERO; n];
        let mut acc = ZERO;
        for k in (1..=n).rev() {
            acc = acc * r + self.0[k];
            q[k - 1] = acc;
        }
        Poly(q)
    }

    /// Coefficients padded to degree `d`, reversed: `z^d p(1/z)`.
    fn reversed(&self, d: usize) -> Poly {
        let mut c = self.0.clone();
        c.resize(d + 1, ZERO);
        c.reverse();
        Poly(c)
    }

    /// All roots with multiplicity, `degree()` of them.
    pub fn roots(&self) -> Result<Vec<C>> {
        let p = self.clone().trimmed();
        let n = p.degree();
        let c = &p.0;
        let roots = match n {
            0 => Vec::new(),
            1 => vec![-c[0] / c[1]],
            2 => {
                let (a, b, cc) = (c[2], c[1], c[0]);
                let disc = (b * b - 4.0 * a * cc).sqrt();
                let q = if (b.conj() * disc).re >= 0.0 { -0.5 * (b + disc) } else { -0.5 * (b - disc) };
                if q.norm() == 0.0 {
                    vec![ZERO, ZERO]
                } else {
                    vec![q / a, cc / q]
                }
            }
            _ => {
                let lead = c[n];
                let mut m = DMatrix::<C>::zeros(n, n);
                for i in 1..n {
                    m[(i, i - 1)] = ONE;
                }
                for i in 0..n {
                    m[(i, n - 1)] = -c[i] / lead;
                }
                let schur = Schur::try_new(m, 1e-15, 10_000)
                    .ok_or_else(|| Error::RootFindFailure(format!("eigenvalue iteration did not converge (degree {n})")))?;
                let (_, t) = schur.unpack();
                (0..n).map(|i| polish(&p, t[(i, i)])).collect()
            }
        };
        if roots.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::RootFindFailure("non-finite root".into()));
        }
        Ok(cluster_roots(roots))
    }
}

fn polish(p: &Poly, mut z: C) -> C {
    let dp = p.derivative();
    for _ in 0..8 {
        let d = dp.eval(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = p.eval(z) / d;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Replaces each group of roots within `ROOT_CLUSTER_TOL` by copies of its mean.
fn cluster_roots(mut roots: Vec<C>) -> Vec<C> {
    let n = roots.len();
    let mut group = vec![usize::MAX; n];
    for i in 0..n {
        if group[i] != usize::MAX {
            continue;
        }
        group[i] = i;
        for j in i + 1..n {
            if group[j] == usize::MAX && (roots[i] - roots[j]).norm() <= ROOT_CLUSTER_TOL * (1.0 + roots[i].norm()) {
                group[j] = i;
            }
        }
    }
    for g in 0..n {
        let members: Vec<usize> = (0..n).filter(|&k| group[k] == g).collect();
        if members.len() > 1 {
            let mean = members.iter().map(|&k| roots[k]).sum::<C>() / members.len() as f64;
            for k in members {
                roots[k] = mean;
            }
        }
    }
    roots
}

/// `g = num / den` without common roots, of degree at least 2.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalMap {
    pub num: Poly,
    pub den: Poly,
    pub source: String,
}

impl RationalMap {
    /// Cancels common roots and checks the degree.
    pub fn new(num: Poly, den: Poly, source: &str) -> Result<Self> {
        let (mut num, mut den) = (num.trimmed(), den.trimmed());
        if den.is_zero() {
            return Err(Error::Parse("denominator is zero".into()));
        }
        if num.is_zero() {
            return Err(Error::DegreeTooLow(0));
        }
        loop {
            let scale = den.0.iter().map(|c| c.norm()).fold(0.0, f64::max).max(num.0.iter().map(|c| c.norm()).fold(0.0, f64::max));
            let common = den.roots()?.into_iter().find(|&r| num.eval(r).norm() <= 1e-9 * scale * (1.0 + r.norm()).powi(num.degree() as i32));
            match common {
                Some(r) if den.degree() > 0 && num.degree() > 0 => {
                    num = num.deflate(r).trimmed();
                    den = den.deflate(r).trimmed();
                }
                _ => break,
            }
        }
        let lead = den.0[den.degree()];
        let g = RationalMap { num: num.scale(ONE / lead), den: den.scale(ONE / lead), source: source.into() };
        if g.degree() < 2 {
            return Err(Error::DegreeTooLow(g.degree()));
        }
        Ok(g)
    }

    pub fn parse(src: &str) -> Result<Self> {
        let text = src.replace('（', "(").replace('）', ")");
        let (n, d) = Parser::new(&text).parse()?;
        RationalMap::new(n, d, src)
    }

    pub fn degree(&self) -> usize {
        self.num.degree().max(self.den.degree())
    }

    /// `g(p)` on the sphere, in homogeneous coordinates so `∞` is handled.
    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let (a, b) = p.to_projective();
        let d = self.degree();
        let hom = |poly: &Poly| {
            let mut s = ZERO;
            let mut apow = ONE;
            for k in 0..=d {
                let c = poly.0.get(k).copied().unwrap_or(ZERO);
                if c != ZERO {
                    s += c * apow * b.powu((d - k) as u32);
                }
                apow *= a;
            }
            s
        };
        SpherePoint::from_projective(hom(&self.num), hom(&self.den))
    }

    /// `g` conjugated by `z -> 1/z`.
    pub fn flipped(&self) -> RationalMap {
        let d = self.degree();
        RationalMap { num: self.den.reversed(d).trimmed(), den: self.num.reversed(d).trimmed(), source: self.source.clone() }
    }

    /// Derivative at a finite point with finite image.
    pub fn derivative_at(&self, z: C) -> C {
        let (n, d) = (self.num.eval(z), self.den.eval(z));
        (self.num.derivative().eval(z) * d - n * self.den.derivative().eval(z)) / (d * d)
    }

    /// The `d` preimages of `w` with multiplicity; preimages at `∞` are
    /// returned as the north pole.
    pub fn preimages(&self, w: SpherePoint) -> Result<Vec<SpherePoint>> {
        let (p, q) = w.to_projective();
        // q N(z) - p D(z) = 0
        let eq = self.num.scale(q).add(&self.den.scale(-p));
        let d = self.degree();
        let mut out: Vec<SpherePoint> = if eq.is_zero() {
            return Err(Error::RootFindFailure("degenerate preimage equation".into()));
        } else {
            eq.roots()?.into_iter().map(SpherePoint::from_complex).collect()
        };
        while out.len() < d {
            out.push(SpherePoint::infinity());
        }
        Ok(out)
    }

    /// Fixed points with their multipliers `|g'|`, `∞` included.
    pub fn fixed_points(&self) -> Result<Vec<(SpherePoint, f64)>> {
        let eq = self.num.add(&self.den.mul(&Poly::z()).scale(-ONE));
        let mut out: Vec<(SpherePoint, f64)> =
            eq.roots()?.into_iter().map(|z| (SpherePoint::from_complex(z), self.derivative_at(z).norm())).collect();
        if self.num.degree() > self.den.degree() {
            let h = self.flipped();
            out.push((SpherePoint::infinity(), h.derivative_at(ZERO).norm()));
        }
        Ok(out)
    }

    /// Repelling fixed point with the largest multiplier.
    pub fn repelling_seed(&self) -> Result<(SpherePoint, f64)> {
        self.fixed_points()?
            .into_iter()
            .filter(|(_, m)| *m > 1.0 + 1e-9 && m.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or(Error::SeedNotRepelling)
    }
}

/// Recursive descent over `+ - * / ^`, parentheses, `z`, `i` and decimal
/// numbers. Each subexpression is a pair (numerator, denominator).
struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

type Frac = (Poly, Poly);

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser { s: src.as_bytes(), pos: 0 }
    }

    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(Error::Parse(format!("{msg} at position {}", self.pos)))
    }

    fn peek(&mut self) -> Option<u8> {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.s.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Frac> {
        let f = self.expr()?;
        if self.peek().is_some() {
            return self.err("unexpected character");
        }
        Ok(f)
    }

    fn expr(&mut self) -> Result<Frac> {
        let mut acc = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let mut t = self.term()?;
            if c == b'-' {
                t.0 = t.0.scale(-ONE);
            }
            acc = (acc.0.mul(&t.1).add(&t.0.mul(&acc.1)), acc.1.mul(&t.1));
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Frac> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let f = self.unary()?;
                    acc = (acc.0.mul(&f.0), acc.1.mul(&f.1));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let f = self.unary()?;
                    if f.0.is_zero() {
                        return self.err("division by zero");
                    }
                    acc = (acc.0.mul(&f.1), acc.1.mul(&f.0));
                }
                // implicit product such as `2z` or `(1+i)z`
                Some(b'z' | b'(' | b'i') => {
                    let f = self.unary()?;
                    acc = (acc.0.mul(&f.0), acc.1.mul(&f.1));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Frac> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let (n, d) = self.unary()?;
                Ok((n.scale(-ONE), d))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Frac> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let e: u32 = std::str::from_utf8(&self.s[start..self.pos])
                .unwrap()
                .parse()
                .map_err(|_| Error::Parse(format!("expected an integer exponent at position {start}")))?;
            if e > 64 {
                return self.err("exponent too large");
            }
            let mut out = (Poly::constant(ONE), Poly::constant(ONE));
            for _ in 0..e {
                out = (out.0.mul(&base.0), out.1.mul(&base.1));
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Frac> {
        let one = Poly::constant(ONE);
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let f = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(f)
            }
            Some(b'z') => {
                self.pos += 1;
                Ok((Poly::z(), one))
            }
            Some(b'i') => {
                self.pos += 1;
                Ok((Poly::constant(C::new(0.0, 1.0)), one))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.s.len() && matches!(self.s[self.pos], b'e' | b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.s.len() && matches!(self.s[self.pos], b'+' | b'-') {
                        self.pos += 1;
                    }
                    if self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    } else {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                let v: f64 = text.parse().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
                Ok((Poly::constant(C::new(v, 0.0)), one))
            }
            Some(_) => self.err("unexpected character"),
            None => self.err("unexpected end of input"),
        }
    }
}
