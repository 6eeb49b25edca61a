//! JSON documents for maps, spectra and reports.
//!
//! Floats are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite `f64` exactly. Non-finite values become `null`.

use std::collections::BTreeSet;
use std::io::{self, Write};

use num_complex::Complex64;
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::jet::{JetMap, MultiIndex, Polynomial};
use crate::linalg::CMatrix;

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDocument {
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDocument {
    /// 1-based target component.
    pub target: usize,
    pub terms: Vec<TermDocument>,
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub dim: usize,
    pub order: usize,
    pub components: Vec<ComponentDocument>,
}

#[derive(Clone, Copy, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexDocument {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexDocument {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexDocument> for Complex64 {
    fn from(c: ComplexDocument) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Clone, Debug, PartialEq, SerializeDerive, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumDocument {
    pub eigenvalues: Vec<ComplexDocument>,
}

impl MapDocument {
    pub fn from_jet(f: &JetMap) -> Self {
        let components = (0..f.dim())
            .map(|j| ComponentDocument {
                target: j + 1,
                terms: f
                    .component(j)
                    .terms()
                    .map(|(p, c)| TermDocument {
                        exponents: p.exponents().to_vec(),
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect();
        Self {
            dim: f.dim(),
            order: f.order(),
            components,
        }
    }

    pub fn to_jet(&self) -> Result<JetMap> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Parse("dim must be positive".into()));
        }
        if self.order == 0 {
            return Err(Error::Parse("order must be positive".into()));
        }
        let mut comps = vec![Polynomial::zero(n); n];
        let mut seen: BTreeSet<(usize, MultiIndex)> = BTreeSet::new();
        for comp in &self.components {
            if comp.target == 0 || comp.target > n {
                return Err(Error::Parse(format!(
                    "target {} out of range 1..={n}",
                    comp.target
                )));
            }
            for t in &comp.terms {
                if t.exponents.len() != n {
                    return Err(Error::Parse(format!(
                        "exponents {:?} in component {} have length {}, expected dim {n}",
                        t.exponents,
                        comp.target,
                        t.exponents.len()
                    )));
                }
                let p = MultiIndex::new(t.exponents.clone());
                if p.is_zero() {
                    return Err(Error::Parse(format!(
                        "constant term in component {} (maps must fix the origin)",
                        comp.target
                    )));
                }
                if p.degree() > self.order {
                    return Err(Error::Parse(format!(
                        "exponents {:?} in component {} exceed order {}",
                        t.exponents, comp.target, self.order
                    )));
                }
                if !(t.re.is_finite() && t.im.is_finite()) {
                    return Err(Error::Parse(format!(
                        "non-finite coefficient at component {}, exponents {:?}",
                        comp.target, t.exponents
                    )));
                }
                if !seen.insert((comp.target, p.clone())) {
                    return Err(Error::DuplicateKey {
                        component: comp.target,
                        exponents: t.exponents.clone(),
                    });
                }
                comps[comp.target - 1].set(p, Complex64::new(t.re, t.im));
            }
        }
        JetMap::from_components(self.order, comps)
    }
}

impl SpectrumDocument {
    pub fn values(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().map(|&c| c.into()).collect()
    }

    pub fn from_values(values: &[Complex64]) -> Self {
        Self {
            eigenvalues: values.iter().map(|&c| c.into()).collect(),
        }
    }
}

pub fn matrix_document(m: &CMatrix) -> Vec<Vec<ComplexDocument>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].into()).collect())
        .collect()
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn parse_map(text: &str) -> Result<JetMap> {
    let doc: MapDocument = serde_json::from_str(text).map_err(parse_error)?;
    doc.to_jet()
}

pub fn serialize_map(f: &JetMap) -> String {
    to_json_string(&MapDocument::from_jet(f))
}

pub fn parse_spectrum(text: &str) -> Result<Vec<Complex64>> {
    let doc: SpectrumDocument = serde_json::from_str(text).map_err(parse_error)?;
    if doc.eigenvalues.is_empty() {
        return Err(Error::Parse("spectrum has no eigenvalues".into()));
    }
    Ok(doc.values())
}

/// Pretty JSON layout with fixed-width exponent floats.
pub struct CanonicalFormatter {
    inner: PrettyFormatter<'static>,
}

impl CanonicalFormatter {
    pub fn new() -> Self {
        Self {
            inner: PrettyFormatter::with_indent(b"  "),
        }
    }
}

impl Default for CanonicalFormatter {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Canonical JSON text with a trailing newline.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter::new());
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
