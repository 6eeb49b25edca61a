//! The `dulac` command-line tool.

use std::ffi::OsString;
use std::io::{Read, Write};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::documents::{self, matrix_document, ComplexDocument, MapDocument};
use crate::error::{Error, Result};
use crate::group::{SubresonantGroup, SubresonantMap};
use crate::jet::{JetMap, DEFAULT_TOL_COEFF};
use crate::normalizer::{
    normalize, sample_instance, verify_conjugacy, ContractionGerm, NormalizeOptions, SampleOptions,
    DEFAULT_TOL_ROUNDTRIP,
};
use crate::resonance::{
    build_table, flag_spaces, g1_pattern, validate_spectrum, ResonanceTable, Spectrum, SupportMode,
    DEFAULT_TOL_RES,
};

pub const TOOL_VERSION: &str = concat!("dulac ", env!("CARGO_PKG_VERSION"));

pub const ENV_TOL_RES: &str = "DULAC_TOL_RES";
pub const ENV_TOL_COEFF: &str = "DULAC_TOL_COEFF";
pub const ENV_TOL_ROUNDTRIP: &str = "DULAC_TOL_ROUNDTRIP";

/// Name of the sampling generator, echoed in `sample` reports.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), seeded with seed_from_u64";

#[derive(Parser, Debug)]
#[command(name = "dulac", version, about = "Resonances, sub-resonant groups and Poincare-Dulac normal forms of contractions")]
struct Cli {
    /// Relative tolerance for resonance detection [env: DULAC_TOL_RES]
    #[arg(long, global = true, value_name = "TOL")]
    tol_res: Option<f64>,
    /// Coefficient tolerance for support checks [env: DULAC_TOL_COEFF]
    #[arg(long, global = true, value_name = "TOL")]
    tol_coeff: Option<f64>,
    /// Conjugacy round-trip tolerance [env: DULAC_TOL_ROUNDTRIP]
    #[arg(long, global = true, value_name = "TOL")]
    tol_roundtrip: Option<f64>,
    /// Report destination, "-" for stdout
    #[arg(long, short = 'o', global = true, value_name = "PATH", default_value = "-")]
    output: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Resonance table of a spectrum
    Resonances(SpectrumArgs),
    /// Star pattern of the linear part of the group
    Pattern(SpectrumArgs),
    /// Invariant coordinate flags of the linear pattern
    Flags(SpectrumArgs),
    /// Normalize a contraction germ
    Normalize(NormalizeArgs),
    /// Check that a conjugator carries a germ to a given normal form
    Verify(VerifyArgs),
    /// Compose maps left to right: first ∘ second ∘ ...
    Compose(ComposeArgs),
    /// Invert a map
    Invert(InvertArgs),
    /// Conjugate a map by a polynomial change of coordinates or a translation
    Conjugate(ConjugateArgs),
    /// Sample a germ with known normal form
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// Spectrum document, "-" for stdin
    #[arg(long, value_name = "PATH")]
    spectrum: String,
}

#[derive(Args, Debug)]
struct NormalizeArgs {
    /// Germ to normalize
    #[arg(long, value_name = "PATH")]
    map: String,
    /// Normalization order (defaults to the jet order of the map)
    #[arg(long)]
    order: Option<usize>,
    /// Target support: resonant or subresonant
    #[arg(long, default_value = "resonant", value_parser = parse_mode)]
    mode: SupportMode,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// The germ gamma
    #[arg(long, value_name = "PATH")]
    map: String,
    /// The conjugator phi
    #[arg(long, value_name = "PATH")]
    conjugator: String,
    /// The expected normal form
    #[arg(long, value_name = "PATH")]
    normal: String,
    /// Comparison order (defaults to the smallest input order)
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Debug)]
struct ComposeArgs {
    /// Maps to compose; repeat the flag, leftmost is applied last
    #[arg(long, value_name = "PATH", num_args = 1, required = true)]
    map: Vec<String>,
    /// Compose inside the sub-resonant group of this spectrum
    #[arg(long, value_name = "PATH")]
    spectrum: Option<String>,
    /// Truncation order for jet composition (defaults to the input order)
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Debug)]
struct InvertArgs {
    #[arg(long, value_name = "PATH")]
    map: String,
    /// Invert inside the sub-resonant group of this spectrum
    #[arg(long, value_name = "PATH")]
    spectrum: Option<String>,
}

#[derive(Args, Debug)]
struct ConjugateArgs {
    #[arg(long, value_name = "PATH")]
    map: String,
    /// Compute conjugator⁻¹ ∘ map ∘ conjugator
    #[arg(long, value_name = "PATH", conflicts_with = "translation")]
    conjugator: Option<String>,
    /// Translation z as JSON [[re, im], ...]; computes the recentered group element
    #[arg(long, value_name = "JSON", requires = "spectrum")]
    translation: Option<String>,
    /// Spectrum of the sub-resonant group (with --translation)
    #[arg(long, value_name = "PATH")]
    spectrum: Option<String>,
    /// Truncation order (with --conjugator)
    #[arg(long)]
    order: Option<usize>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    /// Spectrum document, "-" for stdin
    #[arg(long, value_name = "PATH")]
    spectrum: String,
    /// Seed of the ChaCha8 generator
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Highest degree of the random conjugator
    #[arg(long, default_value_t = 3)]
    conj_degree: usize,
    /// Radius of the disk random coefficients are drawn from
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    /// Jet order of the sample (defaults to max(2, r, conj-degree))
    #[arg(long)]
    order: Option<usize>,
}

fn parse_mode(s: &str) -> std::result::Result<SupportMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Clone, Copy, Debug, Serialize)]
struct Tolerances {
    tol_res: f64,
    tol_coeff: f64,
    tol_roundtrip: f64,
}

fn resolve_tolerance(flag: Option<f64>, var: &str, default: f64) -> Result<f64> {
    let value = match flag {
        Some(v) => v,
        None => match std::env::var(var) {
            Ok(s) => s
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("{var}={s:?} is not a number")))?,
            Err(_) => default,
        },
    };
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidArgument(format!("{var} must be positive, got {value}")));
    }
    Ok(value)
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Default)]
struct Inputs {
    digests: Vec<InputDigest>,
    stdin_used: bool,
}

impl Inputs {
    fn read(&mut self, path: &str) -> Result<String> {
        let io_err = |source| Error::Io {
            path: path.to_string(),
            source,
        };
        let text = if path == "-" {
            if self.stdin_used {
                return Err(Error::InvalidArgument("stdin can be read only once".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(io_err)?;
            s
        } else {
            std::fs::read_to_string(path).map_err(io_err)?
        };
        self.digests.push(InputDigest {
            path: path.to_string(),
            sha256: hex(&Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    fn map(&mut self, path: &str) -> Result<JetMap> {
        documents::parse_map(&self.read(path)?)
    }

    fn spectrum(&mut self, path: &str, tol_res: f64) -> Result<Spectrum> {
        let values = documents::parse_spectrum(&self.read(path)?)?;
        validate_spectrum(&values, tol_res)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct Report<'a, R: Serialize> {
    tool: &'static str,
    command: &'static str,
    args: &'a [String],
    inputs: &'a [InputDigest],
    tolerances: Tolerances,
    result: R,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct MultiIndexDocument {
    component: usize,
    exponents: Vec<u32>,
}

#[derive(Serialize)]
struct GroupDocument {
    value: ComplexDocument,
    start: usize,
    multiplicity: usize,
}

#[derive(Serialize)]
struct ResonanceDocument {
    component: usize,
    exponents: Vec<u32>,
    trivial: bool,
}

#[derive(Serialize)]
struct NearResonanceDocument {
    component: usize,
    exponents: Vec<u32>,
    relative_gap: f64,
}

#[derive(Serialize)]
struct ResonancesResult {
    dim: usize,
    spectrum: Vec<ComplexDocument>,
    groups: Vec<GroupDocument>,
    max_length: usize,
    lengths: Vec<usize>,
    resonances: Vec<ResonanceDocument>,
    p_sets: Vec<Vec<Vec<u32>>>,
    q_sets: Vec<Vec<Vec<u32>>>,
    dependence: Vec<Vec<bool>>,
    near_resonances: Vec<NearResonanceDocument>,
}

#[derive(Serialize)]
struct PatternResult {
    dim: usize,
    multiplicities: Vec<usize>,
    pattern: Vec<String>,
}

#[derive(Serialize)]
struct FlagDocument {
    group: usize,
    k: usize,
    basis: Vec<usize>,
}

#[derive(Serialize)]
struct FlagsResult {
    dim: usize,
    flags: Vec<FlagDocument>,
}

#[derive(Serialize)]
struct DegreeDocument {
    degree: usize,
    killed: usize,
    condition: f64,
}

#[derive(Serialize)]
struct NormalizeResult {
    mode: String,
    order: usize,
    spectrum: Vec<ComplexDocument>,
    conjugator: MapDocument,
    conjugator_triangular: MapDocument,
    triangularizer: Vec<Vec<ComplexDocument>>,
    normal_form: MapDocument,
    per_degree: Vec<DegreeDocument>,
    residual: f64,
    roundtrip_residual: f64,
}

#[derive(Serialize)]
struct VerifyResult {
    order: usize,
    residual: f64,
    worst: Option<MultiIndexDocument>,
    passed: bool,
}

#[derive(Serialize)]
struct MapResult {
    mode: &'static str,
    map: MapDocument,
}

#[derive(Serialize)]
struct SampleResult {
    rng: &'static str,
    seed: u64,
    conj_degree: usize,
    noise: f64,
    order: usize,
    germ: MapDocument,
    normal_form: MapDocument,
    conjugator: MapDocument,
    roundtrip_residual: f64,
}

fn complex_list(values: &[Complex64]) -> Vec<ComplexDocument> {
    values.iter().map(|&c| c.into()).collect()
}

fn spectrum_warnings(s: &Spectrum, t: Option<&ResonanceTable>) -> Vec<String> {
    let mut out: Vec<String> = s
        .warnings()
        .iter()
        .map(|w| {
            format!(
                "eigenvalues {} and {} are {:.3e} apart (relative), within ten times tol_res",
                w.first + 1,
                w.second + 1,
                w.relative_gap
            )
        })
        .collect();
    if let Some(t) = t {
        out.extend(t.near_resonances.iter().map(|r| {
            format!(
                "near-resonance in component {}: exponents {:?}, relative gap {:.3e}",
                r.component + 1,
                r.exponent.exponents(),
                r.relative_gap
            )
        }));
    }
    out
}

fn index_sets(sets: &[std::collections::BTreeSet<crate::jet::MultiIndex>]) -> Vec<Vec<Vec<u32>>> {
    sets.iter()
        .map(|s| s.iter().map(|p| p.exponents().to_vec()).collect())
        .collect()
}

fn resonances_result(s: &Spectrum, t: &ResonanceTable) -> ResonancesResult {
    let n = s.dim();
    ResonancesResult {
        dim: n,
        spectrum: complex_list(s.betas()),
        groups: s
            .groups()
            .iter()
            .map(|g| GroupDocument {
                value: g.value.into(),
                start: g.start + 1,
                multiplicity: g.len,
            })
            .collect(),
        max_length: t.max_length,
        lengths: t.lengths.clone(),
        resonances: t
            .resonances
            .iter()
            .map(|r| ResonanceDocument {
                component: r.component + 1,
                exponents: r.exponent.exponents().to_vec(),
                trivial: r.exponent.degree() == 1,
            })
            .collect(),
        p_sets: index_sets(&t.p_sets),
        q_sets: index_sets(&t.q_sets),
        dependence: t.dependence.clone(),
        near_resonances: t
            .near_resonances
            .iter()
            .map(|r| NearResonanceDocument {
                component: r.component + 1,
                exponents: r.exponent.exponents().to_vec(),
                relative_gap: r.relative_gap,
            })
            .collect(),
    }
}

/// Brings every map to a common order: the requested one, or the smallest.
fn common_order(maps: &[JetMap], order: Option<usize>) -> Result<Vec<JetMap>> {
    let target = order.unwrap_or_else(|| maps.iter().map(JetMap::order).min().unwrap_or(1));
    maps.iter()
        .map(|f| {
            if f.order() >= target {
                f.project(target)
            } else {
                f.with_order(target)
            }
        })
        .collect()
}

struct Outcome {
    text: String,
    code: i32,
}

struct Context<'a> {
    args: &'a [String],
    tolerances: Tolerances,
    inputs: Inputs,
}

impl Context<'_> {
    fn report<R: Serialize>(&self, command: &'static str, result: R, warnings: &[String]) -> String {
        documents::to_json_string(&Report {
            tool: TOOL_VERSION,
            command,
            args: self.args,
            inputs: &self.inputs.digests,
            tolerances: self.tolerances,
            result,
            warnings,
        })
    }

    fn group(&mut self, path: &str) -> Result<SubresonantGroup> {
        let s = self.inputs.spectrum(path, self.tolerances.tol_res)?;
        Ok(SubresonantGroup::new(s).with_tol_coeff(self.tolerances.tol_coeff))
    }
}

fn dispatch(cx: &mut Context<'_>, command: Command) -> Result<Outcome> {
    let tol = cx.tolerances;
    let ok = |text| Ok(Outcome { text, code: 0 });
    match command {
        Command::Resonances(a) => {
            let s = cx.inputs.spectrum(&a.spectrum, tol.tol_res)?;
            let t = build_table(&s, tol.tol_res);
            let warnings = spectrum_warnings(&s, Some(&t));
            ok(cx.report("resonances", resonances_result(&s, &t), &warnings))
        }
        Command::Pattern(a) => {
            let s = cx.inputs.spectrum(&a.spectrum, tol.tol_res)?;
            let t = build_table(&s, tol.tol_res);
            let result = PatternResult {
                dim: s.dim(),
                multiplicities: s.multiplicities(),
                pattern: g1_pattern(&t, &s).to_strings(),
            };
            let warnings = spectrum_warnings(&s, Some(&t));
            ok(cx.report("pattern", result, &warnings))
        }
        Command::Flags(a) => {
            let s = cx.inputs.spectrum(&a.spectrum, tol.tol_res)?;
            let t = build_table(&s, tol.tol_res);
            let flags = flag_spaces(&t, &s)
                .iter()
                .map(|(g, k, v)| FlagDocument {
                    group: g + 1,
                    k,
                    basis: v.iter().map(|i| i + 1).collect(),
                })
                .collect();
            let warnings = spectrum_warnings(&s, Some(&t));
            ok(cx.report("flags", FlagsResult { dim: s.dim(), flags }, &warnings))
        }
        Command::Normalize(a) => {
            let jet = cx.inputs.map(&a.map)?;
            let order = a.order.unwrap_or(jet.order());
            let germ = ContractionGerm::with_tol_res(jet, tol.tol_res)?;
            let opts = NormalizeOptions {
                tol_coeff: tol.tol_coeff,
                tol_roundtrip: tol.tol_roundtrip,
                ..NormalizeOptions::default()
            };
            let res = normalize(&germ, order, a.mode, &opts)?;
            let result = NormalizeResult {
                mode: res.mode.to_string(),
                order: res.order,
                spectrum: complex_list(germ.spectrum().betas()),
                conjugator: MapDocument::from_jet(&res.conjugator),
                conjugator_triangular: MapDocument::from_jet(&res.conjugator_triangular),
                triangularizer: matrix_document(&res.triangularizer),
                normal_form: MapDocument::from_jet(&res.normal_form),
                per_degree: res
                    .per_degree
                    .iter()
                    .map(|d| DegreeDocument {
                        degree: d.degree,
                        killed: d.killed,
                        condition: d.condition,
                    })
                    .collect(),
                residual: res.residual,
                roundtrip_residual: res.roundtrip_residual,
            };
            let warnings = spectrum_warnings(germ.spectrum(), Some(germ.table()));
            ok(cx.report("normalize", result, &warnings))
        }
        Command::Verify(a) => {
            let gamma = cx.inputs.map(&a.map)?;
            let phi = cx.inputs.map(&a.conjugator)?;
            let nf = cx.inputs.map(&a.normal)?;
            let order = a
                .order
                .unwrap_or_else(|| gamma.order().min(phi.order()).min(nf.order()));
            let rep = verify_conjugacy(&gamma, &phi, &nf, order)?;
            let passed = rep.residual <= tol.tol_roundtrip;
            let result = VerifyResult {
                order,
                residual: rep.residual,
                worst: rep.worst.map(|(j, p)| MultiIndexDocument {
                    component: j + 1,
                    exponents: p.exponents().to_vec(),
                }),
                passed,
            };
            let text = cx.report("verify", result, &[]);
            Ok(Outcome {
                text,
                code: if passed { 0 } else { 2 },
            })
        }
        Command::Compose(a) => {
            if a.map.len() < 2 {
                return Err(Error::InvalidArgument("compose needs at least two --map arguments".into()));
            }
            let maps = a.map.iter().map(|p| cx.inputs.map(p)).collect::<Result<Vec<_>>>()?;
            if let Some(sp) = &a.spectrum {
                let g = cx.group(sp)?;
                let elems = maps.iter().map(|m| g.element(m)).collect::<Result<Vec<SubresonantMap>>>()?;
                let mut acc = elems[elems.len() - 1].clone();
                for e in elems[..elems.len() - 1].iter().rev() {
                    acc = g.compose(e, &acc)?;
                }
                ok(cx.report("compose", MapResult { mode: "group", map: MapDocument::from_jet(acc.jet()) }, &[]))
            } else {
                let maps = common_order(&maps, a.order)?;
                let mut acc = maps[maps.len() - 1].clone();
                for f in maps[..maps.len() - 1].iter().rev() {
                    acc = f.compose(&acc)?;
                }
                ok(cx.report("compose", MapResult { mode: "jet", map: MapDocument::from_jet(&acc) }, &[]))
            }
        }
        Command::Invert(a) => {
            let f = cx.inputs.map(&a.map)?;
            if let Some(sp) = &a.spectrum {
                let g = cx.group(sp)?;
                let inv = g.invert(&g.element(&f)?)?;
                ok(cx.report("invert", MapResult { mode: "group", map: MapDocument::from_jet(inv.jet()) }, &[]))
            } else {
                let inv = f.invert()?;
                ok(cx.report("invert", MapResult { mode: "jet", map: MapDocument::from_jet(&inv) }, &[]))
            }
        }
        Command::Conjugate(a) => {
            let f = cx.inputs.map(&a.map)?;
            if let Some(cpath) = &a.conjugator {
                let phi = cx.inputs.map(cpath)?;
                let maps = common_order(&[f, phi], a.order)?;
                let out = maps[1].invert()?.compose(&maps[0])?.compose(&maps[1])?;
                ok(cx.report("conjugate", MapResult { mode: "conjugator", map: MapDocument::from_jet(&out) }, &[]))
            } else if let (Some(z), Some(sp)) = (&a.translation, &a.spectrum) {
                let z = parse_translation(z)?;
                let g = cx.group(sp)?;
                let out = g.conj_by_translation(&g.element(&f)?, &z)?;
                ok(cx.report("conjugate", MapResult { mode: "translation", map: MapDocument::from_jet(out.jet()) }, &[]))
            } else {
                Err(Error::InvalidArgument(
                    "conjugate needs --conjugator, or --translation with --spectrum".into(),
                ))
            }
        }
        Command::Sample(a) => {
            let s = cx.inputs.spectrum(&a.spectrum, tol.tol_res)?;
            if a.conj_degree == 0 {
                return Err(Error::InvalidArgument("--conj-degree must be at least 1".into()));
            }
            let inst = sample_instance(
                &s,
                &SampleOptions {
                    seed: a.seed,
                    conj_degree: a.conj_degree,
                    noise: a.noise,
                    order: a.order,
                },
            )?;
            let gt = &inst.ground_truth;
            let result = SampleResult {
                rng: RNG_NAME,
                seed: a.seed,
                conj_degree: a.conj_degree,
                noise: a.noise,
                order: gt.order,
                germ: MapDocument::from_jet(inst.germ.jet()),
                normal_form: MapDocument::from_jet(&gt.normal_form),
                conjugator: MapDocument::from_jet(&gt.conjugator),
                roundtrip_residual: gt.roundtrip_residual,
            };
            let warnings = spectrum_warnings(&s, None);
            ok(cx.report("sample", result, &warnings))
        }
    }
}

fn parse_translation(text: &str) -> Result<Vec<Complex64>> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("translation must be [[re, im], ...]: {e}")))?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}

fn write_output(path: &str, text: &str, stdout: &mut dyn Write) -> Result<()> {
    let res = if path == "-" {
        stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush())
    } else {
        std::fs::write(path, text)
    };
    res.map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}

/// Runs the tool on `argv` (program name first) and returns the exit code:
/// 0 success, 1 validation error, 2 numerical failure, 3 I/O error.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let outcome = (|| -> Result<i32> {
        let tolerances = Tolerances {
            tol_res: resolve_tolerance(cli.tol_res, ENV_TOL_RES, DEFAULT_TOL_RES)?,
            tol_coeff: resolve_tolerance(cli.tol_coeff, ENV_TOL_COEFF, DEFAULT_TOL_COEFF)?,
            tol_roundtrip: resolve_tolerance(cli.tol_roundtrip, ENV_TOL_ROUNDTRIP, DEFAULT_TOL_ROUNDTRIP)?,
        };
        let mut cx = Context {
            args: &args,
            tolerances,
            inputs: Inputs::default(),
        };
        let out = dispatch(&mut cx, cli.command)?;
        write_output(&cli.output, &out.text, stdout)?;
        Ok(out.code)
    })();
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
