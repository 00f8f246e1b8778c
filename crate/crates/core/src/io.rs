//! Run configuration and the data behind each CLI subcommand: orbit rows,
//! partition documents, return-map comparisons and renormalization reports.
//! All outputs are deterministic functions of the configuration.

use std::path::PathBuf;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::atoms::{golden_xy, is_golden, smn_region, Polygon, UvBox};
use crate::cf::{CfSpec, SemiIndex};
use crate::error::{Error, Result};
use crate::renorm::{
    accumulation, domain_scaling_check, find_periodic_in_atom, periodic_cascade, renorm_tower_partial, tolerance,
    verify_conjugacy, AccumulationRow, ConjugacyReport, TowerSummary,
};
use crate::return_map::{
    closed_return_time, first_return_iter, m0n0, return_map_closed, return_map_closed_golden, sample_atom_preimage,
    sample_preimage,
};
use crate::sample::{rng_stream, uniform_in};
use crate::tce::{BoundaryMode, ConeGeometry, ParamsSpec, Point, TceParams, DEFAULT_PRECISION};

/// Command-line configuration. Every field except `params` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSpec,
    #[serde(default = "default_precision")]
    pub precision_bits: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub strict_boundaries: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub orbit: OrbitOptions,
    #[serde(default)]
    pub partition: PartitionOptions,
    #[serde(default, rename = "return")]
    pub ret: ReturnOptions,
    #[serde(default)]
    pub renorm: RenormOptions,
    #[serde(default)]
    pub verify: VerifyOptions,
}

fn default_precision() -> u32 {
    DEFAULT_PRECISION
}

/// A sampling box `[re_0, re_1] × [im_0, im_1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBox {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl SampleBox {
    fn validate(&self) -> Result<()> {
        let ok = self.re[0] < self.re[1] && self.im[0] < self.im[1] && self.im[0] >= 0.0;
        let finite = self.re.iter().chain(self.im.iter()).all(|x| x.is_finite());
        if ok && finite {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "sampling box {self:?} must have positive area in the upper half-plane"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitOptions {
    /// Explicit start points; when absent, `count` points are drawn from `sample_box`.
    pub starts: Option<Vec<[f64; 2]>>,
    /// Defaults to `[−ρ, λ] × [0, 1]`.
    pub sample_box: Option<SampleBox>,
    pub count: u64,
    /// Transient steps dropped before recording.
    pub skip: u64,
    /// Steps recorded per start.
    pub keep: u64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            starts: None,
            sample_box: None,
            count: 1000,
            skip: 0,
            keep: 3000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PartitionOptions {
    /// Atoms with `w − w(anchor) <= max_w` are exported.
    pub max_w: u64,
    /// Unbounded golden sets are clipped to `Im <= clip_height`.
    pub clip_height: f64,
}

impl Default for PartitionOptions {
    fn default() -> Self {
        PartitionOptions {
            max_w: 6,
            clip_height: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReturnOptions {
    pub points: Option<Vec<[f64; 2]>>,
    /// Sample `samples` preimages of this atom instead of explicit points.
    pub atom: Option<[u64; 2]>,
    pub samples: u64,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        ReturnOptions {
            points: None,
            atom: None,
            samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenormOptions {
    pub depth: usize,
    pub samples: u64,
    /// Length of the golden periodic cascade to report; 0 disables it.
    pub cascade: u64,
    /// Orbit prefix length for the accumulation diagnostics.
    pub horizon: u64,
}

impl Default for RenormOptions {
    fn default() -> Self {
        RenormOptions {
            depth: 3,
            samples: 100,
            cascade: 0,
            horizon: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    #[default]
    Full,
    Golden,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyOptions {
    pub suite: Suite,
    /// Multiplies every sample count of the suite.
    pub scale: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            suite: Suite::Full,
            scale: 1.0,
        }
    }
}

impl RunConfig {
    pub fn from_json(src: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(src).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// A configuration for the golden example.
    pub fn golden() -> Self {
        RunConfig {
            params: crate::tce::golden_params(64).to_spec(),
            precision_bits: DEFAULT_PRECISION,
            seed: 0,
            strict_boundaries: false,
            output: None,
            orbit: OrbitOptions::default(),
            partition: PartitionOptions::default(),
            ret: ReturnOptions::default(),
            renorm: RenormOptions::default(),
            verify: VerifyOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < 64 {
            return Err(Error::InvalidParams("precision_bits must be at least 64".into()));
        }
        if let Some(b) = &self.orbit.sample_box {
            b.validate()?;
        }
        let counts = [
            ("orbit.count", self.orbit.count),
            ("orbit.keep", self.orbit.keep),
            ("return.samples", self.ret.samples),
            ("renorm.samples", self.renorm.samples),
            ("renorm.horizon", self.renorm.horizon),
        ];
        for (name, c) in counts {
            if c == 0 {
                return Err(Error::InvalidParams(format!("{name} must be at least 1")));
            }
        }
        if self.partition.clip_height.is_nan() || self.partition.clip_height <= 0.0 {
            return Err(Error::InvalidParams("partition.clip_height must be positive".into()));
        }
        if self.verify.scale.is_nan() || self.verify.scale <= 0.0 {
            return Err(Error::InvalidParams("verify.scale must be positive".into()));
        }
        Ok(())
    }

    /// The parameters at the configured precision and boundary mode.
    pub fn params(&self) -> Result<TceParams> {
        let k = TceParams::from_spec(&self.params, self.precision_bits)?;
        Ok(if self.strict_boundaries {
            k.with_mode(BoundaryMode::Strict)
        } else {
            k
        })
    }
}

/// Decimal rendering with `⌈0.3 · prec⌉` significant digits.
pub fn format_float(x: &Float, prec: u32) -> String {
    let digits = (prec as usize * 3).div_ceil(10);
    x.to_string_radix(10, Some(digits))
}

/// One CSV row `point_id,t,re,im`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitRow {
    pub point_id: u64,
    pub t: u64,
    pub re: String,
    pub im: String,
}

pub const ORBIT_HEADER: [&str; 4] = ["point_id", "t", "re", "im"];

/// A start point dropped because its orbit hit an ambiguous boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedStart {
    pub point_id: u64,
    pub reason: String,
}

fn orbit_starts(cfg: &RunConfig, kappa: &TceParams) -> Result<Vec<Point>> {
    let prec = kappa.prec();
    if let Some(starts) = &cfg.orbit.starts {
        return Ok(starts.iter().map(|[re, im]| kappa.point(*re, *im)).collect());
    }
    let b = match cfg.orbit.sample_box {
        Some(b) => b,
        None => SampleBox {
            re: [-1.0, kappa.map().lambda().to_f64()],
            im: [0.0, 1.0],
        },
    };
    let lo_re = Float::with_val(prec, b.re[0]);
    let hi_re = Float::with_val(prec, b.re[1]);
    let lo_im = Float::with_val(prec, b.im[0]);
    let hi_im = Float::with_val(prec, b.im[1]);
    Ok((0..cfg.orbit.count)
        .map(|i| {
            let mut rng = rng_stream(cfg.seed, i);
            let re = uniform_in(&mut rng, &lo_re, &hi_re, prec);
            let im = uniform_in(&mut rng, &lo_im, &hi_im, prec);
            Point::new(re, im)
        })
        .collect())
}

const ORBIT_CHUNK: usize = 64;

/// Streams orbit rows in start order. Starts whose orbit runs into an
/// ambiguous boundary (strict mode) are skipped and returned.
pub fn orbit_rows(cfg: &RunConfig, mut sink: impl FnMut(OrbitRow) -> Result<()>) -> Result<Vec<SkippedStart>> {
    let kappa = cfg.params()?;
    let prec = kappa.prec();
    let starts = orbit_starts(cfg, &kappa)?;
    let (skip, keep) = (cfg.orbit.skip, cfg.orbit.keep);
    let mut skipped = Vec::new();
    for (c, chunk) in starts.chunks(ORBIT_CHUNK).enumerate() {
        let batches: Vec<std::result::Result<Vec<OrbitRow>, SkippedStart>> = chunk
            .par_iter()
            .enumerate()
            .map(|(i, z)| {
                let id = (c * ORBIT_CHUNK + i) as u64;
                let run = || -> Result<Vec<OrbitRow>> {
                    let mut cur = kappa.map().iterate(z, skip)?;
                    let mut rows = Vec::with_capacity(keep as usize);
                    for t in skip + 1..=skip + keep {
                        cur = kappa.step(&cur)?;
                        rows.push(OrbitRow {
                            point_id: id,
                            t,
                            re: format_float(&cur.re, prec),
                            im: format_float(&cur.im, prec),
                        });
                    }
                    Ok(rows)
                };
                run().map_err(|e| SkippedStart {
                    point_id: id,
                    reason: e.to_string(),
                })
            })
            .collect();
        for batch in batches {
            match batch {
                Ok(rows) => rows.into_iter().try_for_each(&mut sink)?,
                Err(s) => skipped.push(s),
            }
        }
    }
    Ok(skipped)
}

/// `E^{-1}(S) ∩ C_j` for one middle cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreimagePiece {
    pub cone: usize,
    pub vertices: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AtomEntry {
    #[serde(flatten)]
    pub polygon: Polygon,
    pub w: u64,
    /// Closed-form return time on the atom.
    pub h: Option<u64>,
    pub preimages: Vec<PreimagePiece>,
}

/// Partition export: atoms `S_{m,n}` from the anchor, their `E`-preimage
/// pieces, and in golden mode the sets `X`, `Y` clipped to a height.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionDoc {
    pub lambda: CfSpec,
    pub p: u64,
    pub q: u64,
    pub golden: bool,
    pub anchor: [u64; 2],
    pub max_w: u64,
    pub atoms: Vec<AtomEntry>,
    pub extra: Vec<Polygon>,
}

/// Sutherland–Hodgman clip of a convex polygon to `a · x <= b`.
fn clip(poly: &[[f64; 2]], a: [f64; 2], b: f64) -> Vec<[f64; 2]> {
    let f = |p: &[f64; 2]| a[0] * p[0] + a[1] * p[1] - b;
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (fc, fn_) = (f(&cur), f(&next));
        if fc <= 0.0 {
            out.push(cur);
        }
        if (fc < 0.0 && fn_ > 0.0) || (fc > 0.0 && fn_ < 0.0) {
            let t = fc / (fc - fn_);
            out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
        }
    }
    out
}

fn area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| poly[i][0] * poly[(i + 1) % n][1] - poly[(i + 1) % n][0] * poly[i][1])
        .sum::<f64>()
        / 2.0
}

/// The pieces `E^{-1}(P) ∩ C_j`: clip to each image cone `E(C_j)` and rotate back.
fn preimage_pieces(geometry: &ConeGeometry, poly: &[[f64; 2]]) -> Vec<PreimagePiece> {
    let alpha: Vec<f64> = geometry.alpha().iter().map(Float::to_f64).collect();
    let mut out = Vec::new();
    for j in 1..=geometry.d() {
        let lo: f64 = alpha[..j].iter().sum();
        let hi = lo + alpha[j];
        let (c, s) = geometry.rotation(j);
        let theta = s.to_f64().atan2(c.to_f64());
        let (a, b) = (lo + theta, hi + theta);
        // left of the ray at angle a, right of the ray at angle b
        let mut piece = clip(poly, [a.sin(), -a.cos()], 0.0);
        piece = clip(&piece, [-b.sin(), b.cos()], 0.0);
        if piece.len() < 3 || area(&piece).abs() < 1e-300 {
            continue;
        }
        let (ct, st) = (theta.cos(), theta.sin());
        let vertices = piece.iter().map(|[x, y]| [x * ct + y * st, -x * st + y * ct]).collect();
        out.push(PreimagePiece { cone: j, vertices });
    }
    out
}

/// A region of `C_c` given as a `(u, v)` box, clipped to `0 <= Im <= height`.
fn clipped(geometry: &ConeGeometry, region: &UvBox, height: f64, label: &str) -> Polygon {
    let cf = geometry.cot_first().to_f64();
    let cl = geometry.cot_last().to_f64();
    let r = 4.0 + 4.0 * height * (cf.abs() + cl.abs());
    let mut poly = vec![[-r, 0.0], [r, 0.0], [r, height], [-r, height]];
    // C_c: u <= 0, v >= 0
    poly = clip(&poly, [1.0, -cf], 0.0);
    poly = clip(&poly, [-1.0, -cl], 0.0);
    for c in &region.constraints {
        let anchor = c.anchor_float().to_f64();
        let (normal, level) = match c.family {
            crate::atoms::EdgeFamily::First => ([1.0, -cf], anchor),
            crate::atoms::EdgeFamily::Last => ([1.0, cl], anchor),
        };
        poly = match c.relation {
            crate::atoms::Relation::Less | crate::atoms::Relation::LessEq => clip(&poly, normal, level),
            _ => clip(&poly, [-normal[0], -normal[1]], -level),
        };
    }
    Polygon {
        index: None,
        label: label.to_string(),
        vertices: poly,
    }
}

/// Partition document with atoms `w(anchor) <= w <= w(anchor) + max_w`.
/// The anchor is `(m_0, n_0)`, or `(2, 0)` in golden mode where `X` and `Y`
/// cover the rest of `C_c`.
pub fn partition_document(cfg: &RunConfig, max_w: u64) -> Result<PartitionDoc> {
    let kappa = cfg.params()?;
    let cf = kappa.cf();
    let geometry = kappa.geometry();
    let golden = is_golden(&kappa);
    let anchor = if golden { SemiIndex::new(2, 0) } else { m0n0(&kappa)? };
    let w0 = cf.w_index(anchor)?;
    let mut atoms = Vec::new();
    for w in w0..=w0 + max_w {
        let idx = cf.index_at(w)?;
        let atom = smn_region(&kappa, idx)?;
        let polygon = atom.to_polygon();
        let next = SemiIndex::new(idx.m, idx.n + 1);
        let h = closed_return_time(&kappa, next).ok().and_then(|h| h.to_u64());
        let preimages = preimage_pieces(geometry, &polygon.vertices);
        atoms.push(AtomEntry {
            polygon,
            w,
            h,
            preimages,
        });
    }
    let mut extra = Vec::new();
    if golden {
        let (x, y) = golden_xy(&kappa)?;
        extra.push(clipped(geometry, &x, cfg.partition.clip_height, "X"));
        extra.push(clipped(geometry, &y, cfg.partition.clip_height, "Y"));
    }
    Ok(PartitionDoc {
        lambda: CfSpec::from(cf),
        p: kappa.p(),
        q: kappa.q(),
        golden,
        anchor: [anchor.m as u64, anchor.n],
        max_w,
        atoms,
        extra,
    })
}

pub const RETURN_HEADER: [&str; 9] = [
    "re", "im", "h", "re_out", "im_out", "h_iter", "re_iter", "im_iter", "agree",
];

/// One return comparison; closed-form fields are empty off the atoms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnRow {
    pub re: String,
    pub im: String,
    pub h: String,
    pub re_out: String,
    pub im_out: String,
    pub h_iter: String,
    pub re_iter: String,
    pub im_iter: String,
    /// `true`, `false`, or `not_in_domain` / `ambiguous` when a side is unavailable.
    pub agree: String,
}

impl ReturnRow {
    pub fn fields(&self) -> [&str; 9] {
        [
            &self.re,
            &self.im,
            &self.h,
            &self.re_out,
            &self.im_out,
            &self.h_iter,
            &self.re_iter,
            &self.im_iter,
            &self.agree,
        ]
    }
}

fn return_points(cfg: &RunConfig, kappa: &TceParams) -> Result<Vec<Point>> {
    if let Some(points) = &cfg.ret.points {
        return Ok(points.iter().map(|[re, im]| kappa.point(*re, *im)).collect());
    }
    let samples = cfg.ret.samples;
    match cfg.ret.atom {
        Some([m, n]) => {
            let idx = SemiIndex::new(m as usize, n);
            (0..samples)
                .map(|i| Ok(sample_atom_preimage(kappa, idx, &mut rng_stream(cfg.seed, i), 0.02)?.0))
                .collect()
        }
        None => {
            let anchor = if is_golden(kappa) {
                SemiIndex::new(0, 0)
            } else {
                m0n0(kappa)?
            };
            let region = crate::atoms::u_region(kappa, anchor)?;
            (0..samples)
                .map(|i| {
                    let draw = |r: &mut _| region.sample_interior(kappa.geometry(), r, 0.01);
                    Ok(sample_preimage(kappa, draw, &mut rng_stream(cfg.seed, i))?.0)
                })
                .collect()
        }
    }
}

/// Closed form against iteration for each configured point.
pub fn return_rows(cfg: &RunConfig) -> Result<Vec<ReturnRow>> {
    let kappa = cfg.params()?;
    let prec = kappa.prec();
    let golden = is_golden(&kappa);
    let tol = tolerance(prec);
    let points = return_points(cfg, &kappa)?;
    Ok(points
        .par_iter()
        .map(|z| {
            let closed = if golden {
                return_map_closed_golden(&kappa, z)
            } else {
                return_map_closed(&kappa, z)
            };
            let iter = first_return_iter(&kappa, z);
            let f = |x: &Float| format_float(x, prec);
            let mut row = ReturnRow {
                re: f(&z.re),
                im: f(&z.im),
                h: String::new(),
                re_out: String::new(),
                im_out: String::new(),
                h_iter: String::new(),
                re_iter: String::new(),
                im_iter: String::new(),
                agree: String::new(),
            };
            if let Ok(c) = &closed {
                row.h = c.h.to_string();
                row.re_out = f(&c.point.re);
                row.im_out = f(&c.point.im);
            }
            if let Ok(r) = &iter {
                row.h_iter = r.h.to_string();
                row.re_iter = f(&r.point.re);
                row.im_iter = f(&r.point.im);
            }
            row.agree = match (&closed, &iter) {
                (Ok(c), Ok(r)) => (c.h == r.h && c.point.dist(&r.point) <= tol).to_string(),
                (Err(Error::BoundaryAmbiguous(_) | Error::PrecisionAmbiguous(_)), _)
                | (_, Err(Error::BoundaryAmbiguous(_) | Error::PrecisionAmbiguous(_))) => "ambiguous".into(),
                _ => "not_in_domain".into(),
            };
            row
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainScaling {
    pub pass: bool,
    pub max_dev: f64,
}

/// Golden cascade section of the renormalization report.
#[derive(Debug, Clone, Serialize)]
pub struct CascadeReport {
    pub atom: [u64; 2],
    pub seed_point: [String; 2],
    pub return_period: u64,
    pub points: Vec<CascadePoint>,
    pub accumulation: Vec<AccumulationRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CascadePoint {
    pub n: u64,
    pub re: String,
    pub im: String,
    pub atom: [u64; 2],
    pub h: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RenormReport {
    pub depth_requested: usize,
    /// Steps actually built; smaller than requested when quotients run out.
    pub certified_depth: usize,
    pub stopped: Option<String>,
    pub tower: TowerSummary,
    pub conjugacy: Vec<ConjugacyReport>,
    pub domain_scaling: Vec<DomainScaling>,
    pub cascade: Option<CascadeReport>,
    pub pass: bool,
}

fn cascade_report(cfg: &RunConfig, kappa: &TceParams) -> Result<CascadeReport> {
    let prec = kappa.prec();
    let atom = SemiIndex::new(0, 0);
    let seed = find_periodic_in_atom(kappa, atom, cfg.seed, 100, 50)?;
    let cascade = periodic_cascade(kappa, &seed.point, atom.m, cfg.renorm.cascade)?;
    let rows = accumulation(kappa, &cascade, cfg.renorm.horizon)?;
    Ok(CascadeReport {
        atom: [0, 0],
        seed_point: [format_float(&seed.point.re, prec), format_float(&seed.point.im, prec)],
        return_period: seed.period,
        points: cascade
            .iter()
            .map(|e| CascadePoint {
                n: e.n,
                re: format_float(&e.point.re, prec),
                im: format_float(&e.point.im, prec),
                atom: [e.atom.m as u64, e.atom.n],
                h: e.h,
            })
            .collect(),
        accumulation: rows,
    })
}

/// Tower of `depth` steps with a conjugacy check and a domain check per step.
pub fn renorm_report(cfg: &RunConfig, depth: usize) -> Result<RenormReport> {
    let kappa = cfg.params()?;
    let (tower, stopped) = renorm_tower_partial(&kappa, depth);
    let mut conjugacy = Vec::with_capacity(tower.steps.len());
    let mut domain_scaling = Vec::with_capacity(tower.steps.len());
    for (i, step) in tower.steps.iter().enumerate() {
        conjugacy.push(verify_conjugacy(
            step,
            cfg.renorm.samples,
            cfg.seed.wrapping_add(i as u64),
        )?);
        let (pass, dev) = domain_scaling_check(step)?;
        domain_scaling.push(DomainScaling {
            pass,
            max_dev: dev.to_f64(),
        });
    }
    let cascade = if cfg.renorm.cascade > 0 && is_golden(&kappa) {
        Some(cascade_report(cfg, &kappa)?)
    } else {
        None
    };
    let pass = stopped.is_none() && conjugacy.iter().all(|r| r.pass) && domain_scaling.iter().all(|d| d.pass);
    Ok(RenormReport {
        depth_requested: depth,
        certified_depth: tower.steps.len(),
        stopped: stopped.map(|e| e.to_string()),
        tower: tower.summary()?,
        conjugacy,
        domain_scaling,
        cascade,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = RunConfig::golden();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        let minimal = r#"{"params": {"alpha": ["1", "0.5", "pi-2.5", "1"], "tau": [2, 1],
            "lambda": "phi", "eta": {"p": 1, "q": 1}}}"#;
        let cfg = RunConfig::from_json(minimal).unwrap();
        assert_eq!(cfg.precision_bits, 256);
        assert_eq!(cfg.partition.max_w, 6);
        assert!(is_golden(&cfg.params().unwrap()));
    }

    #[test]
    fn config_errors() {
        assert!(matches!(RunConfig::from_json("{"), Err(Error::Parse(_))));
        let mut cfg = RunConfig::golden();
        cfg.precision_bits = 32;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::golden();
        cfg.orbit.sample_box = Some(SampleBox {
            re: [0.0, 0.0],
            im: [0.0, 1.0],
        });
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::golden();
        cfg.orbit.count = 0;
        assert!(cfg.validate().is_err());
        let unknown = serde_json::to_string(&RunConfig::golden())
            .unwrap()
            .replacen('{', r#"{"bogus": 1, "#, 1);
        assert!(RunConfig::from_json(&unknown).is_err());
    }

    #[test]
    fn float_digits() {
        let x = Float::with_val(256, 1) / 3u32;
        let s = format_float(&x, 256);
        assert!(s.starts_with("3.333"));
        let mantissa = s.split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 77);
        assert_eq!(
            format_float(&Float::with_val(64, -0.5), 64),
            "-5.0000000000000000000e-1"
        );
    }

    #[test]
    fn single_step_orbit() {
        let mut cfg = RunConfig::golden();
        cfg.orbit.starts = Some(vec![[0.25, 0.5]]);
        cfg.orbit.keep = 1;
        let mut rows = Vec::new();
        orbit_rows(&cfg, |r| {
            rows.push(r);
            Ok(())
        })
        .unwrap();
        let k = cfg.params().unwrap();
        let next = k.step(&k.point(0.25, 0.5)).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].t, 1);
        assert_eq!(rows[0].re, format_float(&next.re, 256));
        assert_eq!(rows[0].im, format_float(&next.im, 256));
    }

    #[test]
    fn golden_partition_counts() {
        let cfg = RunConfig::golden();
        let doc = partition_document(&cfg, 6).unwrap();
        assert_eq!(doc.atoms.len(), 7);
        assert_eq!(doc.extra.len(), 2);
        assert_eq!(doc.anchor, [2, 0]);
        for a in &doc.atoms {
            assert!(!a.preimages.is_empty());
            // preimage pieces preserve area
            let total: f64 = a.preimages.iter().map(|p| area(&p.vertices).abs()).sum();
            assert!((total - area(&a.polygon.vertices).abs()).abs() < 1e-9);
        }
        let single = partition_document(&cfg, 0).unwrap();
        assert_eq!(single.atoms.len(), 1);
    }

    #[test]
    fn clip_square() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let half = clip(&sq, [1.0, 0.0], 0.5);
        assert!((area(&half) - 0.5).abs() < 1e-15);
    }
}
