//! Eigenvalue, counting-function and multiplicity inequalities evaluated on
//! computed spectra, and empirical estimation of their constants.
//!
//! Every inequality is written as `bound = C * g`, where `g` depends on the
//! geometry and on the index `k` (or the threshold `lambda`) and `C` is a
//! single constant. Two-term bounds fix the ratio of their constants, so one
//! scalar still describes them. Constants carry a [`ConstantTier`].
//!
//! All formulas are evaluated at `kappa = 0` in dimension two.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};

use crate::bessel::bessel_zero;
use crate::domain::GeometricInvariants;
use crate::eigen::{count_below, SpectrumSummary};
use crate::error::{Error, Result};
use crate::fem::BoundaryCondition;

/// Relative slack allowed when comparing a bound with its measured value, to
/// absorb rounding in `C * g` when `C` was estimated from the same data.
const ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    LiYau,
    ZhongYang,
    GromovCounting,
    NeumannVolume,
    Ourcheng,
    ChengClosed,
    Cm,
    Buser79,
    ChengDp,
    BuserDp,
    LiyauCounting,
    ChengYang,
    MbcDiameter,
    MbcVolume,
    MbnVolume,
    MbdDiameter,
    MbdVolume,
    LiyauInradius,
}

/// Which side of the inequality the measured value sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `measured <= bound`; margin is `bound / measured`.
    Upper,
    /// `measured >= bound`; margin is `measured / bound`.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantTier {
    PaperExplicit,
    DerivedFromProof,
    Empirical,
}

impl std::fmt::Display for ConstantTier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::PaperExplicit => "paper-explicit",
            Self::DerivedFromProof => "derived-from-proof",
            Self::Empirical => "empirical",
        })
    }
}

/// Index or threshold at which a bound is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Argument {
    K(usize),
    Lambda(f64),
}

impl std::fmt::Display for Argument {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Argument::K(k) => write!(f, "{k}"),
            Argument::Lambda(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantUse {
    #[serde(serialize_with = "ser_real")]
    pub value: f64,
    pub tier: ConstantTier,
}

/// Writes non-finite reals as the strings `"inf"`, `"-inf"` and `"nan"`.
pub(crate) fn ser_real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&real_text(*x))
    }
}

fn ser_real_map<S: Serializer>(
    m: &BTreeMap<String, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        if v.is_finite() {
            map.serialize_entry(k, v)?;
        } else {
            map.serialize_entry(k, &real_text(*v))?;
        }
    }
    map.end()
}

fn real_text(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// One evaluated inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub domain_id: String,
    pub argument: Argument,
    #[serde(serialize_with = "ser_real")]
    pub bound: f64,
    #[serde(serialize_with = "ser_real")]
    pub measured: f64,
    pub orientation: Orientation,
    #[serde(serialize_with = "ser_real")]
    pub margin: f64,
    pub satisfied: bool,
    pub constants_used: BTreeMap<String, ConstantUse>,
    /// Weakest tier among the constants used.
    pub constant_tier: ConstantTier,
    /// Supplementary values, such as the shifted-index variant.
    #[serde(serialize_with = "ser_real_map")]
    pub extra: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn with_domain(mut self, id: &str) -> Self {
        self.domain_id = id.to_string();
        self
    }

    /// The report's CSV row (no trailing newline).
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.bound_id,
            self.domain_id,
            self.argument,
            real_text(self.bound),
            real_text(self.measured),
            real_text(self.margin),
            self.satisfied,
            self.constant_tier
        )
    }
}

pub const CSV_HEADER: &str =
    "bound_id,domain_id,k_or_lambda,bound,measured,margin,satisfied,constant_tier";

/// Reports as CSV with header.
pub fn reports_csv(reports: &[BoundReport]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let _ = writeln!(s, "{}", r.csv_row());
    }
    s
}

/// Reports as a JSON array with constants expanded.
pub fn reports_json(reports: &[BoundReport]) -> serde_json::Value {
    serde_json::to_value(reports).expect("reports serialise")
}

/// `j_{0,1}`, first zero of `J_0`.
pub fn j01() -> f64 {
    bessel_zero(0, 1)
}

impl BoundId {
    pub const ALL: [BoundId; 18] = [
        BoundId::LiYau,
        BoundId::ZhongYang,
        BoundId::GromovCounting,
        BoundId::NeumannVolume,
        BoundId::Ourcheng,
        BoundId::ChengClosed,
        BoundId::Cm,
        BoundId::Buser79,
        BoundId::ChengDp,
        BoundId::BuserDp,
        BoundId::LiyauCounting,
        BoundId::ChengYang,
        BoundId::MbcDiameter,
        BoundId::MbcVolume,
        BoundId::MbnVolume,
        BoundId::MbdDiameter,
        BoundId::MbdVolume,
        BoundId::LiyauInradius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundId::LiYau => "li_yau",
            BoundId::ZhongYang => "zhong_yang",
            BoundId::GromovCounting => "gromov_counting",
            BoundId::NeumannVolume => "neumann_volume",
            BoundId::Ourcheng => "ourcheng",
            BoundId::ChengClosed => "cheng_closed",
            BoundId::Cm => "cm",
            BoundId::Buser79 => "buser79",
            BoundId::ChengDp => "cheng_dp",
            BoundId::BuserDp => "buser_dp",
            BoundId::LiyauCounting => "liyau_counting",
            BoundId::ChengYang => "cheng_yang",
            BoundId::MbcDiameter => "mbc_diameter",
            BoundId::MbcVolume => "mbc_volume",
            BoundId::MbnVolume => "mbn_volume",
            BoundId::MbdDiameter => "mbd_diameter",
            BoundId::MbdVolume => "mbd_volume",
            BoundId::LiyauInradius => "liyau_inradius",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            BoundId::LiYau | BoundId::ZhongYang => Orientation::Lower,
            _ => Orientation::Upper,
        }
    }

    /// Whether the bound is evaluated at a threshold `lambda` rather than an index.
    pub fn is_counting(self) -> bool {
        matches!(
            self,
            BoundId::GromovCounting | BoundId::NeumannVolume | BoundId::LiyauCounting
        )
    }

    pub fn is_multiplicity(self) -> bool {
        matches!(
            self,
            BoundId::MbcDiameter
                | BoundId::MbcVolume
                | BoundId::MbnVolume
                | BoundId::MbdDiameter
                | BoundId::MbdVolume
                | BoundId::LiyauInradius
        )
    }

    /// Name of the scalar constant.
    pub fn constant_name(self) -> &'static str {
        match self {
            BoundId::LiYau | BoundId::ZhongYang => "c_lambda1",
            BoundId::GromovCounting => "C4",
            BoundId::NeumannVolume => "C5",
            BoundId::Ourcheng => "C10",
            BoundId::ChengClosed => "C6",
            BoundId::Cm => "C9",
            BoundId::Buser79 => "C7",
            BoundId::ChengDp | BoundId::BuserDp => "c7",
            BoundId::LiyauCounting => "C20",
            BoundId::ChengYang => "cheng_yang_factor",
            BoundId::MbcDiameter => "C15",
            BoundId::MbcVolume => "C16",
            BoundId::MbnVolume => "C17",
            BoundId::MbdDiameter => "C18",
            BoundId::MbdVolume => "C19",
            BoundId::LiyauInradius => "C22",
        }
    }

    /// The constant available without a corpus, if any.
    pub fn default_constant(self) -> Option<ConstantUse> {
        let j2 = j01().powi(2);
        let (value, tier) = match self {
            BoundId::LiYau => (PI * PI / 4.0, ConstantTier::PaperExplicit),
            BoundId::ZhongYang => (PI * PI, ConstantTier::PaperExplicit),
            BoundId::ChengClosed => (4.0 * j2, ConstantTier::PaperExplicit),
            BoundId::ChengYang => (2.5, ConstantTier::PaperExplicit),
            // 2^{n+4} from the plateau-function argument with volume ratio 2^n.
            BoundId::Ourcheng => (64.0, ConstantTier::DerivedFromProof),
            // Principal Dirichlet eigenvalue of the unit disc.
            BoundId::ChengDp | BoundId::BuserDp => (j2, ConstantTier::DerivedFromProof),
            // From the Li-Yau sum bound: nu_{k-1} >= 2 pi k / vol.
            BoundId::LiyauCounting => (1.0 / (2.0 * PI), ConstantTier::DerivedFromProof),
            // C20 * (5/2) * j^2 / pi.
            BoundId::LiyauInradius => (5.0 * j2 / (4.0 * PI), ConstantTier::DerivedFromProof),
            _ => return None,
        };
        Some(ConstantUse { value, tier })
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .iter()
            .copied()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown bound id {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda1Variant {
    LiYau,
    ZhongYang,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuserVariant {
    Cm,
    Buser79,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirichletUpperVariant {
    ChengDp,
    BuserDp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplicityVariant {
    MbcDiameter,
    MbcVolume,
    MbnVolume,
    MbdDiameter,
    MbdVolume,
    LiyauInradius,
}

impl From<MultiplicityVariant> for BoundId {
    fn from(v: MultiplicityVariant) -> Self {
        match v {
            MultiplicityVariant::MbcDiameter => BoundId::MbcDiameter,
            MultiplicityVariant::MbcVolume => BoundId::MbcVolume,
            MultiplicityVariant::MbnVolume => BoundId::MbnVolume,
            MultiplicityVariant::MbdDiameter => BoundId::MbdDiameter,
            MultiplicityVariant::MbdVolume => BoundId::MbdVolume,
            MultiplicityVariant::LiyauInradius => BoundId::LiyauInradius,
        }
    }
}

/// A constant estimated over a corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalConstant {
    pub bound_id: BoundId,
    pub corpus: String,
    pub value: f64,
    /// `"sup"` for upper bounds, `"inf"` for lower bounds.
    pub extremum: String,
    pub attained_on: String,
    pub argument: Argument,
}

/// Constants written once per corpus run, read by every later check.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ConstantStore {
    values: BTreeMap<BoundId, EmpiricalConstant>,
}

impl ConstantStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores a constant; a second value for the same bound is refused.
    pub fn insert(&mut self, c: EmpiricalConstant) -> Result<()> {
        if self.values.contains_key(&c.bound_id) {
            return Err(Error::Refused(format!(
                "constant for {} is already stored",
                c.bound_id
            )));
        }
        self.values.insert(c.bound_id, c);
        Ok(())
    }

    /// A caller-supplied value, tagged empirical.
    pub fn supply(&mut self, id: BoundId, value: f64) -> Result<()> {
        self.insert(EmpiricalConstant {
            bound_id: id,
            corpus: "supplied".into(),
            value,
            extremum: "supplied".into(),
            attained_on: String::new(),
            argument: Argument::K(0),
        })
    }

    pub fn get(&self, id: BoundId) -> Option<&EmpiricalConstant> {
        self.values.get(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &EmpiricalConstant> {
        self.values.values()
    }

    /// The constant used by checks: a stored value if present, otherwise the
    /// paper-explicit or derived default.
    pub fn resolve(&self, id: BoundId) -> Result<ConstantUse> {
        if let Some(c) = self.values.get(&id) {
            return Ok(ConstantUse {
                value: c.value,
                tier: ConstantTier::Empirical,
            });
        }
        id.default_constant().ok_or_else(|| {
            Error::Refused(format!(
                "no constant for {id}: estimate it over a corpus or supply one"
            ))
        })
    }
}

/// A corpus member for constant estimation.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub spectrum: SpectrumSummary,
    pub inv: GeometricInvariants,
}

/// Measured value and geometric factor of one inequality instance.
struct Instance {
    measured: f64,
    factor: f64,
    extra: BTreeMap<String, f64>,
    notes: Vec<String>,
}

fn refuse(id: BoundId, why: &str) -> Error {
    Error::Refused(format!("{id}: {why}"))
}

fn need_bc(id: BoundId, s: &SpectrumSummary, bc: BoundaryCondition) -> Result<()> {
    if s.bc != bc {
        return Err(refuse(
            id,
            &format!("requires a {bc} spectrum, got {}", s.bc),
        ));
    }
    Ok(())
}

fn need_convex(id: BoundId, inv: &GeometricInvariants) -> Result<()> {
    if !inv.convex {
        let hint = match id {
            BoundId::Ourcheng => {
                "the domain is not convex; convexity cannot be dropped (see the exponential surface of revolution family)"
            }
            BoundId::GromovCounting | BoundId::LiYau | BoundId::ZhongYang => {
                "the domain is not convex; lower bounds fail without convexity (see the dumbbell family)"
            }
            _ => "the domain is not convex",
        };
        return Err(refuse(id, hint));
    }
    Ok(())
}

fn value_at(id: BoundId, values: &[f64], k: usize) -> Result<f64> {
    match values.get(k) {
        None => Err(Error::InsufficientSpectrum {
            largest: values.last().copied().unwrap_or(f64::NEG_INFINITY),
        }),
        Some(v) if !v.is_finite() => Err(refuse(id, "non-finite eigenvalue")),
        Some(&v) => Ok(v),
    }
}

/// `rad^{-2}`, infinite for domains with corners.
fn rad_term(inv: &GeometricInvariants) -> f64 {
    if inv.rad > 0.0 {
        inv.rad.powi(-2)
    } else {
        f64::INFINITY
    }
}

/// Conservative counting: `#{lower values < lambda}`.
fn conservative_count(s: &SpectrumSummary, lambda: f64) -> Result<usize> {
    if s.is_empty() || lambda > s.largest() {
        return Err(Error::InsufficientSpectrum {
            largest: s.largest(),
        });
    }
    let mut lower = s.lower_values();
    lower.sort_by(f64::total_cmp);
    Ok(count_below(&lower, lambda))
}

fn multiplicity_instance(id: BoundId, s: &SpectrumSummary, k: usize) -> Result<(f64, Vec<String>)> {
    if k >= s.len() {
        return Err(Error::InsufficientSpectrum {
            largest: s.largest(),
        });
    }
    let idx = s
        .clusters
        .iter()
        .position(|c| k >= c.start && k < c.start + c.size)
        .ok_or_else(|| refuse(id, "no cluster contains the index"))?;
    let c = s.clusters[idx];
    let values = s.best_values();
    let mut notes = Vec::new();
    let scale = values[c.start]
        .abs()
        .max(values.get(1).copied().unwrap_or(0.0).abs());
    let near = |a: f64, b: f64| (b - a).abs() <= 10.0 * s.rel_gap * scale;
    let prev_close = c.start > 0 && near(values[c.start - 1], values[c.start]);
    let last = c.start + c.size - 1;
    let next_close = last + 1 < values.len() && near(values[last], values[last + 1]);
    if prev_close || next_close {
        notes.push("multiplicity uncertain: cluster tolerance dominates the gap".into());
    }
    if last + 1 == values.len() {
        notes.push("cluster reaches the end of the computed spectrum".into());
    }
    Ok((c.size as f64, notes))
}

fn instance(
    id: BoundId,
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    arg: Argument,
) -> Result<Instance> {
    if inv.n != 2 {
        return Err(refuse(id, "only dimension two is supported"));
    }
    let mut extra = BTreeMap::new();
    let mut notes = Vec::new();
    let (measured, factor) = match (id, arg) {
        (BoundId::LiYau | BoundId::ZhongYang, Argument::K(_)) => {
            need_bc(id, s, BoundaryCondition::Neumann)?;
            need_convex(id, inv)?;
            let l1 = value_at(id, &s.lower_values(), 1)?;
            (l1, inv.d.powi(-2))
        }
        (BoundId::GromovCounting, Argument::Lambda(l)) => {
            if !(inv.convex || inv.closed) {
                need_convex(id, inv)?;
            }
            (conservative_count(s, l)? as f64, inv.d * inv.d * l)
        }
        (BoundId::NeumannVolume, Argument::Lambda(l)) => {
            need_convex(id, inv)?;
            let rt = rad_term(inv);
            if rt.is_infinite() {
                notes.push("rad = 0: the bound is vacuous".into());
            }
            let g = inv.vol * (l + inv.kappa + inv.inj_inverse.powi(2) + rt);
            (conservative_count(s, l)? as f64, g)
        }
        (BoundId::Ourcheng, Argument::K(k)) => {
            need_bc(id, s, BoundaryCondition::Neumann)?;
            need_convex(id, inv)?;
            if k < 1 {
                return Err(refuse(id, "k must be at least 1"));
            }
            let up = s.upper_values();
            extra.insert("measured_k_minus_1".into(), value_at(id, up, k - 1)?);
            (value_at(id, up, k)?, (k as f64 / inv.d).powi(2))
        }
        (BoundId::ChengClosed, Argument::K(k)) => {
            if !inv.closed {
                return Err(refuse(id, "requires a closed surface"));
            }
            if k < 1 {
                return Err(refuse(id, "k must be at least 1"));
            }
            (
                value_at(id, s.upper_values(), k)?,
                (k as f64 / inv.d).powi(2),
            )
        }
        (BoundId::Cm | BoundId::Buser79, Argument::K(k)) => {
            if id == BoundId::Buser79 && !inv.closed {
                return Err(refuse(id, "requires a closed surface"));
            }
            if id == BoundId::Cm {
                need_bc(id, s, BoundaryCondition::Neumann)?;
                if inv.closed {
                    return Err(refuse(id, "requires a domain with boundary"));
                }
            }
            if k < 1 {
                return Err(refuse(id, "k must be at least 1"));
            }
            (value_at(id, s.upper_values(), k)?, k as f64 / inv.vol)
        }
        (BoundId::ChengDp | BoundId::BuserDp, Argument::K(k)) => {
            need_bc(id, s, BoundaryCondition::Dirichlet)?;
            if !(inv.rad > 0.0) {
                return Err(refuse(
                    id,
                    "rad = 0 (corners): apply the bound to a smooth domain contained inside and use domain monotonicity",
                ));
            }
            let kk = (k + 1) as f64;
            let rad2 = inv.rad.powi(-2);
            let g = if id == BoundId::ChengDp {
                16.0 * (inv.kappa + rad2) + 64.0 * (kk / inv.d_bar).powi(2)
            } else {
                16.0 * (inv.kappa + rad2) + 16.0 * PI * kk / inv.vol
            };
            (value_at(id, s.upper_values(), k)?, g)
        }
        (BoundId::LiyauCounting, Argument::Lambda(l)) => {
            need_bc(id, s, BoundaryCondition::Dirichlet)?;
            (conservative_count(s, l)? as f64, inv.vol * l)
        }
        (BoundId::ChengYang, Argument::K(k)) => {
            need_bc(id, s, BoundaryCondition::Dirichlet)?;
            if k < inv.n {
                return Err(refuse(id, "requires k >= n = 2"));
            }
            let nu0 = value_at(id, &s.lower_values(), 0)?;
            (value_at(id, s.upper_values(), k)?, nu0 * (k + 1) as f64)
        }
        (m, Argument::K(k)) if m.is_multiplicity() => {
            let kf = k as f64;
            let inj2 = inv.inj_inverse.powi(2);
            let g = match m {
                BoundId::MbcDiameter => {
                    let ok = inv.closed || (inv.convex && s.bc == BoundaryCondition::Neumann);
                    if !ok {
                        return Err(refuse(
                            m,
                            "requires a closed surface or a convex Neumann domain",
                        ));
                    }
                    if k < 1 {
                        return Err(refuse(m, "k must be at least 1"));
                    }
                    kf * kf + inv.d * inv.kappa.sqrt()
                }
                BoundId::MbcVolume => {
                    if !inv.closed {
                        return Err(refuse(m, "requires a closed surface"));
                    }
                    if k < 1 {
                        return Err(refuse(m, "k must be at least 1"));
                    }
                    kf + inv.vol * (inv.kappa + inj2)
                }
                BoundId::MbnVolume => {
                    need_bc(m, s, BoundaryCondition::Neumann)?;
                    need_convex(m, inv)?;
                    if k < 1 {
                        return Err(refuse(m, "k must be at least 1"));
                    }
                    kf + inv.vol * (inv.kappa + inj2 + rad_term(inv))
                }
                BoundId::MbdDiameter => {
                    need_bc(m, s, BoundaryCondition::Dirichlet)?;
                    need_convex(m, inv)?;
                    let dr = if inv.rad > 0.0 {
                        (inv.d / inv.rad).powi(2)
                    } else {
                        f64::INFINITY
                    };
                    dr + kf * kf + inv.d * inv.d * inv.kappa
                }
                BoundId::MbdVolume => {
                    need_bc(m, s, BoundaryCondition::Dirichlet)?;
                    need_convex(m, inv)?;
                    kf + 1.0 + inv.vol * (inv.kappa + inj2 + rad_term(inv))
                }
                _ => {
                    need_bc(m, s, BoundaryCondition::Dirichlet)?;
                    if inv.closed {
                        return Err(refuse(m, "requires a domain with boundary"));
                    }
                    inv.vol / inv.inradius_rho.powi(2) * (kf + 1.0)
                }
            };
            if g.is_infinite() {
                notes.push("rad = 0: the bound is vacuous".into());
            }
            let (m_k, n) = multiplicity_instance(m, s, k)?;
            notes.extend(n);
            (m_k, g)
        }
        (id, arg) => {
            return Err(Error::InvalidArgument(format!(
                "{id} is evaluated at {}, got {arg:?}",
                if id.is_counting() {
                    "a threshold lambda"
                } else {
                    "an index k"
                }
            )))
        }
    };
    Ok(Instance {
        measured,
        factor,
        extra,
        notes,
    })
}

/// Evaluates bound `id` with an explicit constant.
pub fn evaluate_with(
    id: BoundId,
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    arg: Argument,
    constant: ConstantUse,
) -> Result<BoundReport> {
    let inst = instance(id, s, inv, arg)?;
    let orientation = id.orientation();
    let mut bound = constant.value * inst.factor;
    if id == BoundId::GromovCounting {
        bound = bound.max(1.0);
    }
    let m = inst.measured;
    let (satisfied, margin) = match orientation {
        Orientation::Upper => {
            let sat = m <= bound * (1.0 + ROUNDING);
            let margin = if m > 0.0 { bound / m } else { f64::INFINITY };
            (sat, margin)
        }
        Orientation::Lower => {
            let sat = m * (1.0 + ROUNDING) >= bound;
            let margin = if bound > 0.0 {
                m / bound
            } else {
                f64::INFINITY
            };
            (sat, margin)
        }
    };
    let mut constants_used = BTreeMap::new();
    constants_used.insert(id.constant_name().to_string(), constant);
    match id {
        BoundId::ChengDp => {
            constants_used.insert(
                "C11".into(),
                ConstantUse {
                    value: 16.0 * constant.value,
                    tier: constant.tier,
                },
            );
            constants_used.insert(
                "C12".into(),
                ConstantUse {
                    value: 64.0 * constant.value,
                    tier: constant.tier,
                },
            );
        }
        BoundId::BuserDp => {
            constants_used.insert(
                "C13".into(),
                ConstantUse {
                    value: 16.0 * constant.value,
                    tier: constant.tier,
                },
            );
            constants_used.insert(
                "C14".into(),
                ConstantUse {
                    value: 16.0 * PI * constant.value,
                    tier: constant.tier,
                },
            );
        }
        _ => {}
    }
    let mut extra = inst.extra;
    if let Some(&prev) = extra.get("measured_k_minus_1") {
        extra.insert(
            "margin_k_minus_1".into(),
            if prev > 0.0 {
                bound / prev
            } else {
                f64::INFINITY
            },
        );
    }
    let mut notes = inst.notes;
    if matches!(
        id,
        BoundId::MbcVolume | BoundId::MbnVolume | BoundId::MbdVolume
    ) || id == BoundId::NeumannVolume
    {
        notes.push(if inv.inj_inverse > 0.0 {
            "inj^-n evaluated from the shortest period".into()
        } else {
            "inj^-n = 0 for planar domains".into()
        });
    }
    Ok(BoundReport {
        bound_id: id,
        domain_id: String::new(),
        argument: arg,
        bound,
        measured: m,
        orientation,
        margin,
        satisfied,
        constants_used,
        constant_tier: constant.tier,
        extra,
        notes,
    })
}

/// Evaluates bound `id` with the constant resolved from `store`.
pub fn evaluate(
    id: BoundId,
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    arg: Argument,
    store: &ConstantStore,
) -> Result<BoundReport> {
    let c = store.resolve(id)?;
    evaluate_with(id, s, inv, arg, c)
}

pub fn check_lambda1_lower(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    variant: Lambda1Variant,
) -> Result<BoundReport> {
    let id = match variant {
        Lambda1Variant::LiYau => BoundId::LiYau,
        Lambda1Variant::ZhongYang => BoundId::ZhongYang,
    };
    evaluate(id, s, inv, Argument::K(1), &ConstantStore::new())
}

pub fn check_gromov_counting(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    lambda: f64,
    store: &ConstantStore,
) -> Result<BoundReport> {
    evaluate(
        BoundId::GromovCounting,
        s,
        inv,
        Argument::Lambda(lambda),
        store,
    )
}

pub fn check_neumann_volume(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    lambda: f64,
    store: &ConstantStore,
) -> Result<BoundReport> {
    evaluate(
        BoundId::NeumannVolume,
        s,
        inv,
        Argument::Lambda(lambda),
        store,
    )
}

pub fn check_cheng_neumann_convex(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
) -> Result<BoundReport> {
    evaluate(
        BoundId::Ourcheng,
        s,
        inv,
        Argument::K(k),
        &ConstantStore::new(),
    )
}

pub fn check_cheng_closed_explicit(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
) -> Result<BoundReport> {
    evaluate(
        BoundId::ChengClosed,
        s,
        inv,
        Argument::K(k),
        &ConstantStore::new(),
    )
}

pub fn check_buser_neumann(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
    variant: BuserVariant,
    store: &ConstantStore,
) -> Result<BoundReport> {
    let id = match variant {
        BuserVariant::Cm => BoundId::Cm,
        BuserVariant::Buser79 => BoundId::Buser79,
    };
    evaluate(id, s, inv, Argument::K(k), store)
}

pub fn check_dirichlet_upper(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
    variant: DirichletUpperVariant,
) -> Result<BoundReport> {
    let id = match variant {
        DirichletUpperVariant::ChengDp => BoundId::ChengDp,
        DirichletUpperVariant::BuserDp => BoundId::BuserDp,
    };
    evaluate(id, s, inv, Argument::K(k), &ConstantStore::new())
}

pub fn check_dirichlet_counting_liyau(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    lambda: f64,
) -> Result<BoundReport> {
    evaluate(
        BoundId::LiyauCounting,
        s,
        inv,
        Argument::Lambda(lambda),
        &ConstantStore::new(),
    )
}

pub fn check_cheng_yang(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
) -> Result<BoundReport> {
    evaluate(
        BoundId::ChengYang,
        s,
        inv,
        Argument::K(k),
        &ConstantStore::new(),
    )
}

pub fn check_multiplicity(
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    k: usize,
    variant: MultiplicityVariant,
    store: &ConstantStore,
) -> Result<BoundReport> {
    evaluate(variant.into(), s, inv, Argument::K(k), store)
}

/// Arguments at which a bound is evaluated on a spectrum: every admissible
/// index, or for counting bounds every jump of the conservative counting
/// function (approached from above).
pub fn default_arguments(id: BoundId, s: &SpectrumSummary) -> Vec<Argument> {
    if id.is_counting() {
        let mut lower = s.lower_values();
        lower.sort_by(f64::total_cmp);
        let largest = s.largest();
        let mut out: Vec<Argument> = Vec::new();
        for (i, &v) in lower.iter().enumerate() {
            if v <= 0.0 || (i + 1 < lower.len() && lower[i + 1] == v) {
                continue;
            }
            let l = v * (1.0 + 1e-9);
            if l <= largest {
                out.push(Argument::Lambda(l));
            }
        }
        out
    } else {
        let (from, to) = match id {
            BoundId::LiYau | BoundId::ZhongYang => (1, 2.min(s.len())),
            _ => (0, s.len()),
        };
        (from..to).map(Argument::K).collect()
    }
}

/// Runs every admissible argument of `id`; refused instances are skipped.
pub fn evaluate_all(
    id: BoundId,
    s: &SpectrumSummary,
    inv: &GeometricInvariants,
    store: &ConstantStore,
    max_k: Option<usize>,
) -> Vec<BoundReport> {
    let Ok(c) = store.resolve(id) else {
        return Vec::new();
    };
    default_arguments(id, s)
        .into_iter()
        .filter(|a| match (a, max_k) {
            (Argument::K(k), Some(m)) => *k <= m,
            _ => true,
        })
        .filter_map(|a| evaluate_with(id, s, inv, a, c).ok())
        .collect()
}

/// The smallest constant (largest for lower bounds) making `id` tight over the
/// corpus. For counting bounds the ratio is evaluated as the threshold
/// approaches each jump from above; the Gromov form only constrains counts
/// above one.
pub fn estimate_constant(
    id: BoundId,
    corpus: &[CorpusEntry],
    max_k: Option<usize>,
) -> Result<EmpiricalConstant> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("empty corpus".into()));
    }
    if corpus.iter().any(|e| e.inv.n != corpus[0].inv.n) {
        return Err(Error::Refused("corpus mixes dimensions".into()));
    }
    let lower = id.orientation() == Orientation::Lower;
    let mut best: Option<(f64, String, Argument)> = None;
    for e in corpus {
        let args: Vec<Argument> = if id.is_counting() {
            let mut vals = e.spectrum.lower_values();
            vals.sort_by(f64::total_cmp);
            vals.iter()
                .filter(|v| **v > 0.0 && **v <= e.spectrum.largest())
                .map(|&v| Argument::Lambda(v))
                .collect()
        } else {
            default_arguments(id, &e.spectrum)
                .into_iter()
                .filter(|a| !matches!((a, max_k), (Argument::K(k), Some(m)) if *k > m))
                .collect()
        };
        for arg in args {
            let Ok(inst) = instance(id, &e.spectrum, &e.inv, arg) else {
                continue;
            };
            let measured = match (id.is_counting(), arg) {
                // Limit from above: the jump at v is included.
                (true, Argument::Lambda(v)) => {
                    let mut vals = e.spectrum.lower_values();
                    vals.sort_by(f64::total_cmp);
                    vals.partition_point(|&x| x <= v) as f64
                }
                _ => inst.measured,
            };
            if id == BoundId::GromovCounting && measured <= 1.0 {
                continue;
            }
            if !(inst.factor.is_finite() && inst.factor > 0.0) {
                continue;
            }
            let ratio = measured / inst.factor;
            let better = match &best {
                None => true,
                Some((b, _, _)) => {
                    if lower {
                        ratio < *b
                    } else {
                        ratio > *b
                    }
                }
            };
            if better {
                best = Some((ratio, e.id.clone(), arg));
            }
        }
    }
    let (value, attained_on, argument) =
        best.ok_or_else(|| Error::Refused(format!("{id}: no admissible instance in the corpus")))?;
    Ok(EmpiricalConstant {
        bound_id: id,
        corpus: corpus
            .iter()
            .map(|e| e.id.as_str())
            .collect::<Vec<_>>()
            .join("+"),
        value,
        extremum: if lower { "inf" } else { "sup" }.into(),
        attained_on,
        argument,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::GeometricInvariants;
    use crate::geometry::Point;
    use crate::oracle::{disk_spectrum, oracle_summary, rectangle_spectrum, torus_spectrum};

    pub(crate) fn inv(
        d: f64,
        d_bar: f64,
        rho: f64,
        rad: f64,
        vol: f64,
        convex: bool,
        closed: bool,
    ) -> GeometricInvariants {
        GeometricInvariants {
            n: 2,
            d,
            d_bar,
            inradius_rho: rho,
            rad,
            vol,
            kappa: 0.0,
            inj_inverse: 0.0,
            convex,
            closed,
            resolution: 0.0,
            d_bar_error: 0.0,
            diameter_endpoints: [Point::new(0.0, 0.0), Point::new(0.0, 0.0)],
            inradius_center: None,
        }
    }

    fn square() -> GeometricInvariants {
        inv(2f64.sqrt(), 2f64.sqrt(), 0.5, 0.0, 1.0, true, false)
    }

    fn disk() -> GeometricInvariants {
        inv(2.0, 2.0, 1.0, 1.0, PI, true, false)
    }

    fn torus(a: f64, b: f64) -> GeometricInvariants {
        let mut t = inv(
            (a * a + b * b).sqrt() / 2.0,
            (a * a + b * b).sqrt() / 2.0,
            b / 2.0,
            b / 2.0,
            a * b,
            false,
            true,
        );
        t.inj_inverse = 2.0 / b;
        t
    }

    fn sq(bc: BoundaryCondition) -> SpectrumSummary {
        oracle_summary(bc, rectangle_spectrum(1.0, 1.0, bc, 60))
    }

    #[test]
    fn li_yau_on_square_and_disk() {
        let r = check_lambda1_lower(
            &sq(BoundaryCondition::Neumann),
            &square(),
            Lambda1Variant::LiYau,
        )
        .unwrap();
        assert!((r.bound - PI * PI / 8.0).abs() < 1e-12);
        assert!(r.satisfied && (r.margin - 8.0).abs() < 1e-12);
        let z = check_lambda1_lower(
            &sq(BoundaryCondition::Neumann),
            &square(),
            Lambda1Variant::ZhongYang,
        )
        .unwrap();
        assert!((z.margin - 2.0).abs() < 1e-12);
        let ds = oracle_summary(
            BoundaryCondition::Neumann,
            disk_spectrum(1.0, BoundaryCondition::Neumann, 10),
        );
        let r = check_lambda1_lower(&ds, &disk(), Lambda1Variant::LiYau).unwrap();
        assert!((r.bound - PI * PI / 16.0).abs() < 1e-12 && r.satisfied);
        assert!((r.measured - 3.389_957).abs() < 1e-5);
    }

    #[test]
    fn non_convex_is_refused() {
        let mut i = square();
        i.convex = false;
        let e = check_lambda1_lower(&sq(BoundaryCondition::Neumann), &i, Lambda1Variant::LiYau)
            .unwrap_err();
        assert!(matches!(e, Error::Refused(_)));
        let e = check_cheng_neumann_convex(&sq(BoundaryCondition::Neumann), &i, 1).unwrap_err();
        assert!(e.to_string().contains("revolution"));
    }

    #[test]
    fn gromov_counting_on_square() {
        let s = sq(BoundaryCondition::Neumann);
        let mut store = ConstantStore::new();
        store.supply(BoundId::GromovCounting, 0.4).unwrap();
        let r = check_gromov_counting(&s, &square(), 100.0, &store).unwrap();
        // p^2 + q^2 < 100 / pi^2 over p, q >= 0.
        let n = (0..11)
            .flat_map(|p| (0..11).map(move |q| (p, q)))
            .filter(|(p, q)| ((p * p + q * q) as f64) < 100.0 / (PI * PI))
            .count();
        assert_eq!(r.measured as usize, n);
        assert!((r.bound - 0.4 * 2.0 * 100.0).abs() < 1e-9);
        assert_eq!(r.constant_tier, ConstantTier::Empirical);
        // Below lambda_1 only the constant mode counts and the max clause gives 1.
        let r = check_gromov_counting(&s, &square(), 5.0, &store).unwrap();
        assert_eq!(r.measured, 1.0);
        assert!(r.satisfied && r.bound >= 1.0);
        assert!(check_gromov_counting(&s, &square(), 100.0, &ConstantStore::new()).is_err());
    }

    #[test]
    fn cheng_convex_examples() {
        let r = check_cheng_neumann_convex(&sq(BoundaryCondition::Neumann), &square(), 1).unwrap();
        assert!((r.measured * 2.0 - 2.0 * PI * PI).abs() < 1e-9);
        assert!(r.satisfied && r.constant_tier == ConstantTier::DerivedFromProof);
        assert!(r.extra.contains_key("margin_k_minus_1"));
        let ds = oracle_summary(
            BoundaryCondition::Neumann,
            disk_spectrum(1.0, BoundaryCondition::Neumann, 10),
        );
        let r = check_cheng_neumann_convex(&ds, &disk(), 3).unwrap();
        assert!((r.measured - 3.054_236_928_227_14f64.powi(2)).abs() < 1e-9);
        assert!((r.measured * 4.0 / 9.0 - 4.146).abs() < 1e-3 && r.satisfied);
    }

    #[test]
    fn cheng_closed_on_torus() {
        let s = oracle_summary(BoundaryCondition::Neumann, torus_spectrum(1.0, 1.0, 20));
        let r = check_cheng_closed_explicit(&s, &torus(1.0, 1.0), 1).unwrap();
        assert!((r.measured - 4.0 * PI * PI).abs() < 1e-9);
        assert!((r.bound - 4.0 * 5.783_185_962_946_784 / 0.5).abs() < 1e-9);
        assert!(r.satisfied && r.constant_tier == ConstantTier::PaperExplicit);
        let s = oracle_summary(BoundaryCondition::Neumann, torus_spectrum(1.0, 0.01, 20));
        let r = check_cheng_closed_explicit(&s, &torus(1.0, 0.01), 5).unwrap();
        assert!((r.measured - 4.0 * PI * PI * 9.0).abs() < 1e-9);
        assert!(r.satisfied);
    }

    #[test]
    fn dirichlet_upper_examples() {
        let dd = oracle_summary(
            BoundaryCondition::Dirichlet,
            disk_spectrum(1.0, BoundaryCondition::Dirichlet, 10),
        );
        let r = check_dirichlet_upper(&dd, &disk(), 0, DirichletUpperVariant::ChengDp).unwrap();
        assert!((r.measured - 5.783_186).abs() < 1e-5 && r.satisfied);
        assert!((r.constants_used["C12"].value - 64.0 * j01().powi(2)).abs() < 1e-9);
        let r = check_dirichlet_upper(&dd, &disk(), 9, DirichletUpperVariant::BuserDp).unwrap();
        assert!(r.satisfied);
        let e = check_dirichlet_upper(
            &sq(BoundaryCondition::Dirichlet),
            &square(),
            0,
            DirichletUpperVariant::ChengDp,
        );
        assert!(matches!(e, Err(Error::Refused(m)) if m.contains("monotonicity")));
    }

    #[test]
    fn liyau_counting_on_square() {
        let s = sq(BoundaryCondition::Dirichlet);
        let r = check_dirichlet_counting_liyau(&s, &square(), 50.0 * PI * PI).unwrap();
        let lattice = (1..8)
            .flat_map(|p| (1..8).map(move |q| p * p + q * q))
            .filter(|&n| n < 50)
            .count();
        assert_eq!(lattice, 30);
        assert_eq!(r.measured, lattice as f64);
        assert!(r.satisfied && r.bound / r.measured > 2.0);
        let r = check_dirichlet_counting_liyau(&s, &square(), 10.0).unwrap();
        assert_eq!(r.measured, 0.0);
        assert!(r.satisfied && r.margin.is_infinite());
        assert!(matches!(
            check_dirichlet_counting_liyau(&s, &square(), 1e6),
            Err(Error::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn cheng_yang_examples() {
        let r = check_cheng_yang(&sq(BoundaryCondition::Dirichlet), &square(), 2).unwrap();
        assert!((r.measured - 5.0 * PI * PI).abs() < 1e-9);
        assert!((r.bound - 15.0 * PI * PI).abs() < 1e-9 && r.satisfied);
        let dd = oracle_summary(
            BoundaryCondition::Dirichlet,
            disk_spectrum(1.0, BoundaryCondition::Dirichlet, 10),
        );
        let r = check_cheng_yang(&dd, &disk(), 2).unwrap();
        assert!((r.measured - 14.681_97).abs() < 1e-4 && (r.bound - 43.374).abs() < 1e-3);
        assert!(check_cheng_yang(&dd, &disk(), 1).is_err());
    }

    #[test]
    fn multiplicities_on_torus_and_disk() {
        let s = oracle_summary(BoundaryCondition::Neumann, torus_spectrum(1.0, 1.0, 30));
        let mut store = ConstantStore::new();
        store.supply(BoundId::MbcDiameter, 4.0).unwrap();
        let r = check_multiplicity(
            &s,
            &torus(1.0, 1.0),
            1,
            MultiplicityVariant::MbcDiameter,
            &store,
        )
        .unwrap();
        assert_eq!(r.measured, 4.0);
        assert!(r.satisfied && (r.margin - 1.0).abs() < 1e-12);
        let dd = oracle_summary(
            BoundaryCondition::Dirichlet,
            disk_spectrum(1.0, BoundaryCondition::Dirichlet, 21),
        );
        for k in 0..=20 {
            let r = check_multiplicity(&dd, &disk(), k, MultiplicityVariant::LiyauInradius, &store)
                .unwrap();
            assert!(r.measured <= 2.0 && r.satisfied);
        }
    }

    #[test]
    fn estimate_ourcheng_and_scale_invariance() {
        let corpus = vec![
            CorpusEntry {
                id: "square".into(),
                spectrum: sq(BoundaryCondition::Neumann),
                inv: square(),
            },
            CorpusEntry {
                id: "disk".into(),
                spectrum: oracle_summary(
                    BoundaryCondition::Neumann,
                    disk_spectrum(1.0, BoundaryCondition::Neumann, 12),
                ),
                inv: disk(),
            },
        ];
        let c = estimate_constant(BoundId::Ourcheng, &corpus, Some(10)).unwrap();
        assert!((c.value - 2.0 * PI * PI).abs() < 1e-9, "{c:?}");
        assert_eq!(c.attained_on, "square");
        assert_eq!(c.argument, Argument::K(1));
        let t = 3.0;
        let scaled: Vec<CorpusEntry> = corpus
            .iter()
            .map(|e| {
                let mut s = e.spectrum.clone();
                s.eigenvalues.iter_mut().for_each(|v| *v /= t * t);
                let mut i = e.inv.clone();
                i.d *= t;
                i.d_bar *= t;
                i.rad *= t;
                i.inradius_rho *= t;
                i.vol *= t * t;
                CorpusEntry {
                    id: e.id.clone(),
                    spectrum: s,
                    inv: i,
                }
            })
            .collect();
        let cs = estimate_constant(BoundId::Ourcheng, &scaled, Some(10)).unwrap();
        assert!(((cs.value - c.value) / c.value).abs() < 1e-12);
        let cm = estimate_constant(BoundId::Cm, &corpus, Some(10)).unwrap();
        let direct = corpus
            .iter()
            .flat_map(|e| (1..=10).map(move |k| e.spectrum.eigenvalues[k] * e.inv.vol / k as f64))
            .fold(0.0, f64::max);
        assert!((cm.value - direct).abs() < 1e-12 * direct, "{cm:?}");
        // Polya's inequality for tiling domains: the square stays below 4 pi.
        let sq_max = (1..=10)
            .map(|k| corpus[0].spectrum.eigenvalues[k] / k as f64)
            .fold(0.0, f64::max);
        assert!(sq_max <= 4.0 * PI);
    }

    #[test]
    fn estimated_constants_are_self_consistent() {
        let corpus = vec![
            CorpusEntry {
                id: "square".into(),
                spectrum: sq(BoundaryCondition::Neumann),
                inv: square(),
            },
            CorpusEntry {
                id: "disk".into(),
                spectrum: oracle_summary(
                    BoundaryCondition::Neumann,
                    disk_spectrum(1.0, BoundaryCondition::Neumann, 30),
                ),
                inv: disk(),
            },
        ];
        let mut store = ConstantStore::new();
        for id in [
            BoundId::GromovCounting,
            BoundId::NeumannVolume,
            BoundId::Cm,
            BoundId::MbcDiameter,
            BoundId::MbnVolume,
        ] {
            store
                .insert(estimate_constant(id, &corpus, None).unwrap())
                .unwrap();
        }
        assert!(store
            .insert(estimate_constant(BoundId::Cm, &corpus, None).unwrap())
            .is_err());
        for e in &corpus {
            for id in BoundId::ALL {
                for r in evaluate_all(id, &e.spectrum, &e.inv, &store, None) {
                    assert!(r.satisfied, "{}", r.csv_row());
                    assert!(r.margin > 0.0);
                }
            }
        }
    }

    #[test]
    fn csv_and_json_layout() {
        let s = sq(BoundaryCondition::Dirichlet);
        let r = check_dirichlet_counting_liyau(&s, &square(), 10.0)
            .unwrap()
            .with_domain("square");
        let csv = reports_csv(std::slice::from_ref(&r));
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("liyau_counting,square,10,"));
        assert!(csv.contains(",inf,true,derived-from-proof"));
        let js = reports_json(&[r]);
        assert_eq!(js[0]["margin"], "inf");
        assert_eq!(js[0]["constants_used"]["C20"]["tier"], "derived-from-proof");
        assert_eq!(js[0]["argument"]["lambda"], 10.0);
    }

    #[test]
    fn bound_ids_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.name().parse::<BoundId>().unwrap(), id);
            assert_eq!(serde_json::to_value(id).unwrap(), id.name());
        }
    }
}
