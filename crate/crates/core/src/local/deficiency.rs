//! Per-place certificates for the twisted model
//! `y² = π⁻³ (z² - α)(z² - α - πb)(z² - α - πc)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::count::{count_affine_points, find_smooth_point, singular_points, weil_lower_bound};
use super::hensel::{hensel_lift, LocalPoint};
use super::qp::{qp_points_exist, QpEmptyTrace, QpEvidence};
use super::LocalError;
use crate::arith::{
    format_rational, is_square_local, legendre, primes_up_to, val, Modulus, Place, Prime, Rational,
};
use crate::curve::{reduce_mod_p, EllipticModel, HyperellipticModel};
use crate::poly::Poly;

/// Precision of the Hensel lifts recorded at good places.
pub const LIFT_PRECISION: u32 = 4;
/// Default enumeration bound for good places.
pub const DEFAULT_PLACE_BOUND: u64 = 1000;

/// Whether the points at infinity of `y² = f(z)` are defined over ℚ_v.
pub fn infinity_rational(h: &HyperellipticModel, v: Place) -> Result<bool, LocalError> {
    match h.degree() {
        5 => Ok(true),
        6 => Ok(is_square_local(&h.leading(), v)?),
        d => Err(LocalError::UnsupportedDegree(d)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

impl Hypothesis {
    pub fn new(name: &str, holds: bool, detail: impl Into<String>) -> Self {
        Hypothesis {
            name: name.to_string(),
            holds,
            detail: detail.into(),
        }
    }
}

fn require(place: Place, hs: &[Hypothesis]) -> Result<(), LocalError> {
    match hs.iter().find(|h| !h.holds) {
        Some(h) => Err(LocalError::HypothesisFailed {
            place: place.to_string(),
            hypothesis: h.name.clone(),
            detail: h.detail.clone(),
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSummary {
    pub q: u64,
    pub weil_lower_bound: i64,
    pub affine_points: u64,
    pub smooth_affine_points: u64,
    pub singular_points: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    PointFound {
        witness: LocalPoint,
        reduction: ReductionSummary,
    },
    InfinityRational {
        leading_coefficient: String,
    },
    EmptyByValuation {
        hypotheses: Vec<Hypothesis>,
        odd_degree_extensions: bool,
        padic_cross_check: QpEmptyTrace,
    },
    EmptyByPadicSearch {
        trace: QpEmptyTrace,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlaceCertificate {
    pub place: Place,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub deficient: bool,
}

impl PlaceCertificate {
    /// A place is deficient only when emptiness is certified over every odd-degree
    /// extension of the completion; a bare ℚ_p search does not say that.
    pub fn consistent(&self) -> bool {
        match &self.verdict {
            Verdict::PointFound { .. } | Verdict::InfinityRational { .. } => !self.deficient,
            Verdict::EmptyByValuation {
                odd_degree_extensions,
                hypotheses,
                ..
            } => self.deficient == *odd_degree_extensions && hypotheses.iter().all(|h| h.holds),
            Verdict::EmptyByPadicSearch { .. } => !self.deficient,
        }
    }
}

/// Which part of the partition `{𝔪-part, π, good}` a place falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceClass {
    Modulus,
    Pi,
    Good,
}

/// Parameters of the twisted model: the elliptic curve, the modulus, `π` and `α`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwistParams {
    pub elliptic: EllipticModel,
    pub modulus: Modulus,
    pub pi: Prime,
    #[serde(with = "crate::serde_str")]
    pub alpha: BigInt,
}

impl TwistParams {
    /// The roots `t₁ = α`, `t₂ = α + πb`, `t₃ = α + πc` of the three quadratic factors.
    pub fn radicands(&self) -> [BigInt; 3] {
        let pi = self.pi.big();
        [
            self.alpha.clone(),
            &self.alpha + &pi * self.elliptic.b(),
            &self.alpha + &pi * self.elliptic.c(),
        ]
    }

    pub fn polynomial(&self) -> Poly<Rational> {
        let factors: Vec<Poly<Rational>> = self
            .radicands()
            .iter()
            .map(|t| {
                Poly::new(vec![
                    Rational::from_integer(-t),
                    Rational::zero(),
                    Rational::from_integer(1.into()),
                ])
            })
            .collect();
        let pi3 = Rational::from_integer(self.pi.big().pow(3));
        Poly::product(&factors).scale(&(Rational::from_integer(1.into()) / pi3))
    }

    pub fn model(&self) -> HyperellipticModel {
        HyperellipticModel::new(self.polynomial()).expect("nonzero")
    }

    pub fn classify(&self, v: Place) -> PlaceClass {
        match v {
            Place::Real => PlaceClass::Modulus,
            Place::Finite(p) if p == self.pi => PlaceClass::Pi,
            Place::Finite(p) if self.modulus.divides_by(p.get()) => PlaceClass::Modulus,
            Place::Finite(_) => PlaceClass::Good,
        }
    }

    /// The hypotheses of the valuation argument at `π`.
    pub fn pi_hypotheses(&self) -> Vec<Hypothesis> {
        let pi = self.pi;
        let pib = pi.big();
        let disc = self.elliptic.discriminant();
        let leg = legendre(&self.alpha, pi).unwrap_or(0);
        let v_lc = val(&self.model().leading(), pi.get()).unwrap_or(0);
        vec![
            Hypothesis::new(
                "pi_congruent_one_mod_modulus",
                (&pib - 1u32).mod_floor(&BigInt::from(self.modulus.value())).is_zero()
                    && (!self.modulus.real_condition() || pib.is_positive()),
                format!("{} mod {}", pib, self.modulus.value()),
            ),
            Hypothesis::new(
                "good_reduction_of_elliptic_curve",
                !disc.mod_floor(&pib).is_zero(),
                format!("disc(E) = {disc} mod pi"),
            ),
            Hypothesis::new(
                "alpha_is_unit",
                !self.alpha.mod_floor(&pib).is_zero(),
                format!("alpha = {}", self.alpha),
            ),
            Hypothesis::new(
                "alpha_nonresidue_mod_pi",
                leg == -1,
                format!("legendre(alpha, pi) = {leg}"),
            ),
            Hypothesis::new(
                "odd_scaling_exponent",
                v_lc.is_odd(),
                format!("v_pi(leading coefficient) = {v_lc}"),
            ),
        ]
    }
}

fn good_place(h: &HyperellipticModel, p: Prime) -> Result<PlaceCertificate, LocalError> {
    let place = Place::Finite(p);
    let q = p.get();
    let weil = weil_lower_bound(q);
    require(
        place,
        &[
            Hypothesis::new("residue_field_at_least_17", q >= 17, format!("q = {q}")),
            Hypothesis::new("weil_bound_at_least_2", weil >= 2, format!("bound = {weil}")),
        ],
    )?;
    let scaling = h.minimal_scaling(q);
    let red = reduce_mod_p(h, p, scaling)?;
    let count = count_affine_points(&red.coeffs, q);
    let singular = singular_points(&red.coeffs, q).len() as u64;
    require(
        place,
        &[
            Hypothesis::new("reduction_nonzero", red.reduced, "reduced model is nonzero"),
            Hypothesis::new("at_most_one_singular_point", singular <= 1, format!("{singular} singular")),
        ],
    )?;
    let reduction = ReductionSummary {
        q,
        weil_lower_bound: weil,
        affine_points: count.total,
        smooth_affine_points: count.smooth,
        singular_points: singular,
    };
    if let Some((z0, y0)) = find_smooth_point(&red.coeffs, q) {
        let scaled = h.f().scale(&Rational::from_integer(p.big().pow(2 * scaling)));
        let witness = hensel_lift(&scaled, p, (&z0.into(), &y0.into()), LIFT_PRECISION)?;
        return Ok(PlaceCertificate {
            place,
            verdict: Verdict::PointFound { witness, reduction },
            deficient: false,
        });
    }
    if infinity_rational(h, place)? {
        return Ok(PlaceCertificate {
            place,
            verdict: Verdict::InfinityRational {
                leading_coefficient: format_rational(&h.leading()),
            },
            deficient: false,
        });
    }
    Err(LocalError::NoLocalPoint(place.to_string()))
}

fn pi_place(params: &TwistParams, h: &HyperellipticModel, extra: &[Hypothesis]) -> Result<PlaceCertificate, LocalError> {
    let place = Place::Finite(params.pi);
    let mut hypotheses = params.pi_hypotheses();
    hypotheses.extend_from_slice(extra);
    require(place, &hypotheses)?;
    let decision = qp_points_exist(h.f(), params.pi)?;
    let QpEvidence::Empty(trace) = decision.evidence else {
        return Err(LocalError::CrossCheckFailed(format!(
            "p-adic search found a point at {}",
            params.pi
        )));
    };
    Ok(PlaceCertificate {
        place,
        verdict: Verdict::EmptyByValuation {
            hypotheses,
            odd_degree_extensions: true,
            padic_cross_check: trace,
        },
        deficient: true,
    })
}

/// Certificate at one place. `extra` adds hypotheses to the `π` certificate
/// (used when the model is regarded over an extension in which `π` splits).
pub fn deficiency_at_place(
    params: &TwistParams,
    v: Place,
    extra: &[Hypothesis],
) -> Result<PlaceCertificate, LocalError> {
    let h = params.model();
    match params.classify(v) {
        PlaceClass::Modulus => {
            if !infinity_rational(&h, v)? {
                return Err(LocalError::HypothesisFailed {
                    place: v.to_string(),
                    hypothesis: "infinity_rational".into(),
                    detail: format!("leading coefficient {} is not a local square", h.leading()),
                });
            }
            Ok(PlaceCertificate {
                place: v,
                verdict: Verdict::InfinityRational {
                    leading_coefficient: format_rational(&h.leading()),
                },
                deficient: false,
            })
        }
        PlaceClass::Pi => pi_place(params, &h, extra),
        PlaceClass::Good => {
            let Place::Finite(p) = v else { unreachable!() };
            good_place(&h, p)
        }
    }
}

/// Places above `bound` with `p ∤ π𝔪`, covered by a general argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualClaim {
    pub description: String,
    pub enumerated_up_to: u64,
    pub hypotheses: Vec<Hypothesis>,
}

impl ResidualClaim {
    pub fn for_params(params: &TwistParams, bound: u64) -> Self {
        let small_primes_divide = primes_up_to(16).iter().all(|&p| params.modulus.divides_by(p));
        let bad: Vec<BigInt> = {
            let (b, c) = (params.elliptic.b(), params.elliptic.c());
            vec![b.clone(), c.clone(), b - c]
        };
        let supported = bad.iter().all(|n| {
            let mut n = n.abs().to_u64().unwrap_or(0);
            if n == 0 {
                return false;
            }
            for &(p, _) in params.modulus.factors() {
                while n % p.get() == 0 {
                    n /= p.get();
                }
            }
            n == 1
        });
        ResidualClaim {
            description: format!(
                "every finite place p > {bound} with p not dividing pi*m: the leading coefficient is a \
                 p-adic unit, the values alpha, alpha+pi*b, alpha+pi*c are pairwise distinct mod p, so \
                 the reduction is nonzero with at most one singular point; q >= 17 gives at least \
                 q+1-4*sqrt(q) >= 2 points on the normalization, hence a smooth point, which lifts by \
                 Hensel's lemma"
            ),
            enumerated_up_to: bound,
            hypotheses: vec![
                Hypothesis::new(
                    "primes_below_17_divide_modulus",
                    small_primes_divide,
                    "2, 3, 5, 7, 11, 13 | m",
                ),
                Hypothesis::new(
                    "bad_primes_of_differences_divide_modulus",
                    supported,
                    "every prime of b, c, b - c divides m",
                ),
                Hypothesis::new(
                    "weil_bound_monotone_from_17",
                    weil_lower_bound(17) >= 2,
                    "q + 1 - 4 sqrt(q) is increasing for q >= 4",
                ),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficiencyReport {
    pub model: HyperellipticModel,
    pub certificates: Vec<PlaceCertificate>,
    pub residual_claim: ResidualClaim,
    pub deficient_places: Vec<Place>,
}

impl DeficiencyReport {
    /// Certificates at the real place, every prime of `𝔪`, every good prime up
    /// to `bound`, and `π`.
    pub fn assemble(params: &TwistParams, bound: u64, extra_pi: &[Hypothesis]) -> Result<Self, LocalError> {
        let mut places = vec![Place::Real];
        let mut finite: Vec<u64> = params.modulus.factors().iter().map(|(p, _)| p.get()).collect();
        finite.extend(primes_up_to(bound));
        finite.push(params.pi.get());
        finite.sort_unstable();
        finite.dedup();
        for p in finite {
            places.push(Place::Finite(Prime::new(p)?));
        }
        let certificates = places
            .into_iter()
            .map(|v| deficiency_at_place(params, v, extra_pi))
            .collect::<Result<Vec<_>, _>>()?;
        let residual_claim = ResidualClaim::for_params(params, bound);
        require(Place::Real, &residual_claim.hypotheses)?;
        let deficient_places = certificates
            .iter()
            .filter(|c| c.deficient)
            .map(|c| c.place)
            .collect();
        Ok(DeficiencyReport {
            model: params.model(),
            certificates,
            residual_claim,
            deficient_places,
        })
    }

    pub fn certificate(&self, v: Place) -> Option<&PlaceCertificate> {
        self.certificates.iter().find(|c| c.place == v)
    }
}
