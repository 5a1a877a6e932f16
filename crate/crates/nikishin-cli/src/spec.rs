//! JSON system specifications.

use std::fmt;

use nikishin::measure::{BranchCut, CircleArc, CircleMeasure, Interval, RealMeasure, Sign, WeightKind, WeightSpec};
use nikishin::system::{BuildOptions, CircleSystem, NikishinSystem, RealSystem};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Circle,
}

/// A real number written either as a JSON number or as a decimal string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Num(pub f64);

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct NumVisitor;
        impl Visitor<'_> for NumVisitor {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(Num)
                    .ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
            }
        }
        d.deserialize_any(NumVisitor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightName {
    Uniform,
    Polynomial,
    Cosine,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightField {
    pub kind: WeightName,
    #[serde(default)]
    pub params: Vec<Num>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignField {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    /// `[lo, hi]` on the line, `[alpha, beta]` in radians on the circle.
    pub support: [Num; 2],
    pub weight: WeightField,
    pub sign: SignField,
}

fn default_quad_order() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub kind: Kind,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub branch_t0: Option<Num>,
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    /// Set to assert that brackets stay finite although supports touch.
    #[serde(default)]
    pub touching_ok: bool,
}

/// Parse failure with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "schema error at `{}`: {}", self.path, self.message)
    }
}

impl SystemSpec {
    pub fn parse(text: &str) -> Result<Self, SchemaError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: SystemSpec = serde_path_to_error::deserialize(de).map_err(|e| SchemaError {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        if spec.generators.is_empty() {
            return Err(SchemaError { path: "generators".into(), message: "at least one generator is required".into() });
        }
        if spec.quad_order == 0 {
            return Err(SchemaError { path: "quad_order".into(), message: "must be positive".into() });
        }
        Ok(spec)
    }

    pub fn build(&self) -> nikishin::Result<NikishinSystem> {
        match self.kind {
            Kind::Real => {
                let sigmas = self
                    .generators
                    .iter()
                    .map(|g| RealMeasure::new(Interval::new(g.support[0].0, g.support[1].0)?, g.weight(), self.quad_order))
                    .collect::<nikishin::Result<Vec<_>>>()?;
                let opts = BuildOptions { touching_ok: self.touching_ok, ..BuildOptions::default() };
                Ok(NikishinSystem::Real(RealSystem::build(sigmas, opts)?))
            }
            Kind::Circle => {
                // the system re-brands every generator with its own branch
                let provisional = BranchCut::new(self.branch_t0.map_or(0.0, |t| t.0));
                let sigmas = self
                    .generators
                    .iter()
                    .map(|g| {
                        let arc = CircleArc::new(g.support[0].0, g.support[1].0)?;
                        CircleMeasure::new(arc, g.weight(), self.quad_order, provisional)
                    })
                    .collect::<nikishin::Result<Vec<_>>>()?;
                Ok(NikishinSystem::Circle(CircleSystem::build(sigmas, self.branch_t0.map(|t| t.0))?))
            }
        }
    }
}

impl Generator {
    fn weight(&self) -> WeightSpec {
        let params: Vec<f64> = self.weight.params.iter().map(|p| p.0).collect();
        let kind = match self.weight.kind {
            WeightName::Uniform => WeightKind::Uniform,
            WeightName::Polynomial => WeightKind::Polynomial(params),
            WeightName::Cosine => WeightKind::Cosine(params.first().copied().unwrap_or(1.0)),
            WeightName::Custom => WeightKind::Custom(params),
        };
        let sign = match self.sign {
            SignField::Positive => Sign::Positive,
            SignField::Negative => Sign::Negative,
        };
        WeightSpec::new(kind, sign)
    }
}
