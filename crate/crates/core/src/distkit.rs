//! Value distributions and the single-item auction quantities built on them:
//! virtual values, the Myerson reserve and revenue, the revenue curve and the
//! prophet price.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{bisect_increasing, integrate, maximize_1d};
use crate::scalar::Scalar;

/// Quantile level used as the effective upper end of unbounded supports.
const UNBOUNDED_CAP_SURVIVAL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistKind<S> {
    Uniform {
        lo: S,
        hi: S,
    },
    Exponential {
        rate: S,
    },
    /// Monotone piecewise-linear CDF through `(values[k], cdfs[k])`.
    Tabulated {
        values: Vec<S>,
        cdfs: Vec<S>,
    },
}

/// An atomless value distribution, immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueDistribution<S> {
    pub kind: DistKind<S>,
    pub support_lo: S,
    /// Finite cap for unbounded supports (quantile `1 - 1e-12`).
    pub support_hi: S,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation<S> {
    pub cdf: S,
    pub pdf: S,
}

/// A point on the revenue curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePoint<S> {
    pub q: S,
    pub value: S,
    pub revenue: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityReport<S> {
    pub regular: bool,
    /// Largest observed decrease of the virtual value between grid points.
    pub worst_violation: S,
    pub revenue_concave: bool,
    /// Largest positive second difference of the revenue curve.
    pub worst_concavity_violation: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MyersonRevenue<S> {
    pub n: usize,
    pub revenue: S,
    /// `n * r * (1 - F(r))`.
    pub bound: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProphetPrice<S> {
    pub n: usize,
    pub price: S,
    pub seq_revenue: S,
    pub myerson_revenue: S,
}

impl<S: Scalar> ValueDistribution<S> {
    pub fn uniform(lo: S, hi: S) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidDistribution(format!(
                "uniform requires lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Self {
            kind: DistKind::Uniform { lo, hi },
            support_lo: lo,
            support_hi: hi,
            name: format!("uniform({lo},{hi})"),
        })
    }

    pub fn exponential(rate: S) -> Result<Self> {
        if !(rate.is_finite() && rate > S::zero()) {
            return Err(Error::InvalidDistribution(format!(
                "exponential rate must be positive, got {rate}"
            )));
        }
        let cap = -S::lit(UNBOUNDED_CAP_SURVIVAL).ln() / rate;
        Ok(Self {
            kind: DistKind::Exponential { rate },
            support_lo: S::zero(),
            support_hi: cap,
            name: format!("exp({rate})"),
        })
    }

    /// Builds a tabulated distribution from `(value, cdf)` knots. Values must
    /// be strictly increasing, CDF values nondecreasing from 0 to 1.
    pub fn tabulated(points: &[(S, S)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidDistribution(
                "tabulated CDF needs at least two points".into(),
            ));
        }
        let snap = S::tol(1e-9);
        let mut values = Vec::with_capacity(points.len());
        let mut cdfs = Vec::with_capacity(points.len());
        for (k, &(v, c)) in points.iter().enumerate() {
            if !v.is_finite() || !c.is_finite() {
                return Err(Error::InvalidDistribution(format!("non-finite knot at index {k}")));
            }
            if c < -snap || c > S::one() + snap {
                return Err(Error::InvalidDistribution(format!(
                    "cdf {c} outside [0,1] at index {k}"
                )));
            }
            if k > 0 {
                if v <= values[k - 1] {
                    return Err(Error::InvalidDistribution(format!(
                        "values must be strictly increasing (index {k})"
                    )));
                }
                if c < cdfs[k - 1] {
                    return Err(Error::InvalidDistribution(format!("cdf decreases at index {k}")));
                }
            }
            values.push(v);
            cdfs.push(c.max(S::zero()).min(S::one()));
        }
        let last = cdfs.len() - 1;
        if cdfs[0] > snap || cdfs[last] < S::one() - snap {
            return Err(Error::InvalidDistribution("cdf must start at 0 and end at 1".into()));
        }
        cdfs[0] = S::zero();
        cdfs[last] = S::one();
        let lo = values[0];
        let hi = values[last];
        Ok(Self {
            kind: DistKind::Tabulated { values, cdfs },
            support_lo: lo,
            support_hi: hi,
            name: "table".into(),
        })
    }

    /// Loads `value,cdf` rows from CSV; a non-numeric first row is a header.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let mut dist = Self::from_csv_str(&text)?;
        dist.name = format!("table({})", path.as_ref().display());
        Ok(dist)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut points = Vec::new();
        for (idx, rec) in reader.records().enumerate() {
            let line = idx + 1;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 fields, got {}", rec.len()),
                });
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(v), Ok(c)) => points.push((S::lit(v), S::lit(c))),
                _ if idx == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: "non-numeric field".into(),
                    })
                }
            }
        }
        Self::tabulated(&points)
    }

    fn unbounded(&self) -> bool {
        matches!(self.kind, DistKind::Exponential { .. })
    }

    pub fn cdf(&self, x: S) -> S {
        match &self.kind {
            DistKind::Uniform { lo, hi } => ((x - *lo) / (*hi - *lo)).max(S::zero()).min(S::one()),
            DistKind::Exponential { rate } => {
                if x <= S::zero() {
                    S::zero()
                } else {
                    -(-*rate * x).exp_m1()
                }
            }
            DistKind::Tabulated { values, cdfs } => {
                let (k, t) = match locate(values, x) {
                    Locate::Below => return S::zero(),
                    Locate::Above => return S::one(),
                    Locate::In(k, t) => (k, t),
                };
                cdfs[k] + (cdfs[k + 1] - cdfs[k]) * t
            }
        }
    }

    /// `1 - F(x)`, computed without cancellation where possible.
    pub fn survival(&self, x: S) -> S {
        match &self.kind {
            DistKind::Exponential { rate } => {
                if x <= S::zero() {
                    S::one()
                } else {
                    (-*rate * x).exp()
                }
            }
            DistKind::Uniform { lo, hi } => ((*hi - x) / (*hi - *lo)).max(S::zero()).min(S::one()),
            DistKind::Tabulated { .. } => S::one() - self.cdf(x),
        }
    }

    /// `ln F(x)`, accurate when `F(x)` is close to one.
    pub fn ln_cdf(&self, x: S) -> S {
        match &self.kind {
            DistKind::Exponential { rate } if x > S::zero() => (-(-*rate * x).exp()).ln_1p(),
            _ => self.cdf(x).ln(),
        }
    }

    pub fn pdf(&self, x: S) -> S {
        match &self.kind {
            DistKind::Uniform { lo, hi } => {
                if x < *lo || x > *hi {
                    S::zero()
                } else {
                    S::one() / (*hi - *lo)
                }
            }
            DistKind::Exponential { rate } => {
                if x < S::zero() {
                    S::zero()
                } else {
                    *rate * (-*rate * x).exp()
                }
            }
            DistKind::Tabulated { values, cdfs } => {
                let last = values.len() - 1;
                if x < values[0] || x > values[last] {
                    return S::zero();
                }
                // Right-hand slope, except at the final knot.
                let k = match values.partition_point(|&v| v <= x) {
                    0 => 0,
                    p if p > last => last - 1,
                    p => p - 1,
                };
                (cdfs[k + 1] - cdfs[k]) / (values[k + 1] - values[k])
            }
        }
    }

    pub fn evaluate(&self, x: S) -> Evaluation<S> {
        Evaluation {
            cdf: self.cdf(x),
            pdf: self.pdf(x),
        }
    }

    /// Minimal preimage `min { p : F(p) = q }`.
    pub fn quantile(&self, q: S) -> Result<S> {
        if !(q >= S::zero() && q <= S::one()) {
            return Err(Error::Domain(format!("quantile level {q} outside [0,1]")));
        }
        Ok(match &self.kind {
            DistKind::Uniform { lo, hi } => *lo + q * (*hi - *lo),
            DistKind::Exponential { rate } => {
                if q >= S::one() - S::lit(UNBOUNDED_CAP_SURVIVAL) {
                    self.support_hi
                } else {
                    -(-q).ln_1p() / *rate
                }
            }
            DistKind::Tabulated { .. } => {
                if q <= S::zero() {
                    self.support_lo
                } else {
                    bisect_increasing(self.support_lo, self.support_hi, S::tol(1e-12), |x| self.cdf(x) - q)
                }
            }
        })
    }

    /// `phi(x) = x - (1 - F(x)) / f(x)`.
    pub fn virtual_value(&self, x: S) -> Result<S> {
        let inside = x > self.support_lo && (self.unbounded() || x < self.support_hi);
        if !inside {
            return Err(Error::Domain(format!(
                "virtual value requested outside support interior at x = {x}"
            )));
        }
        if let DistKind::Exponential { rate } = self.kind {
            return Ok(x - S::one() / rate);
        }
        let f = self.pdf(x);
        if f <= S::zero() {
            return Err(Error::Singularity { x: x.as_f64() });
        }
        Ok(x - self.survival(x) / f)
    }

    pub fn revenue_curve(&self, q: S) -> Result<QuantilePoint<S>> {
        if !(q >= S::zero() && q <= S::one()) {
            return Err(Error::Domain(format!("sale probability {q} outside [0,1]")));
        }
        let value = self.quantile(S::one() - q)?;
        Ok(QuantilePoint {
            q,
            value,
            revenue: q * value,
        })
    }

    /// Checks monotonicity of the virtual value on an equally spaced quantile
    /// grid and concavity of the revenue curve.
    pub fn check_regularity(&self, grid_size: usize) -> Result<RegularityReport<S>> {
        if grid_size < 2 {
            return Err(Error::Domain("grid_size must be at least 2".into()));
        }
        let mut worst = S::zero();
        let mut prev: Option<S> = None;
        for k in 0..grid_size {
            let u = (S::count(k) + S::lit(0.5)) / S::count(grid_size);
            let x = self.quantile(u)?;
            let phi = match self.virtual_value(x) {
                Ok(v) => v,
                Err(Error::Singularity { .. }) | Err(Error::Domain(_)) => continue,
                Err(e) => return Err(e),
            };
            if let Some(p) = prev {
                worst = worst.max(p - phi);
            }
            prev = Some(phi);
        }
        let mut worst_conc = S::zero();
        let curve: Vec<S> = (0..=grid_size)
            .map(|k| self.revenue_curve(S::count(k) / S::count(grid_size)).map(|p| p.revenue))
            .collect::<Result<_>>()?;
        for w in curve.windows(3) {
            worst_conc = worst_conc.max(w[0] - S::lit(2.0) * w[1] + w[2]);
        }
        Ok(RegularityReport {
            regular: worst <= S::tol(1e-9),
            worst_violation: worst,
            revenue_concave: worst_conc <= S::tol(1e-6),
            worst_concavity_violation: worst_conc,
        })
    }

    fn is_builtin(&self) -> bool {
        !matches!(self.kind, DistKind::Tabulated { .. })
    }

    fn require_regular(&self) -> Result<()> {
        if self.is_builtin() {
            return Ok(());
        }
        let report = self.check_regularity(1024)?;
        if report.regular {
            Ok(())
        } else {
            Err(Error::NotRegular {
                worst_violation: report.worst_violation.as_f64(),
            })
        }
    }

    /// Root of the virtual value, `r = phi^{-1}(0)`.
    pub fn myerson_reserve(&self) -> Result<S> {
        self.require_regular()?;
        match &self.kind {
            DistKind::Uniform { lo, hi } => {
                // phi(x) = 2x - hi
                let r = *hi * S::lit(0.5);
                if r > *lo && r < *hi {
                    Ok(r)
                } else {
                    Err(Error::NoReserve)
                }
            }
            DistKind::Exponential { rate } => Ok(S::one() / *rate),
            DistKind::Tabulated { .. } => {
                let lo = self.support_lo;
                let hi = self.support_hi;
                // Interior probe points close to each end of the support.
                let eps = (hi - lo) * S::tol(1e-12);
                let phi_lo = self.virtual_value(lo + eps).ok();
                let phi_hi = self.virtual_value(hi - eps).ok();
                match (phi_lo, phi_hi) {
                    (Some(a), Some(b)) if a <= S::zero() && b >= S::zero() => {}
                    _ => return Err(Error::NoReserve),
                }
                Ok(bisect_increasing(lo, hi, S::tol(1e-12), |x| {
                    if x <= lo {
                        return -S::one();
                    }
                    if x >= hi {
                        return S::one();
                    }
                    self.virtual_value(x).unwrap_or(-S::one())
                }))
            }
        }
    }

    /// `E[max_i phi(v_i)^+]` for `n` i.i.d. bidders, by quadrature of
    /// `phi(v) * n F(v)^{n-1} f(v)` over `[r, hi]`.
    pub fn myerson_revenue_n(&self, n: usize) -> Result<MyersonRevenue<S>> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        self.require_regular()?;
        let r = self.myerson_reserve()?;
        let nn = S::count(n);
        // phi(v) f(v) = v f(v) - (1 - F(v)) avoids dividing by the density.
        let integrand = |v: S| {
            let f = self.pdf(v);
            let head = if n == 1 {
                S::one()
            } else {
                nn * (self.ln_cdf(v) * S::count(n - 1)).exp()
            };
            head * (v * f - self.survival(v))
        };
        let scale = r * self.survival(r) * nn;
        let eps = S::tol(1e-13) * scale.max(S::tol(1e-300));
        let mut breaks = vec![r];
        if let DistKind::Tabulated { values, .. } = &self.kind {
            breaks.extend(values.iter().copied().filter(|&v| v > r && v < self.support_hi));
        }
        breaks.push(self.support_hi);
        let mut revenue: S = breaks.windows(2).map(|w| integrate(w[0], w[1], eps, &integrand)).sum();
        if self.unbounded() {
            // Beyond the cap, int_c^inf (v f - S) dv = c S(c) and F^{n-1} ~ F(c)^{n-1}.
            let c = self.support_hi;
            let head = (self.ln_cdf(c) * S::count(n - 1)).exp();
            revenue = revenue + nn * head * c * self.survival(c);
        }
        Ok(MyersonRevenue {
            n,
            revenue,
            bound: scale,
        })
    }

    /// Uniform sequential price maximising `T (1 - F(T)^n)`.
    pub fn prophet_price(&self, n: usize) -> Result<ProphetPrice<S>> {
        if n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        let objective = |t: S| t * (S::one() - (self.ln_cdf(t) * S::count(n)).exp());
        let (price, seq_revenue) = maximize_1d(self.support_lo, self.support_hi, 4000, S::tol(1e-10), objective);
        let myerson = self.myerson_revenue_n(n)?.revenue;
        let slack = S::tol(1e-9) * myerson.abs().max(S::one());
        if seq_revenue < S::lit(0.5) * myerson - slack {
            return Err(Error::Internal(format!(
                "prophet price revenue {seq_revenue} below half of Myerson revenue {myerson}"
            )));
        }
        Ok(ProphetPrice {
            n,
            price,
            seq_revenue,
            myerson_revenue: myerson,
        })
    }
}

enum Locate<S> {
    Below,
    Above,
    In(usize, S),
}

fn locate<S: Scalar>(values: &[S], x: S) -> Locate<S> {
    let last = values.len() - 1;
    if x <= values[0] {
        return Locate::Below;
    }
    if x >= values[last] {
        return Locate::Above;
    }
    let k = values.partition_point(|&v| v <= x) - 1;
    Locate::In(k, (x - values[k]) / (values[k + 1] - values[k]))
}

impl<S: Scalar> fmt::Display for ValueDistribution<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// Parses `uniform:lo,hi`, `exp:rate` or `table:path`.
impl<S: Scalar> FromStr for ValueDistribution<S> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').ok_or_else(|| Error::Parse {
            line: 1,
            message: format!("distribution spec '{s}' lacks ':'"),
        })?;
        let num = |t: &str| -> Result<S> {
            t.trim().parse::<f64>().map(S::lit).map_err(|e| Error::Parse {
                line: 1,
                message: format!("bad number '{t}': {e}"),
            })
        };
        match kind.trim() {
            "uniform" | "u" => {
                let (lo, hi) = args.split_once(',').ok_or_else(|| Error::Parse {
                    line: 1,
                    message: "uniform needs lo,hi".into(),
                })?;
                Self::uniform(num(lo)?, num(hi)?)
            }
            "exp" | "exponential" => Self::exponential(num(args)?),
            "table" => Self::from_csv_path(args.trim()),
            other => Err(Error::Parse {
                line: 1,
                message: format!("unknown distribution kind '{other}'"),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = ValueDistribution<f64>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn evaluate_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let e = D::exponential(1.0).unwrap();
        assert_eq!(u.evaluate(0.3), Evaluation { cdf: 0.3, pdf: 1.0 });
        assert_eq!(e.evaluate(0.0), Evaluation { cdf: 0.0, pdf: 1.0 });
        assert_eq!(u.evaluate(2.5).cdf, 1.0);
        assert_eq!(u.evaluate(-1.0).cdf, 0.0);
    }

    #[test]
    fn quantile_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let e = D::exponential(1.0).unwrap();
        assert_eq!(u.quantile(0.75).unwrap(), 0.75);
        assert!(close(e.quantile(0.8).unwrap(), 5f64.ln(), 1e-12));
        assert_eq!(u.quantile(0.0).unwrap(), 0.0);
        assert!(matches!(u.quantile(1.5), Err(Error::Domain(_))));
        assert!(matches!(u.quantile(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn virtual_value_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let e = D::exponential(1.0).unwrap();
        assert!(close(u.virtual_value(0.75).unwrap(), 0.5, 1e-15));
        assert!(close(e.virtual_value(1.0).unwrap(), 0.0, 1e-15));
        assert!(close(u.virtual_value(0.5).unwrap(), 0.0, 1e-15));
    }

    #[test]
    fn virtual_value_singular_on_flat_segment() {
        let t = D::tabulated(&[(0.0, 0.0), (1.0, 0.5), (2.0, 0.5), (3.0, 1.0)]).unwrap();
        match t.virtual_value(1.5) {
            Err(Error::Singularity { x }) => assert_eq!(x, 1.5),
            other => panic!("expected singularity, got {other:?}"),
        }
    }

    #[test]
    fn reserve_examples() {
        assert_eq!(D::uniform(0.0, 1.0).unwrap().myerson_reserve().unwrap(), 0.5);
        assert_eq!(D::exponential(1.0).unwrap().myerson_reserve().unwrap(), 1.0);
        assert_eq!(D::uniform(0.0, 2.0).unwrap().myerson_reserve().unwrap(), 1.0);
        assert!(matches!(
            D::uniform(3.0, 4.0).unwrap().myerson_reserve(),
            Err(Error::NoReserve)
        ));
    }

    #[test]
    fn tabulated_reserve_matches_uniform() {
        let pts: Vec<(f64, f64)> = (0..=10).map(|k| (k as f64 / 10.0, k as f64 / 10.0)).collect();
        let t = D::tabulated(&pts).unwrap();
        assert!(close(t.myerson_reserve().unwrap(), 0.5, 1e-11));
    }

    #[test]
    fn revenue_curve_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let e = D::exponential(1.0).unwrap();
        assert!(close(u.revenue_curve(0.5).unwrap().revenue, 0.25, 1e-15));
        assert_eq!(u.revenue_curve(1.0).unwrap().revenue, 0.0);
        let q = (-1.0f64).exp();
        let p = e.revenue_curve(q).unwrap();
        assert!(close(p.revenue, q, 1e-12));
        assert_eq!(p.revenue, p.q * p.value);
    }

    #[test]
    fn regularity_examples() {
        assert!(D::uniform(0.0, 1.0).unwrap().check_regularity(200).unwrap().regular);
        assert!(D::exponential(1.0).unwrap().check_regularity(200).unwrap().regular);
        assert!(matches!(
            D::uniform(0.0, 1.0).unwrap().check_regularity(1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn two_piece_cdf_is_irregular() {
        // Steep then shallow: phi jumps down at the kink.
        let t = D::tabulated(&[(0.0, 0.0), (0.5, 0.8), (1.0, 1.0)]).unwrap();
        // Finite-difference oracle on both sides of the kink.
        let h = 1e-6;
        let phi_fd = |x: f64| {
            let f = (t.cdf(x + h) - t.cdf(x - h)) / (2.0 * h);
            x - (1.0 - t.cdf(x)) / f
        };
        assert!(phi_fd(0.49) > phi_fd(0.51) + 0.3);
        let rep = t.check_regularity(100).unwrap();
        assert!(!rep.regular);
        assert!(rep.worst_violation > 0.3);
        assert!(matches!(t.myerson_revenue_n(2), Err(Error::NotRegular { .. })));
    }

    #[test]
    fn myerson_revenue_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let one = u.myerson_revenue_n(1).unwrap();
        assert!(close(one.revenue, 0.25, 1e-10));
        let two = u.myerson_revenue_n(2).unwrap();
        // Closed form: int_{1/2}^1 (2v - 1) 2v dv = 5/12.
        assert!(close(two.revenue, 5.0 / 12.0, 1e-10));
        assert!(two.revenue <= two.bound);
        assert!(close(two.bound, 0.5, 1e-15));
    }

    #[test]
    fn prophet_examples() {
        let u = D::uniform(0.0, 1.0).unwrap();
        let p1 = u.prophet_price(1).unwrap();
        assert!(close(p1.price, 0.5, 1e-7));
        assert!(close(p1.seq_revenue, 0.25, 1e-12));
        let p2 = u.prophet_price(2).unwrap();
        assert!(close(p2.price, 1.0 / 3f64.sqrt(), 1e-7));
        assert!(close(p2.seq_revenue, 2.0 / (3.0 * 3f64.sqrt()), 1e-12));
        let e = D::exponential(1.0).unwrap();
        let p5 = e.prophet_price(5).unwrap();
        assert!(p5.seq_revenue >= 0.5 * p5.myerson_revenue);
    }

    #[test]
    fn parses_specs() {
        let u: D = "uniform:0,1".parse().unwrap();
        assert_eq!(u.support_hi, 1.0);
        let e: D = "exp:2".parse().unwrap();
        assert!(matches!(e.kind, DistKind::Exponential { rate } if rate == 2.0));
        assert!("weird:1".parse::<D>().is_err());
        assert!("uniform:1".parse::<D>().is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = D::from_csv_str("value,cdf\n0,0\n0.5,0.5\n1,1\n").unwrap();
        let b = D::from_csv_str("0,0\n0.5,0.5\n1,1\n").unwrap();
        assert_eq!(a.kind, b.kind);
        assert!(D::from_csv_str("0,0\n1,0.5\n0.5,1\n").is_err());
        assert!(D::from_csv_str("0,0\n1,0.7\n2,0.6\n3,1\n").is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let u = ValueDistribution::<f32>::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.myerson_reserve().unwrap(), 0.5);
        let m = u.myerson_revenue_n(2).unwrap().revenue;
        assert!((m - 5.0 / 12.0).abs() < 1e-5);
    }
}
