//! Explicit distance bounds for the two Cox models and the coarea check.

pub mod quadrature;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::pointprocess::ModelParams;

pub use quadrature::{
    area_integral, chord_functional_integral, chord_functional_integral_offset,
    chord_iterated_integral, Estimate, Integrand, QuadratureSpec, Rule,
};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: ModelParams,
    /// `None` for the spherical model.
    pub window: Option<Window>,
    pub bound_value: f64,
    pub quadrature_error: f64,
    pub closed_form: Option<f64>,
}

impl BoundReport {
    pub const CSV_HEADER: &'static str = "model,c,scale,window,bound,quadrature_error,closed_form";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{}",
            self.params.model_name(),
            self.params.c(),
            self.params.scale(),
            self.window
                .map_or_else(|| "sphere".to_string(), |w| format!("\"{w}\"")),
            self.bound_value,
            self.quadrature_error,
            self.closed_form
                .map_or_else(String::new, |v| format!("{v:.16e}")),
        )
    }

    /// The closed form, when known, agrees with the quadrature value.
    pub fn consistent(&self) -> bool {
        self.closed_form.is_none_or(|cf| {
            (cf - self.bound_value).abs() <= self.quadrature_error.max(1e-12 * cf.abs())
        })
    }
}

/// `int_0^{2pi} int_0^inf H1(K cap D(r, theta))^2 dr dtheta / pi`.
pub fn chord_square_integral(window: &Window, spec: &QuadratureSpec) -> Result<Estimate> {
    let e = chord_functional_integral(window, |l| l * l, spec)?;
    Ok(Estimate {
        value: e.value / PI,
        error: e.error / PI,
    })
}

/// Closed form of [`chord_square_integral`] where one is known: origin-centered
/// disks give `16 R^3 / 3`.
pub fn chord_square_closed_form(window: &Window) -> Option<f64> {
    match *window {
        Window::Disk { center, radius } if center.x == 0.0 && center.y == 0.0 => {
            Some(16.0 * radius.powi(3) / 3.0)
        }
        _ => None,
    }
}

/// `(c^2 / lambda) * chord_square_integral(K)`.
pub fn cox_bound(
    params: &ModelParams,
    window: &Window,
    spec: &QuadratureSpec,
) -> Result<BoundReport> {
    let ModelParams::CoxLine { c, lambda } = *params else {
        return Err(Error::param("cox_bound needs cox-line parameters"));
    };
    let geo = chord_square_integral(window, spec)?;
    let k = c * c / lambda;
    Ok(BoundReport {
        params: *params,
        window: Some(*window),
        bound_value: k * geo.value,
        quadrature_error: k * geo.error,
        closed_form: chord_square_closed_form(window).map(|g| k * g),
    })
}

/// `2 c^2 / n`.
pub fn satellite_bound(params: &ModelParams) -> Result<BoundReport> {
    let ModelParams::Satellites { c, n } = *params else {
        return Err(Error::param("satellite_bound needs satellite parameters"));
    };
    let v = 2.0 * c * c / n as f64;
    Ok(BoundReport {
        params: *params,
        window: None,
        bound_value: v,
        quadrature_error: 0.0,
        closed_form: Some(v),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoareaReport {
    pub integrand: String,
    pub window: Window,
    pub theta: f64,
    /// Area integral of the integrand over the window.
    pub lhs: f64,
    /// Iterated chord integral over `r >= 0`.
    pub rhs: f64,
    pub ratio: f64,
    /// Combined quadrature error on the ratio.
    pub error: f64,
}

/// Compares `int_A f dx` with `int_{r >= 0} int_{A cap D(r, theta)} f dH1 dr`.
/// The two agree only when `A` lies in the half-plane swept by `r >= 0`, so
/// the ratio is reported rather than asserted.
pub fn coarea_check(
    f: &Integrand,
    window: &Window,
    theta: f64,
    spec: &QuadratureSpec,
) -> Result<CoareaReport> {
    let lhs = area_integral(f, window, spec)?;
    let rhs = chord_iterated_integral(f, window, theta, spec)?;
    let ratio = rhs.value / lhs.value;
    let error = if lhs.value != 0.0 {
        (rhs.error + ratio.abs() * lhs.error) / lhs.value.abs()
    } else {
        f64::INFINITY
    };
    Ok(CoareaReport {
        integrand: f.name(),
        window: *window,
        theta,
        lhs: lhs.value,
        rhs: rhs.value,
        ratio,
        error,
    })
}
