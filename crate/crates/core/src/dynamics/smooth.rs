//! Smooth product wavepackets and the two experiments that only need their
//! single-link moments: the Maxwell–Faraday residual and Coulomb-gauge drift.
//!
//! A link state is a truncated Gaussian in ε with a carrier phase e^{iκε}.
//! The default carrier π puts the conjugate-momentum weight in the middle of
//! A's spectrum, away from the branch cut of its sawtooth eigenvalues.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gausscheck::FluxStencil;
use crate::lattice::{classify_path, LatticeSpec, Path, PathClass};
use crate::ops::field::{local_a, path_increments};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothnessParams {
    /// Standard deviation of |ψ(ε)|² in field quanta.
    pub width: f64,
    /// Carrier phase per quantum.
    pub carrier: f64,
}

impl Default for SmoothnessParams {
    fn default() -> Self {
        SmoothnessParams { width: 1.0, carrier: PI }
    }
}

impl SmoothnessParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.width >= 1.0) {
            return Err(Error::Argument(format!("envelope width {} below one field quantum", self.width)));
        }
        Ok(())
    }

    /// Normalized amplitudes over register values j = ε + Λ.
    pub fn wavepacket(&self, cutoff: usize, center: f64) -> DVector<C64> {
        let lam = cutoff as i64;
        let v = DVector::from_iterator(
            2 * cutoff,
            (-lam..lam).map(|e| {
                let x = e as f64 - center;
                C64::from_polar((-x * x / (4.0 * self.width * self.width)).exp(), self.carrier * e as f64)
            }),
        );
        let n = v.norm();
        v / C64::new(n, 0.0)
    }
}

/// Single-link moments of a state in physical units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkMoments {
    pub mean_e: f64,
    pub mean_a: f64,
    /// ⟨i[E², A]⟩; equals 2⟨E⟩ for canonical E, A.
    pub e2a_commutator: f64,
}

pub fn link_moments(cutoff: usize, e_max: f64, psi: &DVector<C64>) -> LinkMoments {
    let theta = e_max / cutoff as f64;
    let lam = cutoff as i64;
    let e = DMatrix::from_diagonal(&DVector::from_iterator(2 * cutoff, (-lam..lam).map(|x| C64::new(theta * x as f64, 0.0))));
    let a = local_a(cutoff, e_max);
    let e2 = &e * &e;
    let comm = (&e2 * &a - &a * &e2) * C64::new(0.0, 1.0);
    let ev = |m: &DMatrix<C64>| (psi.adjoint() * m * psi)[(0, 0)].re;
    LinkMoments { mean_e: ev(&e), mean_a: ev(&a), e2a_commutator: ev(&comm) }
}

/// Field pattern for the Faraday experiment: every link centred at
/// `background`, plus `loop_amplitude` times its net orientation along the loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopField {
    pub background: f64,
    pub loop_amplitude: f64,
}

impl Default for LoopField {
    fn default() -> Self {
        LoopField { background: 0.0, loop_amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaradayRow {
    pub cutoff: usize,
    /// ⟨i[H, Φ]⟩ with Φ = Σ_loop s·h·A, the flux of the lattice curl through the loop.
    pub flux_rate: f64,
    /// ⟨∮E·dl⟩ = Σ_loop s·h·⟨E⟩.
    pub circulation: f64,
    /// h³/4π, the factor the canonical relation predicts.
    pub kappa: f64,
    pub residual: f64,
}

/// |⟨dΦ/dt⟩ − κ⟨∮E·dl⟩| over a list of cutoffs at fixed envelope.
///
/// The state is a product of link wavepackets evolved for time `t` under
/// H_f1, the only part of a chargeless field Hamiltonian that fails to commute
/// with the A's. E_max is reset to Λh at each cutoff so the field quantum stays h.
pub fn maxwell_faraday_residual(
    spec: &LatticeSpec,
    smooth: &SmoothnessParams,
    lp: &Path,
    field: LoopField,
    cutoffs: &[usize],
    t: f64,
) -> Result<Vec<FaradayRow>> {
    smooth.validate()?;
    if !(spec.dims == 2 || spec.dims == 3) {
        return Err(Error::UnsupportedDimension(format!("Faraday residual needs D=2 or 3, got {}", spec.dims)));
    }
    if classify_path(spec, lp)? != PathClass::ContractibleLoop {
        return Err(Error::Argument("loop must be closed and contractible".into()));
    }
    let inc = path_increments(spec, lp)?;
    let h = spec.h();
    let kappa = h.powi(3) / (4.0 * PI);
    cutoffs
        .iter()
        .map(|&lam| {
            let mut s = spec.clone();
            s.cutoff = lam;
            s.e_max = None;
            s.validate()?;
            let (e_max, theta) = (s.e_max(), s.field_unit());
            let (mut rate, mut circ) = (0.0, 0.0);
            for &k in inc.iter().filter(|&&k| k != 0) {
                let mut psi = smooth.wavepacket(lam, field.background + field.loop_amplitude * k as f64);
                let lam_i = lam as i64;
                for (j, a) in psi.iter_mut().enumerate() {
                    let eps = (j as i64 - lam_i) as f64;
                    *a *= C64::from_polar(1.0, -h.powi(3) / (8.0 * PI) * (theta * eps).powi(2) * t);
                }
                let m = link_moments(lam, e_max, &psi);
                rate += k as f64 * h * h.powi(3) / (8.0 * PI) * m.e2a_commutator;
                circ += k as f64 * h * m.mean_e;
            }
            Ok(FaradayRow { cutoff: lam, flux_rate: rate, circulation: circ, kappa, residual: (rate - kappa * circ).abs() })
        })
        .collect()
}

/// Alternating-width product state for the drift experiment: links whose
/// coordinate along their own axis is even use `even`, odd ones use `odd`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSetup {
    pub even: SmoothnessParams,
    pub odd: SmoothnessParams,
    /// Common centre of every link, in field quanta. The default −½ is the
    /// midpoint of the level window, so ⟨A⟩ vanishes on every link.
    pub center: f64,
}

impl Default for DriftSetup {
    fn default() -> Self {
        DriftSetup {
            even: SmoothnessParams { width: 1.0, carrier: PI },
            odd: SmoothnessParams { width: 1.5, carrier: PI },
            center: -0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftRow {
    pub b: usize,
    pub cutoff: usize,
    /// Σ_q |⟨[H, H_Ac(q)]⟩|.
    pub drift: f64,
    /// max_q |⟨H_Ac(q)⟩|, the Coulomb-gauge condition on the mean.
    pub gauge_mean: f64,
}

/// Exact commutator drift for per-link moments chosen by a parity rule.
pub fn drift_from_moments(spec: &LatticeSpec, b: usize, moments: impl Fn(usize) -> LinkMoments) -> Result<(f64, f64)> {
    let st = FluxStencil::new(spec, b)?;
    let (h, theta) = (spec.h(), spec.field_unit());
    let mut drift = 0.0;
    let mut gauge = 0.0f64;
    for q in 0..spec.n_cells() {
        let (mut c, mut g) = (0.0, 0.0);
        for &(l, w) in st.terms(q) {
            let m = moments(l);
            c += w / theta * m.e2a_commutator;
            g += w / theta * m.mean_a;
        }
        drift += h.powi(3) / (8.0 * PI) * c.abs();
        gauge = gauge.max(g.abs());
    }
    Ok((drift, gauge))
}

/// Σ_q|⟨[H, H_Ac(q)]⟩| with H_Ac(q) = (h²/2)Σ_μΣ_u β_u(A_{q+be_μ+u,μ} − A_{q−(b+1)e_μ+u,μ}).
pub fn gauge_drift(spec: &LatticeSpec, setup: &DriftSetup, bs: &[usize], cutoffs: &[usize]) -> Result<Vec<DriftRow>> {
    setup.even.validate()?;
    setup.odd.validate()?;
    if spec.m_side % 2 != 0 {
        return Err(Error::Argument("alternating widths need an even m_side".into()));
    }
    let mut rows = Vec::new();
    for &lam in cutoffs {
        let mut s = spec.clone();
        s.cutoff = lam;
        s.e_max = None;
        s.validate()?;
        let e_max = s.e_max();
        let even = link_moments(lam, e_max, &setup.even.wavepacket(lam, setup.center));
        let odd = link_moments(lam, e_max, &setup.odd.wavepacket(lam, setup.center));
        for &b in bs {
            let (drift, gauge_mean) = drift_from_moments(&s, b, |l| {
                let link = s.link_at(l);
                if link.site[link.dir] % 2 == 0 {
                    even
                } else {
                    odd
                }
            })?;
            rows.push(DriftRow { b, cutoff: lam, drift, gauge_mean });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec2() -> LatticeSpec {
        LatticeSpec::new(2, 6, 3, 9.0, 2)
    }

    #[test]
    fn wavepacket_is_normalized_and_centered() {
        let p = SmoothnessParams::default();
        let v = p.wavepacket(8, 1.0);
        assert!((v.norm() - 1.0).abs() < 1e-14);
        let m = link_moments(8, 8.0, &v);
        assert!((m.mean_e - 1.0).abs() < 1e-10);
        assert!(SmoothnessParams { width: 0.5, carrier: PI }.validate().is_err());
    }

    #[test]
    fn faraday_uniform_field_is_zero() {
        let s = spec2();
        let lp = Path::unit_square(&s, &[1, 1], 0, 1);
        let rows = maxwell_faraday_residual(&s, &SmoothnessParams::default(), &lp, LoopField { background: 1.0, loop_amplitude: 0.0 }, &[2, 4], 0.0).unwrap();
        for r in rows {
            assert!(r.flux_rate.abs() < 1e-12 && r.circulation.abs() < 1e-12 && r.residual < 1e-12);
        }
    }

    #[test]
    fn faraday_residual_decreases_with_cutoff() {
        let s = spec2();
        let lp = Path::unit_square(&s, &[0, 0], 0, 1);
        let field = LoopField { background: 0.0, loop_amplitude: 1.0 };
        let rows = maxwell_faraday_residual(&s, &SmoothnessParams::default(), &lp, field, &[2, 4, 8], 0.0).unwrap();
        assert!(rows[0].residual > rows[1].residual && rows[1].residual > rows[2].residual);
        assert!(rows[2].circulation.abs() > 1.0);
        let wide = SmoothnessParams { width: 2.0, carrier: PI };
        let r1 = maxwell_faraday_residual(&s, &SmoothnessParams::default(), &lp, field, &[16], 0.0).unwrap()[0].residual;
        let r2 = maxwell_faraday_residual(&s, &wide, &lp, field, &[16], 0.0).unwrap()[0].residual;
        assert!(r2 < r1);
        let moving = maxwell_faraday_residual(&s, &SmoothnessParams::default(), &lp, field, &[2, 4, 8], 0.05).unwrap();
        assert!(moving[0].residual > moving[2].residual);
    }

    #[test]
    fn faraday_rejects_bad_input() {
        let s = spec2();
        let open = Path::walk(&s, &[0, 0], &[(0, 1)]);
        let f = LoopField { background: 0.0, loop_amplitude: 1.0 };
        assert!(maxwell_faraday_residual(&s, &SmoothnessParams::default(), &open, f, &[2], 0.0).is_err());
        let wind = Path::straight_loop(&s, &[0, 0], 0);
        assert!(maxwell_faraday_residual(&s, &SmoothnessParams::default(), &wind, f, &[2], 0.0).is_err());
        let s1 = LatticeSpec::new(1, 6, 3, 3.0, 2);
        let l1 = Path::straight_loop(&s1, &[0], 0);
        assert!(matches!(
            maxwell_faraday_residual(&s1, &SmoothnessParams::default(), &l1, f, &[2], 0.0),
            Err(Error::UnsupportedDimension(_))
        ));
    }

    fn spec3() -> LatticeSpec {
        LatticeSpec::new(3, 6, 6, 216.0, 2)
    }

    #[test]
    fn drift_scales_with_face_area_and_falls_with_cutoff() {
        let s = spec3();
        let rows = gauge_drift(&s, &DriftSetup::default(), &[0, 1, 2], &[2, 4, 8]).unwrap();
        let at = |b: usize, lam: usize| rows.iter().find(|r| r.b == b && r.cutoff == lam).unwrap().drift;
        for lam in [2, 4, 8] {
            let unit = at(0, lam);
            assert!(unit > 0.0);
            for b in [1usize, 2] {
                let ratio = at(b, lam) / unit / ((2 * b + 1) as f64).powi(2);
                assert!((ratio - 1.0).abs() < 1e-8, "b={b} Λ={lam} ratio={ratio}");
            }
        }
        for b in [0, 1, 2] {
            assert!(at(b, 2) > at(b, 4) && at(b, 4) > at(b, 8));
        }
        assert!(rows.iter().all(|r| r.gauge_mean < 1e-12));
    }

    #[test]
    fn a_eigenstates_do_not_drift() {
        let s = spec3();
        let a = local_a(2, s.e_max());
        let eig = a.symmetric_eigen();
        let v: DVector<C64> = eig.eigenvectors.column(1).into_owned();
        let m = link_moments(2, s.e_max(), &v);
        assert!(m.e2a_commutator.abs() < 1e-12);
        let (drift, _) = drift_from_moments(&s, 1, |_| m).unwrap();
        assert!(drift < 1e-10);
        let odd = LatticeSpec::new(3, 5, 5, 125.0, 2);
        assert!(gauge_drift(&odd, &DriftSetup::default(), &[0], &[2]).is_err());
    }
}
