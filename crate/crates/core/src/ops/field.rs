//! Single-link field operators and their embeddings.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::space::Space;
use super::sparse::{SparseOperator, SparseVec};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, LinkId, Path};
use crate::C64;

/// Unitary DFT of size d: F_{jk} = ω^{−jk}/√d with ω = e^{2πi/d}.
pub fn dft(d: usize) -> DMatrix<C64> {
    let s = 1.0 / (d as f64).sqrt();
    DMatrix::from_fn(d, d, |j, k| C64::from_polar(s, -2.0 * PI * ((j * k) % d) as f64 / d as f64))
}

/// diag(ε·E_max/Λ), ε ∈ [−Λ, Λ−1].
pub fn local_e(cutoff: usize, e_max: f64) -> Vec<f64> {
    let lam = cutoff as i64;
    (-lam..lam).map(|e| e as f64 * e_max / cutoff as f64).collect()
}

/// Cyclic raise |ε⟩ → |ε+1⟩.
pub fn local_u(cutoff: usize) -> DMatrix<C64> {
    let d = 2 * cutoff;
    DMatrix::from_fn(d, d, |r, c| if r == (c + 1) % d { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
}

/// A = F·diag(πj/E_max)·F†.
pub fn local_a(cutoff: usize, e_max: f64) -> DMatrix<C64> {
    let d = 2 * cutoff;
    let f = dft(d);
    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(d, |j, _| C64::new(PI * j as f64 / e_max, 0.0)));
    &f * diag * f.adjoint()
}

/// Embeds a single-link matrix on link `l` of the space.
pub fn embed_link(space: &Space, l: usize, m: &DMatrix<C64>) -> SparseOperator {
    let reg = space.link_reg(l);
    let tol = 1e-15 * m.iter().map(|v| v.norm()).fold(0.0, f64::max);
    SparseOperator::from_rows(space.dim(), |r| {
        let j = space.digit(r, reg);
        (0..m.ncols())
            .filter(|&k| m[(j, k)].norm() > tol)
            .map(|k| (space.with_digit(r, reg, k), m[(j, k)]))
            .collect()
    })
}

/// `A_l` applied to basis vector `col`, appended to `out` with weight `w`.
pub(crate) fn push_a_column(space: &Space, a: &DMatrix<C64>, l: usize, col: usize, w: C64, out: &mut SparseVec) {
    let reg = space.link_reg(l);
    let j = space.digit(col, reg);
    for k in 0..a.nrows() {
        out.push((space.with_digit(col, reg, k), w * a[(k, j)]));
    }
}

fn link_idx(space: &Space, link: &LinkId) -> Result<usize> {
    space.spec.check_cell(&link.site)?;
    if link.dir >= space.spec.dims {
        return Err(Error::Range(format!("direction {} ≥ D", link.dir)));
    }
    Ok(space.spec.link_index(link))
}

pub fn op_e(space: &Space, link: &LinkId) -> Result<SparseOperator> {
    let l = link_idx(space, link)?;
    let unit = space.spec.field_unit();
    let d: Vec<f64> = (0..space.dim()).map(|r| space.link_level(r, l) as f64 * unit).collect();
    Ok(SparseOperator::diagonal(&d))
}

pub fn op_e_sq(space: &Space, link: &LinkId) -> Result<SparseOperator> {
    let l = link_idx(space, link)?;
    let unit = space.spec.field_unit();
    let d: Vec<f64> = (0..space.dim())
        .map(|r| {
            let e = space.link_level(r, l) as f64 * unit;
            e * e
        })
        .collect();
    Ok(SparseOperator::diagonal(&d))
}

pub fn op_u(space: &Space, link: &LinkId) -> Result<SparseOperator> {
    let l = link_idx(space, link)?;
    Ok(embed_link(space, l, &local_u(space.spec.cutoff)))
}

pub fn op_a(space: &Space, link: &LinkId) -> Result<SparseOperator> {
    let l = link_idx(space, link)?;
    let mut op = embed_link(space, l, &local_a(space.spec.cutoff, space.spec.e_max()));
    op.hermitian = true;
    Ok(op)
}

/// In-plane axes (α, β) for plaquette normal ν, with (ν, α, β) cyclic.
pub fn plaquette_axes(dims: usize, nu: usize) -> Result<(usize, usize)> {
    match dims {
        2 => Ok((0, 1)),
        3 if nu < 3 => Ok(((nu + 1) % 3, (nu + 2) % 3)),
        3 => Err(Error::Range(format!("direction {nu} ≥ 3"))),
        _ => Err(Error::UnsupportedDimension(format!("plaquette operator needs D ≥ 2, got {dims}"))),
    }
}

/// Signed links of E^□_{p,ν}: the circulation around the 2×2 block of cells
/// centred on `p` in the plane normal to ν (counter-clockwise in (α, β)).
pub fn plaquette_terms(spec: &LatticeSpec, p: &[usize], nu: usize) -> Result<Vec<(usize, f64)>> {
    let (al, be) = plaquette_axes(spec.dims, nu)?;
    spec.check_cell(p)?;
    let at = |da: i64, db: i64, dir: usize| {
        let s = crate::lattice::shift_site(p, al, da, spec.m_side);
        let s = crate::lattice::shift_site(&s, be, db, spec.m_side);
        dir * spec.n_cells() + spec.cell_index(&s)
    };
    Ok(vec![
        (at(1, -1, be), 1.0),
        (at(1, 0, be), 1.0),
        (at(-1, -1, be), -1.0),
        (at(-1, 0, be), -1.0),
        (at(-1, 1, al), -1.0),
        (at(0, 1, al), -1.0),
        (at(-1, -1, al), 1.0),
        (at(0, -1, al), 1.0),
    ])
}

/// The closed 8-step loop whose unit increments shift E^□_{p,ν} by 8 field units.
pub fn plaquette_loop(spec: &LatticeSpec, p: &[usize], nu: usize) -> Result<Path> {
    let (al, be) = plaquette_axes(spec.dims, nu)?;
    let start = crate::lattice::shift_site(&crate::lattice::shift_site(p, al, -1, spec.m_side), be, -1, spec.m_side);
    Ok(Path::walk(
        spec,
        &start,
        &[(al, 1), (al, 1), (be, 1), (be, 1), (al, -1), (al, -1), (be, -1), (be, -1)],
    ))
}

pub fn op_plaquette(space: &Space, p: &[usize], nu: usize) -> Result<SparseOperator> {
    let terms = plaquette_terms(&space.spec, p, nu)?;
    let unit = space.spec.field_unit();
    let d: Vec<f64> = (0..space.dim())
        .map(|r| terms.iter().map(|&(l, s)| s * space.link_level(r, l) as f64).sum::<f64>() * unit)
        .collect();
    Ok(SparseOperator::diagonal(&d))
}

/// Net register increment per dense link index for a path (Σ m_i s_i).
pub fn path_increments(spec: &LatticeSpec, path: &Path) -> Result<Vec<i64>> {
    if path.multiplicity.len() != path.steps.len() {
        return Err(Error::Structural("multiplicity length differs from step count".into()));
    }
    let mut inc = vec![0i64; spec.n_links()];
    for (st, &m) in path.steps.iter().zip(&path.multiplicity) {
        spec.check_cell(&st.link.site)?;
        inc[spec.link_index(&st.link)] += m as i64 * st.orientation as i64;
    }
    Ok(inc)
}

/// Index of `F_{P;m⃗}|idx⟩` (a permutation of basis states).
pub fn shifted_index(space: &Space, inc: &[i64], idx: usize) -> usize {
    let d = space.spec.link_dim() as i64;
    let mut out = idx;
    for (l, &k) in inc.iter().enumerate() {
        if k != 0 {
            let reg = space.link_reg(l);
            let j = space.digit(out, reg) as i64;
            out = space.with_digit(out, reg, (j + k).rem_euclid(d) as usize);
        }
    }
    out
}

/// True if applying the increments to basis state `idx` wraps some link
/// around the cutoff (where U^{2Λ} = 1 breaks the lattice divergence).
pub fn shift_wraps(space: &Space, inc: &[i64], idx: usize) -> bool {
    let lam = space.spec.cutoff as i64;
    inc.iter().enumerate().any(|(l, &k)| {
        let e = space.link_level(idx, l) + k;
        k != 0 && (e < -lam || e >= lam)
    })
}

/// F_{P;m⃗} = Π U^{m_i s_i}.
pub fn path_operator(space: &Space, path: &Path) -> Result<SparseOperator> {
    let inc = path_increments(&space.spec, path)?;
    Ok(SparseOperator::from_columns(space.dim(), |c| vec![(shifted_index(space, &inc, c), C64::new(1.0, 0.0))]))
}

/// Dense exp(iX) of a Hermitian matrix via eigendecomposition.
pub fn expm_i_hermitian(m: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let ph = nalgebra::DVector::from_fn(eig.eigenvalues.len(), |k, _| C64::from_polar(1.0, t * eig.eigenvalues[k]));
    &eig.eigenvectors * DMatrix::from_diagonal(&ph) * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gausscheck;
    use crate::lattice::classify_path;
    use crate::lattice::PathClass;
    use crate::ops::sparse::dense_max_diff;

    fn spec1(m: usize, lam: usize, e_max: f64) -> LatticeSpec {
        let mut s = LatticeSpec::new(1, 3 * m, m, m as f64, lam);
        s.e_max = Some(e_max);
        s
    }

    #[test]
    fn e_eigenvalues() {
        let sp = Space::field_only(&spec1(1, 1, 1.0)).unwrap();
        let e = op_e(&sp, &LinkId::new(&[0], 0)).unwrap();
        assert_eq!(e.to_dense(), DMatrix::from_diagonal(&nalgebra::dvector![C64::new(-1.0, 0.0), C64::new(0.0, 0.0)]));
        let sp = Space::field_only(&spec1(1, 2, 2.0)).unwrap();
        let e = op_e(&sp, &LinkId::new(&[0], 0)).unwrap();
        let d: Vec<f64> = e.diag().iter().map(|v| v.re).collect();
        assert_eq!(d, vec![-2.0, -1.0, 0.0, 1.0]);
        let e2 = op_e_sq(&sp, &LinkId::new(&[0], 0)).unwrap();
        assert_eq!(e2.max_diff(&e.mul(&e).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn u_is_cyclic_shift() {
        let x = local_u(1);
        assert_eq!(x[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(x[(1, 0)], C64::new(1.0, 0.0));
        for lam in [1, 2, 4] {
            let u = local_u(lam);
            let mut p = DMatrix::identity(2 * lam, 2 * lam);
            for _ in 0..2 * lam {
                p = &u * p;
            }
            assert!(dense_max_diff(&p, &DMatrix::identity(2 * lam, 2 * lam)) == 0.0);
            assert!(dense_max_diff(&(&u * u.adjoint()), &DMatrix::identity(2 * lam, 2 * lam)) == 0.0);
        }
    }

    #[test]
    fn exp_a_is_u() {
        for lam in [1usize, 2, 4, 8] {
            for e_max in [1.0, lam as f64, 3.7] {
                let a = local_a(lam, e_max);
                let u = expm_i_hermitian(&a, e_max / lam as f64);
                assert!(dense_max_diff(&u, &local_u(lam)) < 1e-10, "Λ={lam}");
            }
        }
    }

    #[test]
    fn a_examples() {
        let a = local_a(1, 1.0);
        let want = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]).map(|v| C64::new(v * PI / 2.0, 0.0));
        assert!(dense_max_diff(&a, &want) < 1e-14);
        let mut ev: Vec<f64> = local_a(2, 1.0).symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        for (k, v) in ev.iter().enumerate() {
            assert!((v - PI * k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn plaquette_uniform_and_loop() {
        let mut spec = LatticeSpec::new(2, 3, 3, 9.0, 1);
        spec.e_max = Some(2.0);
        let sp = Space::field_only(&spec).unwrap();
        let p = [1, 1];
        let e = op_plaquette(&sp, &p, 2).unwrap();
        assert!(e.hermitian_error() == 0.0);
        let uniform = sp.field_index(&vec![-1; spec.n_links()]).unwrap();
        assert_eq!(e.get(uniform, uniform), C64::new(0.0, 0.0));
        let lp = plaquette_loop(&spec, &p, 2).unwrap();
        assert_eq!(classify_path(&spec, &lp).unwrap(), PathClass::ContractibleLoop);
    }

    #[test]
    fn plaquette_loop_shifts_by_eight_units() {
        // Evaluated on level vectors directly so a roomy cutoff fits in memory.
        for (dims, nu) in [(2usize, 2usize), (3, 0), (3, 1), (3, 2)] {
            let mut spec = LatticeSpec::new(dims, 4, 4, 4f64.powi(dims as i32), 4);
            spec.e_max = Some(8.0);
            let p = vec![2; dims];
            let terms = plaquette_terms(&spec, &p, nu).unwrap();
            let value = |levels: &[i64]| terms.iter().map(|&(l, s)| s * levels[l] as f64).sum::<f64>() * spec.field_unit();
            let lp = plaquette_loop(&spec, &p, nu).unwrap();
            assert_eq!(value(&path_increments(&spec, &lp).unwrap()), 8.0 * spec.field_unit());
            assert_eq!(value(&path_increments(&spec, &lp.reversed()).unwrap()), -8.0 * spec.field_unit());
        }
    }

    #[test]
    fn plaquette_rejects_1d() {
        let sp = Space::field_only(&spec1(3, 1, 1.0)).unwrap();
        assert!(matches!(op_plaquette(&sp, &[0], 0), Err(Error::UnsupportedDimension(_))));
    }

    #[test]
    fn path_operator_basics() {
        let spec = LatticeSpec::new(2, 3, 3, 9.0, 1);
        let sp = Space::field_only(&spec).unwrap();
        let empty = path_operator(&sp, &Path::new(vec![])).unwrap();
        assert_eq!(empty.max_diff(&SparseOperator::identity(sp.dim())).unwrap(), 0.0);
        let one = Path::walk(&spec, &[0, 0], &[(0, 1)]);
        let u = op_u(&sp, &LinkId::new(&[0, 0], 0)).unwrap();
        assert_eq!(path_operator(&sp, &one).unwrap().max_diff(&u).unwrap(), 0.0);
        // A closed loop that stays inside the cutoff leaves every residual unchanged.
        let lp = Path::unit_square(&spec, &[1, 1], 0, 1);
        let inc = path_increments(&spec, &lp).unwrap();
        let mut moved = 0;
        for idx in (0..sp.dim()).step_by(97) {
            if shift_wraps(&sp, &inc, idx) {
                continue;
            }
            let before = gausscheck::ClassicalConfig::new(&spec, vec![], sp.decode(idx).links);
            let after = gausscheck::ClassicalConfig::new(&spec, vec![], sp.decode(shifted_index(&sp, &inc, idx)).links);
            let rb = gausscheck::check_bruteforce(&before, 0).unwrap().residual;
            let ra = gausscheck::check_bruteforce(&after, 0).unwrap().residual;
            assert_eq!(rb, ra);
            moved += 1;
        }
        assert!(moved > 0);
    }
}
