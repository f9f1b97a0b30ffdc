use nalgebra::{Cholesky, DMatrix, DVector, RealField};

use crate::program::frobenius_dot;
use crate::{ConicError, ConicProgram, ConicSolution, ConicSolver, SolveStatus};

/// Stopping and step-control parameters for [`InteriorPoint`].
#[derive(Debug, Clone, Copy)]
pub struct IpmSettings<T> {
    /// Target for relative gap, primal and dual infeasibility (scaled problem).
    pub tolerance: T,
    pub max_iterations: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: T,
}

impl<T: RealField + Copy> Default for IpmSettings<T> {
    fn default() -> Self {
        Self {
            tolerance: nalgebra::convert(1e-8),
            max_iterations: 120,
            step_fraction: nalgebra::convert(0.98),
        }
    }
}

/// Infeasible primal-dual path-following solver (HKM direction, Mehrotra corrector).
#[derive(Debug, Clone, Copy)]
pub struct InteriorPoint<T> {
    pub settings: IpmSettings<T>,
}

impl<T: RealField + Copy> Default for InteriorPoint<T> {
    fn default() -> Self {
        Self {
            settings: IpmSettings::default(),
        }
    }
}

impl<T: RealField + Copy> InteriorPoint<T> {
    pub fn new(settings: IpmSettings<T>) -> Self {
        Self { settings }
    }
}

impl<T: RealField + Copy> ConicSolver<T> for InteriorPoint<T> {
    fn solve(&self, program: &ConicProgram<T>) -> Result<ConicSolution<T>, ConicError> {
        program.validate()?;
        let mut state = Scaled::new(program)?;
        let status = state.run(&self.settings)?;
        Ok(state.unscale(program, status))
    }
}

fn c<T: RealField + Copy>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Working copy of the program with unit-norm rows and normalised `b`, `C`.
struct Scaled<T: RealField + Copy> {
    n: usize,
    nl: usize,
    a: Vec<DMatrix<T>>,
    al: Vec<DVector<T>>,
    b: DVector<T>,
    cm: DMatrix<T>,
    cl: DVector<T>,
    row_scale: Vec<T>,
    b_scale: T,
    c_scale: T,
    x: DMatrix<T>,
    xl: DVector<T>,
    y: DVector<T>,
    z: DMatrix<T>,
    zl: DVector<T>,
    iterations: usize,
}

struct Residuals<T: RealField + Copy> {
    rp: DVector<T>,
    rd: DMatrix<T>,
    rdl: DVector<T>,
    pobj: T,
    dobj: T,
    pinf: T,
    dinf: T,
    gap: T,
    mu: T,
}

struct Direction<T: RealField + Copy> {
    dx: DMatrix<T>,
    dxl: DVector<T>,
    dy: DVector<T>,
    dz: DMatrix<T>,
    dzl: DVector<T>,
}

impl<T: RealField + Copy> Scaled<T> {
    fn new(p: &ConicProgram<T>) -> Result<Self, ConicError> {
        let n = p.psd_order;
        let nl = p.nonneg;
        let m = p.rows.len();
        let mut a = Vec::with_capacity(m);
        let mut al = Vec::with_capacity(m);
        let mut b = DVector::zeros(m);
        let mut row_scale = Vec::with_capacity(m);
        for (i, r) in p.rows.iter().enumerate() {
            let norm = (r.a_psd.norm_squared() + r.a_lin.norm_squared()).sqrt();
            if norm <= T::zero() {
                return Err(ConicError::Shape {
                    row: i,
                    what: "constraint row has no coefficients".into(),
                });
            }
            let s = T::one() / norm;
            let mut ai = &r.a_psd * s;
            symmetrize(&mut ai);
            a.push(ai);
            al.push(&r.a_lin * s);
            b[i] = r.rhs * s;
            row_scale.push(s);
        }
        let b_scale = T::one() / T::max(T::one(), b.norm());
        b *= b_scale;
        let c_norm = (p.c_psd.norm_squared() + p.c_lin.norm_squared()).sqrt();
        let c_scale = T::one() / T::max(T::one(), c_norm);
        let mut cm = &p.c_psd * c_scale;
        symmetrize(&mut cm);
        let cl = &p.c_lin * c_scale;

        // Starting point in the spirit of SDPT3: large enough to dominate the data.
        let nf: T = c(n.max(1) as f64);
        let mut xi = T::max(c(10.0), nf.sqrt());
        let mut eta = T::max(c(10.0), nf.sqrt());
        for i in 0..m {
            let an = (a[i].norm_squared() + al[i].norm_squared()).sqrt();
            xi = T::max(xi, nf * (T::one() + b[i].abs()) / (T::one() + an));
            eta = T::max(eta, an);
        }
        eta = T::max(eta, (cm.norm_squared() + cl.norm_squared()).sqrt());

        Ok(Self {
            n,
            nl,
            a,
            al,
            b,
            cm,
            cl,
            row_scale,
            b_scale,
            c_scale,
            x: DMatrix::identity(n, n) * xi,
            xl: DVector::from_element(nl, xi),
            y: DVector::zeros(m),
            z: DMatrix::identity(n, n) * eta,
            zl: DVector::from_element(nl, eta),
            iterations: 0,
        })
    }

    fn m(&self) -> usize {
        self.a.len()
    }

    fn residuals(&self) -> Residuals<T> {
        let m = self.m();
        let mut rp = self.b.clone();
        let mut rd = &self.cm - &self.z;
        let mut rdl = &self.cl - &self.zl;
        for i in 0..m {
            rp[i] -= frobenius_dot(&self.a[i], &self.x) + self.al[i].dot(&self.xl);
            rd -= &self.a[i] * self.y[i];
            rdl -= &self.al[i] * self.y[i];
        }
        let pobj = frobenius_dot(&self.cm, &self.x) + self.cl.dot(&self.xl);
        let dobj = self.b.dot(&self.y);
        let nu: T = c((self.n + self.nl).max(1) as f64);
        let mu = (frobenius_dot(&self.x, &self.z) + self.xl.dot(&self.zl)) / nu;
        let c_norm = (self.cm.norm_squared() + self.cl.norm_squared()).sqrt();
        Residuals {
            pinf: rp.norm() / (T::one() + self.b.norm()),
            dinf: (rd.norm_squared() + rdl.norm_squared()).sqrt() / (T::one() + c_norm),
            gap: (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs()),
            rp,
            rd,
            rdl,
            pobj,
            dobj,
            mu,
        }
    }

    fn run(&mut self, settings: &IpmSettings<T>) -> Result<SolveStatus, ConicError> {
        let tol = settings.tolerance;
        let n = self.n;
        let m = self.m();
        let mut stalls = 0usize;
        for iter in 0..settings.max_iterations {
            self.iterations = iter;
            let res = self.residuals();
            if res.pinf < tol && res.dinf < tol && res.gap < tol {
                return Ok(SolveStatus::Optimal);
            }
            if let Some(s) = self.infeasibility(&res, tol) {
                return Ok(s);
            }

            let zinv = spd_inverse(&self.z)
                .ok_or_else(|| ConicError::Numerical("dual slack lost definiteness".into()))?;
            let ratio = self.xl.component_div(&self.zl);

            // Schur complement  M_ij = tr(A_i X A_j Z^-1) + Σ a_il a_jl x_l / z_l.
            let xa_zinv: Vec<DMatrix<T>> =
                self.a.iter().map(|aj| &self.x * aj * &zinv).collect();
            let mut schur = DMatrix::zeros(m, m);
            for i in 0..m {
                let wa = self.al[i].component_mul(&ratio);
                for j in 0..=i {
                    let v = frobenius_dot(&self.a[i], &xa_zinv[j]) + wa.dot(&self.al[j]);
                    schur[(i, j)] = v;
                    schur[(j, i)] = v;
                }
            }
            let solver = SchurSolver::new(schur)?;

            // Predictor (affine scaling): R = -XZ, so R Z^-1 = -X.
            let r_aff = -&self.x;
            let rl_aff = -self.xl.component_mul(&self.zl);
            let pred = self.direction(&res, &solver, &zinv, &r_aff, &rl_aff);
            let ap = T::min(T::one(), self.primal_max_step(&pred));
            let ad = T::min(T::one(), self.dual_max_step(&pred));
            let nu: T = c((n + self.nl).max(1) as f64);
            let mu_aff = (frobenius_dot(&(&self.x + &pred.dx * ap), &(&self.z + &pred.dz * ad))
                + (&self.xl + &pred.dxl * ap).dot(&(&self.zl + &pred.dzl * ad)))
                / nu;
            let ratio_mu = T::max(T::zero(), mu_aff / res.mu);
            let sigma = T::min(T::one(), ratio_mu * ratio_mu * ratio_mu);
            let target = sigma * res.mu;

            // Corrector: R = σμI - XZ - ΔXa ΔZa.
            let r_cor = &zinv * target - &self.x - &pred.dx * &pred.dz * &zinv;
            let rl_cor = DVector::from_element(self.nl, target)
                - self.xl.component_mul(&self.zl)
                - pred.dxl.component_mul(&pred.dzl);
            let dir = self.direction(&res, &solver, &zinv, &r_cor, &rl_cor);

            let tau = settings.step_fraction;
            let ap = T::min(T::one(), tau * self.primal_max_step(&dir));
            let ad = T::min(T::one(), tau * self.dual_max_step(&dir));
            if ap < c(1e-10) && ad < c(1e-10) {
                stalls += 1;
                if stalls >= 3 {
                    return Ok(SolveStatus::Stalled);
                }
            } else {
                stalls = 0;
            }
            self.x += &dir.dx * ap;
            self.xl += &dir.dxl * ap;
            self.y += &dir.dy * ad;
            self.z += &dir.dz * ad;
            self.zl += &dir.dzl * ad;
            symmetrize(&mut self.x);
            symmetrize(&mut self.z);
        }
        self.iterations = settings.max_iterations;
        let res = self.residuals();
        if res.pinf < tol && res.dinf < tol && res.gap < tol {
            Ok(SolveStatus::Optimal)
        } else {
            Ok(SolveStatus::MaxIterations)
        }
    }

    /// Newton direction for complementarity right-hand side `R Z^-1` (psd) and `rl` (linear).
    fn direction(
        &self,
        res: &Residuals<T>,
        solver: &SchurSolver<T>,
        zinv: &DMatrix<T>,
        r_zinv: &DMatrix<T>,
        rl: &DVector<T>,
    ) -> Direction<T> {
        let m = self.m();
        let t = r_zinv - &self.x * &res.rd * zinv;
        let u = (rl - self.xl.component_mul(&res.rdl)).component_div(&self.zl);
        let mut rhs = res.rp.clone();
        for i in 0..m {
            rhs[i] -= frobenius_dot(&self.a[i], &t) + self.al[i].dot(&u);
        }
        let dy = solver.solve(&rhs);
        let mut dz = res.rd.clone();
        let mut dzl = res.rdl.clone();
        for j in 0..m {
            dz -= &self.a[j] * dy[j];
            dzl -= &self.al[j] * dy[j];
        }
        symmetrize(&mut dz);
        let mut dx = r_zinv - &self.x * &dz * zinv;
        symmetrize(&mut dx);
        let dxl = (rl - self.xl.component_mul(&dzl)).component_div(&self.zl);
        Direction {
            dx,
            dxl,
            dy,
            dz,
            dzl,
        }
    }

    fn primal_max_step(&self, d: &Direction<T>) -> T {
        T::min(max_step_psd(&self.x, &d.dx), max_step_lin(&self.xl, &d.dxl))
    }

    fn dual_max_step(&self, d: &Direction<T>) -> T {
        T::min(max_step_psd(&self.z, &d.dz), max_step_lin(&self.zl, &d.dzl))
    }

    fn infeasibility(&self, res: &Residuals<T>, tol: T) -> Option<SolveStatus> {
        // Primal infeasible: y with Σ y_i A_i ⪯ 0 and b·y > 0.
        if res.dobj > T::zero() {
            let aty_z = &self.cm - &res.rd;
            let aty_zl = &self.cl - &res.rdl;
            let lhs = (aty_z.norm_squared() + aty_zl.norm_squared()).sqrt();
            if lhs / res.dobj < tol {
                return Some(SolveStatus::PrimalInfeasible);
            }
        }
        // Dual infeasible: X ⪰ 0 with A(X) = 0 and <C, X> < 0.
        if res.pobj < T::zero() {
            let ax = &self.b - &res.rp;
            if ax.norm() / (-res.pobj) < tol {
                return Some(SolveStatus::DualInfeasible);
            }
        }
        None
    }

    fn unscale(self, p: &ConicProgram<T>, status: SolveStatus) -> ConicSolution<T> {
        let x_psd = &self.x / self.b_scale;
        let x_lin = &self.xl / self.b_scale;
        let mut y = self.y.clone();
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = *yi * self.row_scale[i] / self.c_scale;
        }
        let z_psd = &self.z / self.c_scale;
        let z_lin = &self.zl / self.c_scale;

        let pobj = p.objective(&x_psd, &x_lin);
        let dobj = p
            .rows
            .iter()
            .zip(y.iter())
            .fold(T::zero(), |acc, (r, &yi)| acc + r.rhs * yi);
        let act = p.activities(&x_psd, &x_lin);
        let bnorm = p.rows.iter().fold(T::zero(), |acc, r| acc + r.rhs * r.rhs).sqrt();
        let mut pres = T::zero();
        for (i, r) in p.rows.iter().enumerate() {
            let d = act[i] - r.rhs;
            pres += d * d;
        }
        let mut rd = &p.c_psd - &z_psd;
        let mut rdl = &p.c_lin - &z_lin;
        for (r, &yi) in p.rows.iter().zip(y.iter()) {
            rd -= &r.a_psd * yi;
            rdl -= &r.a_lin * yi;
        }
        let cnorm = (p.c_psd.norm_squared() + p.c_lin.norm_squared()).sqrt();
        ConicSolution {
            status,
            primal_infeasibility: pres.sqrt() / (T::one() + bnorm),
            dual_infeasibility: (rd.norm_squared() + rdl.norm_squared()).sqrt()
                / (T::one() + cnorm),
            relative_gap: (pobj - dobj).abs() / (T::one() + pobj.abs() + dobj.abs()),
            primal_objective: pobj,
            dual_objective: dobj,
            x_psd,
            x_lin,
            y,
            z_psd,
            z_lin,
            iterations: self.iterations,
        }
    }
}

/// Factorised Schur complement; falls back to LU when Cholesky fails.
enum SchurSolver<T: RealField + Copy> {
    Chol(Cholesky<T, nalgebra::Dyn>),
    Lu(nalgebra::LU<T, nalgebra::Dyn, nalgebra::Dyn>),
    Empty,
}

impl<T: RealField + Copy> SchurSolver<T> {
    fn new(mut schur: DMatrix<T>) -> Result<Self, ConicError> {
        let m = schur.nrows();
        if m == 0 {
            return Ok(Self::Empty);
        }
        if let Some(ch) = Cholesky::new(schur.clone()) {
            return Ok(Self::Chol(ch));
        }
        let bump = c::<T>(1e-14) * T::max(T::one(), schur.diagonal().amax());
        for i in 0..m {
            schur[(i, i)] += bump;
        }
        let lu = schur.lu();
        if !lu.is_invertible() {
            return Err(ConicError::Numerical(
                "Schur complement singular; constraints may be linearly dependent".into(),
            ));
        }
        Ok(Self::Lu(lu))
    }

    fn solve(&self, rhs: &DVector<T>) -> DVector<T> {
        match self {
            Self::Chol(ch) => ch.solve(rhs),
            Self::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
            Self::Empty => DVector::zeros(0),
        }
    }
}

fn symmetrize<T: RealField + Copy>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half: T = c(0.5);
    for i in 0..n {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn spd_inverse<T: RealField + Copy>(m: &DMatrix<T>) -> Option<DMatrix<T>> {
    if m.nrows() == 0 {
        return Some(DMatrix::zeros(0, 0));
    }
    let mut inv = Cholesky::new(m.clone())?.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

/// Largest α with `X + α dX ⪰ 0` (infinite when dX ⪰ 0).
fn max_step_psd<T: RealField + Copy>(x: &DMatrix<T>, dx: &DMatrix<T>) -> T {
    let n = x.nrows();
    if n == 0 {
        return c(f64::MAX);
    }
    let Some(ch) = Cholesky::new(x.clone()) else {
        return T::zero();
    };
    let l = ch.l();
    let Some(left) = l.solve_lower_triangular(dx) else {
        return T::zero();
    };
    let Some(mut both) = l.solve_lower_triangular(&left.transpose()) else {
        return T::zero();
    };
    symmetrize(&mut both);
    let lmin = both.symmetric_eigenvalues().min();
    if lmin >= T::zero() {
        c(f64::MAX)
    } else {
        -T::one() / lmin
    }
}

fn max_step_lin<T: RealField + Copy>(x: &DVector<T>, dx: &DVector<T>) -> T {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < T::zero())
        .fold(c(f64::MAX), |acc, (&v, &d)| T::min(acc, -v / d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn max_step_identity() {
        let x = DMatrix::<f64>::identity(3, 3);
        let dx = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 1.0, 0.0]));
        assert!((max_step_psd(&x, &dx) - 0.5).abs() < 1e-14);
        assert_eq!(max_step_psd(&x, &(-&dx * 0.0)), f64::MAX);
    }

    #[test]
    fn max_step_linear() {
        let x = DVector::<f64>::from_vec(vec![1.0, 2.0]);
        let dx = DVector::from_vec(vec![-4.0, -1.0]);
        assert!((max_step_lin(&x, &dx) - 0.25).abs() < 1e-15);
    }
}
