use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Matrix, SYMMETRY_TOLERANCE};
use crate::error::{Error, Result};

/// A rotation together with the antisymmetric generator it is the
/// exponential of.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSample {
    pub rotation: Matrix,
    pub generator: Matrix,
}

/// `rows × cols` matrix of iid standard-normal draws, filled row by row.
pub fn standard_normal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    Matrix::from_row_slice(rows, cols, &data)
}

fn antisymmetric_part(m: &Matrix) -> Matrix {
    (m - m.transpose()) * 0.5
}

/// Matrix exponential of an antisymmetric matrix, which is a rotation.
///
/// The input is accepted when `‖M + Mᵀ‖_max ≤ 1e-10 · max(1, ‖M‖_max)`; its
/// exact antisymmetric part is exponentiated (scaling and squaring with a
/// Padé approximant).
pub fn expm_antisym(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::mismatch("antisymmetric generator (columns)", m.nrows(), m.ncols()));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tolerance = SYMMETRY_TOLERANCE * m.amax().max(1.0);
    let max_deviation = (m + m.transpose()).amax();
    if max_deviation > tolerance {
        return Err(Error::NotAntisymmetric {
            max_deviation,
            tolerance,
        });
    }
    Ok(antisymmetric_part(m).exp())
}

/// Random rotation `R = exp(M)` with `M = ½(G − Gᵀ)` and `G` iid standard
/// normal, deterministic in `seed`.
pub fn rand_rotation(dim: usize, seed: u64) -> Result<RotationSample> {
    if dim == 0 {
        return Err(Error::InvalidParameter("rotation dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = standard_normal_matrix(dim, dim, &mut rng);
    let generator = antisymmetric_part(&g);
    let rotation = expm_antisym(&generator)?;
    Ok(RotationSample {
        rotation,
        generator,
    })
}

/// Rotation `exp(½(M₂ − M₂ᵀ))` with `M₂ = M + η·Ξ` and `Ξ` iid standard normal
/// drawn from `seed`. At `η = 0` the result is bitwise `expm_antisym(M)`.
pub fn perturb_rotation(generator: &Matrix, eta: f64, seed: u64) -> Result<Matrix> {
    Ok(perturb_rotation_sample(generator, eta, seed)?.rotation)
}

/// [`perturb_rotation`] together with the antisymmetric generator it used.
pub fn perturb_rotation_sample(generator: &Matrix, eta: f64, seed: u64) -> Result<RotationSample> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "perturbation strength must be finite and nonnegative, got {eta}"
        )));
    }
    if eta == 0.0 {
        return Ok(RotationSample {
            rotation: expm_antisym(generator)?,
            generator: generator.clone(),
        });
    }
    let n = generator.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xi = standard_normal_matrix(n, generator.ncols(), &mut rng);
    let perturbed = antisymmetric_part(&(generator + xi * eta));
    Ok(RotationSample {
        rotation: expm_antisym(&perturbed)?,
        generator: perturbed,
    })
}
