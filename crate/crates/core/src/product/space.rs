use std::sync::Arc;

use rand_chacha::ChaCha8Rng;

use super::simplex::{p_norm, SimplexFunction};
use crate::error::{Error, Result};
use crate::estimator::SpaceKind;
use crate::metric::{check_dim, gauge_unchecked, perturb_vector, unit_vectors, MetricSpace, Vector};
use crate::properties::Status;
use crate::zoo::ZooKind;

/// A component metric on real coordinate vectors.
pub type Component = Arc<dyn MetricSpace<Point = Vector>>;

/// Simplex parameters of the extremal pairs `(t₁u₁, 0), (0, t₂u₂)`.
const GRID_SEED_STEPS: usize = 20;

/// `d_ψ(x, y) = (Σ d_i) · ψ(d_1/Σ, …, d_n/Σ)` on the product of the components,
/// with the direct `ℓ_p` form for `ψ_p`.
#[derive(Clone)]
pub struct ProductSpace {
    components: Vec<Component>,
    offsets: Vec<usize>,
    psi: SimplexFunction,
}

impl std::fmt::Debug for ProductSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProductSpace").field("id", &self.id()).finish()
    }
}

pub fn make_product(components: Vec<Component>, psi: SimplexFunction) -> Result<ProductSpace> {
    if components.len() != psi.n() {
        return Err(Error::contract(format!(
            "simplex function has n = {} but {} components were given",
            psi.n(),
            components.len()
        )));
    }
    if psi.membership().status != Status::Pass {
        return Err(Error::contract(format!("{} failed the membership audit", psi.kind())));
    }
    let mut offsets = vec![0];
    for c in &components {
        offsets.push(offsets.last().copied().unwrap_or(0) + c.dim());
    }
    Ok(ProductSpace { components, offsets, psi })
}

fn is_inner_product(kind: &SpaceKind) -> bool {
    match kind {
        SpaceKind::Zoo { zoo, .. } => match zoo {
            ZooKind::Euclidean => true,
            ZooKind::NormInduced { p } => *p == 2.0,
            ZooKind::FractionalPower { exponent } => *exponent == 1.0,
            _ => false,
        },
        _ => false,
    }
}

impl ProductSpace {
    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn psi(&self) -> &SimplexFunction {
        &self.psi
    }

    pub fn component_dims(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    fn part(&self, x: &Vector, i: usize) -> Vector {
        Vector::from_vec_unchecked(x.as_slice()[self.offsets[i]..self.offsets[i + 1]].to_vec())
    }

    /// Embeds component points into the product.
    pub fn join(&self, parts: &[Vector]) -> Result<Vector> {
        if parts.len() != self.components.len() {
            return Err(Error::contract(format!("expected {} parts, got {}", self.components.len(), parts.len())));
        }
        let mut v = Vec::with_capacity(self.dim());
        for (c, p) in self.components.iter().zip(parts) {
            c.validate(p)?;
            v.extend_from_slice(p.as_slice());
        }
        Ok(Vector::from_vec_unchecked(v))
    }

    /// Point that is `u` in component `i` and zero elsewhere.
    pub fn embed_component(&self, i: usize, u: &Vector) -> Result<Vector> {
        let parts: Vec<Vector> =
            self.components.iter().enumerate().map(|(j, c)| if j == i { u.clone() } else { c.zero() }).collect();
        self.join(&parts)
    }

    /// First basis vector of component `i`, scaled to unit gauge.
    fn unit_in(&self, i: usize) -> Option<Vector> {
        let c = &self.components[i];
        let b = c.basis_points().into_iter().next()?;
        let g = gauge_unchecked(c.as_ref(), &b);
        (g > 0.0 && g.is_finite()).then(|| b.scale(1.0 / g))
    }

    fn combine(&self, d: &[f64]) -> f64 {
        if let Some(p) = self.psi.p() {
            return p_norm(d, p);
        }
        let s: f64 = d.iter().sum();
        if s == 0.0 {
            return 0.0;
        }
        let t: Vec<f64> = d.iter().map(|v| v / s).collect();
        s * self.psi.eval_unchecked(&t)
    }
}

impl MetricSpace for ProductSpace {
    type Point = Vector;

    fn id(&self) -> String {
        let parts: Vec<String> = self.components.iter().map(|c| c.id()).collect();
        format!("product[{}]({})", self.psi.kind(), parts.join(","))
    }

    fn dim(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    fn distance(&self, x: &Vector, y: &Vector) -> f64 {
        if x == y {
            return 0.0;
        }
        let d: Vec<f64> =
            self.components.iter().enumerate().map(|(i, c)| c.distance(&self.part(x, i), &self.part(y, i))).collect();
        self.combine(&d)
    }

    fn zero(&self) -> Vector {
        Vector::zeros(self.dim())
    }

    fn validate(&self, x: &Vector) -> Result<()> {
        check_dim(self.dim(), x)?;
        for (i, c) in self.components.iter().enumerate() {
            c.validate(&self.part(x, i))?;
        }
        Ok(())
    }

    fn add(&self, x: &Vector, y: &Vector) -> Vector {
        x.add(y)
    }

    fn sub(&self, x: &Vector, y: &Vector) -> Vector {
        x.sub(y)
    }

    fn scale(&self, x: &Vector, lambda: f64) -> Vector {
        x.scale(lambda)
    }

    fn is_zero(&self, x: &Vector) -> bool {
        x.is_zero()
    }

    fn sample(&self, rng: &mut ChaCha8Rng, scale: f64) -> Vector {
        let mut v = Vec::with_capacity(self.dim());
        for c in &self.components {
            v.extend(c.sample(rng, scale).into_inner());
        }
        Vector::from_vec_unchecked(v)
    }

    fn basis_points(&self) -> Vec<Vector> {
        unit_vectors(self.dim())
    }

    fn coords(&self, x: &Vector) -> Vec<f64> {
        x.as_slice().to_vec()
    }

    fn perturb(&self, x: &Vector, coord: usize, delta: f64) -> Vector {
        perturb_vector(x, coord, delta)
    }

    fn space_kind(&self) -> SpaceKind {
        match self.psi.p() {
            Some(p) if self.components.iter().all(|c| is_inner_product(&c.space_kind())) => {
                SpaceKind::PMetric { p, components: self.components.len() }
            }
            _ => SpaceKind::Other,
        }
    }

    /// Basis pairs, unit vectors in two distinct components together with
    /// their duals `(x+y, x−y)`, and the pairs `(t·u_i, 0), (0, (1−t)·u_j)`
    /// on a simplex grid.
    fn seed_pairs(&self) -> Vec<(Vector, Vector)> {
        let basis = self.basis_points();
        let zero = self.zero();
        let mut pairs: Vec<_> = basis.iter().map(|b| (b.clone(), zero.clone())).collect();
        for (i, a) in basis.iter().enumerate() {
            for b in &basis[i..] {
                pairs.push((a.clone(), b.clone()));
            }
        }
        let units: Vec<Option<Vector>> = (0..self.components.len())
            .map(|i| self.unit_in(i).and_then(|u| self.embed_component(i, &u).ok()))
            .collect();
        for i in 0..units.len() {
            for j in 0..units.len() {
                let (Some(ui), Some(uj)) = (&units[i], &units[j]) else { continue };
                if i == j {
                    continue;
                }
                if i < j {
                    pairs.push((ui.clone(), uj.clone()));
                    pairs.push((ui.add(uj), ui.sub(uj)));
                }
                for s in 1..GRID_SEED_STEPS {
                    let t = s as f64 / GRID_SEED_STEPS as f64;
                    pairs.push((ui.scale(t), uj.scale(1.0 - t)));
                }
            }
        }
        pairs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::gauge;
    use crate::product::{make_psi_p, named_psi};
    use crate::zoo;

    fn abs2(p: f64) -> ProductSpace {
        let c: Component = Arc::new(zoo::make_euclidean(1).unwrap());
        make_product(vec![c.clone(), c], make_psi_p(2, p).unwrap()).unwrap()
    }

    #[test]
    fn p_metric_examples() {
        let x = Vector::from(vec![1.0, 2.0]);
        assert_eq!(gauge(&abs2(1.0), &x).unwrap(), 3.0);
        assert_eq!(gauge(&abs2(f64::INFINITY), &x).unwrap(), 2.0);
        assert_eq!(gauge(&abs2(2.0), &Vector::from(vec![3.0, 4.0])).unwrap(), 5.0);
    }

    #[test]
    fn custom_psi_uses_general_form() {
        let c: Component = Arc::new(zoo::make_euclidean(1).unwrap());
        let s = make_product(vec![c.clone(), c], named_psi("half-l1-linf", 2).unwrap()).unwrap();
        let v = gauge(&s, &Vector::from(vec![1.0, 2.0])).unwrap();
        assert!((v - 3.0 * 0.5 * (1.0 + 2.0 / 3.0)).abs() < 1e-12);
        assert_eq!(gauge(&s, &Vector::zeros(2)).unwrap(), 0.0);
        assert!(matches!(s.space_kind(), SpaceKind::Other));
    }

    #[test]
    fn construction_contracts() {
        let c: Component = Arc::new(zoo::make_euclidean(1).unwrap());
        assert!(make_product(vec![c.clone()], make_psi_p(2, 2.0).unwrap()).is_err());
        assert!(make_product(vec![c.clone(), c], named_psi("squares", 2).unwrap()).is_err());
    }

    #[test]
    fn mixed_dimensions() {
        let a: Component = Arc::new(zoo::make_euclidean(2).unwrap());
        let b: Component = Arc::new(zoo::make_norm_induced(3, 1.0).unwrap());
        let s = make_product(vec![a, b], make_psi_p(2, 2.0).unwrap()).unwrap();
        assert_eq!(s.dim(), 5);
        assert_eq!(s.component_dims(), vec![2, 3]);
        let x = s.join(&[Vector::from(vec![3.0, 4.0]), Vector::from(vec![1.0, -1.0, 10.0])]).unwrap();
        assert!((gauge(&s, &x).unwrap() - (25.0f64 + 144.0).sqrt()).abs() < 1e-12);
        assert!(s.validate(&Vector::zeros(4)).is_err());
    }

    #[test]
    fn space_kind_requires_inner_product_components() {
        assert_eq!(abs2(1.5).space_kind(), SpaceKind::PMetric { p: 1.5, components: 2 });
        let a: Component = Arc::new(zoo::make_truncated(1, 1.0).unwrap());
        let s = make_product(vec![a.clone(), a], make_psi_p(2, 2.0).unwrap()).unwrap();
        assert_eq!(s.space_kind(), SpaceKind::Other);
    }
}
