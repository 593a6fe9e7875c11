use super::{Jet, SpacelikeGraph};
use crate::chart::{fd_derivative, fd_second, ChartGrid, Direction, Field, Mat2, ScalarField, StencilOrder, Vec2};
use crate::error::{GeometryError, Result};

/// `f` known only at the nodes of a chart; derivatives by finite differences and
/// off-node queries by bilinear interpolation.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    jets: Field<Jet>,
}

impl SampledGraph {
    pub fn new(values: &ScalarField, order: StencilOrder) -> Result<Self> {
        use Direction::{U, V};
        let fu = fd_derivative(values, U, order)?;
        let fv = fd_derivative(values, V, order)?;
        let fuu = fd_second(values, U, U, order)?;
        let fuv = fd_second(values, U, V, order)?;
        let fvv = fd_second(values, V, V, order)?;
        let jets = (0..values.grid().len())
            .map(|k| Jet {
                value: values.values()[k],
                gradient: Vec2::new(fu.values()[k], fv.values()[k]),
                hessian: Mat2::new(fuu.values()[k], fuv.values()[k], fuv.values()[k], fvv.values()[k]),
            })
            .collect();
        Ok(Self { jets: Field::from_values(*values.grid(), jets)? })
    }

    /// Tabulates another graph on `chart`.
    pub fn sample(s: &SpacelikeGraph, chart: &ChartGrid, order: StencilOrder) -> Result<Self> {
        let values = Field::par_try_from_fn(*chart, |u, v| s.value(Vec2::new(u, v)))?;
        Self::new(&values, order)
    }

    pub fn grid(&self) -> &ChartGrid {
        self.jets.grid()
    }

    pub fn jet(&self, x: Vec2) -> Result<Jet> {
        let grid = self.jets.grid();
        if !grid.contains(x[0], x[1]) {
            return Err(GeometryError::OutsideChart { x1: x[0], x2: x[1] });
        }
        let su = ((x[0] - grid.u_min) / grid.h_u()).min((grid.n_u - 1) as f64);
        let sv = ((x[1] - grid.v_min) / grid.h_v()).min((grid.n_v - 1) as f64);
        let i = (su.floor() as usize).min(grid.n_u - 2);
        let j = (sv.floor() as usize).min(grid.n_v - 2);
        let (a, b) = (su - i as f64, sv - j as f64);
        let w = [
            (i, j, (1.0 - a) * (1.0 - b)),
            (i + 1, j, a * (1.0 - b)),
            (i, j + 1, (1.0 - a) * b),
            (i + 1, j + 1, a * b),
        ];
        let mut out = Jet { value: 0.0, gradient: Vec2::zeros(), hessian: Mat2::zeros() };
        for (i, j, wt) in w {
            let n = self.jets.at(i, j);
            out.value += wt * n.value;
            out.gradient += n.gradient * wt;
            out.hessian += n.hessian * wt;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{GraphSource, SpacelikeGraph};
    use std::sync::Arc;

    #[test]
    fn tabulated_hyperboloid_matches_closed_form() {
        let exact = SpacelikeGraph::hyperboloid();
        let chart = ChartGrid::square(2.0, 81).unwrap();
        let sampled = SampledGraph::sample(&exact, &chart, StencilOrder::Fourth).unwrap();
        let s = SpacelikeGraph::new(GraphSource::Sampled(Arc::new(sampled)));
        for k in 0..chart.len() {
            let (u, v) = chart.coords(k);
            let x = Vec2::new(u, v);
            let (a, b) = (s.jet(x).unwrap(), exact.jet(x).unwrap());
            assert!((a.gradient - b.gradient).norm() < 1e-5);
            assert!((a.hessian - b.hessian).amax() < 1e-3);
        }
        let mid = s.jet(Vec2::new(0.025, 0.0)).unwrap();
        assert!((mid.value - exact.value(Vec2::new(0.025, 0.0)).unwrap()).abs() < 1e-3);
        assert!(matches!(s.jet(Vec2::new(2.5, 0.0)), Err(GeometryError::OutsideChart { .. })));
    }
}
