use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Real;
use crate::rng::Rng;
use crate::triple::ModelKind;

/// What a parameter table is indexed by, and which triple slot reads it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableRole {
    /// Entity rows read for the head slot (and the tail slot when the model
    /// has a single entity table).
    Entity,
    /// DM's context-space table, read for the tail slot only.
    Context,
    /// Relation rows; the index is the position in the kernel's relation view.
    Relation(usize),
    BiasHead,
    BiasTail,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSpec {
    pub name: &'static str,
    pub rows: usize,
    pub cols: usize,
    pub role: TableRole,
}

impl TableSpec {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parameter tables of `kind` in manifest order.
pub fn layout(kind: ModelKind, n_entities: usize, n_relations: usize, dim: usize) -> Vec<TableSpec> {
    let ent = |name, role| TableSpec {
        name,
        rows: n_entities,
        cols: dim,
        role,
    };
    let rel = |name, cols, slot| TableSpec {
        name,
        rows: n_relations,
        cols,
        role: TableRole::Relation(slot),
    };
    let bias = |name, role| TableSpec {
        name,
        rows: n_entities,
        cols: 1,
        role,
    };
    let half = dim / 2;
    match kind {
        ModelKind::Dm => vec![
            ent("target", TableRole::Entity),
            ent("context", TableRole::Context),
            rel("rel_maps", dim * dim, 0),
        ],
        ModelKind::Mure => vec![
            ent("entity", TableRole::Entity),
            rel("rel_diag", dim, 0),
            rel("rel_trans", dim, 1),
            bias("bias_head", TableRole::BiasHead),
            bias("bias_tail", TableRole::BiasTail),
        ],
        ModelKind::RotE => vec![
            ent("entity", TableRole::Entity),
            rel("rot_angles", half, 0),
            rel("rel_trans", dim, 1),
            bias("bias_head", TableRole::BiasHead),
            bias("bias_tail", TableRole::BiasTail),
        ],
        ModelKind::RefE => vec![
            ent("entity", TableRole::Entity),
            rel("ref_angles", half, 0),
            rel("rel_trans", dim, 1),
            bias("bias_head", TableRole::BiasHead),
            bias("bias_tail", TableRole::BiasTail),
        ],
        ModelKind::AttE => vec![
            ent("entity", TableRole::Entity),
            rel("rot_angles", half, 0),
            rel("ref_angles", half, 1),
            rel("rel_trans", dim, 2),
            rel("att_vec", dim, 3),
            bias("bias_head", TableRole::BiasHead),
            bias("bias_tail", TableRole::BiasTail),
        ],
    }
}

/// Learnable parameter count, summed over the layout.
pub fn count_params(kind: ModelKind, n_entities: usize, n_relations: usize, dim: usize) -> usize {
    layout(kind, n_entities, n_relations, dim)
        .iter()
        .map(TableSpec::len)
        .sum()
}

/// Row-major dense table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table<F> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<F>,
}

impl<F: Real> Table<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![F::zero(); rows * cols],
        }
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [F] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Parameters of one model. Tables follow [`layout`] order; use the typed
/// accessors rather than raw indices where possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<F = f32> {
    kind: ModelKind,
    dim: usize,
    n_entities: usize,
    n_relations: usize,
    tables: Vec<Table<F>>,
    /// Index of the entity table read for the tail slot.
    tail_table: usize,
    relation_tables: Vec<usize>,
    bias_tables: Option<(usize, usize)>,
}

fn check_dim(kind: ModelKind, dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::Config("dim must be positive".into()));
    }
    if kind.needs_even_dim() && !dim.is_multiple_of(2) {
        return Err(Error::OddDim { kind: kind.name(), dim });
    }
    Ok(())
}

impl<F: Real> ModelParams<F> {
    pub fn zeros(kind: ModelKind, n_entities: usize, n_relations: usize, dim: usize) -> Result<Self> {
        check_dim(kind, dim)?;
        let specs = layout(kind, n_entities, n_relations, dim);
        let tables = specs.iter().map(|s| Table::zeros(s.rows, s.cols)).collect();
        Ok(Self::assemble(kind, n_entities, n_relations, dim, &specs, tables))
    }

    /// Wraps raw tables (e.g. from a checkpoint), checking every shape.
    pub fn from_tables(
        kind: ModelKind,
        n_entities: usize,
        n_relations: usize,
        dim: usize,
        data: Vec<Vec<F>>,
    ) -> Result<Self> {
        check_dim(kind, dim)?;
        let specs = layout(kind, n_entities, n_relations, dim);
        if data.len() != specs.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} expects {} tables, got {}",
                kind,
                specs.len(),
                data.len()
            )));
        }
        let mut tables = Vec::with_capacity(specs.len());
        for (spec, d) in specs.iter().zip(data) {
            if d.len() != spec.len() {
                return Err(Error::ShapeMismatch(format!(
                    "table {} has {} elements, expected {}",
                    spec.name,
                    d.len(),
                    spec.len()
                )));
            }
            tables.push(Table {
                rows: spec.rows,
                cols: spec.cols,
                data: d,
            });
        }
        Ok(Self::assemble(kind, n_entities, n_relations, dim, &specs, tables))
    }

    fn assemble(
        kind: ModelKind,
        n_entities: usize,
        n_relations: usize,
        dim: usize,
        specs: &[TableSpec],
        tables: Vec<Table<F>>,
    ) -> Self {
        let find = |role: TableRole| specs.iter().position(|s| s.role == role);
        let tail_table = find(TableRole::Context).unwrap_or(0);
        let mut relation_tables = Vec::new();
        while let Some(i) = find(TableRole::Relation(relation_tables.len())) {
            relation_tables.push(i);
        }
        let bias_tables = find(TableRole::BiasHead).zip(find(TableRole::BiasTail));
        Self {
            kind,
            dim,
            n_entities,
            n_relations,
            tables,
            tail_table,
            relation_tables,
            bias_tables,
        }
    }

    /// Draws initial values: entity rows and attention vectors
    /// ~ U(-0.5/n, 0.5/n), angles ~ U(-pi, pi), DM context rows, translations
    /// and biases zero. DM relation maps are uniform like embeddings unless
    /// `identity_rel_maps` is set.
    pub fn init(
        kind: ModelKind,
        n_entities: usize,
        n_relations: usize,
        dim: usize,
        identity_rel_maps: bool,
        rng: &mut Rng,
    ) -> Result<Self> {
        let mut p = Self::zeros(kind, n_entities, n_relations, dim)?;
        let bound = 0.5 / dim as f64;
        let specs = layout(kind, n_entities, n_relations, dim);
        for (spec, table) in specs.iter().zip(p.tables.iter_mut()) {
            match (spec.name, spec.role) {
                ("context", _) | ("rel_trans", _) | (_, TableRole::BiasHead | TableRole::BiasTail) => {}
                ("rot_angles" | "ref_angles", _) => {
                    for x in &mut table.data {
                        *x = F::of(rng.uniform_f64(-std::f64::consts::PI, std::f64::consts::PI));
                    }
                }
                ("rel_maps", _) if identity_rel_maps => {
                    for r in 0..table.rows {
                        let row = table.row_mut(r);
                        for i in 0..dim {
                            row[i * dim + i] = F::one();
                        }
                    }
                }
                ("rel_diag", _) => {
                    // Stretch starts near identity so the head is not zeroed out.
                    for x in &mut table.data {
                        *x = F::of(1.0 + rng.uniform_f64(-bound, bound));
                    }
                }
                _ => {
                    for x in &mut table.data {
                        *x = F::of(rng.uniform_f64(-bound, bound));
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_entities(&self) -> usize {
        self.n_entities
    }

    pub fn n_relations(&self) -> usize {
        self.n_relations
    }

    pub fn tables(&self) -> &[Table<F>] {
        &self.tables
    }

    pub fn tables_mut(&mut self) -> &mut [Table<F>] {
        &mut self.tables
    }

    pub fn specs(&self) -> Vec<TableSpec> {
        layout(self.kind, self.n_entities, self.n_relations, self.dim)
    }

    pub fn param_count(&self) -> usize {
        self.tables.iter().map(|t| t.data.len()).sum()
    }

    /// Head-slot entity embedding (DM: target space).
    pub fn entity(&self, id: u32) -> &[F] {
        self.tables[0].row(id as usize)
    }

    /// Tail-slot entity embedding (DM: context space; otherwise same as `entity`).
    pub fn tail_entity(&self, id: u32) -> &[F] {
        self.tables[self.tail_table].row(id as usize)
    }

    pub fn relation_part(&self, slot: usize, r: u32) -> &[F] {
        self.tables[self.relation_tables[slot]].row(r as usize)
    }

    pub fn relation_part_mut(&mut self, slot: usize, r: u32) -> &mut [F] {
        let t = self.relation_tables[slot];
        self.tables[t].row_mut(r as usize)
    }

    pub fn entity_mut(&mut self, id: u32) -> &mut [F] {
        self.tables[0].row_mut(id as usize)
    }

    pub fn tail_entity_mut(&mut self, id: u32) -> &mut [F] {
        let t = self.tail_table;
        self.tables[t].row_mut(id as usize)
    }

    pub(crate) fn tail_table_index(&self) -> usize {
        self.tail_table
    }

    pub(crate) fn relation_table_indices(&self) -> &[usize] {
        &self.relation_tables
    }

    pub(crate) fn bias_table_indices(&self) -> Option<(usize, usize)> {
        self.bias_tables
    }

    pub fn bias_head(&self, id: u32) -> F {
        self.bias_tables
            .map(|(bh, _)| self.tables[bh].data[id as usize])
            .unwrap_or_else(F::zero)
    }

    pub fn bias_tail(&self, id: u32) -> F {
        self.bias_tables
            .map(|(_, bt)| self.tables[bt].data[id as usize])
            .unwrap_or_else(F::zero)
    }

    /// Element-wise conversion, e.g. to `f64` for oracle checks.
    pub fn cast<G: Real>(&self) -> ModelParams<G> {
        ModelParams {
            kind: self.kind,
            dim: self.dim,
            n_entities: self.n_entities,
            n_relations: self.n_relations,
            tables: self
                .tables
                .iter()
                .map(|t| Table {
                    rows: t.rows,
                    cols: t.cols,
                    data: t.data.iter().map(|x| G::of(x.to_f64().unwrap_or(f64::NAN))).collect(),
                })
                .collect(),
            tail_table: self.tail_table,
            relation_tables: self.relation_tables.clone(),
            bias_tables: self.bias_tables,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const V: usize = 72_000;
    const R: usize = 88;
    const N: usize = 300;

    fn within(count: usize, reported: f64, tol: f64) -> bool {
        ((count as f64 - reported) / reported).abs() <= tol
    }

    #[test]
    fn counts_follow_closed_forms() {
        for (v, r, n) in [(10, 4, 6), (1, 1, 2), (V, R, N)] {
            assert_eq!(count_params(ModelKind::Dm, v, r, n), 2 * v * n + r * n * n);
            assert_eq!(count_params(ModelKind::Mure, v, r, n), v * n + 2 * v + 2 * r * n);
            for k in [ModelKind::RotE, ModelKind::RefE] {
                assert_eq!(count_params(k, v, r, n), v * n + 2 * v + r * (n / 2) + r * n);
            }
            assert_eq!(
                count_params(ModelKind::AttE, v, r, n),
                v * n + 2 * v + 2 * r * (n / 2) + 2 * r * n
            );
        }
    }

    #[test]
    fn counts_match_reported_table() {
        assert_eq!(count_params(ModelKind::Dm, V, R, N), 51_120_000);
        assert_eq!(count_params(ModelKind::Mure, V, R, N), 21_796_800);
        assert!(within(count_params(ModelKind::Dm, V, R, N), 51.6e6, 0.02));
        assert!(within(count_params(ModelKind::Mure, V, R, N), 21.5e6, 0.02));
        assert!(within(count_params(ModelKind::RotE, V, R, N), 21.5e6, 0.02));
        assert!(within(count_params(ModelKind::RefE, V, R, N), 21.5e6, 0.02));
        assert!(within(count_params(ModelKind::AttE, V, R, N), 21.6e6, 0.02));
    }

    #[test]
    fn empty_vocab_has_no_entity_params() {
        for k in ModelKind::ALL {
            let total = count_params(k, 0, 3, 4);
            let rel_only: usize = layout(k, 0, 3, 4)
                .iter()
                .filter(|s| matches!(s.role, TableRole::Relation(_)))
                .map(TableSpec::len)
                .sum();
            assert_eq!(total, rel_only);
        }
    }

    #[test]
    fn ordering_dm_atte_mure() {
        for (v, r, n) in [(100, 10, 8), (V, R, N), (5, 2, 4)] {
            let dm = count_params(ModelKind::Dm, v, r, n);
            let att = count_params(ModelKind::AttE, v, r, n);
            let mure = count_params(ModelKind::Mure, v, r, n);
            assert!(dm > att && att > mure, "{v} {r} {n}");
        }
    }

    #[test]
    fn odd_dim_rejected_for_givens_models() {
        assert!(matches!(
            ModelParams::<f32>::zeros(ModelKind::RotE, 3, 2, 301),
            Err(Error::OddDim { .. })
        ));
        assert!(ModelParams::<f32>::zeros(ModelKind::Mure, 3, 2, 3).is_ok());
    }

    #[test]
    fn init_is_deterministic_and_bounded() {
        let a = ModelParams::<f32>::init(ModelKind::Mure, 1000, 4, 100, false, &mut Rng::new(9)).unwrap();
        let b = ModelParams::<f32>::init(ModelKind::Mure, 1000, 4, 100, false, &mut Rng::new(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.tables()[0].data.iter().all(|x| x.abs() <= 0.005));
        let dm = ModelParams::<f32>::init(ModelKind::Dm, 50, 2, 8, false, &mut Rng::new(1)).unwrap();
        assert!(dm.tables()[1].data.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn angle_init_is_uniform_chi_square() {
        // 10^5 angles into 20 equal bins; chi^2 critical value at alpha=0.01, 19 dof = 36.19.
        let p = ModelParams::<f64>::init(ModelKind::RotE, 1, 1000, 200, false, &mut Rng::new(11)).unwrap();
        let angles = &p.tables()[1].data;
        assert_eq!(angles.len(), 100_000);
        let bins = 20;
        let mut hist = vec![0usize; bins];
        let pi = std::f64::consts::PI;
        for &a in angles {
            assert!((-pi..pi).contains(&a));
            let b = (((a + pi) / (2.0 * pi)) * bins as f64) as usize;
            hist[b.min(bins - 1)] += 1;
        }
        let expected = angles.len() as f64 / bins as f64;
        let chi2: f64 = hist.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn from_tables_checks_shapes() {
        let p = ModelParams::<f32>::zeros(ModelKind::Dm, 3, 2, 4).unwrap();
        let mut data: Vec<Vec<f32>> = p.tables().iter().map(|t| t.data.clone()).collect();
        data[0].pop();
        let err = ModelParams::from_tables(ModelKind::Dm, 3, 2, 4, data).unwrap_err();
        assert!(err.to_string().contains("shape mismatch"));
    }
}
