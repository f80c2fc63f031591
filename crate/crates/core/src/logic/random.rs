//! Seeded random formulae for property tests and cross-checks.

use std::sync::Arc;

use rand::Rng;

use crate::logic::Formula;
use crate::template::Template;

/// Shape limits for [`random_formula`].
#[derive(Debug, Clone)]
pub struct FormulaShape {
    pub propositions: usize,
    pub max_modal_depth: usize,
    pub max_syntactic_depth: usize,
    pub max_threshold: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        Self {
            propositions: 3,
            max_modal_depth: 3,
            max_syntactic_depth: 4,
            max_threshold: 3,
        }
    }
}

/// Draws a formula within `shape` over `templates`.
///
/// # Panics
/// If `shape.propositions` or `shape.max_threshold` is 0, or `templates` is
/// empty while modal depth is allowed.
pub fn random_formula<R: Rng + ?Sized>(
    rng: &mut R,
    templates: &[Arc<Template>],
    shape: &FormulaShape,
) -> Formula {
    assert!(shape.propositions > 0 && shape.max_threshold > 0);
    assert!(shape.max_modal_depth == 0 || !templates.is_empty());
    grow(rng, templates, shape, shape.max_syntactic_depth, shape.max_modal_depth)
}

fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    templates: &[Arc<Template>],
    shape: &FormulaShape,
    sd: usize,
    md: usize,
) -> Formula {
    if sd == 0 || rng.gen_bool(0.2) {
        return Formula::prop(rng.gen_range(0..shape.propositions));
    }
    let choices = if md > 0 { 4 } else { 2 };
    match rng.gen_range(0..choices) {
        0 => Formula::not(grow(rng, templates, shape, sd - 1, md)),
        1 => Formula::and(
            grow(rng, templates, shape, sd - 1, md),
            grow(rng, templates, shape, sd - 1, md),
        ),
        _ => {
            let t = &templates[rng.gen_range(0..templates.len())];
            let args = (0..t.arity())
                .map(|_| grow(rng, templates, shape, sd - 1, md - 1))
                .collect();
            let j = rng.gen_range(1..=shape.max_threshold);
            Formula::diamond(Arc::clone(t), j, args).expect("arity matches template")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::builtin_registry;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_shape() {
        let reg = builtin_registry();
        let shape = FormulaShape::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut saw_modal = false;
        for _ in 0..500 {
            let f = random_formula(&mut rng, reg.templates(), &shape);
            assert!(f.modal_depth() <= 3);
            assert!(f.syntactic_depth() <= 4);
            assert!(f.counting_bound() <= 3);
            assert!(f.max_prop().unwrap() < 3);
            saw_modal |= f.modal_depth() > 0;
        }
        assert!(saw_modal);
    }
}
