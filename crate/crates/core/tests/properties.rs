use broomlab_core::generators::{fixture_params, plant_core};
use broomlab_core::shadow;
use broomlab_core::structures::{self, Params};
use broomlab_core::template::{self, TemplateArray};
use broomlab_core::{Graph, Limits};
use proptest::prelude::*;

fn shrinks(before: &TemplateArray, after: &TemplateArray) -> bool {
    after.sequence.iter().all(|t| {
        before
            .sequence
            .iter()
            .any(|b| b.core == t.core && t.h.is_subset(&b.h) && t.y() == b.y())
    })
}

fn run(g: &Graph, p: &Params) {
    let limits = Limits::default();
    let (t, left) = template::extract_template_array(g, p, &limits).unwrap();
    assert!(t.declared_holds(g), "{:?}", t.violations(g));
    assert!(structures::find_core_in(g, &left, p.zeta, p.beta, &limits).unwrap().is_none());

    let c1 = template::clean1(g, &t, &limits).unwrap().array;
    assert!(c1.declared_holds(g) && shrinks(&t, &c1));
    assert!(c1.u.is_subset(&t.u));
    assert!(template::clean1(g, &c1, &limits).unwrap().record.unchanged);

    let c2 = template::clean2(g, &c1, &limits).unwrap().array;
    assert!(c2.declared_holds(g) && shrinks(&c1, &c2));
    assert!(template::clean2(g, &c2, &limits).unwrap().record.unchanged);

    let pr = shadow::privatize(g, &c2, &limits).unwrap();
    assert!(pr.array.declared_holds(g) && shrinks(&c2, &pr.array));
    assert!(pr.privatization.violations(g, &pr.array).is_empty());

    let c3 = template::clean3(g, &pr.array, &limits).unwrap().array;
    assert!(c3.declared_holds(g) && shrinks(&pr.array, &c3));
    assert!(template::clean3(g, &c3, &limits).unwrap().record.unchanged);

    let s = shadow::build_shadowing(g, &c3, shadow::ShadowStrategy::LeastIndex, &c3.u);
    assert!(s.violations(g, &c3).is_empty());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pipeline_stages_keep_invariants(n in 4usize..28, noise in 0.0f64..0.35, seed in any::<u64>(), tau in 0usize..3) {
        let (g, _) = plant_core(n, 2, 2, noise, seed).unwrap();
        run(&g, &fixture_params(tau));
    }

    #[test]
    fn pipeline_on_several_cores(
        sizes in prop::collection::vec(4usize..9, 2..4),
        seed in any::<u64>(),
        cross in prop::collection::vec((any::<usize>(), any::<usize>()), 0..12),
        tau in 0usize..3,
    ) {
        let mut g = Graph::empty(0).unwrap();
        for (k, &m) in sizes.iter().enumerate() {
            let (h, _) = plant_core(m, 2, 2, 0.2, seed.wrapping_add(k as u64)).unwrap();
            g = g.disjoint_union(&h).unwrap();
        }
        let n = g.n();
        let mut edges: Vec<(usize, usize)> = g.edges().collect();
        edges.extend(cross.iter().map(|&(a, b)| (a % n, b % n)).filter(|(a, b)| a != b));
        edges.sort_unstable_by_key(|&(a, b)| (a.min(b), a.max(b)));
        edges.dedup_by_key(|&mut (a, b)| (a.min(b), a.max(b)));
        let g = Graph::from_edges(n, edges).unwrap();
        run(&g, &fixture_params(tau));
    }

    #[test]
    fn planted_core_is_found(n in 4usize..20, noise in 0.0f64..0.5, seed in any::<u64>()) {
        let (g, core) = plant_core(n, 2, 2, noise, seed).unwrap();
        prop_assert!(core.verify(&g));
        let found = structures::find_core(&g, 2, 2, &Limits::default()).unwrap();
        prop_assert!(found.is_some_and(|c| c.verify(&g)));
    }
}
