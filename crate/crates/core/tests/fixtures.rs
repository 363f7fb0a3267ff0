use broomlab_core::constants::{self, ids};
use broomlab_core::generators::{fixture, fixture_params};
use broomlab_core::shadow::{self, ShadowStrategy};
use broomlab_core::structures::CoreWitness;
use broomlab_core::template::{self, Cleanliness, Template, TemplateArray, VerdictStatus, WitnessOutcome};
use broomlab_core::{trees, Graph, Limits, VertexSet};

fn array(id: &str) -> (Graph, TemplateArray) {
    let f = fixture(id).unwrap();
    (f.graph, f.array.unwrap())
}

#[test]
fn y_violation_yields_verified_t1() {
    let (g, t) = array("y-violation@1");
    let limits = Limits::default();
    let viol = template::violation_at(&g, &t, ids::Y_INDICES, 12).unwrap().unwrap();
    assert_eq!(viol.indices, vec![0, 1, 2]);
    let WitnessOutcome::Found(e) = template::extract_T_delta_witness(&g, &t, Some(&viol), &limits).unwrap() else {
        panic!("no witness");
    };
    let t1 = trees::build_T(1).unwrap();
    assert!(e.verify(&g, &t1.tree));
    assert!(!trees::is_T_delta_free(&g, 1, &limits).unwrap());
}

#[test]
fn h_violation_yields_verified_t1() {
    let (g, t) = array("h-violation@1");
    let limits = Limits::default();
    assert_eq!(constants::thresholds(&t.params).unwrap().gamma, 3);
    let viol = template::violation_at(&g, &t, ids::H_INDICES, 15).unwrap().unwrap();
    let out = template::extract_T_delta_witness(&g, &t, Some(&viol), &limits).unwrap();
    let WitnessOutcome::Found(e) = out else { panic!("{out:?}") };
    assert!(e.verify(&g, &trees::build_T(1).unwrap().tree));
}

#[test]
fn h_clique_reports_stable_set_step() {
    let (g, t) = array("h-clique@1");
    let limits = Limits::default();
    let viol = template::violation_at(&g, &t, ids::H_INDICES, 15).unwrap().unwrap();
    match template::extract_T_delta_witness(&g, &t, Some(&viol), &limits).unwrap() {
        WitnessOutcome::StepFailed { step, .. } => assert_eq!(step, "stable-set extraction"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn audit_classifies_violations() {
    let limits = Limits::default();
    let (g, mut t) = array("h-violation@1");
    t.cleanliness = Cleanliness::Clean1;
    let rep = template::bound_audit(&g, &t, None, &limits).unwrap();
    let h = rep.verdict(ids::H_INDICES).unwrap();
    assert_eq!(h.status, VerdictStatus::Violation);
    assert!(matches!(h.witness, Some(WitnessOutcome::Found(_))));
    assert!(h.note.contains("host"));

    let (g, t) = array("h-clique@1");
    let rep = template::bound_audit(&g, &t, None, &limits).unwrap();
    let h = rep.verdict(ids::H_INDICES).unwrap();
    assert_eq!(h.status, VerdictStatus::Violation);
    assert!(h.note.starts_with("unexplained"));
}

#[test]
fn k22_pair_audit_passes() {
    let f = fixture("k22-pair@1").unwrap();
    let limits = Limits::default();
    let (t, left) = template::extract_template_array(&f.graph, &fixture_params(1), &limits).unwrap();
    assert_eq!(t.n(), 2);
    assert!(left.is_empty());
    let c = template::clean1(&f.graph, &t, &limits).unwrap().array;
    let rep = template::bound_audit(&f.graph, &c, None, &limits).unwrap();
    assert!(rep.passes(), "{rep:?}");
    assert!(rep.verdict(ids::Y_INDICES).unwrap().observed.unwrap() <= 1);
}

#[test]
fn clean2_separates_cross_edge() {
    let (g, t) = array("cross-edge@1");
    assert!(!template::is_2_cleaned(&g, &t));
    let out = template::clean2(&g, &t, &Limits::default()).unwrap();
    assert!(template::is_2_cleaned(&g, &out.array));
    let h = out.array.h_all();
    assert!(!(h.contains(4) && h.contains(9)));
    assert!(out.array.declared_holds(&g));
}

#[test]
fn clean2_on_z_triangle() {
    let (g, t) = array("z-triangle@1");
    assert!(!template::is_2_cleaned(&g, &t));
    let out = template::clean2(&g, &t, &Limits::default()).unwrap();
    assert!(out.array.declared_holds(&g));
    assert_eq!(out.array.sequence[0].y(), t.sequence[0].y());
}

#[test]
fn clean3_removes_vertex_with_epsilon_h_neighbours() {
    // Y = K_{2,2} on 0..4, Z = ε stable vertices each seeing vertex 0, and
    // one U-vertex adjacent to all of Z
    let p = fixture_params(0);
    let eps = constants::thresholds(&p).unwrap().epsilon as usize;
    let z: Vec<usize> = (4..4 + eps).collect();
    let u = 4 + eps;
    let mut e = vec![(0, 2), (0, 3), (1, 2), (1, 3)];
    e.extend(z.iter().map(|&w| (w, 0)));
    e.extend(z.iter().map(|&w| (w, u)));
    let g = Graph::from_edges(u + 1, e).unwrap();
    let core = CoreWitness {
        parts: vec![VertexSet::from([0, 1]), VertexSet::from([2, 3])],
    };
    let t = TemplateArray {
        sequence: vec![Template {
            h: core.vertices().union(&z.iter().copied().collect()),
            core,
        }],
        u: VertexSet::from([u]),
        params: p,
        cleanliness: Cleanliness::Clean2,
    };
    assert!(t.declared_holds(&g), "{:?}", t.violations(&g));
    assert!(!template::is_3_cleaned(&g, &t));
    let out = template::clean3(&g, &t, &Limits::default()).unwrap();
    assert_eq!(out.record.removed, VertexSet::from([u]));
    assert!(out.array.u.is_empty() && out.array.declared_holds(&g));
    let again = template::clean3(&g, &out.array, &Limits::default()).unwrap();
    assert!(again.record.unchanged);
}

#[test]
fn bunch_fixtures() {
    let (g, t) = array("bunch@1");
    let s = shadow::build_shadowing(&g, &t, ShadowStrategy::LeastIndex, &t.u);
    assert!(s.violations(&g, &t).is_empty());
    let bunch = shadow::find_bunch(&g, &t, &s, 2).unwrap().unwrap();
    assert_eq!(bunch.len(), 2);
    assert!(shadow::verify_bunch(&g, &t, &s, &bunch));
    assert!(bunch.iter().all(|d| d.root == 4));
    let (root, hits) = shadow::common_root(&g, &t, &s, 0, &bunch, 2).unwrap();
    assert_eq!((root, hits), (4, vec![0, 1]));

    let (g, t) = array("bunch-blocked@1");
    let s = shadow::build_shadowing(&g, &t, ShadowStrategy::LeastIndex, &t.u);
    assert!(shadow::find_bunch(&g, &t, &s, 2).unwrap().is_none());
    assert!(shadow::find_bunch(&g, &t, &s, 1).unwrap().is_some());
}

#[test]
fn daisy_fixtures() {
    let (g, t) = array("daisy@1");
    let s = shadow::build_shadowing(&g, &t, ShadowStrategy::LeastIndex, &t.u);
    let d = shadow::find_daisy(&g, &t, &s, &t.u).unwrap().unwrap();
    assert_eq!((d.root, d.eye), (4, 10));
    let (g, t) = array("no-daisy@1");
    let s = shadow::build_shadowing(&g, &t, ShadowStrategy::LeastIndex, &t.u);
    assert!(shadow::find_daisy(&g, &t, &s, &t.u).unwrap().is_none());
}

#[test]
fn strong_triple_fixture_and_full_privatization() {
    let (g, t) = array("strong-triple@1");
    let s = shadow::build_shadowing(&g, &t, ShadowStrategy::LeastIndex, &t.u);
    let limits = Limits::default();
    let found = shadow::strong_triples(&g, &t, &s, &VertexSet::new());
    assert!(found.iter().any(|x| (x.i, x.a, x.b, x.c) == (0, 1, 2, 3)));
    // every U-vertex is a pendant on its own Z-vertex, so Π = U
    let p = shadow::privatize(&g, &t, &limits).unwrap();
    assert_eq!(p.privatization.pi, t.u);
    let audit = shadow::strong_triple_audit(&g, &p.array, &s, &p.privatization).unwrap();
    assert!(audit.triples.is_empty() && audit.orientation_proper);
    assert_eq!(audit.report.verdicts[0].status, VerdictStatus::Pass);
    let single = TemplateArray {
        sequence: t.sequence[..1].to_vec(),
        u: VertexSet::new(),
        params: t.params.clone(),
        cleanliness: Cleanliness::Clean2,
    };
    let s1 = shadow::build_shadowing(&g, &single, ShadowStrategy::LeastIndex, &single.u);
    assert!(shadow::strong_triples(&g, &single, &s1, &VertexSet::new()).is_empty());
}

#[test]
fn privatize_pendants_on_one_z_vertex() {
    // δτ = 2: two pendant U-vertices on z = 4
    let mut p = fixture_params(2);
    p.tau = 2;
    let e = [(0, 2), (0, 3), (1, 2), (1, 3), (4, 0), (5, 4), (6, 4)];
    let g = Graph::from_edges(7, e).unwrap();
    let core = CoreWitness {
        parts: vec![VertexSet::from([0, 1]), VertexSet::from([2, 3])],
    };
    let t = TemplateArray {
        sequence: vec![Template {
            h: core.vertices().union(&VertexSet::from([4])),
            core,
        }],
        u: VertexSet::from([5, 6]),
        params: p,
        cleanliness: Cleanliness::Clean2,
    };
    assert!(t.declared_holds(&g));
    let out = shadow::privatize(&g, &t, &Limits::default()).unwrap();
    assert_eq!(out.privatization.pi, VertexSet::from([5, 6]));
    assert_eq!(out.privatization.private_neighbor, vec![(5, 4), (6, 4)]);
    assert_eq!(out.privatization.cover_decomposition.len(), 2);
    assert!(out.privatization.violations(&g, &out.array).is_empty());
}
