use psc_plumb::par::Exec;
use psc_plumb::pipeline::{run_construction, NiceCoordinateSpec, PipelineConfig, SpecOrigin};
use psc_plumb::plumbing::{Edge, PlumbingTree};
use psc_plumb::profile::default_ladder;

fn quick(p: usize, q: usize) -> PipelineConfig {
    PipelineConfig {
        v_spec: NiceCoordinateSpec::new(p, q, std::f64::consts::FRAC_PI_4, 0.5),
        grid: 256,
        oracle_samples: 8,
        ladder: default_ladder()[..1].to_vec(),
        ..Default::default()
    }
}

#[test]
fn two_vertex_chain_consumes_derived_spec() {
    let cfg = quick(3, 3);
    let run = run_construction(&PlumbingTree::tangent_chain(2, 1), &cfg.v_spec, &cfg, 1, Exec::Parallel).unwrap();
    let steps = &run.certificate.steps;
    assert_eq!(steps.len(), 2);
    assert_eq!(steps[1].spec_in, steps[0].spec_out.unwrap());
    assert_eq!(steps[1].spec_in.origin, SpecOrigin::Derived { from_step: 0 });
    for s in steps {
        assert!(s.error.is_none());
        let failing: Vec<&str> = s.checks.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
        assert_eq!(failing, ["z2.mean_curvature"], "step {}", s.index);
    }
    assert_eq!(run.stored.len(), 2);
}

#[test]
fn children_use_their_parents_chart() {
    // star with centre 1: order 1, 0, 2, 3 from root 1
    let mut tree = PlumbingTree::tangent_chain(3, 1);
    tree.vertices.push(tree.vertices[0].clone());
    tree.edges = vec![Edge { v: 1, w: 0, sign: 1 }, Edge { v: 1, w: 2, sign: 1 }, Edge { v: 1, w: 3, sign: -1 }];
    let cfg = PipelineConfig { root: 1, ..quick(3, 3) };
    let run = run_construction(&tree, &cfg.v_spec, &cfg, 1, Exec::Parallel).unwrap();
    let steps = &run.certificate.steps;
    assert_eq!(steps.iter().map(|s| s.vertex).collect::<Vec<_>>(), [1, 0, 2, 3]);
    assert_eq!(steps[0].spare_coordinates, 3);
    for s in &steps[1..] {
        assert_eq!(s.spec_in.origin, SpecOrigin::Derived { from_step: 0 });
        assert_eq!(s.spare_coordinates, 0);
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let cfg = quick(4, 4);
    assert!(run_construction(&PlumbingTree::tangent_chain(1, 1), &cfg.v_spec, &cfg, 0, Exec::Sequential).is_err());
}
