use std::collections::BTreeMap;
use std::path::PathBuf;

use mlp_core::io::{export_graph, load_dataset, parse_dataset, save_dataset};
use mlp_core::mlp_s::similarity_ratio;
use mlp_core::{
    analyze, build_matrix, canonical_key, prepare, AnalysisParams, ClusterAssignment, EncodingMode, Method,
    RawSolution, SimilarityMatrix, SimplificationLevel,
};

const ARITH: SimplificationLevel = SimplificationLevel::ArithmeticOnly;

const TWO_PATHS_A: &str =
    "(x^2+x+sin^2 x+cos^2 x)(2x-3) = (x^2+x+1)(2x-3) = 2x(x^2+x+1) - 3(x^2+x+1) = 2x^3 - x^2 - x - 3";
const TWO_PATHS_B: &str = "(x^2+x+sin^2 x+cos^2 x)(2x-3) = (x^2+x)(2x-3) + (sin^2 x + cos^2 x)(2x-3) \
     = (x^2+x)(2x-3) + 2x - 3 = x(2x^2 - x - 3) + 2x - 3 = 2x^3 - x^2 - x - 3";
const DERIV_A: &str = "((x^3+sin x)/e^x)' = (x^3+sin x)' e^(-x) + (x^3+sin x)(e^(-x))' \
     = (3x^2+cos x)e^(-x) - (x^3+sin x)e^(-x) = (3x^2 - x^3 + cos x - sin x)e^(-x)";
const DERIV_B: &str =
    "((x^3+sin x)/e^x)' = (3x^2 + cos x - (x^3 + sin x))/e^x = (3^x^2 + cos x - (x^3+sin x))/e^x";

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn pair(a: &str, b: &str) -> Vec<RawSolution> {
    vec![RawSolution::text("a", a), RawSolution::text("b", b)]
}

#[test]
fn two_correct_paths_feature_matrix() {
    let (y, feats) = build_matrix(&pair(TWO_PATHS_A, TWO_PATHS_B), ARITH, EncodingMode::Binary).unwrap();
    assert_eq!((y.n_features(), y.n_solutions()), (7, 2));
    assert_eq!((feats[0].len(), feats[1].len()), (4, 5));
    let mut rows = y.to_dense_rows();
    rows.sort();
    let mut expected = vec![
        vec![1, 1],
        vec![1, 0],
        vec![1, 0],
        vec![1, 1],
        vec![0, 1],
        vec![0, 1],
        vec![0, 1],
    ];
    expected.sort();
    assert_eq!(rows, expected);
}

#[test]
fn exact_similarities_of_the_example_pairs() {
    let (y, _) = build_matrix(&pair(TWO_PATHS_A, TWO_PATHS_B), ARITH, EncodingMode::Binary).unwrap();
    let r = similarity_ratio(y.column(0), y.column(1)).unwrap();
    assert_eq!((*r.numer(), *r.denom()), (1, 2));

    let (y, _) = build_matrix(&pair(DERIV_A, DERIV_B), ARITH, EncodingMode::Binary).unwrap();
    let r = similarity_ratio(y.column(0), y.column(1)).unwrap();
    assert_eq!((*r.numer(), *r.denom()), (1, 3));
}

#[test]
fn simplification_examples() {
    assert_eq!(canonical_key("x^2 + x^2", ARITH).unwrap(), canonical_key("2x^2", ARITH).unwrap());
    assert_eq!(
        canonical_key("e^x x^2 / e^(2x)", ARITH).unwrap(),
        canonical_key("x^2 e^(-x)", ARITH).unwrap()
    );
    assert_ne!(
        canonical_key("sin^2 x + cos^2 x + x", ARITH).unwrap(),
        canonical_key("1 + x", ARITH).unwrap()
    );
}

#[test]
fn blank_solutions_are_filtered_on_load() {
    let loaded = load_dataset(&fixture("question1.json")).unwrap();
    assert_eq!(loaded.filtered, vec!["l09".to_string()]);
    assert_eq!(loaded.dataset.solutions.len(), 9);

    let text = r#"{"schema_version": 1, "question_id": "t", "solutions": [
        {"id": "a", "body": "x + 1"}, {"id": "b", "body": "   "}, {"id": "c", "body": "2x"}]}"#;
    let loaded = parse_dataset(text).unwrap();
    assert_eq!(loaded.dataset.solutions.len(), 2);
    assert_eq!(loaded.filtered.len(), 1);
}

#[test]
fn save_then_load_is_identity() {
    let loaded = load_dataset(&fixture("question2.json")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q2.json");
    save_dataset(&path, &loaded.dataset).unwrap();
    assert_eq!(load_dataset(&path).unwrap().dataset, loaded.dataset);
}

#[test]
fn every_question_fixture_featurizes() {
    for name in ["question1.json", "question2.json", "question3.json", "question4.json"] {
        let ds = load_dataset(&fixture(name)).unwrap().dataset;
        let prep = prepare(&ds).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(prep.n(), ds.solutions.len());
        assert!(prep.y.n_features() >= 3, "{name}");
        for i in 0..prep.n() {
            assert_eq!(prep.s.get(i, i), 1.0);
        }
    }
}

#[test]
fn question_one_end_to_end() {
    let ds = load_dataset(&fixture("question1.json")).unwrap().dataset;
    let prep = prepare(&ds).unwrap();
    let a = analyze(&prep, &AnalysisParams { method: Method::Ap, ..AnalysisParams::default() }).unwrap();
    let truth: BTreeMap<String, f64> =
        ds.solutions.iter().map(|s| (s.id.clone(), s.grade.unwrap())).collect();
    let by_id: BTreeMap<String, f64> =
        a.representative_ids().into_iter().map(|id| (id.clone(), truth[&id])).collect();
    let report = a.grade(&prep, &by_id).unwrap();
    assert_eq!(report.solutions.len(), 9);
    for s in &report.solutions {
        assert!((0.0..=3.0).contains(&s.grade));
    }
}

#[test]
fn graph_components_match_block_clusters() {
    // three blocks, no similarity across blocks
    let block = [0, 0, 0, 1, 1, 2, 2, 2, 2];
    let n = block.len();
    let s = SimilarityMatrix::from_fn(n, |i, j| {
        if i == j {
            1.0
        } else if block[i] == block[j] {
            0.5
        } else {
            0.0
        }
    });
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let assignment = ClusterAssignment::from_labels(&block);
    let g = export_graph(&s, &ids, &assignment, &[], &[0, 3, 5], 0.25).unwrap();
    assert_eq!(g.nodes.len(), n);

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for e in &g.edges {
        assert!(e.weight > 0.0 && e.weight <= 1.0);
        let (a, b) = (find(&mut parent, e.source), find(&mut parent, e.target));
        parent[a] = b;
    }
    for i in 0..n {
        for j in 0..n {
            assert_eq!(find(&mut parent, i) == find(&mut parent, j), block[i] == block[j]);
        }
    }

    let strict = export_graph(&s, &ids, &assignment, &[], &[], 1.0).unwrap();
    assert!(strict.edges.is_empty());
}
