mod common;

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;

use common::*;
use graphtext::graph::GraphParts;
use graphtext::instance::build_nc_instance;
use graphtext::{
    enumerate_family, parse_structure, render_structure, sample_neighborhood, Error, Graph, PromptId, PromptSpec,
    SampleContext, Task, TokenCounter,
};
use proptest::prelude::*;

fn texted_graph(n: usize, edges: &[(usize, usize)], texts: Vec<Option<String>>, edge_text: bool) -> Graph {
    Graph::from_parts(GraphParts {
        num_nodes: n,
        edges: edges
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| (a, b, (edge_text && i % 2 == 0).then(|| format!("cites (ref {i}) \\ ok"))))
            .collect(),
        features: vec![0.0; n],
        dim: 1,
        texts,
        labels: (0..n).map(|i| Some(i % 2)).collect(),
        categories: vec!["Theory".into(), "Neural Networks".into()],
        ..GraphParts::default()
    })
    .unwrap()
    .0
}

fn nc_specs() -> Vec<PromptSpec> {
    enumerate_family(&[Task::NodeClassification]).unwrap()
}

fn arb_texted() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<Option<String>>)> {
    (2usize..25).prop_flat_map(|n| {
        let edges = prop::collection::vec((0..n, 0..n), 0..n * 3);
        let text = prop_oneof![
            Just(None),
            prop::sample::select(NASTY_TEXTS).prop_map(|t| Some(t.to_string())),
            "[ -~()\\\\,<>]{0,24}".prop_map(Some),
        ];
        (Just(n), edges, prop::collection::vec(text, n))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_inverts_render(
        (n, edges, texts) in arb_texted(),
        budget in 20usize..400,
        seed in any::<u64>(),
        edge_text in any::<bool>(),
    ) {
        let g = texted_graph(n, &edges, texts.clone(), edge_text);
        let counter = TokenCounter::whitespace(budget);
        for spec in nc_specs() {
            for v in 0..n {
                let sample = match sample_neighborhood(&g, v, &spec, &counter, seed, &SampleContext::default()) {
                    Ok(s) => s,
                    Err(Error::BudgetTooSmall { .. }) => continue,
                    Err(e) => return Err(TestCaseError::fail(e.to_string())),
                };
                let text = render_structure(&g, &sample, &spec).unwrap().text;
                let parsed = parse_structure(&text).unwrap();
                prop_assert_eq!(parsed.center, v);
                let mut levels = parsed.levels.clone();
                levels.resize(sample.chosen.len(), Vec::new());
                prop_assert_eq!(&levels, &sample.chosen, "{}", text);
                if let Some(paths) = &sample.chosen_paths {
                    for k in 1..paths.len() {
                        let got = parsed.paths.get(k).cloned().flatten().unwrap_or_default();
                        prop_assert_eq!(&got, &paths[k]);
                    }
                }
                if spec.use_features {
                    for (u, t) in &parsed.node_features {
                        prop_assert_eq!(Some(t.as_str()), texts[*u].as_deref());
                    }
                }
            }
        }
    }

    #[test]
    fn parser_never_panics(s in "\\PC{0,80}") {
        let _ = parse_structure(&s);
    }

    #[test]
    fn parser_rejects_mutations((n, edges, texts) in arb_texted(), cut in 1usize..40) {
        let g = texted_graph(n, &edges, texts, false);
        let spec = nc_specs()[9];
        let sample = sample_neighborhood(&g, 0, &spec, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap();
        let text = render_structure(&g, &sample, &spec).unwrap().text;
        // Dropping the final period always breaks the grammar.
        let truncated = &text[..text.len() - 1];
        prop_assert!(parse_structure(truncated).is_err());
        let _ = parse_structure(&text[..text.floor_char_boundary(text.len().saturating_sub(cut))]);
    }
}

#[test]
fn rendering_is_injective_over_samples() {
    let fx = labeled_graph(7, 40, 0.08, 2, NASTY_TEXTS);
    for spec in nc_specs() {
        let mut seen: HashMap<String, Vec<Vec<usize>>> = HashMap::new();
        for v in 0..40 {
            for budget in [25, 40, 60, 90, 200] {
                for seed in 0..4 {
                    let counter = TokenCounter::whitespace(budget);
                    let Ok(s) = sample_neighborhood(&fx.graph, v, &spec, &counter, seed, &SampleContext::default()) else {
                        continue;
                    };
                    let text = render_structure(&fx.graph, &s, &spec).unwrap().text;
                    let key = (v, &s.chosen);
                    if let Some(prev) = seen.get(&text) {
                        assert_eq!(prev, key.1, "two samples of node {v} render to {text}");
                    }
                    seen.insert(text, s.chosen.clone());
                }
            }
        }
    }
}

#[test]
fn escaping_keeps_delimiters_out_of_features() {
    let texts = NASTY_TEXTS.iter().map(|t| Some(t.to_string())).collect::<Vec<_>>();
    let n = texts.len();
    let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
    let g = texted_graph(n, &edges, texts, false);
    let spec = PromptSpec::new(Task::NodeClassification, true, 1, false).unwrap();
    let s = sample_neighborhood(&g, 0, &spec, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap();
    let text = render_structure(&g, &s, &spec).unwrap().text;
    // Outside escapes, parentheses balance and never nest.
    let mut depth = 0i32;
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => {
                assert!(matches!(chars.next(), Some('(' | ')' | '\\')), "stray escape in {text}");
            }
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        assert!((0..=1).contains(&depth), "unbalanced in {text}");
    }
    assert_eq!(depth, 0);
    let parsed = parse_structure(&text).unwrap();
    assert_eq!(parsed.node_features.len(), n, "center plus every leaf, empty title included");
}

#[test]
fn path_graph_examples() {
    let g = plain_graph(3, &[(0, 1), (1, 2)]);
    let full = |spec: PromptSpec| {
        let s = sample_neighborhood(&g, 0, &spec, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap();
        render_structure(&g, &s, &spec).unwrap().text
    };
    let plain = PromptSpec::new(Task::NodeClassification, false, 2, false).unwrap();
    assert_eq!(
        full(plain),
        "<node_0> is connected with <node_1> within one hop. <node_0> is connected with <node_2> within two hops."
    );
    let paths = PromptSpec::new(Task::NodeClassification, false, 2, true).unwrap();
    assert_eq!(
        full(paths),
        "<node_0> is connected with <node_1> within one hop. <node_0> is connected with <node_2> within two hops through <node_1>, respectively."
    );
    let g2 = plain_graph(2, &[(0, 1)]);
    let s = sample_neighborhood(&g2, 0, &plain, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap();
    assert_eq!(
        render_structure(&g2, &s, &plain).unwrap().text,
        "<node_0> is connected with <node_1> within one hop."
    );
}

#[test]
fn family_and_ids() {
    assert_eq!(nc_specs().len(), 10);
    assert_eq!(enumerate_family(&[Task::LpGenerative]).unwrap().len(), 10);
    assert!(enumerate_family(&[]).is_err());
    for task in [Task::NodeClassification, Task::LpGenerative, Task::LpDiscriminative] {
        for spec in enumerate_family(&[task]).unwrap() {
            assert_eq!(spec.id().decode_as(task).unwrap(), spec);
            assert_eq!(spec.id().to_string().parse::<PromptId>().unwrap(), spec.id());
        }
    }
    assert!(PromptSpec::new(Task::NodeClassification, false, 1, true).is_err());
    assert!("1114".parse::<PromptId>().and_then(PromptId::decode).is_err());
}

fn golden_graph() -> Graph {
    let texts = vec![
        Some("Graph neural networks (a survey)".to_string()),
        Some("Label propagation".to_string()),
        None,
        Some("Attention, revisited \\ v2".to_string()),
        Some("Spectral clustering".to_string()),
        Some("Random walks".to_string()),
    ];
    texted_graph(6, &[(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5), (1, 2)], texts, true)
}

#[test]
fn golden_prompts() {
    let g = golden_graph();
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/prompts");
    fs::create_dir_all(&dir).unwrap();
    let mut specs = nc_specs();
    specs.extend(enumerate_family(&[Task::LpGenerative]).unwrap());
    for spec in specs {
        let s = sample_neighborhood(&g, 0, &spec, &TokenCounter::unlimited(), 0, &SampleContext::default()).unwrap();
        let structure = render_structure(&g, &s, &spec).unwrap().text;
        let mut got = format!("{structure}\n");
        if spec.task == Task::NodeClassification {
            got.push_str(&build_nc_instance(&g, 0, &spec, &s).unwrap().input);
            got.push('\n');
        }
        let path = dir.join(format!("{}.golden.txt", spec.id()));
        match fs::read_to_string(&path) {
            Ok(want) => assert_eq!(got, want, "golden mismatch for {}", spec.id()),
            // First run writes the snapshot; review it before committing.
            Err(_) => fs::write(&path, &got).unwrap(),
        }
    }
}
