use super::*;
use crate::change::build_pair_change;
use crate::distiller::decl::DeclChange;
use crate::distiller::parser::{parse, GrammarId};
use crate::distiller::LineSpan;
use crate::linker::{align_pairs, extract_method_pairs, CodeCommentPair, PairKind};

fn pair(comment: &str, span: LineSpan, code: &[(usize, &str)]) -> CodeCommentPair {
    CodeCommentPair {
        kind: PairKind::Block,
        comment_text: comment.to_string(),
        comment_span: span,
        code_lines: code.iter().map(|(n, t)| (*n, t.to_string())).collect(),
        enclosing_method_signature: Some("f()".into()),
        enclosing_class: Some("A".into()),
    }
}

fn change(old: CodeCommentPair, new: CodeCommentPair) -> PairChange {
    let ops = crate::distiller::diff(
        &crate::change::pair_tree(&old, GrammarId::CurlyBrace).unwrap(),
        &crate::change::pair_tree(&new, GrammarId::CurlyBrace).unwrap(),
    );
    PairChange {
        label: crate::change::label_pair(&old.comment_text, &new.comment_text),
        old_pair: old,
        new_pair: new,
        ops,
        decl: DeclChange::default(),
        refactorings: RefactoringFlags::default(),
    }
}

fn value(v: &[f64], name: &str) -> f64 {
    let i = feature_specs().iter().position(|s| s.name == name).unwrap();
    v[i]
}

const SERNO_METHOD: &str = "\
public class SernoConfig {
    /**
     * Configures the serial number size.
     */
    public void configure(boolean compact) {
        //Default serno size 8 bytes(64bits)
        setDefaults();
        //Set serno size 8 bytes(64 bits)
        setSernoOctetSize(8);
    }
}
";

#[test]
fn layout() {
    let specs = feature_specs();
    assert_eq!(specs.len(), FEATURE_COUNT);
    let names: HashSet<&str> = specs.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names.len(), FEATURE_COUNT);
    assert_eq!(specs.iter().filter(|s| s.group == FeatureGroup::Code).count(), 53);
    assert_eq!(specs.iter().filter(|s| s.group == FeatureGroup::Comment).count(), 14);
    assert_eq!(specs.iter().filter(|s| s.group == FeatureGroup::Relation).count(), 4);
    assert_eq!(specs[6].name, "stmt_if_add");
    assert_eq!(specs[32].name, "stmt_variable_declaration_update");
}

#[test]
fn literal_argument_change() {
    let new_src = SERNO_METHOD.replace("setSernoOctetSize(8)", "setSernoOctetSize(4)");
    let (a, b) = (
        parse(SERNO_METHOD, GrammarId::CurlyBrace).unwrap(),
        parse(&new_src, GrammarId::CurlyBrace).unwrap(),
    );
    let aligned = align_pairs(&extract_method_pairs(SERNO_METHOD, &a), &extract_method_pairs(&new_src, &b));
    let p = &aligned[0];
    let pc = build_pair_change(
        p.old.as_ref().unwrap(),
        p.new.as_ref().unwrap(),
        &a,
        &b,
        GrammarId::CurlyBrace,
    )
    .unwrap();
    assert_eq!(pc.label, 0);
    let tokens = PairTokens::of(&pc);
    let v = code_features(&pc, &tokens, &FeatureConfig::default());
    assert_eq!(value(&v, "contains_return"), 0.0);
    assert_eq!(value(&v, "number_of_changes"), 1.0);
    assert_eq!(value(&v, "stmt_method_invocation_update"), 1.0);
    assert_eq!(v[6..33].iter().sum::<f64>(), 1.0);
    // Comment spans lines 2-4, body code is lines 7 and 9.
    assert_eq!(value(&v, "code_line_proportion"), 2.0 / 5.0);
    // One changed old line over five pair lines.
    assert_eq!(value(&v, "changed_line_proportion"), 1.0 / 5.0);
}

#[test]
fn code_line_proportion_example() {
    let code: Vec<(usize, String)> = (3..11).map(|n| (n, format!("x{n}();"))).collect();
    let code_ref: Vec<(usize, &str)> = code.iter().map(|(n, t)| (*n, t.as_str())).collect();
    let p = pair("// a\n// b", LineSpan::new(1, 2), &code_ref);
    let pc = change(p.clone(), p);
    let v = code_features(&pc, &PairTokens::of(&pc), &FeatureConfig::default());
    assert_eq!(value(&v, "code_line_proportion"), 0.8);
    assert_eq!(value(&v, "changed_line_proportion"), 0.0);
}

#[test]
fn contains_return_readings() {
    let old = pair("/** @return the size */", LineSpan::new(1, 1), &[(2, "return size;")]);
    let pc = change(old.clone(), old);
    let t = PairTokens::of(&pc);
    assert_eq!(value(&code_features(&pc, &t, &FeatureConfig::default()), "contains_return"), 1.0);
    let no_code = pair("/** @return the size */", LineSpan::new(1, 1), &[(2, "log(size);")]);
    let pc = change(no_code.clone(), no_code);
    let t = PairTokens::of(&pc);
    assert_eq!(value(&code_features(&pc, &t, &FeatureConfig::default()), "contains_return"), 0.0);
    let tag = FeatureConfig {
        return_from_comment_tag: true,
        ..FeatureConfig::default()
    };
    assert_eq!(value(&code_features(&pc, &t, &tag), "contains_return"), 1.0);
}

#[test]
fn binarized_counts() {
    let old = pair("// c", LineSpan::new(1, 1), &[(2, "a();"), (3, "b();")]);
    let new = pair("// c", LineSpan::new(1, 1), &[(2, "x = 1;")]);
    let pc = change(old, new);
    let t = PairTokens::of(&pc);
    let counts = code_features(&pc, &t, &FeatureConfig::default());
    assert_eq!(value(&counts, "stmt_method_invocation_delete"), 2.0);
    let flags = code_features(
        &pc,
        &t,
        &FeatureConfig {
            binarize_counts: true,
            ..FeatureConfig::default()
        },
    );
    assert_eq!(value(&flags, "stmt_method_invocation_delete"), 1.0);
}

#[test]
fn comment_keywords() {
    let v = comment_features("// TODO handle nulls");
    assert_eq!(v[..4], [1.0, 0.0, 0.0, 0.0]);
    let v = comment_features("/* FIXED in v2 */");
    assert_eq!(v[..4], [0.0, 1.0, 0.0, 0.0]);
    let v = comment_features("// Bug: version skew");
    assert_eq!(v[..4], [0.0, 0.0, 1.0, 1.0]);
    // set: verb; serno, size, byte: noun; 4: numeral.
    let v = comment_features("// Set serno size 4 bytes");
    let pos = &v[4..];
    assert_eq!(pos[0], 0.6);
    assert_eq!(pos[1], 0.2);
    assert_eq!(pos[8], 0.2);
}

fn seq(xs: &[&str], origin: Origin) -> TokenSequence {
    TokenSequence::new(xs.iter().map(|s| s.to_string()).collect(), origin)
}

// Independent evaluation of the similarity chain straight from the vectors.
mod oracle {
    pub fn cos(a: &[f64], b: &[f64]) -> f64 {
        let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        ab / (na * nb)
    }

    pub fn ww(vecs: &[(&str, Vec<f64>)], a: &str, b: &str) -> f64 {
        if a == b {
            return 1.0;
        }
        let get = |w: &str| vecs.iter().find(|(x, _)| *x == w).map(|(_, v)| v.clone());
        match (get(a), get(b)) {
            (Some(x), Some(y)) => cos(&x, &y),
            _ => 0.0,
        }
    }

    pub fn ws(vecs: &[(&str, Vec<f64>)], w: &str, s: &[String]) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for x in s {
            best = best.max(ww(vecs, w, x));
        }
        if s.is_empty() {
            0.0
        } else {
            best
        }
    }

    pub fn ss(vecs: &[(&str, Vec<f64>)], a: &[String], b: &[String]) -> f64 {
        if a.is_empty() || b.is_empty() {
            return 0.0;
        }
        let ab: f64 = a.iter().map(|w| ws(vecs, w, b)).sum::<f64>() / a.len() as f64;
        let ba: f64 = b.iter().map(|w| ws(vecs, w, a)).sum::<f64>() / b.len() as f64;
        (ab + ba) / 2.0
    }
}

#[test]
fn relation_features_match_oracle() {
    let vecs: Vec<(&str, Vec<f64>)> = vec![
        ("set", vec![0.9, 0.1, 0.0]),
        ("size", vec![0.2, 0.8, 0.1]),
        ("serno", vec![0.1, 0.3, 0.9]),
        ("octet", vec![0.5, 0.5, 0.2]),
        ("get", vec![-0.7, 0.2, 0.4]),
    ];
    let model = EmbeddingModel::from_vectors(&vecs).unwrap();
    let tokens = PairTokens {
        comment: seq(&["set", "serno", "size"], Origin::Comment),
        old_code: seq(&["set", "serno", "octet", "size", "8"], Origin::Code),
        new_code: seq(&["get", "octet", "size", "4"], Origin::Code),
        old_statements: seq(&["set", "serno", "octet", "size", "8"], Origin::Code),
        new_statements: seq(&["get", "octet", "size", "4"], Origin::Code),
    };
    let got = relation_features(&tokens, &model);
    let t = &tokens;
    let e_smt = (oracle::ss(&vecs, &t.comment.tokens, &t.old_statements.tokens)
        - oracle::ss(&vecs, &t.comment.tokens, &t.new_statements.tokens))
    .abs();
    let mut e_tok = 0.0;
    for w in &t.comment.tokens {
        e_tok += (oracle::ws(&vecs, w, &t.old_code.tokens) - oracle::ws(&vecs, w, &t.new_code.tokens)).abs();
    }
    e_tok /= 3.0;
    let e_code = (oracle::ss(&vecs, &t.comment.tokens, &t.old_code.tokens)
        - oracle::ss(&vecs, &t.comment.tokens, &t.new_code.tokens))
    .abs();
    assert!((got[0] - e_smt).abs() < 1e-10);
    assert!((got[1] - e_tok).abs() < 1e-10);
    assert!((got[2] - e_code).abs() < 1e-10);
    // Shared with old code: set, serno, size. With new code: size.
    assert_eq!(got[3], 2.0);
}

#[test]
fn unchanged_code_has_zero_code_distances() {
    let model = EmbeddingModel::from_vectors(&[("a", vec![1.0, 0.0]), ("b", vec![0.3, 0.4])]).unwrap();
    let tokens = PairTokens {
        comment: seq(&["a"], Origin::Comment),
        old_code: seq(&["b", "c"], Origin::Code),
        new_code: seq(&["b", "c"], Origin::Code),
        old_statements: seq(&[], Origin::Code),
        new_statements: seq(&[], Origin::Code),
    };
    assert_eq!(relation_features(&tokens, &model), [0.0, 0.0, 0.0, 0.0]);
}

#[test]
fn common_token_counting() {
    let model = EmbeddingModel::from_vectors(&[("a", vec![1.0])]).unwrap();
    let tokens = PairTokens {
        comment: seq(&["w", "x", "y", "z", "q"], Origin::Comment),
        old_code: seq(&["w", "x", "y", "z", "z"], Origin::Code),
        new_code: seq(&["w", "k"], Origin::Code),
        old_statements: seq(&[], Origin::Code),
        new_statements: seq(&[], Origin::Code),
    };
    assert_eq!(relation_features(&tokens, &model)[3], 3.0);
}
