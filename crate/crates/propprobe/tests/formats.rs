use proptest::prelude::*;

use propprobe::model_io::{dump_model, load_model};
use propprobe::report::{emit_report, parse_report, ReportFormat};
use propprobe::tables::{read_dataset, read_scenarios, write_dataset, write_scenarios};
use propprobe::word2vec::{read_binary, read_text, write_binary, write_text};
use propprobe_core::dataset::{Label, PropertyDataset, Provenance};
use propprobe_core::embedding::EmbeddingMatrix;
use propprobe_core::evaluation::PropertyReport;
use propprobe_core::probes::{LogisticModel, ProbeModel, TrainStatus};
use propprobe_core::synthbench::{ScenarioKind, ScenarioSpec};

fn finite_f32() -> impl Strategy<Value = f32> {
    any::<u32>().prop_map(f32::from_bits).prop_filter("finite", |v| v.is_finite())
}

fn matrix() -> impl Strategy<Value = EmbeddingMatrix> {
    (1usize..8, 1usize..20).prop_flat_map(|(dim, rows)| {
        (
            prop::collection::btree_set("[a-zA-Z0-9_.éü-]{1,12}", rows),
            prop::collection::vec(finite_f32(), dim * rows),
        )
            .prop_map(move |(tokens, data)| {
                let rows = tokens.len();
                EmbeddingMatrix::from_rows(tokens.into_iter().collect(), dim, data[..dim * rows].to_vec()).unwrap()
            })
    })
}

fn bitwise_equal(a: &EmbeddingMatrix, b: &EmbeddingMatrix) -> bool {
    a.vocab() == b.vocab() && a.dim() == b.dim() && a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits())
}

fn provenance() -> impl Strategy<Value = Provenance> {
    prop::sample::select(vec![Provenance::Norm, Provenance::Implied, Provenance::Crowd, Provenance::SeedExpansion])
}

fn report() -> impl Strategy<Value = PropertyReport> {
    (
        "[a-z_]{1,10}",
        (0usize..500, 0usize..500),
        -1.0f64..1.0,
        (prop::option::of(0.0f64..=1.0), prop::option::of(1usize..1000), prop::option::of(0.0f64..=1.0)),
        prop::collection::vec(0.0f64..=1.0, 0..3),
        prop::collection::vec("[a-z]{1,5}", 0..3),
    )
        .prop_map(|(property, (pos, neg), avg_cos, (neigh, best_n, lr), net, oov)| PropertyReport {
            property,
            pos_count: pos,
            neg_count: neg,
            avg_cos,
            f1_neigh: neigh,
            best_n,
            f1_lr: lr,
            f1_net: net,
            oov,
            pool: "full-vocab".into(),
        })
}

fn two_decimals(v: f64) -> f64 {
    format!("{v:.2}").parse().unwrap()
}

proptest! {
    #[test]
    fn word2vec_round_trips_bitwise(m in matrix()) {
        let mut bin = Vec::new();
        write_binary(&mut bin, &m).unwrap();
        prop_assert!(bitwise_equal(&read_binary(&bin[..], "b", None).unwrap(), &m));
        let mut txt = Vec::new();
        write_text(&mut txt, &m).unwrap();
        prop_assert!(bitwise_equal(&read_text(&txt[..], "t", None).unwrap(), &m));
    }

    #[test]
    fn max_vocab_keeps_the_leading_rows(m in matrix(), k in 1usize..25) {
        let mut bin = Vec::new();
        write_binary(&mut bin, &m).unwrap();
        let mut txt = Vec::new();
        write_text(&mut txt, &m).unwrap();
        let expected = m.clone().truncated(k);
        prop_assert!(bitwise_equal(&read_binary(&bin[..], "b", Some(k)).unwrap(), &expected));
        prop_assert!(bitwise_equal(&read_text(&txt[..], "t", Some(k)).unwrap(), &expected));
    }

    #[test]
    fn dataset_tsv_round_trips(
        property in "[a-z_]{1,12}",
        rows in prop::collection::btree_map("[a-z_]{1,8}", (any::<bool>(), provenance()), 0..30),
    ) {
        let mut d = PropertyDataset::new(&property);
        for (w, (pos, prov)) in &rows {
            d.set(w, Label::from_bool(*pos), *prov);
        }
        let mut buf = Vec::new();
        write_dataset(&mut buf, &d).unwrap();
        prop_assert_eq!(read_dataset(&buf[..], "d").unwrap(), d);
    }

    #[test]
    fn report_tsv_round_trips_at_two_decimals(reports in prop::collection::vec(report(), 1..6)) {
        let tsv = emit_report(&reports, ReportFormat::Tsv).unwrap();
        let (back, summary) = parse_report(tsv.as_bytes(), "r").unwrap();
        prop_assert_eq!(summary.is_some(), reports.len() >= 2);
        prop_assert_eq!(back.len(), reports.len());
        for (orig, got) in reports.iter().zip(&back) {
            prop_assert_eq!(&got.property, &orig.property);
            prop_assert_eq!((got.pos_count, got.neg_count, got.best_n), (orig.pos_count, orig.neg_count, orig.best_n));
            prop_assert_eq!(got.avg_cos, two_decimals(orig.avg_cos));
            prop_assert_eq!(got.f1_neigh, orig.f1_neigh.map(two_decimals));
            prop_assert_eq!(got.f1_lr, orig.f1_lr.map(two_decimals));
            let net: Vec<f64> = orig.f1_net.iter().map(|&v| two_decimals(v)).collect();
            prop_assert_eq!(&got.f1_net, &net);
            prop_assert_eq!(&got.oov, &orig.oov);
        }
    }

    #[test]
    fn logistic_dump_round_trips(
        weights in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 1..20),
        bias in -1e6f64..1e6,
        iterations in 0usize..1000,
    ) {
        let model = ProbeModel::Logistic(LogisticModel {
            weights,
            bias,
            config: Default::default(),
            status: TrainStatus { converged: iterations % 2 == 0, iterations },
        });
        prop_assert_eq!(load_model(dump_model(&model).as_bytes(), "m").unwrap(), model);
    }

    #[test]
    fn scenario_tsv_round_trips(
        kind in prop::sample::select(ScenarioKind::ALL.to_vec()),
        dim in 5usize..60,
        counts in (10usize..300, 10usize..300),
        clusters in 2usize..8,
        spread in 0.0f64..3.0,
        strength in 0.01f64..2.0,
        seed in any::<u64>(),
    ) {
        let spec = ScenarioSpec {
            kind,
            dim,
            n_pos: counts.0,
            n_neg: counts.1,
            cluster_count: clusters,
            cluster_spread: spread,
            signal_dims: dim.min(4),
            signal_strength: if kind == ScenarioKind::Absent { 0.0 } else { strength },
            seed,
        };
        prop_assume!(spec.validate().is_ok());
        let mut buf = Vec::new();
        write_scenarios(&mut buf, std::slice::from_ref(&spec)).unwrap();
        prop_assert_eq!(read_scenarios(&buf[..], "s").unwrap(), vec![spec]);
    }
}
