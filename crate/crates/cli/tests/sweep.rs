use diffauc::config::{ExperimentConfig, GraphSource, SellerRule};
use diffauc::graph::Generator;
use diffauc::mech::{run_truthful, Demand, MechanismKind};
use diffauc::sweep::{load_graph, run_trial, summarize, sweep, write_csv, SCHEMA};
use diffusion_auction::fixtures::seven_buyer_tree;
use diffusion_auction::multidemand::{MultiInstance, MultiProfile};
use diffusion_auction::valuation::ValuationModel;
use diffusion_auction::PriorityStrategy;

fn small(demand: Demand) -> ExperimentConfig {
    ExperimentConfig {
        graph: GraphSource::Generated(Generator::PreferentialAttachment { n: 80, k: 2 }),
        mechanisms: vec![MechanismKind::Mudan, MechanismKind::Mudar],
        strategies: vec![
            PriorityStrategy::Degree,
            PriorityStrategy::NewAgent,
            PriorityStrategy::Random { seed: 3 },
        ],
        model: ValuationModel::degroot(),
        ceiling: 1000.0,
        demand,
        m: 5,
        trials: 4,
        seller: SellerRule::Uniform,
        seed: 17,
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let rows = sweep(cfg, false).unwrap();
    let mut out = Vec::new();
    write_csv(cfg, &rows, false, &mut out).unwrap();
    out
}

#[test]
fn same_seed_same_bytes() {
    let cfg = ExperimentConfig { trials: 2, ..small(Demand::Multi) };
    let a = csv_bytes(&cfg);
    assert_eq!(a, csv_bytes(&cfg));
    let other = ExperimentConfig { seed: 18, ..cfg.clone() };
    assert_ne!(a, csv_bytes(&other));
}

#[test]
fn csv_layout() {
    let cfg = ExperimentConfig { trials: 2, ..small(Demand::Single) };
    let text = String::from_utf8(csv_bytes(&cfg)).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), format!("# schema={SCHEMA}"));
    let comments: Vec<&str> = text.lines().skip(1).take_while(|l| l.starts_with('#')).collect();
    let body: String = comments.iter().map(|l| format!("{}\n", &l[2..])).collect();
    assert_eq!(ExperimentConfig::parse(&body).unwrap(), cfg);
    let rest: Vec<&str> = text.lines().skip(1 + comments.len()).collect();
    assert_eq!(
        rest[0],
        "trial,seller,buyers,mechanism,strategy,model,m,sw,rv,sw_opt,sw_per_item,rv_per_item"
    );
    assert_eq!(rest.len(), 1 + 2 * 2 * 3);
    assert!(rest[1].starts_with("0,"));
    assert!(rest[1].contains(",mudan,degree,degroot,5,"));

    let rows = sweep(&cfg, true).unwrap();
    let mut out = Vec::new();
    write_csv(&cfg, &rows, true, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let header = text.lines().find(|l| l.starts_with("trial,")).unwrap();
    assert!(header.ends_with(",runtime_ms"));
}

#[test]
fn trials_can_be_rerun_alone() {
    let cfg = small(Demand::Multi);
    let rows = sweep(&cfg, false).unwrap();
    let g = load_graph(&cfg).unwrap();
    let per = cfg.mechanisms.len() * cfg.strategies.len();
    for t in [3, 1] {
        assert_eq!(run_trial(&cfg, &g, t, false).unwrap(), rows[t * per..(t + 1) * per]);
    }
}

#[test]
fn mudar_is_efficient_and_mudan_is_bounded() {
    for demand in [Demand::Single, Demand::Multi] {
        let rows = sweep(&small(demand), false).unwrap();
        for r in &rows {
            assert!(r.sw <= r.sw_opt + 1e-6, "{r:?}");
            assert!(r.sw >= 0.0);
            assert_eq!(r.sw_per_item, r.sw / r.m as f64);
            if r.mechanism == MechanismKind::Mudar {
                assert!((r.sw - r.sw_opt).abs() <= 1e-6 * r.sw_opt.max(1.0), "{r:?}");
            } else {
                assert!(r.rv >= 0.0, "{r:?}");
            }
        }
    }
}

#[test]
fn summary_means() {
    let rows = sweep(&small(Demand::Single), false).unwrap();
    let s = summarize(&rows);
    assert_eq!(s.len(), 6);
    assert_eq!((s[0].mechanism, s[0].strategy.as_str()), (MechanismKind::Mudan, "degree"));
    let direct: f64 = rows
        .iter()
        .filter(|r| r.mechanism == MechanismKind::Mudar && r.strategy == "new_agent")
        .map(|r| r.sw)
        .sum::<f64>()
        / 4.0;
    let got = s
        .iter()
        .find(|x| x.mechanism == MechanismKind::Mudar && x.strategy == "new_agent")
        .unwrap();
    assert_eq!(got.trials, 4);
    assert!((got.mean_sw - direct).abs() < 1e-9);
}

#[test]
fn sellers_without_out_edges_are_skipped() {
    // A tree points away from node 0: leaves can never sell.
    let cfg = ExperimentConfig {
        graph: GraphSource::Generated(Generator::Tree { n: 30 }),
        mechanisms: vec![MechanismKind::Mudan],
        strategies: vec![PriorityStrategy::Degree],
        demand: Demand::Single,
        trials: 25,
        ..small(Demand::Single)
    };
    let g = load_graph(&cfg).unwrap();
    for r in sweep(&cfg, false).unwrap() {
        let node = g.node_of(r.seller).unwrap();
        assert!(!g.out_neighbors(node).is_empty());
        assert!(r.buyers >= 1);
    }
}

#[test]
fn fixed_seller_and_bad_inputs() {
    let mut cfg = ExperimentConfig {
        seller: SellerRule::Fixed(0),
        trials: 2,
        ..small(Demand::Single)
    };
    let rows = sweep(&cfg, false).unwrap();
    assert!(rows.iter().all(|r| r.seller == 0 && r.buyers == 79));
    cfg.seller = SellerRule::Fixed(1000);
    assert!(sweep(&cfg, false).is_err());
    cfg.seller = SellerRule::Uniform;
    cfg.mechanisms = vec![MechanismKind::Dnamu];
    cfg.demand = Demand::Multi;
    assert!(sweep(&cfg, false).is_err());
}

#[test]
fn graph_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    std::fs::write(&path, "# chain\n100 200\n200 300\n").unwrap();
    let cfg = ExperimentConfig {
        graph: GraphSource::File { path, undirected: true },
        seller: SellerRule::Fixed(200),
        demand: Demand::Single,
        m: 1,
        trials: 3,
        ..small(Demand::Single)
    };
    for r in sweep(&cfg, false).unwrap() {
        assert_eq!((r.seller, r.buyers), (200, 2));
    }
}

#[test]
fn single_demand_run_uses_the_top_slot() {
    let sb = seven_buyer_tree(4);
    let multi = MultiInstance::new(
        4,
        sb.seller_neighbors().iter().copied(),
        sb.agents()
            .map(|a| {
                let v = sb.valuation(a);
                MultiProfile::new(vec![v, v / 2.0, 0.0, 0.0], sb.profile(a).neighbors.iter().copied())
            })
            .collect(),
    )
    .unwrap();
    let r = run_truthful(MechanismKind::Mudan, PriorityStrategy::Degree, Demand::Single, &multi).unwrap();
    assert_eq!(r.social_welfare, 12.5);
    assert_eq!(r.revenue, 7.0);
    assert_eq!(r.items.iter().sum::<usize>(), 4);
    assert_eq!(r.iterations.len(), 4);
    let dn = run_truthful(MechanismKind::Dnamu, PriorityStrategy::Degree, Demand::Single, &multi).unwrap();
    assert!(dn.iterations.is_empty());
    assert!(run_truthful(MechanismKind::Dnamu, PriorityStrategy::Degree, Demand::Multi, &multi).is_err());
    let mm = run_truthful(MechanismKind::Mudar, PriorityStrategy::Degree, Demand::Multi, &multi).unwrap();
    assert_eq!(mm.items.iter().sum::<usize>(), 4);
    assert_eq!(mm.social_welfare, mm.sw_opt);
}
