use cantorkit::cert::{verify_certificate, Certificate, Payload};
use cantorkit::density::{density_witness_greedy, is_density_witness};
use cantorkit::extract::in_family;
use cantorkit::format::{tree_from_text, tree_to_text};
use cantorkit::forcing::{is_condition, splitting_extend};
use cantorkit::gen::gen_random_positive_tree;
use cantorkit::{extract_perfect, prune, BitString, ClopenTree, Condition, Dyadic, Error, GenSpec};
use proptest::prelude::*;

fn d(s: &str) -> Dyadic {
    s.parse().unwrap()
}

fn arb_tree(max_depth: u32) -> impl Strategy<Value = ClopenTree> {
    (1..=max_depth).prop_flat_map(|depth| {
        proptest::collection::vec(any::<bool>(), 1usize << depth).prop_map(move |bits| {
            let leaves = (0..bits.len() as u64).filter(|&i| bits[i as usize]);
            ClopenTree::from_leaf_indices(depth, leaves).unwrap()
        })
    })
}

fn arb_epsilon() -> impl Strategy<Value = Dyadic> {
    prop_oneof![Just(d("1/2")), Just(d("1/4")), Just(d("3/8")), Just(d("1/16"))]
}

proptest! {
    #[test]
    fn prune_keeps_mass_and_is_idempotent(t in arb_tree(9), eps in arb_epsilon()) {
        match prune(&t, &eps) {
            Ok((s, report)) => {
                prop_assert!(s.is_subset_of(&t));
                prop_assert!(s.measure() > &t.measure() - &eps);
                prop_assert_eq!(report.output_measure, s.measure());
                let (again, second) = prune(&s, &eps).unwrap();
                prop_assert_eq!(again, s);
                prop_assert!(second.pruned.is_empty());
            }
            Err(Error::EmptyAfterPruning(_)) => prop_assert!(t.measure() < eps),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn greedy_witness_is_least(t in arb_tree(8), eps in arb_epsilon()) {
        prop_assume!(!t.is_empty());
        let w = density_witness_greedy(&t, &eps).unwrap();
        prop_assert!(is_density_witness(&t, &w, &eps));
        let first = BitString::all_up_to(t.depth()).find(|s| is_density_witness(&t, s, &eps));
        prop_assert_eq!(first, Some(w));
    }

    #[test]
    fn tree_text_round_trips(t in arb_tree(10)) {
        let text = tree_to_text(&t);
        let back = tree_from_text(&text).unwrap();
        prop_assert_eq!(tree_to_text(&back), text);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn splitting_stays_a_condition(seed in any::<u64>(), steps in 1usize..4) {
        let t = gen_random_positive_tree(&GenSpec::new(8, d("15/16"), seed).unwrap()).unwrap();
        let mut c = Condition::initial(t.clone(), t);
        for n in 1..=steps {
            c = splitting_extend(&c).unwrap();
            prop_assert_eq!(c.frontier.binary_shape(), Some(n as u32 + 1));
            prop_assert!(is_condition(&c.frontier, &c.reservoir, &c.ambient));
        }
    }
}

#[test]
fn generate_extract_certify() {
    for seed in 0..20 {
        let spec = GenSpec::new(9, d("13/16"), seed).unwrap();
        let input = gen_random_positive_tree(&spec).unwrap();
        let ex = extract_perfect(&input, &d("1/2")).unwrap();
        let params = &ex.certificate.params;
        assert!(in_family(ex.output(), &ex.pruned, &params.delta, &params.schedule));
        assert!(ex.certificate.verify(&input));
        let cert = Certificate::issue(Payload::Extract {
            input,
            extraction: ex.certificate,
        });
        let back = Certificate::from_text(&cert.to_text()).unwrap();
        assert!(verify_certificate(&back).unwrap());
    }
}

#[test]
fn extraction_rejects_small_measure() {
    let spec = GenSpec::new(6, d("1/4"), 0).unwrap();
    let t = gen_random_positive_tree(&spec).unwrap();
    assert!(extract_perfect(&t, &d("1/2")).is_err());
}
