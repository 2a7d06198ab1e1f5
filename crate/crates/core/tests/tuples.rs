use gesture_tuples::{enumerate_tuples, tuple_at_index, tuple_count, tuple_index, GestureTuple};
use proptest::prelude::*;

// every sequence over 0..m of length s, filtered by the no-repeat rule
fn brute_force_tuples(m: usize, s: usize) -> Vec<Vec<usize>> {
    let total = m.pow(s as u32);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0; s];
            for d in digits.iter_mut().rev() {
                *d = code % m;
                code /= m;
            }
            digits
        })
        .filter(|d| d.windows(2).all(|w| w[0] != w[1]))
        .collect()
}

#[test]
fn enumeration_matches_brute_force() {
    for m in 2..=10 {
        for s in 1..=4 {
            let got: Vec<Vec<usize>> = enumerate_tuples(m, s)
                .unwrap()
                .into_iter()
                .map(GestureTuple::into_inner)
                .collect();
            let expected = brute_force_tuples(m, s);
            assert_eq!(got.len() as u64, tuple_count(m, s).unwrap(), "m={m} s={s}");
            assert_eq!(got, expected, "m={m} s={s}");
        }
    }
}

#[test]
fn index_is_the_enumeration_position() {
    for m in 2..=6 {
        for s in 1..=4 {
            for (i, t) in enumerate_tuples(m, s).unwrap().iter().enumerate() {
                assert_eq!(tuple_index(t, m).unwrap(), i as u64);
                assert_eq!(&tuple_at_index(i as u64, m, s).unwrap(), t);
            }
        }
    }
}

fn arb_tuple() -> impl Strategy<Value = (GestureTuple, usize)> {
    (2usize..=12, 1usize..=6).prop_flat_map(|(m, s)| {
        proptest::collection::vec(0..m - 1, s).prop_map(move |steps| {
            // each later entry skips the value of its predecessor
            let mut phonemes = vec![steps[0]];
            for &d in &steps[1..] {
                let prev = *phonemes.last().unwrap();
                phonemes.push(if d < prev { d } else { d + 1 });
            }
            (GestureTuple::new(phonemes).unwrap(), m)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn index_round_trips((tuple, m) in arb_tuple()) {
        let index = tuple_index(&tuple, m).unwrap();
        prop_assert!(index < tuple_count(m, tuple.len()).unwrap());
        prop_assert_eq!(tuple_at_index(index, m, tuple.len()).unwrap(), tuple.clone());
        let text = tuple.to_string();
        prop_assert_eq!(text.parse::<GestureTuple>().unwrap(), tuple);
    }
}
