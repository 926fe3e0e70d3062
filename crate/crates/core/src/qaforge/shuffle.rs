use std::collections::HashSet;

use rand::seq::SliceRandom;

use super::ForgeError;
use crate::schema::OptionChoice;
use crate::seed;

/// Letters `A..` over `options` in their given order.
pub fn lettered(options: &[String]) -> Result<Vec<OptionChoice>, ForgeError> {
    check(options)?;
    Ok(options
        .iter()
        .enumerate()
        .map(|(i, text)| OptionChoice {
            letter: (b'A' + i as u8) as char,
            text: text.clone(),
        })
        .collect())
}

/// Seeded permutation of `options`; returns the lettered list and the
/// letter now holding `options[gold]`.
pub fn shuffle_options(
    options: &[String],
    gold: usize,
    seed: u64,
) -> Result<(Vec<OptionChoice>, char), ForgeError> {
    check(options)?;
    if gold >= options.len() {
        return Err(ForgeError::InvalidOptions(format!(
            "gold index {gold} out of range for {} options",
            options.len()
        )));
    }
    let mut order: Vec<usize> = (0..options.len()).collect();
    order.shuffle(&mut seed::rng(seed));
    let shuffled: Vec<String> = order.iter().map(|&i| options[i].clone()).collect();
    let pos = order.iter().position(|&i| i == gold).expect("permutation");
    Ok((lettered(&shuffled)?, (b'A' + pos as u8) as char))
}

fn check(options: &[String]) -> Result<(), ForgeError> {
    if !(2..=26).contains(&options.len()) {
        return Err(ForgeError::InvalidOptions(format!(
            "expected 2..=26 options, got {}",
            options.len()
        )));
    }
    let mut seen = HashSet::new();
    for o in options {
        let key = o.trim().to_lowercase();
        if key.is_empty() {
            return Err(ForgeError::InvalidOptions("empty option text".into()));
        }
        if !seen.insert(key) {
            return Err(ForgeError::DuplicateOption(o.clone()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn opts(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn two_options() {
        let o = opts(&["yes please", "no thanks"]);
        let (shuffled, gold) = shuffle_options(&o, 1, 42).unwrap();
        assert!(gold == 'A' || gold == 'B');
        let text = &shuffled.iter().find(|c| c.letter == gold).unwrap().text;
        assert_eq!(text, "no thanks");
    }

    #[test]
    fn deterministic() {
        let o = opts(&["a", "b", "c", "d", "e"]);
        assert_eq!(shuffle_options(&o, 2, 7).unwrap(), shuffle_options(&o, 2, 7).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            shuffle_options(&opts(&["a", "A "]), 0, 1),
            Err(ForgeError::DuplicateOption(_))
        ));
        assert!(shuffle_options(&opts(&["a"]), 0, 1).is_err());
        assert!(shuffle_options(&opts(&["a", "b"]), 2, 1).is_err());
    }

    proptest! {
        #[test]
        fn gold_letter_points_at_gold_text(n in 2usize..=26, gold_seed in any::<u64>(), seed in any::<u64>()) {
            let o: Vec<String> = (0..n).map(|i| format!("option {i}")).collect();
            let gold = (gold_seed % n as u64) as usize;
            let (shuffled, letter) = shuffle_options(&o, gold, seed).unwrap();
            prop_assert_eq!(shuffled.len(), n);
            let text = &shuffled.iter().find(|c| c.letter == letter).unwrap().text;
            prop_assert_eq!(text, &o[gold]);
            let mut texts: Vec<_> = shuffled.iter().map(|c| c.text.clone()).collect();
            texts.sort();
            let mut want = o.clone();
            want.sort();
            prop_assert_eq!(texts, want);
        }
    }
}
